#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "obeskit/common.hpp"

namespace obeskit::models {

enum class Kernel { linear, rbf };

std::string to_string(Kernel k);
Kernel kernel_from_string(const std::string& s);

enum class Decomposition { one_vs_rest, one_vs_one };

struct SvmConfig {
    Kernel kernel = Kernel::rbf;
    double C = 1000.0;
    double gamma = 0.0;  // 0 → 1/D after feature standardization
    double eps = 1e-3;   // working-pair violation tolerance
    long long max_iter = 20'000'000;
    Decomposition decomposition = Decomposition::one_vs_one;
    // Empty → computed from training counts as w_i = min_k n_k / n_i.
    std::vector<double> class_weight;
};

// One binary max-margin machine inside a multiclass model. `sv_index`
// points into the shared support-vector pool; decision(x) > 0 favors
// `pos_class`.
struct BinaryMachine {
    int pos_class = 0;
    int neg_class = -1;  // -1 = rest
    std::vector<std::size_t> sv_index;
    std::vector<double> coef;  // alpha_i * y_i
    double rho = 0.0;
};

struct SvmModel {
    std::string task;  // e.g. "activity_type", "transport_mode"
    std::vector<std::string> classes;
    std::size_t dim = 0;
    Kernel kernel = Kernel::rbf;
    double C = 0.0;
    double gamma = 0.0;
    Decomposition decomposition = Decomposition::one_vs_one;
    std::vector<double> class_weight;  // per class, training-count derived
    std::vector<double> feat_mean, feat_std;
    std::string feature_spec;  // human-readable feature list
    std::string feature_hash;  // digest of feature_spec + dim
    std::vector<std::vector<double>> support_vectors;  // standardized space
    std::vector<BinaryMachine> machines;

    std::vector<double> standardize(const std::vector<double>& x) const;
    double machine_decision(const BinaryMachine& m, const std::vector<double>& xs) const;
    // Raw per-machine decision values for a standardized input.
    std::vector<double> decision_values(const std::vector<double>& x) const;
    int predict(const std::vector<double>& x) const;
    // One-vs-rest: softmax over decisions; one-vs-one: normalized vote shares.
    std::vector<double> probabilities(const std::vector<double>& x) const;
    std::vector<int> predict_batch(const std::vector<std::vector<double>>& xs) const;
    std::vector<int> predict_batch_serial(const std::vector<std::vector<double>>& xs) const;
};

// Deterministic sequential-minimal-optimization trainer. `y` holds class
// indices into `classes`; feature standardization is fitted internally.
SvmModel train_svm(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   const std::vector<std::string>& classes, const SvmConfig& cfg,
                   const std::string& task, const std::string& feature_spec);

// Versioned JSON persistence; loading verifies format version and, when
// `expect_feature_hash` is non-empty, the stored feature hash.
void save_model(const SvmModel& m, const std::string& path);
SvmModel load_model(const std::string& path, const std::string& expect_feature_hash = "");

std::string feature_hash_for(const std::string& feature_spec, std::size_t dim);

}  // namespace obeskit::models
