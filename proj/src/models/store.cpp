#include <fstream>

#include <nlohmann/json.hpp>

#include "obeskit/core/digest.hpp"
#include "obeskit/models.hpp"

namespace obeskit::models {

using nlohmann::json;

namespace {
constexpr int kFormatVersion = 1;

std::string decomposition_name(Decomposition d) {
    return d == Decomposition::one_vs_rest ? "one_vs_rest" : "one_vs_one";
}

Decomposition decomposition_from_name(const std::string& s) {
    if (s == "one_vs_rest") return Decomposition::one_vs_rest;
    if (s == "one_vs_one") return Decomposition::one_vs_one;
    throw DataError("model file: unknown decomposition " + s);
}
}  // namespace

std::string feature_hash_for(const std::string& feature_spec, std::size_t dim) {
    return digest::sha256_hex(feature_spec + "|dim=" + std::to_string(dim)).substr(0, 16);
}

void save_model(const SvmModel& m, const std::string& path) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "svm";
    j["task"] = m.task;
    j["classes"] = m.classes;
    j["feature_dim"] = m.dim;
    j["feature_spec"] = m.feature_spec;
    j["feature_hash"] = m.feature_hash;
    j["kernel"] = to_string(m.kernel);
    j["C"] = m.C;
    j["gamma"] = m.gamma;
    j["class_weights"] = m.class_weight;
    j["decomposition"] = decomposition_name(m.decomposition);
    j["standardize"] = {{"mean", m.feat_mean}, {"std", m.feat_std}};
    j["support_vectors"] = m.support_vectors;
    json machines = json::array();
    for (const BinaryMachine& bm : m.machines)
        machines.push_back({{"pos", bm.pos_class},
                            {"neg", bm.neg_class},
                            {"sv_index", bm.sv_index},
                            {"coef", bm.coef},
                            {"rho", bm.rho}});
    j["machines"] = std::move(machines);

    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw DataError("model write failed: " + path);
}

SvmModel load_model(const std::string& path, const std::string& expect_feature_hash) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("model file is not valid JSON: " + path + ": " + e.what());
    }
    if (!j.contains("format_version") || !j["format_version"].is_number_integer())
        throw DataError("model file missing format_version: " + path);
    if (j["format_version"].get<int>() != kFormatVersion)
        throw DataError("unsupported model format_version in " + path);
    if (j.value("kind", "") != "svm") throw DataError("not an svm model file: " + path);

    SvmModel m;
    m.task = j.value("task", "");
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.dim = j.at("feature_dim").get<std::size_t>();
    m.feature_spec = j.value("feature_spec", "");
    m.feature_hash = j.value("feature_hash", "");
    m.kernel = kernel_from_string(j.at("kernel").get<std::string>());
    m.C = j.at("C").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.class_weight = j.at("class_weights").get<std::vector<double>>();
    m.decomposition = decomposition_from_name(j.at("decomposition").get<std::string>());
    m.feat_mean = j.at("standardize").at("mean").get<std::vector<double>>();
    m.feat_std = j.at("standardize").at("std").get<std::vector<double>>();
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    for (const json& bj : j.at("machines")) {
        BinaryMachine bm;
        bm.pos_class = bj.at("pos").get<int>();
        bm.neg_class = bj.at("neg").get<int>();
        bm.sv_index = bj.at("sv_index").get<std::vector<std::size_t>>();
        bm.coef = bj.at("coef").get<std::vector<double>>();
        bm.rho = bj.at("rho").get<double>();
        m.machines.push_back(std::move(bm));
    }

    if (m.feat_mean.size() != m.dim || m.feat_std.size() != m.dim)
        throw DataError("model file: standardization size mismatch: " + path);
    for (const BinaryMachine& bm : m.machines)
        for (std::size_t idx : bm.sv_index)
            if (idx >= m.support_vectors.size())
                throw DataError("model file: support-vector index out of range: " + path);

    if (!expect_feature_hash.empty() && m.feature_hash != expect_feature_hash)
        throw DataError("model file feature hash mismatch (model " + m.feature_hash +
                        ", expected " + expect_feature_hash + "): refusing to score");
    return m;
}

}  // namespace obeskit::models
