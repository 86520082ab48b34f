#include <algorithm>
#include <cmath>
#include <limits>

#include "obeskit/core/exec.hpp"
#include "obeskit/models.hpp"

namespace obeskit::models {

std::string to_string(Kernel k) { return k == Kernel::linear ? "linear" : "rbf"; }

Kernel kernel_from_string(const std::string& s) {
    if (s == "linear") return Kernel::linear;
    if (s == "rbf") return Kernel::rbf;
    throw ConfigError("unknown kernel: " + s);
}

namespace {

double kernel_eval(Kernel k, double gamma, const std::vector<double>& a,
                   const std::vector<double>& b) {
    if (k == Kernel::linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
        return dot;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

struct BinaryResult {
    std::vector<double> alpha;
    double rho = 0.0;
};

// Two-variable decomposition solver for the soft-margin dual with
// per-sample box constraints; maximal-violating-pair working-set
// selection with lowest-index tie-breaks keeps runs reproducible.
BinaryResult solve_binary(const std::vector<std::size_t>& idx, const std::vector<signed char>& y,
                          const std::vector<double>& box,
                          const std::vector<std::vector<double>>& X, Kernel kern, double gamma,
                          double eps, long long max_iter) {
    const std::size_t n = idx.size();
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            K[i][j] = K[j][i] = kernel_eval(kern, gamma, X[idx[i]], X[idx[j]]);

    std::vector<double> alpha(n, 0.0), G(n, -1.0);
    constexpr double tau = 1e-12;

    long long iter = 0;
    for (; iter < max_iter; ++iter) {
        // Working pair: most violating indices over the feasible directions.
        int i = -1, j = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool up = (y[t] > 0 && alpha[t] < box[t]) || (y[t] < 0 && alpha[t] > 0.0);
            const bool low = (y[t] > 0 && alpha[t] > 0.0) || (y[t] < 0 && alpha[t] < box[t]);
            const double v = -static_cast<double>(y[t]) * G[t];
            if (up && v > gmax) {
                gmax = v;
                i = static_cast<int>(t);
            }
            if (low && v < gmin) {
                gmin = v;
                j = static_cast<int>(t);
            }
        }
        if (i < 0 || j < 0 || gmax - gmin <= eps) break;

        const double Kii = K[i][i], Kjj = K[j][j], Kij = K[i][j];
        const double Ci = box[i], Cj = box[j];
        const double old_ai = alpha[i], old_aj = alpha[j];

        if (y[i] != y[j]) {
            double quad = Kii + Kjj - 2.0 * Kij;
            if (quad <= 0.0) quad = tau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
            }
            if (diff > Ci - Cj) {
                if (alpha[i] > Ci) {
                    alpha[i] = Ci;
                    alpha[j] = Ci - diff;
                }
            } else {
                if (alpha[j] > Cj) {
                    alpha[j] = Cj;
                    alpha[i] = Cj + diff;
                }
            }
        } else {
            double quad = Kii + Kjj - 2.0 * Kij;
            if (quad <= 0.0) quad = tau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > Ci) {
                if (alpha[i] > Ci) {
                    alpha[i] = Ci;
                    alpha[j] = sum - Ci;
                }
            } else {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
            }
            if (sum > Cj) {
                if (alpha[j] > Cj) {
                    alpha[j] = Cj;
                    alpha[i] = sum - Cj;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        if (dai == 0.0 && daj == 0.0) break;  // numerically stuck
        for (std::size_t t = 0; t < n; ++t)
            G[t] += static_cast<double>(y[t]) *
                    (static_cast<double>(y[i]) * K[i][t] * dai +
                     static_cast<double>(y[j]) * K[j][t] * daj);
    }

    // Offset from the KKT conditions of the converged iterate.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = static_cast<double>(y[t]) * G[t];
        if (alpha[t] >= box[t]) {
            if (y[t] < 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    BinaryResult r;
    r.alpha = std::move(alpha);
    r.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    return r;
}

}  // namespace

std::vector<double> SvmModel::standardize(const std::vector<double>& x) const {
    if (x.size() != dim) throw DataError("feature dimension mismatch");
    std::vector<double> xs(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const double s = feat_std[i] > 0.0 ? feat_std[i] : 1.0;
        xs[i] = (x[i] - feat_mean[i]) / s;
    }
    return xs;
}

double SvmModel::machine_decision(const BinaryMachine& m, const std::vector<double>& xs) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < m.sv_index.size(); ++k)
        acc += m.coef[k] * kernel_eval(kernel, gamma, support_vectors[m.sv_index[k]], xs);
    return acc - m.rho;
}

std::vector<double> SvmModel::decision_values(const std::vector<double>& x) const {
    const std::vector<double> xs = standardize(x);
    std::vector<double> out(machines.size());
    for (std::size_t m = 0; m < machines.size(); ++m) out[m] = machine_decision(machines[m], xs);
    return out;
}

int SvmModel::predict(const std::vector<double>& x) const {
    const std::vector<double> dec = decision_values(x);
    if (decomposition == Decomposition::one_vs_rest) {
        std::size_t best = 0;
        for (std::size_t m = 1; m < dec.size(); ++m)
            if (dec[m] > dec[best]) best = m;
        return machines[best].pos_class;
    }
    std::vector<int> votes(classes.size(), 0);
    for (std::size_t m = 0; m < machines.size(); ++m)
        ++votes[dec[m] > 0.0 ? machines[m].pos_class : machines[m].neg_class];
    int best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best]) best = static_cast<int>(c);
    return best;
}

std::vector<double> SvmModel::probabilities(const std::vector<double>& x) const {
    const std::vector<double> dec = decision_values(x);
    std::vector<double> p(classes.size(), 0.0);
    if (decomposition == Decomposition::one_vs_rest) {
        double mx = -std::numeric_limits<double>::infinity();
        for (double d : dec) mx = std::max(mx, d);
        double z = 0.0;
        for (std::size_t m = 0; m < dec.size(); ++m) {
            const double e = std::exp(dec[m] - mx);
            p[machines[m].pos_class] += e;
            z += e;
        }
        for (double& v : p) v /= z;
    } else {
        for (std::size_t m = 0; m < dec.size(); ++m)
            p[dec[m] > 0.0 ? machines[m].pos_class : machines[m].neg_class] += 1.0;
        for (double& v : p) v /= static_cast<double>(machines.size());
    }
    return p;
}

std::vector<int> SvmModel::predict_batch(const std::vector<std::vector<double>>& xs) const {
    std::vector<int> out(xs.size());
    exec::parallel_for(xs.size(), [&](std::size_t i) { out[i] = predict(xs[i]); });
    return out;
}

std::vector<int> SvmModel::predict_batch_serial(const std::vector<std::vector<double>>& xs) const {
    std::vector<int> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = predict(xs[i]);
    return out;
}

SvmModel train_svm(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   const std::vector<std::string>& classes, const SvmConfig& cfg,
                   const std::string& task, const std::string& feature_spec) {
    if (X.empty() || X.size() != y.size()) throw DataError("training set empty or mislabeled");
    const std::size_t n = X.size(), dim = X[0].size();
    for (const std::vector<double>& row : X)
        if (row.size() != dim) throw DataError("inconsistent feature dimension");
    const std::size_t k = classes.size();
    std::vector<std::size_t> counts(k, 0);
    for (int label : y) {
        if (label < 0 || static_cast<std::size_t>(label) >= k)
            throw DataError("label outside class set");
        ++counts[label];
    }
    std::size_t present = 0, min_count = n;
    for (std::size_t c = 0; c < k; ++c)
        if (counts[c] > 0) {
            ++present;
            min_count = std::min(min_count, counts[c]);
        }
    if (present < 2) throw DataError("training requires at least two classes with samples");

    SvmModel m;
    m.task = task;
    m.classes = classes;
    m.dim = dim;
    m.kernel = cfg.kernel;
    m.C = cfg.C;
    m.decomposition = cfg.decomposition;
    m.feature_spec = feature_spec;
    m.feature_hash = feature_hash_for(feature_spec, dim);

    if (!cfg.class_weight.empty()) {
        if (cfg.class_weight.size() != k) throw ConfigError("class_weight size mismatch");
        m.class_weight = cfg.class_weight;
    } else {
        m.class_weight.assign(k, 1.0);
        for (std::size_t c = 0; c < k; ++c)
            if (counts[c] > 0)
                m.class_weight[c] =
                    static_cast<double>(min_count) / static_cast<double>(counts[c]);
    }

    // Standardize features on the training set.
    m.feat_mean.assign(dim, 0.0);
    m.feat_std.assign(dim, 0.0);
    for (const std::vector<double>& row : X)
        for (std::size_t i = 0; i < dim; ++i) m.feat_mean[i] += row[i];
    for (double& v : m.feat_mean) v /= static_cast<double>(n);
    for (const std::vector<double>& row : X)
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = row[i] - m.feat_mean[i];
            m.feat_std[i] += d * d;
        }
    for (double& v : m.feat_std) v = std::sqrt(v / static_cast<double>(n));

    std::vector<std::vector<double>> Xs(n);
    for (std::size_t r = 0; r < n; ++r) {
        Xs[r].resize(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            const double s = m.feat_std[i] > 0.0 ? m.feat_std[i] : 1.0;
            Xs[r][i] = (X[r][i] - m.feat_mean[i]) / s;
        }
    }

    m.gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(dim);

    // Support-vector pool shared across machines: one slot per training row,
    // materialized lazily.
    std::vector<long long> pool_slot(n, -1);
    auto pool_index = [&](std::size_t row) {
        if (pool_slot[row] < 0) {
            pool_slot[row] = static_cast<long long>(m.support_vectors.size());
            m.support_vectors.push_back(Xs[row]);
        }
        return static_cast<std::size_t>(pool_slot[row]);
    };

    auto run_machine = [&](int pos, int neg, const std::vector<std::size_t>& idx,
                           const std::vector<signed char>& yy, const std::vector<double>& box) {
        const BinaryResult r =
            solve_binary(idx, yy, box, Xs, m.kernel, m.gamma, cfg.eps, cfg.max_iter);
        BinaryMachine bm;
        bm.pos_class = pos;
        bm.neg_class = neg;
        for (std::size_t t = 0; t < idx.size(); ++t) {
            if (r.alpha[t] <= 0.0) continue;
            bm.sv_index.push_back(pool_index(idx[t]));
            bm.coef.push_back(r.alpha[t] * static_cast<double>(yy[t]));
        }
        bm.rho = r.rho;
        m.machines.push_back(std::move(bm));
    };

    if (cfg.decomposition == Decomposition::one_vs_rest) {
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            std::vector<std::size_t> idx(n);
            std::vector<signed char> yy(n);
            std::vector<double> box(n);
            for (std::size_t r = 0; r < n; ++r) {
                idx[r] = r;
                yy[r] = y[r] == static_cast<int>(c) ? 1 : -1;
                box[r] = cfg.C * m.class_weight[y[r]];
            }
            run_machine(static_cast<int>(c), -1, idx, yy, box);
        }
    } else {
        for (std::size_t a = 0; a < k; ++a) {
            if (counts[a] == 0) continue;
            for (std::size_t b = a + 1; b < k; ++b) {
                if (counts[b] == 0) continue;
                std::vector<std::size_t> idx;
                std::vector<signed char> yy;
                std::vector<double> box;
                for (std::size_t r = 0; r < n; ++r) {
                    if (y[r] != static_cast<int>(a) && y[r] != static_cast<int>(b)) continue;
                    idx.push_back(r);
                    yy.push_back(y[r] == static_cast<int>(a) ? 1 : -1);
                    box.push_back(cfg.C * m.class_weight[y[r]]);
                }
                run_machine(static_cast<int>(a), static_cast<int>(b), idx, yy, box);
            }
        }
    }
    return m;
}

}  // namespace obeskit::models
