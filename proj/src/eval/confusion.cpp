#include "obeskit/eval.hpp"

namespace obeskit::eval {

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          const std::vector<std::string>& classes) {
    if (truth.size() != predicted.size())
        throw DataError("confusion input sequences differ in length");
    if (classes.empty()) throw ConfigError("confusion needs a non-empty class list");

    ConfusionMatrix m;
    m.labels = classes;
    const std::size_t k = classes.size();
    m.counts.assign(k, std::vector<std::size_t>(k, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i], p = predicted[i];
        if (t < 0 || static_cast<std::size_t>(t) >= k || p < 0 || static_cast<std::size_t>(p) >= k)
            throw DataError("label outside the class set at pair " + std::to_string(i));
        ++m.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    return m;
}

std::vector<std::vector<double>> ConfusionMatrix::row_percent() const {
    std::vector<std::vector<double>> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::size_t row_sum = 0;
        for (std::size_t c : counts[i]) row_sum += c;
        out[i].resize(counts[i].size(), 0.0);
        if (row_sum == 0) continue;
        for (std::size_t j = 0; j < counts[i].size(); ++j)
            out[i][j] = 100.0 * static_cast<double>(counts[i][j]) / static_cast<double>(row_sum);
    }
    return out;
}

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (const auto& row : counts)
        for (std::size_t c : row) n += c;
    return n;
}

double ConfusionMatrix::accuracy() const {
    const std::size_t n = total();
    if (n == 0) return 0.0;
    std::size_t diag = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) diag += counts[i][i];
    return static_cast<double>(diag) / static_cast<double>(n);
}

double ConfusionMatrix::recall(std::size_t cls) const {
    if (cls >= counts.size()) throw InternalError("confusion recall: class index out of range");
    std::size_t row_sum = 0;
    for (std::size_t c : counts[cls]) row_sum += c;
    if (row_sum == 0) return 0.0;
    return static_cast<double>(counts[cls][cls]) / static_cast<double>(row_sum);
}

}  // namespace obeskit::eval
