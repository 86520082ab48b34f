#include <iomanip>
#include <sstream>

#include "obeskit/eval.hpp"

namespace obeskit::eval {

namespace {

std::string fmt(double v, int prec = 2) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
}

std::string fmt_opt(const std::optional<double>& v, int prec = 2) {
    return v ? fmt(*v, prec) : std::string("n/a");
}

}  // namespace

std::string poi_match_markdown(const std::vector<std::pair<std::string, PoiMatchResult>>& rows) {
    std::ostringstream out;
    out << "| subject | TP | FP | FN | precision | recall | F1 |\n";
    out << "|---|---|---|---|---|---|---|\n";
    for (const auto& [name, r] : rows)
        out << "| " << name << " | " << r.tp << " | " << r.fp << " | " << r.fn << " | "
            << fmt_opt(r.precision) << " | " << fmt_opt(r.recall) << " | " << fmt_opt(r.f1)
            << " |\n";
    if (!rows.empty())
        out << "\nthresholds: max distance " << fmt(rows.front().second.max_dist_m, 1)
            << " m, min overlap " << fmt(rows.front().second.min_overlap, 2)
            << " of the truth stay\n";
    return out.str();
}

std::string step_error_markdown(const std::vector<StepGroupStats>& rows) {
    std::ostringstream out;
    out << "| group | n | predicted | abs error | rel error % |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& g : rows) {
        out << "| " << g.group << " | " << g.n << " | " << fmt(g.pred_mean, 1) << " ± "
            << fmt(g.pred_std, 1) << " | " << fmt(g.abs_mean, 1) << " ± " << fmt(g.abs_std, 1)
            << " | " << fmt(g.rel_mean, 1) << " ± " << fmt(g.rel_std, 1);
        if (g.rel_excluded)
            out << " (excl. " << g.rel_excluded << " zero-truth)";
        out << " |\n";
    }
    return out.str();
}

std::string confusion_markdown(const ConfusionMatrix& m) {
    std::ostringstream out;
    out << "counts (rows = truth, columns = predicted)\n\n";
    out << "| truth \\ pred |";
    for (const auto& l : m.labels) out << " " << l << " |";
    out << "\n|---|";
    for (std::size_t j = 0; j < m.labels.size(); ++j) out << "---|";
    out << "\n";
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out << "| " << m.labels[i] << " |";
        for (std::size_t j = 0; j < m.labels.size(); ++j) out << " " << m.counts[i][j] << " |";
        out << "\n";
    }
    out << "\nrow-normalized %\n\n";
    const auto pct = m.row_percent();
    out << "| truth \\ pred |";
    for (const auto& l : m.labels) out << " " << l << " |";
    out << "\n|---|";
    for (std::size_t j = 0; j < m.labels.size(); ++j) out << "---|";
    out << "\n";
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out << "| " << m.labels[i] << " |";
        for (std::size_t j = 0; j < m.labels.size(); ++j) out << " " << fmt(pct[i][j], 1) << " |";
        out << "\n";
    }
    out << "\noverall accuracy: " << fmt(m.accuracy() * 100.0, 1) << "% over " << m.total()
        << " windows\n";
    return out.str();
}

std::string sleep_eval_markdown(const std::vector<std::pair<std::string, SleepEvalResult>>& rows) {
    std::ostringstream out;
    for (const auto& [name, r] : rows) {
        out << "### " << name << "\n\n";
        out << "correct session count: " << r.n_count_matched << "/" << r.n_recordings << " ("
            << fmt(r.css * 100.0, 2) << "%)\n\n";
        if (r.ae.empty()) continue;
        out << "| indicator | sessions | AE mean | AE std | AE max |\n";
        out << "|---|---|---|---|---|\n";
        for (const auto& [ind, s] : r.ae)
            out << "| " << ind << " | " << s.n << " | " << fmt(s.mean, 1) << " | "
                << fmt(s.stddev, 1) << " | " << fmt(s.max, 1) << " |\n";
        out << "\n";
    }
    return out.str();
}

}  // namespace obeskit::eval
