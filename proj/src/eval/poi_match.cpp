#include <algorithm>

#include "obeskit/eval.hpp"

namespace obeskit::eval {

namespace {

void fill_metrics(PoiMatchResult& r) {
    const double tp = static_cast<double>(r.tp);
    if (r.tp + r.fp > 0) r.precision = tp / static_cast<double>(r.tp + r.fp);
    if (r.tp + r.fn > 0) r.recall = tp / static_cast<double>(r.tp + r.fn);
    if (r.precision && r.recall && (*r.precision + *r.recall) > 0.0)
        r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
}

}  // namespace

PoiMatchResult metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
    PoiMatchResult r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    fill_metrics(r);
    return r;
}

PoiMatchResult match_pois(const std::vector<location::PointOfInterest>& truth,
                          const std::vector<location::PointOfInterest>& detected,
                          double max_dist_m, double min_overlap) {
    for (const auto& p : truth)
        if (!p.center) throw DataError("truth place without coordinates cannot be matched");
    for (const auto& p : detected)
        if (!p.center) throw DataError("detected place without coordinates cannot be matched");

    // Eligibility graph: distance and truth-relative time-overlap thresholds.
    const std::size_t nt = truth.size(), nd = detected.size();
    std::vector<std::vector<std::size_t>> adj(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        const auto& t = truth[i];
        const double t_dur = static_cast<double>(t.depart_t - t.arrive_t);
        for (std::size_t j = 0; j < nd; ++j) {
            const auto& d = detected[j];
            if (geo::haversine_m(*t.center, *d.center) > max_dist_m) continue;
            const double overlap = static_cast<double>(
                std::min(t.depart_t, d.depart_t) - std::max(t.arrive_t, d.arrive_t));
            if (overlap < min_overlap * t_dur) continue;
            adj[i].push_back(j);
        }
    }

    // Kuhn's augmenting paths: maximum-cardinality matching, deterministic
    // because rows and candidate lists are processed in index order.
    std::vector<long long> match_d(nd, -1);
    std::vector<char> used(nd, 0);
    auto try_augment = [&](auto&& self, std::size_t i) -> bool {
        for (std::size_t j : adj[i]) {
            if (used[j]) continue;
            used[j] = 1;
            if (match_d[j] < 0 || self(self, static_cast<std::size_t>(match_d[j]))) {
                match_d[j] = static_cast<long long>(i);
                return true;
            }
        }
        return false;
    };
    for (std::size_t i = 0; i < nt; ++i) {
        std::fill(used.begin(), used.end(), 0);
        try_augment(try_augment, i);
    }

    PoiMatchResult r;
    r.max_dist_m = max_dist_m;
    r.min_overlap = min_overlap;
    for (std::size_t j = 0; j < nd; ++j)
        if (match_d[j] >= 0) r.pairs.emplace_back(static_cast<std::size_t>(match_d[j]), j);
    std::sort(r.pairs.begin(), r.pairs.end());
    r.tp = r.pairs.size();
    r.fp = nd - r.tp;
    r.fn = nt - r.tp;
    fill_metrics(r);
    return r;
}

}  // namespace obeskit::eval
