#include <algorithm>
#include <map>
#include <set>

#include "obeskit/geoagg.hpp"

namespace obeskit::geoagg {

namespace {

// numpy-style binning: half-open [e_i, e_{i+1}) except the last bin, which is
// closed; values outside the edge range are not counted.
void hist_add(IndicatorStats& s, double v) {
    if (s.hist_edges.size() < 2) return;
    const auto& e = s.hist_edges;
    if (v < e.front() || v > e.back()) return;
    if (v == e.back()) {
        ++s.hist.back();
        return;
    }
    auto it = std::upper_bound(e.begin(), e.end(), v);
    const std::size_t bin = static_cast<std::size_t>(it - e.begin()) - 1;
    ++s.hist[bin];
}

}  // namespace

std::vector<AggregateCell> aggregate_population(const std::vector<GeohashVote>& votes,
                                                int precision, const AggregateConfig& cfg) {
    if (precision < 1 || precision > 12)
        throw ConfigError("aggregation precision must be 1-12, got " + std::to_string(precision));

    std::map<std::string, AggregateCell> cells;
    std::map<std::string, std::set<std::string>> voters;
    for (const auto& v : votes) {
        if (static_cast<int>(v.gh.size()) < precision)
            throw DataError("vote cell " + v.gh + " is coarser than aggregation precision " +
                            std::to_string(precision));
        const std::string cell_gh = v.gh.substr(0, static_cast<std::size_t>(precision));
        AggregateCell& cell = cells[cell_gh];
        cell.gh = cell_gh;
        ++cell.n_votes;
        voters[cell_gh].insert(v.voter);
        for (const auto& [name, value] : v.payload) {
            IndicatorStats& s = cell.stats[name];
            if (s.n == 0) {
                auto it = cfg.hist_edges.find(name);
                if (it != cfg.hist_edges.end() && it->second.size() >= 2) {
                    if (!std::is_sorted(it->second.begin(), it->second.end()))
                        throw ConfigError("histogram edges for " + name + " must be ascending");
                    s.hist_edges = it->second;
                    s.hist.assign(s.hist_edges.size() - 1, 0);
                }
            }
            s.sum += value;
            ++s.n;
            hist_add(s, value);
        }
    }

    std::vector<AggregateCell> out;
    out.reserve(cells.size());
    for (auto& [gh, cell] : cells) {
        cell.n_voters = voters[gh].size();
        cell.suppressed = cell.n_voters < cfg.k_anon;
        for (auto& [_, s] : cell.stats) s.mean = s.n ? s.sum / static_cast<double>(s.n) : 0.0;
        out.push_back(std::move(cell));
    }
    return out;  // sorted by cell code via the map
}

IndividualAgg aggregate_individual(const std::vector<DayRecord>& days, double min_hours) {
    IndividualAgg agg;
    std::vector<const DayRecord*> valid;
    for (const auto& d : days)
        if (d.recorded_hours >= min_hours) valid.push_back(&d);
    if (valid.empty()) {
        agg.defined = false;
        agg.reason = "no day with at least " + std::to_string(min_hours) + " recorded hours";
        return agg;
    }
    agg.defined = true;
    agg.n_days = valid.size();

    std::set<std::string> names;
    for (const auto* d : valid)
        for (const auto& [name, _] : d->totals) names.insert(name);

    const double n = static_cast<double>(valid.size());
    for (const auto& name : names) {
        double rate_sum = 0.0, total_sum = 0.0;
        for (const auto* d : valid) {
            auto it = d->totals.find(name);
            const double total = it == d->totals.end() ? 0.0 : it->second;
            total_sum += total;
            rate_sum += d->recorded_hours > 0.0 ? total / d->recorded_hours : 0.0;
        }
        agg.per_hour_mean[name] = rate_sum / n;
        agg.daily_mean[name] = total_sum / n;
    }
    return agg;
}

}  // namespace obeskit::geoagg
