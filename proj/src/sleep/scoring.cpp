#include <cmath>

#include "obeskit/sleep.hpp"

namespace obeskit::sleep {

std::string to_string(Scorer s) { return s == Scorer::cole ? "cole" : "sadeh"; }

Scorer scorer_from_string(const std::string& s) {
    if (s == "cole") return Scorer::cole;
    if (s == "sadeh") return Scorer::sadeh;
    throw ConfigError("unknown sleep scorer: " + s);
}

std::vector<activity::ActivityCounts> mask_nonwear(
    const std::vector<activity::ActivityCounts>& counts, double nonwear_zero_min) {
    const std::size_t run_limit =
        static_cast<std::size_t>(std::llround(std::max(1.0, nonwear_zero_min)));
    std::vector<activity::ActivityCounts> out;
    out.reserve(counts.size());
    std::size_t i = 0;
    while (i < counts.size()) {
        if (counts[i].counts != 0.0) {
            out.push_back(counts[i]);
            ++i;
            continue;
        }
        // Extend over the contiguous exact-zero run.
        std::size_t j = i;
        while (j + 1 < counts.size() && counts[j + 1].counts == 0.0 &&
               counts[j + 1].minute_start - counts[j].minute_start == kMsPerMinute)
            ++j;
        const std::size_t run = j - i + 1;
        if (run <= run_limit)
            for (std::size_t k = i; k <= j; ++k) out.push_back(counts[k]);
        i = j + 1;
    }
    return out;
}

namespace {

void score_run(const std::vector<activity::ActivityCounts>& c, std::size_t lo, std::size_t hi,
               const SleepConfig& cfg, std::vector<EpochScore>& out) {
    const long long n = static_cast<long long>(hi - lo);
    auto at = [&](long long k) {  // zero-padded window access
        if (k < 0 || k >= n) return 0.0;
        const double v = c[lo + static_cast<std::size_t>(k)].counts * cfg.count_scale;
        if (v < 0.0) throw DataError("negative activity counts in sleep scoring");
        return v;
    };

    for (long long i = 0; i < n; ++i) {
        EpochScore e;
        e.minute_start = c[lo + static_cast<std::size_t>(i)].minute_start;
        e.counts = at(i);
        e.scorer = cfg.scorer;
        if (cfg.scorer == Scorer::cole) {
            double d = 0.0;
            for (int k = -4; k <= 2; ++k) d += cfg.cole.w[k + 4] * at(i + k);
            d *= cfg.cole.scale;
            e.sleep = d < cfg.cole.threshold;
        } else {
            double mw = 0.0;
            int nat = 0;
            for (int k = -5; k <= 5; ++k) {
                const double v = at(i + k);
                mw += v;
                if (v >= cfg.sadeh.nat_lo && v < cfg.sadeh.nat_hi) ++nat;
            }
            mw /= 11.0;
            double mean6 = 0.0;
            for (int k = -5; k <= 0; ++k) mean6 += at(i + k);
            mean6 /= 6.0;
            double var6 = 0.0;
            for (int k = -5; k <= 0; ++k) {
                const double d = at(i + k) - mean6;
                var6 += d * d;
            }
            const double sd6 = std::sqrt(var6 / 6.0);
            const double lg = std::log(at(i) + 1.0);
            const double ps = cfg.sadeh.b0 - cfg.sadeh.b1 * mw -
                              cfg.sadeh.b2 * static_cast<double>(nat) - cfg.sadeh.b3 * sd6 -
                              cfg.sadeh.b4 * lg;
            e.sleep = ps >= 0.0;
        }
        out.push_back(e);
    }
}

}  // namespace

std::vector<EpochScore> score_epochs(const std::vector<activity::ActivityCounts>& counts,
                                     const SleepConfig& cfg) {
    std::vector<EpochScore> out;
    out.reserve(counts.size());
    std::size_t run_begin = 0;
    for (std::size_t i = 1; i <= counts.size(); ++i) {
        const bool run_ends =
            i == counts.size() ||
            counts[i].minute_start - counts[i - 1].minute_start != kMsPerMinute;
        if (!run_ends) continue;
        score_run(counts, run_begin, i, cfg, out);
        run_begin = i;
    }
    return out;
}

}  // namespace obeskit::sleep
