#include <cmath>

#include "obeskit/sleep.hpp"

namespace obeskit::sleep {

namespace {

struct SleepRun {
    std::size_t first, last;  // epoch indices, inclusive
};

void sessions_for_run(const std::vector<EpochScore>& s, std::size_t lo, std::size_t hi,
                      const SleepConfig& cfg, std::vector<SleepSession>& out) {
    // Maximal sleep runs within s[lo, hi).
    std::vector<SleepRun> runs;
    std::size_t i = lo;
    while (i < hi) {
        if (!s[i].sleep) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < hi && s[j + 1].sleep) ++j;
        runs.push_back({i, j});
        i = j + 1;
    }
    if (runs.empty()) return;

    const long long merge_gap =
        static_cast<long long>(std::llround(cfg.merge_gap_min));
    const long long min_session =
        static_cast<long long>(std::llround(cfg.min_session_min));

    std::size_t g = 0;
    while (g < runs.size()) {
        // Merge forward while the wake gap stays under the threshold.
        std::size_t end = g;
        long long tti = 0, ni = 0;
        while (end + 1 < runs.size()) {
            const long long wake_min =
                static_cast<long long>(runs[end + 1].first - runs[end].last - 1);
            if (wake_min >= merge_gap) break;
            tti += wake_min;
            ++ni;
            ++end;
        }
        SleepSession sess;
        sess.SS = s[runs[g].first].minute_start;
        sess.SE = s[runs[end].last].minute_start + kMsPerMinute;
        sess.GST_min = (sess.SE - sess.SS) / kMsPerMinute;
        sess.TTI_min = tti;
        sess.NI = ni;
        sess.NST_min = sess.GST_min - sess.TTI_min;
        if (sess.GST_min >= min_session) out.push_back(sess);
        g = end + 1;
    }
}

}  // namespace

std::vector<SleepSession> segment_sessions(const std::vector<EpochScore>& scores,
                                           const SleepConfig& cfg) {
    std::vector<SleepSession> out;
    std::size_t run_begin = 0;
    for (std::size_t i = 1; i <= scores.size(); ++i) {
        // Recording gaps split the minute grid; sessions never span them.
        const bool run_ends =
            i == scores.size() ||
            scores[i].minute_start - scores[i - 1].minute_start != kMsPerMinute;
        if (!run_ends) continue;
        sessions_for_run(scores, run_begin, i, cfg, out);
        run_begin = i;
    }
    return out;
}

}  // namespace obeskit::sleep
