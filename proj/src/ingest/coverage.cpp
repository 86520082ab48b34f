#include <algorithm>
#include <cmath>

#include "obeskit/ingest.hpp"

namespace obeskit::ingest {

EpochMs CoverageMap::span_ms() const {
    if (segments.empty()) return 0;
    return segments.back().end_ms - segments.front().start_ms;
}

EpochMs CoverageMap::recording_ms() const {
    EpochMs total = 0;
    for (const CoverageSegment& s : segments)
        if (s.recording) total += s.end_ms - s.start_ms;
    return total;
}

bool CoverageMap::is_recording(EpochMs t) const {
    for (const CoverageSegment& s : segments)
        if (t >= s.start_ms && t < s.end_ms) return s.recording;
    // The final instant belongs to the last segment.
    if (!segments.empty() && t == segments.back().end_ms) return segments.back().recording;
    return false;
}

EpochMs CoverageMap::recorded_between(EpochMs a, EpochMs b) const {
    EpochMs total = 0;
    for (const CoverageSegment& s : segments) {
        if (!s.recording) continue;
        const EpochMs lo = std::max(a, s.start_ms);
        const EpochMs hi = std::min(b, s.end_ms);
        if (hi > lo) total += hi - lo;
    }
    return total;
}

CoverageMap compute_coverage(const SensorStream& s, double gap_threshold_s) {
    if (s.empty()) throw DataError("compute_coverage: empty stream");
    if (gap_threshold_s <= 0.0) throw ConfigError("gap threshold must be positive");

    std::vector<EpochMs> ts;
    ts.reserve(s.size());
    if (s.kind == StreamKind::accel)
        for (const AccelSample& a : s.accel) ts.push_back(a.t);
    else
        for (const LocationSample& l : s.location) ts.push_back(l.t);

    const EpochMs thresh = static_cast<EpochMs>(std::llround(gap_threshold_s * 1000.0));
    CoverageMap cov;
    EpochMs seg_start = ts.front();
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (ts[i] - ts[i - 1] > thresh) {
            cov.segments.push_back({seg_start, ts[i - 1], true});
            cov.segments.push_back({ts[i - 1], ts[i], false});
            seg_start = ts[i];
        }
    }
    cov.segments.push_back({seg_start, ts.back(), true});
    return cov;
}

}  // namespace obeskit::ingest
