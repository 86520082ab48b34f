#include <cmath>

#include "obeskit/ingest.hpp"

namespace obeskit::ingest {

SensorStream resample(const SensorStream& s, double target_hz, double gap_threshold_s) {
    if (s.kind != StreamKind::accel)
        throw DataError("resample: only accelerometer streams can be resampled");
    if (target_hz <= 0.0) throw ConfigError("resample: target rate must be positive");

    const CoverageMap cov = compute_coverage(s, gap_threshold_s);

    SensorStream out;
    out.subject_id = s.subject_id;
    out.device_profile = s.device_profile;
    out.kind = StreamKind::accel;
    out.tz = s.tz;
    out.nominal_rate_hz = target_hz;

    const double step_ms = 1000.0 / target_hz;
    std::size_t cursor = 0;  // index into s.accel, advances monotonically

    for (const CoverageSegment& seg : cov.segments) {
        if (!seg.recording) continue;
        // Advance to the first source sample of this segment.
        while (cursor < s.accel.size() && s.accel[cursor].t < seg.start_ms) ++cursor;
        std::size_t lo = cursor;
        for (long long k = 0;; ++k) {
            const double t_exact = static_cast<double>(seg.start_ms) + k * step_ms;
            const EpochMs t = static_cast<EpochMs>(std::llround(t_exact));
            if (t > seg.end_ms) break;
            while (lo + 1 < s.accel.size() && s.accel[lo + 1].t <= t &&
                   s.accel[lo + 1].t <= seg.end_ms)
                ++lo;
            AccelSample r;
            r.t = t;
            const AccelSample& a = s.accel[lo];
            if (a.t == t || lo + 1 >= s.accel.size() || s.accel[lo + 1].t > seg.end_ms) {
                r.x = a.x;
                r.y = a.y;
                r.z = a.z;
            } else {
                const AccelSample& b = s.accel[lo + 1];
                const double w = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
                r.x = a.x + w * (b.x - a.x);
                r.y = a.y + w * (b.y - a.y);
                r.z = a.z + w * (b.z - a.z);
            }
            out.accel.push_back(r);
        }
    }
    return out;
}

}  // namespace obeskit::ingest
