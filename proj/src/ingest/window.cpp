#include <cmath>

#include "obeskit/ingest.hpp"

namespace obeskit::ingest {

FrameSet window(const SensorStream& s, double len_s, double hop_s, double gap_threshold_s) {
    if (len_s <= 0.0) throw ConfigError("window: frame length must be positive");
    if (hop_s <= 0.0) throw ConfigError("window: hop must be positive");
    if (s.kind != StreamKind::accel) throw DataError("window: accelerometer streams only");

    FrameSet fs;
    fs.rate_hz = s.nominal_rate_hz;
    if (s.empty() || fs.rate_hz <= 0.0) return fs;
    fs.len_samples = static_cast<std::size_t>(std::llround(len_s * fs.rate_hz));
    fs.hop_samples = static_cast<std::size_t>(std::llround(hop_s * fs.rate_hz));
    if (fs.len_samples == 0 || fs.hop_samples == 0)
        throw ConfigError("window: frame or hop shorter than one sample period");

    const EpochMs thresh = static_cast<EpochMs>(std::llround(gap_threshold_s * 1000.0));
    const EpochMs len_ms = static_cast<EpochMs>(std::llround(len_s * 1000.0));
    const EpochMs hop_ms = static_cast<EpochMs>(std::llround(hop_s * 1000.0));

    // Walk maximal contiguous runs of samples (gap = inter-sample interval
    // beyond the threshold). Frames align to the run start; frame k exists
    // when it fits inside the run's time span, which keeps the gapless count
    // at floor((T - len)/hop) + 1.
    std::size_t run_begin = 0;
    const std::size_t n = s.accel.size();
    for (std::size_t i = 1; i <= n; ++i) {
        const bool run_ends = i == n || s.accel[i].t - s.accel[i - 1].t > thresh;
        if (!run_ends) continue;
        const EpochMs span_ms = s.accel[i - 1].t - s.accel[run_begin].t;
        const std::size_t run_len = i - run_begin;
        EpochMs k = 0;
        for (; k * hop_ms + len_ms <= span_ms; ++k) {
            const std::size_t first = run_begin + static_cast<std::size_t>(k) * fs.hop_samples;
            if (first + fs.len_samples > run_begin + run_len) break;  // irregular grid guard
            fs.frames.push_back({s.accel[first].t, first});
        }
        if (i != n) {
            // A gap follows: count would-be frames cut off by it.
            for (; k * hop_ms <= span_ms; ++k) ++fs.flagged;
        }
        run_begin = i;
    }
    return fs;
}

}  // namespace obeskit::ingest
