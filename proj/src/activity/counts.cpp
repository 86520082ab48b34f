#include <cmath>

#include "obeskit/activity.hpp"
#include "obeskit/core/dsp.hpp"
#include "obeskit/core/exec.hpp"

namespace obeskit::activity {

namespace {

void check_frames(const ingest::SensorStream& s, const ingest::FrameSet& frames) {
    const std::size_t expect =
        static_cast<std::size_t>(std::llround(60.0 * frames.rate_hz));
    if (frames.len_samples != expect)
        throw ConfigError("activity counts require 60 s frames");
    for (const ingest::Frame& f : frames.frames)
        if (f.first + frames.len_samples > s.accel.size())
            throw InternalError("frame exceeds stream bounds");
}

double frame_counts(const ingest::SensorStream& s, const ingest::Frame& f, std::size_t n,
                    double rate, const dsp::Sos& sos) {
    std::vector<double> ax(n), ay(n), az(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ingest::AccelSample& a = s.accel[f.first + i];
        ax[i] = a.x;
        ay[i] = a.y;
        az[i] = a.z;
    }
    ax = dsp::filtfilt(sos, ax);
    ay = dsp::filtfilt(sos, ay);
    az = dsp::filtfilt(sos, az);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += std::sqrt(ax[i] * ax[i] + ay[i] * ay[i] + az[i] * az[i]);
    return acc / rate;
}

}  // namespace

std::vector<ActivityCounts> counts_for_frames(const ingest::SensorStream& s,
                                              const ingest::FrameSet& frames,
                                              const CountsConfig& cfg) {
    check_frames(s, frames);
    const dsp::Sos sos =
        dsp::butter_bandpass(cfg.filter_order, cfg.band_lo_hz, cfg.band_hi_hz, frames.rate_hz);
    std::vector<ActivityCounts> out(frames.frames.size());
    exec::parallel_for(frames.frames.size(), [&](std::size_t i) {
        out[i] = {frames.frames[i].start_ms,
                  frame_counts(s, frames.frames[i], frames.len_samples, frames.rate_hz, sos)};
    });
    return out;
}

std::vector<ActivityCounts> counts_for_frames_serial(const ingest::SensorStream& s,
                                                     const ingest::FrameSet& frames,
                                                     const CountsConfig& cfg) {
    check_frames(s, frames);
    const dsp::Sos sos =
        dsp::butter_bandpass(cfg.filter_order, cfg.band_lo_hz, cfg.band_hi_hz, frames.rate_hz);
    std::vector<ActivityCounts> out(frames.frames.size());
    for (std::size_t i = 0; i < frames.frames.size(); ++i)
        out[i] = {frames.frames[i].start_ms,
                  frame_counts(s, frames.frames[i], frames.len_samples, frames.rate_hz, sos)};
    return out;
}

}  // namespace obeskit::activity
