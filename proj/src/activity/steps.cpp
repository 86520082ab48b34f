#include <algorithm>
#include <cmath>
#include <numeric>

#include "obeskit/activity.hpp"
#include "obeskit/core/dsp.hpp"

namespace obeskit::activity {

namespace {

struct Candidate {
    std::size_t idx;
    double amp;
};

// Peaks of one contiguous run of band-passed magnitude samples.
std::vector<std::size_t> pick_peaks(const std::vector<double>& bp, double rate, double mult,
                                    const StepConfig& cfg) {
    const std::size_t n = bp.size();
    if (n < 3) return {};

    // Sliding mean/std via prefix sums.
    std::vector<double> p1(n + 1, 0.0), p2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        p1[i + 1] = p1[i] + bp[i];
        p2[i + 1] = p2[i] + bp[i] * bp[i];
    }
    const std::size_t half = static_cast<std::size_t>(std::llround(cfg.context_s * rate / 2.0));
    auto threshold_at = [&](std::size_t i) {
        const std::size_t lo = i > half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        const double cnt = static_cast<double>(hi - lo);
        const double mu = (p1[hi] - p1[lo]) / cnt;
        const double var = std::max(0.0, (p2[hi] - p2[lo]) / cnt - mu * mu);
        return std::max(mu + mult * std::sqrt(var), cfg.min_peak_amp);
    };

    std::vector<Candidate> cands;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(bp[i] > bp[i - 1] && bp[i] >= bp[i + 1])) continue;  // plateau keeps first sample
        if (bp[i] < threshold_at(i)) continue;
        cands.push_back({i, bp[i]});
    }

    // Enforce minimum spacing, preferring taller peaks (index breaks ties).
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.amp != b.amp) return a.amp > b.amp;
        return a.idx < b.idx;
    });
    const std::size_t min_dist =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.min_peak_dist_s * rate)));
    std::vector<char> taken(n, 0);
    std::vector<std::size_t> kept;
    for (const Candidate& c : cands) {
        const std::size_t lo = c.idx > min_dist ? c.idx - min_dist : 0;
        const std::size_t hi = std::min(n - 1, c.idx + min_dist);
        bool blocked = false;
        for (std::size_t t = lo; t <= hi && !blocked; ++t) blocked = taken[t];
        if (blocked) continue;
        taken[c.idx] = 1;
        kept.push_back(c.idx);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

double autocorr_at(const std::vector<double>& bp, std::size_t lo, std::size_t hi,
                   std::size_t lag) {
    // Normalized self-similarity of bp[lo..hi] at the given sample lag.
    if (hi <= lo || lag == 0 || hi - lo < lag + 2) return 0.0;
    const std::size_t n = hi - lo + 1;
    double mu = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) mu += bp[i];
    mu /= static_cast<double>(n);
    double denom = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) denom += (bp[i] - mu) * (bp[i] - mu);
    if (denom <= 0.0) return 0.0;
    double num = 0.0;
    for (std::size_t i = lo; i + lag <= hi; ++i) num += (bp[i] - mu) * (bp[i + lag] - mu);
    // Scale the truncated sum up to the full-window energy share.
    return (num / denom) * (static_cast<double>(n) / static_cast<double>(n - lag));
}

// Splits a peak sequence into rhythmically consistent bouts and keeps the
// peaks of bouts that look like genuine walking.
void validate_bouts(const std::vector<double>& bp, const std::vector<std::size_t>& peaks,
                    double rate, const StepConfig& cfg, std::vector<std::size_t>& out) {
    std::size_t run_begin = 0;
    auto flush = [&](std::size_t end) {  // run = peaks[run_begin, end)
        const std::size_t cnt = end - run_begin;
        if (cnt >= static_cast<std::size_t>(cfg.min_bout_peaks)) {
            std::vector<double> periods;
            for (std::size_t k = run_begin + 1; k < end; ++k)
                periods.push_back(static_cast<double>(peaks[k] - peaks[k - 1]) / rate);
            const double med = dsp::median(periods);
            const double cv = dsp::mean(periods) > 0.0
                                  ? dsp::stddev(periods) / dsp::mean(periods)
                                  : 1.0;
            const std::size_t lag =
                std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(med * rate)));
            const double ac = autocorr_at(bp, peaks[run_begin], peaks[end - 1], lag);
            if (cv < cfg.period_dev && ac >= cfg.autocorr_min)
                for (std::size_t k = run_begin; k < end; ++k) out.push_back(peaks[k]);
        }
        run_begin = end;
    };

    std::vector<double> run_periods;
    for (std::size_t k = 1; k < peaks.size(); ++k) {
        const double p = static_cast<double>(peaks[k] - peaks[k - 1]) / rate;
        bool split = p > cfg.max_period_s;
        if (!split && !run_periods.empty()) {
            const double med = dsp::median(run_periods);
            split = std::abs(p - med) > cfg.period_dev * med;
        }
        if (split) {
            flush(k);
            run_periods.clear();
        } else {
            run_periods.push_back(p);
        }
    }
    flush(peaks.size());
}

}  // namespace

std::vector<EpochMs> detect_step_times(const ingest::SensorStream& s,
                                       ingest::DeviceProfile profile, const StepConfig& cfg) {
    if (s.kind != ingest::StreamKind::accel)
        throw DataError("step detection needs an accelerometer stream");
    const double rate = s.nominal_rate_hz;
    if (s.accel.size() < 3 || rate <= 0.0) return {};
    const double mult =
        profile == ingest::DeviceProfile::smartwatch ? cfg.mult_watch : cfg.mult_phone;
    const dsp::Sos sos = dsp::butter_bandpass(cfg.filter_order, cfg.band_lo_hz, cfg.band_hi_hz, rate);
    const EpochMs gap_ms = static_cast<EpochMs>(std::llround(ingest::kAccelGapThresholdS * 1000.0));

    std::vector<EpochMs> times;
    std::size_t run_begin = 0;
    const std::size_t n = s.accel.size();
    for (std::size_t i = 1; i <= n; ++i) {
        if (i != n && s.accel[i].t - s.accel[i - 1].t <= gap_ms) continue;
        const std::size_t len = i - run_begin;
        if (len >= 3) {
            std::vector<double> mag(len);
            for (std::size_t k = 0; k < len; ++k) {
                const ingest::AccelSample& a = s.accel[run_begin + k];
                mag[k] = std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z);
            }
            const std::vector<double> bp = dsp::filtfilt(sos, mag);
            const std::vector<std::size_t> peaks = pick_peaks(bp, rate, mult, cfg);
            std::vector<std::size_t> valid;
            validate_bouts(bp, peaks, rate, cfg, valid);
            for (std::size_t idx : valid) times.push_back(s.accel[run_begin + idx].t);
        }
        run_begin = i;
    }
    std::sort(times.begin(), times.end());
    return times;
}

std::vector<StepEstimate> count_steps(const ingest::SensorStream& s,
                                      const ingest::FrameSet& frames,
                                      ingest::DeviceProfile profile, const StepConfig& cfg) {
    const std::vector<EpochMs> times = detect_step_times(s, profile, cfg);
    const EpochMs len_ms = static_cast<EpochMs>(
        std::llround(1000.0 * static_cast<double>(frames.len_samples) / frames.rate_hz));
    std::vector<StepEstimate> out;
    out.reserve(frames.frames.size());
    for (const ingest::Frame& f : frames.frames) {
        const auto lo = std::lower_bound(times.begin(), times.end(), f.start_ms);
        const auto hi = std::lower_bound(times.begin(), times.end(), f.start_ms + len_ms);
        out.push_back({f.start_ms, static_cast<int>(hi - lo), profile});
    }
    return out;
}

}  // namespace obeskit::activity
