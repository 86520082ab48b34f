#include <algorithm>
#include <cmath>

#include "obeskit/activity.hpp"
#include "obeskit/core/dsp.hpp"
#include "obeskit/core/exec.hpp"

namespace obeskit::activity {

const std::vector<std::string>& type_classes() {
    static const std::vector<std::string> classes = {"lay",  "stand",  "walk",
                                                     "run",  "cycle",  "stairs"};
    return classes;
}

namespace {

struct AxisStats {
    double mean, sd, med, peaks, energy;
};

AxisStats axis_stats(const double* a, std::size_t n) {
    std::vector<double> v(a, a + n);
    AxisStats s{};
    s.mean = dsp::mean(v);
    s.sd = dsp::stddev(v);
    s.med = dsp::median(v);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += a[i] * a[i];
    s.energy = e / static_cast<double>(n);
    const double gate = s.mean + s.sd;
    std::size_t peaks = 0;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (a[i] > a[i - 1] && a[i] >= a[i + 1] && a[i] > gate) ++peaks;
    s.peaks = static_cast<double>(peaks);
    return s;
}

double correlation(const double* a, const double* b, std::size_t n, double ma, double sa,
                   double mb, double sb) {
    if (sa <= 0.0 || sb <= 0.0) return 0.0;  // undefined for flat axes, by convention
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (a[i] - ma) * (b[i] - mb);
    return acc / (static_cast<double>(n) * sa * sb);
}

const char* kFeatureNames =
    "mean_x,mean_y,mean_z,std_x,std_y,std_z,median_x,median_y,median_z,"
    "peaks_x,peaks_y,peaks_z,energy_x,energy_y,energy_z,"
    "mag_mean,mag_std,corr_xy,corr_xz,corr_yz,spectral_entropy,dominant_hz";

}  // namespace

std::size_t type_feature_dim() { return 22; }

const std::string& type_feature_spec() {
    static const std::string spec = std::string("activity_type/v1:") + kFeatureNames;
    return spec;
}

std::vector<double> extract_type_features(const double* x, const double* y, const double* z,
                                          std::size_t n, double rate_hz) {
    if (n < 4) throw DataError("frame too short for type features");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || !std::isfinite(z[i]))
            throw DataError("non-finite sample in feature frame");

    const AxisStats sx = axis_stats(x, n), sy = axis_stats(y, n), sz = axis_stats(z, n);
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i)
        mag[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
    const double mag_mean = dsp::mean(mag);
    const double mag_std = dsp::stddev(mag);
    const dsp::SpectralSummary spec = dsp::spectral_summary(mag, rate_hz);

    std::vector<double> f;
    f.reserve(type_feature_dim());
    f.insert(f.end(), {sx.mean, sy.mean, sz.mean});
    f.insert(f.end(), {sx.sd, sy.sd, sz.sd});
    f.insert(f.end(), {sx.med, sy.med, sz.med});
    f.insert(f.end(), {sx.peaks, sy.peaks, sz.peaks});
    f.insert(f.end(), {sx.energy, sy.energy, sz.energy});
    f.push_back(mag_mean);
    f.push_back(mag_std);
    f.push_back(correlation(x, y, n, sx.mean, sx.sd, sy.mean, sy.sd));
    f.push_back(correlation(x, z, n, sx.mean, sx.sd, sz.mean, sz.sd));
    f.push_back(correlation(y, z, n, sy.mean, sy.sd, sz.mean, sz.sd));
    f.push_back(spec.entropy);
    f.push_back(spec.dominant_hz);
    return f;
}

std::vector<double> extract_type_features(const ingest::SensorStream& s,
                                          const ingest::Frame& frame,
                                          const ingest::FrameSet& frames) {
    const std::size_t n = frames.len_samples;
    if (frame.first + n > s.accel.size()) throw InternalError("frame exceeds stream bounds");
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ingest::AccelSample& a = s.accel[frame.first + i];
        x[i] = a.x;
        y[i] = a.y;
        z[i] = a.z;
    }
    return extract_type_features(x.data(), y.data(), z.data(), n, frames.rate_hz);
}

std::vector<std::vector<double>> type_features_batch(const ingest::SensorStream& s,
                                                     const ingest::FrameSet& frames) {
    std::vector<std::vector<double>> out(frames.frames.size());
    exec::parallel_for(frames.frames.size(), [&](std::size_t i) {
        out[i] = extract_type_features(s, frames.frames[i], frames);
    });
    return out;
}

std::vector<std::vector<double>> type_features_batch_serial(const ingest::SensorStream& s,
                                                            const ingest::FrameSet& frames) {
    std::vector<std::vector<double>> out(frames.frames.size());
    for (std::size_t i = 0; i < frames.frames.size(); ++i)
        out[i] = extract_type_features(s, frames.frames[i], frames);
    return out;
}

TypePrediction classify_type(const std::vector<double>& features, const models::SvmModel& model,
                             EpochMs window_start) {
    if (features.size() != model.dim)
        throw DataError("feature dimension mismatch with activity-type model");
    TypePrediction p;
    p.window_start = window_start;
    p.scores = model.probabilities(features);
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.scores.size(); ++i)
        if (p.scores[i] > p.scores[best]) best = i;
    p.label = model.classes[best];
    return p;
}

}  // namespace obeskit::activity
