#include <algorithm>
#include <cmath>

#include "obeskit/core/dsp.hpp"
#include "obeskit/core/exec.hpp"
#include "obeskit/transport.hpp"

namespace obeskit::transport {

namespace {
constexpr int kBands = 5;

const char* kFeatureNames =
    "mean_x,std_x,min_x,max_x,mean_y,std_y,min_y,max_y,mean_z,std_z,min_z,max_z,"
    "mag_mean,mag_std,mag_min,mag_max,psd_b0,psd_b1,psd_b2,psd_b3,psd_b4";
}  // namespace

std::size_t transport_feature_dim() { return 21; }

const std::string& transport_feature_spec() {
    static const std::string spec = std::string("transport_mode/v1:") + kFeatureNames;
    return spec;
}

std::vector<double> extract_transport_features(const double* x, const double* y, const double* z,
                                               std::size_t n, double rate_hz) {
    if (n < 4) throw DataError("frame too short for transport features");
    auto axis = [&](const double* a, std::vector<double>& out) {
        std::vector<double> v(a, a + n);
        const double lo = *std::min_element(v.begin(), v.end());
        const double hi = *std::max_element(v.begin(), v.end());
        out.insert(out.end(), {dsp::mean(v), dsp::stddev(v), lo, hi});
    };
    std::vector<double> f;
    f.reserve(transport_feature_dim());
    axis(x, f);
    axis(y, f);
    axis(z, f);
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i)
        mag[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
    const double lo = *std::min_element(mag.begin(), mag.end());
    const double hi = *std::max_element(mag.begin(), mag.end());
    f.insert(f.end(), {dsp::mean(mag), dsp::stddev(mag), lo, hi});
    const std::vector<double> bands = dsp::band_power(mag, rate_hz, kBands);
    f.insert(f.end(), bands.begin(), bands.end());
    return f;
}

namespace {
std::vector<std::vector<double>> batch_impl(const ingest::SensorStream& s,
                                            const ingest::FrameSet& frames, bool parallel) {
    const std::size_t n = frames.len_samples;
    std::vector<std::vector<double>> out(frames.frames.size());
    auto one = [&](std::size_t i) {
        const ingest::Frame& fr = frames.frames[i];
        if (fr.first + n > s.accel.size()) throw InternalError("frame exceeds stream bounds");
        std::vector<double> x(n), y(n), z(n);
        for (std::size_t k = 0; k < n; ++k) {
            const ingest::AccelSample& a = s.accel[fr.first + k];
            x[k] = a.x;
            y[k] = a.y;
            z[k] = a.z;
        }
        out[i] = extract_transport_features(x.data(), y.data(), z.data(), n, frames.rate_hz);
    };
    if (parallel)
        exec::parallel_for(out.size(), one);
    else
        for (std::size_t i = 0; i < out.size(); ++i) one(i);
    return out;
}
}  // namespace

std::vector<std::vector<double>> transport_features_batch(const ingest::SensorStream& s,
                                                          const ingest::FrameSet& frames) {
    return batch_impl(s, frames, true);
}

std::vector<std::vector<double>> transport_features_batch_serial(const ingest::SensorStream& s,
                                                                 const ingest::FrameSet& frames) {
    return batch_impl(s, frames, false);
}

}  // namespace obeskit::transport
