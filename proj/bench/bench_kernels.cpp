// Compares each parallel kernel against its serial twin on synthetic input
// and prints a timing table. Build with -DOBESKIT_BENCH or via the bench
// target; run: obeskit_bench [workers]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "obeskit/activity.hpp"
#include "obeskit/core/exec.hpp"
#include "obeskit/geoagg.hpp"
#include "obeskit/ingest.hpp"
#include "obeskit/location.hpp"
#include "obeskit/models.hpp"
#include "obeskit/transport.hpp"

using namespace obeskit;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        fn();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

void row(const std::string& name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.2f ms %10.2f ms %8.2fx\n", name.c_str(), serial_ms, parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0);
}

ingest::SensorStream synth_accel(double hours, double rate_hz, std::uint64_t seed) {
    ingest::SensorStream s;
    s.kind = ingest::StreamKind::accel;
    s.subject_id = "bench";
    s.device_profile = ingest::DeviceProfile::smartphone;
    s.nominal_rate_hz = rate_hz;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    const std::size_t n = static_cast<std::size_t>(hours * 3600.0 * rate_hz);
    s.accel.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate_hz;
        ingest::AccelSample a;
        a.t = static_cast<EpochMs>(std::llround(t * 1000.0));
        a.x = 0.4 * std::sin(2.0 * M_PI * 1.9 * t) + noise(rng);
        a.y = noise(rng);
        a.z = kGravityMs2 + 2.0 * std::sin(2.0 * M_PI * 1.9 * t) + noise(rng);
        s.accel.push_back(a);
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    const int workers = argc > 1 ? std::atoi(argv[1]) : exec::max_workers();

    const ingest::SensorStream s = synth_accel(2.0, 20.0, 7);
    const ingest::FrameSet minutes = ingest::window(s, 60.0, 60.0);
    const ingest::FrameSet fives = ingest::window(s, 5.0, 5.0);
    const ingest::FrameSet seconds = ingest::window(s, 1.0, 1.0);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ulat(-85.0, 85.0), ulon(-180.0, 180.0);
    std::vector<geo::LatLon> pts(200000);
    for (auto& p : pts) p = {ulat(rng), ulon(rng)};

    std::vector<ingest::LocationSample> trace(20000);
    std::normal_distribution<double> jitter(0.0, 1e-4);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        trace[i].t = static_cast<EpochMs>(i) * 30000;
        trace[i].lat = 57.0 + jitter(rng);
        trace[i].lon = 10.0 + jitter(rng);
        trace[i].accuracy = 8.0;
    }

    // A small trained model so predict_batch has real support vectors.
    const auto feats = activity::type_features_batch_serial(s, fives);
    std::vector<int> labels(feats.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
    models::SvmConfig mc;
    const models::SvmModel model = models::train_svm(
        feats, labels, {"a", "b", "c"}, mc, "bench", activity::type_feature_spec());

    std::printf("workers: %d\n", workers);
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    exec::set_max_workers(workers);
    const location::PoiConfig pcfg;

    {
        const double ts = time_best_of(3, [&] { (void)activity::counts_for_frames_serial(s, minutes); });
        const double tp = time_best_of(3, [&] { (void)activity::counts_for_frames(s, minutes); });
        row("activity counts", ts, tp);
    }
    {
        const double ts = time_best_of(3, [&] { (void)activity::type_features_batch_serial(s, fives); });
        const double tp = time_best_of(3, [&] { (void)activity::type_features_batch(s, fives); });
        row("type features", ts, tp);
    }
    {
        const double ts =
            time_best_of(3, [&] { (void)transport::transport_features_batch_serial(s, seconds); });
        const double tp = time_best_of(3, [&] { (void)transport::transport_features_batch(s, seconds); });
        row("transport features", ts, tp);
    }
    {
        const double ts = time_best_of(3, [&] { (void)geoagg::geohash_encode_batch_serial(pts, 11); });
        const double tp = time_best_of(3, [&] { (void)geoagg::geohash_encode_batch(pts, 11); });
        row("geohash encode", ts, tp);
    }
    {
        const double ts = time_best_of(3, [&] { (void)location::moveability_density_serial(trace, pcfg); });
        const double tp = time_best_of(3, [&] { (void)location::moveability_density(trace, pcfg); });
        row("moveability density", ts, tp);
    }
    {
        const double ts = time_best_of(3, [&] { (void)model.predict_batch_serial(feats); });
        const double tp = time_best_of(3, [&] { (void)model.predict_batch(feats); });
        row("svm predict", ts, tp);
    }
    return 0;
}
