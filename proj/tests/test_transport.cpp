#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "obeskit/ingest.hpp"
#include "obeskit/location.hpp"
#include "obeskit/models.hpp"
#include "obeskit/transport.hpp"

using namespace obeskit;

namespace {

ingest::SensorStream uniform_accel(double t0_s, double t1_s, double rate_hz = 20.0) {
    ingest::SensorStream s;
    s.kind = ingest::StreamKind::accel;
    s.nominal_rate_hz = rate_hz;
    const std::size_t n = static_cast<std::size_t>(std::llround((t1_s - t0_s) * rate_hz)) + 1;
    s.accel.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.accel[i].t = static_cast<EpochMs>(std::llround((t0_s + i / rate_hz) * 1000.0));
        s.accel[i].z = 9.81;
    }
    return s;
}

location::PointOfInterest poi_at(const std::string& id, double arrive_s, double depart_s) {
    location::PointOfInterest p;
    p.poi_id = id;
    p.center = geo::LatLon{55.7, 12.5};
    p.arrive_t = static_cast<EpochMs>(std::llround(arrive_s * 1000.0));
    p.depart_t = static_cast<EpochMs>(std::llround(depart_s * 1000.0));
    return p;
}

std::size_t transitions(const std::vector<int>& seq) {
    std::size_t t = 0;
    for (std::size_t i = 1; i < seq.size(); ++i) t += seq[i] != seq[i - 1];
    return t;
}

}  // namespace

TEST_CASE("segment_trips: the gap between two stays becomes one trip") {
    const auto accel = uniform_accel(0.0, 7200.0);
    const auto cov = ingest::compute_coverage(accel, 5.0);
    const std::vector<location::PointOfInterest> pois{poi_at("a", 0.0, 3600.0),
                                                      poi_at("b", 4800.0, 7200.0)};
    const auto trips = transport::segment_trips(pois, cov);
    REQUIRE(trips.size() == 1);
    CHECK(trips[0].start_t == 3'600'000);
    CHECK(trips[0].end_t == 4'800'000);
    CHECK(trips[0].origin_poi == "a");
    CHECK(trips[0].dest_poi == "b");
}

TEST_CASE("segment_trips: gaps under min_trip_s are not trips") {
    const auto accel = uniform_accel(0.0, 7230.0);
    const auto cov = ingest::compute_coverage(accel, 5.0);
    const std::vector<location::PointOfInterest> pois{poi_at("a", 0.0, 3600.0),
                                                      poi_at("b", 3630.0, 7230.0)};
    CHECK(transport::segment_trips(pois, cov).empty());
}

TEST_CASE("segment_trips: a gap with no accelerometer coverage is skipped") {
    // Recording only during the stays; the inter-stay hole has zero coverage.
    auto accel = uniform_accel(0.0, 3600.0);
    const auto tail = uniform_accel(4800.0, 7200.0);
    accel.accel.insert(accel.accel.end(), tail.accel.begin(), tail.accel.end());
    const auto cov = ingest::compute_coverage(accel, 5.0);
    const std::vector<location::PointOfInterest> pois{poi_at("a", 0.0, 3600.0),
                                                      poi_at("b", 4800.0, 7200.0)};
    CHECK(transport::segment_trips(pois, cov).empty());
}

TEST_CASE("segment_trips: trips never overlap the subject's stays") {
    const auto accel = uniform_accel(0.0, 20000.0);
    const auto cov = ingest::compute_coverage(accel, 5.0);
    std::vector<location::PointOfInterest> pois;
    for (int i = 0; i < 5; ++i)
        pois.push_back(poi_at("p" + std::to_string(i), i * 4000.0, i * 4000.0 + 2500.0));
    const auto trips = transport::segment_trips(pois, cov);
    REQUIRE(trips.size() == 4);
    for (const auto& t : trips)
        for (const auto& p : pois) {
            const bool overlap = t.start_t < p.depart_t && p.arrive_t < t.end_t;
            CHECK_FALSE(overlap);
        }
}

TEST_CASE("transport features: constant frame has ~zero non-DC band power") {
    const auto s = uniform_accel(0.0, 10.0);
    const auto frames = ingest::window(s, 1.0, 1.0);
    const auto feats = transport::transport_features_batch(s, frames);
    REQUIRE(!feats.empty());
    REQUIRE(feats[0].size() == transport::transport_feature_dim());
    REQUIRE(feats[0].size() == 21);  // documented dimension
    // Spectral bands are the last 5 entries; only the DC band may be nonzero.
    const std::size_t d = feats[0].size();
    for (std::size_t k = d - 4; k < d; ++k) CHECK(std::abs(feats[0][k]) < 1e-9);
}

TEST_CASE("transport features: a 5 Hz tone concentrates in its band") {
    auto s = uniform_accel(0.0, 10.0);
    // Ride the tone on gravity along z so the magnitude signal itself is a
    // pure 5 Hz sinusoid (a tone on x would make the magnitude oscillate at
    // twice the frequency).
    for (auto& a : s.accel)
        a.z = 9.81 + 3.0 * std::sin(2.0 * M_PI * 5.0 * static_cast<double>(a.t) / 1000.0);
    const auto frames = ingest::window(s, 1.0, 1.0);
    const auto feats = transport::transport_features_batch(s, frames);
    const std::size_t d = feats[2].size();
    // Bands cover 0-10 Hz in 5 equal slices; 5 Hz falls in band index 2.
    const double b0 = feats[2][d - 5], b1 = feats[2][d - 4], b2 = feats[2][d - 3],
                 b3 = feats[2][d - 2], b4 = feats[2][d - 1];
    const double non_dc = b1 + b2 + b3 + b4;
    (void)b0;
    CHECK(b2 / (non_dc + 1e-12) > 0.9);
}

TEST_CASE("transport features: dimension fixed over random frames, short frame rejected") {
    auto s = uniform_accel(0.0, 30.0);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 2.0);
    for (auto& a : s.accel) {
        a.x = n(rng);
        a.y = n(rng);
        a.z = 9.81 + n(rng);
    }
    for (const auto& f : transport::transport_features_batch(s, ingest::window(s, 1.0, 1.0)))
        REQUIRE(f.size() == transport::transport_feature_dim());
    const double xs[2] = {0, 1}, ys[2] = {0, 1}, zs[2] = {0, 1};
    CHECK_THROWS_AS(transport::extract_transport_features(xs, ys, zs, 2, 20.0), DataError);
}

TEST_CASE("median filter: spec examples") {
    CHECK(transport::median_filter_labels({0, 0, 1, 0, 0}, 5) ==
          std::vector<int>{0, 0, 0, 0, 0});  // lone bus inside car run
    CHECK(transport::median_filter_labels({2, 2, 2, 2}, 5) == std::vector<int>{2, 2, 2, 2});
    CHECK(transport::median_filter_labels({}, 3).empty());
    CHECK_THROWS_AS(transport::median_filter_labels({0, 1}, 4), ConfigError);
    CHECK_THROWS_AS(transport::median_filter_labels({0, 1}, 0), ConfigError);
}

TEST_CASE("median filter: exhaustive 3-label check of both safety properties") {
    // Every sequence over {0,1,2} up to length 8, windows 3/5/9:
    //   1. transitions never increase;
    //   2. no output label is absent from its centered input window.
    for (int len = 1; len <= 8; ++len) {
        const int total = static_cast<int>(std::pow(3, len));
        for (int code = 0; code < total; ++code) {
            std::vector<int> seq(len);
            int c = code;
            for (int i = 0; i < len; ++i) {
                seq[i] = c % 3;
                c /= 3;
            }
            for (int w : {3, 5, 9}) {
                const auto out = transport::median_filter_labels(seq, w);
                REQUIRE(out.size() == seq.size());
                REQUIRE(transitions(out) <= transitions(seq));
                const int half = w / 2;
                for (int i = 0; i < len; ++i) {
                    bool present = false;
                    for (int k = std::max(0, i - half); k < std::min(len, i + half + 1); ++k)
                        if (seq[k] == out[i]) present = true;
                    REQUIRE(present);
                }
            }
        }
    }
}

TEST_CASE("classify_trip: labels, dominant mode, and dimension checks") {
    // Two archetype textures alternating every 20 s; train on the same data.
    auto s = uniform_accel(0.0, 400.0);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 0.1);
    auto archetype_of = [](EpochMs t) { return (t / 20'000) % 2 == 0 ? 0 : 1; };
    for (auto& a : s.accel) {
        const double t = static_cast<double>(a.t) / 1000.0;
        if (archetype_of(a.t) == 0)
            a.z = 9.81 + 0.4 * std::sin(2.0 * M_PI * 0.7 * t) + noise(rng);
        else
            a.z = 9.81 + 3.0 * std::sin(2.0 * M_PI * 2.0 * t) + noise(rng);
        a.x = noise(rng);
        a.y = noise(rng);
    }
    const auto seconds = ingest::window(s, 1.0, 1.0);
    const auto feats = transport::transport_features_batch(s, seconds);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (std::size_t i = 0; i < feats.size(); ++i) {
        // Skip the transition-straddling seconds for clean labels.
        const EpochMs t = seconds.frames[i].start_ms;
        if ((t / 1000) % 20 == 19) continue;
        X.push_back(feats[i]);
        y.push_back(static_cast<int>(archetype_of(t)));
    }
    models::SvmConfig mc;
    const auto model = models::train_svm(X, y, {"car", "walk_run"}, mc, "transport_mode",
                                         transport::transport_feature_spec());

    transport::Trip trip;
    trip.start_t = 0;
    trip.end_t = 20'000;  // entirely archetype 0
    transport::classify_trip(trip, s, seconds, model, {});
    CHECK(trip.dominant_mode == "car");
    REQUIRE(!trip.mode_sequence.empty());
    int total = 0;
    for (const auto& [mode, sec] : trip.mode_seconds) {
        CHECK((mode == "car" || mode == "walk_run"));
        total += sec;
    }
    CHECK(total == static_cast<int>(trip.mode_sequence.size()));

    transport::Trip trip2;
    trip2.start_t = 20'000;
    trip2.end_t = 40'000;
    transport::classify_trip(trip2, s, seconds, model, {});
    CHECK(trip2.dominant_mode == "walk_run");

    // A model with the wrong feature contract is refused.
    models::SvmConfig mc2;
    std::vector<std::vector<double>> bad_X{{0.0, 1.0}, {1.0, 0.0}, {0.1, 1.1}, {1.1, 0.1}};
    std::vector<int> bad_y{0, 1, 0, 1};
    const auto bad = models::train_svm(bad_X, bad_y, {"car", "walk_run"}, mc2, "toy", "2d");
    transport::Trip trip3;
    trip3.start_t = 0;
    trip3.end_t = 20'000;
    CHECK_THROWS_AS(transport::classify_trip(trip3, s, seconds, bad, {}), DataError);
}

TEST_CASE("mode class list matches the five-mode merge") {
    const auto& classes = transport::mode_classes();
    REQUIRE(classes.size() == 5);
    CHECK(classes[0] == "walk_run");
    CHECK(classes[4] == "train_subway");
}
