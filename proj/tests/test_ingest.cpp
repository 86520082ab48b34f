#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "obeskit/ingest.hpp"

using namespace obeskit;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    const fs::path d = fs::temp_directory_path() / "obeskit_test_ingest";
    fs::create_directories(d);
    return d;
}

fs::path write_file(const std::string& name, const std::string& body) {
    const fs::path p = tmp_dir() / name;
    std::ofstream out(p, std::ios::trunc);
    out << body;
    return p;
}

// Uniform accel samples covering [t0_s, t1_s] inclusive at rate_hz.
ingest::SensorStream uniform_accel(double t0_s, double t1_s, double rate_hz) {
    ingest::SensorStream s;
    s.kind = ingest::StreamKind::accel;
    s.nominal_rate_hz = rate_hz;
    s.device_profile = ingest::DeviceProfile::smartphone;
    const std::size_t n = static_cast<std::size_t>(std::llround((t1_s - t0_s) * rate_hz)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        ingest::AccelSample a;
        a.t = static_cast<EpochMs>(std::llround((t0_s + i / rate_hz) * 1000.0));
        a.z = 9.81;
        s.accel.push_back(a);
    }
    return s;
}

void append(ingest::SensorStream& dst, const ingest::SensorStream& more) {
    dst.accel.insert(dst.accel.end(), more.accel.begin(), more.accel.end());
}

}  // namespace

TEST_CASE("parse: three accel lines at 100 ms spacing") {
    const fs::path p = write_file("three.jsonl",
                                  "{\"t\":0,\"x\":0,\"y\":0,\"z\":9.8}\n"
                                  "{\"t\":100,\"x\":0.1,\"y\":0,\"z\":9.8}\n"
                                  "{\"t\":200,\"x\":0.2,\"y\":0,\"z\":9.8}\n");
    const auto s = ingest::parse_stream(p.string(), ingest::StreamKind::accel);
    REQUIRE(s.accel.size() == 3);
    CHECK(s.nominal_rate_hz == doctest::Approx(10.0));
    CHECK(s.accel[1].x == doctest::Approx(0.1));
}

TEST_CASE("parse: out-of-order lines come back sorted, duplicates keep the first") {
    const fs::path p = write_file("unsorted.jsonl",
                                  "{\"t\":200,\"x\":2,\"y\":0,\"z\":9.8}\n"
                                  "{\"t\":0,\"x\":0,\"y\":0,\"z\":9.8}\n"
                                  "{\"t\":100,\"x\":1,\"y\":0,\"z\":9.8}\n"
                                  "{\"t\":100,\"x\":-7,\"y\":0,\"z\":9.8}\n");
    const auto s = ingest::parse_stream(p.string(), ingest::StreamKind::accel);
    REQUIRE(s.accel.size() == 3);
    CHECK(s.accel[0].t == 0);
    CHECK(s.accel[1].t == 100);
    CHECK(s.accel[1].x == doctest::Approx(1.0));  // first occurrence kept
    CHECK(s.accel[2].t == 200);
    CHECK(s.duplicates_dropped == 1);
}

TEST_CASE("parse: 50 Hz stream draws a rate warning but still loads") {
    std::ostringstream body;
    for (int i = 0; i < 200; ++i)
        body << "{\"t\":" << i * 20 << ",\"x\":0,\"y\":0,\"z\":9.8}\n";
    const auto s =
        ingest::parse_stream(write_file("fast.jsonl", body.str()).string(),
                             ingest::StreamKind::accel);
    CHECK(s.accel.size() == 200);
    CHECK(s.nominal_rate_hz == doctest::Approx(50.0));
    bool warned = false;
    for (const auto& w : s.warnings)
        if (w.find("rate-out-of-band") != std::string::npos) warned = true;
    CHECK(warned);
}

TEST_CASE("parse: malformed line reports its line number; empty file is an error") {
    const fs::path bad = write_file("bad.jsonl",
                                    "{\"t\":0,\"x\":0,\"y\":0,\"z\":9.8}\n"
                                    "not json\n");
    try {
        ingest::parse_stream(bad.string(), ingest::StreamKind::accel);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    CHECK_THROWS_AS(ingest::parse_stream(write_file("empty.jsonl", "").string(),
                                         ingest::StreamKind::accel),
                    DataError);
    CHECK_THROWS_AS(
        ingest::parse_stream((tmp_dir() / "missing.jsonl").string(), ingest::StreamKind::accel),
        DataError);
}

TEST_CASE("parse: meta header sets subject/device/tz and converts g to m/s^2") {
    const fs::path p = write_file(
        "meta.jsonl",
        "{\"meta\":{\"subject\":\"s1\",\"device\":\"smartwatch\",\"units\":\"g\",\"tz\":\"Europe/Copenhagen\"}}\n"
        "{\"t\":0,\"x\":0,\"y\":0,\"z\":1.0}\n"
        "{\"t\":50,\"x\":0,\"y\":0,\"z\":1.0}\n");
    const auto s = ingest::parse_stream(p.string(), ingest::StreamKind::accel);
    CHECK(s.subject_id == "s1");
    CHECK(s.device_profile == ingest::DeviceProfile::smartwatch);
    CHECK(s.tz == "Europe/Copenhagen");
    REQUIRE(s.accel.size() == 2);
    CHECK(s.accel[0].z == doctest::Approx(9.80665));
}

TEST_CASE("parse: CSV with the same column names") {
    const fs::path p = write_file("cols.csv",
                                  "t,x,y,z\n0,0,0,9.8\n100,0.5,0,9.8\n200,1.0,0,9.8\n");
    const auto s = ingest::parse_stream(p.string(), ingest::StreamKind::accel);
    REQUIRE(s.accel.size() == 3);
    CHECK(s.accel[2].x == doctest::Approx(1.0));

    const fs::path loc = write_file("loc.csv", "t,lat,lon,acc\n0,55.7,12.6,10\n60000,55.8,12.7,8\n");
    const auto l = ingest::parse_stream(loc.string(), ingest::StreamKind::location);
    REQUIRE(l.location.size() == 2);
    CHECK(l.location[1].lat == doctest::Approx(55.8));
}

TEST_CASE("parse: location coordinates out of range are rejected") {
    const fs::path p = write_file("badloc.jsonl", "{\"t\":0,\"lat\":95.0,\"lon\":0,\"acc\":5}\n");
    CHECK_THROWS_AS(ingest::parse_stream(p.string(), ingest::StreamKind::location), DataError);
}

TEST_CASE("serialize/parse round-trip is bit-exact") {
    std::ostringstream body;
    body << "{\"meta\":{\"subject\":\"rt\",\"device\":\"smartphone\",\"units\":\"ms2\",\"tz\":\"UTC\"}}\n";
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 500; ++i)
        body << "{\"t\":" << i * 50 << ",\"x\":" << u(rng) << ",\"y\":" << u(rng)
             << ",\"z\":" << u(rng) << "}\n";
    const auto s1 = ingest::parse_stream(write_file("rt.jsonl", body.str()).string(),
                                         ingest::StreamKind::accel);
    const fs::path again = tmp_dir() / "rt2.jsonl";
    ingest::write_stream_jsonl(s1, again.string());
    const auto s2 = ingest::parse_stream(again.string(), ingest::StreamKind::accel);
    REQUIRE(s2.accel.size() == s1.accel.size());
    for (std::size_t i = 0; i < s1.accel.size(); ++i) {
        REQUIRE(s2.accel[i].t == s1.accel[i].t);
        REQUIRE(s2.accel[i].x == s1.accel[i].x);  // exact, not approximate
        REQUIRE(s2.accel[i].y == s1.accel[i].y);
        REQUIRE(s2.accel[i].z == s1.accel[i].z);
    }
    CHECK(s2.subject_id == "rt");
}

TEST_CASE("resample: constant stays constant on the denser grid") {
    const auto s = uniform_accel(0.0, 30.0, 10.0);
    const auto r = ingest::resample(s, 20.0);
    CHECK(r.accel.size() >= 2 * s.accel.size() - 1);
    for (const auto& a : r.accel) {
        CHECK(a.z == doctest::Approx(9.81));
        CHECK(a.x == doctest::Approx(0.0));
    }
    CHECK(r.nominal_rate_hz == doctest::Approx(20.0));
}

TEST_CASE("resample: linear ramp interpolates to midpoints") {
    ingest::SensorStream s;
    s.kind = ingest::StreamKind::accel;
    s.nominal_rate_hz = 1.0;
    for (int i = 0; i <= 10; ++i) {
        ingest::AccelSample a;
        a.t = i * 1000;
        a.x = static_cast<double>(i);
        s.accel.push_back(a);
    }
    const auto r = ingest::resample(s, 2.0, 10.0);
    bool checked = false;
    for (const auto& a : r.accel)
        if (a.t == 1500) {
            CHECK(a.x == doctest::Approx(1.5));
            checked = true;
        }
    CHECK(checked);
}

TEST_CASE("resample: never fabricates samples inside a gap") {
    auto s = uniform_accel(0.0, 60.0, 10.0);
    append(s, uniform_accel(660.0, 720.0, 10.0));  // 10-minute hole
    const auto r = ingest::resample(s, 20.0, 5.0);
    REQUIRE(!r.accel.empty());
    for (const auto& a : r.accel) {
        const bool in_gap = a.t > 60'000 && a.t < 660'000;
        REQUIRE_FALSE(in_gap);
    }
}

TEST_CASE("resample: rejects location streams and nonpositive rates") {
    ingest::SensorStream loc;
    loc.kind = ingest::StreamKind::location;
    loc.location.push_back({0, 55.0, 12.0, 5.0});
    CHECK_THROWS_AS(ingest::resample(loc, 20.0), DataError);
    const auto s = uniform_accel(0.0, 10.0, 10.0);
    CHECK_THROWS_AS(ingest::resample(s, -1.0), ConfigError);
    CHECK_THROWS_AS(ingest::resample(s, 0.0), ConfigError);
}

TEST_CASE("coverage: uniform stream is one recording segment") {
    const auto s = uniform_accel(0.0, 120.0, 10.0);
    const auto cov = ingest::compute_coverage(s, 5.0);
    REQUIRE(cov.segments.size() == 1);
    CHECK(cov.segments[0].recording);
    CHECK(cov.recording_ms() == cov.span_ms());
}

TEST_CASE("coverage: one 60 s hole yields recording/gap/recording") {
    auto s = uniform_accel(0.0, 60.0, 10.0);
    append(s, uniform_accel(120.0, 180.0, 10.0));
    const auto cov = ingest::compute_coverage(s, 5.0);
    REQUIRE(cov.segments.size() == 3);
    CHECK(cov.segments[0].recording);
    CHECK_FALSE(cov.segments[1].recording);
    CHECK(cov.segments[1].end_ms - cov.segments[1].start_ms == 60'000);
    CHECK(cov.segments[2].recording);
    CHECK(cov.recorded_between(30'000, 150'000) == 60'000);
}

TEST_CASE("coverage: random hole layouts still partition the span exactly") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> holes(0, 4);
        std::uniform_real_distribution<double> pos(0.0, 1.0);
        ingest::SensorStream s;
        s.kind = ingest::StreamKind::accel;
        s.nominal_rate_hz = 10.0;
        double t = 0.0;
        const int nh = holes(rng);
        for (int seg = 0; seg <= nh; ++seg) {
            const double len = 10.0 + 50.0 * pos(rng);
            const double end = t + len;
            while (t <= end) {
                ingest::AccelSample a;
                a.t = static_cast<EpochMs>(std::llround(t * 1000.0));
                s.accel.push_back(a);
                t += 0.1;
            }
            t += 6.0 + 120.0 * pos(rng);  // hole beyond the 5 s threshold
        }
        const auto cov = ingest::compute_coverage(s, 5.0);
        EpochMs sum = 0;
        for (std::size_t i = 0; i < cov.segments.size(); ++i) {
            const auto& seg = cov.segments[i];
            REQUIRE(seg.end_ms >= seg.start_ms);
            if (i > 0) REQUIRE(seg.start_ms == cov.segments[i - 1].end_ms);
            sum += seg.end_ms - seg.start_ms;
        }
        REQUIRE(sum == s.accel.back().t - s.accel.front().t);
        REQUIRE(sum == cov.span_ms());
    }
}

TEST_CASE("window: trivial counts on a gapless 300 s stream") {
    const auto s = uniform_accel(0.0, 300.0, 20.0);
    CHECK(ingest::window(s, 60.0, 60.0).frames.size() == 5);
    CHECK(ingest::window(s, 60.0, 30.0).frames.size() == 9);
    CHECK_THROWS_AS(ingest::window(s, 0.0, 30.0), ConfigError);
    CHECK_THROWS_AS(ingest::window(s, -1.0, 30.0), ConfigError);
}

TEST_CASE("window: gapless count formula holds for arbitrary spans") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> span(60.0, 900.0);
    for (int trial = 0; trial < 25; ++trial) {
        const double T = std::floor(span(rng) * 20.0) / 20.0;  // on the 20 Hz grid
        const auto s = uniform_accel(0.0, T, 20.0);
        const auto fr = ingest::window(s, 60.0, 30.0);
        const std::size_t expect = static_cast<std::size_t>((T - 60.0) / 30.0) + 1;
        REQUIRE(fr.frames.size() == expect);
        REQUIRE(fr.flagged == 0);
    }
}

TEST_CASE("window: a gap mid-frame drops and flags that frame") {
    auto s = uniform_accel(0.0, 125.0, 20.0);
    append(s, uniform_accel(131.0, 300.0, 20.0));
    const auto fr = ingest::window(s, 60.0, 60.0, 5.0);
    // Segment [0,125]: frames at 0 and 60; the one at 120 is cut by the gap.
    // Segment [131,300]: frames at 131 and 191; leftover tail is not a flag.
    CHECK(fr.frames.size() == 4);
    CHECK(fr.flagged == 1);
    CHECK(fr.frames[2].start_ms == 131'000);
    // Frames never straddle the gap.
    const EpochMs len_ms = 60'000;
    for (const auto& f : fr.frames) {
        const bool straddles = f.start_ms < 125'000 && f.start_ms + len_ms > 125'000;
        CHECK_FALSE(straddles);
    }
}
