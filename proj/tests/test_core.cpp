#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "obeskit/core/digest.hpp"
#include "obeskit/core/dsp.hpp"
#include "obeskit/core/exec.hpp"
#include "obeskit/core/geo.hpp"
#include "obeskit/core/timezone.hpp"

using namespace obeskit;

namespace {
std::vector<double> tone(double amp, double freq_hz, double rate_hz, double seconds,
                         double phase = 0.0) {
    const std::size_t n = static_cast<std::size_t>(seconds * rate_hz);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = amp * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / rate_hz + phase);
    return x;
}
}  // namespace

TEST_CASE("band-pass magnitude response matches the reference design") {
    // Oracle: independently computed frequency response of a 4-pair
    // Butterworth band-pass, 0.5-3 Hz at 20 Hz (bilinear transform).
    const dsp::Sos sos = dsp::butter_bandpass(4, 0.5, 3.0, 20.0);
    CHECK(dsp::sos_gain(sos, 0.5, 20.0) == doctest::Approx(0.7071067811865513).epsilon(1e-9));
    CHECK(dsp::sos_gain(sos, 2.0, 20.0) == doctest::Approx(0.9988569122442956).epsilon(1e-9));
    CHECK(dsp::sos_gain(sos, 3.5, 20.0) == doctest::Approx(0.3583106694103542).epsilon(1e-9));
    // Band edges sit at -3 dB by construction; DC and Nyquist are blocked.
    CHECK(dsp::sos_gain(sos, 3.0, 20.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(dsp::sos_gain(sos, 0.0, 20.0) < 1e-9);
    CHECK(dsp::sos_gain(sos, 10.0, 20.0) < 1e-9);
}

TEST_CASE("single-pass filter blocks a constant signal without a transient") {
    const dsp::Sos sos = dsp::butter_bandpass(4, 0.5, 3.0, 20.0);
    const std::vector<double> x(400, 3.7);
    const std::vector<double> y = dsp::sos_filter(sos, x);
    REQUIRE(y.size() == x.size());
    for (double v : y) CHECK(std::abs(v) < 1e-6);  // steady-state init, no startup spike
}

TEST_CASE("zero-phase filtering scales a passband tone by squared gain, no phase shift") {
    const dsp::Sos sos = dsp::butter_bandpass(4, 0.5, 3.0, 20.0);
    const double g = dsp::sos_gain(sos, 2.0, 20.0);
    const std::vector<double> x = tone(1.0, 2.0, 20.0, 30.0);
    const std::vector<double> y = dsp::filtfilt(sos, x);
    REQUIRE(y.size() == x.size());
    // Compare mid-section (edges see reflection padding effects).
    double dot = 0.0, xx = 0.0;
    for (std::size_t i = 100; i + 100 < x.size(); ++i) {
        dot += x[i] * y[i];
        xx += x[i] * x[i];
    }
    CHECK(dot / xx == doctest::Approx(g * g).epsilon(1e-3));  // in-phase, amplitude g^2
}

TEST_CASE("power spectrum puts a pure tone in its bin") {
    const double rate = 20.0;
    const std::vector<double> x = tone(2.0, 3.0, rate, 1.0);  // 20 samples, bin spacing 1 Hz
    const std::vector<double> p = dsp::power_spectrum(x);
    REQUIRE(p.size() == 11);  // bins 0..N/2
    std::size_t peak = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[peak]) peak = i;
    CHECK(peak == 3);
    CHECK(p[3] > 100.0 * (p[2] + p[4] + 1e-12));
}

TEST_CASE("band power concentrates a tone into the right band") {
    const std::vector<double> x = tone(1.0, 3.0, 20.0, 4.0);
    const std::vector<double> b = dsp::band_power(x, 20.0, 5);  // 2 Hz-wide bands over 0-10 Hz
    REQUIRE(b.size() == 5);
    const double total = std::accumulate(b.begin(), b.end(), 0.0);
    CHECK(b[1] / total > 0.95);  // 3 Hz lives in [2, 4)
}

TEST_CASE("spectral summary finds the dominant frequency and ranks entropy sensibly") {
    const auto pure = dsp::spectral_summary(tone(1.0, 2.0, 20.0, 10.0), 20.0);
    CHECK(pure.dominant_hz == doctest::Approx(2.0).epsilon(0.01));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> noise(200);
    for (auto& v : noise) v = n(rng);
    const auto flat = dsp::spectral_summary(noise, 20.0);
    CHECK(pure.entropy < flat.entropy);
    CHECK(pure.entropy >= 0.0);
    CHECK(flat.entropy <= 1.0);
}

TEST_CASE("summary statistics") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    CHECK(dsp::mean(x) == doctest::Approx(2.5));
    CHECK(dsp::stddev(x) == doctest::Approx(std::sqrt(1.25)));  // population form
    CHECK(dsp::median({5.0, 1.0, 3.0}) == doctest::Approx(3.0));
    CHECK(dsp::median({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5));
}

TEST_CASE("haversine distance basics") {
    CHECK(geo::haversine_m(12.0, 34.0, 12.0, 34.0) == doctest::Approx(0.0));
    // One degree of longitude on the equator = R * pi / 180.
    CHECK(geo::haversine_m(0.0, 0.0, 0.0, 1.0) ==
          doctest::Approx(geo::kEarthRadiusM * M_PI / 180.0).epsilon(1e-9));
    CHECK(geo::haversine_m(10.0, 20.0, -30.0, 40.0) ==
          doctest::Approx(geo::haversine_m(-30.0, 40.0, 10.0, 20.0)).epsilon(1e-12));
    CHECK(geo::valid_lat(90.0));
    CHECK_FALSE(geo::valid_lat(90.5));
    CHECK_FALSE(geo::valid_lon(-180.5));
}

TEST_CASE("civil-day arithmetic round-trips") {
    CHECK(tz::days_from_civil(1970, 1, 1) == 0);
    CHECK(tz::days_from_civil(2000, 3, 1) == 11017);
    int y = 0, m = 0, d = 0;
    tz::civil_from_days(tz::days_from_civil(2024, 2, 29), y, m, d);
    CHECK(y == 2024);
    CHECK(m == 2);
    CHECK(d == 29);
}

TEST_CASE("fixed-offset zones") {
    const tz::Zone utc = tz::Zone::load("UTC");
    CHECK(utc.offset_at(0) == 0);
    CHECK(utc.local_date(0) == "1970-01-01");
    const tz::Zone half = tz::Zone::load("UTC+01:30");
    CHECK(half.offset_at(1'000'000'000'000LL) == 5400);
    const tz::Zone neg = tz::Zone::load("UTC-05:00");
    CHECK(neg.offset_at(0) == -18000);
    // 23:30 UTC on Jan 1 is already Jan 2 at +01:30.
    const EpochMs t = 23LL * 3600000 + 30 * 60000;
    CHECK(half.local_date(t) == "1970-01-02");
    CHECK(utc.local_date(t) == "1970-01-01");
}

TEST_CASE("IANA zone with daylight saving") {
    const tz::Zone cph = tz::Zone::load("Europe/Copenhagen");
    // 2023-01-15 12:00 UTC → CET (+1); 2023-07-15 12:00 UTC → CEST (+2).
    const EpochMs jan = 1673784000000LL;
    const EpochMs jul = 1689422400000LL;
    CHECK(cph.offset_at(jan) == 3600);
    CHECK(cph.offset_at(jul) == 7200);
    const tz::LocalTime lt = cph.local(jul);
    CHECK(lt.year == 2023);
    CHECK(lt.month == 7);
    CHECK(lt.day == 15);
    CHECK(lt.hour == 14);
    // Day start is idempotent and at most 26 h before the next.
    const EpochMs ds = cph.local_day_start(jul);
    CHECK(cph.local_day_start(ds) == ds);
    CHECK(cph.local(ds).hour == 0);
    CHECK(cph.local_date(ds) == "2023-07-15");
}

TEST_CASE("zone load rejects unknown names") {
    CHECK_THROWS_AS(tz::Zone::load("Not/AZone"), ConfigError);
    CHECK_THROWS_AS(tz::Zone::load("UTC+25:00"), ConfigError);
}

TEST_CASE("sha-256 known vectors") {
    CHECK(digest::sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(digest::sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("salted tags are deterministic, salt-sensitive, and sized") {
    const std::string a = digest::salted_tag("pepper", "subject-1");
    CHECK(a.size() == 16);
    CHECK(a == digest::salted_tag("pepper", "subject-1"));
    CHECK(a != digest::salted_tag("other", "subject-1"));
    CHECK(a != digest::salted_tag("pepper", "subject-2"));
    CHECK(digest::salted_tag("pepper", "subject-1", 8).size() == 8);
    for (char c : a) CHECK(std::string("0123456789abcdef").find(c) != std::string::npos);
}

TEST_CASE("parallel_for covers every index exactly once") {
    const int saved = exec::max_workers();
    exec::set_max_workers(4);
    std::vector<int> hits(10'000, 0);
    exec::parallel_for(hits.size(), [&](std::size_t i) { hits[i] += static_cast<int>(i) + 1; });
    for (std::size_t i = 0; i < hits.size(); ++i) REQUIRE(hits[i] == static_cast<int>(i) + 1);
    exec::set_max_workers(saved);
}
