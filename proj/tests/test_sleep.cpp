#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "obeskit/sleep.hpp"

using namespace obeskit;

namespace {

std::vector<activity::ActivityCounts> minutes(const std::vector<double>& vals,
                                              EpochMs t0 = 0) {
    std::vector<activity::ActivityCounts> out;
    for (std::size_t i = 0; i < vals.size(); ++i)
        out.push_back({t0 + static_cast<EpochMs>(i) * 60'000, vals[i]});
    return out;
}

// Scores built directly (bypassing the scorers) to drive segmentation.
std::vector<sleep::EpochScore> labels(const std::vector<int>& sleep_flags, EpochMs t0 = 0) {
    std::vector<sleep::EpochScore> out;
    for (std::size_t i = 0; i < sleep_flags.size(); ++i) {
        sleep::EpochScore e;
        e.minute_start = t0 + static_cast<EpochMs>(i) * 60'000;
        e.sleep = sleep_flags[i] != 0;
        out.push_back(e);
    }
    return out;
}

}  // namespace

TEST_CASE("weighted-window scorer: all-zero counts score sleep everywhere") {
    const auto scores = sleep::score_epochs(minutes(std::vector<double>(30, 0.0)), {});
    REQUIRE(scores.size() == 30);
    for (const auto& e : scores) {
        CHECK(e.sleep);
        CHECK(e.scorer == sleep::Scorer::cole);
    }
}

TEST_CASE("weighted-window scorer: one large spike wakes exactly its window reach") {
    // Weights cover minutes -4..+2 around each epoch, so a spike at p makes
    // D >= threshold exactly for epochs p-2 .. p+4 (every weight x 10000
    // x 0.001 clears the threshold of 1).
    std::vector<double> vals(40, 0.0);
    const int p = 20;
    vals[p] = 10'000.0;
    const auto scores = sleep::score_epochs(minutes(vals), {});
    REQUIRE(scores.size() == 40);
    for (int m = 0; m < 40; ++m) {
        const bool expect_wake = m >= p - 2 && m <= p + 4;
        CHECK(scores[m].sleep == !expect_wake);
    }
}

TEST_CASE("regression scorer: zeros sleep; mid-range restlessness wakes") {
    sleep::SleepConfig cfg;
    cfg.scorer = sleep::Scorer::sadeh;
    const auto quiet = sleep::score_epochs(minutes(std::vector<double>(25, 0.0)), cfg);
    for (const auto& e : quiet) {
        CHECK(e.sleep);  // PS = b0 = 7.601 > 0
        CHECK(e.scorer == sleep::Scorer::sadeh);
    }
    // Constant 75 counts: MW5 = 75, NAT = 11, SD6 = 0, LG = ln 76 → PS ≈ -12.2.
    const auto restless = sleep::score_epochs(minutes(std::vector<double>(25, 75.0)), cfg);
    for (std::size_t i = 5; i + 5 < restless.size(); ++i) CHECK_FALSE(restless[i].sleep);
}

TEST_CASE("scorers reject negative counts") {
    CHECK_THROWS_AS(sleep::score_epochs(minutes({0.0, -3.0, 0.0}), {}), DataError);
}

TEST_CASE("scoring is window-local for both scorers") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 300.0);
    std::vector<double> base(120);
    for (auto& v : base) v = u(rng);
    for (const sleep::Scorer s : {sleep::Scorer::cole, sleep::Scorer::sadeh}) {
        sleep::SleepConfig cfg;
        cfg.scorer = s;
        const auto before = sleep::score_epochs(minutes(base), cfg);
        auto tweaked = base;
        const int c = 60;
        tweaked[c] = tweaked[c] + 5000.0;
        const auto after = sleep::score_epochs(minutes(tweaked), cfg);
        const int reach = 5;  // max(−4..+2 reach, ±5)
        for (int m = 0; m < 120; ++m)
            if (m < c - reach || m > c + reach) REQUIRE(before[m].sleep == after[m].sleep);
    }
}

TEST_CASE("count scale maps counts onto the coefficient scale") {
    // A spike of 2000 with scale 1 wakes its reach; with scale 1e-4 it cannot.
    std::vector<double> vals(20, 0.0);
    vals[10] = 2000.0;
    sleep::SleepConfig scaled;
    scaled.count_scale = 1e-4;
    const auto s1 = sleep::score_epochs(minutes(vals), {});
    const auto s2 = sleep::score_epochs(minutes(vals), scaled);
    CHECK_FALSE(s1[10].sleep);
    CHECK(s2[10].sleep);
}

TEST_CASE("segmentation: the three definitional examples") {
    {
        const auto sess = sleep::segment_sessions(labels(std::vector<int>(420, 1)), {});
        REQUIRE(sess.size() == 1);
        CHECK(sess[0].GST_min == 420);
        CHECK(sess[0].NST_min == 420);
        CHECK(sess[0].NI == 0);
        CHECK(sess[0].TTI_min == 0);
        CHECK(sess[0].SE - sess[0].SS == 420 * 60'000);
    }
    {
        std::vector<int> seq(200, 1);
        seq.insert(seq.end(), 10, 0);
        seq.insert(seq.end(), 250, 1);
        const auto sess = sleep::segment_sessions(labels(seq), {});
        REQUIRE(sess.size() == 1);
        CHECK(sess[0].GST_min == 460);
        CHECK(sess[0].NI == 1);
        CHECK(sess[0].TTI_min == 10);
        CHECK(sess[0].NST_min == 450);
    }
    {
        std::vector<int> seq(90, 1);
        seq.insert(seq.end(), 180, 0);  // 3 h awake
        seq.insert(seq.end(), 90, 1);
        const auto sess = sleep::segment_sessions(labels(seq), {});
        REQUIRE(sess.size() == 2);
        CHECK(sess[0].GST_min == 90);
        CHECK(sess[1].GST_min == 90);
        CHECK(sess[0].SE <= sess[1].SS);
    }
}

TEST_CASE("segmentation: sessions under the minimum length are dropped") {
    std::vector<int> seq(30, 1);  // 30 min < 60 min minimum
    CHECK(sleep::segment_sessions(labels(seq), {}).empty());
    sleep::SleepConfig cfg;
    cfg.min_session_min = 20.0;
    CHECK(sleep::segment_sessions(labels(seq), cfg).size() == 1);
}

TEST_CASE("segmentation identities hold on random label sequences") {
    std::mt19937_64 rng(3);
    std::bernoulli_distribution coin(0.6);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> seq(300);
        for (auto& v : seq) v = coin(rng) ? 1 : 0;
        const auto sess = sleep::segment_sessions(labels(seq), {});
        EpochMs prev_end = -1;
        long long total_gst = 0;
        for (const auto& s : sess) {
            REQUIRE(s.SS < s.SE);
            REQUIRE(s.GST_min == (s.SE - s.SS) / 60'000);
            REQUIRE(s.NST_min == s.GST_min - s.TTI_min);
            REQUIRE(s.TTI_min >= 0);
            REQUIRE(((s.NI == 0) == (s.TTI_min == 0)));
            REQUIRE(s.SS > prev_end);  // disjoint and ordered
            prev_end = s.SE;
            total_gst += s.GST_min;
        }
        REQUIRE(total_gst <= 300);
    }
}

TEST_CASE("adding wake minutes inside a session never increases net sleep") {
    std::vector<int> seq(300, 1);
    const auto base = sleep::segment_sessions(labels(seq), {});
    REQUIRE(base.size() == 1);
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> pos(10, 289);
    long long prev_nst = base[0].NST_min;
    auto cur = seq;
    for (int k = 0; k < 15; ++k) {
        cur[pos(rng)] = 0;  // short interior wake, stays merged
        const auto sess = sleep::segment_sessions(labels(cur), {});
        REQUIRE(sess.size() == 1);
        CHECK(sess[0].NST_min <= prev_nst);
        prev_nst = sess[0].NST_min;
    }
}

TEST_CASE("non-wear masking removes only sustained exact-zero runs") {
    std::vector<double> vals;
    for (int i = 0; i < 30; ++i) vals.push_back(50.0);  // worn, active
    for (int i = 0; i < 90; ++i) vals.push_back(0.0);   // 90 min of exact zero → non-wear
    vals.push_back(5.0);                                // movement resumes
    for (int i = 0; i < 29; ++i) vals.push_back(0.0);   // short quiet run, kept
    const auto kept = sleep::mask_nonwear(minutes(vals), 60.0);
    CHECK(kept.size() == vals.size() - 90);
    for (const auto& c : kept) {
        const EpochMs m = c.minute_start / 60'000;
        CHECK((m < 30 || m >= 120));
    }
    // Threshold edge: non-wear requires a run strictly longer than the limit.
    std::vector<double> edge(10, 40.0);
    edge.insert(edge.end(), 60, 0.0);
    edge.insert(edge.end(), 10, 40.0);
    CHECK(sleep::mask_nonwear(minutes(edge), 60.0).size() == 80);
    std::vector<double> over(10, 40.0);
    over.insert(over.end(), 61, 0.0);
    over.insert(over.end(), 10, 40.0);
    CHECK(sleep::mask_nonwear(minutes(over), 60.0).size() == 20);
}

TEST_CASE("scorer name round-trip") {
    CHECK(sleep::scorer_from_string("cole") == sleep::Scorer::cole);
    CHECK(sleep::scorer_from_string("sadeh") == sleep::Scorer::sadeh);
    CHECK(sleep::to_string(sleep::Scorer::sadeh) == "sadeh");
    CHECK_THROWS_AS(sleep::scorer_from_string("oakley"), ConfigError);
}
