#pragma once

#include <array>
#include <string>
#include <vector>

#include "obeskit/activity.hpp"
#include "obeskit/common.hpp"

namespace obeskit::sleep {

enum class Scorer { cole, sadeh };

std::string to_string(Scorer s);
Scorer scorer_from_string(const std::string& s);

struct EpochScore {
    EpochMs minute_start = 0;
    double counts = 0.0;
    bool sleep = false;
    Scorer scorer = Scorer::cole;
};

// Weighted-window scorer: D = scale * sum(w_k * counts[k]) over minutes
// -4..+2 around the epoch; sleep iff D < threshold.
struct ColeCoef {
    double scale = 0.001;
    std::array<double, 7> w{106.0, 54.0, 58.0, 76.0, 230.0, 74.0, 67.0};
    double threshold = 1.0;
};

// Regression scorer: PS = b0 - b1*MW5 - b2*NAT - b3*SD6 - b4*LG over an
// 11-minute centered window; sleep iff PS >= 0.
struct SadehCoef {
    double b0 = 7.601, b1 = 0.065, b2 = 1.08, b3 = 0.056, b4 = 0.703;
    double nat_lo = 50.0, nat_hi = 100.0;  // counts range tallied by NAT
};

struct SleepConfig {
    Scorer scorer = Scorer::cole;
    ColeCoef cole;
    SadehCoef sadeh;
    double count_scale = 1.0;      // maps engine counts onto the coefficient scale
    double merge_gap_min = 20.0;   // wake gaps shorter than this stay in-session
    double min_session_min = 60.0;
    double nonwear_zero_min = 60.0;  // sustained exact-zero runs treated as non-wear
};

// Drops epochs inside exact-zero runs longer than the non-wear threshold.
std::vector<activity::ActivityCounts> mask_nonwear(
    const std::vector<activity::ActivityCounts>& counts, double nonwear_zero_min);

// Per-minute sleep/wake labels. Contiguity gaps split the scoring windows
// (zero-padded at each run boundary).
std::vector<EpochScore> score_epochs(const std::vector<activity::ActivityCounts>& counts,
                                     const SleepConfig& cfg);

struct SleepSession {
    EpochMs SS = 0;  // first sleep minute start
    EpochMs SE = 0;  // last sleep minute end
    long long GST_min = 0;
    long long TTI_min = 0;
    long long NI = 0;
    long long NST_min = 0;
};

// Merges sleep runs across short wake gaps, drops short sessions, and
// derives the six indicators (identities exact in whole minutes).
std::vector<SleepSession> segment_sessions(const std::vector<EpochScore>& scores,
                                           const SleepConfig& cfg);

}  // namespace obeskit::sleep
