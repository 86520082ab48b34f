#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "obeskit/common.hpp"
#include "obeskit/eval.hpp"
#include "obeskit/ingest.hpp"

namespace obeskit::sim {

struct SleepInterrupt {
    double offset_min = 0.0;  // from block start
    double dur_min = 0.0;
};

// One contiguous behavior segment; a subject's timeline is the block
// sequence laid end to end.
struct Block {
    std::string kind;  // still|lay|stand|walk|run|cycle|stairs|shake|sleep|dwell|travel
    double duration_s = 0.0;
    double cadence_hz = 0.0;  // walk/run/stairs step rate (0 → kind default)
    double amp_ms2 = 0.0;     // accel texture amplitude (0 → kind default)
    std::string mode;         // travel: walk_run|bike|car|bus|train_subway
    double lat = 0.0, lon = 0.0;  // dwell center / travel destination
    std::string place_id;         // dwell: stable place identity for truth
    double sleep_latency_min = 5.0;  // sleep: in-bed time before sleep onset
    double wake_latency_min = 5.0;   // sleep: in-bed time after final wake
    std::vector<SleepInterrupt> interrupts;  // sleep: brief awakenings
};

struct SubjectScenario {
    std::string subject_id;
    std::string device = "smartphone";
    std::string tz = "UTC";
    EpochMs start_t = 0;
    double start_lat = 0.0, start_lon = 0.0;
    std::vector<Block> blocks;
};

struct Scenario {
    std::uint64_t seed = 1;
    double accel_rate_hz = 20.0;
    double location_interval_s = 30.0;
    std::vector<SubjectScenario> subjects;
};

// Realized timeline with the quantities the generator guarantees; these are
// the ground truth the evaluation stage scores against.
struct RealizedBlock {
    std::string kind;
    EpochMs t0 = 0, t1 = 0;
    long long steps = 0;
    std::string mode;
    std::string place_id;
    double lat = 0.0, lon = 0.0;
};

struct SubjectTruth {
    std::string subject_id;
    long long total_steps = 0;
    std::vector<RealizedBlock> blocks;
    std::vector<eval::AnnotationEvent> sleep_events;
};

Scenario scenario_from_json(const nlohmann::json& j);

// Deterministic for a fixed (scenario seed, subject index).
SubjectTruth simulate_subject(const Scenario& sc, std::size_t subject_index,
                              ingest::SensorStream& accel_out, ingest::SensorStream& loc_out);

void write_truth_json(const SubjectTruth& truth, const std::string& path);
SubjectTruth load_truth_json(const std::string& path);
void write_annotations(const std::vector<eval::AnnotationEvent>& events, const std::string& path);

}  // namespace obeskit::sim
