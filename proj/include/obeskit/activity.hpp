#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "obeskit/common.hpp"
#include "obeskit/ingest.hpp"
#include "obeskit/models.hpp"

namespace obeskit::activity {

struct ActivityCounts {
    EpochMs minute_start = 0;
    double counts = 0.0;
};

struct StepEstimate {
    EpochMs window_start = 0;
    int steps = 0;
    ingest::DeviceProfile algorithm = ingest::DeviceProfile::unknown;
};

enum class Level { sedentary, moderate, vigorous, very_vigorous };

std::string to_string(Level l);

struct ActivityLevel {
    EpochMs minute_start = 0;
    Level level = Level::sedentary;
};

struct CutPoints {
    double c1 = 100.0;   // sedentary | moderate
    double c2 = 1800.0;  // moderate | vigorous
    double c3 = 4000.0;  // vigorous | very vigorous
};

struct TypePrediction {
    EpochMs window_start = 0;
    std::string label;
    std::vector<double> scores;  // per class, sums to 1
};

struct CountsConfig {
    double band_lo_hz = 0.5;
    double band_hi_hz = 3.0;
    int filter_order = 4;
};

struct StepConfig {
    double band_lo_hz = 0.5;
    double band_hi_hz = 3.0;
    int filter_order = 4;
    double context_s = 5.0;        // sliding window for the adaptive threshold
    double mult_phone = 0.6;       // threshold = mean + mult * std over context
    double mult_watch = 0.45;
    double min_peak_dist_s = 0.3;
    double min_peak_amp = 0.3;     // absolute floor, m/s^2
    double max_period_s = 2.0;     // longer inter-peak intervals break a bout
    double period_dev = 0.30;      // running-median deviation that splits a bout
    int min_bout_peaks = 4;
    double autocorr_min = 0.4;     // bout signal self-similarity at the step period
};

// Rectified band-passed acceleration integrated per frame:
// counts = sum(|bp(x,y,z)| norm) / rate. Frames must be 60 s long.
std::vector<ActivityCounts> counts_for_frames(const ingest::SensorStream& s,
                                              const ingest::FrameSet& frames,
                                              const CountsConfig& cfg = {});
std::vector<ActivityCounts> counts_for_frames_serial(const ingest::SensorStream& s,
                                                     const ingest::FrameSet& frames,
                                                     const CountsConfig& cfg = {});

// Step timestamps over the whole stream (detection runs on maximal
// contiguous sample runs so frame boundaries cost no steps).
std::vector<EpochMs> detect_step_times(const ingest::SensorStream& s,
                                       ingest::DeviceProfile profile, const StepConfig& cfg = {});

// detect_step_times binned into the frame grid.
std::vector<StepEstimate> count_steps(const ingest::SensorStream& s,
                                      const ingest::FrameSet& frames,
                                      ingest::DeviceProfile profile, const StepConfig& cfg = {});

Level classify_level(double counts, const CutPoints& cp = {});
std::vector<ActivityLevel> classify_levels(const std::vector<ActivityCounts>& counts,
                                           const CutPoints& cp = {});

// {lay, stand, walk, run, cycle, stairs}
const std::vector<std::string>& type_classes();

// Per-axis mean/std/median/peak-count/energy, magnitude mean/std, pairwise
// axis correlations, spectral entropy and dominant frequency of magnitude.
std::vector<double> extract_type_features(const double* x, const double* y, const double* z,
                                          std::size_t n, double rate_hz);
std::vector<double> extract_type_features(const ingest::SensorStream& s,
                                          const ingest::Frame& frame,
                                          const ingest::FrameSet& frames);
std::size_t type_feature_dim();
const std::string& type_feature_spec();

std::vector<std::vector<double>> type_features_batch(const ingest::SensorStream& s,
                                                     const ingest::FrameSet& frames);
std::vector<std::vector<double>> type_features_batch_serial(const ingest::SensorStream& s,
                                                            const ingest::FrameSet& frames);

TypePrediction classify_type(const std::vector<double>& features, const models::SvmModel& model,
                             EpochMs window_start = 0);

}  // namespace obeskit::activity
