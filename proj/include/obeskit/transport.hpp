#pragma once

#include <map>
#include <string>
#include <vector>

#include "obeskit/common.hpp"
#include "obeskit/ingest.hpp"
#include "obeskit/location.hpp"
#include "obeskit/models.hpp"

namespace obeskit::transport {

// {walk_run, bike, car, bus, train_subway}
const std::vector<std::string>& mode_classes();

struct Trip {
    EpochMs start_t = 0;
    EpochMs end_t = 0;
    std::string origin_poi, dest_poi;  // empty when the trip starts/ends off-record
    std::vector<int> mode_sequence;    // per-second class indices, post-filter
    std::string dominant_mode;
    std::map<std::string, int> mode_seconds;
};

struct TripConfig {
    double min_trip_s = 120.0;
    double min_coverage = 0.5;  // accelerometer coverage required over the gap
};

// One candidate trip per inter-stay gap with enough duration and
// accelerometer coverage.
std::vector<Trip> segment_trips(const std::vector<location::PointOfInterest>& pois,
                                const ingest::CoverageMap& accel_coverage,
                                const TripConfig& cfg = {});

// Time-domain stats per axis and magnitude plus 5 spectral power bands of
// the magnitude over 0-10 Hz; 21 values per 1 s frame.
std::vector<double> extract_transport_features(const double* x, const double* y, const double* z,
                                               std::size_t n, double rate_hz);
std::size_t transport_feature_dim();
const std::string& transport_feature_spec();

std::vector<std::vector<double>> transport_features_batch(const ingest::SensorStream& s,
                                                          const ingest::FrameSet& frames);
std::vector<std::vector<double>> transport_features_batch_serial(const ingest::SensorStream& s,
                                                                 const ingest::FrameSet& frames);

struct TrainConfig {
    double C = 1000.0;
    double gamma = 0.0;  // 0 → 1/D
    models::Kernel kernel = models::Kernel::rbf;
};

// Radial-basis max-margin classifier over the 5 modes with
// training-count-derived class weights w_i = min_k n_k / n_i.
models::SvmModel train_transport(const std::vector<std::vector<double>>& X,
                                 const std::vector<int>& y, const TrainConfig& cfg = {});

// Lower median over a centered window of w labels (w odd); edges are
// replicate-padded. Guaranteed never to increase the number of label
// transitions: if smoothing would fragment the sequence, the input is
// returned unchanged.
std::vector<int> median_filter_labels(const std::vector<int>& labels, int w);

struct ClassifyConfig {
    int median_window_s = 9;
};

// Per-second classification of the trip's frames, median-filtered;
// dominant mode = modal label (ties resolve to the first class in order).
void classify_trip(Trip& trip, const ingest::SensorStream& accel,
                   const ingest::FrameSet& second_frames, const models::SvmModel& model,
                   const ClassifyConfig& cfg = {});

}  // namespace obeskit::transport
