#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obeskit/common.hpp"
#include "obeskit/location.hpp"
#include "obeskit/sleep.hpp"

namespace obeskit::eval {

// ---- place-detection matching ----

struct PoiMatchResult {
    std::size_t tp = 0, fp = 0, fn = 0;
    std::optional<double> precision, recall, f1;  // unset when the denominator is zero
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (truth index, detected index)
    double max_dist_m = 0.0, min_overlap = 0.0;              // thresholds used
};

// Maximum-cardinality one-to-one matching; a pair is eligible when the
// centers lie within max_dist_m and the time overlap covers at least
// min_overlap of the truth stay's duration.
PoiMatchResult match_pois(const std::vector<location::PointOfInterest>& truth,
                          const std::vector<location::PointOfInterest>& detected,
                          double max_dist_m = 100.0, double min_overlap = 0.5);

// Precision/recall/F1 from raw counts (same null rules as match_pois).
PoiMatchResult metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

// ---- step-count error ----

struct StepRecording {
    std::string group;  // e.g. device position
    double truth = 0.0;
    double predicted = 0.0;
};

struct StepGroupStats {
    std::string group;
    std::size_t n = 0;
    double pred_mean = 0.0, pred_std = 0.0;
    double abs_mean = 0.0, abs_std = 0.0;
    double rel_mean = 0.0, rel_std = 0.0;  // percent of truth
    std::size_t rel_excluded = 0;          // recordings with truth = 0
};

// Per-group absolute/relative error stats plus a final "overall" row.
std::vector<StepGroupStats> step_error(const std::vector<StepRecording>& recordings);

// ---- confusion matrices ----

struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::size_t>> counts;  // counts[truth][predicted]

    std::vector<std::vector<double>> row_percent() const;  // rows sum to 100 (or 0)
    std::size_t total() const;
    double accuracy() const;
    double recall(std::size_t cls) const;  // diagonal / row sum
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          const std::vector<std::string>& classes);

// ---- sleep-session evaluation ----

struct AnnotationEvent {
    EpochMs t = 0;
    std::string label;  // Recording Start/End, In Bed, Sleep Start/End, Off Bed, No wear, Wear
};

// Ground-truth sessions from an annotation event stream. Wake gaps shorter
// than merge_gap_min stay inside one session as interrupts; no minimum
// session length is applied to truth.
std::vector<sleep::SleepSession> sessions_from_annotations(
    const std::vector<AnnotationEvent>& events, double merge_gap_min = 20.0);

std::vector<AnnotationEvent> load_annotations(const std::string& path);

struct AeStats {
    std::size_t n = 0;
    double mean = 0.0, stddev = 0.0, max = 0.0;
};

struct SleepEvalResult {
    double css = 0.0;  // fraction of recordings whose session count matches truth
    std::size_t n_recordings = 0;
    std::size_t n_count_matched = 0;
    std::map<std::string, AeStats> ae;  // GST/SS/SE in min; TTI/NST in min, NI in count
};

// CSS over recordings; AE stats only over recordings with matching session
// counts, sessions paired in time order. TTI/NI/NST rows appear only when
// truth annotations carry interrupts (truth_has_interrupts).
SleepEvalResult sleep_eval(const std::vector<std::vector<sleep::SleepSession>>& truth,
                           const std::vector<std::vector<sleep::SleepSession>>& predicted,
                           bool truth_has_interrupts = true);

// ---- report rendering ----

std::string poi_match_markdown(const std::vector<std::pair<std::string, PoiMatchResult>>& rows);
std::string step_error_markdown(const std::vector<StepGroupStats>& rows);
std::string confusion_markdown(const ConfusionMatrix& m);
std::string sleep_eval_markdown(const std::vector<std::pair<std::string, SleepEvalResult>>& rows);

}  // namespace obeskit::eval
