#include <algorithm>
#include <cmath>

#include "obeskit/transport.hpp"

namespace obeskit::transport {

models::SvmModel train_transport(const std::vector<std::vector<double>>& X,
                                 const std::vector<int>& y, const TrainConfig& cfg) {
    models::SvmConfig sc;
    sc.kernel = cfg.kernel;
    sc.C = cfg.C;
    sc.gamma = cfg.gamma;
    sc.decomposition = models::Decomposition::one_vs_one;
    return models::train_svm(X, y, mode_classes(), sc, "transport_mode",
                             transport_feature_spec());
}

namespace {
std::size_t label_transitions(const std::vector<int>& seq) {
    std::size_t t = 0;
    for (std::size_t i = 1; i < seq.size(); ++i) t += seq[i] != seq[i - 1];
    return t;
}
}  // namespace

std::vector<int> median_filter_labels(const std::vector<int>& labels, int w) {
    if (w < 1 || w % 2 == 0) throw ConfigError("median filter window must be odd and positive");
    const std::size_t n = labels.size();
    if (n == 0) return {};
    const std::size_t half = static_cast<std::size_t>(w / 2);
    // Replicate-padded windows: position i sees indices clamped to [0, n),
    // so every window draws only on labels present in the centered window.
    std::vector<int> out(n);
    std::vector<int> win;
    for (std::size_t i = 0; i < n; ++i) {
        win.clear();
        for (std::size_t k = 0; k < static_cast<std::size_t>(w); ++k) {
            const std::size_t raw = i + k;
            const std::size_t idx =
                raw < half ? 0 : std::min(n - 1, raw - half);
            win.push_back(labels[idx]);
        }
        std::sort(win.begin(), win.end());
        out[i] = win[(win.size() - 1) / 2];  // lower median is always an input label
    }
    // Smoothing must never fragment the sequence further. Multilevel medians
    // can increase the transition count on adversarial inputs; keep the
    // original sequence in that case.
    if (label_transitions(out) > label_transitions(labels)) return labels;
    return out;
}

void classify_trip(Trip& trip, const ingest::SensorStream& accel,
                   const ingest::FrameSet& second_frames, const models::SvmModel& model,
                   const ClassifyConfig& cfg) {
    if (model.dim != transport_feature_dim())
        throw DataError("transport model feature dimension mismatch");
    if (model.feature_hash !=
        models::feature_hash_for(transport_feature_spec(), transport_feature_dim()))
        throw DataError("transport model was trained on a different feature spec");

    // Frames inside the trip interval.
    const EpochMs len_ms = static_cast<EpochMs>(
        std::llround(1000.0 * static_cast<double>(second_frames.len_samples) /
                     second_frames.rate_hz));
    ingest::FrameSet in_trip;
    in_trip.rate_hz = second_frames.rate_hz;
    in_trip.len_samples = second_frames.len_samples;
    in_trip.hop_samples = second_frames.hop_samples;
    for (const ingest::Frame& f : second_frames.frames)
        if (f.start_ms >= trip.start_t && f.start_ms + len_ms <= trip.end_t)
            in_trip.frames.push_back(f);

    trip.mode_sequence.clear();
    trip.mode_seconds.clear();
    trip.dominant_mode.clear();
    if (in_trip.frames.empty()) return;

    const std::vector<std::vector<double>> feats = transport_features_batch(accel, in_trip);
    std::vector<int> labels = model.predict_batch(feats);
    labels = median_filter_labels(labels, cfg.median_window_s);

    std::vector<int> tally(model.classes.size(), 0);
    for (int l : labels) ++tally[l];
    int best = 0;
    for (std::size_t c = 1; c < tally.size(); ++c)
        if (tally[c] > tally[best]) best = static_cast<int>(c);

    trip.mode_sequence = std::move(labels);
    trip.dominant_mode = model.classes[best];
    for (std::size_t c = 0; c < tally.size(); ++c)
        if (tally[c] > 0) trip.mode_seconds[model.classes[c]] = tally[c];
}

}  // namespace obeskit::transport
