#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "obeskit/core/dsp.hpp"
#include "obeskit/eval.hpp"

namespace obeskit::eval {

namespace {

const std::set<std::string>& known_labels() {
    static const std::set<std::string> labels = {"Recording Start", "Recording End", "In Bed",
                                                 "Sleep Start",     "Sleep End",     "Off Bed",
                                                 "No wear",         "Wear"};
    return labels;
}

long long minutes_between(EpochMs a, EpochMs b) {
    return std::llround(static_cast<double>(b - a) / kMsPerMinute);
}

AeStats ae_stats(const std::vector<double>& errors) {
    AeStats s;
    s.n = errors.size();
    if (errors.empty()) return s;
    s.mean = dsp::mean(errors);
    s.stddev = dsp::stddev(errors);
    s.max = *std::max_element(errors.begin(), errors.end());
    return s;
}

}  // namespace

std::vector<AnnotationEvent> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotation file: " + path);
    std::vector<AnnotationEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            AnnotationEvent e;
            e.t = j.at("t").get<EpochMs>();
            e.label = j.at("label").get<std::string>();
            events.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad annotation record: " +
                            ex.what());
        }
    }
    return events;
}

std::vector<sleep::SleepSession> sessions_from_annotations(
    const std::vector<AnnotationEvent>& events, double merge_gap_min) {
    std::vector<AnnotationEvent> ev = events;
    std::stable_sort(ev.begin(), ev.end(),
                     [](const AnnotationEvent& a, const AnnotationEvent& b) { return a.t < b.t; });

    std::vector<sleep::SleepSession> sessions;
    bool in_session = false;
    sleep::SleepSession cur;
    std::optional<EpochMs> pending_end;  // Sleep End seen, session may still continue

    auto close = [&](EpochMs se) {
        cur.SE = se;
        cur.GST_min = minutes_between(cur.SS, cur.SE);
        cur.NST_min = cur.GST_min - cur.TTI_min;
        sessions.push_back(cur);
        cur = {};
        in_session = false;
        pending_end.reset();
    };

    for (const auto& e : ev) {
        if (!known_labels().count(e.label))
            throw DataError("invalid annotation: unknown event label \"" + e.label + "\"");
        if (e.label == "Sleep Start") {
            if (in_session && !pending_end)
                throw DataError("invalid annotation: overlapping sleep sessions");
            if (in_session) {
                const double gap_min =
                    static_cast<double>(e.t - *pending_end) / kMsPerMinute;
                if (gap_min < merge_gap_min) {  // short awakening stays in-session
                    cur.TTI_min += minutes_between(*pending_end, e.t);
                    cur.NI += 1;
                    pending_end.reset();
                    continue;
                }
                close(*pending_end);
            }
            in_session = true;
            cur.SS = e.t;
        } else if (e.label == "Sleep End") {
            if (!in_session || pending_end)
                throw DataError("invalid annotation: sleep end without a matching start");
            pending_end = e.t;
        } else if (e.label == "Off Bed" || e.label == "Recording End" || e.label == "No wear") {
            if (in_session) {
                if (!pending_end)
                    throw DataError("invalid annotation: \"" + e.label +
                                    "\" while a sleep session is open");
                close(*pending_end);
            }
        }
        // Recording Start / In Bed / Wear carry no session boundary.
    }
    if (in_session) {
        if (!pending_end) throw DataError("invalid annotation: unterminated sleep session");
        close(*pending_end);
    }
    return sessions;
}

SleepEvalResult sleep_eval(const std::vector<std::vector<sleep::SleepSession>>& truth,
                           const std::vector<std::vector<sleep::SleepSession>>& predicted,
                           bool truth_has_interrupts) {
    if (truth.size() != predicted.size())
        throw DataError("sleep evaluation needs one prediction list per truth recording");
    if (truth.empty()) throw DataError("sleep evaluation needs at least one recording");

    SleepEvalResult r;
    r.n_recordings = truth.size();
    std::map<std::string, std::vector<double>> errs;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].size() != predicted[i].size()) continue;  // contributes 0 to CSS
        ++r.n_count_matched;
        for (std::size_t s = 0; s < truth[i].size(); ++s) {
            const auto& t = truth[i][s];
            const auto& p = predicted[i][s];
            errs["GST"].push_back(std::abs(static_cast<double>(t.GST_min - p.GST_min)));
            errs["SS"].push_back(std::abs(static_cast<double>(t.SS - p.SS)) / kMsPerMinute);
            errs["SE"].push_back(std::abs(static_cast<double>(t.SE - p.SE)) / kMsPerMinute);
            if (truth_has_interrupts) {
                errs["TTI"].push_back(std::abs(static_cast<double>(t.TTI_min - p.TTI_min)));
                errs["NI"].push_back(std::abs(static_cast<double>(t.NI - p.NI)));
                errs["NST"].push_back(std::abs(static_cast<double>(t.NST_min - p.NST_min)));
            }
        }
    }
    r.css = static_cast<double>(r.n_count_matched) / static_cast<double>(r.n_recordings);
    for (const auto& [name, v] : errs) r.ae[name] = ae_stats(v);
    return r;
}

}  // namespace obeskit::eval
