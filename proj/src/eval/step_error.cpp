#include <cmath>
#include <map>

#include "obeskit/core/dsp.hpp"
#include "obeskit/eval.hpp"

namespace obeskit::eval {

namespace {

StepGroupStats group_stats(const std::string& name, const std::vector<StepRecording>& recs) {
    StepGroupStats g;
    g.group = name;
    g.n = recs.size();
    std::vector<double> pred, abs_err, rel_err;
    for (const auto& r : recs) {
        pred.push_back(r.predicted);
        const double abs = std::abs(r.predicted - r.truth);
        abs_err.push_back(abs);
        if (r.truth != 0.0)
            rel_err.push_back(abs / r.truth * 100.0);
        else
            ++g.rel_excluded;
    }
    g.pred_mean = dsp::mean(pred);
    g.pred_std = dsp::stddev(pred);
    g.abs_mean = dsp::mean(abs_err);
    g.abs_std = dsp::stddev(abs_err);
    if (!rel_err.empty()) {
        g.rel_mean = dsp::mean(rel_err);
        g.rel_std = dsp::stddev(rel_err);
    }
    return g;
}

}  // namespace

std::vector<StepGroupStats> step_error(const std::vector<StepRecording>& recordings) {
    if (recordings.empty()) throw DataError("step evaluation needs at least one paired recording");
    std::map<std::string, std::vector<StepRecording>> groups;
    for (const auto& r : recordings) groups[r.group].push_back(r);

    std::vector<StepGroupStats> out;
    for (const auto& [name, recs] : groups) out.push_back(group_stats(name, recs));
    if (groups.size() > 1) out.push_back(group_stats("overall", recordings));
    return out;
}

}  // namespace obeskit::eval
