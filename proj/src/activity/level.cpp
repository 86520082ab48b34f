#include "obeskit/activity.hpp"

namespace obeskit::activity {

std::string to_string(Level l) {
    switch (l) {
        case Level::sedentary: return "sedentary";
        case Level::moderate: return "moderate";
        case Level::vigorous: return "vigorous";
        default: return "very_vigorous";
    }
}

Level classify_level(double counts, const CutPoints& cp) {
    if (counts < 0.0) throw DataError("negative activity counts");
    if (!(cp.c1 < cp.c2 && cp.c2 < cp.c3))
        throw ConfigError("activity cut points must be strictly increasing");
    // A boundary value belongs to the higher level.
    if (counts >= cp.c3) return Level::very_vigorous;
    if (counts >= cp.c2) return Level::vigorous;
    if (counts >= cp.c1) return Level::moderate;
    return Level::sedentary;
}

std::vector<ActivityLevel> classify_levels(const std::vector<ActivityCounts>& counts,
                                           const CutPoints& cp) {
    std::vector<ActivityLevel> out;
    out.reserve(counts.size());
    for (const ActivityCounts& c : counts) out.push_back({c.minute_start, classify_level(c.counts, cp)});
    return out;
}

}  // namespace obeskit::activity
