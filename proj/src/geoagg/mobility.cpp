#include <map>

#include "obeskit/geoagg.hpp"

namespace obeskit::geoagg {

MobilityGraph build_mobility_graph(const std::vector<VisitRef>& visits,
                                   const std::vector<TransitionRef>& transitions) {
    std::map<std::string, MobilityNode> nodes;
    for (const auto& v : visits) {
        MobilityNode& n = nodes[v.category];
        n.category = v.category;
        ++n.visits;
        n.dwell_min += static_cast<double>(v.depart - v.arrive) / kMsPerMinute;
    }

    struct EdgeAcc {
        std::size_t count = 0;
        double dist_sum = 0.0;
        std::size_t dist_n = 0;
        std::map<std::string, std::size_t> modes;
        std::size_t mode_n = 0;
    };
    std::map<std::pair<std::string, std::string>, EdgeAcc> edges;
    std::map<std::string, std::size_t> outgoing;
    for (const auto& t : transitions) {
        if (t.from_visit >= visits.size() || t.to_visit >= visits.size())
            throw InternalError("mobility transition references a visit that does not exist");
        const VisitRef& a = visits[t.from_visit];
        const VisitRef& b = visits[t.to_visit];
        EdgeAcc& e = edges[{a.category, b.category}];
        ++e.count;
        ++outgoing[a.category];
        if (a.center && b.center) {
            e.dist_sum += geo::haversine_m(*a.center, *b.center);
            ++e.dist_n;
        }
        if (!t.dominant_mode.empty()) {
            ++e.modes[t.dominant_mode];
            ++e.mode_n;
        }
    }

    MobilityGraph g;
    for (auto& [_, n] : nodes) g.nodes.push_back(std::move(n));
    for (const auto& [key, acc] : edges) {
        MobilityEdge e;
        e.from = key.first;
        e.to = key.second;
        e.count = acc.count;
        e.probability = static_cast<double>(acc.count) / static_cast<double>(outgoing[key.first]);
        e.mean_distance_m = acc.dist_n ? acc.dist_sum / static_cast<double>(acc.dist_n) : 0.0;
        for (const auto& [mode, cnt] : acc.modes)
            e.mode_share[mode] = static_cast<double>(cnt) / static_cast<double>(acc.mode_n);
        g.edges.push_back(std::move(e));
    }
    return g;
}

}  // namespace obeskit::geoagg
