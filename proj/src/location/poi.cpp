#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "obeskit/core/exec.hpp"
#include "obeskit/location.hpp"

namespace obeskit::location {

namespace {

double point_moveability(const std::vector<ingest::LocationSample>& trace, std::size_t i,
                         const PoiConfig& cfg) {
    const std::size_t half = static_cast<std::size_t>(std::max(1, cfg.move_window / 2));
    const std::size_t lo = i > half ? i - half : 0;
    const std::size_t hi = std::min(trace.size() - 1, i + half);
    if (hi <= lo) return 0.0;
    double dist = 0.0;
    for (std::size_t k = lo; k < hi; ++k)
        dist += geo::haversine_m(trace[k].lat, trace[k].lon, trace[k + 1].lat, trace[k + 1].lon);
    const double secs = static_cast<double>(trace[hi].t - trace[lo].t) / 1000.0;
    if (secs <= 0.0) return 0.0;
    return std::min(1.0, (dist / secs) / cfg.v_ref_ms);
}

std::vector<DensityPoint> density_impl(const std::vector<ingest::LocationSample>& trace,
                                       const PoiConfig& cfg, bool parallel) {
    const std::size_t n = trace.size();
    std::vector<DensityPoint> pts(n);
    auto fill_move = [&](std::size_t i) {
        pts[i].sample = trace[i];
        pts[i].moveability = point_moveability(trace, i, cfg);
    };
    auto fill_density = [&](std::size_t i) {
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (geo::haversine_m(trace[i].lat, trace[i].lon, trace[j].lat, trace[j].lon) <=
                cfg.eps_m)
                d += 1.0 - pts[j].moveability;
        }
        pts[i].density = d;
    };
    if (parallel) {
        exec::parallel_for(n, fill_move);
        exec::parallel_for(n, fill_density);
    } else {
        for (std::size_t i = 0; i < n; ++i) fill_move(i);
        for (std::size_t i = 0; i < n; ++i) fill_density(i);
    }
    return pts;
}

struct Visit {
    std::vector<std::size_t> members;  // trace indices, time-ordered
};

geo::LatLon centroid_of(const std::vector<ingest::LocationSample>& trace,
                        const std::vector<std::size_t>& members) {
    double lat = 0.0, lon = 0.0;
    for (std::size_t m : members) {
        lat += trace[m].lat;
        lon += trace[m].lon;
    }
    const double n = static_cast<double>(members.size());
    return {lat / n, lon / n};
}

}  // namespace

std::vector<DensityPoint> moveability_density(const std::vector<ingest::LocationSample>& trace,
                                              const PoiConfig& cfg) {
    return density_impl(trace, cfg, true);
}

std::vector<DensityPoint> moveability_density_serial(
    const std::vector<ingest::LocationSample>& trace, const PoiConfig& cfg) {
    return density_impl(trace, cfg, false);
}

std::vector<PointOfInterest> detect_pois(const ingest::SensorStream& trace, const PoiConfig& cfg) {
    if (trace.kind != ingest::StreamKind::location)
        throw DataError("detect_pois needs a location stream");
    const std::vector<ingest::LocationSample>& pts = trace.location;
    const std::size_t n = pts.size();
    if (n < static_cast<std::size_t>(cfg.min_pts)) return {};

    const std::vector<DensityPoint> dp = moveability_density(pts, cfg);

    // Density-based expansion: clusters grow from core points through
    // points within eps; processing in time order keeps cluster ids stable.
    std::vector<int> cluster(n, -1);
    std::vector<char> core(n, 0);
    for (std::size_t i = 0; i < n; ++i) core[i] = dp[i].density >= static_cast<double>(cfg.min_pts);
    int next_cluster = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!core[seed] || cluster[seed] >= 0) continue;
        const int cid = next_cluster++;
        std::deque<std::size_t> queue{seed};
        cluster[seed] = cid;
        while (!queue.empty()) {
            const std::size_t p = queue.front();
            queue.pop_front();
            if (!core[p]) continue;  // border points don't expand
            for (std::size_t q = 0; q < n; ++q) {
                if (cluster[q] >= 0) continue;
                if (geo::haversine_m(pts[p].lat, pts[p].lon, pts[q].lat, pts[q].lon) <= cfg.eps_m) {
                    cluster[q] = cid;
                    queue.push_back(q);
                }
            }
        }
    }

    const EpochMs split_ms = static_cast<EpochMs>(std::llround(cfg.split_gap_min * 60000.0));
    const EpochMs min_stay_ms = static_cast<EpochMs>(std::llround(cfg.min_stay_min * 60000.0));

    // One physical place, two separate stays: split each cluster's member
    // sequence wherever the in-cluster time gap exceeds the threshold.
    std::vector<Visit> visits;
    for (int cid = 0; cid < next_cluster; ++cid) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (cluster[i] == cid) members.push_back(i);
        Visit cur;
        for (std::size_t m : members) {
            if (!cur.members.empty() && pts[m].t - pts[cur.members.back()].t > split_ms) {
                visits.push_back(cur);
                cur.members.clear();
            }
            cur.members.push_back(m);
        }
        if (!cur.members.empty()) visits.push_back(cur);
    }

    std::vector<PointOfInterest> pois;
    for (Visit& v : visits) {
        // Trim members outside eps of the centroid until stable, so the
        // reported center honors the radius bound.
        geo::LatLon c = centroid_of(pts, v.members);
        for (int pass = 0; pass < 8; ++pass) {
            std::vector<std::size_t> kept;
            for (std::size_t m : v.members)
                if (geo::haversine_m(c.lat, c.lon, pts[m].lat, pts[m].lon) <= cfg.eps_m)
                    kept.push_back(m);
            if (kept.size() == v.members.size() || kept.empty()) break;
            v.members = std::move(kept);
            c = centroid_of(pts, v.members);
        }
        if (v.members.empty()) continue;
        const EpochMs arrive = pts[v.members.front()].t;
        const EpochMs depart = pts[v.members.back()].t;
        if (depart - arrive < min_stay_ms) continue;
        PointOfInterest poi;
        poi.center = c;
        poi.arrive_t = arrive;
        poi.depart_t = depart;
        poi.member_points = v.members.size();
        pois.push_back(std::move(poi));
    }

    // Visits of one subject cannot overlap in time; on conflict keep the
    // stay with more supporting points.
    std::sort(pois.begin(), pois.end(), [](const PointOfInterest& a, const PointOfInterest& b) {
        if (a.arrive_t != b.arrive_t) return a.arrive_t < b.arrive_t;
        return a.member_points > b.member_points;
    });
    std::vector<PointOfInterest> disjoint;
    for (PointOfInterest& p : pois) {
        if (!disjoint.empty() && p.arrive_t < disjoint.back().depart_t) {
            if (p.member_points > disjoint.back().member_points) disjoint.back() = std::move(p);
            continue;
        }
        disjoint.push_back(std::move(p));
    }

    for (std::size_t i = 0; i < disjoint.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "poi-%03zu", i);
        disjoint[i].poi_id = buf;
    }
    return disjoint;
}

}  // namespace obeskit::location
