#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "obeskit/location.hpp"

namespace obeskit::location {

namespace {

// Dwell (ms) of [arrive, depart] inside the daily local window
// [win_start_h, win_end_h), optionally restricted to weekdays.
EpochMs window_dwell(const tz::Zone& zone, EpochMs arrive, EpochMs depart, int win_start_h,
                     int win_end_h, bool weekdays_only) {
    EpochMs total = 0;
    EpochMs day = zone.local_day_start(arrive);
    // Walk local days until past the departure.
    while (day < depart) {
        const tz::LocalTime lt = zone.local(day + 6 * kMsPerHour);  // mid-morning probe
        const bool weekday = lt.weekday >= 1 && lt.weekday <= 5;
        if (!weekdays_only || weekday) {
            const EpochMs w0 = day + static_cast<EpochMs>(win_start_h) * kMsPerHour;
            const EpochMs w1 = day + static_cast<EpochMs>(win_end_h) * kMsPerHour;
            const EpochMs lo = std::max(arrive, w0);
            const EpochMs hi = std::min(depart, w1);
            if (hi > lo) total += hi - lo;
        }
        const EpochMs next = zone.local_day_start(day + 26 * kMsPerHour);
        if (next <= day) break;  // defensive: never loop on a broken zone
        day = next;
    }
    return total;
}

}  // namespace

HomeSchoolResult label_home_school(std::vector<PointOfInterest>& pois, const tz::Zone& zone,
                                   const PoiConfig& poi_cfg, const HomeSchoolConfig& cfg) {
    HomeSchoolResult res;
    if (pois.empty()) {
        res.reason = "no detected places";
        return res;
    }
    for (const PointOfInterest& p : pois)
        if (!p.center) throw InternalError("label_home_school requires centers (pre-redaction)");

    EpochMs first = pois.front().arrive_t, last = pois.front().depart_t;
    for (const PointOfInterest& p : pois) {
        first = std::min(first, p.arrive_t);
        last = std::max(last, p.depart_t);
    }
    const double span_days = static_cast<double>(last - first) / static_cast<double>(kMsPerDay);
    if (span_days < cfg.min_history_days) {
        res.reason = "history spans fewer days than required";
        return res;
    }

    // Union visits of the same physical place: centers within eps join.
    const std::size_t n = pois.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (geo::haversine_m(pois[i].center->lat, pois[i].center->lon, pois[j].center->lat,
                                 pois[j].center->lon) <= poi_cfg.eps_m)
                parent[find(i)] = find(j);
        }

    struct PlaceScore {
        EpochMs night = 0, school = 0, first_arrive = 0;
        std::vector<std::size_t> members;
    };
    std::map<std::size_t, PlaceScore> places;
    for (std::size_t i = 0; i < n; ++i) {
        PlaceScore& ps = places[find(i)];
        if (ps.members.empty()) ps.first_arrive = pois[i].arrive_t;
        ps.first_arrive = std::min(ps.first_arrive, pois[i].arrive_t);
        ps.members.push_back(i);
        ps.night += window_dwell(zone, pois[i].arrive_t, pois[i].depart_t, cfg.night_start_h,
                                 cfg.night_end_h, false);
        ps.school += window_dwell(zone, pois[i].arrive_t, pois[i].depart_t, cfg.school_start_h,
                                  cfg.school_end_h, true);
    }

    // Max dwell wins; ties resolve to the earlier-established place.
    const PlaceScore* home = nullptr;
    std::size_t home_root = 0;
    for (const auto& [root, ps] : places) {
        if (ps.night <= 0) continue;
        if (!home || ps.night > home->night ||
            (ps.night == home->night && ps.first_arrive < home->first_arrive)) {
            home = &ps;
            home_root = root;
        }
    }
    const PlaceScore* school = nullptr;
    for (const auto& [root, ps] : places) {
        if (home && root == home_root) continue;
        if (ps.school <= 0) continue;
        if (!school || ps.school > school->school ||
            (ps.school == school->school && ps.first_arrive < school->first_arrive))
            school = &ps;
    }

    if (home) {
        for (std::size_t i : home->members) pois[i].category = Category::home;
        res.home_index = home->members.front();
    }
    if (school) {
        for (std::size_t i : school->members) pois[i].category = Category::school;
        res.school_index = school->members.front();
    }
    res.labeled = home || school;
    if (!res.labeled) res.reason = "no place accumulated dwell in the scoring windows";
    else if (!school) res.reason = "school withheld: no weekday-daytime evidence";
    return res;
}

}  // namespace obeskit::location
