#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "obeskit/sim.hpp"

namespace obeskit::sim {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::set<std::string>& block_kinds() {
    static const std::set<std::string> kinds = {"still", "lay",   "stand", "walk",  "run", "cycle",
                                               "stairs", "shake", "sleep", "dwell", "travel"};
    return kinds;
}

const std::set<std::string>& travel_modes() {
    static const std::set<std::string> modes = {"walk_run", "bike", "car", "bus", "train_subway"};
    return modes;
}

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key \"" + key + "\" in " + where);
}

double cadence_default(const std::string& kind) {
    if (kind == "walk") return 1.9;
    if (kind == "run") return 2.6;
    if (kind == "cycle") return 1.2;
    if (kind == "stairs") return 1.5;
    return 0.0;
}

double amp_default(const std::string& kind) {
    if (kind == "walk") return 2.5;
    if (kind == "run") return 7.0;
    if (kind == "cycle") return 1.5;
    if (kind == "stairs") return 3.0;
    return 0.0;
}

bool counts_steps(const Block& b) {
    return b.kind == "walk" || b.kind == "run" || b.kind == "stairs" ||
           (b.kind == "travel" && b.mode == "walk_run");
}

double step_cadence(const Block& b) {
    if (b.kind == "travel") return 1.9;  // gait texture of the walking mode
    return b.cadence_hz;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Interval with an extra movement texture layered on the base signal.
struct Burst {
    double t0 = 0.0, t1 = 0.0;  // seconds from block start
    double amp = 0.0;
    double fx = 1.0, fy = 1.0, fz = 1.0;  // direction scaling
};

struct BlockPlan {
    const Block* block = nullptr;
    EpochMs t0 = 0, t1 = 0;
    geo::LatLon entry{0.0, 0.0};
    std::vector<Burst> bursts;  // shake jolts, bus jolts, sleep movement
};

std::vector<Burst> plan_shake(std::mt19937_64& rng, double dur_s) {
    std::uniform_real_distribution<double> gap(0.2, 1.5), jolt_dur(0.05, 0.15), jolt_amp(3.0, 8.0),
        dir(-1.0, 1.0);
    std::vector<Burst> out;
    double t = gap(rng);
    while (t < dur_s) {
        Burst b;
        b.t0 = t;
        b.t1 = std::min(dur_s, t + jolt_dur(rng));
        b.amp = jolt_amp(rng);
        b.fx = dir(rng);
        b.fy = dir(rng);
        b.fz = dir(rng);
        const double norm = std::sqrt(b.fx * b.fx + b.fy * b.fy + b.fz * b.fz);
        if (norm > 1e-9) {
            b.fx /= norm;
            b.fy /= norm;
            b.fz /= norm;
        } else {
            b.fz = 1.0;
        }
        out.push_back(b);
        t = b.t1 + gap(rng);
    }
    return out;
}

std::vector<Burst> plan_bus_jolts(std::mt19937_64& rng, double dur_s) {
    std::uniform_real_distribution<double> gap(20.0, 40.0);
    std::vector<Burst> out;
    double t = gap(rng);
    while (t + 2.0 < dur_s) {
        out.push_back({t, t + 2.0, 1.0, 0.6, 0.2, 1.0});
        t += 2.0 + gap(rng);
    }
    return out;
}

// Restless movement inside [lo, hi): short bursts, enough to keep the
// per-minute counts clearly above the asleep level.
void plan_restless(std::mt19937_64& rng, double lo, double hi, std::vector<Burst>& out) {
    std::uniform_real_distribution<double> gap(8.0, 20.0), dur(1.0, 3.0);
    double t = lo;
    while (t < hi) {
        const double end = std::min(hi, t + dur(rng));
        out.push_back({t, end, 1.0, 1.0, 0.6, 0.5});
        t = end + gap(rng);
    }
}

std::vector<Burst> plan_sleep(std::mt19937_64& rng, const Block& b) {
    std::vector<Burst> out;
    const double dur_s = b.duration_s;
    const double lat_s = b.sleep_latency_min * 60.0;
    const double wake_s = b.wake_latency_min * 60.0;
    plan_restless(rng, 0.0, lat_s, out);
    for (const auto& itr : b.interrupts)
        out.push_back({itr.offset_min * 60.0, (itr.offset_min + itr.dur_min) * 60.0, 1.2, 1.0, 0.7,
                       0.6});
    plan_restless(rng, dur_s - wake_s, dur_s, out);
    std::sort(out.begin(), out.end(), [](const Burst& a, const Burst& c) { return a.t0 < c.t0; });
    return out;
}

struct Sample {
    double x = 0.0, y = 0.0, z = 0.0;
};

Sample texture(const Block& b, double t, std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    auto noise = [&](double sigma) { return sigma * n01(rng); };
    const double g = kGravityMs2;
    const double f = b.cadence_hz;
    const double a = b.amp_ms2;
    Sample s;
    const std::string& kind = b.kind == "travel" ? b.mode : b.kind;
    if (kind == "still") {
        s = {noise(0.02), noise(0.02), g + noise(0.02)};
    } else if (kind == "lay") {
        s = {g + noise(0.03), noise(0.03), noise(0.03)};
    } else if (kind == "stand" || kind == "dwell") {
        s = {noise(0.05), noise(0.05),
             g + 0.05 * std::sin(2.0 * kPi * 0.3 * t) + noise(0.05)};
    } else if (kind == "walk" || kind == "walk_run") {
        const double wf = kind == "walk_run" ? 1.9 : f;
        const double wa = kind == "walk_run" ? 2.5 : a;
        s = {0.35 * wa * std::sin(2.0 * kPi * wf * t + 1.1) + noise(0.12),
             0.18 * wa * std::sin(kPi * wf * t) + noise(0.12),
             g + wa * std::sin(2.0 * kPi * wf * t) + noise(0.15)};
    } else if (kind == "run") {
        s = {0.4 * a * std::sin(2.0 * kPi * f * t + 1.2) + noise(0.2),
             0.2 * a * std::sin(kPi * f * t) + noise(0.2),
             g + a * std::sin(2.0 * kPi * f * t) + 0.25 * a * std::sin(4.0 * kPi * f * t + 0.6) +
                 noise(0.3)};
    } else if (kind == "cycle") {
        s = {noise(0.15), a * std::sin(2.0 * kPi * f * t) + noise(0.15),
             g + 0.25 * std::sin(2.0 * kPi * 0.25 * t) + noise(0.18)};
    } else if (kind == "stairs") {
        s = {0.4 * a * std::sin(2.0 * kPi * f * t + 0.9) + noise(0.15), noise(0.15),
             g + a * std::sin(2.0 * kPi * f * t) + 0.5 * a * std::sin(kPi * f * t + 0.4) +
                 noise(0.2)};
    } else if (kind == "shake") {
        s = {noise(0.02), noise(0.02), g + noise(0.02)};  // jolts layered by bursts
    } else if (kind == "sleep") {
        s = {g + noise(0.01), noise(0.01), noise(0.01)};
    } else if (kind == "bike") {
        s = {noise(0.3), 1.2 * std::sin(2.0 * kPi * 2.5 * t) + noise(0.3),
             g + 0.3 * std::sin(2.0 * kPi * 0.3 * t) + noise(0.3)};
    } else if (kind == "car" || kind == "bus") {
        s = {0.3 * std::sin(2.0 * kPi * 0.5 * t + 1.0) + noise(0.15), noise(0.15),
             g + 0.4 * std::sin(2.0 * kPi * 0.7 * t) + noise(0.15)};
    } else if (kind == "train_subway") {
        s = {0.2 * std::sin(2.0 * kPi * 0.3 * t + 0.7) + noise(0.1), noise(0.1),
             g + 0.3 * std::sin(2.0 * kPi * 0.3 * t) + noise(0.1)};
    } else {
        throw InternalError("no texture for block kind " + kind);
    }
    return s;
}

void apply_burst(Sample& s, const Burst& b, double t, std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    const double wiggle = std::sin(2.0 * kPi * 1.3 * t);
    s.x += b.amp * (b.fx * wiggle + 0.25 * n01(rng));
    s.y += b.amp * (b.fy * wiggle + 0.25 * n01(rng));
    s.z += b.amp * (b.fz * wiggle + 0.25 * n01(rng));
}

void validate_block(const Block& b, std::size_t idx) {
    const std::string where = "blocks[" + std::to_string(idx) + "]";
    if (!block_kinds().count(b.kind))
        throw ConfigError(where + ": unknown block kind \"" + b.kind + "\"");
    if (!(b.duration_s > 0.0))
        throw ConfigError(where + ": duration_s must be positive");
    if (b.kind == "travel") {
        if (!travel_modes().count(b.mode))
            throw ConfigError(where + ": travel needs a mode out of walk_run|bike|car|bus|"
                                      "train_subway");
        if (!geo::valid_lat(b.lat) || !geo::valid_lon(b.lon))
            throw ConfigError(where + ": travel destination out of range");
    }
    if (b.kind == "dwell" && (!geo::valid_lat(b.lat) || !geo::valid_lon(b.lon)))
        throw ConfigError(where + ": dwell center out of range");
    if (b.kind == "sleep") {
        const double dur_min = b.duration_s / 60.0;
        if (b.sleep_latency_min < 0.0 || b.wake_latency_min < 0.0 ||
            b.sleep_latency_min + b.wake_latency_min >= dur_min)
            throw ConfigError(where + ": sleep latencies exceed the block duration");
        double prev_end = b.sleep_latency_min;
        for (const auto& itr : b.interrupts) {
            if (itr.dur_min <= 0.0)
                throw ConfigError(where + ": interrupt duration must be positive");
            if (itr.offset_min < prev_end)
                throw ConfigError(where + ": overlapping or unsorted sleep interrupts");
            if (itr.offset_min + itr.dur_min > dur_min - b.wake_latency_min)
                throw ConfigError(where + ": interrupt extends past the sleep window");
            prev_end = itr.offset_min + itr.dur_min;
        }
    }
}

}  // namespace

Scenario scenario_from_json(const json& j) {
    require_keys(j, {"seed", "accel_rate_hz", "location_interval_s", "subjects"}, "scenario");
    Scenario sc;
    sc.seed = j.value("seed", std::uint64_t{1});
    sc.accel_rate_hz = j.value("accel_rate_hz", 20.0);
    sc.location_interval_s = j.value("location_interval_s", 30.0);
    if (!(sc.accel_rate_hz > 0.0) || !(sc.location_interval_s > 0.0))
        throw ConfigError("scenario rates must be positive");
    if (!j.contains("subjects") || !j.at("subjects").is_array() || j.at("subjects").empty())
        throw ConfigError("scenario needs a non-empty subjects array");

    std::set<std::string> ids;
    for (const auto& js : j.at("subjects")) {
        require_keys(js,
                     {"subject_id", "device", "tz", "start_ms", "start_lat", "start_lon", "blocks"},
                     "subject");
        SubjectScenario sub;
        sub.subject_id = js.value("subject_id", "");
        if (sub.subject_id.empty()) throw ConfigError("subject without subject_id");
        if (!ids.insert(sub.subject_id).second)
            throw ConfigError("duplicate subject_id " + sub.subject_id);
        sub.device = js.value("device", "smartphone");
        ingest::device_profile_from_string(sub.device);  // validates
        sub.tz = js.value("tz", "UTC");
        sub.start_t = js.value("start_ms", EpochMs{0});
        sub.start_lat = js.value("start_lat", 0.0);
        sub.start_lon = js.value("start_lon", 0.0);
        if (!geo::valid_lat(sub.start_lat) || !geo::valid_lon(sub.start_lon))
            throw ConfigError("subject " + sub.subject_id + ": start position out of range");
        if (!js.contains("blocks") || !js.at("blocks").is_array() || js.at("blocks").empty())
            throw ConfigError("subject " + sub.subject_id + " needs a non-empty blocks array");
        for (const auto& jb : js.at("blocks")) {
            require_keys(jb,
                         {"kind", "duration_s", "cadence_hz", "amp_ms2", "mode", "lat", "lon",
                          "place_id", "sleep_latency_min", "wake_latency_min", "interrupts"},
                         "block");
            Block b;
            b.kind = jb.value("kind", "");
            b.duration_s = jb.value("duration_s", 0.0);
            b.cadence_hz = jb.value("cadence_hz", 0.0);
            b.amp_ms2 = jb.value("amp_ms2", 0.0);
            b.mode = jb.value("mode", "");
            b.lat = jb.value("lat", 0.0);
            b.lon = jb.value("lon", 0.0);
            b.place_id = jb.value("place_id", "");
            b.sleep_latency_min = jb.value("sleep_latency_min", 5.0);
            b.wake_latency_min = jb.value("wake_latency_min", 5.0);
            if (jb.contains("interrupts"))
                for (const auto& ji : jb.at("interrupts")) {
                    require_keys(ji, {"offset_min", "dur_min"}, "interrupt");
                    b.interrupts.push_back(
                        {ji.value("offset_min", 0.0), ji.value("dur_min", 0.0)});
                }
            if (b.cadence_hz <= 0.0) b.cadence_hz = cadence_default(b.kind);
            if (b.amp_ms2 <= 0.0) b.amp_ms2 = amp_default(b.kind);
            validate_block(b, sub.blocks.size());
            sub.blocks.push_back(std::move(b));
        }
        sc.subjects.push_back(std::move(sub));
    }
    return sc;
}

SubjectTruth simulate_subject(const Scenario& sc, std::size_t subject_index,
                              ingest::SensorStream& accel_out, ingest::SensorStream& loc_out) {
    if (subject_index >= sc.subjects.size())
        throw InternalError("simulate_subject: subject index out of range");
    const SubjectScenario& sub = sc.subjects[subject_index];
    std::mt19937_64 rng(splitmix64(sc.seed) ^ splitmix64(0x5eed0000ULL + subject_index));

    // Realize the timeline: block boundaries, entry positions, burst plans.
    std::vector<BlockPlan> plans;
    SubjectTruth truth;
    truth.subject_id = sub.subject_id;
    EpochMs t = sub.start_t;
    geo::LatLon pos{sub.start_lat, sub.start_lon};
    truth.sleep_events.push_back({t, "Recording Start"});
    for (std::size_t i = 0; i < sub.blocks.size(); ++i) {
        const Block& b = sub.blocks[i];
        BlockPlan plan;
        plan.block = &b;
        plan.t0 = t;
        plan.t1 = t + static_cast<EpochMs>(std::llround(b.duration_s * 1000.0));
        plan.entry = pos;
        if (b.kind == "shake") plan.bursts = plan_shake(rng, b.duration_s);
        if (b.kind == "travel" && b.mode == "bus") plan.bursts = plan_bus_jolts(rng, b.duration_s);
        if (b.kind == "sleep") plan.bursts = plan_sleep(rng, b);

        RealizedBlock rb;
        rb.kind = b.kind;
        rb.t0 = plan.t0;
        rb.t1 = plan.t1;
        rb.mode = b.mode;
        if (b.kind == "dwell") {
            rb.place_id = b.place_id.empty() ? "place-" + std::to_string(i) : b.place_id;
            rb.lat = b.lat;
            rb.lon = b.lon;
            pos = {b.lat, b.lon};
        } else if (b.kind == "travel") {
            rb.lat = b.lat;
            rb.lon = b.lon;
            pos = {b.lat, b.lon};
        }
        if (counts_steps(b)) {
            rb.steps = std::llround(step_cadence(b) * b.duration_s);
            truth.total_steps += rb.steps;
        }
        if (b.kind == "sleep") {
            const EpochMs min_ms = kMsPerMinute;
            truth.sleep_events.push_back({plan.t0, "In Bed"});
            truth.sleep_events.push_back(
                {plan.t0 + static_cast<EpochMs>(std::llround(b.sleep_latency_min * min_ms)),
                 "Sleep Start"});
            for (const auto& itr : b.interrupts) {
                const EpochMs i0 =
                    plan.t0 + static_cast<EpochMs>(std::llround(itr.offset_min * min_ms));
                const EpochMs i1 =
                    i0 + static_cast<EpochMs>(std::llround(itr.dur_min * min_ms));
                truth.sleep_events.push_back({i0, "Sleep End"});
                truth.sleep_events.push_back({i1, "Sleep Start"});
            }
            truth.sleep_events.push_back(
                {plan.t1 - static_cast<EpochMs>(std::llround(b.wake_latency_min * min_ms)),
                 "Sleep End"});
            truth.sleep_events.push_back({plan.t1, "Off Bed"});
        }
        truth.blocks.push_back(std::move(rb));
        plans.push_back(std::move(plan));
        t = plan.t1;
    }
    const EpochMs end_t = t;
    truth.sleep_events.push_back({end_t, "Recording End"});

    // Accelerometer stream on a uniform grid across the whole timeline.
    accel_out = {};
    accel_out.subject_id = sub.subject_id;
    accel_out.device_profile = ingest::device_profile_from_string(sub.device);
    accel_out.kind = ingest::StreamKind::accel;
    accel_out.tz = sub.tz;
    accel_out.nominal_rate_hz = sc.accel_rate_hz;
    std::size_t plan_i = 0, burst_i = 0;
    for (std::size_t k = 0;; ++k) {
        const EpochMs tk =
            sub.start_t + static_cast<EpochMs>(std::llround(k * 1000.0 / sc.accel_rate_hz));
        if (tk >= end_t) break;
        while (tk >= plans[plan_i].t1) {
            ++plan_i;
            burst_i = 0;
        }
        const BlockPlan& plan = plans[plan_i];
        const double t_rel = static_cast<double>(tk - plan.t0) / 1000.0;
        Sample s = texture(*plan.block, t_rel, rng);
        while (burst_i < plan.bursts.size() && plan.bursts[burst_i].t1 <= t_rel) ++burst_i;
        if (burst_i < plan.bursts.size() && plan.bursts[burst_i].t0 <= t_rel)
            apply_burst(s, plan.bursts[burst_i], t_rel, rng);
        accel_out.accel.push_back({tk, s.x, s.y, s.z});
    }

    // Location fixes: dwell pins to the center, travel interpolates to the
    // destination, everything else holds the last position.
    loc_out = {};
    loc_out.subject_id = sub.subject_id;
    loc_out.device_profile = accel_out.device_profile;
    loc_out.kind = ingest::StreamKind::location;
    loc_out.tz = sub.tz;
    std::normal_distribution<double> jitter_m(0.0, 3.0);
    std::uniform_real_distribution<double> acc_m(4.0, 12.0);
    plan_i = 0;
    for (std::size_t k = 0;; ++k) {
        const EpochMs tk = sub.start_t +
                           static_cast<EpochMs>(std::llround(k * sc.location_interval_s * 1000.0));
        if (tk >= end_t) break;
        while (tk >= plans[plan_i].t1) ++plan_i;
        const BlockPlan& plan = plans[plan_i];
        const Block& b = *plan.block;
        geo::LatLon p = plan.entry;
        if (b.kind == "dwell") {
            p = {b.lat, b.lon};
        } else if (b.kind == "travel") {
            const double frac = static_cast<double>(tk - plan.t0) /
                                static_cast<double>(plan.t1 - plan.t0);
            p = {plan.entry.lat + frac * (b.lat - plan.entry.lat),
                 plan.entry.lon + frac * (b.lon - plan.entry.lon)};
        }
        const double mlat = jitter_m(rng), mlon = jitter_m(rng);
        p.lat += mlat / 111320.0;
        p.lon += mlon / (111320.0 * std::max(0.1, std::cos(p.lat * kPi / 180.0)));
        loc_out.location.push_back({tk, p.lat, p.lon, acc_m(rng)});
    }
    loc_out.nominal_rate_hz = 1.0 / sc.location_interval_s;
    return truth;
}

void write_truth_json(const SubjectTruth& truth, const std::string& path) {
    json jb = json::array();
    for (const auto& b : truth.blocks) {
        json j{{"kind", b.kind}, {"t0", b.t0}, {"t1", b.t1}, {"steps", b.steps}};
        if (!b.mode.empty()) j["mode"] = b.mode;
        if (!b.place_id.empty()) j["place_id"] = b.place_id;
        if (b.kind == "dwell" || b.kind == "travel") {
            j["lat"] = b.lat;
            j["lon"] = b.lon;
        }
        jb.push_back(std::move(j));
    }
    json je = json::array();
    for (const auto& e : truth.sleep_events) je.push_back(json{{"t", e.t}, {"label", e.label}});
    json out{{"format_version", 1},
             {"subject_id", truth.subject_id},
             {"total_steps", truth.total_steps},
             {"blocks", jb},
             {"sleep_events", je}};
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write truth file: " + path);
    f << out.dump(2) << "\n";
}

SubjectTruth load_truth_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open truth file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw DataError(path + ": bad truth file: " + e.what());
    }
    SubjectTruth truth;
    truth.subject_id = j.value("subject_id", "");
    truth.total_steps = j.value("total_steps", 0LL);
    for (const auto& jb : j.value("blocks", json::array())) {
        RealizedBlock b;
        b.kind = jb.value("kind", "");
        b.t0 = jb.value("t0", EpochMs{0});
        b.t1 = jb.value("t1", EpochMs{0});
        b.steps = jb.value("steps", 0LL);
        b.mode = jb.value("mode", "");
        b.place_id = jb.value("place_id", "");
        b.lat = jb.value("lat", 0.0);
        b.lon = jb.value("lon", 0.0);
        truth.blocks.push_back(std::move(b));
    }
    for (const auto& je : j.value("sleep_events", json::array()))
        truth.sleep_events.push_back({je.value("t", EpochMs{0}), je.value("label", "")});
    return truth;
}

void write_annotations(const std::vector<eval::AnnotationEvent>& events, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write annotation file: " + path);
    for (const auto& e : events)
        f << json{{"t", e.t}, {"label", e.label}}.dump() << "\n";
}

}  // namespace obeskit::sim
