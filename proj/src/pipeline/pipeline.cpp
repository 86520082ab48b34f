#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "obeskit/activity.hpp"
#include "obeskit/core/digest.hpp"
#include "obeskit/core/exec.hpp"
#include "obeskit/core/timezone.hpp"
#include "obeskit/eval.hpp"
#include "obeskit/geoagg.hpp"
#include "obeskit/ingest.hpp"
#include "obeskit/location.hpp"
#include "obeskit/pipeline.hpp"
#include "obeskit/sim.hpp"
#include "obeskit/sleep.hpp"
#include "obeskit/transport.hpp"

namespace obeskit::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------- artifact plumbing ----------

void write_text(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    out << content;
}

void write_json_file(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open " + p.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw DataError(p.string() + ": invalid JSON: " + e.what());
    }
}

void write_manifest(const fs::path& stage_dir, const std::string& stage, const Config& cfg,
                    const std::vector<std::string>& subjects) {
    json j{{"format_version", 1},
           {"stage", stage},
           {"config_hash", cfg.hash},
           {"subjects", subjects}};
    write_json_file(stage_dir / "manifest.json", j);
}

std::vector<std::string> read_manifest_subjects(const fs::path& stage_dir,
                                                const std::string& stage) {
    const fs::path p = stage_dir / "manifest.json";
    if (!fs::exists(p))
        throw DataError("missing " + p.string() + "; run the " + stage + " stage first");
    const json j = read_json_file(p);
    if (j.value("stage", "") != stage)
        throw DataError(p.string() + " was not written by the " + stage + " stage");
    std::vector<std::string> subjects = j.value("subjects", std::vector<std::string>{});
    if (subjects.empty()) throw DataError(p.string() + " lists no subjects");
    return subjects;
}

// Per-subject fan-out that forwards the first worker exception.
template <typename Fn>
void for_each_index(std::size_t n, Fn&& fn) {
    std::vector<std::exception_ptr> errs(n);
    exec::parallel_for(n, [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errs[i] = std::current_exception();
        }
    });
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

std::string csv_head(const Config& cfg) { return "# config_hash=" + cfg.hash + "\n"; }

struct MinuteRow {
    EpochMs t = 0;
    double v = 0.0;
};

std::vector<MinuteRow> read_minute_csv(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open " + p.string());
    std::vector<MinuteRow> rows;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError(p.string() + ":" + std::to_string(line_no) + ": expected two columns");
        try {
            rows.push_back({std::stoll(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw DataError(p.string() + ":" + std::to_string(line_no) + ": bad number");
        }
    }
    return rows;
}

// ---------- config → module parameter structs ----------

activity::CountsConfig counts_config(const Config& cfg) {
    const json& a = cfg.doc.at("activity");
    activity::CountsConfig c;
    c.band_lo_hz = a.at("band_lo_hz").get<double>();
    c.band_hi_hz = a.at("band_hi_hz").get<double>();
    c.filter_order = a.at("filter_order").get<int>();
    return c;
}

activity::StepConfig step_config(const Config& cfg) {
    const json& a = cfg.doc.at("activity");
    const json& s = a.at("steps");
    activity::StepConfig c;
    c.band_lo_hz = a.at("band_lo_hz").get<double>();
    c.band_hi_hz = a.at("band_hi_hz").get<double>();
    c.filter_order = a.at("filter_order").get<int>();
    c.context_s = s.at("context_s").get<double>();
    c.mult_phone = s.at("mult_phone").get<double>();
    c.mult_watch = s.at("mult_watch").get<double>();
    c.min_peak_dist_s = s.at("min_peak_dist_s").get<double>();
    c.min_peak_amp = s.at("min_peak_amp").get<double>();
    c.max_period_s = s.at("max_period_s").get<double>();
    c.period_dev = s.at("period_dev").get<double>();
    c.min_bout_peaks = s.at("min_bout_peaks").get<int>();
    c.autocorr_min = s.at("autocorr_min").get<double>();
    return c;
}

activity::CutPoints cut_points(const Config& cfg) {
    const json& c = cfg.doc.at("activity").at("cut_points");
    return {c.at("c1").get<double>(), c.at("c2").get<double>(), c.at("c3").get<double>()};
}

location::PoiConfig poi_config(const Config& cfg) {
    const json& l = cfg.doc.at("location");
    location::PoiConfig c;
    c.eps_m = l.at("eps_m").get<double>();
    c.min_pts = l.at("min_pts").get<int>();
    c.min_stay_min = l.at("min_stay_min").get<double>();
    c.split_gap_min = l.at("split_gap_min").get<double>();
    c.v_ref_ms = l.at("v_ref_ms").get<double>();
    c.move_window = l.at("move_window").get<int>();
    return c;
}

transport::TripConfig trip_config(const Config& cfg) {
    const json& t = cfg.doc.at("transport");
    return {t.at("min_trip_s").get<double>(), t.at("min_coverage").get<double>()};
}

sleep::SleepConfig sleep_config(const Config& cfg) {
    const json& s = cfg.doc.at("sleep");
    sleep::SleepConfig c;
    c.scorer = sleep::scorer_from_string(s.at("scorer").get<std::string>());
    c.count_scale = s.at("count_scale").get<double>();
    c.merge_gap_min = s.at("merge_gap_min").get<double>();
    c.min_session_min = s.at("min_session_min").get<double>();
    c.nonwear_zero_min = s.at("nonwear_zero_min").get<double>();
    return c;
}

models::SvmConfig svm_config(const Config& cfg) {
    const json& m = cfg.doc.at("models");
    models::SvmConfig c;
    c.kernel = models::kernel_from_string(m.at("kernel").get<std::string>());
    c.C = m.at("C").get<double>();
    c.gamma = m.at("gamma").get<double>();
    return c;
}

double target_hz(const Config& cfg) { return cfg.doc.at("ingest").at("target_hz").get<double>(); }
double accel_gap_s(const Config& cfg) {
    return cfg.doc.at("ingest").at("accel_gap_s").get<double>();
}
double location_gap_s(const Config& cfg) {
    return cfg.doc.at("ingest").at("location_gap_s").get<double>();
}

tz::Zone zone_for(const Config& cfg, const ingest::SensorStream& s) {
    const std::string name =
        s.tz.empty() ? cfg.doc.at("timezone").get<std::string>() : s.tz;
    return tz::Zone::load(name);
}

// inputs.sim_dir, falling back to this run's own simulate output.
fs::path sim_dir(const Config& cfg, bool required) {
    std::string dir = cfg.doc.at("inputs").at("sim_dir").get<std::string>();
    if (dir.empty()) {
        const fs::path own = fs::path(cfg.out_dir()) / "sim";
        if (fs::exists(own / "manifest.json")) return own;
        if (required)
            throw DataError("no synthetic input: set inputs.sim_dir or run simulate first");
        return {};
    }
    return dir;
}

// ---------- simulate ----------

void stage_simulate(const Config& cfg) {
    const json& jsc = cfg.doc.at("scenario");
    if (!jsc.is_object() || jsc.empty())
        throw ConfigError("simulate needs a scenario section in the config");
    sim::Scenario sc = sim::scenario_from_json(jsc);
    sc.seed = cfg.seed();  // the run seed governs generation

    const fs::path root = fs::path(cfg.out_dir()) / "sim";
    std::vector<std::string> subjects(sc.subjects.size());
    for_each_index(sc.subjects.size(), [&](std::size_t i) {
        ingest::SensorStream accel, loc;
        const sim::SubjectTruth truth = sim::simulate_subject(sc, i, accel, loc);
        const fs::path dir = root / truth.subject_id;
        fs::create_directories(dir);
        ingest::write_stream_jsonl(accel, (dir / "accel.jsonl").string());
        ingest::write_stream_jsonl(loc, (dir / "location.jsonl").string());
        sim::write_truth_json(truth, (dir / "truth.json").string());
        sim::write_annotations(truth.sleep_events, (dir / "sleep_annotations.jsonl").string());
        subjects[i] = truth.subject_id;
    });
    write_manifest(root, "simulate", cfg, subjects);
}

// ---------- ingest ----------

void stage_ingest(const Config& cfg) {
    const json& inputs = cfg.doc.at("inputs");
    struct Source {
        std::string subject;
        std::string accel_path, loc_path;
    };
    std::vector<Source> sources;

    const fs::path sdir = sim_dir(cfg, inputs.at("accel").empty());
    if (!sdir.empty() && fs::exists(sdir / "manifest.json")) {
        const json m = read_json_file(sdir / "manifest.json");
        for (const auto& id : m.value("subjects", std::vector<std::string>{}))
            sources.push_back({id, (sdir / id / "accel.jsonl").string(),
                               (sdir / id / "location.jsonl").string()});
    }
    // Explicit stream files: subject identity comes from each file's metadata.
    std::map<std::string, Source> by_subject;
    auto add_explicit = [&](const std::string& path, bool is_accel) {
        ingest::SensorStream probe = ingest::parse_stream(
            path, is_accel ? ingest::StreamKind::accel : ingest::StreamKind::location);
        if (probe.subject_id.empty())
            throw DataError(path + ": stream has no subject_id metadata");
        Source& s = by_subject[probe.subject_id];
        s.subject = probe.subject_id;
        std::string& slot = is_accel ? s.accel_path : s.loc_path;
        if (!slot.empty())
            throw DataError("subject " + probe.subject_id + " has more than one " +
                            (is_accel ? "accel" : "location") + " stream");
        slot = path;
    };
    for (const auto& p : inputs.at("accel")) add_explicit(p.get<std::string>(), true);
    for (const auto& p : inputs.at("location")) add_explicit(p.get<std::string>(), false);
    for (auto& [_, s] : by_subject) sources.push_back(s);
    if (sources.empty()) throw DataError("ingest has no inputs");
    std::sort(sources.begin(), sources.end(),
              [](const Source& a, const Source& b) { return a.subject < b.subject; });

    const fs::path root = fs::path(cfg.out_dir()) / "ingest";
    std::vector<std::string> subjects(sources.size());
    for_each_index(sources.size(), [&](std::size_t i) {
        const Source& src = sources[i];
        if (src.accel_path.empty())
            throw DataError("subject " + src.subject + " has no accel stream");
        ingest::SensorStream accel =
            ingest::parse_stream(src.accel_path, ingest::StreamKind::accel);
        ingest::SensorStream canonical =
            ingest::resample(accel, target_hz(cfg), accel_gap_s(cfg));
        const ingest::CoverageMap acc_cov =
            ingest::compute_coverage(canonical, accel_gap_s(cfg));

        const fs::path dir = root / src.subject;
        fs::create_directories(dir);
        ingest::write_stream_jsonl(canonical, (dir / "accel.jsonl").string());

        json jcov{{"format_version", 1}, {"config_hash", cfg.hash}, {"tz", canonical.tz}};
        auto cov_json = [](const ingest::CoverageMap& cov) {
            json segs = json::array();
            for (const auto& s : cov.segments)
                if (s.recording) segs.push_back(json::array({s.start_ms, s.end_ms}));
            return json{{"span_ms", cov.span_ms()},
                        {"recording_ms", cov.recording_ms()},
                        {"recording_segments", segs}};
        };
        jcov["accel"] = cov_json(acc_cov);

        if (!src.loc_path.empty() && fs::exists(src.loc_path)) {
            ingest::SensorStream loc =
                ingest::parse_stream(src.loc_path, ingest::StreamKind::location);
            ingest::write_stream_jsonl(loc, (dir / "location.jsonl").string());
            jcov["location"] = cov_json(ingest::compute_coverage(loc, location_gap_s(cfg)));
        }

        // Recorded hours per local day, from accelerometer coverage.
        const tz::Zone zone = zone_for(cfg, canonical);
        json days = json::array();
        if (!canonical.empty()) {
            EpochMs day = zone.local_day_start(canonical.first_t());
            while (day <= canonical.last_t()) {
                const EpochMs next = zone.local_day_start(day + 26 * kMsPerHour);
                const double hours =
                    static_cast<double>(acc_cov.recorded_between(day, next)) / kMsPerHour;
                if (hours > 0.0)
                    days.push_back(json{{"date", zone.local_date(day)},
                                        {"start_ms", day},
                                        {"recorded_hours", hours}});
                day = next;
            }
        }
        jcov["days"] = days;
        write_json_file(dir / "coverage.json", jcov);
        subjects[i] = src.subject;
    });
    write_manifest(root, "ingest", cfg, subjects);
}

// ---------- model training from a labeled synthetic corpus ----------

struct LabeledSet {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
};

// Frames fully inside a truth block of a wanted kind get that label.
void collect_labels(const ingest::SensorStream& s, const ingest::FrameSet& frames,
                    const std::vector<std::vector<double>>& feats,
                    const sim::SubjectTruth& truth, const std::vector<std::string>& classes,
                    bool travel_modes, LabeledSet& out) {
    const EpochMs len_ms =
        static_cast<EpochMs>(std::llround(frames.len_samples * 1000.0 / frames.rate_hz));
    for (std::size_t f = 0; f < frames.frames.size(); ++f) {
        const EpochMs a = frames.frames[f].start_ms, b = a + len_ms;
        for (const auto& blk : truth.blocks) {
            if (a < blk.t0 || b > blk.t1) continue;
            const std::string& label = travel_modes ? blk.mode : blk.kind;
            if (travel_modes && blk.kind != "travel") continue;
            const auto it = std::find(classes.begin(), classes.end(), label);
            if (it == classes.end()) continue;
            out.X.push_back(feats[f]);
            out.y.push_back(static_cast<int>(it - classes.begin()));
            break;
        }
    }
}

models::SvmModel train_from_sim(const Config& cfg, const fs::path& train_dir, bool transport_task) {
    const json m = read_json_file(train_dir / "manifest.json");
    const auto ids = m.value("subjects", std::vector<std::string>{});
    if (ids.empty()) throw DataError(train_dir.string() + ": training corpus lists no subjects");

    const double win_s =
        transport_task ? 1.0 : cfg.doc.at("activity").at("type_window_s").get<double>();
    const auto& classes =
        transport_task ? transport::mode_classes() : activity::type_classes();
    LabeledSet set;
    for (const auto& id : ids) {
        ingest::SensorStream raw =
            ingest::parse_stream((train_dir / id / "accel.jsonl").string(),
                                 ingest::StreamKind::accel);
        ingest::SensorStream s = ingest::resample(raw, target_hz(cfg), accel_gap_s(cfg));
        const ingest::FrameSet frames = ingest::window(s, win_s, win_s, accel_gap_s(cfg));
        const auto feats = transport_task ? transport::transport_features_batch(s, frames)
                                          : activity::type_features_batch(s, frames);
        const sim::SubjectTruth truth =
            sim::load_truth_json((train_dir / id / "truth.json").string());
        collect_labels(s, frames, feats, truth, classes, transport_task, set);
    }
    if (set.X.empty())
        throw DataError(train_dir.string() + ": no labeled windows for " +
                        std::string(transport_task ? "transport" : "activity") + " training");
    const std::string task = transport_task ? "transport_mode" : "activity_type";
    const std::string& spec =
        transport_task ? transport::transport_feature_spec() : activity::type_feature_spec();
    return models::train_svm(set.X, set.y, classes, svm_config(cfg), task, spec);
}

// Loads the configured model or trains one from the labeled corpus; returns
// false when neither is configured.
bool obtain_model(const Config& cfg, bool transport_task, models::SvmModel& model) {
    const json& inputs = cfg.doc.at("inputs");
    const std::string path =
        inputs.at(transport_task ? "transport_model" : "activity_model").get<std::string>();
    const std::string spec =
        transport_task ? transport::transport_feature_spec() : activity::type_feature_spec();
    const std::size_t dim =
        transport_task ? transport::transport_feature_dim() : activity::type_feature_dim();
    if (!path.empty()) {
        model = models::load_model(path, models::feature_hash_for(spec, dim));
        return true;
    }
    const std::string train_dir = inputs.at("training_sim_dir").get<std::string>();
    if (train_dir.empty()) return false;
    const fs::path saved = fs::path(cfg.out_dir()) / "models" /
                           (transport_task ? "transport_svm.json" : "activity_svm.json");
    model = train_from_sim(cfg, train_dir, transport_task);
    fs::create_directories(saved.parent_path());
    models::save_model(model, saved.string());
    return true;
}

// ---------- extract ----------

struct DayTotals {
    double recorded_hours = 0.0;
    EpochMs start_ms = 0;
    std::map<std::string, double> totals;
};

void stage_extract(const Config& cfg) {
    const fs::path in_root = fs::path(cfg.out_dir()) / "ingest";
    const auto subjects = read_manifest_subjects(in_root, "ingest");

    models::SvmModel activity_model, transport_model;
    const bool has_activity_model = obtain_model(cfg, false, activity_model);
    const bool has_transport_model = obtain_model(cfg, true, transport_model);

    location::Gazetteer gaz;
    const std::string gaz_path = cfg.doc.at("inputs").at("gazetteer").get<std::string>();
    if (!gaz_path.empty()) gaz = location::Gazetteer::load_csv(gaz_path);
    const double gaz_radius = cfg.doc.at("location").at("gazetteer_radius_m").get<double>();
    const double min_history_days =
        cfg.doc.at("location").at("home_school_min_days").get<double>();
    const int vote_precision = cfg.doc.at("geoagg").at("vote_precision").get<int>();

    const fs::path root = fs::path(cfg.out_dir()) / "extract";
    for_each_index(subjects.size(), [&](std::size_t i) {
        const std::string& id = subjects[i];
        const fs::path in_dir = in_root / id;
        const fs::path dir = root / id;
        fs::create_directories(dir);

        ingest::SensorStream accel =
            ingest::parse_stream((in_dir / "accel.jsonl").string(), ingest::StreamKind::accel);
        const tz::Zone zone = zone_for(cfg, accel);
        const ingest::CoverageMap acc_cov = ingest::compute_coverage(accel, accel_gap_s(cfg));

        // Per-minute counts, levels, steps.
        const ingest::FrameSet minutes = ingest::window(accel, 60.0, 60.0, accel_gap_s(cfg));
        const auto counts = activity::counts_for_frames(accel, minutes, counts_config(cfg));
        const auto levels = activity::classify_levels(counts, cut_points(cfg));
        const auto steps =
            activity::count_steps(accel, minutes, accel.device_profile, step_config(cfg));

        {
            std::ostringstream c, l, s;
            c << csv_head(cfg) << "minute_start_ms,counts\n";
            c.precision(10);
            for (const auto& row : counts) c << row.minute_start << "," << row.counts << "\n";
            l << csv_head(cfg) << "minute_start_ms,level\n";
            for (const auto& row : levels)
                l << row.minute_start << "," << activity::to_string(row.level) << "\n";
            s << csv_head(cfg) << "minute_start_ms,steps\n";
            for (const auto& row : steps) s << row.window_start << "," << row.steps << "\n";
            write_text(dir / "counts.csv", c.str());
            write_text(dir / "levels.csv", l.str());
            write_text(dir / "steps.csv", s.str());
        }

        // Activity-type windows.
        std::vector<activity::TypePrediction> types;
        if (has_activity_model) {
            const double win_s = cfg.doc.at("activity").at("type_window_s").get<double>();
            const ingest::FrameSet tw = ingest::window(accel, win_s, win_s, accel_gap_s(cfg));
            const auto feats = activity::type_features_batch(accel, tw);
            types.reserve(feats.size());
            for (std::size_t f = 0; f < feats.size(); ++f)
                types.push_back(
                    activity::classify_type(feats[f], activity_model, tw.frames[f].start_ms));
            std::ostringstream t;
            t << csv_head(cfg) << "window_start_ms,type\n";
            for (const auto& row : types) t << row.window_start << "," << row.label << "\n";
            write_text(dir / "types.csv", t.str());
        }

        // Stays: detect, label home/school, categorize, redact.
        std::vector<location::PointOfInterest> pois;
        location::HomeSchoolResult hs;
        const fs::path loc_path = in_dir / "location.jsonl";
        std::vector<transport::Trip> trips;
        geoagg::MobilityGraph mobility;
        if (fs::exists(loc_path)) {
            ingest::SensorStream loc =
                ingest::parse_stream(loc_path.string(), ingest::StreamKind::location);
            location::PoiConfig pcfg = poi_config(cfg);
            pois = location::detect_pois(loc, pcfg);
            location::HomeSchoolConfig hscfg;
            hscfg.min_history_days = min_history_days;
            hs = location::label_home_school(pois, zone, pcfg, hscfg);
            for (auto& poi : pois) {
                location::categorize_poi(poi, gaz, gaz_radius);
                poi.geohash =
                    geoagg::geohash_encode(poi.center->lat, poi.center->lon, vote_precision);
            }

            // Trips between consecutive stays, classified when a model exists.
            trips = transport::segment_trips(pois, acc_cov, trip_config(cfg));
            if (has_transport_model) {
                const ingest::FrameSet seconds =
                    ingest::window(accel, 1.0, 1.0, accel_gap_s(cfg));
                transport::ClassifyConfig ccfg;
                ccfg.median_window_s =
                    cfg.doc.at("transport").at("median_window_s").get<int>();
                for (auto& trip : trips)
                    transport::classify_trip(trip, accel, seconds, transport_model, ccfg);
            }

            // The per-user mobility graph aggregates over centers, so it is
            // built before redaction erases them.
            std::vector<geoagg::VisitRef> visits;
            for (const auto& poi : pois)
                visits.push_back({location::to_string(poi.category), poi.arrive_t, poi.depart_t,
                                  poi.center});
            std::vector<geoagg::TransitionRef> transitions;
            for (std::size_t v = 0; v + 1 < pois.size(); ++v) {
                geoagg::TransitionRef tr;
                tr.from_visit = v;
                tr.to_visit = v + 1;
                for (const auto& trip : trips)
                    if (trip.origin_poi == pois[v].poi_id &&
                        trip.dest_poi == pois[v + 1].poi_id) {
                        tr.dominant_mode = trip.dominant_mode;
                        break;
                    }
                transitions.push_back(tr);
            }
            mobility = geoagg::build_mobility_graph(visits, transitions);

            for (auto& poi : pois) poi = location::redact_coordinates(std::move(poi));
        }

        {
            json jp = json::array();
            for (const auto& poi : pois)
                jp.push_back(json{{"poi_id", poi.poi_id},
                                  {"category", location::to_string(poi.category)},
                                  {"arrive_ms", poi.arrive_t},
                                  {"depart_ms", poi.depart_t},
                                  {"geohash", poi.geohash},
                                  {"member_points", poi.member_points}});
            json out{{"format_version", 1},
                     {"config_hash", cfg.hash},
                     {"home_school_labeled", hs.labeled},
                     {"pois", jp}};
            if (!hs.labeled && !hs.reason.empty()) out["home_school_reason"] = hs.reason;
            write_json_file(dir / "pois.json", out);

            json jt = json::array();
            for (const auto& trip : trips) {
                json one{{"start_ms", trip.start_t},
                         {"end_ms", trip.end_t},
                         {"origin_poi", trip.origin_poi},
                         {"dest_poi", trip.dest_poi},
                         {"dominant_mode", trip.dominant_mode},
                         {"mode_seconds", trip.mode_seconds}};
                jt.push_back(std::move(one));
            }
            write_json_file(dir / "trips.json",
                            json{{"format_version", 1}, {"config_hash", cfg.hash}, {"trips", jt}});

            json jn = json::array(), je = json::array();
            for (const auto& n : mobility.nodes)
                jn.push_back(json{{"category", n.category},
                                  {"visits", n.visits},
                                  {"dwell_min", n.dwell_min}});
            for (const auto& e : mobility.edges)
                je.push_back(json{{"from", e.from},
                                  {"to", e.to},
                                  {"count", e.count},
                                  {"probability", e.probability},
                                  {"mean_distance_m", e.mean_distance_m},
                                  {"mode_share", e.mode_share}});
            write_json_file(dir / "mobility.json", json{{"format_version", 1},
                                                        {"config_hash", cfg.hash},
                                                        {"nodes", jn},
                                                        {"edges", je}});
        }

        // Sleep sessions.
        const sleep::SleepConfig scfg = sleep_config(cfg);
        const auto worn = sleep::mask_nonwear(counts, scfg.nonwear_zero_min);
        const auto scores = sleep::score_epochs(worn, scfg);
        const auto sessions = sleep::segment_sessions(scores, scfg);
        {
            json js = json::array();
            for (const auto& s : sessions)
                js.push_back(json{{"ss_ms", s.SS},
                                  {"se_ms", s.SE},
                                  {"gst_min", s.GST_min},
                                  {"tti_min", s.TTI_min},
                                  {"ni", s.NI},
                                  {"nst_min", s.NST_min}});
            write_json_file(dir / "sleep.json", json{{"format_version", 1},
                                                     {"config_hash", cfg.hash},
                                                     {"scorer", sleep::to_string(scfg.scorer)},
                                                     {"sessions", js}});
        }

        // Daily roll-ups feeding individual aggregation.
        std::map<std::string, DayTotals> days;
        {
            const json cov = read_json_file(in_dir / "coverage.json");
            for (const auto& d : cov.value("days", json::array())) {
                DayTotals& day = days[d.at("date").get<std::string>()];
                day.recorded_hours = d.at("recorded_hours").get<double>();
                day.start_ms = d.at("start_ms").get<EpochMs>();
            }
            auto day_of = [&](EpochMs t) { return zone.local_date(t); };
            for (const auto& row : steps) {
                auto it = days.find(day_of(row.window_start));
                if (it == days.end()) continue;
                it->second.totals["steps"] += row.steps;
                if (row.steps >= 10) it->second.totals["walk_min"] += 1.0;
            }
            for (const auto& row : counts) {
                auto it = days.find(day_of(row.minute_start));
                if (it != days.end()) it->second.totals["counts_sum"] += row.counts;
            }
            for (const auto& row : levels) {
                auto it = days.find(day_of(row.minute_start));
                if (it != days.end())
                    it->second.totals[activity::to_string(row.level) + "_min"] += 1.0;
            }
            for (const auto& s : sessions) {
                auto it = days.find(day_of(s.SS));
                if (it != days.end())
                    it->second.totals["sleep_gst_min"] += static_cast<double>(s.GST_min);
            }
            json jd = json::array();
            for (const auto& [date, day] : days)
                jd.push_back(json{{"date", date},
                                  {"start_ms", day.start_ms},
                                  {"recorded_hours", day.recorded_hours},
                                  {"totals", day.totals}});
            write_json_file(dir / "days.json", json{{"format_version", 1},
                                                    {"config_hash", cfg.hash},
                                                    {"days", jd}});
        }
    });
    write_manifest(root, "extract", cfg, subjects);
}

// ---------- aggregate ----------

void stage_aggregate(const Config& cfg) {
    const fs::path ex_root = fs::path(cfg.out_dir()) / "extract";
    const auto subjects = read_manifest_subjects(ex_root, "extract");
    const json& g = cfg.doc.at("geoagg");
    const double min_day_hours = g.at("min_day_hours").get<double>();
    const double min_visit_s = g.at("min_visit_s").get<double>();
    const std::string salt = g.at("salt").get<std::string>();
    const int export_precision = g.at("export_precision").get<int>();

    const fs::path root = fs::path(cfg.out_dir()) / "aggregate";
    fs::create_directories(root / "individual");
    geoagg::VoteStore store((root / "votes.jsonl").string());

    for (const auto& id : subjects) {
        const fs::path dir = ex_root / id;

        // Individual layer: day records → per-hour and per-day means.
        std::vector<geoagg::DayRecord> days;
        std::map<std::string, std::pair<double, EpochMs>> day_index;  // date → (hours, start)
        for (const auto& d : read_json_file(dir / "days.json").value("days", json::array())) {
            geoagg::DayRecord rec;
            rec.date = d.at("date").get<std::string>();
            rec.recorded_hours = d.at("recorded_hours").get<double>();
            if (d.contains("totals"))
                rec.totals = d.at("totals").get<std::map<std::string, double>>();
            day_index[rec.date] = {rec.recorded_hours, d.at("start_ms").get<EpochMs>()};
            days.push_back(std::move(rec));
        }
        const geoagg::IndividualAgg agg = geoagg::aggregate_individual(days, min_day_hours);
        json ja{{"format_version", 1},
                {"config_hash", cfg.hash},
                {"defined", agg.defined},
                {"n_days", agg.n_days},
                {"per_hour_mean", agg.per_hour_mean},
                {"daily_mean", agg.daily_mean}};
        if (!agg.defined) ja["reason"] = agg.reason;
        write_json_file(root / "individual" / (id + ".json"), ja);

        // Population layer: one anonymous vote per qualifying visit.
        const auto step_rows = read_minute_csv(dir / "steps.csv");
        const auto count_rows = read_minute_csv(dir / "counts.csv");
        auto sum_in = [](const std::vector<MinuteRow>& rows, EpochMs a, EpochMs b, bool mean) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& r : rows) {
                if (r.t < a || r.t >= b) continue;
                sum += r.v;
                ++n;
            }
            if (mean) return n ? sum / static_cast<double>(n) : 0.0;
            return sum;
        };
        const std::string voter = digest::salted_tag(salt, id);
        const json pois = read_json_file(dir / "pois.json").value("pois", json::array());
        const tz::Zone zone = tz::Zone::load(cfg.doc.at("timezone").get<std::string>());
        for (const auto& jp : pois) {
            const EpochMs arrive = jp.at("arrive_ms").get<EpochMs>();
            const EpochMs depart = jp.at("depart_ms").get<EpochMs>();
            if (static_cast<double>(depart - arrive) < min_visit_s * 1000.0) continue;
            // Day-validity filter: the visit's local day needs enough recording.
            const std::string date = zone.local_date(arrive);
            const auto it = day_index.find(date);
            if (it == day_index.end() || it->second.first < min_day_hours) continue;

            geoagg::GeohashVote vote;
            vote.gh = jp.at("geohash").get<std::string>();
            vote.voter = voter;
            vote.t0 = arrive;
            vote.t1 = depart;
            const double hours = static_cast<double>(depart - arrive) / kMsPerHour;
            vote.payload["steps_per_hour"] = sum_in(step_rows, arrive, depart, false) / hours;
            vote.payload["counts_per_min"] = sum_in(count_rows, arrive, depart, true);
            vote.payload["visited_" + jp.at("category").get<std::string>()] = 1.0;
            store.cast(vote);
        }
    }

    geoagg::AggregateConfig acfg;
    acfg.k_anon = static_cast<std::size_t>(g.at("k_anon").get<int>());
    for (const auto& [name, edges] : g.at("hist_edges").items())
        acfg.hist_edges[name] = edges.get<std::vector<double>>();
    const auto cells = geoagg::aggregate_population(store.snapshot(), export_precision, acfg);

    json jc = json::array();
    for (const auto& cell : cells) {
        json stats = json::object();
        for (const auto& [name, s] : cell.stats) {
            json one{{"sum", s.sum}, {"n", s.n}, {"mean", s.mean}};
            if (!s.hist.empty()) {
                one["hist_edges"] = s.hist_edges;
                one["hist"] = s.hist;
            }
            stats[name] = std::move(one);
        }
        jc.push_back(json{{"geohash", cell.gh},
                          {"n_votes", cell.n_votes},
                          {"n_voters", cell.n_voters},
                          {"suppressed", cell.suppressed},
                          {"stats", stats}});
    }
    write_json_file(root / "cells.json", json{{"format_version", 1},
                                              {"config_hash", cfg.hash},
                                              {"precision", export_precision},
                                              {"k_anon", g.at("k_anon").get<int>()},
                                              {"cells", jc}});
    write_manifest(root, "aggregate", cfg, subjects);
}

// ---------- export ----------

std::vector<geoagg::AggregateCell> load_cells(const fs::path& path) {
    const json j = read_json_file(path);
    std::vector<geoagg::AggregateCell> cells;
    for (const auto& jc : j.value("cells", json::array())) {
        geoagg::AggregateCell cell;
        cell.gh = jc.at("geohash").get<std::string>();
        cell.n_votes = jc.at("n_votes").get<std::size_t>();
        cell.n_voters = jc.at("n_voters").get<std::size_t>();
        cell.suppressed = jc.at("suppressed").get<bool>();
        for (const auto& [name, js] : jc.at("stats").items()) {
            geoagg::IndicatorStats s;
            s.sum = js.at("sum").get<double>();
            s.n = js.at("n").get<std::size_t>();
            s.mean = js.at("mean").get<double>();
            if (js.contains("hist")) {
                s.hist_edges = js.at("hist_edges").get<std::vector<double>>();
                s.hist = js.at("hist").get<std::vector<std::size_t>>();
            }
            cell.stats[name] = std::move(s);
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

void stage_export(const Config& cfg) {
    const fs::path agg = fs::path(cfg.out_dir()) / "aggregate";
    if (!fs::exists(agg / "cells.json"))
        throw DataError("missing " + (agg / "cells.json").string() +
                        "; run the aggregate stage first");
    const auto cells = load_cells(agg / "cells.json");
    const fs::path root = fs::path(cfg.out_dir()) / "export";
    fs::create_directories(root);

    json geo = json::parse(geoagg::cells_to_geojson(cells));
    geo["config_hash"] = cfg.hash;
    write_text(root / "cells.geojson", geo.dump(2) + "\n");
    write_text(root / "cells.csv", csv_head(cfg) + geoagg::cells_to_csv(cells));
}

// ---------- evaluate ----------

void stage_evaluate(const Config& cfg) {
    const fs::path in_root = fs::path(cfg.out_dir()) / "ingest";
    const auto subjects = read_manifest_subjects(in_root, "ingest");
    const fs::path truth_root = sim_dir(cfg, true);

    models::SvmModel activity_model, transport_model;
    const bool has_activity_model = obtain_model(cfg, false, activity_model);
    const bool has_transport_model = obtain_model(cfg, true, transport_model);

    const double max_dist = cfg.doc.at("eval").at("max_dist_m").get<double>();
    const double min_overlap = cfg.doc.at("eval").at("min_overlap").get<double>();

    std::vector<std::pair<std::string, eval::PoiMatchResult>> poi_rows;
    std::size_t sum_tp = 0, sum_fp = 0, sum_fn = 0;
    std::vector<eval::StepRecording> step_rows;
    std::vector<int> type_truth, type_pred, mode_truth, mode_pred;
    std::vector<std::vector<sleep::SleepSession>> truth_sessions, cole_sessions, sadeh_sessions;

    for (const auto& id : subjects) {
        const fs::path t_dir = truth_root / id;
        if (!fs::exists(t_dir / "truth.json"))
            throw DataError("no ground truth for subject " + id + " under " +
                            truth_root.string());
        const sim::SubjectTruth truth = sim::load_truth_json((t_dir / "truth.json").string());

        ingest::SensorStream accel = ingest::parse_stream(
            (in_root / id / "accel.jsonl").string(), ingest::StreamKind::accel);

        // Steps: predicted total vs. generator total, grouped by device.
        const auto step_times =
            activity::detect_step_times(accel, accel.device_profile, step_config(cfg));
        step_rows.push_back({ingest::to_string(accel.device_profile),
                             static_cast<double>(truth.total_steps),
                             static_cast<double>(step_times.size())});

        // Stay detection vs. the dwell blocks the generator placed.
        const fs::path loc_path = in_root / id / "location.jsonl";
        if (fs::exists(loc_path)) {
            ingest::SensorStream loc =
                ingest::parse_stream(loc_path.string(), ingest::StreamKind::location);
            auto detected = location::detect_pois(loc, poi_config(cfg));
            std::vector<location::PointOfInterest> truth_pois;
            for (const auto& blk : truth.blocks) {
                if (blk.kind != "dwell") continue;
                location::PointOfInterest poi;
                poi.poi_id = blk.place_id;
                poi.center = geo::LatLon{blk.lat, blk.lon};
                poi.arrive_t = blk.t0;
                poi.depart_t = blk.t1;
                truth_pois.push_back(std::move(poi));
            }
            const auto match = eval::match_pois(truth_pois, detected, max_dist, min_overlap);
            sum_tp += match.tp;
            sum_fp += match.fp;
            sum_fn += match.fn;
            poi_rows.emplace_back(id, match);
        }

        // Window-level classification vs. the block the window sits in.
        auto frame_labels = [&](bool transport_task, std::vector<int>& truths,
                                std::vector<int>& preds, const models::SvmModel& model) {
            const double win_s =
                transport_task ? 1.0 : cfg.doc.at("activity").at("type_window_s").get<double>();
            const ingest::FrameSet frames =
                ingest::window(accel, win_s, win_s, accel_gap_s(cfg));
            const auto feats = transport_task
                                   ? transport::transport_features_batch(accel, frames)
                                   : activity::type_features_batch(accel, frames);
            const auto& classes =
                transport_task ? transport::mode_classes() : activity::type_classes();
            LabeledSet set;
            collect_labels(accel, frames, feats, truth, classes, transport_task, set);
            const auto predicted = model.predict_batch(set.X);
            truths.insert(truths.end(), set.y.begin(), set.y.end());
            preds.insert(preds.end(), predicted.begin(), predicted.end());
        };
        if (has_activity_model) frame_labels(false, type_truth, type_pred, activity_model);
        if (has_transport_model) frame_labels(true, mode_truth, mode_pred, transport_model);

        // Sleep: annotation-derived truth vs. both scorers.
        const sleep::SleepConfig scfg = sleep_config(cfg);
        const auto events = eval::load_annotations((t_dir / "sleep_annotations.jsonl").string());
        truth_sessions.push_back(eval::sessions_from_annotations(events, scfg.merge_gap_min));
        const ingest::FrameSet minutes = ingest::window(accel, 60.0, 60.0, accel_gap_s(cfg));
        const auto counts = activity::counts_for_frames(accel, minutes, counts_config(cfg));
        const auto worn = sleep::mask_nonwear(counts, scfg.nonwear_zero_min);
        for (const sleep::Scorer scorer : {sleep::Scorer::cole, sleep::Scorer::sadeh}) {
            sleep::SleepConfig one = scfg;
            one.scorer = scorer;
            const auto sessions = sleep::segment_sessions(sleep::score_epochs(worn, one), one);
            (scorer == sleep::Scorer::cole ? cole_sessions : sadeh_sessions)
                .push_back(sessions);
        }
    }

    // Assemble the report.
    json report{{"format_version", 1}, {"config_hash", cfg.hash}};
    std::string md = "# evaluation report\n\nconfig_hash: " + cfg.hash + "\n\n";

    if (!poi_rows.empty()) {
        poi_rows.emplace_back("sum", eval::metrics_from_counts(sum_tp, sum_fp, sum_fn));
        json jrows = json::array();
        for (const auto& [name, r] : poi_rows) {
            json one{{"subject", name}, {"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}};
            if (r.precision) one["precision"] = *r.precision;
            if (r.recall) one["recall"] = *r.recall;
            if (r.f1) one["f1"] = *r.f1;
            jrows.push_back(std::move(one));
        }
        report["poi_matching"] =
            json{{"max_dist_m", max_dist}, {"min_overlap", min_overlap}, {"rows", jrows}};
        md += "## stay detection\n\n" + eval::poi_match_markdown(poi_rows) + "\n";
    }

    const auto step_stats = eval::step_error(step_rows);
    {
        json jrows = json::array();
        for (const auto& gst : step_stats)
            jrows.push_back(json{{"group", gst.group},
                                 {"n", gst.n},
                                 {"predicted_mean", gst.pred_mean},
                                 {"predicted_std", gst.pred_std},
                                 {"abs_mean", gst.abs_mean},
                                 {"abs_std", gst.abs_std},
                                 {"rel_mean_pct", gst.rel_mean},
                                 {"rel_std_pct", gst.rel_std},
                                 {"rel_excluded", gst.rel_excluded}});
        report["step_error"] = jrows;
        md += "## step counts\n\n" + eval::step_error_markdown(step_stats) + "\n";
    }

    auto add_confusion = [&](const std::string& key, const std::vector<int>& t,
                             const std::vector<int>& p, const std::vector<std::string>& classes) {
        if (t.empty()) return;
        const auto m = eval::confusion(t, p, classes);
        report[key] = json{{"labels", m.labels}, {"counts", m.counts},
                           {"row_percent", m.row_percent()}, {"accuracy", m.accuracy()}};
        md += "## " + key + "\n\n" + eval::confusion_markdown(m) + "\n";
    };
    add_confusion("activity_type_confusion", type_truth, type_pred, activity::type_classes());
    add_confusion("transport_mode_confusion", mode_truth, mode_pred, transport::mode_classes());

    {
        std::vector<std::pair<std::string, eval::SleepEvalResult>> rows;
        rows.emplace_back("weighted-window scorer",
                          eval::sleep_eval(truth_sessions, cole_sessions, true));
        rows.emplace_back("regression scorer",
                          eval::sleep_eval(truth_sessions, sadeh_sessions, true));
        json jrows = json::object();
        for (const auto& [name, r] : rows) {
            json ae = json::object();
            for (const auto& [ind, s] : r.ae)
                ae[ind] = json{{"n", s.n}, {"mean", s.mean}, {"std", s.stddev}, {"max", s.max}};
            jrows[name] = json{{"css", r.css},
                               {"n_recordings", r.n_recordings},
                               {"n_count_matched", r.n_count_matched},
                               {"ae", ae}};
        }
        report["sleep"] = jrows;
        md += "## sleep sessions\n\n" + eval::sleep_eval_markdown(rows);
    }

    const fs::path root = fs::path(cfg.out_dir()) / "evaluate";
    fs::create_directories(root);
    write_json_file(root / "report.json", report);
    write_text(root / "report.md", md);
}

}  // namespace

void run_stage(const std::string& stage, const Config& cfg) {
    exec::set_max_workers(cfg.workers());
    fs::create_directories(cfg.out_dir());
    if (stage == "simulate")
        stage_simulate(cfg);
    else if (stage == "ingest")
        stage_ingest(cfg);
    else if (stage == "extract")
        stage_extract(cfg);
    else if (stage == "aggregate")
        stage_aggregate(cfg);
    else if (stage == "export")
        stage_export(cfg);
    else if (stage == "evaluate")
        stage_evaluate(cfg);
    else
        throw ConfigError("unknown stage \"" + stage +
                          "\" (simulate|ingest|extract|aggregate|export|evaluate)");
}

}  // namespace obeskit::pipeline
