#include <cctype>
#include <fstream>
#include <sstream>

#include "obeskit/core/digest.hpp"
#include "obeskit/pipeline.hpp"

namespace obeskit::pipeline {

using nlohmann::json;

nlohmann::json default_config() {
    return json{
        {"seed", 1},
        {"workers", 1},
        {"out_dir", "out"},
        {"timezone", "UTC"},
        {"inputs",
         {{"sim_dir", ""},
          {"accel", json::array()},
          {"location", json::array()},
          {"gazetteer", ""},
          {"training_sim_dir", ""},
          {"activity_model", ""},
          {"transport_model", ""}}},
        {"scenario", json::object()},
        {"ingest", {{"target_hz", 20.0}, {"accel_gap_s", 5.0}, {"location_gap_s", 300.0}}},
        {"activity",
         {{"band_lo_hz", 0.5},
          {"band_hi_hz", 3.0},
          {"filter_order", 4},
          {"cut_points", {{"c1", 100.0}, {"c2", 1800.0}, {"c3", 4000.0}}},
          {"type_window_s", 5.0},
          {"steps",
           {{"context_s", 5.0},
            {"mult_phone", 0.6},
            {"mult_watch", 0.45},
            {"min_peak_dist_s", 0.3},
            {"min_peak_amp", 0.3},
            {"max_period_s", 2.0},
            {"period_dev", 0.3},
            {"min_bout_peaks", 4},
            {"autocorr_min", 0.4}}}}},
        {"location",
         {{"eps_m", 50.0},
          {"min_pts", 10},
          {"min_stay_min", 10.0},
          {"split_gap_min", 30.0},
          {"v_ref_ms", 1.5},
          {"move_window", 5},
          {"gazetteer_radius_m", 75.0},
          {"home_school_min_days", 7.0}}},
        {"transport", {{"min_trip_s", 120.0}, {"min_coverage", 0.5}, {"median_window_s", 9}}},
        {"sleep",
         {{"scorer", "cole"},
          {"count_scale", 1.0},
          {"merge_gap_min", 20.0},
          {"min_session_min", 60.0},
          {"nonwear_zero_min", 60.0}}},
        {"models", {{"C", 1000.0}, {"gamma", 0.0}, {"kernel", "rbf"}}},
        {"geoagg",
         {{"vote_precision", 7},
          {"export_precision", 6},
          {"k_anon", 5},
          {"min_visit_s", 600.0},
          {"min_day_hours", 8.0},
          {"salt", "obeskit"},
          {"hist_edges", json::object()}}},
        {"eval", {{"max_dist_m", 100.0}, {"min_overlap", 0.5}}},
    };
}

namespace {

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

// Free-form subtrees where user keys are data, not schema.
bool free_form(const std::string& path) {
    return path == "scenario" || path == "geoagg.hist_edges";
}

void merge_into(json& base, const json& user, const std::string& path) {
    if (free_form(path)) {
        base = user;
        return;
    }
    if (!user.is_object())
        throw ConfigError("config: expected a table at " + (path.empty() ? "top level" : path));
    for (const auto& [key, val] : user.items()) {
        const std::string sub = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) throw ConfigError("config: unknown key \"" + sub + "\"");
        json& slot = base.at(key);
        if (slot.is_object() && !free_form(sub)) {
            merge_into(slot, val, sub);
            continue;
        }
        if (!free_form(sub) && !same_kind(slot, val))
            throw ConfigError("config: wrong value type at \"" + sub + "\"");
        slot = val;
    }
}

std::string hash_of(const json& doc) {
    json hashed = doc;
    hashed.erase("out_dir");  // where artifacts land does not change what they contain
    return digest::sha256_hex(hashed.dump()).substr(0, 16);
}

}  // namespace

Config config_from_json(const json& user, const CliOverrides& ov) {
    Config cfg;
    cfg.doc = default_config();
    merge_into(cfg.doc, user, "");
    if (ov.seed) cfg.doc["seed"] = *ov.seed;
    if (ov.workers) cfg.doc["workers"] = *ov.workers;
    if (ov.out_dir) cfg.doc["out_dir"] = *ov.out_dir;
    if (cfg.doc["workers"].get<int>() < 1)
        throw ConfigError("config: workers must be at least 1");
    if (cfg.doc["out_dir"].get<std::string>().empty())
        throw ConfigError("config: out_dir must not be empty");
    const int vp = cfg.doc["geoagg"]["vote_precision"].get<int>();
    const int ep = cfg.doc["geoagg"]["export_precision"].get<int>();
    if (vp < 1 || vp > 12 || ep < 1 || ep > 12 || ep > vp)
        throw ConfigError("config: geohash precisions must satisfy 1 <= export <= vote <= 12");
    cfg.hash = hash_of(cfg.doc);
    return cfg;
}

Config load_config(const std::string& path, const CliOverrides& ov) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    bool looks_json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
    if (!looks_json && !(path.size() > 5 && path.substr(path.size() - 5) == ".toml")) {
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            looks_json = c == '{';
            break;
        }
    }
    json user;
    if (looks_json) {
        try {
            user = json::parse(text);
        } catch (const json::exception& e) {
            throw ConfigError(path + ": invalid JSON: " + e.what());
        }
    } else {
        user = parse_toml_subset(text, path);
    }
    return config_from_json(user, ov);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

std::vector<std::string> split_dotted(const std::string& key, const std::string& where) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : key) {
        if (c == '.') {
            if (cur.empty()) throw ConfigError(where + ": empty key segment in \"" + key + "\"");
            parts.push_back(cur);
            cur.clear();
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
            cur += c;
        } else {
            throw ConfigError(where + ": bad character in key \"" + key + "\"");
        }
    }
    if (cur.empty()) throw ConfigError(where + ": empty key segment in \"" + key + "\"");
    parts.push_back(cur);
    return parts;
}

json parse_scalar(const std::string& raw, const std::string& where) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError(where + ": missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ConfigError(where + ": unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                ++i;
                if (v[i] == 'n')
                    out += '\n';
                else if (v[i] == 't')
                    out += '\t';
                else
                    out += v[i];
            } else {
                out += v[i];
            }
        }
        return json(out);
    }
    if (v == "true") return json(true);
    if (v == "false") return json(false);
    try {
        std::size_t used = 0;
        if (v.find_first_of(".eE") == std::string::npos) {
            const long long n = std::stoll(v, &used);
            if (used == v.size()) return json(n);
        } else {
            const double d = std::stod(v, &used);
            if (used == v.size()) return json(d);
        }
    } catch (const std::exception&) {
        // fall through to the error below
    }
    throw ConfigError(where + ": cannot parse value \"" + v + "\" (quote strings)");
}

json parse_value(const std::string& raw, const std::string& where) {
    const std::string v = trim(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ConfigError(where + ": unterminated array");
        json arr = json::array();
        std::string inner = v.substr(1, v.size() - 2);
        std::string cur;
        bool in_str = false;
        for (char c : inner) {
            if (c == '"') in_str = !in_str;
            if (c == ',' && !in_str) {
                if (!trim(cur).empty()) arr.push_back(parse_scalar(cur, where));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty()) arr.push_back(parse_scalar(cur, where));
        return arr;
    }
    return parse_scalar(v, where);
}

}  // namespace

json parse_toml_subset(const std::string& text, const std::string& origin) {
    json root = json::object();
    std::vector<std::string> table;  // current [a.b] path
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3)
                throw ConfigError(where + ": malformed table header");
            if (s[1] == '[') throw ConfigError(where + ": arrays of tables are not supported");
            table = split_dotted(trim(s.substr(1, s.size() - 2)), where);
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key = value");
        std::vector<std::string> key = table;
        for (const auto& part : split_dotted(trim(s.substr(0, eq)), where)) key.push_back(part);
        json* node = &root;
        for (std::size_t i = 0; i + 1 < key.size(); ++i) {
            json& next = (*node)[key[i]];
            if (next.is_null()) next = json::object();
            if (!next.is_object())
                throw ConfigError(where + ": key \"" + key[i] + "\" is both value and table");
            node = &next;
        }
        if (node->contains(key.back()))
            throw ConfigError(where + ": duplicate key \"" + key.back() + "\"");
        (*node)[key.back()] = parse_value(s.substr(eq + 1), where);
    }
    return root;
}

}  // namespace obeskit::pipeline
