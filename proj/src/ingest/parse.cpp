#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "obeskit/core/geo.hpp"
#include "obeskit/ingest.hpp"

namespace obeskit::ingest {

using nlohmann::json;

std::string to_string(DeviceProfile p) {
    switch (p) {
        case DeviceProfile::smartphone: return "smartphone";
        case DeviceProfile::smartwatch: return "smartwatch";
        default: return "unknown";
    }
}

DeviceProfile device_profile_from_string(const std::string& s) {
    if (s == "smartphone") return DeviceProfile::smartphone;
    if (s == "smartwatch") return DeviceProfile::smartwatch;
    return DeviceProfile::unknown;
}

EpochMs SensorStream::first_t() const {
    if (empty()) throw InternalError("first_t on empty stream");
    return kind == StreamKind::accel ? accel.front().t : location.front().t;
}

EpochMs SensorStream::last_t() const {
    if (empty()) throw InternalError("last_t on empty stream");
    return kind == StreamKind::accel ? accel.back().t : location.back().t;
}

namespace {

[[noreturn]] void line_error(const std::string& path, std::size_t line_no, const std::string& what) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

EpochMs get_ms(const json& j, const char* key, const std::string& path, std::size_t line_no) {
    if (!j.contains(key) || !j[key].is_number())
        line_error(path, line_no, std::string("missing or non-numeric \"") + key + "\"");
    return j[key].is_number_integer() ? j[key].get<EpochMs>()
                                      : static_cast<EpochMs>(std::llround(j[key].get<double>()));
}

double get_num(const json& j, const char* key, const std::string& path, std::size_t line_no) {
    if (!j.contains(key) || !j[key].is_number())
        line_error(path, line_no, std::string("missing or non-numeric \"") + key + "\"");
    return j[key].get<double>();
}

void apply_meta(SensorStream& s, const json& meta, double& unit_scale) {
    if (meta.contains("subject")) s.subject_id = meta["subject"].get<std::string>();
    if (meta.contains("device"))
        s.device_profile = device_profile_from_string(meta["device"].get<std::string>());
    if (meta.contains("tz")) s.tz = meta["tz"].get<std::string>();
    if (meta.contains("units")) {
        const std::string u = meta["units"].get<std::string>();
        if (u == "g")
            unit_scale = kGravityMs2;
        else if (u != "ms2")
            throw DataError("unknown units declaration: " + u);
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    for (std::string& f : out) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
    }
    return out;
}

void parse_jsonl(std::istream& in, const std::string& path, StreamKind kind, SensorStream& s,
                 double& unit_scale) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            line_error(path, line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) line_error(path, line_no, "expected a JSON object");
        if (j.contains("meta")) {
            apply_meta(s, j["meta"], unit_scale);
            continue;
        }
        if (kind == StreamKind::accel) {
            AccelSample a;
            a.t = get_ms(j, "t", path, line_no);
            a.x = get_num(j, "x", path, line_no);
            a.y = get_num(j, "y", path, line_no);
            a.z = get_num(j, "z", path, line_no);
            if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(a.z))
                line_error(path, line_no, "non-finite acceleration");
            s.accel.push_back(a);
        } else {
            LocationSample l;
            l.t = get_ms(j, "t", path, line_no);
            l.lat = get_num(j, "lat", path, line_no);
            l.lon = get_num(j, "lon", path, line_no);
            l.accuracy = j.contains("acc") ? get_num(j, "acc", path, line_no) : 0.0;
            if (!geo::valid_lat(l.lat) || !geo::valid_lon(l.lon))
                line_error(path, line_no, "coordinates out of range");
            if (l.accuracy < 0.0) line_error(path, line_no, "negative accuracy");
            s.location.push_back(l);
        }
    }
}

void parse_csv(std::istream& in, const std::string& path, StreamKind kind, SensorStream& s) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    auto col = [&](const char* name) -> int {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };
    int ct = -1, cx = -1, cy = -1, cz = -1, clat = -1, clon = -1, cacc = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> f = split_csv(line);
        if (header.empty()) {
            header = f;
            ct = col("t");
            if (kind == StreamKind::accel) {
                cx = col("x");
                cy = col("y");
                cz = col("z");
                if (ct < 0 || cx < 0 || cy < 0 || cz < 0)
                    line_error(path, line_no, "CSV header must name columns t,x,y,z");
            } else {
                clat = col("lat");
                clon = col("lon");
                cacc = col("acc");
                if (ct < 0 || clat < 0 || clon < 0)
                    line_error(path, line_no, "CSV header must name columns t,lat,lon");
            }
            continue;
        }
        auto field = [&](int idx) -> double {
            if (idx < 0 || idx >= static_cast<int>(f.size()))
                line_error(path, line_no, "missing column");
            try {
                std::size_t used = 0;
                const double v = std::stod(f[idx], &used);
                if (used != f[idx].size()) throw std::invalid_argument("trailing characters");
                return v;
            } catch (const std::exception&) {
                line_error(path, line_no, "non-numeric field: " + f[idx]);
            }
        };
        if (kind == StreamKind::accel) {
            AccelSample a;
            a.t = static_cast<EpochMs>(std::llround(field(ct)));
            a.x = field(cx);
            a.y = field(cy);
            a.z = field(cz);
            if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(a.z))
                line_error(path, line_no, "non-finite acceleration");
            s.accel.push_back(a);
        } else {
            LocationSample l;
            l.t = static_cast<EpochMs>(std::llround(field(ct)));
            l.lat = field(clat);
            l.lon = field(clon);
            l.accuracy = cacc >= 0 ? field(cacc) : 0.0;
            if (!geo::valid_lat(l.lat) || !geo::valid_lon(l.lon))
                line_error(path, line_no, "coordinates out of range");
            s.location.push_back(l);
        }
    }
}

double estimate_rate_hz(const std::vector<EpochMs>& ts) {
    if (ts.size() < 2) return 0.0;
    std::vector<double> dt;
    dt.reserve(ts.size() - 1);
    for (std::size_t i = 1; i < ts.size(); ++i)
        dt.push_back(static_cast<double>(ts[i] - ts[i - 1]));
    std::sort(dt.begin(), dt.end());
    const std::size_t n = dt.size();
    const double med = n % 2 == 1 ? dt[n / 2] : 0.5 * (dt[n / 2 - 1] + dt[n / 2]);
    return med > 0.0 ? 1000.0 / med : 0.0;
}

}  // namespace

SensorStream parse_stream(const std::string& path, StreamKind kind) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);

    SensorStream s;
    s.kind = kind;
    double unit_scale = 1.0;

    bool csv = path.size() > 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    if (!csv && !(path.size() > 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0)) {
        // Sniff: a JSONL stream starts with '{'.
        const int c = in.peek();
        csv = c != '{';
    }
    if (csv)
        parse_csv(in, path, kind, s);
    else
        parse_jsonl(in, path, kind, s, unit_scale);

    if (s.empty()) throw DataError("empty stream: " + path);

    if (kind == StreamKind::accel) {
        if (unit_scale != 1.0)
            for (AccelSample& a : s.accel) {
                a.x *= unit_scale;
                a.y *= unit_scale;
                a.z *= unit_scale;
            }
        std::stable_sort(s.accel.begin(), s.accel.end(),
                         [](const AccelSample& a, const AccelSample& b) { return a.t < b.t; });
        std::vector<AccelSample> dedup;
        dedup.reserve(s.accel.size());
        for (const AccelSample& a : s.accel) {
            if (!dedup.empty() && dedup.back().t == a.t) {
                ++s.duplicates_dropped;
                continue;
            }
            dedup.push_back(a);
        }
        s.accel = std::move(dedup);
        std::vector<EpochMs> ts;
        ts.reserve(s.accel.size());
        for (const AccelSample& a : s.accel) ts.push_back(a.t);
        s.nominal_rate_hz = estimate_rate_hz(ts);
        if (s.nominal_rate_hz > 0.0 && (s.nominal_rate_hz < 5.0 || s.nominal_rate_hz > 25.0)) {
            std::ostringstream w;
            w << "rate-out-of-band: estimated " << s.nominal_rate_hz
              << " Hz outside supported [5, 25] Hz";
            s.warnings.push_back(w.str());
        }
    } else {
        std::stable_sort(
            s.location.begin(), s.location.end(),
            [](const LocationSample& a, const LocationSample& b) { return a.t < b.t; });
        std::vector<LocationSample> dedup;
        dedup.reserve(s.location.size());
        for (const LocationSample& l : s.location) {
            if (!dedup.empty() && dedup.back().t == l.t) {
                ++s.duplicates_dropped;
                continue;
            }
            dedup.push_back(l);
        }
        s.location = std::move(dedup);
        std::vector<EpochMs> ts;
        ts.reserve(s.location.size());
        for (const LocationSample& l : s.location) ts.push_back(l.t);
        s.nominal_rate_hz = estimate_rate_hz(ts);
    }
    return s;
}

void write_stream_jsonl(const SensorStream& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open output file: " + path);
    json meta{{"subject", s.subject_id}, {"tz", s.tz}, {"units", "ms2"}};
    if (s.device_profile != DeviceProfile::unknown)
        meta["device"] = to_string(s.device_profile);
    out << json{{"meta", meta}}.dump() << "\n";
    if (s.kind == StreamKind::accel) {
        for (const AccelSample& a : s.accel)
            out << json{{"t", a.t}, {"x", a.x}, {"y", a.y}, {"z", a.z}}.dump() << "\n";
    } else {
        for (const LocationSample& l : s.location)
            out << json{{"t", l.t}, {"lat", l.lat}, {"lon", l.lon}, {"acc", l.accuracy}}.dump()
                << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace obeskit::ingest
