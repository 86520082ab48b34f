#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "obeskit/location.hpp"

namespace obeskit::location {

std::string to_string(Category c) {
    switch (c) {
        case Category::restaurant: return "restaurant";
        case Category::fast_food: return "fast_food";
        case Category::takeaway: return "takeaway";
        case Category::cafe: return "cafe";
        case Category::bar: return "bar";
        case Category::supermarket_grocery: return "supermarket_grocery";
        case Category::food_outlet: return "food_outlet";
        case Category::wine_liquor: return "wine_liquor";
        case Category::park: return "park";
        case Category::recreation_indoor: return "recreation_indoor";
        case Category::sports_facility: return "sports_facility";
        case Category::school: return "school";
        case Category::home: return "home";
        case Category::other: return "other";
        default: return "unknown";
    }
}

const std::vector<Category>& all_categories() {
    static const std::vector<Category> cats = {
        Category::restaurant,    Category::fast_food,         Category::takeaway,
        Category::cafe,          Category::bar,               Category::supermarket_grocery,
        Category::food_outlet,   Category::wine_liquor,       Category::park,
        Category::recreation_indoor, Category::sports_facility, Category::school,
        Category::home,          Category::other,             Category::unknown};
    return cats;
}

Category category_from_string(const std::string& s) {
    for (Category c : all_categories())
        if (to_string(c) == s) return c;
    throw DataError("unknown place category: " + s);
}

Gazetteer Gazetteer::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open gazetteer: " + path);
    Gazetteer g;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
            f.push_back(cell);
        }
        if (!header_seen) {
            header_seen = true;
            if (f.size() < 4 || f[0] != "place_id")
                throw DataError(path + ":1: gazetteer header must be place_id,lat,lon,category");
            continue;
        }
        if (f.size() < 4)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected 4 columns");
        GazetteerEntry e;
        e.place_id = f[0];
        try {
            e.lat = std::stod(f[1]);
            e.lon = std::stod(f[2]);
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric coordinate");
        }
        if (!geo::valid_lat(e.lat) || !geo::valid_lon(e.lon))
            throw DataError(path + ":" + std::to_string(line_no) + ": coordinates out of range");
        e.category = category_from_string(f[3]);
        if (e.category == Category::home || e.category == Category::unknown)
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": gazetteer may not declare home/unknown");
        g.entries.push_back(std::move(e));
    }
    return g;
}

void Gazetteer::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write gazetteer: " + path);
    out << "place_id,lat,lon,category\n";
    char buf[64];
    for (const GazetteerEntry& e : entries) {
        std::snprintf(buf, sizeof(buf), "%.7f,%.7f", e.lat, e.lon);
        out << e.place_id << "," << buf << "," << to_string(e.category) << "\n";
    }
}

void categorize_poi(PointOfInterest& poi, const Gazetteer& gaz, double match_radius_m) {
    if (!poi.center) throw InternalError("categorize_poi: center already erased");
    if (poi.category == Category::home || poi.category == Category::school) {
        poi.categorized = true;  // labeled by the home/school heuristic; keep it
        return;
    }
    double best_d = std::numeric_limits<double>::infinity();
    const GazetteerEntry* best = nullptr;
    for (const GazetteerEntry& e : gaz.entries) {
        const double d = geo::haversine_m(poi.center->lat, poi.center->lon, e.lat, e.lon);
        if (d > match_radius_m) continue;
        if (d < best_d || (d == best_d && best && e.place_id < best->place_id)) {
            best_d = d;
            best = &e;
        }
    }
    poi.category = best ? best->category : Category::unknown;
    poi.categorized = true;
}

PointOfInterest redact_coordinates(PointOfInterest poi) {
    if (!poi.categorized)
        throw InternalError("redact_coordinates called before categorization");
    poi.center.reset();
    return poi;
}

}  // namespace obeskit::location
