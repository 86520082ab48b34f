#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "obeskit/geoagg.hpp"

using namespace obeskit;
namespace fs = std::filesystem;

namespace {

// Independent oracle: textbook interval-bisection geohash encoder.
std::string oracle_encode(double lat, double lon, int precision) {
    static const char* alphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
    double lat_lo = -90.0, lat_hi = 90.0, lon_lo = -180.0, lon_hi = 180.0;
    std::string out;
    int bit = 0, idx = 0;
    bool even = true;  // start with longitude
    while (static_cast<int>(out.size()) < precision) {
        if (even) {
            const double mid = (lon_lo + lon_hi) / 2.0;
            if (lon >= mid) {
                idx = idx * 2 + 1;
                lon_lo = mid;
            } else {
                idx = idx * 2;
                lon_hi = mid;
            }
        } else {
            const double mid = (lat_lo + lat_hi) / 2.0;
            if (lat >= mid) {
                idx = idx * 2 + 1;
                lat_lo = mid;
            } else {
                idx = idx * 2;
                lat_hi = mid;
            }
        }
        even = !even;
        if (++bit == 5) {
            out.push_back(alphabet[idx]);
            bit = 0;
            idx = 0;
        }
    }
    return out;
}

geoagg::GeohashVote vote(const std::string& gh, const std::string& voter, EpochMs t0,
                         EpochMs t1, std::map<std::string, double> payload = {}) {
    geoagg::GeohashVote v;
    v.gh = gh;
    v.voter = voter;
    v.t0 = t0;
    v.t1 = t1;
    v.payload = std::move(payload);
    return v;
}

fs::path tmp_file(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "obeskit_test_geoagg";
    fs::create_directories(d);
    return d / name;
}

}  // namespace

TEST_CASE("geohash: reference point and validation") {
    CHECK(geoagg::geohash_encode(57.64911, 10.40744, 11) == "u4pruydqqvj");
    CHECK(geoagg::geohash_encode(57.64911, 10.40744, 5) == "u4pru");
    CHECK_THROWS_AS(geoagg::geohash_encode(91.0, 0.0, 6), DataError);
    CHECK_THROWS_AS(geoagg::geohash_encode(0.0, 181.0, 6), DataError);
    CHECK_THROWS_AS(geoagg::geohash_encode(0.0, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(geoagg::geohash_encode(0.0, 0.0, 13), ConfigError);
    CHECK(geoagg::geohash_valid("u4pruydqqvj"));
    CHECK_FALSE(geoagg::geohash_valid("u4pAu"));  // uppercase not in alphabet
    CHECK_FALSE(geoagg::geohash_valid("u4pia"));  // 'i' excluded
    CHECK_FALSE(geoagg::geohash_valid(""));
}

TEST_CASE("geohash: matches an independent bisection oracle on random points") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ulat(-90.0, 90.0), ulon(-180.0, 180.0);
    std::uniform_int_distribution<int> uprec(1, 12);
    for (int i = 0; i < 2000; ++i) {
        const double lat = ulat(rng), lon = ulon(rng);
        const int p = uprec(rng);
        REQUIRE(geoagg::geohash_encode(lat, lon, p) == oracle_encode(lat, lon, p));
    }
}

TEST_CASE("geohash: prefix property and box containment") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> ulat(-90.0, 90.0), ulon(-180.0, 180.0);
    for (int i = 0; i < 500; ++i) {
        const double lat = ulat(rng), lon = ulon(rng);
        const std::string full = geoagg::geohash_encode(lat, lon, 12);
        for (int p = 1; p < 12; ++p)
            REQUIRE(geoagg::geohash_encode(lat, lon, p) == full.substr(0, p));
        REQUIRE(geoagg::geohash_decode(full).contains(lat, lon));
        REQUIRE(geoagg::geohash_decode(full.substr(0, 4)).contains(lat, lon));
    }
}

TEST_CASE("geohash: decode→encode is a fixed point for random codes") {
    static const std::string alphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> len(1, 12), pick(0, 31);
    for (int i = 0; i < 500; ++i) {
        std::string code;
        const int n = len(rng);
        for (int k = 0; k < n; ++k) code.push_back(alphabet[pick(rng)]);
        const geoagg::GeohashBox box = geoagg::geohash_decode(code);
        REQUIRE(geoagg::geohash_encode(box.center_lat(), box.center_lon(), n) == code);
    }
    CHECK_THROWS_AS(geoagg::geohash_decode("ab!c"), DataError);
}

TEST_CASE("vote store: idempotent casts, distinct visits, validation") {
    geoagg::VoteStore store;
    CHECK(store.cast(vote("u4pru", "voterA", 0, 600'000)));
    CHECK_FALSE(store.cast(vote("u4pru", "voterA", 0, 600'000)));  // same visit again
    CHECK(store.size() == 1);
    CHECK(store.cast(vote("u4pru", "voterA", 86'400'000, 87'000'000)));  // next day
    CHECK(store.size() == 2);
    CHECK(store.cast(vote("u4pru", "voterB", 0, 600'000)));  // other voter
    CHECK(store.size() == 3);

    CHECK_THROWS_AS(store.cast(vote("", "v", 0, 1)), DataError);
    CHECK_THROWS_AS(store.cast(vote("u4pAu", "v", 0, 1)), DataError);  // invalid code
    CHECK_THROWS_AS(store.cast(vote("u4pru", "", 0, 1)), DataError);
    CHECK_THROWS_AS(store.cast(vote("u4pru", "v", 5, 5)), DataError);  // empty interval
    CHECK_THROWS_AS(store.cast(vote("u4pru", "v", 0, 1, {{"lat", 57.0}})), DataError);
    CHECK_THROWS_AS(store.cast(vote("u4pru", "v", 0, 1, {{"subject_id", 9.0}})), DataError);
}

TEST_CASE("vote log: JSONL schema, payload hygiene, reload round-trip") {
    const fs::path log = tmp_file("votes.jsonl");
    {
        geoagg::VoteStore store(log.string());
        store.cast(vote("u4pruyd", "cafe01", 1'000, 700'000, {{"steps_per_hour", 420.0}}));
        store.cast(vote("u4pruye", "cafe02", 2'000, 800'000, {{"counts_per_min", 77.5}}));
        store.cast(vote("u4pruyd", "cafe01", 1'000, 700'000));  // duplicate, not logged
    }
    std::ifstream in(log);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        const auto j = nlohmann::json::parse(line);
        REQUIRE(j.contains("gh"));
        REQUIRE(j.contains("voter"));
        REQUIRE(j.contains("t0"));
        REQUIRE(j.contains("t1"));
        REQUIRE(j.contains("payload"));
        CHECK(line.find("\"lat\"") == std::string::npos);
        CHECK(line.find("\"lon\"") == std::string::npos);
        CHECK(line.find("subject_id") == std::string::npos);
    }
    CHECK(lines == 2);

    const auto reloaded = geoagg::VoteStore::load(log.string());
    CHECK(reloaded.size() == 2);
    const auto votes = reloaded.snapshot();
    CHECK(votes[0].payload.at("steps_per_hour") == doctest::Approx(420.0));
}

TEST_CASE("individual aggregation: normalization, filtering, undefined case") {
    std::vector<geoagg::DayRecord> days;
    days.push_back({"2026-03-01", 10.0, {{"steps", 600.0}}});
    days.push_back({"2026-03-02", 12.0, {{"steps", 1200.0}}});
    days.push_back({"2026-03-03", 5.0, {{"steps", 9999.0}}});  // below the 8 h floor
    const auto agg = geoagg::aggregate_individual(days, 8.0);
    REQUIRE(agg.defined);
    CHECK(agg.n_days == 2);
    CHECK(agg.per_hour_mean.at("steps") == doctest::Approx(80.0));  // (60 + 100) / 2
    CHECK(agg.daily_mean.at("steps") == doctest::Approx(900.0));

    const auto none = geoagg::aggregate_individual({{"2026-03-03", 5.0, {}}}, 8.0);
    CHECK_FALSE(none.defined);
    CHECK_FALSE(none.reason.empty());
}

TEST_CASE("population aggregation: publish/suppress, mean-sum consistency") {
    std::vector<geoagg::GeohashVote> votes;
    votes.push_back(vote("u4pruyd", "v1", 0, 1'000, {{"steps_per_hour", 2.0}}));
    votes.push_back(vote("u4pruyd", "v2", 0, 1'000, {{"steps_per_hour", 4.0}}));
    geoagg::AggregateConfig cfg;
    cfg.k_anon = 2;
    const auto cells = geoagg::aggregate_population(votes, 7, cfg);
    REQUIRE(cells.size() == 1);
    CHECK_FALSE(cells[0].suppressed);
    CHECK(cells[0].n_voters == 2);
    CHECK(cells[0].stats.at("steps_per_hour").mean == doctest::Approx(3.0));

    votes.push_back(vote("u4pruyd", "v3", 5'000, 9'000, {{"steps_per_hour", 6.0}}));
    cfg.k_anon = 5;
    const auto cells2 = geoagg::aggregate_population(votes, 7, cfg);
    REQUIRE(cells2.size() == 1);
    CHECK(cells2[0].suppressed);           // 3 voters < 5
    CHECK(cells2[0].n_voters == 3);
    CHECK(cells2[0].stats.count("steps_per_hour") == 1);  // kept internally

    for (const auto& [name, st] : cells2[0].stats)
        CHECK(st.mean * static_cast<double>(st.n) == doctest::Approx(st.sum).epsilon(1e-9));
}

TEST_CASE("population aggregation: child cells roll up to their parent exactly") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> ulat(57.0, 57.2), ulon(10.0, 10.2), val(0.0, 500.0);
    std::uniform_int_distribution<int> nv(1, 9);
    std::vector<geoagg::GeohashVote> votes;
    for (int i = 0; i < 300; ++i) {
        const std::string gh = geoagg::geohash_encode(ulat(rng), ulon(rng), 7);
        votes.push_back(vote(gh, "voter" + std::to_string(nv(rng)),
                             static_cast<EpochMs>(i) * 10'000,
                             static_cast<EpochMs>(i) * 10'000 + 5'000,
                             {{"x", val(rng)}}));
    }
    geoagg::AggregateConfig cfg;
    cfg.k_anon = 1;
    const auto fine = geoagg::aggregate_population(votes, 6, cfg);
    const auto coarse = geoagg::aggregate_population(votes, 5, cfg);
    for (const auto& parent : coarse) {
        double child_sum = 0.0;
        std::size_t child_votes = 0;
        for (const auto& child : fine)
            if (child.gh.compare(0, 5, parent.gh) == 0) {
                child_sum += child.stats.at("x").sum;
                child_votes += child.n_votes;
            }
        REQUIRE(parent.n_votes == child_votes);
        REQUIRE(parent.stats.at("x").sum == doctest::Approx(child_sum).epsilon(1e-12));
    }
}

TEST_CASE("population aggregation: raising k_anon only shrinks the published set") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ulat(57.0, 57.05), ulon(10.0, 10.05);
    std::uniform_int_distribution<int> nv(1, 12);
    std::vector<geoagg::GeohashVote> votes;
    for (int i = 0; i < 200; ++i)
        votes.push_back(vote(geoagg::geohash_encode(ulat(rng), ulon(rng), 6),
                             "v" + std::to_string(nv(rng)), i, i + 1000));
    std::set<std::string> prev_published;
    bool first = true;
    for (std::size_t k = 1; k <= 8; ++k) {
        geoagg::AggregateConfig cfg;
        cfg.k_anon = k;
        std::set<std::string> published;
        for (const auto& c : geoagg::aggregate_population(votes, 6, cfg))
            if (!c.suppressed) published.insert(c.gh);
        if (!first)
            for (const auto& gh : published) REQUIRE(prev_published.count(gh) == 1);
        prev_published = std::move(published);
        first = false;
    }
}

TEST_CASE("population aggregation: histograms match a brute-force tally") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> val(-10.0, 110.0);
    std::vector<geoagg::GeohashVote> votes;
    std::vector<double> raw;
    for (int i = 0; i < 500; ++i) {
        const double x = val(rng);
        raw.push_back(x);
        votes.push_back(vote("u4pruyd", "v" + std::to_string(i % 11), i * 100,
                             i * 100 + 50, {{"load", x}}));
    }
    geoagg::AggregateConfig cfg;
    cfg.k_anon = 1;
    cfg.hist_edges["load"] = {0.0, 25.0, 50.0, 75.0, 100.0};
    const auto cells = geoagg::aggregate_population(votes, 7, cfg);
    REQUIRE(cells.size() == 1);
    const auto& st = cells[0].stats.at("load");
    REQUIRE(st.hist.size() == 4);
    std::vector<std::size_t> expect(4, 0);
    for (double x : raw) {
        if (x < 0.0 || x > 100.0) continue;  // out-of-range values fall outside all bins
        std::size_t b = x >= 100.0 ? 3 : static_cast<std::size_t>(x / 25.0);
        ++expect[b];
    }
    CHECK(st.hist == expect);
}

TEST_CASE("population aggregation: precision bounds and short votes rejected") {
    geoagg::AggregateConfig cfg;
    CHECK_THROWS_AS(geoagg::aggregate_population({}, 0, cfg), ConfigError);
    CHECK_THROWS_AS(geoagg::aggregate_population({}, 13, cfg), ConfigError);
    const std::vector<geoagg::GeohashVote> votes{vote("u4p", "v", 0, 1)};
    CHECK_THROWS_AS(geoagg::aggregate_population(votes, 7, cfg), DataError);
}

TEST_CASE("mobility graph: probabilities, distances, and degenerate cases") {
    using geoagg::TransitionRef;
    using geoagg::VisitRef;
    std::vector<VisitRef> visits;
    const geo::LatLon home{55.70, 12.50}, school{55.71, 12.52}, park{55.69, 12.51};
    // home→school ×4, home→park ×1 interleaved with returns.
    const std::vector<std::pair<std::string, geo::LatLon>> seq{
        {"home", home}, {"school", school}, {"home", home}, {"school", school},
        {"home", home}, {"school", school}, {"home", home}, {"school", school},
        {"home", home}, {"park", park}};
    for (std::size_t i = 0; i < seq.size(); ++i) {
        VisitRef v;
        v.category = seq[i].first;
        v.arrive = static_cast<EpochMs>(i) * 3'600'000;
        v.depart = v.arrive + 1'800'000;
        v.center = seq[i].second;
        visits.push_back(v);
    }
    std::vector<TransitionRef> transitions;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        TransitionRef t;
        t.from_visit = i;
        t.to_visit = i + 1;
        t.dominant_mode = i % 2 == 0 ? "walk_run" : "bike";
        transitions.push_back(t);
    }
    const auto g = geoagg::build_mobility_graph(visits, transitions);
    REQUIRE(g.nodes.size() == 3);
    double p_home_school = 0.0, p_home_park = 0.0;
    for (const auto& e : g.edges) {
        if (e.from == "home" && e.to == "school") {
            p_home_school = e.probability;
            CHECK(e.count == 4);
            CHECK(e.mean_distance_m ==
                  doctest::Approx(geo::haversine_m(home, school)).epsilon(1e-9));
            double share = 0.0;
            for (const auto& [mode, s] : e.mode_share) share += s;
            CHECK(share == doctest::Approx(1.0).epsilon(1e-9));
        }
        if (e.from == "home" && e.to == "park") p_home_park = e.probability;
    }
    CHECK(p_home_school == doctest::Approx(0.8));
    CHECK(p_home_park == doctest::Approx(0.2));

    // Row stochasticity on a random history.
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> cat(0, 4);
    std::vector<VisitRef> rv;
    for (int i = 0; i < 60; ++i) {
        VisitRef v;
        v.category = "c" + std::to_string(cat(rng));
        v.arrive = static_cast<EpochMs>(i) * 1'000'000;
        v.depart = v.arrive + 500'000;
        rv.push_back(v);
    }
    std::vector<TransitionRef> rt;
    for (std::size_t i = 0; i + 1 < rv.size(); ++i) rt.push_back({i, i + 1, "car"});
    const auto rg = geoagg::build_mobility_graph(rv, rt);
    std::map<std::string, double> row_sum;
    for (const auto& e : rg.edges) row_sum[e.from] += e.probability;
    for (const auto& [from, p] : row_sum) REQUIRE(p == doctest::Approx(1.0).epsilon(1e-9));

    // Single visit, no transitions.
    const auto lone = geoagg::build_mobility_graph({rv[0]}, {});
    CHECK(lone.nodes.size() == 1);
    CHECK(lone.edges.empty());
    CHECK(lone.nodes[0].visits == 1);
}

TEST_CASE("indicator catalog: row census and the two anchored entries") {
    const auto& cat = geoagg::indicator_catalog();
    CHECK(cat.size() >= 30);
    std::set<std::string> names;
    bool hourly_steps = false, mode_dist = false;
    for (const auto& e : cat) {
        REQUIRE(names.insert(e.name).second);  // unique names
        REQUIRE(!e.axes.empty());
        REQUIRE(!e.sensors.empty());
        if (e.name == "avg_hourly_steps") {
            hourly_steps = true;
            CHECK(e.axes.size() == 2);  // visitor + vote
            CHECK(e.sensors.size() == 1);
            CHECK(e.sensors[0] == geoagg::Sensor::acc);
        }
        if (e.name == "transport_mode_distribution") {
            mode_dist = true;
            CHECK(e.axes.size() == 3);  // resident + visitor + vote
        }
    }
    CHECK(hourly_steps);
    CHECK(mode_dist);
}

TEST_CASE("exports: suppressed cells are absent; formats parse") {
    std::vector<geoagg::AggregateCell> cells(2);
    cells[0].gh = "u4pruyd";
    cells[0].n_votes = 6;
    cells[0].n_voters = 6;
    cells[0].stats["steps_per_hour"] = {1200.0, 6, 200.0, {}, {}};
    cells[1].gh = "u4pruye";
    cells[1].n_votes = 2;
    cells[1].n_voters = 2;
    cells[1].suppressed = true;
    cells[1].stats["steps_per_hour"] = {100.0, 2, 50.0, {}, {}};

    const std::string geojson = geoagg::cells_to_geojson(cells);
    const auto j = nlohmann::json::parse(geojson);
    CHECK(j.at("type") == "FeatureCollection");
    REQUIRE(j.at("features").size() == 1);
    const auto& f = j.at("features")[0];
    CHECK(f.at("properties").at("geohash") == "u4pruyd");
    CHECK(f.at("properties").at("steps_per_hour_mean") == doctest::Approx(200.0));
    const auto& ring = f.at("geometry").at("coordinates")[0];
    REQUIRE(ring.size() == 5);
    CHECK(ring[0] == ring[4]);  // closed polygon
    CHECK(geojson.find("u4pruye") == std::string::npos);

    const std::string csv = geoagg::cells_to_csv(cells);
    CHECK(csv.find("geohash,n_votes,n_voters") == 0);
    CHECK(csv.find("u4pruyd") != std::string::npos);
    CHECK(csv.find("u4pruye") == std::string::npos);
}
