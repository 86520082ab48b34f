// Spawns the real command-line binary (path in argv[1]) and checks exit
// codes and the machine-readable error channel.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_binary;

struct RunResult {
    int code = -1;
    std::string out, err;
};

fs::path work_dir() {
    const fs::path d = fs::temp_directory_path() / "obeskit_cli_smoke";
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunResult run(const std::string& args) {
    const fs::path out_f = work_dir() / "stdout.txt";
    const fs::path err_f = work_dir() / "stderr.txt";
    const std::string cmd =
        g_binary + " " + args + " > " + out_f.string() + " 2> " + err_f.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_f);
    r.err = slurp(err_f);
    return r;
}

// The last stderr line carries a JSON error record on failure.
json error_record(const std::string& err) {
    std::istringstream in(err);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    REQUIRE_FALSE(last.empty());
    return json::parse(last);
}

fs::path write_config(const std::string& name, const json& doc) {
    const fs::path p = work_dir() / name;
    std::ofstream out(p);
    out << doc.dump(2) << "\n";
    return p;
}

json tiny_scenario_config(const fs::path& out_dir) {
    return json{
        {"out_dir", out_dir.string()},
        {"seed", 5},
        {"scenario",
         {{"accel_rate_hz", 20.0},
          {"location_interval_s", 30.0},
          {"subjects",
           json::array({json{
               {"subject_id", "c1"},
               {"start_ms", 1'700'000'000'000},
               {"start_lat", 55.7},
               {"start_lon", 12.55},
               {"blocks", json::array({json{{"kind", "dwell"},
                                            {"duration_s", 600.0},
                                            {"lat", 55.7},
                                            {"lon", 12.55},
                                            {"place_id", "home"}}})},
           }})}}},
    };
}

}  // namespace

TEST_CASE("usage errors exit with the configuration code") {
    CHECK(run("").code == 2);
    CHECK(run("frobnicate --config x.json").code == 2);
    CHECK(run("simulate").code == 2);  // --config is required
    CHECK(run("simulate --config cfg.json --workers abc").code == 2);
}

TEST_CASE("--help prints usage and succeeds") {
    const auto r = run("--help");
    CHECK(r.code == 0);
    CHECK(r.out.find("obeskit") != std::string::npos);
    CHECK(r.out.find("simulate") != std::string::npos);
}

TEST_CASE("config problems exit 2 with a JSON error record") {
    const auto missing = run("simulate --config " + (work_dir() / "no_such.json").string());
    CHECK(missing.code == 2);
    auto rec = error_record(missing.err);
    CHECK(rec.at("error").at("code") == 2);
    CHECK(rec.at("error").at("kind") == "config");

    const fs::path bad_key = write_config("bad_key.json", json{{"no_such_key", 1}});
    const auto r = run("simulate --config " + bad_key.string());
    CHECK(r.code == 2);
    rec = error_record(r.err);
    CHECK(rec.at("error").at("kind") == "config");
    CHECK(rec.at("error").at("message").get<std::string>().find("no_such_key") !=
          std::string::npos);

    // A valid config but nothing to simulate is also a configuration problem.
    const fs::path empty_scn =
        write_config("empty_scenario.json", json{{"out_dir", (work_dir() / "e").string()}});
    CHECK(run("simulate --config " + empty_scn.string()).code == 2);
}

TEST_CASE("missing stage dependencies exit 3 with a data error record") {
    const fs::path dir = work_dir() / "no_deps";
    fs::remove_all(dir);
    const fs::path cfg = write_config("no_deps.json", json{{"out_dir", dir.string()}});
    const auto r = run("extract --config " + cfg.string());
    CHECK(r.code == 3);
    const auto rec = error_record(r.err);
    CHECK(rec.at("error").at("code") == 3);
    CHECK(rec.at("error").at("kind") == "data");
    CHECK(rec.at("error").at("message").get<std::string>().find("ingest") != std::string::npos);
}

TEST_CASE("a small simulate/ingest run exits 0 and honors overrides") {
    const fs::path dir = work_dir() / "ok_run";
    fs::remove_all(dir);
    const fs::path cfg = write_config("ok.json", tiny_scenario_config(dir));

    const auto sim = run("simulate --config " + cfg.string() + " --seed 7 --workers 2");
    CHECK(sim.code == 0);
    CHECK(fs::exists(dir / "sim" / "c1" / "accel.jsonl"));

    const auto ing = run("ingest --config " + cfg.string() + " --seed 7 --workers 2");
    CHECK(ing.code == 0);
    CHECK(fs::exists(dir / "ingest" / "c1" / "coverage.json"));

    // --out redirects every artifact root.
    const fs::path moved = work_dir() / "moved_run";
    fs::remove_all(moved);
    const auto redirected =
        run("simulate --config " + cfg.string() + " --out " + moved.string());
    CHECK(redirected.code == 0);
    CHECK(fs::exists(moved / "sim" / "c1" / "accel.jsonl"));
}

int main(int argc, char** argv) {
    if (argc > 1) g_binary = argv[1];
    if (g_binary.empty()) {
        std::fprintf(stderr, "usage: cli_smoke <path-to-obeskit-binary>\n");
        return 1;
    }
    doctest::Context ctx;
    return ctx.run();
}
