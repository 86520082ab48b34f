#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "obeskit/pipeline.hpp"

namespace {

int fail(int code, const char* kind, const std::string& message) {
    const nlohmann::json err{
        {"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"behavioral-indicator pipeline for accelerometer + location streams"};
    app.require_subcommand(1);

    std::string config_path;
    obeskit::pipeline::CliOverrides ov;
    std::string stage;
    for (const char* name :
         {"simulate", "ingest", "extract", "aggregate", "export", "evaluate"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
        sub->add_option("--config", config_path, "config file (JSON or TOML)")->required();
        sub->add_option("--seed", [&ov](const CLI::results_t& r) {
               try {
                   ov.seed = std::stoull(r[0]);
               } catch (const std::exception&) {
                   return false;  // reported as a conversion error (exit 2)
               }
               return true;
           },
           "override the config seed");
        sub->add_option("--workers", [&ov](const CLI::results_t& r) {
               try {
                   ov.workers = std::stoi(r[0]);
               } catch (const std::exception&) {
                   return false;
               }
               return true;
           },
           "override the worker count");
        sub->add_option("--out", [&ov](const CLI::results_t& r) {
               ov.out_dir = r[0];
               return true;
           },
           "override the output directory");
        sub->callback([&stage, name] { stage = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, "config", e.what());
    }

    try {
        const obeskit::pipeline::Config cfg = obeskit::pipeline::load_config(config_path, ov);
        obeskit::pipeline::run_stage(stage, cfg);
        return 0;
    } catch (const obeskit::ConfigError& e) {
        return fail(2, "config", e.what());
    } catch (const obeskit::DataError& e) {
        return fail(3, "data", e.what());
    } catch (const obeskit::InternalError& e) {
        return fail(4, "internal", e.what());
    } catch (const std::exception& e) {
        return fail(4, "internal", e.what());
    }
}
