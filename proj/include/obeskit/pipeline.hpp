#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "obeskit/common.hpp"

namespace obeskit::pipeline {

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
};

// Effective configuration: file values deep-merged over documented
// defaults, CLI flags on top. `hash` identifies the run configuration and
// is stamped into every artifact.
struct Config {
    nlohmann::json doc;
    std::string hash;

    std::uint64_t seed() const { return doc.at("seed").get<std::uint64_t>(); }
    int workers() const { return doc.at("workers").get<int>(); }
    std::string out_dir() const { return doc.at("out_dir").get<std::string>(); }
};

// Documented defaults for every parameter.
nlohmann::json default_config();

// Strict merge: unknown keys and type mismatches are config errors.
Config config_from_json(const nlohmann::json& user, const CliOverrides& ov = {});

// Accepts JSON or a TOML subset (tables, dotted keys, scalars, flat
// arrays); the format is sniffed from the extension, then the content.
Config load_config(const std::string& path, const CliOverrides& ov = {});

nlohmann::json parse_toml_subset(const std::string& text, const std::string& origin);

// Stages: simulate | ingest | extract | aggregate | export | evaluate.
// Throws ConfigError/DataError/InternalError; the CLI maps them to exit
// codes 2/3/4.
void run_stage(const std::string& stage, const Config& cfg);

}  // namespace obeskit::pipeline
