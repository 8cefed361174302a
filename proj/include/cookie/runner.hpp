#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cookie/config.hpp"
#include "cookie/report.hpp"

namespace cookie
{

inline constexpr char const* kToolVersion = "cookie_lab 0.1.0";

//! Exit codes shared by every command.
enum ExitCode : int
{
    kExitOk = 0,
    kExitConfig = 1,
    kExitVerdict = 2,
    kExitAnomaly = 3,
};

//! Everything a command produces before anything touches the disk.
struct RunOutput
{
    std::string command;
    nlohmann::json report = nlohmann::json::object();
    std::vector<Table> tables;
    std::vector<Series> series;
    int exit_code = kExitOk;
    std::string message;
};

inline std::vector<std::string> const& experiment_names()
{
    static std::vector<std::string> const names{
        "slowdown-T", "slowdown-X", "regen", "ld",
        "heavytail", "diffusion-convergence", "hitting-profile"};
    return names;
}

/*!
 * Commands. Each reads `seed` and `workers` plus its own keys from the config
 * and throws ConfigError (or std::invalid_argument) on bad input.
 */
RunOutput cmd_validate_env(Config const& cfg);
RunOutput cmd_identity_suite(Config const& cfg);
RunOutput cmd_exact_kernel(Config const& cfg);
RunOutput cmd_experiment(std::string const& name, Config const& cfg);

enum class OutputFormat
{
    csv,
    json,
    both,
};

/*!
 * Write the artifacts of one run under `dir`: <stem>.json, <table>.csv and
 * <series>.dat, each atomically. Every file starts with the manifest.
 */
void write_outputs(RunOutput const& out, Manifest const& manifest,
                   std::filesystem::path const& dir, OutputFormat format);

}  // namespace cookie
