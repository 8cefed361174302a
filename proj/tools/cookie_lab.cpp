// Command-line front end: validate-env, identity-suite, exact-kernel, experiment.
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "cookie/runner.hpp"

using namespace cookie;

namespace
{
struct Common
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::optional<std::int64_t> replicas;
    std::string n_grid;
    std::string format = "both";
    std::optional<unsigned> workers;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--config", c.config_path, "config file (key = value lines)");
    app->add_option("--seed", c.seed, "master seed");
    app->add_option("--out", c.out_dir, "output directory");
    app->add_option("--replicas", c.replicas, "replicas per grid point");
    app->add_option("--n-grid", c.n_grid, "grid such as 2^8..2^13 or 100,200");
    app->add_option("--format", c.format, "csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    app->add_option("--workers", c.workers, "worker threads (0 = all cores)");
}

Config merged(Common const& c, Config extra)
{
    Config cfg = c.config_path.empty() ? Config::object() : load_config(c.config_path);
    if (c.seed)
        cfg["seed"] = *c.seed;
    if (c.replicas)
        cfg["replicas"] = *c.replicas;
    if (!c.n_grid.empty())
        cfg["n_grid"] = c.n_grid;
    if (c.workers)
        cfg["workers"] = *c.workers;
    for (auto const& [k, v] : extra.items())
        cfg[k] = v;
    return cfg;
}

int finish(RunOutput const& out, Common const& c, Config const& cfg)
{
    Manifest m;
    m.command = out.command;
    m.config_path = c.config_path;
    m.seed = config_value<std::uint64_t>(cfg, "seed", 1);
    m.out_dir = c.out_dir;
    m.timestamp = utc_timestamp();
    m.version = kToolVersion;
    m.model = model_from_config(cfg).describe();
    m.workers = config_value<unsigned>(cfg, "workers", 1);
    auto format = c.format == "csv"    ? OutputFormat::csv
                  : c.format == "json" ? OutputFormat::json
                                       : OutputFormat::both;
    write_outputs(out, m, c.out_dir, format);
    std::cout << out.report.dump(2) << "\n";
    if (!out.message.empty())
        std::cerr << out.command << ": " << out.message << "\n";
    return out.exit_code;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Excited random walk laboratory"};
    app.require_subcommand(1);

    Common validate_opts, identity_opts, kernel_opts, exp_opts;

    auto* validate = app.add_subcommand("validate-env", "check the model assumptions");
    add_common(validate, validate_opts);

    auto* identity = app.add_subcommand("identity-suite", "run the pathwise identity suite");
    add_common(identity, identity_opts);
    std::optional<std::int64_t> seeds;
    identity->add_option("--seeds", seeds, "number of seeded replicas");

    auto* kernel = app.add_subcommand("exact-kernel", "dump an exact transition law");
    add_common(kernel, kernel_opts);
    std::string kind = "V";
    std::int64_t k = 0, steps = 1;
    kernel->add_option("--kind", kind, "W, Z or V")->check(CLI::IsMember({"W", "Z", "V"}));
    kernel->add_option("--k", k, "current generation size (start for n > 1)");
    kernel->add_option("--n", steps, "number of generations");

    auto* experiment = app.add_subcommand("experiment", "run a named experiment");
    add_common(experiment, exp_opts);
    std::string name;
    std::optional<double> gamma;
    experiment->add_option("name", name, "experiment name")
        ->required()
        ->check(CLI::IsMember(experiment_names()));
    experiment->add_option("--gamma", gamma, "slowdown exponent gamma");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try
    {
        if (*validate)
        {
            auto cfg = merged(validate_opts, Config::object());
            return finish(cmd_validate_env(cfg), validate_opts, cfg);
        }
        if (*identity)
        {
            Config extra = Config::object();
            if (seeds)
                extra["seeds"] = *seeds;
            auto cfg = merged(identity_opts, extra);
            return finish(cmd_identity_suite(cfg), identity_opts, cfg);
        }
        if (*kernel)
        {
            auto cfg = merged(kernel_opts, {{"kind", kind}, {"k", k}, {"n", steps}});
            return finish(cmd_exact_kernel(cfg), kernel_opts, cfg);
        }
        Config extra = Config::object();
        if (gamma)
            extra["gamma"] = *gamma;
        auto cfg = merged(exp_opts, extra);
        return finish(cmd_experiment(name, cfg), exp_opts, cfg);
    }
    catch (ConfigError const& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (std::invalid_argument const& e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAnomaly;
    }
}
