#include "cookie/runner.hpp"

#include <cmath>
#include <stdexcept>

#include "cookie/diffusion.hpp"
#include "cookie/experiments.hpp"
#include "cookie/heavytail.hpp"
#include "cookie/identity.hpp"
#include "cookie/kernel.hpp"

namespace cookie
{
namespace
{
using nlohmann::json;

std::string num(double x) { return format_number(x); }
std::string num(std::int64_t x) { return format_number(x); }

RandomField field_from(Config const& cfg)
{
    return RandomField(config_value<std::uint64_t>(cfg, "seed", 1));
}

unsigned workers_from(Config const& cfg)
{
    auto w = config_value<std::int64_t>(cfg, "workers", 1);
    if (w < 0)
        throw ConfigError("workers must be nonnegative");
    return static_cast<unsigned>(w);
}

std::vector<std::int64_t> grid_from(Config const& cfg, std::string const& key,
                                    std::string const& fallback)
{
    auto it = cfg.find(key);
    return it == cfg.end() ? parse_n_grid_text(fallback) : parse_n_grid(*it);
}

std::vector<double> thresholds_from(Config const& cfg, std::string const& key,
                                    std::string const& fallback)
{
    auto grid = grid_from(cfg, key, fallback);
    return {grid.begin(), grid.end()};
}

std::vector<std::int64_t> replicas_from(Config const& cfg)
{
    auto it = cfg.find("replicas");
    if (it == cfg.end() || it->is_null())
        return {};
    if (it->is_number_integer())
        return {it->get<std::int64_t>()};
    return config_value<std::vector<std::int64_t>>(cfg, "replicas", {});
}

json fit_json(TailEstimate const& t)
{
    json pts = json::array();
    for (std::size_t i = 0; i < t.points.size(); ++i)
    {
        auto const& p = t.points[i];
        pts.push_back({{"n", p.n}, {"p_hat", p.p_hat}, {"se", p.se},
                       {"replicas", p.replicas}, {"successes", p.successes},
                       {"ci", {p.ci.lo, p.ci.hi}}, {"prefactor", t.prefactors[i]}});
    }
    json j{{"label", t.label}, {"points", pts}, {"target", t.target},
           {"tolerance", t.tolerance}, {"verdict", t.verdict ? "pass" : "fail"},
           {"fitted", t.fitted}};
    if (t.fitted)
    {
        j["slope"] = t.fit.slope;
        j["slope_se"] = t.fit.slope_se;
        j["slope_ci"] = {t.fit.ci.lo, t.fit.ci.hi};
        j["intercept"] = t.fit.intercept;
        j["points_used"] = t.fit.used;
        j["points_dropped"] = t.fit.dropped;
    }
    return j;
}

void add_tail(RunOutput& out, TailEstimate const& t, Table& table)
{
    for (std::size_t i = 0; i < t.points.size(); ++i)
    {
        auto const& p = t.points[i];
        table.rows.push_back({t.label, num(p.n), num(p.p_hat), num(p.se),
                              num(p.replicas), num(p.successes), num(p.ci.lo),
                              num(p.ci.hi), num(t.prefactors[i])});
    }
    Series s{t.label, {}};
    for (auto const& p : t.points)
        if (p.p_hat > 0)
            s.points.emplace_back(p.n, p.p_hat);
    out.series.push_back(std::move(s));
}

Table tail_table(std::string name)
{
    return Table{std::move(name),
                 {"label", "n", "p_hat", "se", "replicas", "successes", "ci_lo",
                  "ci_hi", "prefactor"},
                 {}};
}

Table fit_table(std::vector<TailEstimate const*> const& tails)
{
    Table t{"fit", {"label", "slope", "slope_se", "ci_lo", "ci_hi", "target",
                    "tolerance", "verdict"}, {}};
    for (auto const* e : tails)
        t.rows.push_back({e->label, e->fitted ? num(e->fit.slope) : "nan",
                          e->fitted ? num(e->fit.slope_se) : "nan",
                          e->fitted ? num(e->fit.ci.lo) : "nan",
                          e->fitted ? num(e->fit.ci.hi) : "nan", num(e->target),
                          num(e->tolerance), e->verdict ? "pass" : "fail"});
    return t;
}

ExperimentConfig experiment_config(Config const& cfg, double default_tolerance)
{
    ExperimentConfig ec;
    ec.gamma = config_value<double>(cfg, "gamma", 0.3);
    ec.n_grid = grid_from(cfg, "n_grid", "2^8..2^13");
    ec.replicas = replicas_from(cfg);
    ec.tolerance = config_value<double>(cfg, "tolerance", default_tolerance);
    ec.workers = workers_from(cfg);
    ec.min_successes = config_value<std::int64_t>(cfg, "min_successes", 200);
    ec.pilot_replicas = config_value<std::int64_t>(cfg, "pilot_replicas", 20'000);
    ec.max_replicas = config_value<std::int64_t>(cfg, "max_replicas", 20'000'000);
    return ec;
}

RunOutput slowdown(SlowdownEvent event, Config const& cfg)
{
    auto model = model_from_config(cfg);
    auto ec = experiment_config(cfg, event == SlowdownEvent::T ? 0.15 : 0.10);
    auto res = slowdown_experiment(model, event, ec, field_from(cfg));

    RunOutput out;
    out.command = event == SlowdownEvent::T ? "slowdown-T" : "slowdown-X";
    out.report["gamma"] = ec.gamma;
    out.report["delta"] = model.delta();
    out.report["level"] = json::array();
    for (auto const& e : res.estimates)
        out.report["level"].push_back({{"n", e.n}, {"floor_n_gamma", e.level.value},
                                       {"exact_power", e.level.exact}});
    out.report["tail"] = fit_json(res.tail);
    out.report["contradictions"] = res.contradictions;
    if (res.pilot_successes >= 0)
        out.report["pilot"] = {{"successes", res.pilot_successes},
                               {"trials", res.pilot_trials}};

    auto table = tail_table(out.command);
    add_tail(out, res.tail, table);
    out.tables.push_back(std::move(table));
    out.tables.push_back(fit_table({&res.tail}));

    if (config_value<bool>(cfg, "per_replica", false))
    {
        // Per-replica rows need the outcomes; rerun the smallest grid point only
        // when asked, so the default artifacts stay small.
        SlowdownOptions opts;
        opts.mode = event == SlowdownEvent::T ? SlowdownMode::t_only : SlowdownMode::both;
        opts.workers = ec.workers;
        opts.keep_outcomes = true;
        Table rows{"replicas", {"model_id", "seed", "n", "gamma", "event_T", "event_X",
                                "T_value_or_budget", "X_n"}, {}};
        for (std::size_t i = 0; i < res.estimates.size(); ++i)
        {
            opts.replica_offset = i * (std::uint64_t{1} << 40);
            auto est = slowdown_event_mc(model, ec.gamma, res.estimates[i].n,
                                         res.estimates[i].replicas, field_from(cfg), opts);
            for (auto const& o : est.outcomes)
                rows.rows.push_back({model.name().empty() ? "model" : model.name(),
                                     std::to_string(o.seed), num(est.n), num(ec.gamma),
                                     o.event_t ? "1" : "0",
                                     o.ran_full ? (o.event_x ? "1" : "0") : "",
                                     num(o.t_value), o.ran_full ? num(o.x_n) : ""});
        }
        out.tables.push_back(std::move(rows));
    }

    if (res.contradictions > 0)
    {
        out.exit_code = kExitAnomaly;
        out.message = "event contradictions detected";
    }
    else if (!res.tail.verdict)
    {
        out.exit_code = kExitVerdict;
        out.message = "slope outside tolerance";
    }
    return out;
}

RunOutput regen(Config const& cfg)
{
    auto model = model_from_config(cfg);
    auto res = regeneration_exponents(
        model, field_from(cfg), config_value<std::int64_t>(cfg, "cycles", 1'000'000),
        thresholds_from(cfg, "r_grid", "2^5..2^11"),
        thresholds_from(cfg, "s_grid", "2^5..2^11"),
        config_value<double>(cfg, "r_tolerance", 0.2),
        config_value<double>(cfg, "s_tolerance", 0.15), workers_from(cfg));
    RunOutput out;
    out.command = "regen";
    out.report["delta"] = model.delta();
    out.report["cycles"] = res.cycles;
    out.report["r1_tail"] = fit_json(res.r1);
    out.report["S1_tail"] = fit_json(res.s1);
    out.report["r_bar"] = {{"mean", res.r_bar.mean}, {"se", res.r_bar.se},
                           {"ci", {res.r_bar.mean - kZ95 * res.r_bar.se,
                                   res.r_bar.mean + kZ95 * res.r_bar.se}}};
    out.report["lag1_autocorrelation"] = res.lag1;
    out.report["budget_exceeded"] = res.budget_exceeded;
    out.report["max_r1"] = res.max_r1;
    auto table = tail_table("regen");
    add_tail(out, res.r1, table);
    add_tail(out, res.s1, table);
    out.tables.push_back(std::move(table));
    out.tables.push_back(fit_table({&res.r1, &res.s1}));
    if (res.budget_exceeded > 0)
    {
        out.exit_code = kExitAnomaly;
        out.message = "cycle budget exceeded";
    }
    else if (!res.r1.verdict || !res.s1.verdict)
    {
        out.exit_code = kExitVerdict;
        out.message = "tail slope outside tolerance";
    }
    return out;
}

RunOutput hitting(Config const& cfg)
{
    auto model = model_from_config(cfg);
    auto res = hitting_profile_experiment(
        model, field_from(cfg), config_value<std::int64_t>(cfg, "m", 5),
        config_value<std::int64_t>(cfg, "ell", 3),
        config_value<int>(cfg, "offset_lo", 2), config_value<int>(cfg, "offset_hi", 6),
        config_value<std::int64_t>(cfg, "replicas", 1'000'000),
        config_value<double>(cfg, "tolerance", 0.3), workers_from(cfg));
    RunOutput out;
    out.command = "hitting-profile";
    out.report["delta"] = model.delta();
    out.report["m"] = res.profile.m;
    out.report["ell"] = res.profile.ell;
    out.report["tail"] = fit_json(res.tail);
    out.report["ratios"] = res.profile.ratios();
    out.report["ratio_reference"] = std::pow(2.0, model.delta() + 1);
    Table profile{"profile", {"u", "p_hat", "se", "successes", "replicas", "ci_lo",
                              "ci_hi"}, {}};
    for (std::size_t j = 0; j < res.profile.estimates.size(); ++j)
    {
        auto const& e = res.profile.estimates[j];
        profile.rows.push_back({num(res.profile.m + static_cast<std::int64_t>(j)),
                                num(e.p_hat), num(e.se), num(e.successes),
                                num(e.trials), num(e.lo), num(e.hi)});
    }
    out.tables.push_back(std::move(profile));
    auto table = tail_table("hitting");
    add_tail(out, res.tail, table);
    out.tables.push_back(std::move(table));
    out.tables.push_back(fit_table({&res.tail}));
    if (!res.tail.verdict)
    {
        out.exit_code = kExitVerdict;
        out.message = "profile slope outside tolerance";
    }
    return out;
}

RunOutput ld(Config const& cfg)
{
    auto model = model_from_config(cfg);
    auto ec = experiment_config(cfg, 0.15);
    auto res = ld_slowdown_experiment(
        model, field_from(cfg), config_value<double>(cfg, "v", 0.0), ec,
        config_value<std::int64_t>(cfg, "speed_n", std::int64_t{1} << 16),
        config_value<std::int64_t>(cfg, "speed_replicas", 1000));
    RunOutput out;
    out.command = "ld";
    out.report["delta"] = model.delta();
    out.report["speed"] = {{"n", res.speed.n}, {"mean", res.speed.speed.mean},
                           {"se", res.speed.speed.se},
                           {"ci", {res.speed.ci.lo, res.speed.ci.hi}}};
    out.report["v"] = res.v;
    out.report["tail"] = fit_json(res.tail);
    auto table = tail_table("ld");
    add_tail(out, res.tail, table);
    out.tables.push_back(std::move(table));
    out.tables.push_back(fit_table({&res.tail}));
    if (!res.tail.verdict || !(res.speed.ci.lo > 0))
    {
        out.exit_code = kExitVerdict;
        out.message = "slope outside tolerance or speed not positive";
    }
    return out;
}

RunOutput heavytail(Config const& cfg)
{
    ParetoSpec spec{config_value<double>(cfg, "alpha", 2.5),
                    config_value<double>(cfg, "t0", 1.0)};
    int part = config_value<int>(cfg, "part", 1);
    double gamma = config_value<double>(cfg, "gamma", 0.4);
    double x = config_value<double>(cfg, "x", part == 1 ? spec.mean() + 1 : 2.0);
    auto grid = grid_from(cfg, "n_grid", part == 1 ? "50,100,200,400" : "1000000");
    auto res = sum_tail_experiment(spec, part, grid, x, gamma,
                                   config_value<std::int64_t>(cfg, "replicas", 1'000'000),
                                   field_from(cfg), workers_from(cfg));
    double tolerance = config_value<double>(cfg, "tolerance", 0.2);
    double ratio_lo = config_value<double>(cfg, "ratio_lo", 0.75);
    double ratio_hi = config_value<double>(cfg, "ratio_hi", 1.25);

    RunOutput out;
    out.command = "heavytail";
    out.report["alpha"] = spec.alpha;
    out.report["t0"] = spec.t0;
    out.report["part"] = part;
    out.report["gamma"] = res.gamma;
    out.report["x"] = x;
    out.report["target_slope"] = res.target_slope;
    Table table{"heavytail", {"alpha", "t0", "part", "gamma", "x", "n", "terms", "p_hat",
                              "se", "ci_lo", "ci_hi", "theory", "ratio"}, {}};
    Series series{"heavytail", {}};
    for (auto const& p : res.points)
    {
        table.rows.push_back({num(spec.alpha), num(spec.t0), num(std::int64_t{part}),
                              num(res.gamma), num(x), num(p.n), num(p.terms),
                              num(p.estimate.p_hat), num(p.estimate.se), num(p.estimate.lo),
                              num(p.estimate.hi), num(p.theory), num(p.ratio)});
        if (p.estimate.p_hat > 0)
            series.points.emplace_back(static_cast<double>(p.n), p.estimate.p_hat);
    }
    out.tables.push_back(std::move(table));
    out.series.push_back(std::move(series));

    bool pass = true;
    if (part == 1)
    {
        if (res.fit)
        {
            out.report["slope"] = res.fit->slope;
            out.report["slope_ci"] = {res.fit->ci.lo, res.fit->ci.hi};
        }
        pass = res.fit && std::abs(res.fit->slope - res.target_slope) <= tolerance;
        out.report["tolerance"] = tolerance;
    }
    else
    {
        double ratio = res.points.back().ratio;
        out.report["top_ratio"] = ratio;
        out.report["ratio_band"] = {ratio_lo, ratio_hi};
        pass = ratio >= ratio_lo && ratio <= ratio_hi;
    }
    out.report["verdict"] = pass ? "pass" : "fail";
    if (!pass)
    {
        out.exit_code = kExitVerdict;
        out.message = "heavy-tail check failed";
    }
    return out;
}

RunOutput diffusion_convergence(Config const& cfg)
{
    auto model = model_from_config(cfg);
    if (!(model.delta() > 1))
        throw ConfigError("diffusion-convergence needs delta > 1");
    auto kind_name = config_value<std::string>(cfg, "kind", "Z");
    ConvergenceKind kind;
    if (kind_name == "Z")
        kind = ConvergenceKind::Z;
    else if (kind_name == "W")
        kind = ConvergenceKind::ConditionedW;
    else if (kind_name == "V")
        kind = ConvergenceKind::VStopped;
    else
        throw ConfigError("kind must be Z, W or V");
    ConvergenceOptions opts;
    opts.h = config_value<double>(cfg, "h", 1e-4);
    opts.horizon = config_value<double>(cfg, "horizon", 1e3);
    opts.epsilon = config_value<double>(cfg, "epsilon", 0.25);
    opts.escape_factor = config_value<std::int64_t>(cfg, "escape_factor", 64);
    opts.workers = workers_from(cfg);
    auto n = config_value<std::int64_t>(cfg, "n", 10'000);
    auto reps = config_value<std::int64_t>(cfg, "replicas", 10'000);
    double ks_max = config_value<double>(cfg, "ks_max", 0.08);
    auto rep = convergence_check(model, kind, n, reps, field_from(cfg), opts);

    RunOutput out;
    out.command = "diffusion-convergence";
    out.report["kind"] = kind_name;
    out.report["alpha"] = rep.alpha;
    out.report["n"] = n;
    out.report["replicas"] = reps;
    out.report["ks_lifetime"] = rep.ks_lifetime;
    out.report["ks_progeny"] = rep.ks_progeny;
    out.report["ks_max"] = ks_max;
    out.report["branching_unfinished"] = rep.branching.horizon_exceeded;
    out.report["diffusion_horizon_exceeded"] = rep.diffusion.horizon_exceeded;
    out.report["rejected"] = rep.rejected;
    Table table{"samples", {"source", "index", "lifetime", "area"}, {}};
    for (std::size_t i = 0; i < rep.branching.lifetimes.size(); ++i)
        table.rows.push_back({"branching", num(static_cast<std::int64_t>(i)),
                              num(rep.branching.lifetimes[i]), num(rep.branching.areas[i])});
    for (std::size_t i = 0; i < rep.diffusion.lifetimes.size(); ++i)
        table.rows.push_back({"diffusion", num(static_cast<std::int64_t>(i)),
                              num(rep.diffusion.lifetimes[i]), num(rep.diffusion.areas[i])});
    out.tables.push_back(std::move(table));
    out.tables.push_back(Table{"ks", {"functional", "ks", "limit"},
                               {{"lifetime", num(rep.ks_lifetime), num(ks_max)},
                                {"progeny", num(rep.ks_progeny), num(ks_max)}}});
    bool pass = rep.ks_lifetime < ks_max && rep.ks_progeny < ks_max;
    out.report["verdict"] = pass ? "pass" : "fail";
    if (rep.branching.horizon_exceeded > 0 || rep.diffusion.horizon_exceeded > 0)
    {
        out.exit_code = kExitAnomaly;
        out.message = "unfinished branching runs or diffusion horizon exceeded";
    }
    else if (!pass)
    {
        out.exit_code = kExitVerdict;
        out.message = "KS distance above limit";
    }
    return out;
}

ProcessKind kind_from(std::string const& s)
{
    if (s == "W")
        return ProcessKind::W;
    if (s == "Z")
        return ProcessKind::Z;
    if (s == "V")
        return ProcessKind::V;
    throw ConfigError("kind must be W, Z or V");
}
}  // namespace

RunOutput cmd_validate_env(Config const& cfg)
{
    auto model = model_from_config(cfg);
    auto rep = model.validate();
    RunOutput out;
    out.command = "validate-env";
    out.report = {{"model", model.describe()},
                  {"delta", rep.delta},
                  {"bounded_cookies", rep.bounded_cookies},
                  {"iid_sites", rep.iid_sites},
                  {"nondegenerate", rep.nondegenerate},
                  {"mean_prod_right", rep.mean_prod_right},
                  {"mean_prod_left", rep.mean_prod_left},
                  {"transient_right", rep.transient_right}};
    out.tables.push_back(Table{"assumptions", {"check", "value"},
                               {{"bounded_cookies", rep.bounded_cookies ? "pass" : "fail"},
                                {"iid_sites", rep.iid_sites ? "pass" : "fail"},
                                {"nondegenerate", rep.nondegenerate ? "pass" : "fail"},
                                {"mean_prod_right", num(rep.mean_prod_right)},
                                {"mean_prod_left", num(rep.mean_prod_left)},
                                {"delta", num(rep.delta)}}});
    if (!rep.all_pass())
    {
        out.exit_code = kExitVerdict;
        out.message = "non-degeneracy fails: E[prod omega] = " + num(rep.mean_prod_right)
                      + ", E[prod (1 - omega)] = " + num(rep.mean_prod_left);
    }
    return out;
}

RunOutput cmd_identity_suite(Config const& cfg)
{
    auto model = model_from_config(cfg);
    auto params = default_identity_params(model);
    params.returns = config_value<std::int64_t>(cfg, "returns", params.returns);
    params.hitting_level = config_value<std::int64_t>(cfg, "hitting_level", params.hitting_level);
    params.coupled_level = config_value<std::int64_t>(cfg, "coupled_level", params.coupled_level);
    auto seeds = config_value<std::int64_t>(cfg, "seeds", 1000);
    auto res = identity_suite(model, field_from(cfg), seeds, params, workers_from(cfg));

    RunOutput out;
    out.command = "identity-suite";
    out.report["seeds"] = seeds;
    Table table{"identities", {"identity", "checked", "skipped", "violations",
                               "first_violation", "detail"}, {}};
    for (auto const& t : res.tallies)
    {
        out.report["identities"][t.name] = {{"checked", t.checked},
                                            {"skipped", t.skipped},
                                            {"violations", t.violations},
                                            {"first_violation", t.first_violation},
                                            {"detail", t.detail}};
        table.rows.push_back({t.name, num(t.checked), num(t.skipped), num(t.violations),
                              num(t.first_violation), t.detail});
    }
    out.tables.push_back(std::move(table));
    out.report["violations"] = res.violations();
    if (res.violations() > 0)
    {
        out.exit_code = kExitVerdict;
        out.message = "pathwise identity violated";
    }
    return out;
}

RunOutput cmd_exact_kernel(Config const& cfg)
{
    auto model = model_from_config(cfg);
    auto kind = kind_from(config_value<std::string>(cfg, "kind", "V"));
    auto k = config_value<std::int64_t>(cfg, "k", 0);
    auto steps = config_value<std::int64_t>(cfg, "n", 1);
    if (k < 0 || steps < 0)
        throw ConfigError("k and n must be nonnegative");
    auto dist = steps == 1 ? exact_kernel(model, kind, k)
                           : n_step_distribution(model, kind, k, steps);
    RunOutput out;
    out.command = "exact-kernel";
    out.report = {{"kind", to_string(kind)}, {"k", k}, {"n", steps},
                  {"trunc", dist.trunc()}, {"lost_mass", dist.lost_mass},
                  {"total", dist.total()}, {"mean", dist.mean()}};
    Table table{"kernel", {"k", "m", "mass"}, {}};
    Series series{"kernel", {}};
    for (std::size_t m = 0; m < dist.mass.size(); ++m)
    {
        table.rows.push_back({num(k), num(static_cast<std::int64_t>(m)), num(dist.mass[m])});
        series.points.emplace_back(static_cast<double>(m), dist.mass[m]);
    }
    out.tables.push_back(std::move(table));
    out.series.push_back(std::move(series));
    return out;
}

RunOutput cmd_experiment(std::string const& name, Config const& cfg)
{
    if (name == "slowdown-T")
        return slowdown(SlowdownEvent::T, cfg);
    if (name == "slowdown-X")
        return slowdown(SlowdownEvent::X, cfg);
    if (name == "regen")
        return regen(cfg);
    if (name == "ld")
        return ld(cfg);
    if (name == "heavytail")
        return heavytail(cfg);
    if (name == "diffusion-convergence")
        return diffusion_convergence(cfg);
    if (name == "hitting-profile")
        return hitting(cfg);
    throw ConfigError("unknown experiment '" + name + "'");
}

void write_outputs(RunOutput const& out, Manifest const& manifest,
                   std::filesystem::path const& dir, OutputFormat format)
{
    std::filesystem::create_directories(dir);
    auto header = manifest.header();
    if (format != OutputFormat::csv)
    {
        json doc = {{"manifest",
                     {{"command", manifest.command},
                      {"config", manifest.config_path},
                      {"seed", manifest.seed},
                      {"out", manifest.out_dir},
                      {"timestamp", manifest.timestamp},
                      {"version", manifest.version},
                      {"model", manifest.model},
                      {"workers", manifest.workers}}},
                    {"result", out.report},
                    {"exit_code", out.exit_code},
                    {"message", out.message}};
        write_atomic(dir / (out.command + ".json"), doc.dump(2) + "\n");
    }
    if (format != OutputFormat::json)
    {
        for (auto const& t : out.tables)
            write_atomic(dir / (out.command + "_" + t.name + ".csv"),
                         header + t.data_section());
        for (auto const& s : out.series)
        {
            std::string body = header;
            for (auto const& [x, y] : s.points)
                body += format_number(x) + " " + format_number(y) + "\n";
            write_atomic(dir / (out.command + "_" + s.name + ".dat"), body);
        }
    }
}

}  // namespace cookie
