#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cookie/config.hpp"
#include "cookie/runner.hpp"

using namespace cookie;

namespace fs = std::filesystem;

TEST_CASE("config parsing")
{
    auto cfg = parse_config("# comment\nseed = 7\n\nstacks = [[0.9, 0.9]]\nname = fast one\n"
                            "n_grid = 2^4..2^6\n");
    CHECK(cfg["seed"] == 7);
    CHECK(cfg["name"] == "fast one");
    CHECK(parse_n_grid(cfg["n_grid"]) == std::vector<std::int64_t>{16, 32, 64});
    CHECK(parse_n_grid_text("100,200,400") == std::vector<std::int64_t>{100, 200, 400});
    CHECK(parse_n_grid(nlohmann::json::array({5, 9})) == std::vector<std::int64_t>{5, 9});
    CHECK_THROWS_AS(parse_n_grid_text("400,200"), ConfigError);
    CHECK_THROWS_AS(parse_n_grid_text("2^5..2^x"), ConfigError);
    CHECK_THROWS_AS(parse_config("no equals sign"), ConfigError);
    CHECK_THROWS_AS(config_value<int>(cfg, "name", 0), ConfigError);
    CHECK(config_value<int>(cfg, "missing", 4) == 4);
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("model from config")
{
    auto d = model_from_config(Config::object());
    CHECK(d.delta() == doctest::Approx(1.6));
    auto m = model_from_config(parse_config("stacks = [[1, 0.5], [0.2]]\nweights = [0.25, 0.75]\nM = 3"));
    CHECK(m.components() == 2);
    CHECK(m.cookies() == 3);
    CHECK(m.delta() == doctest::Approx(0.25 * 1.0 + 0.75 * (-0.6)));
    CHECK_THROWS(model_from_config(parse_config("stacks = [[1.5]]")));
}

TEST_CASE("validate-env verdicts")
{
    CHECK(cmd_validate_env(parse_config("stacks = [[0.9, 0.9]]")).exit_code == kExitOk);
    auto bad = cmd_validate_env(parse_config("stacks = [[1, 1]]"));
    CHECK(bad.exit_code == kExitVerdict);
    CHECK(bad.report["nondegenerate"] == false);
}

TEST_CASE("experiment reports carry the target")
{
    auto out = cmd_experiment("slowdown-X", parse_config("n_grid = 2^6..2^7\nreplicas = 2000"));
    CHECK(out.report["tail"]["target"].get<double>() == doctest::Approx(-0.3));
    CHECK_THROWS_AS(cmd_experiment("no-such", Config::object()), ConfigError);
    auto kern = cmd_exact_kernel(parse_config("kind = \"V\"\nk = 3"));
    CHECK(kern.exit_code == kExitOk);
}

TEST_CASE("outputs are written atomically with a manifest")
{
    auto dir = fs::temp_directory_path() / "cookie_unit_out";
    fs::remove_all(dir);
    RunOutput out;
    out.command = "demo";
    out.report = {{"x", 1}};
    out.tables.push_back(Table{"t", {"a", "b"}, {{"1", "2"}, {"3", "4"}}});
    out.series.push_back(Series{"s", {{1, 2}, {3, 4}}});
    Manifest man;
    man.command = "demo";
    man.seed = 9;
    write_outputs(out, man, dir, OutputFormat::both);

    int files = 0;
    for (auto const& e : fs::directory_iterator(dir))
    {
        ++files;
        CHECK(e.path().extension() != ".tmp");
    }
    CHECK(files == 3);
    std::ifstream in(dir / "demo_t.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().rfind("# ", 0) == 0);
    CHECK(strip_header(ss.str()) == "a,b\n1,2\n3,4\n");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(std::int64_t{42}) == "42");
    fs::remove_all(dir);
}
