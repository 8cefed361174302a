#include "cookie/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace cookie
{
namespace
{
std::string_view trim(std::string_view s)
{
    auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::int64_t parse_grid_value(std::string_view s)
{
    s = trim(s);
    auto caret = s.find('^');
    auto to_int = [&](std::string_view t) {
        t = trim(t);
        std::int64_t v = 0;
        auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
            throw ConfigError("bad grid value '" + std::string(s) + "'");
        return v;
    };
    if (caret == std::string_view::npos)
        return to_int(s);
    std::int64_t base = to_int(s.substr(0, caret));
    std::int64_t e = to_int(s.substr(caret + 1));
    if (base < 1 || e < 0 || e > 62)
        throw ConfigError("bad grid power '" + std::string(s) + "'");
    std::int64_t v = 1;
    for (std::int64_t i = 0; i < e; ++i)
    {
        if (v > (std::int64_t{1} << 62) / base)
            throw ConfigError("grid value overflows");
        v *= base;
    }
    return v;
}
}  // namespace

Config parse_config(std::string_view text)
{
    Config cfg = Config::object();
    std::istringstream is{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw))
    {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line[0] == '#')
            continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        auto key = std::string(trim(line.substr(0, eq)));
        auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        auto parsed = Config::parse(value, nullptr, false);
        cfg[key] = parsed.is_discarded() ? Config(std::string(value)) : parsed;
    }
    return cfg;
}

Config load_config(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

EnvironmentModel model_from_config(Config const& cfg)
{
    auto name = config_value<std::string>(cfg, "name", "");
    if (!cfg.contains("stacks"))
        return EnvironmentModel::deterministic({0.9, 0.9}, name.empty() ? "default" : name);

    auto stacks = config_value<std::vector<std::vector<double>>>(cfg, "stacks", {});
    if (stacks.empty())
        throw ConfigError("stacks must list at least one stack");
    auto weights = config_value<std::vector<double>>(
        cfg, "weights", std::vector<double>(stacks.size(), 1.0 / static_cast<double>(stacks.size())));
    std::size_t longest = 0;
    for (auto const& s : stacks)
        longest = std::max(longest, s.size());
    if (cfg.contains("M"))
    {
        auto m = config_value<std::int64_t>(cfg, "M", 0);
        if (m < 1 || static_cast<std::size_t>(m) < longest)
            throw ConfigError("M must be positive and at least the longest stack");
        for (auto& s : stacks)
            s.resize(static_cast<std::size_t>(m), 0.5);
    }
    try
    {
        return EnvironmentModel::mixture(std::move(stacks), std::move(weights), name);
    }
    catch (std::invalid_argument const& e)
    {
        throw ConfigError(e.what());
    }
}

std::vector<std::int64_t> parse_n_grid_text(std::string_view text)
{
    text = trim(text);
    std::vector<std::int64_t> grid;
    auto dots = text.find("..");
    if (dots != std::string_view::npos)
    {
        auto lo = text.substr(0, dots);
        auto hi = text.substr(dots + 2);
        auto lo_caret = lo.find('^');
        auto hi_caret = hi.find('^');
        if (lo_caret == std::string_view::npos || hi_caret == std::string_view::npos
            || trim(lo.substr(0, lo_caret)) != trim(hi.substr(0, hi_caret)))
            throw ConfigError("range grids must look like b^i..b^j");
        std::int64_t base = parse_grid_value(lo.substr(0, lo_caret));
        std::int64_t e_lo = parse_grid_value(lo.substr(lo_caret + 1));
        std::int64_t e_hi = parse_grid_value(hi.substr(hi_caret + 1));
        if (e_hi < e_lo)
            throw ConfigError("empty grid range");
        for (auto e = e_lo; e <= e_hi; ++e)
            grid.push_back(parse_grid_value(std::to_string(base) + "^" + std::to_string(e)));
    }
    else
    {
        std::size_t start = 0;
        while (start <= text.size())
        {
            auto comma = text.find(',', start);
            auto piece = text.substr(start, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - start);
            grid.push_back(parse_grid_value(piece));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] < 1 || (i > 0 && grid[i] <= grid[i - 1]))
            throw ConfigError("grid must be positive and strictly increasing");
    return grid;
}

std::vector<std::int64_t> parse_n_grid(Config const& value)
{
    if (value.is_string())
        return parse_n_grid_text(value.get<std::string>());
    if (value.is_array())
    {
        std::vector<std::int64_t> grid;
        for (auto const& v : value)
        {
            if (!v.is_number_integer())
                throw ConfigError("grid arrays must hold integers");
            grid.push_back(v.get<std::int64_t>());
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid[i] < 1 || (i > 0 && grid[i] <= grid[i - 1]))
                throw ConfigError("grid must be positive and strictly increasing");
        return grid;
    }
    throw ConfigError("n_grid must be a string or an array");
}

}  // namespace cookie
