#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cookie/environment.hpp"

namespace cookie
{

using Config = nlohmann::json;

//! Malformed configuration; the CLI maps it to exit code 1.
struct ConfigError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/*!
 * Parse "key = value" lines. Values are JSON; anything that is not valid JSON
 * is kept as a string. Blank lines and lines starting with '#' are ignored.
 */
Config parse_config(std::string_view text);
Config load_config(std::filesystem::path const& path);

//! Model from `stacks`, `weights`, optional `M` and `name`; (0.9, 0.9) if absent.
EnvironmentModel model_from_config(Config const& cfg);

//! "2^8..2^13", "100,200,400" or a JSON array of integers.
std::vector<std::int64_t> parse_n_grid(Config const& value);
std::vector<std::int64_t> parse_n_grid_text(std::string_view text);

//! Typed lookup with a default; wrong types raise ConfigError.
template<class T>
T config_value(Config const& cfg, std::string const& key, T fallback)
{
    auto it = cfg.find(key);
    if (it == cfg.end() || it->is_null())
        return fallback;
    try
    {
        return it->template get<T>();
    }
    catch (nlohmann::json::exception const&)
    {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

}  // namespace cookie
