#include "cookie/report.hpp"

#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cookie
{

std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string format_number(std::int64_t x)
{
    return std::to_string(x);
}

std::string Table::data_section() const
{
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i)
        out += (i ? "," : "") + columns[i];
    out += '\n';
    for (auto const& row : rows)
    {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + row[i];
        out += '\n';
    }
    return out;
}

std::string Manifest::header() const
{
    std::ostringstream os;
    os << "# command: " << command << '\n'
       << "# config: " << (config_path.empty() ? "(none)" : config_path) << '\n'
       << "# seed: " << seed << '\n'
       << "# out: " << out_dir << '\n'
       << "# timestamp: " << timestamp << '\n'
       << "# version: " << version << '\n'
       << "# model: " << model << '\n'
       << "# workers: " << workers << '\n';
    return os.str();
}

std::string utc_timestamp()
{
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_atomic(std::filesystem::path const& path, std::string const& content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw std::runtime_error("cannot open " + tmp.string());
        os << content;
        os.flush();
        if (!os)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string strip_header(std::string const& text)
{
    std::istringstream is(text);
    std::string line, out;
    while (std::getline(is, line))
    {
        if (!line.empty() && line[0] == '#')
            continue;
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace cookie
