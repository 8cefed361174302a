#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cookie
{

//! Shortest round-trip decimal form; "nan" and "inf" spelled out.
std::string format_number(double x);
std::string format_number(std::int64_t x);

struct Table
{
    std::string name;  //!< file stem
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    //! Column header plus rows, no manifest.
    std::string data_section() const;
};

//! Two-column data for gnuplot.
struct Series
{
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct Manifest
{
    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string timestamp;
    std::string version;
    std::string model;
    unsigned workers = 1;

    //! "# key: value" lines.
    std::string header() const;
};

//! UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

//! Write through a temporary file in the same directory, then rename.
void write_atomic(std::filesystem::path const& path, std::string const& content);

//! The part of a CSV file below its "#" header lines.
std::string strip_header(std::string const& text);

}  // namespace cookie
