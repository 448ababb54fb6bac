#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "htlob/config.hpp"

namespace htlob::report {

using config::Json;

// pass <=> |observed - reference| <= tolerance. Runtime is printed to stderr, never stored.
struct ValidationRecord {
    std::string metric;
    double observed = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::optional<double> mc_se;

    static ValidationRecord check(std::string metric, double observed, double reference, double tolerance,
                                  std::optional<double> mc_se = {});
    // A yes/no property: observed 1 or 0 against reference 1, zero tolerance.
    static ValidationRecord flag(std::string metric, bool ok);
    Json to_json() const;
};

// Columns of numbers or strings, written as CSV or as a JSON array of row objects.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;

    void add(std::vector<Json> row);
    void write_csv(std::ostream& out) const;
    Json to_json() const;
};

enum class Format { Csv, Json };
Format parse_format(const std::string& s);
const char* extension(Format f);

struct Report {
    std::string command;
    Json provenance = Json::object();
    Json config = Json::object();  // resolved
    Json results = Json::object();
    std::vector<ValidationRecord> validations;
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;

    bool all_pass() const;
    void add(ValidationRecord r) { validations.push_back(std::move(r)); }
    Json to_json() const;
};

// Writes `text` to dir/name in one pass; creates dir if needed.
void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text);
void write_table(const std::filesystem::path& dir, const std::string& stem, const Table& t, Format f,
                 Report& rep);
// Renders the validation block as a fixed-width text table.
std::string render(const Report& rep);

}  // namespace htlob::report
