#include "htlob/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "htlob/csv_io.hpp"

namespace htlob::report {

ValidationRecord ValidationRecord::check(std::string metric, double observed, double reference, double tolerance,
                                         std::optional<double> mc_se) {
    ValidationRecord r;
    r.metric = std::move(metric);
    r.observed = observed;
    r.reference = reference;
    r.tolerance = tolerance;
    r.pass = std::isfinite(observed) && std::abs(observed - reference) <= tolerance;
    r.mc_se = mc_se;
    return r;
}

ValidationRecord ValidationRecord::flag(std::string metric, bool ok) {
    return check(std::move(metric), ok ? 1.0 : 0.0, 1.0, 0.0);
}

namespace {

Json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

}  // namespace

Json ValidationRecord::to_json() const {
    Json j;
    j["metric"] = metric;
    j["observed"] = number(observed);
    j["reference"] = number(reference);
    j["tolerance"] = number(tolerance);
    j["pass"] = pass;
    j["mc_se"] = mc_se ? number(*mc_se) : Json(nullptr);
    return j;
}

void Table::add(std::vector<Json> row) {
    if (row.size() != columns.size()) throw InvalidInput("table row width does not match the header");
    rows.push_back(std::move(row));
}

void Table::write_csv(std::ostream& out) const {
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            const Json& c = row[i];
            if (c.is_number_float()) out << csv::fmt(c.get<double>());
            else if (c.is_string()) out << c.get<std::string>();
            else if (c.is_null()) out << "nan";
            else out << c.dump();
        }
        out << '\n';
    }
}

Json Table::to_json() const {
    Json arr = Json::array();
    for (const auto& row : rows) {
        Json o = Json::object();
        for (std::size_t i = 0; i < row.size(); ++i) o[columns[i]] = row[i];
        arr.push_back(std::move(o));
    }
    return arr;
}

Format parse_format(const std::string& s) {
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    throw InvalidInput("unknown format '" + s + "' (expected csv or json)");
}

const char* extension(Format f) { return f == Format::Csv ? ".csv" : ".json"; }

bool Report::all_pass() const {
    for (const auto& v : validations)
        if (!v.pass) return false;
    return true;
}

Json Report::to_json() const {
    Json j;
    j["command"] = command;
    j["provenance"] = provenance;
    j["config"] = config;
    j["results"] = results;
    Json v = Json::array();
    for (const auto& r : validations) v.push_back(r.to_json());
    j["validations"] = v;
    j["warnings"] = warnings;
    j["outputs"] = outputs;
    j["pass"] = all_pass();
    return j;
}

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + (dir / name).string());
    out << text;
}

void write_table(const std::filesystem::path& dir, const std::string& stem, const Table& t, Format f,
                 Report& rep) {
    std::string name = stem + extension(f);
    if (f == Format::Csv) {
        std::ostringstream os;
        t.write_csv(os);
        write_file(dir, name, os.str());
    } else {
        write_file(dir, name, t.to_json().dump(1) + "\n");
    }
    rep.outputs.push_back(name);
}

std::string render(const Report& rep) {
    std::ostringstream os;
    char buf[256];
    for (const auto& v : rep.validations) {
        std::snprintf(buf, sizeof buf, "%-4s %-44s obs=%-12.6g ref=%-12.6g tol=%-10.3g", v.pass ? "PASS" : "FAIL",
                      v.metric.c_str(), v.observed, v.reference, v.tolerance);
        os << buf;
        if (v.mc_se) {
            std::snprintf(buf, sizeof buf, " se=%.3g", *v.mc_se);
            os << buf;
        }
        os << '\n';
    }
    for (const auto& w : rep.warnings) os << "warning: " << w << '\n';
    return os.str();
}

}  // namespace htlob::report
