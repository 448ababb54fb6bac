#include "htlob/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace htlob::csv {

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw InvalidInput("line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(',', start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view s, std::size_t line, const char* field) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
        fail(line, std::string("cannot parse ") + field + " '" + std::string(s) + "'");
    return v;
}

template <class Row>
std::vector<Row> read_rows(std::istream& in, std::string_view header, std::size_t ncols,
                           Row (*parse)(const std::vector<std::string_view>&, std::size_t),
                           std::vector<std::size_t>* line_numbers = nullptr) {
    std::vector<Row> rows;
    std::string text;
    std::size_t line = 0;
    bool saw_header = false;
    while (std::getline(in, text)) {
        ++line;
        std::string_view s = trim(text);
        if (s.empty()) continue;
        if (!saw_header) {
            if (s != header) fail(line, "expected header '" + std::string(header) + "'");
            saw_header = true;
            continue;
        }
        auto cols = split(s);
        if (cols.size() != ncols)
            fail(line, "expected " + std::to_string(ncols) + " fields, got " + std::to_string(cols.size()));
        rows.push_back(parse(cols, line));
        if (line_numbers) line_numbers->push_back(line);
    }
    if (!saw_header) fail(line, "missing header '" + std::string(header) + "'");
    return rows;
}

OrderEvent parse_event(const std::vector<std::string_view>& c, std::size_t line) {
    OrderEvent ev;
    ev.time = parse_double(c[0], line, "time");
    if (ev.time < 0) fail(line, "negative timestamp");
    if (c[1] == "b")
        ev.side = Side::Bid;
    else if (c[1] == "a")
        ev.side = Side::Ask;
    else
        fail(line, "side must be 'b' or 'a', got '" + std::string(c[1]) + "'");
    ev.delta = parse_double(c[2], line, "delta");
    if (ev.delta == 0) fail(line, "delta must be non-zero");
    return ev;
}

PathSample parse_sample(const std::vector<std::string_view>& c, std::size_t line) {
    return {parse_double(c[0], line, "time"), parse_double(c[1], line, "q_bid"), parse_double(c[2], line, "q_ask")};
}

std::ifstream open(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open " + file.string());
    return in;
}

}  // namespace

std::vector<OrderEvent> read_events(std::istream& in) {
    std::vector<std::size_t> lines;
    auto rows = read_rows<OrderEvent>(in, "time,side,delta", 3, &parse_event, &lines);
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].time < rows[i - 1].time) fail(lines[i], "timestamps must be non-decreasing");
    return rows;
}

std::vector<OrderEvent> read_events(const std::filesystem::path& file) {
    auto in = open(file);
    return read_events(in);
}

void write_events(std::ostream& out, std::span<const OrderEvent> events) {
    out << "time,side,delta\n";
    for (const auto& e : events) out << fmt(e.time) << ',' << (e.side == Side::Bid ? 'b' : 'a') << ',' << fmt(e.delta) << '\n';
}

std::vector<PathSample> read_path(std::istream& in) {
    return read_rows<PathSample>(in, "time,q_bid,q_ask", 3, &parse_sample);
}

std::vector<PathSample> read_path(const std::filesystem::path& file) {
    auto in = open(file);
    return read_path(in);
}

void write_path(std::ostream& out, std::span<const PathSample> samples) {
    out << "time,q_bid,q_ask\n";
    for (const auto& s : samples) out << fmt(s.time) << ',' << fmt(s.q_bid) << ',' << fmt(s.q_ask) << '\n';
}

void write_prices(std::ostream& out, const PricePath& prices) {
    out << "time,price_ticks\n";
    for (const auto& s : prices.steps) out << fmt(s.time) << ',' << s.price_ticks << '\n';
}

void write_jumps(std::ostream& out, std::span<const JumpRecord> jumps) {
    out << "time,side,pre_bid,pre_ask,post_bid,post_ask\n";
    for (const auto& j : jumps)
        out << fmt(j.time) << ',' << (j.side == JumpSide::AskDepleted ? "a" : "b") << ',' << fmt(j.pre.bid) << ','
            << fmt(j.pre.ask) << ',' << fmt(j.post.bid) << ',' << fmt(j.post.ask) << '\n';
}

}  // namespace htlob::csv
