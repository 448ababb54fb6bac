#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "htlob/lob_core.hpp"
#include "htlob/types.hpp"

namespace htlob::csv {

// Shortest round-trip decimal form; identical across runs and platforms using the same libstdc++.
std::string fmt(double v);

// Order events: header `time,side,delta`, side in {b,a}.
std::vector<OrderEvent> read_events(std::istream& in);
std::vector<OrderEvent> read_events(const std::filesystem::path& file);
void write_events(std::ostream& out, std::span<const OrderEvent> events);

// Queue paths: header `time,q_bid,q_ask`.
std::vector<PathSample> read_path(std::istream& in);
std::vector<PathSample> read_path(const std::filesystem::path& file);
void write_path(std::ostream& out, std::span<const PathSample> samples);

// Price paths: header `time,price_ticks`.
void write_prices(std::ostream& out, const PricePath& prices);

void write_jumps(std::ostream& out, std::span<const JumpRecord> jumps);

}  // namespace htlob::csv
