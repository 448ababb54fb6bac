#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "htlob/distributions.hpp"
#include "htlob/lob_core.hpp"
#include "htlob/order_flow.hpp"
#include "htlob/params.hpp"
#include "htlob/reinit.hpp"

namespace htlob::config {

using Json = nlohmann::json;

class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// Reads one JSON object; every key must be consumed or finish() throws. Defaults are written
// back so that `resolved()` holds the full configuration that was actually used.
class Reader {
public:
    Reader(Json& node, std::string path);

    bool has(const std::string& key) const;
    double number(const std::string& key);
    double number(const std::string& key, double fallback);
    std::uint64_t uint(const std::string& key);
    std::uint64_t uint(const std::string& key, std::uint64_t fallback);
    bool boolean(const std::string& key, bool fallback);
    std::string string(const std::string& key);
    std::string string(const std::string& key, const std::string& fallback);
    std::vector<double> numbers(const std::string& key);
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
    Reader object(const std::string& key);
    // Like object(), but a missing key is created as {} so its defaults land in the resolved config.
    Reader object_or_empty(const std::string& key);
    Json& raw(const std::string& key);
    void finish() const;
    const std::string& path() const { return path_; }
    [[noreturn]] void fail(const std::string& key, const std::string& msg) const;

private:
    Json& at(const std::string& key);
    Json* node_;
    std::string path_;
    std::set<std::string> used_;
};

Json load(const std::filesystem::path& file);

Dist parse_dist(Reader r);
DiffusionParams parse_params(Reader r);
flow::FlowSpec parse_flow(Reader r);
ReinitRule parse_rule(Reader r);
QueuePair parse_pair(Reader r);

// FNV-1a over the compact dump of the resolved config, as 16 hex digits.
std::string config_hash(const Json& resolved);

}  // namespace htlob::config
