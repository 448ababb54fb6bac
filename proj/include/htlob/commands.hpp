#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "htlob/config.hpp"
#include "htlob/report.hpp"

namespace htlob::cli {

struct CommandOptions {
    std::optional<std::uint64_t> seed;   // overrides config "seed"
    std::optional<std::uint64_t> paths;  // overrides config "paths" where the command has one
    std::filesystem::path out = ".";
    report::Format format = report::Format::Csv;
    std::optional<std::filesystem::path> input;
    unsigned threads = 0;  // does not change any output
};

const std::vector<std::string>& command_names();

// Runs one command on a copy of `config`, writes its tables and report.json into opt.out and
// returns the report. Throws config::ConfigError / InvalidInput on bad input.
report::Report run(const std::string& command, const config::Json& config, const CommandOptions& opt);

// Independent seed for a named substream of the top-level seed.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& name, std::uint64_t index = 0);

}  // namespace htlob::cli
