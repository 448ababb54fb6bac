#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "htlob/commands.hpp"

namespace {

constexpr int kValidationFailed = 1;
constexpr int kBadInput = 2;

struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::uint64_t paths = 0;
    std::string out = ".";
    std::string format = "csv";
    std::string input;
    unsigned threads = 0;
    bool quiet = false;
};

const char* describe(const std::string& name) {
    if (name == "simulate-lob") return "Simulate order flow and the discrete book; write events, queues and prices";
    if (name == "simulate-q") return "Simulate the limit queue process with reinitialization";
    if (name == "validate-fclt") return "Check the rescaled net flow against its Gaussian limit along an n-ladder";
    if (name == "pup") return "Closed-form probability of an upward move against first-exit Monte Carlo";
    if (name == "duration") return "Survival of the time to the next price change: series against Monte Carlo";
    if (name == "estimate") return "Estimate the limit parameters from an event CSV";
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heavy-traffic limit order book simulator and validation harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", HTLOB_VERSION);

    Flags f;
    std::string chosen;
    for (const auto& name : htlob::cli::command_names()) {
        CLI::App* sub = app.add_subcommand(name, describe(name));
        sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", f.seed, "Top-level seed; overrides the config");
        sub->add_option("--paths", f.paths, "Monte Carlo paths or replications; overrides the config");
        sub->add_option("--out", f.out, "Output directory")->capture_default_str();
        sub->add_option("--format", f.format, "Table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
        sub->add_option("--threads", f.threads, "Worker threads (0: all cores); never changes outputs");
        sub->add_flag("--quiet", f.quiet, "Only print failures");
        if (name == "estimate") sub->add_option("--input", f.input, "Event CSV")->check(CLI::ExistingFile)->required();
        sub->callback([&chosen, name] { chosen = name; });
    }
    CLI11_PARSE(app, argc, argv);

    htlob::cli::CommandOptions opt;
    CLI::App* sub = app.get_subcommand(chosen);
    if (sub->count("--seed")) opt.seed = f.seed;
    if (sub->count("--paths")) opt.paths = f.paths;
    opt.out = f.out;
    opt.threads = f.threads;
    if (!f.input.empty()) opt.input = f.input;

    try {
        opt.format = htlob::report::parse_format(f.format);
        htlob::config::Json cfg = f.config.empty() ? htlob::config::Json::object() : htlob::config::load(f.config);
        auto t0 = std::chrono::steady_clock::now();
        auto rep = htlob::cli::run(chosen, cfg, opt);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        std::string text = htlob::report::render(rep);
        if (f.quiet) {
            for (const auto& v : rep.validations)
                if (!v.pass) std::cout << "FAIL " << v.metric << '\n';
        } else {
            std::cout << text;
        }
        std::fprintf(stderr, "%s: %zu validations, %s, %.2f s\n", chosen.c_str(), rep.validations.size(),
                     rep.all_pass() ? "all pass" : "FAILURES", secs);
        return rep.all_pass() ? 0 : kValidationFailed;
    } catch (const std::exception& e) {
        std::cerr << "htlob " << chosen << ": error: " << e.what() << '\n';
        return kBadInput;
    }
}
