#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "htlob/lob_core.hpp"
#include "htlob/order_flow.hpp"
#include "htlob/params.hpp"
#include "htlob/random.hpp"
#include "htlob/reinit.hpp"

namespace htlob::diffusion {

// Adaptive stepping for first-exit problems: h = kappa * max(z_b, z_a)^2 in standardized units,
// capped by the time left. Axis crossings inside a step use the exact Brownian-bridge law of
// each coordinate, so the step only matters when both coordinates could cross together.
struct StepControl {
    double kappa = 0.04;
    double min_step = 1e-300;
    std::size_t max_steps = 50'000'000;
};

struct FirstHit {
    JumpSide side = JumpSide::AskDepleted;
    double time = 0.0;
    bool censored = false;  // no hit before the horizon; time == horizon
    std::size_t steps = 0;
};

FirstHit first_hit(const DiffusionParams& p, const QueuePair& initial, Rng& rng,
                   double horizon = std::numeric_limits<double>::infinity(), const StepControl& ctl = {});
FirstHit first_hit(const DiffusionParams& p, const QueuePair& initial, std::uint64_t seed);

struct McOptions {
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    double horizon = std::numeric_limits<double>::infinity();
    std::vector<double> survival_grid;  // sorted times at which to report P[tau > t]
    bool keep_times = false;
    StepControl step;
    unsigned threads = 0;
    std::size_t batch = 1 << 15;
};

struct ExitStatistics {
    std::size_t paths = 0;
    std::size_t ask_first = 0;
    std::size_t bid_first = 0;
    std::size_t censored = 0;
    double p_ask = 0.0;  // ask_first / paths
    double p_ask_se = 0.0;
    std::vector<double> grid;
    std::vector<double> survival;
    std::vector<double> survival_se;
    std::vector<double> times;  // exit times (horizon for censored paths), if kept
    double mean_steps = 0.0;
};

// Parallel first-exit Monte Carlo; batch b uses stream (seed, "first_hit", b).
ExitStatistics exit_statistics(const DiffusionParams& p, const QueuePair& initial, const McOptions& opt);

// Limit process with reinitialization on a fixed grid of width `step` (default horizon / 2^16).
RegulatedPath simulate_Q(const DiffusionParams& p, const ReinitRule& rule, const QueuePair& initial, double horizon,
                         double step, std::uint64_t seed);

// State of the limit process at `horizon`, adaptive steps, no path stored.
struct TerminalState {
    QueuePair q;
    std::size_t jumps = 0;
};
TerminalState simulate_Q_terminal(const DiffusionParams& p, const ReinitRule& rule, const QueuePair& initial,
                                  double horizon, Rng& rng, const StepControl& ctl = {});

// Time divided by n, sizes divided by sqrt(n).
std::vector<PathSample> rescale_discrete(std::span<const PathSample> path, double n);

// Test function with its first and second partials (x = bid, y = ask).
struct TestFunction {
    std::function<double(double, double)> h, hx, hy, hxx, hyy, hxy;
};

enum class GeneratorConvention {
    Ito,           // cross term rho sigma_b sigma_a h_xy
    PrintedCross,  // cross term 2 rho sigma_b sigma_a h_xy, as printed
};

double generator_apply(const TestFunction& f, double x, double y, const DiffusionParams& p,
                       GeneratorConvention conv = GeneratorConvention::Ito);

struct WeakCheck {
    double t = 0.0;
    double estimate = 0.0;   // (E h(Q_t) - h(x, y)) / t
    double std_error = 0.0;
    double generator = 0.0;  // G h(x, y)
    double error = 0.0;      // estimate - generator
    std::size_t pairs = 0;
};

// Antithetic pairs with a second-order Taylor control variate on the Gaussian increment.
WeakCheck weak_generator_check(const TestFunction& f, double x, double y, const DiffusionParams& p, double t,
                               std::size_t pairs, std::uint64_t seed, const ReinitRule& rule);

struct FcltLevel {
    double n = 0.0;
    std::size_t replications = 0;
    std::size_t samples = 0;             // pooled unit-time increments
    std::array<double, 2> ks{};          // pooled increments vs the limiting Gaussian
    std::array<double, 2> ks_terminal{}; // X^n_1 across replications
    double ks_critical = 0.0;
    double ks_terminal_critical = 0.0;
    Cov2 sample_cov;
    double cov_rel_error = 0.0;          // Frobenius-relative
    double corr = 0.0;
    double mean_events = 0.0;            // events per replication
};

struct FcltReport {
    std::string flow;
    Cov2 target_cov;
    std::array<double, 2> target_mean{};
    std::vector<FcltLevel> levels;
    bool degenerate = false;  // target variance vanishes
    std::uint64_t seed = 0;
};

struct FcltOptions {
    std::size_t replications = 1000;
    std::size_t horizon = 20;  // unit-time increments per replication
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

FcltReport net_flow_fclt_check(const flow::FlowSpec& spec, std::span<const double> ladder, const FcltOptions& opt);

// Terminal marginals of the rescaled discrete queues vs the limit process.
struct QueueLimitCheck {
    double n = 0.0;
    double horizon = 0.0;
    std::size_t replications = 0;
    std::array<double, 2> ks{};
    double ks_critical = 0.0;
    std::array<double, 2> mean_discrete{};
    std::array<double, 2> mean_limit{};
};

QueueLimitCheck queue_limit_check(const flow::FlowSpec& spec, const ReinitRule& limit_rule, const QueuePair& initial,
                                  double n, double horizon, std::size_t replications, std::uint64_t seed,
                                  unsigned threads = 0);

// Limit parameters implied by the long-run moments of a flow.
DiffusionParams params_from_moments(const flow::FlowMoments& m);

}  // namespace htlob::diffusion
