#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "htlob/distributions.hpp"
#include "htlob/types.hpp"

namespace htlob::flow {

// Market, limit and cancel orders of fixed size at independent exponential times, per side.
struct PoissonFlowSpec {
    double lambda_limit = 1.0;
    double mu_market = 1.0;
    double theta_cancel = 1.0;
    double unit_size = 1.0;

    void validate() const;
    double event_rate() const { return lambda_limit + mu_market + theta_cancel; }
    double prob_positive() const { return lambda_limit / event_rate(); }
};

// Event type i touches `side` with sign `sign` (+1 adds to the queue, -1 removes).
struct HawkesEventType {
    Side side = Side::Bid;
    double sign = 1.0;
};

// Intensities lambda_i(t) = theta_i + sum_j delta_ij * sum_{s_j < t} exp(-kappa_i (t - s_j)).
struct HawkesFlowSpec {
    std::vector<HawkesEventType> types;
    std::vector<double> base_rates;                // theta_i
    std::vector<std::vector<double>> excitation;   // delta_ij
    std::vector<double> decay;                     // kappa_i
    Dist size_dist = Dist::constant(1.0);          // law of |V|

    void validate() const;
    // Spectral radius of the branching matrix delta_ij / kappa_i.
    double branching_radius() const;
    // Stationary mean intensities (I - B)^{-1} theta.
    std::vector<double> mean_intensities() const;

    // Four types: bid+, bid-, ask+, ask-, each self-exciting with `self` and exciting the
    // same-side opposite sign with `cross`.
    static HawkesFlowSpec symmetric(double theta, double self, double cross, double kappa, Dist size);
};

// psi_i = a0 + sum_k a_k psi_{i-k} + sum_k b_k T_{i-k};  T_i = psi_i * eps_i.
struct ACDSpec {
    double a0 = 1.0;
    std::vector<double> a_coeffs;
    std::vector<double> b_coeffs;
    Dist innovation = Dist::exponential(1.0);  // unit mean

    void validate() const;
    double unconditional_mean() const;
};

// V_i = mean + sigma_i z_i with sigma_i^2 = alpha0 + alpha1 (V_{i-1} - mean)^2 per side.
struct ArchVolumeSpec {
    double alpha0_bid = 1.0;
    double alpha1_bid = 0.0;
    double alpha0_ask = 1.0;
    double alpha1_ask = 0.0;
    double rho_z = 0.0;
    double mean_bid = 0.0;
    double mean_ask = 0.0;

    void validate() const;
    double stationary_variance_bid() const { return alpha0_bid / (1 - alpha1_bid); }
    double stationary_variance_ask() const { return alpha0_ask / (1 - alpha1_ask); }
};

// Per-trader mixture: m market-only, l limit-only, 1 - l - m mixed traders splitting gamma / (1 - gamma).
// flip_signs = false follows the probability table literally: market-only rows carry +V and
// limit-only rows carry -V. flip_signs = true swaps those two rows.
struct AgentMixSpec {
    double m = 0.2;
    double l = 0.3;
    double gamma = 0.5;
    Dist duration_dist = Dist::exponential(1.0);
    Dist size_dist = Dist::constant(1.0);
    bool flip_signs = false;

    void validate() const;
};

// ACD durations per side (or one shared clock) paired with ARCH sizes.
struct AcdArchSpec {
    ACDSpec durations_bid;
    ACDSpec durations_ask;
    ArchVolumeSpec volumes;
    bool shared_clock = false;

    void validate() const;
};

// Poisson clock per side with sizes +size, -size, +size, ... : bounded net flow, zero long-run variance.
struct AlternatingFlowSpec {
    double rate = 1.0;
    double size = 1.0;

    void validate() const;
};

enum class AgentType : std::uint8_t {
    MarketBid,   // (V, 0)
    MarketAsk,   // (0, V)
    LimitBid,    // (-V, 0)
    LimitAsk,    // (0, -V)
    MixedBuy,    // (gamma V, -(1-gamma) V)
    MixedSell,   // (-(1-gamma) V, gamma V)
};

struct AgentTrade {
    double time = 0.0;
    AgentType type = AgentType::MarketBid;
    double bid_delta = 0.0;
    double ask_delta = 0.0;
};

std::vector<OrderEvent> gen_poisson_flow(const PoissonFlowSpec& spec, double horizon, std::uint64_t seed);
std::vector<OrderEvent> gen_hawkes_flow(const HawkesFlowSpec& spec, double horizon, std::uint64_t seed);
std::vector<double> gen_acd_durations(const ACDSpec& spec, std::size_t count, std::uint64_t seed);
std::vector<QueuePair> gen_arch_volumes(const ArchVolumeSpec& spec, std::size_t count, std::uint64_t seed);
std::vector<AgentTrade> gen_agent_trades(const AgentMixSpec& spec, double horizon, std::uint64_t seed);
// Mixed traders emit a bid and an ask event at the same timestamp, bid first.
std::vector<OrderEvent> gen_agent_flow(const AgentMixSpec& spec, double horizon, std::uint64_t seed);
std::vector<OrderEvent> gen_acd_arch_flow(const AcdArchSpec& spec, double horizon, std::uint64_t seed);
std::vector<OrderEvent> gen_alternating_flow(const AlternatingFlowSpec& spec, double horizon, std::uint64_t seed);

using FlowSpec = std::variant<PoissonFlowSpec, HawkesFlowSpec, AgentMixSpec, AcdArchSpec, AlternatingFlowSpec>;

std::vector<OrderEvent> generate(const FlowSpec& spec, double horizon, std::uint64_t seed);
const char* flow_name(const FlowSpec& spec);

// Long-run first and second moments of the net flow per unit time, bid first:
// mean = lim E[X_t]/t, cov = lim Cov(X_t)/t. Empty when the model has no closed form.
struct FlowMoments {
    std::array<double, 2> mean{};
    std::array<std::array<double, 2>, 2> cov{};
    double rate_bid = 0.0;  // events per unit time touching each side
    double rate_ask = 0.0;
};
std::optional<FlowMoments> net_flow_moments(const FlowSpec& spec);

// Per-trader size moments of the agent model: E V^b, E (V^b)^2, E V^b V^a (symmetric in sides).
struct AgentMoments {
    double mean = 0.0;
    double second = 0.0;
    double cross = 0.0;
    double variance() const { return second - mean * mean; }
    double covariance() const { return cross - mean * mean; }
};
AgentMoments agent_moments(double m, double l, double gamma, double vbar, double e_v2, bool flip_signs = false);

}  // namespace htlob::flow
