#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "htlob/params.hpp"
#include "htlob/types.hpp"

namespace htlob::est {

// One session split by side; each side sorted by time.
struct FlowSample {
    std::vector<OrderEvent> bid_events;
    std::vector<OrderEvent> ask_events;

    static FlowSample from_events(std::span<const OrderEvent> events);
    void validate() const;
    std::vector<double> sizes(Side s) const;
    std::vector<double> durations(Side s) const;
    const std::vector<OrderEvent>& side(Side s) const { return s == Side::Bid ? bid_events : ask_events; }
};

struct ParamEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_used = 0;
};

struct RateEstimates {
    ParamEstimate bid;
    ParamEstimate ask;
};

// lambda = (count - 1) / span per side.
RateEstimates estimate_rates(const FlowSample& s);

struct SizeMoments {
    ParamEstimate vbar;
    ParamEstimate v2;       // long-run variance
    std::size_t lag_cut = 1;  // autocovariances at lags 1 .. lag_cut - 1 are included
};

struct SizeMomentPair {
    SizeMoments bid;
    SizeMoments ask;
};

// Smallest lag whose sample autocorrelation is inside +-2/sqrt(n), capped.
std::size_t default_lag_cut(std::span<const double> x, std::size_t cap = 50);
// Lag-0 plus twice the autocovariances at lags 1 .. lag_cut - 1, all divided by n.
double long_run_variance(std::span<const double> x, std::size_t lag_cut);

SizeMoments estimate_size_moments(std::span<const double> sizes, std::optional<std::size_t> lag_cut = {});
SizeMomentPair estimate_size_moments(const FlowSample& s, std::optional<std::size_t> lag_cut = {});

enum class RhoAlignment {
    Index,       // i-th bid event against i-th ask event
    TimeBucket,  // net size per side in fixed-width time buckets
};

enum class RhoForm {
    Normalized,  // lag sums weighted by rates, divided by sqrt(lambda_a lambda_b) v_a v_b
    Literal,     // the printed factor-2 form, divided by v_a v_b only
};

struct RhoOptions {
    RhoAlignment alignment = RhoAlignment::Index;
    RhoForm form = RhoForm::Normalized;
    std::optional<std::size_t> lag_cut;
    double bucket_width = 0.0;  // 0: ten mean inter-event times of the slower side
};

struct RhoEstimate {
    ParamEstimate est;
    double raw = 0.0;  // before clamping
    bool clamped = false;
    std::size_t lag_cut = 1;
    RhoAlignment alignment = RhoAlignment::Index;
    RhoForm form = RhoForm::Normalized;
    double bucket_width = 0.0;
};

RhoEstimate estimate_rho(const FlowSample& s, const RhoOptions& opt = {});

// Hill statistic on |sizes|: value = mean log(X_(i) / X_(k+1)) over the top k, an estimate of
// 1/beta for tails P(|V| > x) ~ C x^-beta. Values below 0.5 mean a tail index above 2.
struct HillEstimate {
    ParamEstimate est;
    std::size_t k = 0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double tail_index = 0.0;  // 1 / value
};

std::size_t default_hill_k(std::size_t n);
HillEstimate hill_estimator(std::span<const double> sizes, std::optional<std::size_t> k = {});

struct VarianceRatioRow {
    std::size_t n = 0;
    std::size_t batches = 0;
    double value = 0.0;  // variance of non-overlapping n-sums divided by n
};

struct VarianceRatioTable {
    std::vector<VarianceRatioRow> rows;
    double linearity = 1.0;  // max / min of the value column
};

VarianceRatioTable variance_ratio_table(std::span<const double> sizes, std::span<const std::size_t> ladder);

// N = gamma1 / gamma0, mu = sqrt(N) lambda vbar, Lambda = N Sigma.
ScaledParams scaled_params(const DiffusionParams& est, double gamma0, double gamma1);

// (mean T^a + mean T^b) / 2.
double estimate_gamma0(const FlowSample& s);

struct EstimateOptions {
    std::optional<std::size_t> lag_cut;
    RhoOptions rho;
    std::optional<std::size_t> hill_k;
    double gamma1 = 30.0;
    std::vector<std::size_t> ladder{1, 2, 5, 10, 20, 50, 100};
};

struct EstimationReport {
    RateEstimates rates;
    SizeMomentPair sizes;
    RhoEstimate rho;
    HillEstimate hill_bid;
    HillEstimate hill_ask;
    double gamma0 = 0.0;
    DiffusionParams params;
    ScaledParams scaled;
    VarianceRatioTable vr_bid;
    VarianceRatioTable vr_ask;
    std::size_t events_bid = 0;
    std::size_t events_ask = 0;
};

EstimationReport estimate_all(const FlowSample& s, const EstimateOptions& opt = {});

}  // namespace htlob::est
