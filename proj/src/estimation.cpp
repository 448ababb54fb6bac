#include "htlob/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "htlob/stats.hpp"

namespace htlob::est {

namespace {

constexpr double kRhoBound = 1.0 - 1e-9;

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidInput(msg);
}

double mean_duration(const std::vector<OrderEvent>& ev) {
    return (ev.back().time - ev.front().time) / static_cast<double>(ev.size() - 1);
}

// Long-run cross-covariance sum c0 + sum_{k=1}^{L-1} (w_ab c_ab(k) + w_ba c_ba(k)) with c_ab(k) = cov(a_1, b_{1+k}).
double cross_sum(std::span<const double> b, std::span<const double> a, std::size_t lag_cut, double w0, double w_ab,
                 double w_ba) {
    double s = w0 * stats::cross_covariance(b, a, 0);
    for (std::size_t k = 1; k < lag_cut; ++k)
        s += w_ab * stats::cross_covariance(a, b, k) + w_ba * stats::cross_covariance(b, a, k);
    return s;
}

}  // namespace

FlowSample FlowSample::from_events(std::span<const OrderEvent> events) {
    FlowSample s;
    for (const auto& e : events) (e.side == Side::Bid ? s.bid_events : s.ask_events).push_back(e);
    s.validate();
    return s;
}

void FlowSample::validate() const {
    auto by_time = [](const OrderEvent& x, const OrderEvent& y) { return x.time < y.time; };
    require(std::is_sorted(bid_events.begin(), bid_events.end(), by_time), "flow sample: bid events not sorted");
    require(std::is_sorted(ask_events.begin(), ask_events.end(), by_time), "flow sample: ask events not sorted");
}

std::vector<double> FlowSample::sizes(Side s) const {
    std::vector<double> v;
    v.reserve(side(s).size());
    for (const auto& e : side(s)) v.push_back(e.delta);
    return v;
}

std::vector<double> FlowSample::durations(Side s) const {
    const auto& ev = side(s);
    std::vector<double> d;
    if (ev.size() < 2) return d;
    d.reserve(ev.size() - 1);
    for (std::size_t i = 1; i < ev.size(); ++i) d.push_back(ev[i].time - ev[i - 1].time);
    return d;
}

RateEstimates estimate_rates(const FlowSample& s) {
    auto one = [&](Side side) {
        const auto& ev = s.side(side);
        require(ev.size() >= 2, std::string("estimate_rates: need at least two ") + to_string(side) + " events");
        const double span = ev.back().time - ev.front().time;
        require(span > 0, "estimate_rates: events span zero time");
        ParamEstimate p;
        p.n_used = ev.size();
        p.value = (ev.size() - 1) / span;
        auto d = s.durations(side);
        if (d.size() >= 2) p.std_error = p.value * p.value * std::sqrt(stats::variance(d) / d.size());
        return p;
    };
    return {one(Side::Bid), one(Side::Ask)};
}

std::size_t default_lag_cut(std::span<const double> x, std::size_t cap) {
    const std::size_t n = x.size();
    require(n >= 2, "default_lag_cut: need at least two observations");
    const double c0 = stats::autocovariance(x, 0);
    if (!(c0 > 0)) return 1;
    const double band = 2.0 / std::sqrt(static_cast<double>(n));
    const std::size_t top = std::min(cap, n - 1);
    for (std::size_t k = 1; k <= top; ++k)
        if (std::abs(stats::autocovariance(x, k) / c0) < band) return k;
    return top;
}

double long_run_variance(std::span<const double> x, std::size_t lag_cut) {
    require(lag_cut >= 1 && lag_cut < x.size(), "long_run_variance: lag cut out of range");
    double v = stats::autocovariance(x, 0);
    for (std::size_t k = 1; k < lag_cut; ++k) v += 2 * stats::autocovariance(x, k);
    return v;
}

SizeMoments estimate_size_moments(std::span<const double> sizes, std::optional<std::size_t> lag_cut) {
    require(sizes.size() >= 10, "estimate_size_moments: need at least 10 observations");
    SizeMoments m;
    m.lag_cut = lag_cut ? *lag_cut : default_lag_cut(sizes);
    require(m.lag_cut >= 1, "estimate_size_moments: lag cut must be at least 1");
    require(sizes.size() >= 10 * m.lag_cut, "estimate_size_moments: need at least 10 * lag_cut observations");
    const double n = static_cast<double>(sizes.size());
    m.vbar.value = stats::mean(sizes);
    m.v2.value = long_run_variance(sizes, m.lag_cut);
    m.vbar.n_used = m.v2.n_used = sizes.size();
    m.vbar.std_error = std::sqrt(std::max(m.v2.value, 0.0) / n);
    m.v2.std_error = std::abs(m.v2.value) * std::sqrt(2.0 * (2 * m.lag_cut - 1) / n);
    return m;
}

SizeMomentPair estimate_size_moments(const FlowSample& s, std::optional<std::size_t> lag_cut) {
    auto b = s.sizes(Side::Bid), a = s.sizes(Side::Ask);
    return {estimate_size_moments(b, lag_cut), estimate_size_moments(a, lag_cut)};
}

RhoEstimate estimate_rho(const FlowSample& s, const RhoOptions& opt) {
    RhoEstimate r;
    r.alignment = opt.alignment;
    r.form = opt.form;
    const auto rates = estimate_rates(s);
    std::vector<double> b, a;
    double wb = 1, wa = 1;  // per-pair rates
    if (opt.alignment == RhoAlignment::Index) {
        b = s.sizes(Side::Bid);
        a = s.sizes(Side::Ask);
        const std::size_t n = std::min(b.size(), a.size());
        b.resize(n);
        a.resize(n);
        wb = rates.bid.value;
        wa = rates.ask.value;
    } else {
        double w = opt.bucket_width;
        if (w == 0) w = 10 * std::max(mean_duration(s.bid_events), mean_duration(s.ask_events));
        require(w > 0 && std::isfinite(w), "estimate_rho: bucket width must be positive");
        const double t0 = std::min(s.bid_events.front().time, s.ask_events.front().time);
        const double t1 = std::max(s.bid_events.back().time, s.ask_events.back().time);
        const auto nb = static_cast<std::size_t>(std::floor((t1 - t0) / w));
        require(nb >= 20, "estimate_rho: fewer than 20 time buckets");
        b.assign(nb, 0.0);
        a.assign(nb, 0.0);
        auto fill = [&](const std::vector<OrderEvent>& ev, std::vector<double>& out) {
            for (const auto& e : ev) {
                auto k = static_cast<std::size_t>((e.time - t0) / w);
                if (k < nb) out[k] += e.delta;
            }
        };
        fill(s.bid_events, b);
        fill(s.ask_events, a);
        r.bucket_width = w;
    }
    require(b.size() >= 20, "estimate_rho: insufficient overlap between the sides");
    r.lag_cut = opt.lag_cut ? *opt.lag_cut : std::max(default_lag_cut(b), default_lag_cut(a));
    require(b.size() >= 10 * r.lag_cut, "estimate_rho: need at least 10 * lag_cut pairs");
    const double vb = long_run_variance(b, r.lag_cut), va = long_run_variance(a, r.lag_cut);
    require(vb > 0 && va > 0, "estimate_rho: a side has no size variation");
    const double norm = std::sqrt(vb * va);
    if (opt.form == RhoForm::Normalized) {
        r.raw = cross_sum(b, a, r.lag_cut, std::max(wa, wb), wa, wb) / (std::sqrt(wa * wb) * norm);
    } else {
        r.raw = 2 * cross_sum(b, a, r.lag_cut, std::max(wa, wb), wa, wb) / norm;
    }
    r.clamped = !(std::abs(r.raw) < kRhoBound);
    r.est.value = std::clamp(r.raw, -kRhoBound, kRhoBound);
    r.est.n_used = b.size();
    r.est.std_error = (1 - std::min(1.0, r.est.value * r.est.value)) *
                      std::sqrt((2.0 * r.lag_cut - 1) / static_cast<double>(b.size()));
    return r;
}

std::size_t default_hill_k(std::size_t n) { return static_cast<std::size_t>(std::floor(std::pow(n, 0.6))); }

HillEstimate hill_estimator(std::span<const double> sizes, std::optional<std::size_t> k_opt) {
    const std::size_t n = sizes.size();
    const std::size_t k = k_opt ? *k_opt : default_hill_k(n);
    require(k >= 1, "hill_estimator: k must be at least 1");
    require(2 * k < n, "hill_estimator: k must be below n/2 (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    std::vector<double> x(n);
    std::transform(sizes.begin(), sizes.end(), x.begin(), [](double v) { return std::abs(v); });
    std::nth_element(x.begin(), x.begin() + k, x.end(), std::greater<>());
    const double threshold = x[k];
    require(threshold > 0, "hill_estimator: the (k+1)-th largest size is zero");
    double s = 0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(x[i] / threshold);
    HillEstimate h;
    h.k = k;
    h.est.value = s / static_cast<double>(k);
    h.est.n_used = n;
    h.est.std_error = h.est.value / std::sqrt(static_cast<double>(k));
    h.ci_low = h.est.value - 1.96 * h.est.std_error;
    h.ci_high = h.est.value + 1.96 * h.est.std_error;
    h.tail_index = h.est.value > 0 ? 1 / h.est.value : INFINITY;
    return h;
}

VarianceRatioTable variance_ratio_table(std::span<const double> sizes, std::span<const std::size_t> ladder) {
    require(!ladder.empty(), "variance_ratio_table: empty ladder");
    VarianceRatioTable t;
    double lo = INFINITY, hi = 0;
    for (std::size_t n : ladder) {
        require(n >= 1, "variance_ratio_table: batch size must be at least 1");
        const std::size_t nb = sizes.size() / n;
        require(nb >= 2, "variance_ratio_table: fewer than two batches of " + std::to_string(n));
        std::vector<double> sums(nb, 0.0);
        for (std::size_t j = 0; j < nb; ++j)
            for (std::size_t i = 0; i < n; ++i) sums[j] += sizes[j * n + i];
        VarianceRatioRow row{n, nb, stats::variance(sums) / static_cast<double>(n)};
        lo = std::min(lo, row.value);
        hi = std::max(hi, row.value);
        t.rows.push_back(row);
    }
    t.linearity = lo > 0 ? hi / lo : INFINITY;
    return t;
}

ScaledParams scaled_params(const DiffusionParams& est, double gamma0, double gamma1) {
    est.validate();
    require(gamma0 > 0 && gamma1 >= gamma0, "scaled_params: need gamma1 >= gamma0 > 0");
    ScaledParams sp;
    sp.gamma0 = gamma0;
    sp.gamma1 = gamma1;
    sp.N = gamma1 / gamma0;
    const double rn = std::sqrt(sp.N);
    sp.mu_bid = rn * est.drift_bid();
    sp.mu_ask = rn * est.drift_ask();
    const Cov2 c = est.cov();
    sp.Lambda = {sp.N * c.bb, sp.N * c.ba, sp.N * c.aa};
    return sp;
}

double estimate_gamma0(const FlowSample& s) {
    require(s.bid_events.size() >= 2 && s.ask_events.size() >= 2, "estimate_gamma0: need two events per side");
    return 0.5 * (mean_duration(s.bid_events) + mean_duration(s.ask_events));
}

EstimationReport estimate_all(const FlowSample& s, const EstimateOptions& opt) {
    s.validate();
    EstimationReport r;
    r.events_bid = s.bid_events.size();
    r.events_ask = s.ask_events.size();
    r.rates = estimate_rates(s);
    r.sizes = estimate_size_moments(s, opt.lag_cut);
    r.rho = estimate_rho(s, opt.rho);
    const auto sb = s.sizes(Side::Bid), sa = s.sizes(Side::Ask);
    r.hill_bid = hill_estimator(sb, opt.hill_k);
    r.hill_ask = hill_estimator(sa, opt.hill_k);
    r.gamma0 = estimate_gamma0(s);
    r.params.lambda_bid = r.rates.bid.value;
    r.params.lambda_ask = r.rates.ask.value;
    r.params.vbar_bid = r.sizes.bid.vbar.value;
    r.params.vbar_ask = r.sizes.ask.vbar.value;
    r.params.v2_bid = r.sizes.bid.v2.value;
    r.params.v2_ask = r.sizes.ask.v2.value;
    r.params.rho = r.rho.est.value;
    r.scaled = scaled_params(r.params, r.gamma0, std::max(opt.gamma1, r.gamma0));
    // Rungs with fewer than ten batches are dropped.
    auto rungs = [&](std::size_t n) {
        std::vector<std::size_t> out;
        for (std::size_t m : opt.ladder)
            if (m >= 1 && n / m >= 10) out.push_back(m);
        if (out.empty()) out.push_back(1);
        return out;
    };
    r.vr_bid = variance_ratio_table(sb, rungs(sb.size()));
    r.vr_ask = variance_ratio_table(sa, rungs(sa.size()));
    return r;
}

}  // namespace htlob::est
