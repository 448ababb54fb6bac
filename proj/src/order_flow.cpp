#include "htlob/order_flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "htlob/random.hpp"

namespace htlob::flow {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidInput(what);
}

bool finite_pos(double v) { return v > 0 && std::isfinite(v); }

// Merge two time-sorted streams; bid events come first on equal timestamps.
std::vector<OrderEvent> merge_sides(std::vector<OrderEvent> bid, std::vector<OrderEvent> ask) {
    std::vector<OrderEvent> out;
    out.reserve(bid.size() + ask.size());
    std::merge(bid.begin(), bid.end(), ask.begin(), ask.end(), std::back_inserter(out),
               [](const OrderEvent& a, const OrderEvent& b) { return a.time < b.time; });
    return out;
}

Eigen::MatrixXd branching_matrix(const HawkesFlowSpec& s) {
    const auto k = static_cast<Eigen::Index>(s.types.size());
    Eigen::MatrixXd b(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) b(i, j) = s.excitation[i][j] / s.decay[i];
    return b;
}

}  // namespace

void PoissonFlowSpec::validate() const {
    require(finite_pos(lambda_limit) && finite_pos(mu_market) && finite_pos(theta_cancel),
            "poisson flow: all rates must be positive");
    require(finite_pos(unit_size), "poisson flow: unit_size must be positive");
}

void HawkesFlowSpec::validate() const {
    const std::size_t k = types.size();
    require(k > 0, "hawkes flow: need at least one event type");
    require(base_rates.size() == k && decay.size() == k && excitation.size() == k,
            "hawkes flow: base_rates, decay and excitation must match the number of types");
    for (std::size_t i = 0; i < k; ++i) {
        require(finite_pos(base_rates[i]), "hawkes flow: base rates must be positive");
        require(finite_pos(decay[i]), "hawkes flow: decays must be positive");
        require(excitation[i].size() == k, "hawkes flow: excitation must be square");
        for (double d : excitation[i]) require(d >= 0 && std::isfinite(d), "hawkes flow: excitation must be >= 0");
        require(types[i].sign == 1.0 || types[i].sign == -1.0, "hawkes flow: type sign must be +1 or -1");
    }
    require(size_dist.strictly_positive(), "hawkes flow: size distribution must be positive");
    double r = branching_radius();
    require(r < 1.0, "hawkes flow: branching spectral radius " + std::to_string(r) + " is not below 1");
}

double HawkesFlowSpec::branching_radius() const {
    Eigen::EigenSolver<Eigen::MatrixXd> es(branching_matrix(*this), false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> HawkesFlowSpec::mean_intensities() const {
    const auto k = static_cast<Eigen::Index>(types.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k) - branching_matrix(*this);
    Eigen::VectorXd th = Eigen::Map<const Eigen::VectorXd>(base_rates.data(), k);
    Eigen::VectorXd lam = a.partialPivLu().solve(th);
    return {lam.data(), lam.data() + k};
}

HawkesFlowSpec HawkesFlowSpec::symmetric(double theta, double self, double cross, double kappa, Dist size) {
    HawkesFlowSpec s;
    s.types = {{Side::Bid, 1.0}, {Side::Bid, -1.0}, {Side::Ask, 1.0}, {Side::Ask, -1.0}};
    s.base_rates.assign(4, theta);
    s.decay.assign(4, kappa);
    s.excitation.assign(4, std::vector<double>(4, 0.0));
    for (int i = 0; i < 4; ++i) {
        s.excitation[i][i] = self;
        s.excitation[i][i ^ 1] = cross;
    }
    s.size_dist = std::move(size);
    return s;
}

void ACDSpec::validate() const {
    require(finite_pos(a0), "acd: a0 must be positive");
    double sum = 0;
    for (double a : a_coeffs) {
        require(a >= 0 && std::isfinite(a), "acd: coefficients must be non-negative");
        sum += a;
    }
    for (double b : b_coeffs) {
        require(b >= 0 && std::isfinite(b), "acd: coefficients must be non-negative");
        sum += b;
    }
    require(sum < 1.0, "acd: sum of coefficients must be below 1 for stationarity");
    require(innovation.strictly_positive(), "acd: innovations must be positive");
    require(std::abs(innovation.mean() - 1.0) < 1e-9, "acd: innovations must have unit mean");
}

double ACDSpec::unconditional_mean() const {
    double sum = std::accumulate(a_coeffs.begin(), a_coeffs.end(), 0.0) +
                 std::accumulate(b_coeffs.begin(), b_coeffs.end(), 0.0);
    return a0 / (1.0 - sum);
}

void ArchVolumeSpec::validate() const {
    require(finite_pos(alpha0_bid) && finite_pos(alpha0_ask), "arch: alpha0 must be positive");
    require(alpha1_bid >= 0 && alpha1_bid < 1 && alpha1_ask >= 0 && alpha1_ask < 1,
            "arch: alpha1 must lie in [0, 1)");
    require(rho_z > -1 && rho_z < 1, "arch: rho_z must lie in (-1, 1)");
    require(std::isfinite(mean_bid) && std::isfinite(mean_ask), "arch: means must be finite");
}

void AgentMixSpec::validate() const {
    require(m >= 0 && l >= 0 && m + l <= 1 + 1e-15, "agent mix: need m >= 0, l >= 0, m + l <= 1");
    require(gamma > 0 && gamma < 1, "agent mix: gamma must lie in (0, 1)");
    require(duration_dist.strictly_positive() && std::isfinite(duration_dist.mean()),
            "agent mix: durations must be positive with finite mean");
    require(size_dist.strictly_positive() && std::isfinite(size_dist.variance()),
            "agent mix: sizes must be positive with finite second moment");
}

void AcdArchSpec::validate() const {
    durations_bid.validate();
    durations_ask.validate();
    volumes.validate();
}

std::vector<OrderEvent> gen_poisson_flow(const PoissonFlowSpec& spec, double horizon, std::uint64_t seed) {
    spec.validate();
    require(horizon >= 0 && std::isfinite(horizon), "poisson flow: horizon must be non-negative");
    const double rate = spec.event_rate();
    const double p_pos = spec.prob_positive();
    auto side_stream = [&](Side side, const char* name) {
        Rng rng = make_rng(seed, name);
        std::vector<OrderEvent> out;
        out.reserve(static_cast<std::size_t>(rate * horizon * 1.05) + 16);
        double t = 0;
        for (;;) {
            t += -std::log(uniform_open(rng)) / rate;
            if (t > horizon) break;
            double d = uniform_open(rng) < p_pos ? spec.unit_size : -spec.unit_size;
            out.push_back({t, side, d});
        }
        return out;
    };
    return merge_sides(side_stream(Side::Bid, "poisson.bid"), side_stream(Side::Ask, "poisson.ask"));
}

void AlternatingFlowSpec::validate() const {
    require(rate > 0 && std::isfinite(rate), "alternating flow: rate must be positive");
    require(size > 0 && std::isfinite(size), "alternating flow: size must be positive");
}

std::vector<OrderEvent> gen_alternating_flow(const AlternatingFlowSpec& spec, double horizon, std::uint64_t seed) {
    spec.validate();
    require(horizon >= 0 && std::isfinite(horizon), "alternating flow: horizon must be non-negative");
    auto side_stream = [&](Side side, const char* name) {
        Rng rng = make_rng(seed, name);
        std::vector<OrderEvent> out;
        double t = 0, sign = 1;
        for (;;) {
            t += -std::log(uniform_open(rng)) / spec.rate;
            if (t > horizon) break;
            out.push_back({t, side, sign * spec.size});
            sign = -sign;
        }
        return out;
    };
    return merge_sides(side_stream(Side::Bid, "alternating.bid"), side_stream(Side::Ask, "alternating.ask"));
}

std::vector<OrderEvent> gen_hawkes_flow(const HawkesFlowSpec& spec, double horizon, std::uint64_t seed) {
    spec.validate();
    require(horizon >= 0 && std::isfinite(horizon), "hawkes flow: horizon must be non-negative");
    const std::size_t k = spec.types.size();
    Rng rng = make_rng(seed, "hawkes");
    Rng size_rng = make_rng(seed, "hawkes.size");
    std::vector<double> exc(k, 0.0);  // excitation part of each intensity at the current time
    std::vector<double> lam(k);
    std::vector<OrderEvent> out;
    double t = 0;
    for (;;) {
        // Intensities only decay between events, so the current total bounds the future.
        double bound = 0;
        for (std::size_t i = 0; i < k; ++i) bound += spec.base_rates[i] + exc[i];
        double w = -std::log(uniform_open(rng)) / bound;
        t += w;
        if (t > horizon) break;
        double total = 0;
        for (std::size_t i = 0; i < k; ++i) {
            exc[i] *= std::exp(-spec.decay[i] * w);
            lam[i] = spec.base_rates[i] + exc[i];
            total += lam[i];
        }
        double u = uniform_open(rng) * bound;
        if (u > total) continue;  // rejected
        std::size_t type = 0;
        double acc = lam[0];
        while (acc < u && type + 1 < k) acc += lam[++type];
        for (std::size_t i = 0; i < k; ++i) exc[i] += spec.excitation[i][type];
        const auto& ty = spec.types[type];
        out.push_back({t, ty.side, ty.sign * spec.size_dist.sample(size_rng)});
    }
    return out;
}

std::vector<double> gen_acd_durations(const ACDSpec& spec, std::size_t count, std::uint64_t seed) {
    spec.validate();
    Rng rng = make_rng(seed, "acd");
    const std::size_t p = spec.a_coeffs.size(), q = spec.b_coeffs.size();
    const std::size_t warmup = 10 * (p + q);
    const double m = spec.unconditional_mean();
    std::vector<double> psi_hist(p, m), t_hist(q, m);  // most recent first
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count + warmup; ++i) {
        double psi = spec.a0;
        for (std::size_t j = 0; j < p; ++j) psi += spec.a_coeffs[j] * psi_hist[j];
        for (std::size_t j = 0; j < q; ++j) psi += spec.b_coeffs[j] * t_hist[j];
        double dur = psi * spec.innovation.sample(rng);
        if (p) {
            std::rotate(psi_hist.rbegin(), psi_hist.rbegin() + 1, psi_hist.rend());
            psi_hist[0] = psi;
        }
        if (q) {
            std::rotate(t_hist.rbegin(), t_hist.rbegin() + 1, t_hist.rend());
            t_hist[0] = dur;
        }
        if (i >= warmup) out.push_back(dur);
    }
    return out;
}

std::vector<QueuePair> gen_arch_volumes(const ArchVolumeSpec& spec, std::size_t count, std::uint64_t seed) {
    spec.validate();
    Rng rng = make_rng(seed, "arch");
    std::normal_distribution<double> normal;
    const double c = std::sqrt(1 - spec.rho_z * spec.rho_z);
    // Start from the stationary second moment; 100 draws of burn-in remove the rest of the transient.
    double prev_b2 = spec.stationary_variance_bid(), prev_a2 = spec.stationary_variance_ask();
    const std::size_t burn = 100;
    std::vector<QueuePair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count + burn; ++i) {
        double z1 = normal(rng), z2 = normal(rng);
        double zb = z1, za = spec.rho_z * z1 + c * z2;
        double sb = std::sqrt(spec.alpha0_bid + spec.alpha1_bid * prev_b2);
        double sa = std::sqrt(spec.alpha0_ask + spec.alpha1_ask * prev_a2);
        double vb = sb * zb, va = sa * za;
        prev_b2 = vb * vb;
        prev_a2 = va * va;
        if (i >= burn) out.push_back({spec.mean_bid + vb, spec.mean_ask + va});
    }
    return out;
}

std::vector<AgentTrade> gen_agent_trades(const AgentMixSpec& spec, double horizon, std::uint64_t seed) {
    spec.validate();
    require(horizon >= 0 && std::isfinite(horizon), "agent flow: horizon must be non-negative");
    Rng rng = make_rng(seed, "agent");
    const double sm = spec.flip_signs ? -1.0 : 1.0;
    std::vector<AgentTrade> out;
    out.reserve(static_cast<std::size_t>(horizon / spec.duration_dist.mean() * 1.05) + 16);
    double t = 0;
    for (;;) {
        t += spec.duration_dist.sample(rng);
        if (t > horizon) break;
        double u = uniform_open(rng);
        bool buyer = uniform_open(rng) < 0.5;
        double v = spec.size_dist.sample(rng);
        AgentTrade tr;
        tr.time = t;
        if (u < spec.m) {
            tr.type = buyer ? AgentType::MarketBid : AgentType::MarketAsk;
            (buyer ? tr.bid_delta : tr.ask_delta) = sm * v;
        } else if (u < spec.m + spec.l) {
            tr.type = buyer ? AgentType::LimitBid : AgentType::LimitAsk;
            (buyer ? tr.bid_delta : tr.ask_delta) = -sm * v;
        } else {
            if (buyer) {
                tr.type = AgentType::MixedBuy;
                tr.bid_delta = spec.gamma * v;
                tr.ask_delta = -(1 - spec.gamma) * v;
            } else {
                tr.type = AgentType::MixedSell;
                tr.bid_delta = -(1 - spec.gamma) * v;
                tr.ask_delta = spec.gamma * v;
            }
        }
        out.push_back(tr);
    }
    return out;
}

std::vector<OrderEvent> gen_agent_flow(const AgentMixSpec& spec, double horizon, std::uint64_t seed) {
    auto trades = gen_agent_trades(spec, horizon, seed);
    std::vector<OrderEvent> out;
    out.reserve(trades.size() * 2);
    for (const auto& tr : trades) {
        if (tr.bid_delta != 0) out.push_back({tr.time, Side::Bid, tr.bid_delta});
        if (tr.ask_delta != 0) out.push_back({tr.time, Side::Ask, tr.ask_delta});
    }
    return out;
}

std::vector<OrderEvent> gen_acd_arch_flow(const AcdArchSpec& spec, double horizon, std::uint64_t seed) {
    spec.validate();
    require(horizon >= 0 && std::isfinite(horizon), "acd/arch flow: horizon must be non-negative");
    auto times = [&](const ACDSpec& acd, const char* name) {
        std::vector<double> ts;
        double t = 0;
        std::uint64_t chunk_seed = make_rng(seed, name)();
        std::size_t chunk = static_cast<std::size_t>(horizon / acd.unconditional_mean() * 1.2) + 64;
        // One long draw keeps the duration sequence a single stationary realization.
        for (int attempt = 0;; ++attempt) {
            auto d = gen_acd_durations(acd, chunk, chunk_seed);
            ts.clear();
            t = 0;
            for (double x : d) {
                t += x;
                if (t > horizon) break;
                ts.push_back(t);
            }
            if (t > horizon || attempt > 20) break;
            chunk *= 2;
        }
        return ts;
    };
    std::vector<double> tb = times(spec.durations_bid, "acd.bid");
    std::vector<double> ta = spec.shared_clock ? tb : times(spec.durations_ask, "acd.ask");
    auto vols = gen_arch_volumes(spec.volumes, std::max(tb.size(), ta.size()), make_rng(seed, "arch.seed")());
    std::vector<OrderEvent> bid, ask;
    bid.reserve(tb.size());
    ask.reserve(ta.size());
    for (std::size_t i = 0; i < tb.size(); ++i)
        if (vols[i].bid != 0) bid.push_back({tb[i], Side::Bid, vols[i].bid});
    for (std::size_t i = 0; i < ta.size(); ++i)
        if (vols[i].ask != 0) ask.push_back({ta[i], Side::Ask, vols[i].ask});
    return merge_sides(std::move(bid), std::move(ask));
}

std::vector<OrderEvent> generate(const FlowSpec& spec, double horizon, std::uint64_t seed) {
    return std::visit(
        [&](const auto& s) -> std::vector<OrderEvent> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PoissonFlowSpec>)
                return gen_poisson_flow(s, horizon, seed);
            else if constexpr (std::is_same_v<T, HawkesFlowSpec>)
                return gen_hawkes_flow(s, horizon, seed);
            else if constexpr (std::is_same_v<T, AgentMixSpec>)
                return gen_agent_flow(s, horizon, seed);
            else if constexpr (std::is_same_v<T, AcdArchSpec>)
                return gen_acd_arch_flow(s, horizon, seed);
            else
                return gen_alternating_flow(s, horizon, seed);
        },
        spec);
}

const char* flow_name(const FlowSpec& spec) {
    static constexpr const char* names[] = {"poisson", "hawkes", "agent", "acd_arch", "alternating"};
    return names[spec.index()];
}

AgentMoments agent_moments(double m, double l, double gamma, double vbar, double e_v2, bool flip_signs) {
    const double k = 1.0 - l - m;
    const double sm = flip_signs ? -1.0 : 1.0;
    AgentMoments r;
    r.mean = vbar * (sm * (m - l) + k * (2 * gamma - 1)) / 2;
    r.second = e_v2 * (1 - 2 * gamma * (1 - gamma) * k) / 2;
    r.cross = -gamma * (1 - gamma) * k * e_v2;
    return r;
}

std::optional<FlowMoments> net_flow_moments(const FlowSpec& spec) {
    FlowMoments fm;
    if (const auto* p = std::get_if<PoissonFlowSpec>(&spec)) {
        p->validate();
        const double r = p->event_rate();
        const double u = p->unit_size;
        const double drift = u * (p->lambda_limit - p->mu_market - p->theta_cancel);
        fm.mean = {drift, drift};
        fm.cov = {{{r * u * u, 0.0}, {0.0, r * u * u}}};
        fm.rate_bid = fm.rate_ask = r;
        return fm;
    }
    if (const auto* a = std::get_if<AgentMixSpec>(&spec)) {
        a->validate();
        const double lam = 1.0 / a->duration_dist.mean();
        const double var_t = a->duration_dist.variance();
        AgentMoments mo = agent_moments(a->m, a->l, a->gamma, a->size_dist.mean(), a->size_dist.second_moment(),
                                        a->flip_signs);
        // Renewal-reward: per-trader rewards independent of the trader clock.
        const double var = lam * mo.variance() + lam * lam * lam * var_t * mo.mean * mo.mean;
        const double cov = lam * mo.covariance() + lam * lam * lam * var_t * mo.mean * mo.mean;
        fm.mean = {lam * mo.mean, lam * mo.mean};
        fm.cov = {{{var, cov}, {cov, var}}};
        const double k = 1.0 - a->l - a->m;
        fm.rate_bid = fm.rate_ask = lam * ((a->m + a->l) / 2 + k);
        return fm;
    }
    if (const auto* h = std::get_if<HawkesFlowSpec>(&spec)) {
        h->validate();
        const auto k = static_cast<Eigen::Index>(h->types.size());
        auto lam = h->mean_intensities();
        Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(k, k) - branching_matrix(*h)).inverse();
        Eigen::MatrixXd c = inv * Eigen::VectorXd::Map(lam.data(), k).asDiagonal() * inv.transpose();
        const double ev = h->size_dist.mean(), ev2 = h->size_dist.second_moment();
        for (Eigen::Index i = 0; i < k; ++i) {
            const int si = h->types[i].side == Side::Bid ? 0 : 1;
            fm.mean[si] += h->types[i].sign * lam[i] * ev;
            (si == 0 ? fm.rate_bid : fm.rate_ask) += lam[i];
            fm.cov[si][si] += lam[i] * (ev2 - ev * ev);
            for (Eigen::Index j = 0; j < k; ++j) {
                const int sj = h->types[j].side == Side::Bid ? 0 : 1;
                fm.cov[si][sj] += h->types[i].sign * h->types[j].sign * ev * ev * c(i, j);
            }
        }
        return fm;
    }
    if (const auto* al = std::get_if<AlternatingFlowSpec>(&spec)) {
        al->validate();
        fm.rate_bid = fm.rate_ask = al->rate;
        return fm;
    }
    return std::nullopt;
}

}  // namespace htlob::flow
