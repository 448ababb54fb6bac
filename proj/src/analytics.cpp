#include "htlob/analytics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "htlob/bessel.hpp"
#include "htlob/diffusion.hpp"

namespace htlob::analytics {

namespace {

constexpr double pi = std::numbers::pi;

void require_interior(double x, double y) {
    if (!(x > 0) || !(y > 0) || !std::isfinite(x) || !std::isfinite(y))
        throw InvalidInput("queue sizes must be strictly positive and finite");
}

void require_driftless(const DiffusionParams& p, const char* what) {
    if (!p.driftless())
        throw InvalidInput(std::string(what) + ": needs zero mean order sizes (use the drifted variant)");
}

}  // namespace

double cone_alpha(double rho) {
    if (!(rho > -1 && rho < 1)) throw InvalidInput("rho must lie in (-1, 1)");
    return std::atan2(std::sqrt(1 - rho * rho), -rho);
}

ConeGeometry cone_geometry(double x, double y, const DiffusionParams& p, RadiusConvention radius) {
    p.validate();
    require_interior(x, y);
    const double rho = p.rho;
    const double s = std::sqrt(1 - rho * rho);
    const double zb = x / p.sigma_bid();
    const double za = y / p.sigma_ask();
    ConeGeometry g;
    g.alpha = cone_alpha(rho);
    g.theta0 = std::atan2(za * s, zb - rho * za);
    if (radius == RadiusConvention::Standardized) {
        g.U = (zb * zb - 2 * rho * zb * za + za * za) / (1 - rho * rho);
    } else {
        const double xs = x / (p.lambda_ask * p.v2_ask);
        const double ys = y / (p.lambda_bid * p.v2_bid);
        g.U = (xs * xs + ys * ys - 2 * rho * xs * ys) / (1 - rho);
    }
    g.r0 = std::sqrt(g.U);
    return g;
}

double theta0_printed(double x, double y, double rho) {
    const double s = std::sqrt(1 - rho * rho);
    if (x == rho * y) return pi / 2;
    const double base = std::atan(-y * s / (x - rho * y));
    return x < rho * y ? pi + base : base;
}

double prob_up(double x, double y, const DiffusionParams& p) {
    require_driftless(p, "prob_up");
    ConeGeometry g = cone_geometry(x, y, p);
    return std::clamp(1.0 - g.theta0 / g.alpha, 0.0, 1.0);
}

double prob_up_arctan(double x, double y, const DiffusionParams& p) {
    p.validate();
    require_interior(x, y);
    const double xs = x / p.sigma_bid();
    const double ys = y / p.sigma_ask();
    const double k = std::sqrt((1 + p.rho) / (1 - p.rho));
    return 0.5 - std::atan(k * (ys - xs) / (ys + xs)) / (2 * std::atan(k));
}

double prob_up_arcsin(double x, double y, const DiffusionParams& p) {
    p.validate();
    require_interior(x, y);
    const double xs = x / p.sigma_bid();
    const double ys = y / p.sigma_ask();
    const double as = std::asin(p.rho);
    const double beta = as / 2;
    const double theta = std::atan2(ys, xs);
    return (pi / 2 + as / 2 - std::atan2(std::sin(theta - beta), std::cos(beta + theta))) / (pi / 2 + as);
}

ProbEstimate prob_up_or_mc(double x, double y, const DiffusionParams& p, std::size_t paths, std::uint64_t seed) {
    if (p.driftless()) return {prob_up(x, y, p), 0.0, false, 0};
    diffusion::McOptions opt;
    opt.paths = paths;
    opt.seed = seed;
    auto st = diffusion::exit_statistics(p, {x, y}, opt);
    return {st.p_ask, st.p_ask_se, true, st.paths};
}

double duration_survival(double t, double x, double y, const DiffusionParams& p, const SeriesOptions& opt) {
    require_driftless(p, "duration_survival");
    if (!(t > 0) || std::isnan(t)) throw InvalidInput("duration_survival: t must be positive");
    if (std::isinf(t)) return 0.0;
    const RadiusConvention rc = opt.prefactor == SurvivalPrefactor::Standardized ? RadiusConvention::Standardized
                                                                                 : RadiusConvention::PaperDisplay;
    ConeGeometry g = cone_geometry(x, y, p, rc);
    const double z = g.U / (4 * t);
    const double pref = std::sqrt(2 * g.U / (pi * t));
    double sum = 0;
    int small = 0;
    for (int n = 0; n < opt.max_terms; ++n) {
        const double m = 2.0 * n + 1;
        const double nu = m * pi / g.alpha;
        const double term = std::sin(m * pi * g.theta0 / g.alpha) / m *
                            (bessel_ie((nu - 1) / 2, z) + bessel_ie((nu + 1) / 2, z));
        sum += term;
        if (std::abs(pref * term) < opt.term_tol) {
            if (++small == 3) break;
        } else {
            small = 0;
        }
    }
    return std::clamp(pref * sum, 0.0, 1.0);
}

DriftedDurationParams drifted_duration_params(const DiffusionParams& p) {
    p.validate();
    const Cov2 s = p.cov();
    const double det = s.det();
    const double mb = p.drift_bid(), ma = p.drift_ask();
    DriftedDurationParams d;
    // a = -Sigma^{-1} mu
    d.a1 = -(s.aa * mb - s.ba * ma) / det;
    d.a2 = -(-s.ba * mb + s.bb * ma) / det;
    d.a_t = 0.5 * (d.a1 * mb + d.a2 * ma);
    const double rs = std::sqrt(1 - p.rho * p.rho);
    d.d1 = (mb / p.sigma_bid() - p.rho * ma / p.sigma_ask()) / rs;
    d.d2 = ma / p.sigma_ask();
    return d;
}

DriftedSurvival duration_survival_drifted(double t, double x, double y, const DiffusionParams& p,
                                          const DriftedOptions& opt) {
    p.validate();
    if (!(t > 0) || !std::isfinite(t)) throw InvalidInput("duration_survival_drifted: t must be positive");
    ConeGeometry g = cone_geometry(x, y, p);
    DriftedDurationParams dp = drifted_duration_params(p);
    const double c1 = dp.d1, c2 = dp.d2;
    const double cn = std::hypot(c1, c2);
    const double w1 = g.r0 * std::cos(g.theta0), w2 = g.r0 * std::sin(g.theta0);
    const double log_front = -(c1 * w1 + c2 * w2) - 0.5 * cn * cn * t;
    const double alpha = g.alpha;
    const double r0 = g.r0;

    const double lo = std::max(0.0, r0 - t * cn - 12 * std::sqrt(t));
    const double hi = r0 + t * cn + 12 * std::sqrt(t);

    using GL = boost::math::quadrature::gauss<double, 20>;
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

    // Angular integral times exp(-r |c|), on panels short enough for the n-th harmonic.
    auto angular = [&](int n, double r) {
        const double k = n * pi / alpha;
        const int panels = std::max(2, n / 2 + 1);
        const double w = alpha / panels;
        double acc = 0;
        for (int j = 0; j < panels; ++j) {
            const double a0 = j * w;
            acc += GL::integrate(
                [&](double th) {
                    const double s = opt.inner == InnerSine::WithTheta ? std::sin(k * th) : std::sin(k);
                    return s * std::exp(r * (c1 * std::cos(th) + c2 * std::sin(th) - cn));
                },
                a0, a0 + w);
        }
        return acc;
    };

    DriftedSurvival out;
    double sum = 0, err = 0;
    int small = 0;
    for (int n = 1; n <= opt.max_terms; ++n) {
        const double s0 = std::sin(n * pi * g.theta0 / alpha);
        const double nu = n * pi / alpha;
        auto f = [&](double r) {
            if (r <= 0) return 0.0;
            const double e = -(r - r0) * (r - r0) / (2 * t) + r * cn + log_front;
            return r * std::exp(e) * bessel_ie(nu, r * r0 / t) * angular(n, r);
        };
        double qerr = 0;
        const double q = GK::integrate(f, lo, hi, 12, opt.quad_tol, &qerr);
        const double term = 2.0 / (alpha * t) * s0 * q;
        sum += term;
        err += 2.0 / (alpha * t) * std::abs(s0) * qerr;
        out.terms = n;
        if (std::abs(term) < opt.term_tol) {
            if (++small == 3) break;
        } else {
            small = 0;
        }
    }
    out.raw = sum;
    out.error_bound = err + 3 * opt.term_tol;
    out.value = std::clamp(sum, 0.0, 1.0);
    out.clamped = out.value != sum;
    return out;
}

double duration_tail_index(double rho) { return pi / (2 * cone_alpha(rho)); }

double duration_tail_index(const DiffusionParams& p) {
    p.validate();
    require_driftless(p, "duration_tail_index");
    return duration_tail_index(p.rho);
}

AgentModelParams agent_model_params(double m, double l, double gamma, double mean_duration, double e_v2,
                                    double vbar, AgentRhoForm form, bool flip_signs) {
    if (!(m >= 0) || !(l >= 0) || m + l > 1 + 1e-15) throw InvalidInput("agent model: need m, l >= 0, m + l <= 1");
    if (!(gamma >= 0 && gamma <= 1)) throw InvalidInput("agent model: gamma must lie in [0, 1]");
    if (!(mean_duration > 0)) throw InvalidInput("agent model: mean duration must be positive");
    if (!(e_v2 > 0) || e_v2 < vbar * vbar) throw InvalidInput("agent model: need E[V^2] >= Vbar^2 > 0");
    const double k = 1.0 - l - m;
    AgentModelParams out;
    out.lambda = 1.0 / mean_duration;
    if (form == AgentRhoForm::Derived) {
        flow::AgentMoments mo = flow::agent_moments(m, l, gamma, vbar, e_v2, flip_signs);
        // Poisson trader arrivals: the long-run covariance rate is lambda E[V V'], uncentered.
        out.mu = out.lambda * mo.mean;
        out.v2 = mo.second;
        out.rho = mo.second > 0 ? mo.cross / mo.second : 0.0;
    } else {
        out.mu = vbar / (2 * mean_duration) * (2 * m + 2 * gamma * k - 1);
        out.v2 = mean_duration * e_v2 / 4 * (m + l + (gamma * gamma + (1 - gamma) * (1 - gamma)) / 2 * k);
        out.rho = -(k * k * gamma * (1 - gamma)) / (1 + k * (gamma * gamma - gamma - 0.5));
    }
    return out;
}

}  // namespace htlob::analytics
