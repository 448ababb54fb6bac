#include <cmath>
#include <numbers>

#include "doctest.h"
#include "htlob/analytics.hpp"
#include "htlob/diffusion.hpp"
#include "htlob/stats.hpp"

using namespace htlob;
using namespace htlob::analytics;
using std::numbers::pi;

namespace {

// Closed-form p_up from tests/oracles/wedge_oracle.py, unit scales.
struct PupRef {
    double x, y, rho, value;
};
constexpr PupRef kPup[] = {
    {1, 1, 0.0, 0.5},
    {1.7320508075688772, 1, 0.0, 0.6666666666666666},
    {1, 2, -0.7, 0.3250897460646379},
    {2, 0.5, 0.5, 0.8841842812665501},
    {0.7, 3.1, 0.3, 0.12107399337612812},
};

// Survival from direct integration of the wedge transition density (same oracle).
struct SurvRef {
    double t, x, y, rho, value;
};
constexpr SurvRef kSurv[] = {
    {1.0, 1.0, 1.0, 0.0, 0.4660649426743922},
    {0.5, 1.0, 1.7, -0.5, 0.8266255842804379},
    {2.0, 1.5, 0.8, 0.5, 0.3668726926332691},
    {4.0, 1.0, 1.0, -0.7, 0.056712780013309406},
};

// Drifted: sigma_b=0.6, sigma_a=0.5, rho=-0.4, drift (-0.3, 0.2).
struct DriftRef {
    double t, x, y, value;
};
constexpr DriftRef kDrift[] = {
    {0.5, 1.0, 1.2, 0.9594014247106845},
    {1.0, 1.0, 1.2, 0.7924487142607691},
    {2.0, 1.0, 1.2, 0.4986471072674271},
    {1.0, 2.0, 0.7, 0.908248867248075},
};

DiffusionParams drifted() { return DiffusionParams::from_moments(-0.3, 0.2, 0.6, 0.5, -0.4); }

// Frozen 1e7-path first-exit Monte Carlo runs (seed 20240601, kappa 0.04).
constexpr double kMcPupRhoM07 = 0.325014, kMcPupRhoM07Se = 0.000148;      // (1, 2), rho = -0.7
constexpr double kMcSurvRho0 = 0.466210, kMcSurvRho0Se = 0.000158;        // t = 1, (1, 1), rho = 0
constexpr double kMcCitiSurv = 0.318067, kMcCitiSurvSe = 0.000147;        // t = 30 s

}  // namespace

TEST_CASE("cone geometry") {
    CHECK(cone_alpha(0.0) == doctest::Approx(pi / 2));
    CHECK(cone_alpha(0.5) == doctest::Approx(2 * pi / 3));
    CHECK(cone_alpha(-0.5) == doctest::Approx(pi / 3));
    auto g = cone_geometry(1, 1, DiffusionParams::standard(0.0));
    CHECK(g.theta0 == doctest::Approx(pi / 4));
    CHECK(g.U == doctest::Approx(2.0));
    CHECK(g.r0 == doctest::Approx(std::sqrt(2.0)));
    // Printed three-branch theta0 evaluated literally at x = y = 1, rho = 0.
    CHECK(theta0_printed(1, 1, 0.0) == doctest::Approx(-pi / 4));
    // Tie x = rho y sits on the middle branch.
    CHECK(theta0_printed(0.5, 1, 0.5) == doctest::Approx(pi / 2));
    CHECK(cone_geometry(0.5, 1, DiffusionParams::standard(0.5)).theta0 == doctest::Approx(pi / 2));
    // Away from the tie, the printed branches give minus the wedge angle, modulo pi.
    for (double rho : {-0.6, 0.0, 0.4})
        for (double x : {0.3, 1.0, 2.5}) {
            double d = cone_geometry(x, 1.2, DiffusionParams::standard(rho)).theta0 + theta0_printed(x, 1.2, rho);
            CHECK(std::abs(std::remainder(d, pi)) < 1e-12);
        }
    CHECK_THROWS_AS(cone_geometry(0, 1, DiffusionParams::standard(0)), InvalidInput);
    CHECK_THROWS_AS(cone_alpha(1.0), InvalidInput);
}

TEST_CASE("prob_up closed form") {
    for (const auto& r : kPup) {
        auto p = DiffusionParams::standard(r.rho);
        CHECK(prob_up(r.x, r.y, p) == doctest::Approx(r.value).epsilon(1e-13));
    }
    auto p0 = DiffusionParams::standard(0.0);
    CHECK(prob_up(1, 1, p0) == doctest::Approx(0.5));
    CHECK(prob_up(std::sqrt(3.0), 1, p0) == doctest::Approx(2.0 / 3));
    CHECK(prob_up(1, std::sqrt(3.0), p0) == doctest::Approx(1.0 / 3));
    // rho = 0, equal scales: 1 - (2/pi) atan(y/x).
    for (double x : {0.2, 1.0, 3.0})
        for (double y : {0.4, 1.1, 5.0}) CHECK(prob_up(x, y, p0) == doctest::Approx(1 - 2 / pi * std::atan(y / x)));
    // Boundary limits.
    CHECK(prob_up(1, 1e-12, p0) == doctest::Approx(1.0));
    CHECK(prob_up(1e-12, 1, p0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(prob_up(-1, 1, p0), InvalidInput);
    CHECK_THROWS_AS(prob_up(1, 1, drifted()), InvalidInput);
}

TEST_CASE("prob_up frozen Monte Carlo fixture at rho = -0.7") {
    auto p = DiffusionParams::standard(-0.7);
    CHECK(std::abs(prob_up(1, 2, p) - kMcPupRhoM07) < 3 * kMcPupRhoM07Se);
}

TEST_CASE("prob_up properties") {
    const double grid[] = {0.3, 0.7, 1.0, 1.9, 3.3};
    for (double rho : {-0.8, -0.3, 0.0, 0.4, 0.9}) {
        auto p = DiffusionParams::standard(rho);
        for (double x : grid) {
            CHECK(prob_up(x, x, p) == doctest::Approx(0.5).epsilon(1e-14));
            double prev = 2;
            for (double y : grid) {
                double v = prob_up(x, y, p);
                CHECK(v >= 0);
                CHECK(v <= 1);
                CHECK(v < prev);  // a deeper ask queue is harder to deplete
                CHECK(prob_up(1.1 * x, y, p) > v);
                prev = v;
                CHECK(prob_up(3 * x, 3 * y, p) == doctest::Approx(v).epsilon(1e-13));
                CHECK(prob_up_arctan(x, y, p) == doctest::Approx(v).epsilon(1e-12));
                CHECK(std::abs(prob_up_arcsin(x, y, p) - v) < 1e-10);
            }
        }
    }
}

TEST_CASE("prob_up_or_mc falls back to simulation under drift") {
    auto p0 = DiffusionParams::standard(0.2);
    auto e0 = prob_up_or_mc(1, 2, p0);
    CHECK_FALSE(e0.monte_carlo);
    CHECK(e0.value == prob_up(1, 2, p0));
    auto e1 = prob_up_or_mc(1, 2, drifted(), 100000, 9);
    CHECK(e1.monte_carlo);
    CHECK(e1.std_error > 0);
    CHECK(e1.value > 0);
    CHECK(e1.value < 1);
}

TEST_CASE("duration_survival series vs density integration") {
    for (const auto& r : kSurv) {
        CAPTURE(r.t);
        CHECK(duration_survival(r.t, r.x, r.y, DiffusionParams::standard(r.rho)) ==
              doctest::Approx(r.value).epsilon(1e-8));
    }
    CHECK(std::abs(duration_survival(1, 1, 1, DiffusionParams::standard(0)) - kMcSurvRho0) < 3 * kMcSurvRho0Se);
}

TEST_CASE("duration_survival shape") {
    for (double rho : {-0.7, 0.0, 0.6}) {
        auto p = DiffusionParams::standard(rho);
        CHECK(duration_survival(1e-4, 1, 1.3, p) == doctest::Approx(1.0));
        double prev = 1.0;
        for (double t = 0.01; t < 500; t *= 1.7) {
            double s = duration_survival(t, 1, 1.3, p);
            CHECK(s >= 0);
            CHECK(s <= prev + 1e-12);
            prev = s;
        }
        // Far tail: local log-log slope approaches -pi/(2 alpha).
        const double t1 = 1e4, t2 = 1e5;
        const double slope = std::log(duration_survival(t2, 1, 1.3, p) / duration_survival(t1, 1, 1.3, p)) /
                             std::log(t2 / t1);
        CHECK(slope == doctest::Approx(-duration_tail_index(rho)).epsilon(1e-3));
    }
    CHECK_THROWS_AS(duration_survival(1, 1, 1, drifted()), InvalidInput);
    CHECK_THROWS_AS(duration_survival(0, 1, 1, DiffusionParams::standard(0)), InvalidInput);
}

TEST_CASE("printed radius differs from the standardized one and from simulation") {
    // Same at rho = 0 with unit scales; apart elsewhere.
    SeriesOptions printed;
    printed.prefactor = SurvivalPrefactor::PaperDisplay;
    auto p0 = DiffusionParams::standard(0);
    CHECK(duration_survival(1, 1, 1, p0, printed) == doctest::Approx(duration_survival(1, 1, 1, p0)));
    auto p = DiffusionParams::standard(0.5);
    const double std_v = duration_survival(2.0, 1.5, 0.8, p);
    const double prn_v = duration_survival(2.0, 1.5, 0.8, p, printed);
    CHECK(std_v == doctest::Approx(kSurv[2].value).epsilon(1e-8));
    CHECK(std::abs(prn_v - std_v) > 0.02);
}

TEST_CASE("drifted survival") {
    for (const auto& r : kDrift) {
        auto d = duration_survival_drifted(r.t, r.x, r.y, drifted());
        CAPTURE(r.t);
        CHECK(d.value == doctest::Approx(r.value).epsilon(1e-6));
        CHECK(d.error_bound < 1e-6);
        CHECK_FALSE(d.clamped);
    }
    // Printed inner sine is off by a wide margin.
    DriftedOptions po;
    po.inner = InnerSine::PrintedForm;
    CHECK(std::abs(duration_survival_drifted(1.0, 1.0, 1.2, drifted(), po).value - kDrift[1].value) > 0.05);
}

TEST_CASE("drifted survival reduces to the driftless series") {
    for (double rho : {-0.5, 0.0, 0.5}) {
        auto p = DiffusionParams::standard(rho);
        for (double x : {0.5, 1.0, 2.0})
            for (double t : {0.3, 1.0, 3.0}) {
                CHECK(std::abs(duration_survival_drifted(t, x, 1.0, p).value - duration_survival(t, x, 1.0, p)) <
                      1e-6);
            }
    }
    auto dp = drifted_duration_params(DiffusionParams::standard(0.3));
    CHECK(dp.a1 == 0);
    CHECK(dp.a2 == 0);
    CHECK(dp.a_t == 0);
    CHECK(dp.d1 == 0);
    CHECK(dp.d2 == 0);
}

TEST_CASE("strong negative drift shortens durations") {
    auto base = DiffusionParams::standard(0.2);
    auto neg = DiffusionParams::from_moments(-2.0, -2.0, 1.0, 1.0, 0.2);
    for (double t : {0.2, 0.5, 1.0}) {
        CHECK(duration_survival_drifted(t, 1, 1, neg).value < duration_survival(t, 1, 1, base) - 1e-3);
    }
}

TEST_CASE("drifted survival on the large-cap parameter row") {
    const double r30 = std::sqrt(30.0);
    auto p = DiffusionParams::from_moments(-1033 / 30.0, -2467 / 30.0, 6256 / r30, 4457 / r30, 0.07);
    auto d = duration_survival_drifted(30, 6256, 4457, p);
    CHECK(std::abs(d.value - kMcCitiSurv) < 3 * kMcCitiSurvSe);
}

TEST_CASE("drifted duration params") {
    auto p = drifted();
    auto dp = drifted_duration_params(p);
    // a = -Sigma^{-1} mu and a_t = a . mu / 2.
    Cov2 c = p.cov();
    const double det = c.det();
    const double a1 = -(c.aa * -0.3 - c.ba * 0.2) / det;
    const double a2 = -(-c.ba * -0.3 + c.bb * 0.2) / det;
    CHECK(dp.a1 == doctest::Approx(a1));
    CHECK(dp.a2 == doctest::Approx(a2));
    CHECK(dp.a_t == doctest::Approx(0.5 * (a1 * -0.3 + a2 * 0.2)));
    const double s = std::sqrt(1 - 0.16);
    CHECK(dp.d1 == doctest::Approx((-0.3 / 0.6 + 0.4 * 0.2 / 0.5) / s));
    CHECK(dp.d2 == doctest::Approx(0.2 / 0.5));
}

TEST_CASE("tail index") {
    CHECK(duration_tail_index(0.0) == 1.0);
    CHECK(duration_tail_index(-0.7) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(duration_tail_index(-0.3) > 1);
    CHECK(duration_tail_index(0.3) < 1);
    double prev = 1e9;
    for (double rho = -0.99; rho < 0.99; rho += 0.01) {
        double v = duration_tail_index(rho);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(duration_tail_index(drifted()), InvalidInput);
}

TEST_CASE("agent model map") {
    // Pure one-sided traders: no correlation.
    CHECK(agent_model_params(0.4, 0.6, 0.5, 1, 1, 1).rho == doctest::Approx(0.0));
    CHECK(agent_model_params(0.4, 0.6, 0.5, 1, 1, 1, AgentRhoForm::PaperDisplay).rho == doctest::Approx(0.0));
    for (auto form : {AgentRhoForm::Derived, AgentRhoForm::PaperDisplay}) {
        CHECK(agent_model_params(0.2, 0.3, 0.0, 1, 1, 1, form).rho == doctest::Approx(0.0));
        CHECK(agent_model_params(0.2, 0.3, 1.0, 1, 1, 1, form).rho == doctest::Approx(0.0));
    }
    // Derived value at (0.2, 0.3, 0.5) with unit sizes: E[V^b V^a] = -0.125, E[(V^b)^2] = 0.375.
    auto a = agent_model_params(0.2, 0.3, 0.5, 2.0, 1.0, 1.0);
    CHECK(a.lambda == doctest::Approx(0.5));
    CHECK(a.mu == doctest::Approx(0.5 * -0.05));
    CHECK(a.v2 == doctest::Approx(0.375));
    CHECK(a.rho == doctest::Approx(-1.0 / 3));
    CHECK(agent_model_params(0.2, 0.3, 0.5, 1, 1, 1, AgentRhoForm::PaperDisplay).rho == doctest::Approx(-0.1));
    CHECK_THROWS_AS(agent_model_params(0.7, 0.6, 0.5, 1, 1, 1), InvalidInput);
    CHECK_THROWS_AS(agent_model_params(0.2, 0.3, 1.5, 1, 1, 1), InvalidInput);
}
