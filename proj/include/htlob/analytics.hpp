#pragma once

#include <cstdint>
#include <string>

#include "htlob/params.hpp"

namespace htlob::analytics {

// Wedge picture of the driftless first-exit problem. In standardized, decorrelated
// coordinates the orthant becomes a wedge of angle alpha; the ray at angle 0 is the ask axis
// (ask queue empty) and the ray at angle alpha is the bid axis.
struct ConeGeometry {
    double alpha = 0.0;
    double theta0 = 0.0;
    double U = 0.0;  // squared initial radius
    double r0 = 0.0;
};

enum class RadiusConvention {
    Standardized,  // quadratic form of (x / sigma_b, y / sigma_a); the default
    PaperDisplay,  // the printed display: x scaled by lambda_a v_a^2, y by lambda_b v_b^2, over (1 - rho)
};

ConeGeometry cone_geometry(double x, double y, const DiffusionParams& p,
                           RadiusConvention radius = RadiusConvention::Standardized);

double cone_alpha(double rho);

// Literal three-branch formula for theta0 as printed, for comparison with cone_geometry.
double theta0_printed(double x, double y, double rho);

// Probability that the ask queue empties before the bid queue (next move is up), driftless.
double prob_up(double x, double y, const DiffusionParams& p);
// The same quantity via the arctan display and via the arcsin form of the proof.
double prob_up_arctan(double x, double y, const DiffusionParams& p);
double prob_up_arcsin(double x, double y, const DiffusionParams& p);

struct ProbEstimate {
    double value = 0.0;
    double std_error = 0.0;
    bool monte_carlo = false;
    std::size_t paths = 0;
};

// Closed form when driftless, first-hit Monte Carlo otherwise.
ProbEstimate prob_up_or_mc(double x, double y, const DiffusionParams& p, std::size_t paths = 200000,
                           std::uint64_t seed = 1);

enum class SurvivalPrefactor {
    Standardized,  // sqrt(2U/(pi t)) e^{-U/4t} with U the standardized squared radius
    PaperDisplay,  // same series with the printed U
};

struct SeriesOptions {
    SurvivalPrefactor prefactor = SurvivalPrefactor::Standardized;
    double term_tol = 1e-10;  // stop after three consecutive terms below this
    int max_terms = 100000;
};

// P[tau > t | Q0 = (x, y)] for driftless parameters.
double duration_survival(double t, double x, double y, const DiffusionParams& p, const SeriesOptions& opt = {});

enum class InnerSine {
    WithTheta,    // sin(n pi theta / alpha) inside the angular integral
    PrintedForm,  // sin(n pi / alpha), as printed
};

struct DriftedOptions {
    InnerSine inner = InnerSine::WithTheta;
    double term_tol = 1e-10;
    double quad_tol = 1e-10;
    int max_terms = 4000;
};

struct DriftedSurvival {
    double value = 0.0;        // clamped to [0, 1]
    double raw = 0.0;          // before clamping
    double error_bound = 0.0;  // accumulated quadrature error estimate plus truncation
    bool clamped = false;
    int terms = 0;
};

// Drift terms of the drifted-duration formula. a = -Sigma^{-1} mu (bid, ask), a_t = -mu' Sigma^{-1} mu / 2,
// d = drift in the decorrelated coordinates where the ask axis is the ray at angle 0.
struct DriftedDurationParams {
    double a1 = 0.0;
    double a2 = 0.0;
    double a_t = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

DriftedDurationParams drifted_duration_params(const DiffusionParams& p);

DriftedSurvival duration_survival_drifted(double t, double x, double y, const DiffusionParams& p,
                                          const DriftedOptions& opt = {});

double duration_tail_index(const DiffusionParams& p);
double duration_tail_index(double rho);

enum class AgentRhoForm {
    Derived,       // long-run moments of the flow under the probability table, Poisson trader arrivals
    PaperDisplay,  // the printed display
};

struct AgentModelParams {
    double mu = 0.0;    // drift per unit time, both sides
    double v2 = 0.0;    // long-run variance per event, per side (E[V^2] under Poisson arrivals)
    double rho = 0.0;
    double lambda = 0.0;
};

AgentModelParams agent_model_params(double m, double l, double gamma, double mean_duration, double e_v2,
                                    double vbar, AgentRhoForm form = AgentRhoForm::Derived,
                                    bool flip_signs = false);

}  // namespace htlob::analytics
