#pragma once

#include <array>
#include <cmath>

#include "htlob/types.hpp"

namespace htlob {

// Symmetric 2x2 matrix, bid first.
struct Cov2 {
    double bb = 0.0;
    double ba = 0.0;
    double aa = 0.0;

    double det() const { return bb * aa - ba * ba; }
    bool positive_definite() const { return bb > 0 && aa > 0 && det() > 0; }
    double corr() const { return ba / std::sqrt(bb * aa); }
};

// Parameters of the limit process Q. Coordinates are bid first everywhere:
// drift = (lambda_b vbar_b, lambda_a vbar_a),
// cov   = [[lambda_b v2_b, rho sqrt(lambda_a lambda_b) v_a v_b], [., lambda_a v2_a]].
struct DiffusionParams {
    double lambda_bid = 1.0;
    double lambda_ask = 1.0;
    double vbar_bid = 0.0;
    double vbar_ask = 0.0;
    double v2_bid = 1.0;
    double v2_ask = 1.0;
    double rho = 0.0;

    void validate() const {
        if (!(lambda_bid > 0) || !(lambda_ask > 0) || !std::isfinite(lambda_bid) || !std::isfinite(lambda_ask))
            throw InvalidInput("diffusion params: rates must be positive");
        if (!(v2_bid > 0) || !(v2_ask > 0) || !std::isfinite(v2_bid) || !std::isfinite(v2_ask))
            throw InvalidInput("diffusion params: variances must be positive");
        if (!(rho > -1 && rho < 1)) throw InvalidInput("diffusion params: rho must lie in (-1, 1)");
        if (!std::isfinite(vbar_bid) || !std::isfinite(vbar_ask))
            throw InvalidInput("diffusion params: mean sizes must be finite");
    }

    double sigma_bid() const { return std::sqrt(lambda_bid * v2_bid); }
    double sigma_ask() const { return std::sqrt(lambda_ask * v2_ask); }
    double drift_bid() const { return lambda_bid * vbar_bid; }
    double drift_ask() const { return lambda_ask * vbar_ask; }
    bool driftless() const { return vbar_bid == 0.0 && vbar_ask == 0.0; }

    Cov2 cov() const {
        double sb = sigma_bid(), sa = sigma_ask();
        return {sb * sb, rho * sb * sa, sa * sa};
    }

    // Unit rates with the given per-unit-time drift, standard deviations and correlation.
    static DiffusionParams from_moments(double mu_bid, double mu_ask, double sd_bid, double sd_ask, double rho) {
        DiffusionParams p;
        p.vbar_bid = mu_bid;
        p.vbar_ask = mu_ask;
        p.v2_bid = sd_bid * sd_bid;
        p.v2_ask = sd_ask * sd_ask;
        p.rho = rho;
        p.validate();
        return p;
    }

    static DiffusionParams standard(double rho) { return from_moments(0, 0, 1, 1, rho); }
};

// Time-scaled approximation on a coarse period gamma1 given mean event spacing gamma0.
struct ScaledParams {
    double mu_bid = 0.0;
    double mu_ask = 0.0;
    Cov2 Lambda;
    double N = 1.0;
    double gamma0 = 1.0;
    double gamma1 = 1.0;
};

}  // namespace htlob
