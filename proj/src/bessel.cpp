#include "htlob/bessel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "htlob/types.hpp"

namespace htlob {

namespace {

// Ascending series, summed outward from its largest term; all terms are positive.
double series_scaled(double nu, double z) {
    const double h = 0.5 * z;
    const double h2 = h * h;
    const double kpeak = std::floor(0.5 * (-nu + std::sqrt(nu * nu + z * z)));
    const double k0 = kpeak < 0 ? 0 : kpeak;
    const double log_peak = (2 * k0 + nu) * std::log(h) - std::lgamma(k0 + 1) - std::lgamma(k0 + nu + 1);

    double sum = 1.0;
    double term = 1.0;
    for (double k = k0;; k += 1) {
        term *= h2 / ((k + 1) * (k + nu + 1));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    term = 1.0;
    for (double k = k0 - 1; k >= 0; k -= 1) {
        term *= (k + 1) * (k + nu + 1) / h2;
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return std::exp(log_peak - z) * sum;
}

// Large-argument expansion: I_nu(z) ~ e^z / sqrt(2 pi z) * sum_k (-1)^k a_k(nu) / z^k.
double hankel_scaled(double nu, double z) {
    const double mu = 4 * nu * nu;
    double sum = 1.0;
    double term = 1.0;
    double prev = INFINITY;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1;
        term *= -(mu - odd * odd) / (8.0 * k * z);
        if (std::abs(term) >= prev) break;
        sum += term;
        prev = std::abs(term);
        if (prev < 1e-17 * std::abs(sum)) break;
    }
    return sum / std::sqrt(2 * std::numbers::pi * z);
}

}  // namespace

double bessel_ie(double nu, double z) {
    if (!(nu >= 0) || !(z >= 0) || !std::isfinite(nu) || std::isnan(z))
        throw InvalidInput("bessel_ie: need nu >= 0 and z >= 0 (nu=" + std::to_string(nu) + ", z=" +
                           std::to_string(z) + ")");
    if (z == 0) return nu == 0 ? 1.0 : 0.0;
    if (std::isinf(z)) return 0.0;
    if (z >= 50 && z >= nu * nu) return hankel_scaled(nu, z);
    return series_scaled(nu, z);
}

}  // namespace htlob
