#include "htlob/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "htlob/types.hpp"

namespace htlob::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw InvalidInput("mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw InvalidInput("variance needs at least two observations");
    const double m = mean(x);
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double autocovariance(std::span<const double> x, std::size_t lag) { return cross_covariance(x, x, lag); }

double cross_covariance(std::span<const double> x, std::span<const double> y, std::size_t lag) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n == 0 || lag >= n) throw InvalidInput("cross_covariance: lag exceeds sample length");
    const double mx = mean(x.first(n)), my = mean(y.first(n));
    double s = 0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mx) * (y[i + lag] - my);
    return s / static_cast<double>(n);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_normal(std::vector<double> s, double mean, double sd) {
    if (s.empty()) throw InvalidInput("ks_normal: empty sample");
    if (!(sd > 0)) throw InvalidInput("ks_normal: sd must be positive");
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = normal_cdf((s[i] - mean) / sd);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidInput("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

namespace {
double ks_c(double level) { return std::sqrt(-0.5 * std::log(level / 2)); }
}  // namespace

double ks_critical_one_sample(std::size_t n, double level) { return ks_c(level) / std::sqrt(static_cast<double>(n)); }

double ks_critical_two_sample(std::size_t n, std::size_t m, double level) {
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    return ks_c(level) * std::sqrt((dn + dm) / (dn * dm));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("linear_fit: need two or more paired points");
    const double mx = mean(x), my = mean(y);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw InvalidInput("linear_fit: x has no spread");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        f.slope_se = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
    }
    return f;
}

}  // namespace htlob::stats
