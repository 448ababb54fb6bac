#pragma once

#include <cmath>
#include <random>
#include <string>
#include <variant>

#include "htlob/random.hpp"
#include "htlob/types.hpp"

namespace htlob {

namespace dist {

struct Constant {
    double value = 1.0;
};

struct Exponential {
    double mean = 1.0;
};

// Gamma parameterized by shape and mean (scale = mean / shape).
struct Gamma {
    double shape = 1.0;
    double mean = 1.0;
};

// exp(N(mu, sigma^2))
struct LogNormal {
    double mu = 0.0;
    double sigma = 1.0;
};

// P(V > x) = (x / scale)^(-tail) for x >= scale.
struct Pareto {
    double scale = 1.0;
    double tail = 2.5;
};

struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
};

}  // namespace dist

// Univariate law used for sizes, durations, ACD innovations and reinitialization draws.
class Dist {
public:
    using Variant = std::variant<dist::Constant, dist::Exponential, dist::Gamma, dist::LogNormal, dist::Pareto,
                                 dist::Uniform>;

    Dist() : v_(dist::Constant{1.0}) {}
    Dist(Variant v);  // validates parameters

    static Dist constant(double v) { return Dist(dist::Constant{v}); }
    static Dist exponential(double mean) { return Dist(dist::Exponential{mean}); }
    static Dist gamma(double shape, double mean) { return Dist(dist::Gamma{shape, mean}); }
    static Dist lognormal(double mu, double sigma) { return Dist(dist::LogNormal{mu, sigma}); }
    static Dist pareto(double scale, double tail) { return Dist(dist::Pareto{scale, tail}); }
    static Dist uniform(double lo, double hi) { return Dist(dist::Uniform{lo, hi}); }

    double sample(Rng& rng) const;
    double mean() const;
    double variance() const;  // +inf when the second moment does not exist
    double second_moment() const { return variance() + mean() * mean(); }

    // True when all mass sits on (0, inf).
    bool strictly_positive() const;

    const Variant& variant() const { return v_; }
    std::string describe() const;

private:
    Variant v_;
};

// Independent bid/ask draws; used for the reinitialization laws F and F~.
struct PairDist {
    Dist bid;
    Dist ask;

    QueuePair sample(Rng& rng) const { return {bid.sample(rng), ask.sample(rng)}; }
    bool strictly_positive() const { return bid.strictly_positive() && ask.strictly_positive(); }
};

}  // namespace htlob
