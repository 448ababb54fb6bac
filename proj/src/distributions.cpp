#include "htlob/distributions.hpp"

#include <limits>
#include <sstream>

namespace htlob {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* what) {
    if (!ok) throw InvalidInput(what);
}

}  // namespace

Dist::Dist(Variant v) : v_(std::move(v)) {
    std::visit(overloaded{
                   [](const dist::Constant& d) { require(std::isfinite(d.value), "constant: value must be finite"); },
                   [](const dist::Exponential& d) {
                       require(d.mean > 0 && std::isfinite(d.mean), "exponential: mean must be positive");
                   },
                   [](const dist::Gamma& d) {
                       require(d.shape > 0 && d.mean > 0, "gamma: shape and mean must be positive");
                   },
                   [](const dist::LogNormal& d) {
                       require(d.sigma >= 0 && std::isfinite(d.mu), "lognormal: sigma must be non-negative");
                   },
                   [](const dist::Pareto& d) {
                       require(d.scale > 0 && d.tail > 0, "pareto: scale and tail must be positive");
                   },
                   [](const dist::Uniform& d) { require(d.lo < d.hi, "uniform: lo must be below hi"); },
               },
               v_);
}

double Dist::sample(Rng& rng) const {
    return std::visit(overloaded{
                          [](const dist::Constant& d) { return d.value; },
                          [&](const dist::Exponential& d) { return -d.mean * std::log(uniform_open(rng)); },
                          [&](const dist::Gamma& d) {
                              std::gamma_distribution<double> g(d.shape, d.mean / d.shape);
                              return g(rng);
                          },
                          [&](const dist::LogNormal& d) {
                              std::normal_distribution<double> n(d.mu, d.sigma);
                              return std::exp(n(rng));
                          },
                          [&](const dist::Pareto& d) { return d.scale * std::pow(uniform_open(rng), -1.0 / d.tail); },
                          [&](const dist::Uniform& d) { return d.lo + (d.hi - d.lo) * uniform_open(rng); },
                      },
                      v_);
}

double Dist::mean() const {
    return std::visit(overloaded{
                          [](const dist::Constant& d) { return d.value; },
                          [](const dist::Exponential& d) { return d.mean; },
                          [](const dist::Gamma& d) { return d.mean; },
                          [](const dist::LogNormal& d) { return std::exp(d.mu + 0.5 * d.sigma * d.sigma); },
                          [](const dist::Pareto& d) {
                              return d.tail > 1 ? d.tail * d.scale / (d.tail - 1)
                                                : std::numeric_limits<double>::infinity();
                          },
                          [](const dist::Uniform& d) { return 0.5 * (d.lo + d.hi); },
                      },
                      v_);
}

double Dist::variance() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(overloaded{
                          [](const dist::Constant&) { return 0.0; },
                          [](const dist::Exponential& d) { return d.mean * d.mean; },
                          [](const dist::Gamma& d) { return d.mean * d.mean / d.shape; },
                          [](const dist::LogNormal& d) {
                              double s2 = d.sigma * d.sigma;
                              return std::expm1(s2) * std::exp(2 * d.mu + s2);
                          },
                          [](const dist::Pareto& d) {
                              if (d.tail <= 2) return inf;
                              return d.scale * d.scale * d.tail / ((d.tail - 1) * (d.tail - 1) * (d.tail - 2));
                          },
                          [](const dist::Uniform& d) { return (d.hi - d.lo) * (d.hi - d.lo) / 12.0; },
                      },
                      v_);
}

bool Dist::strictly_positive() const {
    return std::visit(overloaded{
                          [](const dist::Constant& d) { return d.value > 0; },
                          [](const dist::Exponential&) { return true; },
                          [](const dist::Gamma&) { return true; },
                          [](const dist::LogNormal&) { return true; },
                          [](const dist::Pareto&) { return true; },
                          [](const dist::Uniform& d) { return d.lo >= 0; },
                      },
                      v_);
}

std::string Dist::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const dist::Constant& d) { os << "constant(" << d.value << ")"; },
                   [&](const dist::Exponential& d) { os << "exponential(mean=" << d.mean << ")"; },
                   [&](const dist::Gamma& d) { os << "gamma(shape=" << d.shape << ",mean=" << d.mean << ")"; },
                   [&](const dist::LogNormal& d) { os << "lognormal(mu=" << d.mu << ",sigma=" << d.sigma << ")"; },
                   [&](const dist::Pareto& d) { os << "pareto(scale=" << d.scale << ",tail=" << d.tail << ")"; },
                   [&](const dist::Uniform& d) { os << "uniform(" << d.lo << "," << d.hi << ")"; },
               },
               v_);
    return os.str();
}

}  // namespace htlob
