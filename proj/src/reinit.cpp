#include "htlob/reinit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace htlob {

ReinitRule ReinitRule::iid(PairDist up, PairDist down) {
    ReinitRule r;
    r.variant = Variant::Iid;
    r.sampler_up = std::move(up);
    r.sampler_down = std::move(down);
    r.validate();
    return r;
}

ReinitRule ReinitRule::pegged(PairDist up, PairDist down, double beta_bid, double beta_ask) {
    ReinitRule r;
    r.variant = Variant::Pegged;
    r.sampler_up = std::move(up);
    r.sampler_down = std::move(down);
    r.pegged_beta_bid = beta_bid;
    r.pegged_beta_ask = beta_ask;
    r.validate();
    return r;
}

ReinitRule ReinitRule::general(PairDist up, PairDist down, GeneralMap g) {
    ReinitRule r;
    r.variant = Variant::General;
    r.sampler_up = std::move(up);
    r.sampler_down = std::move(down);
    r.g = std::move(g);
    r.validate();
    return r;
}

ReinitRule ReinitRule::fixed(QueuePair q) {
    PairDist p{Dist::constant(q.bid), Dist::constant(q.ask)};
    return iid(p, p);
}

void ReinitRule::validate() const {
    if (!sampler_up.strictly_positive() || !sampler_down.strictly_positive())
        throw InvalidInput("reinit: samplers must put all mass on (0, inf)^2");
    if (!(pegged_beta_bid >= 0 && pegged_beta_bid < 1) || !(pegged_beta_ask >= 0 && pegged_beta_ask < 1))
        throw InvalidInput("reinit: pegged betas must lie in [0, 1)");
    if (!(noise_scale > 0) || !std::isfinite(noise_scale)) throw InvalidInput("reinit: noise_scale must be positive");
    if (variant == Variant::General && !g) throw InvalidInput("reinit: general variant needs a map g");
}

QueuePair ReinitRule::draw(JumpSide side, const QueuePair& pre, Rng& rng) const {
    const PairDist& s = side == JumpSide::AskDepleted ? sampler_up : sampler_down;
    QueuePair eps = s.sample(rng);
    eps.bid *= noise_scale;
    eps.ask *= noise_scale;
    QueuePair out = eps;
    switch (variant) {
        case Variant::Iid:
            break;
        case Variant::Pegged:
            if (side == JumpSide::AskDepleted)
                out.bid += pegged_beta_bid * std::max(pre.bid, 0.0);
            else
                out.ask += pegged_beta_ask * std::max(pre.ask, 0.0);
            break;
        case Variant::General:
            out = g(pre, side, eps);
            break;
    }
    if (!(out.bid > 0) || !(out.ask > 0) || !std::isfinite(out.bid) || !std::isfinite(out.ask))
        throw InvalidInput("reinit: rule produced a state outside the open orthant (" + std::to_string(out.bid) +
                           ", " + std::to_string(out.ask) + ")");
    return out;
}

ReinitRule ReinitRule::scaled(double factor) const {
    ReinitRule r = *this;
    r.noise_scale *= factor;
    r.validate();
    return r;
}

}  // namespace htlob
