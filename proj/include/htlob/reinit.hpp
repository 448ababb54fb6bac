#pragma once

#include <functional>

#include "htlob/distributions.hpp"
#include "htlob/random.hpp"
#include "htlob/types.hpp"

namespace htlob {

// Post-price-change redistribution of the two queues.
//
// Iid:     q = R ~ F after an ask depletion, q = R~ ~ F~ after a bid depletion.
// Pegged:  q = (eps_b + beta * q_b-, eps_a) going up, (eps~_b, eps~_a + beta~ * q_a-) going down.
// General: q = g(q-, side, eps) with eps drawn from the side's sampler.
//
// noise_scale multiplies every draw from F and F~; the rescaled discrete system uses 1/sqrt(n).
struct ReinitRule {
    enum class Variant { Iid, Pegged, General };
    using GeneralMap = std::function<QueuePair(const QueuePair& pre, JumpSide side, const QueuePair& eps)>;

    Variant variant = Variant::Iid;
    PairDist sampler_up;
    PairDist sampler_down;
    double pegged_beta_bid = 0.0;
    double pegged_beta_ask = 0.0;
    GeneralMap g;
    double noise_scale = 1.0;

    static ReinitRule iid(PairDist up, PairDist down);
    static ReinitRule pegged(PairDist up, PairDist down, double beta_bid, double beta_ask);
    static ReinitRule general(PairDist up, PairDist down, GeneralMap g);
    // Both samplers constant at `q`; handy for tests and for p_up/duration runs that never use the draw.
    static ReinitRule fixed(QueuePair q);

    // Throws InvalidInput when the samplers can put mass on an axis or the betas are out of [0,1).
    void validate() const;

    // Fresh queues after `side` was depleted with pre-jump state `pre`. Always strictly positive.
    QueuePair draw(JumpSide side, const QueuePair& pre, Rng& rng) const;

    ReinitRule scaled(double factor) const;
};

}  // namespace htlob
