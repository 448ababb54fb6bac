#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "htlob/random.hpp"
#include "htlob/reinit.hpp"
#include "htlob/types.hpp"

namespace htlob {

struct PathSample {
    double time = 0.0;
    double q_bid = 0.0;
    double q_ask = 0.0;

    QueuePair queues() const { return {q_bid, q_ask}; }
    friend bool operator==(const PathSample&, const PathSample&) = default;
};

// One price change. `pre` is the state just before (the depleted coordinate clipped to 0),
// `post` the redrawn state.
struct JumpRecord {
    double time = 0.0;
    JumpSide side = JumpSide::AskDepleted;
    QueuePair pre;
    QueuePair post;

    friend bool operator==(const JumpRecord&, const JumpRecord&) = default;
};

// Cadlag path in the closed orthant. Samples carry the post-jump value at a jump time.
struct RegulatedPath {
    std::vector<PathSample> samples;
    std::vector<JumpRecord> jumps;
};

struct PriceStep {
    double time = 0.0;
    std::int64_t price_ticks = 0;

    friend bool operator==(const PriceStep&, const PriceStep&) = default;
};

struct PricePath {
    std::vector<PriceStep> steps;

    std::int64_t at(double t) const;  // price in force at time t
};

// How the input of `regulate` moves between its samples.
enum class PathInterpolation {
    Step,    // piecewise constant, moves at sample times (event-driven net flow)
    Linear,  // piecewise linear, exits located inside the segment
};

struct EventOutcome {
    BookState book;
    std::optional<JumpRecord> jump;
};

// Applies one event. A move taking the queue to <= 0 is consumed whole: price moves one tick and
// both queues are redrawn from the rule.
EventOutcome apply_event_detailed(const BookState& book, const OrderEvent& ev, const ReinitRule& rule, Rng& rng);
BookState apply_event(const BookState& book, const OrderEvent& ev, const ReinitRule& rule, Rng& rng);

// The regulating map: follows the increments of `path` and redraws the state every time the
// regulated path reaches an axis. A simultaneous hit of both axes counts as AskDepleted.
RegulatedPath regulate(std::span<const PathSample> path, const ReinitRule& rule, Rng& rng,
                       PathInterpolation interp = PathInterpolation::Linear);

struct ReplayResult {
    RegulatedPath queues;
    PricePath prices;
    BookState final_book;
};

ReplayResult replay(std::span<const OrderEvent> events, const BookState& initial, const ReinitRule& rule, Rng& rng);

PricePath price_from_hits(const RegulatedPath& path, std::int64_t start_ticks);

// Unregulated cumulative net flow x_t started at `initial`, one sample per event.
std::vector<PathSample> net_flow_path(std::span<const OrderEvent> events, const QueuePair& initial,
                                      double start_time = 0.0);

// Checks event ordering and non-zero sizes; throws InvalidInput naming the offending index.
void validate_events(std::span<const OrderEvent> events, double start_time = 0.0);

}  // namespace htlob
