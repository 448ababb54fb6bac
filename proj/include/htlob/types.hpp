#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace htlob {

enum class Side : std::uint8_t { Bid, Ask };

// Which queue was depleted at a price change. AskDepleted moves the price up one tick.
enum class JumpSide : std::uint8_t { AskDepleted, BidDepleted };

// Raised for inputs that violate a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a numerical routine cannot reach its requested accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bid-first pair of queue sizes. Used for states, reinitialization draws and drifts.
struct QueuePair {
    double bid = 0.0;
    double ask = 0.0;

    friend bool operator==(const QueuePair&, const QueuePair&) = default;
};

struct OrderEvent {
    double time = 0.0;
    Side side = Side::Bid;
    double delta = 0.0;  // positive adds to the queue, negative removes from it

    friend bool operator==(const OrderEvent&, const OrderEvent&) = default;
};

// Reduced order book: best bid price plus the two best-quote queues.
// The spread is pinned at one tick, so the ask price is always bid + 1.
struct BookState {
    std::int64_t bid_price_ticks = 0;
    double tick = 0.01;
    double q_bid = 0.0;
    double q_ask = 0.0;
    double time = 0.0;  // time of the last applied event

    std::int64_t ask_price_ticks() const { return bid_price_ticks + 1; }
    QueuePair queues() const { return {q_bid, q_ask}; }
};

inline const char* to_string(Side s) { return s == Side::Bid ? "bid" : "ask"; }
inline const char* to_string(JumpSide s) { return s == JumpSide::AskDepleted ? "ask_depleted" : "bid_depleted"; }

}  // namespace htlob
