#include "htlob/lob_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace htlob {

std::int64_t PricePath::at(double t) const {
    if (steps.empty()) throw InvalidInput("price path is empty");
    auto it = std::upper_bound(steps.begin(), steps.end(), t,
                               [](double v, const PriceStep& s) { return v < s.time; });
    if (it == steps.begin()) return steps.front().price_ticks;
    return std::prev(it)->price_ticks;
}

void validate_events(std::span<const OrderEvent> events, double start_time) {
    double last = start_time;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        if (!std::isfinite(ev.time) || ev.time < 0)
            throw InvalidInput("event " + std::to_string(i) + ": time must be finite and non-negative");
        if (ev.time < last) throw InvalidInput("event " + std::to_string(i) + ": time goes backwards");
        if (ev.delta == 0 || !std::isfinite(ev.delta))
            throw InvalidInput("event " + std::to_string(i) + ": delta must be finite and non-zero");
        last = ev.time;
    }
}

namespace {

void check_book(const BookState& b) {
    if (!(b.q_bid >= 0) || !(b.q_ask >= 0) || !std::isfinite(b.q_bid) || !std::isfinite(b.q_ask))
        throw InvalidInput("book: queue sizes must be finite and non-negative");
    if (!(b.tick > 0)) throw InvalidInput("book: tick must be positive");
}

}  // namespace

EventOutcome apply_event_detailed(const BookState& book, const OrderEvent& ev, const ReinitRule& rule, Rng& rng) {
    if (ev.delta == 0 || !std::isfinite(ev.delta)) throw InvalidInput("event: delta must be finite and non-zero");
    if (!std::isfinite(ev.time) || ev.time < book.time)
        throw InvalidInput("event: time " + std::to_string(ev.time) + " precedes book time " +
                           std::to_string(book.time));

    EventOutcome out{book, std::nullopt};
    out.book.time = ev.time;
    double& q = ev.side == Side::Bid ? out.book.q_bid : out.book.q_ask;
    double next = q + ev.delta;
    if (next > 0) {
        q = next;
        return out;
    }

    JumpRecord j;
    j.time = ev.time;
    j.side = ev.side == Side::Ask ? JumpSide::AskDepleted : JumpSide::BidDepleted;
    q = 0.0;
    j.pre = out.book.queues();
    j.post = rule.draw(j.side, j.pre, rng);
    out.book.bid_price_ticks += j.side == JumpSide::AskDepleted ? 1 : -1;
    out.book.q_bid = j.post.bid;
    out.book.q_ask = j.post.ask;
    out.jump = j;
    return out;
}

BookState apply_event(const BookState& book, const OrderEvent& ev, const ReinitRule& rule, Rng& rng) {
    return apply_event_detailed(book, ev, rule, rng).book;
}

RegulatedPath regulate(std::span<const PathSample> path, const ReinitRule& rule, Rng& rng, PathInterpolation interp) {
    RegulatedPath out;
    if (path.empty()) return out;
    const PathSample& first = path.front();
    if (!(first.q_bid > 0) || !(first.q_ask > 0))
        throw InvalidInput("regulate: path must start strictly inside the orthant");
    for (std::size_t i = 0; i < path.size(); ++i) {
        const auto& s = path[i];
        if (!std::isfinite(s.time) || !std::isfinite(s.q_bid) || !std::isfinite(s.q_ask))
            throw InvalidInput("regulate: sample " + std::to_string(i) + " is not finite");
        if (i > 0 && s.time < path[i - 1].time)
            throw InvalidInput("regulate: sample " + std::to_string(i) + " goes backwards in time");
    }

    out.samples.reserve(path.size());
    out.samples.push_back(first);
    QueuePair q = first.queues();

    for (std::size_t i = 1; i < path.size(); ++i) {
        const double t0 = path[i - 1].time;
        const double t1 = path[i].time;
        const double db = path[i].q_bid - path[i - 1].q_bid;
        const double da = path[i].q_ask - path[i - 1].q_ask;

        if (interp == PathInterpolation::Step) {
            QueuePair e{q.bid + db, q.ask + da};
            if (e.bid > 0 && e.ask > 0) {
                q = e;
            } else {
                JumpRecord j;
                j.time = t1;
                j.side = e.ask <= 0 ? JumpSide::AskDepleted : JumpSide::BidDepleted;
                j.pre = {std::max(e.bid, 0.0), std::max(e.ask, 0.0)};
                j.post = rule.draw(j.side, j.pre, rng);
                out.jumps.push_back(j);
                q = j.post;
            }
        } else {
            // r: fraction of the segment increment still to apply.
            double r = 1.0;
            for (;;) {
                QueuePair e{q.bid + db * r, q.ask + da * r};
                if (e.bid > 0 && e.ask > 0) {
                    q = e;
                    break;
                }
                double ua = e.ask <= 0 ? q.ask / -da : r;
                double ub = e.bid <= 0 ? q.bid / -db : r;
                ua = std::min(ua, r);
                ub = std::min(ub, r);
                JumpRecord j;
                double u;
                if (e.ask <= 0 && (e.bid > 0 || ua <= ub)) {
                    j.side = JumpSide::AskDepleted;
                    u = ua;
                    j.pre = {std::max(q.bid + db * u, 0.0), 0.0};
                } else {
                    j.side = JumpSide::BidDepleted;
                    u = ub;
                    j.pre = {0.0, std::max(q.ask + da * u, 0.0)};
                }
                r -= u;
                if (r < 0) r = 0;
                j.time = t1 - r * (t1 - t0);
                j.post = rule.draw(j.side, j.pre, rng);
                out.jumps.push_back(j);
                q = j.post;
                if (r == 0) break;
            }
        }
        out.samples.push_back({t1, q.bid, q.ask});
    }
    return out;
}

ReplayResult replay(std::span<const OrderEvent> events, const BookState& initial, const ReinitRule& rule, Rng& rng) {
    check_book(initial);
    if (!(initial.q_bid > 0) || !(initial.q_ask > 0))
        throw InvalidInput("replay: initial queues must be strictly positive");
    validate_events(events, initial.time);

    ReplayResult res;
    res.queues.samples.reserve(events.size() + 1);
    res.queues.samples.push_back({initial.time, initial.q_bid, initial.q_ask});
    res.prices.steps.push_back({initial.time, initial.bid_price_ticks});
    BookState b = initial;
    for (const auto& ev : events) {
        EventOutcome o = apply_event_detailed(b, ev, rule, rng);
        b = o.book;
        res.queues.samples.push_back({b.time, b.q_bid, b.q_ask});
        if (o.jump) {
            res.queues.jumps.push_back(*o.jump);
            res.prices.steps.push_back({b.time, b.bid_price_ticks});
        }
    }
    res.final_book = b;
    return res;
}

PricePath price_from_hits(const RegulatedPath& path, std::int64_t start_ticks) {
    PricePath p;
    double t0 = path.samples.empty() ? 0.0 : path.samples.front().time;
    if (!path.jumps.empty()) t0 = std::min(t0, path.jumps.front().time);
    p.steps.push_back({t0, start_ticks});
    std::int64_t s = start_ticks;
    for (const auto& j : path.jumps) {
        s += j.side == JumpSide::AskDepleted ? 1 : -1;
        p.steps.push_back({j.time, s});
    }
    return p;
}

std::vector<PathSample> net_flow_path(std::span<const OrderEvent> events, const QueuePair& initial,
                                      double start_time) {
    std::vector<PathSample> out;
    out.reserve(events.size() + 1);
    out.push_back({start_time, initial.bid, initial.ask});
    double xb = initial.bid, xa = initial.ask;
    for (const auto& ev : events) {
        if (ev.side == Side::Bid)
            xb += ev.delta;
        else
            xa += ev.delta;
        out.push_back({ev.time, xb, xa});
    }
    return out;
}

}  // namespace htlob
