#include <cmath>
#include <sstream>

#include "doctest.h"
#include "htlob/csv_io.hpp"
#include "htlob/lob_core.hpp"
#include "htlob/order_flow.hpp"

using namespace htlob;

namespace {

// Reinit rule that hands out a scripted sequence of states.
ReinitRule scripted(std::vector<QueuePair> seq) {
    auto shared = std::make_shared<std::vector<QueuePair>>(std::move(seq));
    auto idx = std::make_shared<std::size_t>(0);
    PairDist one{Dist::constant(1.0), Dist::constant(1.0)};
    return ReinitRule::general(one, one, [shared, idx](const QueuePair&, JumpSide, const QueuePair&) {
        return (*shared)[(*idx)++ % shared->size()];
    });
}

ReinitRule uniform_rule() {
    PairDist u{Dist::uniform(1.0, 3.0), Dist::uniform(1.0, 3.0)};
    return ReinitRule::iid(u, u);
}

std::vector<PathSample> walk_fixture() { return csv::read_path(std::string(HTLOB_FIXTURE_DIR) + "/walk1000.csv"); }

// Brute-force replay of a piecewise-constant input: walk the samples, add each increment, redraw on exit.
struct OracleJump {
    double time;
    JumpSide side;
};
std::vector<OracleJump> oracle_step_replay(const std::vector<PathSample>& w, const ReinitRule& rule, Rng& rng) {
    std::vector<OracleJump> out;
    double b = w[0].q_bid, a = w[0].q_ask;
    for (std::size_t i = 1; i < w.size(); ++i) {
        double nb = b + (w[i].q_bid - w[i - 1].q_bid);
        double na = a + (w[i].q_ask - w[i - 1].q_ask);
        if (na <= 0 || nb <= 0) {
            JumpSide s = na <= 0 ? JumpSide::AskDepleted : JumpSide::BidDepleted;
            out.push_back({w[i].time, s});
            QueuePair p = rule.draw(s, {std::max(nb, 0.0), std::max(na, 0.0)}, rng);
            b = p.bid;
            a = p.ask;
        } else {
            b = nb;
            a = na;
        }
    }
    return out;
}

// Brute-force replay of the linear interpolation: per segment, solve each coordinate's zero directly.
std::vector<OracleJump> oracle_linear_replay(const std::vector<PathSample>& w, const ReinitRule& rule, Rng& rng) {
    std::vector<OracleJump> out;
    double b = w[0].q_bid, a = w[0].q_ask;
    for (std::size_t i = 1; i < w.size(); ++i) {
        double dt = w[i].time - w[i - 1].time;
        double vb = (w[i].q_bid - w[i - 1].q_bid) / dt;
        double va = (w[i].q_ask - w[i - 1].q_ask) / dt;
        double t = w[i - 1].time;
        const double t_end = w[i].time;
        for (;;) {
            double left = t_end - t;
            double ta = va < 0 ? a / -va : INFINITY;
            double tb = vb < 0 ? b / -vb : INFINITY;
            double th = std::min(ta, tb);
            if (th > left + 1e-12) {
                b += vb * left;
                a += va * left;
                break;
            }
            JumpSide s = ta <= tb ? JumpSide::AskDepleted : JumpSide::BidDepleted;
            t += th;
            out.push_back({t, s});
            QueuePair pre = s == JumpSide::AskDepleted ? QueuePair{std::max(b + vb * th, 0.0), 0.0}
                                                       : QueuePair{0.0, std::max(a + va * th, 0.0)};
            QueuePair p = rule.draw(s, pre, rng);
            b = p.bid;
            a = p.ask;
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("apply_event") {
    TEST_CASE("non-depleting event changes only the touched queue") {
        BookState b{100, 0.01, 5, 3, 0};
        Rng rng = make_rng(1, "t");
        auto out = apply_event(b, {1.0, Side::Ask, -2}, uniform_rule(), rng);
        CHECK(out.bid_price_ticks == 100);
        CHECK(out.q_bid == 5);
        CHECK(out.q_ask == 1);
        CHECK(out.time == 1.0);
    }

    TEST_CASE("ask depletion moves the price up and redraws from F") {
        BookState b{100, 0.01, 5, 3, 0};
        Rng rng = make_rng(1, "t");
        auto o = apply_event_detailed(b, {0.5, Side::Ask, -3}, scripted({{4, 6}}), rng);
        CHECK(o.book.bid_price_ticks == 101);
        CHECK(o.book.ask_price_ticks() == 102);
        CHECK(o.book.q_bid == 4);
        CHECK(o.book.q_ask == 6);
        REQUIRE(o.jump);
        CHECK(o.jump->side == JumpSide::AskDepleted);
        CHECK(o.jump->pre == QueuePair{5, 0});
    }

    TEST_CASE("bid depletion moves the price down and redraws from F~") {
        BookState b{100, 0.01, 2, 7, 0};
        Rng rng = make_rng(1, "t");
        auto out = apply_event(b, {0.5, Side::Bid, -2}, scripted({{3, 5}}), rng);
        CHECK(out.bid_price_ticks == 99);
        CHECK(out.q_bid == 3);
        CHECK(out.q_ask == 5);
    }

    TEST_CASE("overshoot is consumed, not carried into the new queue") {
        BookState b{0, 1, 2, 2, 0};
        Rng rng = make_rng(1, "t");
        auto out = apply_event(b, {0, Side::Bid, -10}, scripted({{3, 5}}), rng);
        CHECK(out.q_bid == 3);
        CHECK(out.q_ask == 5);
    }

    TEST_CASE("pegged rule carries a fraction of the surviving queue") {
        PairDist eps{Dist::constant(1.0), Dist::constant(2.0)};
        auto rule = ReinitRule::pegged(eps, eps, 0.5, 0.25);
        Rng rng = make_rng(1, "t");
        auto up = apply_event(BookState{0, 1, 4, 1, 0}, {0, Side::Ask, -1}, rule, rng);
        CHECK(up.q_bid == doctest::Approx(1.0 + 0.5 * 4));
        CHECK(up.q_ask == doctest::Approx(2.0));
        auto down = apply_event(BookState{0, 1, 1, 8, 0}, {0, Side::Bid, -1}, rule, rng);
        CHECK(down.q_bid == doctest::Approx(1.0));
        CHECK(down.q_ask == doctest::Approx(2.0 + 0.25 * 8));
    }

    TEST_CASE("invalid events are rejected") {
        BookState b{0, 1, 2, 2, 1.0};
        Rng rng = make_rng(1, "t");
        CHECK_THROWS_AS(apply_event(b, {1.0, Side::Bid, 0.0}, uniform_rule(), rng), InvalidInput);
        CHECK_THROWS_AS(apply_event(b, {0.5, Side::Bid, 1.0}, uniform_rule(), rng), InvalidInput);
    }

    TEST_CASE("rules that can emit axis states are rejected") {
        PairDist bad{Dist::uniform(-1, 1), Dist::constant(1)};
        PairDist ok{Dist::constant(1), Dist::constant(1)};
        CHECK_THROWS_AS(ReinitRule::iid(bad, ok), InvalidInput);
        CHECK_THROWS_AS(ReinitRule::pegged(ok, ok, 1.0, 0.0), InvalidInput);
        auto g = ReinitRule::general(ok, ok, [](const QueuePair&, JumpSide, const QueuePair&) {
            return QueuePair{0.0, 1.0};
        });
        Rng rng = make_rng(1, "t");
        CHECK_THROWS_AS(g.draw(JumpSide::AskDepleted, {1, 0}, rng), InvalidInput);
    }
}

TEST_SUITE("regulate") {
    TEST_CASE("path that never exits is returned unchanged") {
        std::vector<PathSample> w;
        for (int i = 0; i <= 10; ++i) w.push_back({i * 0.1, 1 + i * 0.1, 1 + i * 0.1});
        Rng rng = make_rng(1, "t");
        auto r = regulate(w, uniform_rule(), rng);
        CHECK(r.jumps.empty());
        REQUIRE(r.samples.size() == w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(r.samples[i].q_bid == doctest::Approx(w[i].q_bid));
            CHECK(r.samples[i].q_ask == doctest::Approx(w[i].q_ask));
        }
    }

    TEST_CASE("linear bid exit at t=1 restarts from the redrawn state") {
        std::vector<PathSample> w;
        for (int i = 0; i <= 20; ++i) w.push_back({i * 0.125, 1 - i * 0.125, 2});
        Rng rng = make_rng(1, "t");
        auto r = regulate(w, scripted({{3, 4}}), rng);
        REQUIRE(r.jumps.size() == 1);
        CHECK(r.jumps[0].time == doctest::Approx(1.0));
        CHECK(r.jumps[0].side == JumpSide::BidDepleted);
        CHECK(r.jumps[0].post == QueuePair{3, 4});
        for (const auto& s : r.samples) {
            if (s.time < 1.0) {
                CHECK(s.q_bid == doctest::Approx(1 - s.time));
                CHECK(s.q_ask == 2);
            } else {
                CHECK(s.q_bid == doctest::Approx(3 - (s.time - 1)));
                CHECK(s.q_ask == 4);
            }
        }
    }

    TEST_CASE("exit inside a segment is located exactly") {
        std::vector<PathSample> w{{0, 1, 1}, {1, 1, -1}};
        Rng rng = make_rng(1, "t");
        auto r = regulate(w, scripted({{2, 5}}), rng);
        REQUIRE(r.jumps.size() == 1);
        CHECK(r.jumps[0].time == doctest::Approx(0.5));
        CHECK(r.jumps[0].side == JumpSide::AskDepleted);
        CHECK(r.samples.back().q_ask == doctest::Approx(5 - 1.0));
        CHECK(r.samples.back().q_bid == doctest::Approx(2));
    }

    TEST_CASE("simultaneous hit of both axes resolves to AskDepleted") {
        std::vector<PathSample> w{{0, 1, 1}, {1, -1, -1}};
        Rng rng = make_rng(1, "t");
        auto r = regulate(w, scripted({{5, 5}}), rng);
        REQUIRE_FALSE(r.jumps.empty());
        CHECK(r.jumps[0].side == JumpSide::AskDepleted);
        std::vector<PathSample> ws{{0, 1, 1}, {1, 0, 0}};
        auto rs = regulate(ws, scripted({{5, 5}}), rng, PathInterpolation::Step);
        REQUIRE(rs.jumps.size() == 1);
        CHECK(rs.jumps[0].side == JumpSide::AskDepleted);
    }

    TEST_CASE("paths starting on an axis are rejected") {
        Rng rng = make_rng(1, "t");
        std::vector<PathSample> w{{0, 0, 1}, {1, 1, 1}};
        CHECK_THROWS_AS(regulate(w, uniform_rule(), rng), InvalidInput);
        std::vector<PathSample> o{{0, 0, 0}};
        CHECK_THROWS_AS(regulate(o, uniform_rule(), rng), InvalidInput);
    }

    TEST_CASE("fixture walk: step mode matches brute-force replay") {
        auto w = walk_fixture();
        REQUIRE(w.size() == 1001);
        Rng r1 = make_rng(7, "reinit");
        Rng r2 = make_rng(7, "reinit");
        auto rule = uniform_rule();
        auto reg = regulate(w, rule, r1, PathInterpolation::Step);
        auto ora = oracle_step_replay(w, rule, r2);
        REQUIRE(reg.jumps.size() == ora.size());
        CHECK(reg.jumps.size() > 5);
        for (std::size_t k = 0; k < ora.size(); ++k) {
            CHECK(reg.jumps[k].time == ora[k].time);
            CHECK(reg.jumps[k].side == ora[k].side);
        }
    }

    TEST_CASE("fixture walk: linear mode matches brute-force replay") {
        auto w = walk_fixture();
        Rng r1 = make_rng(7, "reinit");
        Rng r2 = make_rng(7, "reinit");
        auto rule = uniform_rule();
        auto reg = regulate(w, rule, r1, PathInterpolation::Linear);
        auto ora = oracle_linear_replay(w, rule, r2);
        REQUIRE(reg.jumps.size() == ora.size());
        for (std::size_t k = 0; k < ora.size(); ++k) {
            CHECK(reg.jumps[k].time == doctest::Approx(ora[k].time).epsilon(1e-9));
            CHECK(reg.jumps[k].side == ora[k].side);
        }
    }

    TEST_CASE("fixture walk: price from hits matches replay of the increments") {
        auto w = walk_fixture();
        // Build an event stream whose net flow is the walk: one bid and one ask event per step.
        std::vector<OrderEvent> ev;
        for (std::size_t i = 1; i < w.size(); ++i) {
            ev.push_back({w[i].time, Side::Bid, w[i].q_bid - w[i - 1].q_bid});
            ev.push_back({w[i].time, Side::Ask, w[i].q_ask - w[i - 1].q_ask});
        }
        Rng r1 = make_rng(3, "reinit");
        auto rep = replay(ev, BookState{50, 0.01, w[0].q_bid, w[0].q_ask, 0}, uniform_rule(), r1);
        auto p = price_from_hits(rep.queues, 50);
        CHECK(p.steps == rep.prices.steps);
        CHECK(rep.final_book.bid_price_ticks == p.steps.back().price_ticks);
    }

    TEST_CASE("increments between jumps are reproduced bitwise") {
        auto w = walk_fixture();
        Rng rng = make_rng(11, "reinit");
        auto reg = regulate(w, uniform_rule(), rng, PathInterpolation::Step);
        std::size_t jk = 0;
        for (std::size_t i = 1; i < w.size(); ++i) {
            bool jumped = jk < reg.jumps.size() && reg.jumps[jk].time == w[i].time;
            if (jumped) {
                ++jk;
                continue;
            }
            CHECK(reg.samples[i].q_bid == reg.samples[i - 1].q_bid + (w[i].q_bid - w[i - 1].q_bid));
            CHECK(reg.samples[i].q_ask == reg.samples[i - 1].q_ask + (w[i].q_ask - w[i - 1].q_ask));
        }
    }

    TEST_CASE("jump times move continuously with a uniform perturbation of the input") {
        std::vector<PathSample> w;
        for (int i = 0; i <= 800; ++i) {
            double t = i * 0.01;
            w.push_back({t, 1.0 + 2.0 * std::sin(3 * t), 1.0 + 2.0 * std::cos(2 * t)});
        }
        PairDist f{Dist::constant(0.7), Dist::constant(0.9)};
        auto rule = ReinitRule::iid(f, f);
        Rng r0 = make_rng(1, "t");
        auto base = regulate(w, rule, r0);
        REQUIRE(base.jumps.size() >= 3);
        double prev_shift = INFINITY;
        for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
            auto wp = w;
            for (auto& s : wp) {
                s.q_bid += eps;
                s.q_ask += eps;
            }
            Rng r = make_rng(1, "t");
            auto pert = regulate(wp, rule, r);
            REQUIRE(pert.jumps.size() == base.jumps.size());
            double shift = 0;
            for (std::size_t k = 0; k < base.jumps.size(); ++k) {
                CHECK(pert.jumps[k].side == base.jumps[k].side);
                shift = std::max(shift, std::abs(pert.jumps[k].time - base.jumps[k].time));
            }
            CHECK(shift < prev_shift);
            prev_shift = shift;
        }
        CHECK(prev_shift < 1e-3);
    }
}

TEST_SUITE("replay") {
    TEST_CASE("empty stream keeps the initial state") {
        Rng rng = make_rng(1, "t");
        BookState b{100, 0.01, 5, 3, 0};
        auto r = replay({}, b, uniform_rule(), rng);
        CHECK(r.queues.samples.size() == 1);
        CHECK(r.queues.jumps.empty());
        CHECK(r.prices.steps.size() == 1);
        CHECK(r.prices.at(10.0) == 100);
    }

    TEST_CASE("single depleting ask event gives one up-tick") {
        Rng rng = make_rng(1, "t");
        std::vector<OrderEvent> ev{{1.0, Side::Ask, -3}};
        auto r = replay(ev, BookState{100, 0.01, 5, 3, 0}, uniform_rule(), rng);
        REQUIRE(r.prices.steps.size() == 2);
        CHECK(r.prices.steps[1].price_ticks == 101);
        CHECK(r.prices.at(0.5) == 100);
        CHECK(r.prices.at(1.0) == 101);
    }

    TEST_CASE("price from hits counts sides") {
        RegulatedPath p;
        p.samples.push_back({0, 1, 1});
        p.jumps = {{1, JumpSide::AskDepleted, {}, {1, 1}},
                   {2, JumpSide::AskDepleted, {}, {1, 1}},
                   {3, JumpSide::BidDepleted, {}, {1, 1}}};
        auto pp = price_from_hits(p, 100);
        REQUIRE(pp.steps.size() == 4);
        CHECK(pp.steps[1].price_ticks == 101);
        CHECK(pp.steps[2].price_ticks == 102);
        CHECK(pp.steps[3].price_ticks == 101);
        RegulatedPath none;
        none.samples.push_back({0, 1, 1});
        CHECK(price_from_hits(none, 7).steps.size() == 1);
    }

    TEST_CASE("Poisson stream: price changes equal regulated jumps, counted independently") {
        flow::PoissonFlowSpec spec{1.0, 1.2, 0.3, 1.0};
        double horizon = 1e5 / (2 * (spec.lambda_limit + spec.mu_market + spec.theta_cancel));
        auto ev = flow::gen_poisson_flow(spec, horizon, 99);
        CHECK(ev.size() > 90000);
        PairDist f{Dist::uniform(1, 6), Dist::uniform(1, 6)};
        auto rule = ReinitRule::iid(f, f);
        Rng r1 = make_rng(5, "reinit");
        auto rep = replay(ev, BookState{1000, 0.01, 3, 3, 0}, rule, r1);
        CHECK(rep.prices.steps.size() - 1 == rep.queues.jumps.size());
        std::size_t depletions = 0;
        for (std::size_t i = 1; i < rep.queues.samples.size(); ++i) {
            const auto& prev = rep.queues.samples[i - 1];
            const auto& e = ev[i - 1];
            double q = e.side == Side::Bid ? prev.q_bid : prev.q_ask;
            if (q + e.delta <= 0) ++depletions;
        }
        CHECK(depletions == rep.queues.jumps.size());
        CHECK(depletions > 100);
        // Net-flow route through the regulating map with the same draws.
        Rng r2 = make_rng(5, "reinit");
        auto reg = regulate(net_flow_path(ev, {3, 3}), rule, r2, PathInterpolation::Step);
        REQUIRE(reg.jumps.size() == rep.queues.jumps.size());
        for (std::size_t k = 0; k < reg.jumps.size(); ++k) {
            CHECK(reg.jumps[k].time == rep.queues.jumps[k].time);
            CHECK(reg.jumps[k].side == rep.queues.jumps[k].side);
        }
    }

    TEST_CASE("randomized streams keep the orthant invariant and are deterministic") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Rng g = make_rng(seed, "stream");
            std::vector<OrderEvent> ev;
            double t = 0;
            for (int i = 0; i < 500; ++i) {
                t += -std::log(uniform_open(g));
                double d = (uniform_open(g) - 0.55) * 4;
                if (d == 0) d = 1;
                ev.push_back({t, uniform_open(g) < 0.5 ? Side::Bid : Side::Ask, d});
            }
            Rng r1 = make_rng(seed, "reinit");
            Rng r2 = make_rng(seed, "reinit");
            auto a = replay(ev, BookState{0, 1, 2, 2, 0}, uniform_rule(), r1);
            auto b = replay(ev, BookState{0, 1, 2, 2, 0}, uniform_rule(), r2);
            CHECK(a.queues.samples == b.queues.samples);
            for (const auto& s : a.queues.samples) CHECK((s.q_bid > 0 && s.q_ask > 0));
            for (const auto& j : a.queues.jumps) CHECK((j.post.bid > 0 && j.post.ask > 0));
            CHECK(a.prices.steps.size() - 1 == a.queues.jumps.size());
        }
    }
}

TEST_SUITE("csv") {
    TEST_CASE("event csv round trip and line-numbered errors") {
        std::vector<OrderEvent> ev{{0.5, Side::Bid, 2}, {0.75, Side::Ask, -1.25}};
        std::ostringstream os;
        csv::write_events(os, ev);
        std::istringstream is(os.str());
        CHECK(csv::read_events(is) == ev);

        std::istringstream bad("time,side,delta\n0.1,b,1\n-0.2,a,1\n");
        try {
            csv::read_events(bad);
            FAIL("expected an error");
        } catch (const InvalidInput& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
        std::istringstream bad_side("time,side,delta\n0.1,x,1\n");
        CHECK_THROWS_AS(csv::read_events(bad_side), InvalidInput);
        std::istringstream short_row("time,side,delta\n0.1,b\n");
        CHECK_THROWS_AS(csv::read_events(short_row), InvalidInput);
    }

    TEST_CASE("doubles round trip through fmt") {
        for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345678.9, -2.5}) CHECK(std::stod(csv::fmt(v)) == v);
    }
}
