#include "htlob/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "htlob/analytics.hpp"
#include "htlob/csv_io.hpp"
#include "htlob/diffusion.hpp"
#include "htlob/estimation.hpp"
#include "htlob/lob_core.hpp"
#include "htlob/order_flow.hpp"
#include "htlob/random.hpp"
#include "htlob/stats.hpp"

#ifndef HTLOB_VERSION
#define HTLOB_VERSION "0.0.0"
#endif

namespace htlob::cli {

using config::ConfigError;
using config::Json;
using config::Reader;
using report::Format;
using report::Report;
using report::Table;
using report::ValidationRecord;

std::uint64_t derive_seed(std::uint64_t seed, const std::string& name, std::uint64_t index) {
    Rng r = make_rng(seed, name, index);
    return r();
}

namespace {

using Fs = std::filesystem::path;

Json num(double v) { return v; }

// Writes a CSV through `csv_writer`, or the same rows as JSON through `table`.
template <class CsvWriter, class TableBuilder>
void emit(const CommandOptions& opt, Report& rep, const std::string& stem, CsvWriter&& csv_writer,
          TableBuilder&& table) {
    if (opt.format == Format::Csv) {
        std::ostringstream os;
        csv_writer(os);
        report::write_file(opt.out, stem + ".csv", os.str());
        rep.outputs.push_back(stem + ".csv");
    } else {
        report::write_table(opt.out, stem, table(), opt.format, rep);
    }
}

Table events_table(std::span<const OrderEvent> events) {
    Table t{{"time", "side", "delta"}, {}};
    for (const auto& e : events) t.add({num(e.time), e.side == Side::Bid ? "b" : "a", num(e.delta)});
    return t;
}

Table path_table(std::span<const PathSample> s) {
    Table t{{"time", "q_bid", "q_ask"}, {}};
    for (const auto& x : s) t.add({num(x.time), num(x.q_bid), num(x.q_ask)});
    return t;
}

Table price_table(const PricePath& p) {
    Table t{{"time", "price_ticks"}, {}};
    for (const auto& s : p.steps) t.add({num(s.time), s.price_ticks});
    return t;
}

Table jump_table(std::span<const JumpRecord> jumps) {
    Table t{{"time", "side", "pre_bid", "pre_ask", "post_bid", "post_ask"}, {}};
    for (const auto& j : jumps)
        t.add({num(j.time), j.side == JumpSide::AskDepleted ? "a" : "b", num(j.pre.bid), num(j.pre.ask),
               num(j.post.bid), num(j.post.ask)});
    return t;
}

void write_queue_outputs(const CommandOptions& opt, Report& rep, const RegulatedPath& q, const PricePath& prices) {
    emit(opt, rep, "queues", [&](std::ostream& os) { csv::write_path(os, q.samples); },
         [&] { return path_table(q.samples); });
    emit(opt, rep, "prices", [&](std::ostream& os) { csv::write_prices(os, prices); },
         [&] { return price_table(prices); });
    emit(opt, rep, "jumps", [&](std::ostream& os) { csv::write_jumps(os, q.jumps); },
         [&] { return jump_table(q.jumps); });
}

void write_empty_queue_outputs(const CommandOptions& opt, Report& rep) {
    emit(opt, rep, "queues", [&](std::ostream& os) { os << "time,q_bid,q_ask\n"; },
         [&] { return Table{{"time", "q_bid", "q_ask"}, {}}; });
    emit(opt, rep, "prices", [&](std::ostream& os) { os << "time,price_ticks\n"; },
         [&] { return Table{{"time", "price_ticks"}, {}}; });
    emit(opt, rep, "jumps", [&](std::ostream& os) { csv::write_jumps(os, {}); }, [&] { return jump_table({}); });
}

bool in_orthant(const RegulatedPath& q) {
    for (const auto& s : q.samples)
        if (!(s.q_bid >= 0) || !(s.q_ask >= 0)) return false;
    for (const auto& j : q.jumps)
        if (!(j.pre.bid >= 0) || !(j.pre.ask >= 0) || !(j.post.bid > 0) || !(j.post.ask > 0)) return false;
    return true;
}

// A jump leaves the depleted coordinate at zero just before and both coordinates positive after.
bool jump_states_consistent(const RegulatedPath& q) {
    for (const auto& j : q.jumps) {
        double depleted = j.side == JumpSide::AskDepleted ? j.pre.ask : j.pre.bid;
        if (depleted != 0.0 || !(j.post.bid > 0) || !(j.post.ask > 0)) return false;
    }
    return true;
}

std::int64_t integer(Reader& r, const std::string& key, std::int64_t fallback) {
    double v = r.number(key, static_cast<double>(fallback));
    if (v != std::floor(v) || std::abs(v) > 9e15) r.fail(key, "expected an integer");
    return static_cast<std::int64_t>(v);
}

QueuePair interior_pair(Reader r) {
    std::string path = r.path();
    QueuePair q = config::parse_pair(std::move(r));
    if (!(q.bid > 0) || !(q.ask > 0)) throw ConfigError(path + ": queues must be strictly positive");
    return q;
}

std::vector<double> time_grid(Reader& r, double t_min, double t_max, std::uint64_t points) {
    if (r.has("times")) {
        auto t = r.numbers("times");
        if (t.empty()) r.fail("times", "must not be empty");
        for (std::size_t i = 0; i < t.size(); ++i)
            if (!(t[i] > 0) || (i && !(t[i] > t[i - 1]))) r.fail("times", "must be positive and increasing");
        return t;
    }
    double lo = r.number("t_min", t_min), hi = r.number("t_max", t_max);
    std::uint64_t n = r.uint("points", points);
    if (!(lo > 0) || !(hi > lo)) r.fail("t_min", "need 0 < t_min < t_max");
    if (n < 2) r.fail("points", "need at least two points");
    std::vector<double> t(n);
    for (std::uint64_t i = 0; i < n; ++i)
        t[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(i) / (n - 1));
    t.back() = hi;
    return t;
}

Json cov_json(const Cov2& c) { return {{"bb", c.bb}, {"ba", c.ba}, {"aa", c.aa}}; }

// ---------------------------------------------------------------- simulate-lob

void simulate_lob(Reader& r, std::uint64_t seed, const CommandOptions& opt, Report& rep) {
    double horizon = r.number("horizon");
    if (!(horizon >= 0)) r.fail("horizon", "must be non-negative");
    flow::FlowSpec spec = config::parse_flow(r.object("flow"));
    ReinitRule rule = config::parse_rule(r.object("rule"));
    QueuePair q0 = interior_pair(r.object("initial"));
    double tick = r.number("tick", 0.01);
    if (!(tick > 0)) r.fail("tick", "must be positive");
    std::int64_t p0 = integer(r, "start_price_ticks", 0);
    bool check_rate = r.boolean("check_event_rate", true);
    double rate_tol = r.number("rate_tolerance", 0.05);
    r.finish();

    std::vector<OrderEvent> events;
    if (horizon > 0) events = flow::generate(spec, horizon, derive_seed(seed, "simulate_lob.flow"));
    emit(opt, rep, "events", [&](std::ostream& os) { csv::write_events(os, events); },
         [&] { return events_table(events); });

    std::size_t bid = 0, up = 0;
    for (const auto& e : events) bid += e.side == Side::Bid;
    Json& s = rep.results;
    s["flow"] = flow::flow_name(spec);
    s["horizon"] = horizon;
    s["events"] = events.size();
    s["events_bid"] = bid;
    s["events_ask"] = events.size() - bid;

    if (horizon == 0) {
        write_empty_queue_outputs(opt, rep);
        s["price_changes"] = 0;
        s["up_moves"] = 0;
        s["down_moves"] = 0;
        s["event_rate"] = 0.0;
        return;
    }

    Rng rng = make_rng(seed, "simulate_lob.reinit");
    BookState b;
    b.bid_price_ticks = p0;
    b.tick = tick;
    b.q_bid = q0.bid;
    b.q_ask = q0.ask;
    ReplayResult res = replay(events, b, rule, rng);
    write_queue_outputs(opt, rep, res.queues, res.prices);

    for (const auto& j : res.queues.jumps) up += j.side == JumpSide::AskDepleted;
    double rate = static_cast<double>(events.size()) / horizon;
    s["price_changes"] = res.queues.jumps.size();
    s["up_moves"] = up;
    s["down_moves"] = res.queues.jumps.size() - up;
    s["event_rate"] = rate;
    s["final"] = {{"time", res.final_book.time},
                  {"bid_price_ticks", res.final_book.bid_price_ticks},
                  {"q_bid", res.final_book.q_bid},
                  {"q_ask", res.final_book.q_ask}};

    rep.add(ValidationRecord::flag("lob.orthant", in_orthant(res.queues)));
    rep.add(ValidationRecord::check("lob.jumps_minus_price_changes",
                                    static_cast<double>(res.queues.jumps.size()),
                                    static_cast<double>(res.prices.steps.size() - 1), 0.0));
    if (check_rate) {
        if (auto m = flow::net_flow_moments(spec)) {
            double expected = m->rate_bid + m->rate_ask;
            s["expected_event_rate"] = expected;
            rep.add(ValidationRecord::check("lob.event_rate", rate, expected, rate_tol * expected));
        } else {
            rep.warnings.push_back("no closed-form event rate for this flow; rate check skipped");
        }
    }
}

// ---------------------------------------------------------------- simulate-q

void simulate_q(Reader& r, std::uint64_t seed, const CommandOptions& opt, Report& rep) {
    DiffusionParams p = config::parse_params(r.object("params"));
    ReinitRule rule = config::parse_rule(r.object("rule"));
    QueuePair q0 = interior_pair(r.object("initial"));
    double horizon = r.number("horizon");
    if (!(horizon >= 0)) r.fail("horizon", "must be non-negative");
    double step = r.number("step", 0.0);
    if (!(step >= 0)) r.fail("step", "must be non-negative");
    std::int64_t p0 = integer(r, "start_price_ticks", 0);
    r.finish();

    Json& s = rep.results;
    s["horizon"] = horizon;
    if (horizon == 0) {
        write_empty_queue_outputs(opt, rep);
        s["samples"] = 0;
        s["price_changes"] = 0;
        return;
    }
    RegulatedPath q = diffusion::simulate_Q(p, rule, q0, horizon, step, derive_seed(seed, "simulate_q"));
    PricePath prices = price_from_hits(q, p0);
    write_queue_outputs(opt, rep, q, prices);

    std::size_t up = 0;
    for (const auto& j : q.jumps) up += j.side == JumpSide::AskDepleted;
    s["samples"] = q.samples.size();
    s["price_changes"] = q.jumps.size();
    s["up_moves"] = up;
    s["down_moves"] = q.jumps.size() - up;
    s["final_price_ticks"] = prices.steps.back().price_ticks;
    rep.add(ValidationRecord::flag("q.orthant", in_orthant(q)));
    rep.add(ValidationRecord::flag("q.jump_states", jump_states_consistent(q)));
}

// ---------------------------------------------------------------- validate-fclt

std::string sign_name(double v) { return v < 0 ? "negative" : v > 0 ? "positive" : "zero"; }

void validate_fclt(Reader& r, std::uint64_t seed, const CommandOptions& opt, Report& rep) {
    std::vector<double> ladder = r.numbers("ladder", {100, 1000, 10000});
    if (ladder.size() < 2) r.fail("ladder", "infeasible ladder: need at least two levels");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] >= 1)) r.fail("ladder", "infeasible ladder: levels must be >= 1");
        if (i && !(ladder[i] > ladder[i - 1])) r.fail("ladder", "infeasible ladder: levels must increase");
    }
    diffusion::FcltOptions fo;
    fo.replications = r.uint("paths", 1000);
    fo.horizon = r.uint("increments", 20);
    fo.threads = opt.threads;
    if (fo.replications < 10) r.fail("paths", "infeasible ladder: need at least 10 replications");
    if (fo.horizon < 1) r.fail("increments", "must be at least 1");
    double cov_tol = r.number("cov_tolerance", 0.05);

    struct Case {
        std::string name;
        flow::FlowSpec spec;
        std::string expect_sign;
        bool expect_degenerate;
    };
    std::vector<Case> cases;
    Json& flows = r.raw("flows");
    if (!flows.is_array() || flows.empty()) r.fail("flows", "expected a non-empty array");
    for (std::size_t i = 0; i < flows.size(); ++i) {
        Reader f(flows[i], "flows[" + std::to_string(i) + "]");
        Case c;
        c.name = f.string("name", "flow" + std::to_string(i));
        c.spec = config::parse_flow(f.object("flow"));
        c.expect_sign = f.string("expect_corr_sign", "any");
        if (c.expect_sign != "any" && c.expect_sign != "negative" && c.expect_sign != "positive" &&
            c.expect_sign != "zero")
            f.fail("expect_corr_sign", "expected any, negative, positive or zero");
        c.expect_degenerate = f.boolean("expect_degenerate", false);
        f.finish();
        cases.push_back(std::move(c));
    }

    bool ql_on = r.has("queue_limit");
    flow::FlowSpec ql_flow;
    ReinitRule ql_rule;
    QueuePair ql_q0;
    double ql_n = 0, ql_h = 0;
    std::size_t ql_reps = 0;
    if (ql_on) {
        Reader q = r.object("queue_limit");
        ql_flow = config::parse_flow(q.object("flow"));
        ql_rule = config::parse_rule(q.object("rule"));
        ql_q0 = interior_pair(q.object("initial"));
        ql_n = q.number("n", 1000);
        ql_h = q.number("horizon", 1.0);
        ql_reps = q.uint("replications", 1000);
        if (!(ql_n >= 1) || !(ql_h > 0) || ql_reps < 10) q.fail("", "need n >= 1, horizon > 0, replications >= 10");
        q.finish();
    }
    r.finish();

    Json out = Json::array();
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const Case& c = cases[ci];
        diffusion::FcltOptions o = fo;
        o.seed = derive_seed(seed, "validate_fclt", ci);
        diffusion::FcltReport fr = diffusion::net_flow_fclt_check(c.spec, ladder, o);
        Json jr;
        jr["name"] = c.name;
        jr["flow"] = fr.flow;
        jr["degenerate"] = fr.degenerate;
        jr["target_mean"] = fr.target_mean;
        jr["target_cov"] = cov_json(fr.target_cov);
        Json levels = Json::array();
        for (const auto& l : fr.levels) {
            levels.push_back({{"n", l.n},
                              {"replications", l.replications},
                              {"samples", l.samples},
                              {"ks", l.ks},
                              {"ks_terminal", l.ks_terminal},
                              {"ks_critical", l.ks_critical},
                              {"ks_terminal_critical", l.ks_terminal_critical},
                              {"sample_cov", cov_json(l.sample_cov)},
                              {"cov_rel_error", l.cov_rel_error},
                              {"corr", l.corr},
                              {"mean_events", l.mean_events}});
        }
        jr["levels"] = levels;
        out.push_back(jr);

        std::string m = "fclt." + c.name;
        rep.add(ValidationRecord::check(m + ".degenerate", fr.degenerate ? 1.0 : 0.0, c.expect_degenerate ? 1.0 : 0.0,
                                        0.0));
        if (fr.degenerate) {
            rep.warnings.push_back(c.name + ": limiting covariance is degenerate; KS and covariance checks skipped");
            continue;
        }
        for (int k = 0; k < 2; ++k) {
            // A step counts as a rise when KS grows by more than the level's 95% null critical value.
            std::size_t rises = 0;
            for (std::size_t i = 1; i < fr.levels.size(); ++i)
                rises += fr.levels[i].ks[k] > fr.levels[i - 1].ks[k] + fr.levels[i].ks_critical;
            const char* side = k == 0 ? ".bid" : ".ask";
            rep.add(ValidationRecord::check(m + ".ks_rises" + side, static_cast<double>(rises), 0.0, 0.0));
            rep.add(ValidationRecord::flag(m + ".ks_net_decrease" + side,
                                           fr.levels.back().ks[k] < fr.levels.front().ks[k]));
        }
        const auto& top = fr.levels.back();
        rep.add(ValidationRecord::check(m + ".cov_rel_error", top.cov_rel_error, 0.0, cov_tol));
        if (c.expect_sign != "any") {
            bool ok = sign_name(top.sample_cov.ba) == c.expect_sign && sign_name(fr.target_cov.ba) == c.expect_sign;
            if (c.expect_sign == "zero") ok = sign_name(fr.target_cov.ba) == "zero";
            rep.add(ValidationRecord::flag(m + ".corr_sign_" + c.expect_sign, ok));
        }
    }
    rep.results["flows"] = out;

    if (ql_on) {
        auto qc = diffusion::queue_limit_check(ql_flow, ql_rule, ql_q0, ql_n, ql_h, ql_reps,
                                               derive_seed(seed, "validate_fclt.queue_limit"), opt.threads);
        rep.results["queue_limit"] = {{"n", qc.n},
                                      {"horizon", qc.horizon},
                                      {"replications", qc.replications},
                                      {"ks", qc.ks},
                                      {"ks_critical", qc.ks_critical},
                                      {"mean_discrete", qc.mean_discrete},
                                      {"mean_limit", qc.mean_limit}};
        rep.add(ValidationRecord::check("queue_limit.ks.bid", qc.ks[0], 0.0, qc.ks_critical));
        rep.add(ValidationRecord::check("queue_limit.ks.ask", qc.ks[1], 0.0, qc.ks_critical));
    }
}

// ---------------------------------------------------------------- pup

void pup(Reader& r, std::uint64_t seed, const CommandOptions& opt, Report& rep) {
    std::uint64_t paths = r.uint("paths", 1000000);
    DiffusionParams p = config::parse_params(r.object("params"));
    std::vector<double> xs = r.numbers("x", {0.5, 1.375, 2.25, 3.125, 4.0});
    std::vector<double> ys = r.numbers("y", {0.5, 1.375, 2.25, 3.125, 4.0});
    double mult = r.number("sigma_mult", 3.0);
    double form_tol = r.number("form_tolerance", 1e-10);
    struct Exact {
        double x, y, value;
    };
    std::vector<Exact> exact;
    if (r.has("exact")) {
        Json& ex = r.raw("exact");
        if (!ex.is_array()) r.fail("exact", "expected an array");
        for (std::size_t i = 0; i < ex.size(); ++i) {
            Reader e(ex[i], "exact[" + std::to_string(i) + "]");
            Exact v{e.number("x"), e.number("y"), e.number("value")};
            e.finish();
            exact.push_back(v);
        }
    }
    r.finish();
    if (!p.driftless()) throw ConfigError("params: the closed-form p_up needs zero drift");
    if (paths < 2) throw ConfigError("paths: need at least 2");
    for (double v : xs)
        if (!(v > 0)) throw ConfigError("x: grid values must be positive");
    for (double v : ys)
        if (!(v > 0)) throw ConfigError("y: grid values must be positive");
    if (paths < 10000) {
        mult = std::max(mult, 4.0);
        rep.warnings.push_back("MC budget below 10^4 paths per cell; tolerance widened to " + csv::fmt(mult) +
                               " standard errors");
    }

    Table t{{"x", "y", "analytic", "arctan", "arcsin", "mc", "se", "z"}, {}};
    double form_gap = 0.0;
    std::size_t cell = 0;
    auto mc_cell = [&](double x, double y) {
        diffusion::McOptions mo;
        mo.paths = paths;
        mo.seed = derive_seed(seed, "pup", cell++);
        mo.threads = opt.threads;
        return diffusion::exit_statistics(p, {x, y}, mo);
    };
    std::size_t worst = 0;
    double worst_z = 0.0;
    for (double x : xs) {
        for (double y : ys) {
            double a = analytics::prob_up(x, y, p);
            double at = analytics::prob_up_arctan(x, y, p);
            double as = analytics::prob_up_arcsin(x, y, p);
            form_gap = std::max(form_gap, std::abs(at - as));
            auto st = mc_cell(x, y);
            double z = st.p_ask_se > 0 ? (st.p_ask - a) / st.p_ask_se : 0.0;
            t.add({num(x), num(y), num(a), num(at), num(as), num(st.p_ask), num(st.p_ask_se), num(z)});
            rep.add(ValidationRecord::check("pup.cell." + csv::fmt(x) + "_" + csv::fmt(y), st.p_ask, a,
                                            mult * st.p_ask_se, st.p_ask_se));
            if (std::abs(z) > worst_z) {
                worst_z = std::abs(z);
                worst = t.rows.size() - 1;
            }
        }
    }
    rep.add(ValidationRecord::check("pup.arcsin_vs_arctan", form_gap, 0.0, form_tol));
    Json ex_out = Json::array();
    for (const auto& e : exact) {
        auto st = mc_cell(e.x, e.y);
        double a = analytics::prob_up(e.x, e.y, p);
        ex_out.push_back({{"x", e.x}, {"y", e.y}, {"value", e.value}, {"analytic", a}, {"mc", st.p_ask},
                          {"se", st.p_ask_se}});
        rep.add(ValidationRecord::check("pup.exact." + csv::fmt(e.x) + "_" + csv::fmt(e.y), st.p_ask, e.value,
                                        mult * st.p_ask_se, st.p_ask_se));
        rep.add(ValidationRecord::check("pup.exact_analytic." + csv::fmt(e.x) + "_" + csv::fmt(e.y), a, e.value,
                                        1e-12));
    }
    report::write_table(opt.out, "pup", t, opt.format, rep);
    rep.results["cells"] = t.rows.size();
    rep.results["paths_per_cell"] = paths;
    rep.results["max_abs_z"] = worst_z;
    if (!t.rows.empty()) rep.results["worst_cell"] = {{"x", t.rows[worst][0]}, {"y", t.rows[worst][1]}};
    rep.results["max_form_gap"] = form_gap;
    rep.results["exact"] = ex_out;
}

// ---------------------------------------------------------------- duration

void duration(Reader& r, std::uint64_t seed, const CommandOptions& opt, Report& rep) {
    std::uint64_t paths = r.uint("paths", 100000);
    DiffusionParams p = config::parse_params(r.object("params"));
    QueuePair q0 = interior_pair(r.object("initial"));
    std::vector<double> grid = time_grid(r, 0.02, 20.0, 60);
    std::vector<double> band = r.numbers("band", {0.05, 0.95});
    if (band.size() != 2 || !(band[0] < band[1])) r.fail("band", "expected [low, high]");
    double sup_tol = r.number("sup_tolerance", 0.02);
    std::string series_kind = r.string("series", "standardized");
    if (series_kind != "standardized" && series_kind != "printed") r.fail("series", "expected standardized or printed");

    bool tail_on = false;
    std::vector<double> tail_grid;
    double tail_tol = 0.1;
    {
        Reader t = r.object_or_empty("tail");
        tail_on = t.boolean("enabled", p.driftless());
        if (tail_on) {
            tail_grid = time_grid(t, 20.0, 200.0, 10);
            tail_tol = t.number("tolerance", 0.1);
        }
        t.finish();
    }
    r.finish();
    if (tail_on && !p.driftless()) throw ConfigError("tail: the power-law tail fit needs zero drift");
    if (paths < 2) throw ConfigError("paths: need at least 2");

    std::vector<double> all = grid;
    all.insert(all.end(), tail_grid.begin(), tail_grid.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    diffusion::McOptions mo;
    mo.paths = paths;
    mo.seed = derive_seed(seed, "duration");
    mo.threads = opt.threads;
    mo.survival_grid = all;
    mo.horizon = all.back();
    auto st = diffusion::exit_statistics(p, q0, mo);

    analytics::SeriesOptions so;
    so.prefactor = series_kind == "printed" ? analytics::SurvivalPrefactor::PaperDisplay
                                            : analytics::SurvivalPrefactor::Standardized;
    auto series = [&](double t) {
        if (p.driftless()) return analytics::duration_survival(t, q0.bid, q0.ask, p, so);
        return analytics::duration_survival_drifted(t, q0.bid, q0.ask, p).value;
    };

    Table tab{{"t", "series", "mc", "se", "in_band"}, {}};
    double sup = 0.0, sup_t = 0.0, max_se = 0.0;
    std::size_t in_band_count = 0;
    std::vector<double> lt, ls;
    for (std::size_t i = 0; i < all.size(); ++i) {
        double t = all[i];
        double s = series(t);
        double mc = st.survival[i], se = st.survival_se[i];
        bool on_grid = std::binary_search(grid.begin(), grid.end(), t);
        bool in_band = on_grid && s >= band[0] && s <= band[1];
        tab.add({num(t), num(s), num(mc), num(se), in_band ? 1 : 0});
        if (in_band) {
            ++in_band_count;
            max_se = std::max(max_se, se);
            if (std::abs(s - mc) > sup) {
                sup = std::abs(s - mc);
                sup_t = t;
            }
        }
        if (tail_on && std::binary_search(tail_grid.begin(), tail_grid.end(), t) && mc > 0) {
            lt.push_back(std::log(t));
            ls.push_back(std::log(mc));
        }
    }
    report::write_table(opt.out, "duration", tab, opt.format, rep);

    if (in_band_count == 0) throw ConfigError("times: no grid point has survival inside the band");
    double tol = sup_tol;
    if (3 * max_se > sup_tol / 2) {
        tol = sup_tol + 3 * max_se;
        rep.warnings.push_back("MC budget too small for the sup-gap tolerance; widened to " + csv::fmt(tol));
    }
    rep.add(ValidationRecord::check("duration.sup_gap", sup, 0.0, tol, max_se));
    Json& res = rep.results;
    res["paths"] = paths;
    res["series"] = p.driftless() ? series_kind : "drifted";
    res["sup_gap"] = sup;
    res["sup_gap_t"] = sup_t;
    res["band_points"] = in_band_count;
    res["censored"] = st.censored;
    res["p_ask"] = st.p_ask;
    res["geometry"] = {{"alpha", analytics::cone_alpha(p.rho)}, {"tail_index", analytics::duration_tail_index(p)}};

    if (tail_on) {
        if (lt.size() < 3) throw ConfigError("tail: fewer than three tail points with surviving paths");
        auto fit = stats::linear_fit(lt, ls);
        double ref = -analytics::duration_tail_index(p);
        res["tail"] = {{"slope", fit.slope}, {"reference", ref}, {"points", lt.size()}};
        rep.add(ValidationRecord::check("duration.tail_slope", fit.slope, ref, tail_tol * std::abs(ref)));
    }
}

// ---------------------------------------------------------------- estimate

Json param_json(const est::ParamEstimate& e) {
    return {{"value", e.value}, {"std_error", e.std_error}, {"n_used", e.n_used}};
}

Json vr_json(const est::VarianceRatioTable& t) {
    Json rows = Json::array();
    for (const auto& r : t.rows) rows.push_back({{"n", r.n}, {"batches", r.batches}, {"value", r.value}});
    return {{"rows", rows}, {"linearity", t.linearity}};
}

Json hill_json(const est::HillEstimate& h) {
    return {{"value", h.est.value}, {"std_error", h.est.std_error}, {"k", h.k}, {"ci_low", h.ci_low},
            {"ci_high", h.ci_high}, {"tail_index", h.tail_index}};
}

std::string read_bytes(const Fs& f) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + f.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void estimate(Reader& r, std::uint64_t, const CommandOptions& opt, Report& rep) {
    if (!opt.input) throw ConfigError("estimate needs --input <events.csv>");
    est::EstimateOptions eo;
    if (r.has("lag_cut")) eo.lag_cut = r.uint("lag_cut");
    if (r.has("hill_k")) eo.hill_k = r.uint("hill_k");
    eo.gamma1 = r.number("gamma1", 30.0);
    if (!(eo.gamma1 > 0)) r.fail("gamma1", "must be positive");
    {
        auto l = r.numbers("ladder", {1, 2, 5, 10, 20, 50, 100});
        eo.ladder.clear();
        for (double v : l) {
            if (!(v >= 1) || v != std::floor(v)) r.fail("ladder", "expected positive integers");
            eo.ladder.push_back(static_cast<std::size_t>(v));
        }
    }
    {
        Reader rr = r.object_or_empty("rho");
        std::string a = rr.string("alignment", "index");
        if (a == "index") eo.rho.alignment = est::RhoAlignment::Index;
        else if (a == "time_bucket") eo.rho.alignment = est::RhoAlignment::TimeBucket;
        else rr.fail("alignment", "expected index or time_bucket");
        std::string f = rr.string("form", "normalized");
        if (f == "normalized") eo.rho.form = est::RhoForm::Normalized;
        else if (f == "literal") eo.rho.form = est::RhoForm::Literal;
        else rr.fail("form", "expected normalized or literal");
        eo.rho.bucket_width = rr.number("bucket_width", 0.0);
        if (rr.has("lag_cut")) eo.rho.lag_cut = rr.uint("lag_cut");
        rr.finish();
    }
    std::string label = r.string("label", "input");
    struct Truth {
        std::string key;
        double value;
    };
    std::vector<Truth> truth;
    double rel_tol = 0.05, rho_rel = 0.1, rho_abs = 0.0;
    if (r.has("truth")) {
        Reader t = r.object("truth");
        for (const char* k : {"lambda_bid", "lambda_ask", "vbar_bid", "vbar_ask", "v2_bid", "v2_ask", "rho"})
            if (t.has(k)) truth.push_back({k, t.number(k)});
        rel_tol = t.number("rel_tolerance", 0.05);
        rho_rel = t.number("rho_rel_tolerance", 0.1);
        rho_abs = t.number("rho_abs_tolerance", 0.0);
        t.finish();
    }
    r.finish();

    std::string bytes = read_bytes(*opt.input);
    rep.provenance["input"] = opt.input->string();
    char hbuf[17];
    std::snprintf(hbuf, sizeof hbuf, "%016llx", static_cast<unsigned long long>(stream_key(bytes)));
    rep.provenance["input_hash"] = hbuf;
    std::istringstream in(bytes);
    std::vector<OrderEvent> events;
    try {
        events = csv::read_events(in);
    } catch (const InvalidInput& e) {
        throw InvalidInput(opt.input->string() + ": " + e.what());
    }
    auto sample = est::FlowSample::from_events(events);
    auto er = est::estimate_all(sample, eo);

    Json& res = rep.results;
    res["events"] = {{"bid", er.events_bid}, {"ask", er.events_ask}};
    res["rates"] = {{"bid", param_json(er.rates.bid)}, {"ask", param_json(er.rates.ask)}};
    res["sizes"] = {{"bid", {{"vbar", param_json(er.sizes.bid.vbar)}, {"v2", param_json(er.sizes.bid.v2)},
                             {"lag_cut", er.sizes.bid.lag_cut}}},
                    {"ask", {{"vbar", param_json(er.sizes.ask.vbar)}, {"v2", param_json(er.sizes.ask.v2)},
                             {"lag_cut", er.sizes.ask.lag_cut}}}};
    res["rho"] = {{"value", er.rho.est.value},
                  {"std_error", er.rho.est.std_error},
                  {"raw", er.rho.raw},
                  {"clamped", er.rho.clamped},
                  {"lag_cut", er.rho.lag_cut},
                  {"alignment", er.rho.alignment == est::RhoAlignment::Index ? "index" : "time_bucket"},
                  {"form", er.rho.form == est::RhoForm::Normalized ? "normalized" : "literal"},
                  {"bucket_width", er.rho.bucket_width}};
    res["hill"] = {{"bid", hill_json(er.hill_bid)}, {"ask", hill_json(er.hill_ask)}};
    res["gamma0"] = er.gamma0;
    const auto& dp = er.params;
    res["params"] = {{"lambda_bid", dp.lambda_bid}, {"lambda_ask", dp.lambda_ask}, {"vbar_bid", dp.vbar_bid},
                     {"vbar_ask", dp.vbar_ask},     {"v2_bid", dp.v2_bid},         {"v2_ask", dp.v2_ask},
                     {"rho", dp.rho}};
    const auto& sc = er.scaled;
    res["scaled"] = {{"N", sc.N},         {"gamma0", sc.gamma0},         {"gamma1", sc.gamma1},
                     {"mu_bid", sc.mu_bid}, {"mu_ask", sc.mu_ask}, {"Lambda", cov_json(sc.Lambda)}};
    res["variance_ratio"] = {{"bid", vr_json(er.vr_bid)}, {"ask", vr_json(er.vr_ask)}};

    Table t5{{"label", "sd_bid", "sd_ask", "mu_bid", "mu_ask", "rho"}, {}};
    t5.add({label, num(std::sqrt(sc.Lambda.bb)), num(std::sqrt(sc.Lambda.aa)), num(sc.mu_bid), num(sc.mu_ask),
            num(sc.Lambda.corr())});
    res["table"] = t5.to_json();
    report::write_table(opt.out, "table5", t5, opt.format, rep);

    for (const auto& tr : truth) {
        double obs = res["params"][tr.key].get<double>();
        double tol = tr.key == "rho" ? std::max(rho_rel * std::abs(tr.value), rho_abs) : rel_tol * std::abs(tr.value);
        rep.add(ValidationRecord::check("estimate." + tr.key, obs, tr.value, tol));
    }
}

using Handler = void (*)(Reader&, std::uint64_t, const CommandOptions&, Report&);

struct Entry {
    const char* name;
    Handler fn;
    const char* paths_key;  // config key that --paths overrides, if any
};

const Entry kCommands[] = {
    {"simulate-lob", &simulate_lob, nullptr},
    {"simulate-q", &simulate_q, nullptr},
    {"validate-fclt", &validate_fclt, "paths"},
    {"pup", &pup, "paths"},
    {"duration", &duration, "paths"},
    {"estimate", &estimate, nullptr},
};

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& e : kCommands) v.push_back(e.name);
        return v;
    }();
    return names;
}

Report run(const std::string& command, const Json& config, const CommandOptions& opt) {
    const Entry* entry = nullptr;
    for (const auto& e : kCommands)
        if (command == e.name) entry = &e;
    if (!entry) throw ConfigError("unknown command '" + command + "'");

    Json cfg = config.is_null() ? Json::object() : config;
    if (!cfg.is_object()) throw ConfigError("config: expected a JSON object");
    if (opt.seed) cfg["seed"] = *opt.seed;
    if (opt.paths) {
        if (!entry->paths_key) throw ConfigError(std::string("--paths is not used by ") + entry->name);
        cfg[entry->paths_key] = *opt.paths;
    }

    Report rep;
    rep.command = entry->name;
    Reader root(cfg, "");
    std::uint64_t seed = root.uint("seed", 1);
    entry->fn(root, seed, opt, rep);

    rep.config = cfg;
    rep.provenance["version"] = HTLOB_VERSION;
    rep.provenance["seed"] = seed;
    rep.provenance["config_hash"] = config::config_hash(cfg);
    report::write_file(opt.out, "report.json", rep.to_json().dump(2) + "\n");
    return rep;
}

}  // namespace htlob::cli
