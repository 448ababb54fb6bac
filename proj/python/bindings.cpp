#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "htlob/analytics.hpp"
#include "htlob/commands.hpp"
#include "htlob/config.hpp"
#include "htlob/csv_io.hpp"
#include "htlob/diffusion.hpp"
#include "htlob/estimation.hpp"
#include "htlob/lob_core.hpp"
#include "htlob/order_flow.hpp"

namespace py = pybind11;
using namespace htlob;

namespace {

config::Json parse(const std::string& text) {
    try {
        return config::Json::parse(text);
    } catch (const config::Json::parse_error& e) {
        throw InvalidInput(std::string("config: ") + e.what());
    }
}

py::dict exit_stats_dict(const diffusion::ExitStatistics& s) {
    py::dict d;
    d["paths"] = s.paths;
    d["ask_first"] = s.ask_first;
    d["bid_first"] = s.bid_first;
    d["censored"] = s.censored;
    d["p_up"] = s.p_ask;
    d["p_up_se"] = s.p_ask_se;
    d["grid"] = s.grid;
    d["survival"] = s.survival;
    d["survival_se"] = s.survival_se;
    d["mean_steps"] = s.mean_steps;
    return d;
}

std::vector<OrderEvent> to_events(const std::vector<double>& time, const std::vector<std::string>& side,
                                  const std::vector<double>& delta) {
    if (time.size() != side.size() || time.size() != delta.size())
        throw InvalidInput("events: time, side and delta must have equal length");
    std::vector<OrderEvent> ev(time.size());
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (side[i] == "b" || side[i] == "bid")
            ev[i].side = Side::Bid;
        else if (side[i] == "a" || side[i] == "ask")
            ev[i].side = Side::Ask;
        else
            throw InvalidInput("events: side must be 'b' or 'a'");
        ev[i].time = time[i];
        ev[i].delta = delta[i];
    }
    return ev;
}

py::dict events_dict(const std::vector<OrderEvent>& ev) {
    std::vector<double> t, d;
    std::vector<std::string> s;
    t.reserve(ev.size());
    d.reserve(ev.size());
    s.reserve(ev.size());
    for (const auto& e : ev) {
        t.push_back(e.time);
        s.push_back(e.side == Side::Bid ? "b" : "a");
        d.push_back(e.delta);
    }
    py::dict out;
    out["time"] = t;
    out["side"] = s;
    out["delta"] = d;
    return out;
}

}  // namespace

PYBIND11_MODULE(_htlob, m) {
    m.doc() = "Heavy-traffic limit order book: analytics, Monte Carlo, estimation and the command harness";
    m.attr("__version__") = HTLOB_VERSION;

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<DiffusionParams>(m, "DiffusionParams")
        .def(py::init<>())
        .def_readwrite("lambda_bid", &DiffusionParams::lambda_bid)
        .def_readwrite("lambda_ask", &DiffusionParams::lambda_ask)
        .def_readwrite("vbar_bid", &DiffusionParams::vbar_bid)
        .def_readwrite("vbar_ask", &DiffusionParams::vbar_ask)
        .def_readwrite("v2_bid", &DiffusionParams::v2_bid)
        .def_readwrite("v2_ask", &DiffusionParams::v2_ask)
        .def_readwrite("rho", &DiffusionParams::rho)
        .def("validate", &DiffusionParams::validate)
        .def_property_readonly("sigma_bid", &DiffusionParams::sigma_bid)
        .def_property_readonly("sigma_ask", &DiffusionParams::sigma_ask)
        .def_property_readonly("drift_bid", &DiffusionParams::drift_bid)
        .def_property_readonly("drift_ask", &DiffusionParams::drift_ask)
        .def_static("from_moments", &DiffusionParams::from_moments, py::arg("mu_bid"), py::arg("mu_ask"),
                    py::arg("sd_bid"), py::arg("sd_ask"), py::arg("rho"))
        .def_static("standard", &DiffusionParams::standard, py::arg("rho"))
        .def("__repr__", [](const DiffusionParams& p) {
            return "DiffusionParams(lambda=(" + csv::fmt(p.lambda_bid) + ", " + csv::fmt(p.lambda_ask) + "), vbar=(" +
                   csv::fmt(p.vbar_bid) + ", " + csv::fmt(p.vbar_ask) + "), v2=(" + csv::fmt(p.v2_bid) + ", " +
                   csv::fmt(p.v2_ask) + "), rho=" + csv::fmt(p.rho) + ")";
        });

    m.def("params_from_json", [](const std::string& text) {
        auto j = parse(text);
        return config::parse_params(config::Reader(j, "params"));
    });

    m.def("prob_up", &analytics::prob_up, py::arg("x"), py::arg("y"), py::arg("params"),
          "P[ask queue empties first] from bid queue x and ask queue y, driftless closed form");
    m.def("prob_up_arctan", &analytics::prob_up_arctan, py::arg("x"), py::arg("y"), py::arg("params"));
    m.def("prob_up_arcsin", &analytics::prob_up_arcsin, py::arg("x"), py::arg("y"), py::arg("params"));
    m.def("cone_alpha", &analytics::cone_alpha, py::arg("rho"));
    m.def("duration_tail_index", py::overload_cast<double>(&analytics::duration_tail_index), py::arg("rho"));
    m.def(
        "duration_survival",
        [](double t, double x, double y, const DiffusionParams& p, bool printed) {
            analytics::SeriesOptions o;
            if (printed) o.prefactor = analytics::SurvivalPrefactor::PaperDisplay;
            return analytics::duration_survival(t, x, y, p, o);
        },
        py::arg("t"), py::arg("x"), py::arg("y"), py::arg("params"), py::arg("printed_radius") = false);
    m.def(
        "duration_survival_drifted",
        [](double t, double x, double y, const DiffusionParams& p) {
            return analytics::duration_survival_drifted(t, x, y, p).value;
        },
        py::arg("t"), py::arg("x"), py::arg("y"), py::arg("params"));
    m.def(
        "agent_model_params",
        [](double m_, double l, double gamma, double mean_duration, double e_v2, double vbar) {
            auto a = analytics::agent_model_params(m_, l, gamma, mean_duration, e_v2, vbar);
            py::dict d;
            d["mu"] = a.mu;
            d["v2"] = a.v2;
            d["rho"] = a.rho;
            d["lambda"] = a.lambda;
            return d;
        },
        py::arg("m"), py::arg("l"), py::arg("gamma"), py::arg("mean_duration"), py::arg("e_v2"), py::arg("vbar"));

    m.def(
        "exit_statistics",
        [](const DiffusionParams& p, double x, double y, std::size_t paths, std::uint64_t seed,
           std::vector<double> grid, double horizon, unsigned threads) {
            diffusion::McOptions o;
            o.paths = paths;
            o.seed = seed;
            o.survival_grid = std::move(grid);
            if (horizon > 0) o.horizon = horizon;
            o.threads = threads;
            diffusion::ExitStatistics s;
            {
                py::gil_scoped_release release;
                s = diffusion::exit_statistics(p, {x, y}, o);
            }
            return exit_stats_dict(s);
        },
        py::arg("params"), py::arg("x"), py::arg("y"), py::arg("paths") = 100000, py::arg("seed") = 1,
        py::arg("grid") = std::vector<double>{}, py::arg("horizon") = 0.0, py::arg("threads") = 0u,
        "First-exit Monte Carlo: p_up with its standard error and survival on `grid`");

    m.def(
        "generate_flow",
        [](const std::string& spec, double horizon, std::uint64_t seed) {
            auto j = parse(spec);
            auto f = config::parse_flow(config::Reader(j, "flow"));
            return events_dict(flow::generate(f, horizon, seed));
        },
        py::arg("spec_json"), py::arg("horizon"), py::arg("seed"),
        "Order events from a JSON flow spec as {'time', 'side', 'delta'} lists");

    m.def(
        "replay",
        [](const std::vector<double>& time, const std::vector<std::string>& side, const std::vector<double>& delta,
           double q_bid, double q_ask, const std::string& rule_json, std::uint64_t seed) {
            auto ev = to_events(time, side, delta);
            auto j = parse(rule_json);
            ReinitRule rule = config::parse_rule(config::Reader(j, "rule"));
            BookState b;
            b.q_bid = q_bid;
            b.q_ask = q_ask;
            Rng rng = make_rng(seed, "python.replay");
            auto r = replay(ev, b, rule, rng);
            std::vector<double> t, qb, qa, pt;
            std::vector<std::int64_t> pp;
            for (const auto& s : r.queues.samples) {
                t.push_back(s.time);
                qb.push_back(s.q_bid);
                qa.push_back(s.q_ask);
            }
            for (const auto& s : r.prices.steps) {
                pt.push_back(s.time);
                pp.push_back(s.price_ticks);
            }
            py::dict d;
            d["time"] = t;
            d["q_bid"] = qb;
            d["q_ask"] = qa;
            d["price_time"] = pt;
            d["price_ticks"] = pp;
            d["jumps"] = r.queues.jumps.size();
            return d;
        },
        py::arg("time"), py::arg("side"), py::arg("delta"), py::arg("q_bid"), py::arg("q_ask"), py::arg("rule_json"),
        py::arg("seed") = 1);

    m.def(
        "estimate_rho",
        [](const std::vector<double>& time, const std::vector<std::string>& side, const std::vector<double>& delta,
           bool time_bucket) {
            auto s = est::FlowSample::from_events(to_events(time, side, delta));
            est::RhoOptions o;
            if (time_bucket) o.alignment = est::RhoAlignment::TimeBucket;
            auto r = est::estimate_rho(s, o);
            return py::make_tuple(r.est.value, r.est.std_error);
        },
        py::arg("time"), py::arg("side"), py::arg("delta"), py::arg("time_bucket") = false);

    m.def(
        "hill_estimator",
        [](const std::vector<double>& sizes) {
            auto h = est::hill_estimator(sizes);
            py::dict d;
            d["value"] = h.est.value;
            d["k"] = h.k;
            d["ci_low"] = h.ci_low;
            d["ci_high"] = h.ci_high;
            d["tail_index"] = h.tail_index;
            return d;
        },
        py::arg("sizes"));

    m.def("command_names", &cli::command_names);
    m.def(
        "_run_command",
        [](const std::string& command, const std::string& config_json, const std::string& out,
           std::optional<std::uint64_t> seed, std::optional<std::uint64_t> paths, std::optional<std::string> input,
           const std::string& format, unsigned threads) {
            cli::CommandOptions o;
            o.seed = seed;
            o.paths = paths;
            o.out = out;
            if (input) o.input = *input;
            o.format = report::parse_format(format);
            o.threads = threads;
            auto cfg = parse(config_json);
            std::string text;
            {
                py::gil_scoped_release release;
                text = cli::run(command, cfg, o).to_json().dump();
            }
            return text;
        },
        py::arg("command"), py::arg("config_json"), py::arg("out"), py::arg("seed") = py::none(),
        py::arg("paths") = py::none(), py::arg("input") = py::none(), py::arg("format") = "csv",
        py::arg("threads") = 0u);
}
