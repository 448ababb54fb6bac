#include "htlob/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "htlob/random.hpp"

namespace htlob::config {

Reader::Reader(Json& node, std::string path) : node_(&node), path_(std::move(path)) {
    if (!node_->is_object()) throw ConfigError(path_ + ": expected an object");
}

bool Reader::has(const std::string& key) const { return node_->contains(key); }

void Reader::fail(const std::string& key, const std::string& msg) const {
    std::string where = path_.empty() ? key : key.empty() ? path_ : path_ + "." + key;
    throw ConfigError(where + ": " + msg);
}

Json& Reader::at(const std::string& key) {
    if (!has(key)) fail(key, "missing required key");
    used_.insert(key);
    return (*node_)[key];
}

double Reader::number(const std::string& key) {
    Json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
}

double Reader::number(const std::string& key, double fallback) {
    if (!has(key)) (*node_)[key] = fallback;
    return number(key);
}

std::uint64_t Reader::uint(const std::string& key) {
    Json& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) fail(key, "must be non-negative");
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    fail(key, "expected a non-negative integer");
}

std::uint64_t Reader::uint(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) (*node_)[key] = fallback;
    return uint(key);
}

bool Reader::boolean(const std::string& key, bool fallback) {
    if (!has(key)) (*node_)[key] = fallback;
    Json& v = at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
}

std::string Reader::string(const std::string& key) {
    Json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
}

std::string Reader::string(const std::string& key, const std::string& fallback) {
    if (!has(key)) (*node_)[key] = fallback;
    return string(key);
}

std::vector<double> Reader::numbers(const std::string& key) {
    Json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

std::vector<double> Reader::numbers(const std::string& key, const std::vector<double>& fallback) {
    if (!has(key)) (*node_)[key] = fallback;
    return numbers(key);
}

Reader Reader::object(const std::string& key) {
    Json& v = at(key);
    if (!v.is_object()) fail(key, "expected an object");
    return Reader(v, path_.empty() ? key : path_ + "." + key);
}

Reader Reader::object_or_empty(const std::string& key) {
    if (!has(key)) (*node_)[key] = Json::object();
    return object(key);
}

Json& Reader::raw(const std::string& key) { return at(key); }

void Reader::finish() const {
    for (auto it = node_->begin(); it != node_->end(); ++it)
        if (!used_.count(it.key())) fail(it.key(), "unknown key");
}

Json load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config " + file.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
}

namespace {

template <class F>
auto guarded(const Reader& r, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        r.fail("", e.what());
    }
}

}  // namespace

Dist parse_dist(Reader r) {
    std::string type = r.string("type");
    std::vector<double> a;
    if (type == "constant") a = {r.number("value")};
    else if (type == "exponential") a = {r.number("mean")};
    else if (type == "gamma") a = {r.number("shape"), r.number("mean")};
    else if (type == "lognormal") a = {r.number("mu"), r.number("sigma")};
    else if (type == "pareto") a = {r.number("scale"), r.number("tail")};
    else if (type == "uniform") a = {r.number("lo"), r.number("hi")};
    else r.fail("type", "unknown distribution '" + type + "'");
    r.finish();
    return guarded(r, [&] {
        if (type == "constant") return Dist::constant(a[0]);
        if (type == "exponential") return Dist::exponential(a[0]);
        if (type == "gamma") return Dist::gamma(a[0], a[1]);
        if (type == "lognormal") return Dist::lognormal(a[0], a[1]);
        if (type == "pareto") return Dist::pareto(a[0], a[1]);
        return Dist::uniform(a[0], a[1]);
    });
}

DiffusionParams parse_params(Reader r) {
    DiffusionParams p;
    if (r.has("mu_bid") || r.has("sd_bid")) {
        double mb = r.number("mu_bid", 0.0), ma = r.number("mu_ask", 0.0);
        double sb = r.number("sd_bid"), sa = r.number("sd_ask");
        double rho = r.number("rho", 0.0);
        r.finish();
        return guarded(r, [&] { return DiffusionParams::from_moments(mb, ma, sb, sa, rho); });
    }
    p.lambda_bid = r.number("lambda_bid", 1.0);
    p.lambda_ask = r.number("lambda_ask", 1.0);
    p.vbar_bid = r.number("vbar_bid", 0.0);
    p.vbar_ask = r.number("vbar_ask", 0.0);
    p.v2_bid = r.number("v2_bid", 1.0);
    p.v2_ask = r.number("v2_ask", 1.0);
    p.rho = r.number("rho", 0.0);
    r.finish();
    guarded(r, [&] {
        p.validate();
        return 0;
    });
    return p;
}

QueuePair parse_pair(Reader r) {
    QueuePair q{r.number("bid"), r.number("ask")};
    r.finish();
    return q;
}

namespace {

PairDist parse_pair_dist(Reader r) {
    PairDist d{parse_dist(r.object("bid")), parse_dist(r.object("ask"))};
    r.finish();
    return d;
}

flow::ACDSpec parse_acd(Reader r) {
    flow::ACDSpec s;
    s.a0 = r.number("a0", 1.0);
    s.a_coeffs = r.numbers("a", {});
    s.b_coeffs = r.numbers("b", {});
    if (r.has("innovation")) s.innovation = parse_dist(r.object("innovation"));
    r.finish();
    return s;
}

flow::ArchVolumeSpec parse_arch(Reader r) {
    flow::ArchVolumeSpec s;
    s.alpha0_bid = r.number("alpha0_bid", 1.0);
    s.alpha1_bid = r.number("alpha1_bid", 0.0);
    s.alpha0_ask = r.number("alpha0_ask", 1.0);
    s.alpha1_ask = r.number("alpha1_ask", 0.0);
    s.rho_z = r.number("rho_z", 0.0);
    s.mean_bid = r.number("mean_bid", 0.0);
    s.mean_ask = r.number("mean_ask", 0.0);
    r.finish();
    return s;
}

Side parse_side(const Reader& r, const std::string& key, const std::string& v) {
    if (v == "bid" || v == "b") return Side::Bid;
    if (v == "ask" || v == "a") return Side::Ask;
    r.fail(key, "expected 'bid' or 'ask'");
}

flow::HawkesFlowSpec parse_hawkes(Reader& r) {
    Dist size = r.has("size") ? parse_dist(r.object("size")) : Dist::constant(1.0);
    if (r.has("self")) {
        double theta = r.number("theta");
        double self = r.number("self");
        double cross = r.number("cross", 0.0);
        double kappa = r.number("kappa");
        return flow::HawkesFlowSpec::symmetric(theta, self, cross, kappa, size);
    }
    flow::HawkesFlowSpec s;
    s.size_dist = size;
    Json& types = r.raw("types");
    if (!types.is_array()) r.fail("types", "expected an array");
    for (std::size_t i = 0; i < types.size(); ++i) {
        Reader t(types[i], r.path() + ".types[" + std::to_string(i) + "]");
        flow::HawkesEventType e;
        e.side = parse_side(t, "side", t.string("side"));
        e.sign = t.number("sign");
        t.finish();
        s.types.push_back(e);
    }
    s.base_rates = r.numbers("base_rates");
    s.decay = r.numbers("decay");
    Json& ex = r.raw("excitation");
    if (!ex.is_array()) r.fail("excitation", "expected a matrix");
    for (std::size_t i = 0; i < ex.size(); ++i) {
        if (!ex[i].is_array()) r.fail("excitation[" + std::to_string(i) + "]", "expected an array");
        std::vector<double> row;
        for (auto& x : ex[i]) {
            if (!x.is_number()) r.fail("excitation[" + std::to_string(i) + "]", "expected numbers");
            row.push_back(x.get<double>());
        }
        s.excitation.push_back(std::move(row));
    }
    return s;
}

}  // namespace

flow::FlowSpec parse_flow(Reader r) {
    std::string type = r.string("type");
    flow::FlowSpec out;
    if (type == "poisson") {
        flow::PoissonFlowSpec s;
        s.lambda_limit = r.number("lambda_limit", 1.0);
        s.mu_market = r.number("mu_market", 1.0);
        s.theta_cancel = r.number("theta_cancel", 1.0);
        s.unit_size = r.number("unit_size", 1.0);
        out = s;
    } else if (type == "hawkes") {
        out = parse_hawkes(r);
    } else if (type == "agent") {
        flow::AgentMixSpec s;
        s.m = r.number("m", 0.2);
        s.l = r.number("l", 0.3);
        s.gamma = r.number("gamma", 0.5);
        if (r.has("duration")) s.duration_dist = parse_dist(r.object("duration"));
        if (r.has("size")) s.size_dist = parse_dist(r.object("size"));
        s.flip_signs = r.boolean("flip_signs", false);
        out = s;
    } else if (type == "acd_arch") {
        flow::AcdArchSpec s;
        s.durations_bid = parse_acd(r.object("durations_bid"));
        s.durations_ask = parse_acd(r.object("durations_ask"));
        s.volumes = parse_arch(r.object("volumes"));
        s.shared_clock = r.boolean("shared_clock", false);
        out = s;
    } else if (type == "alternating") {
        flow::AlternatingFlowSpec s;
        s.rate = r.number("rate", 1.0);
        s.size = r.number("size", 1.0);
        out = s;
    } else {
        r.fail("type", "unknown flow '" + type + "'");
    }
    r.finish();
    guarded(r, [&] {
        std::visit([](const auto& s) { s.validate(); }, out);
        return 0;
    });
    return out;
}

ReinitRule parse_rule(Reader r) {
    std::string type = r.string("type");
    ReinitRule rule;
    if (type == "fixed") {
        double qb = r.number("bid");
        rule = ReinitRule::fixed({qb, r.number("ask")});
    } else if (type == "iid") {
        PairDist up = parse_pair_dist(r.object("up"));
        PairDist down = parse_pair_dist(r.object("down"));
        rule = ReinitRule::iid(up, down);
    } else if (type == "pegged") {
        PairDist up = parse_pair_dist(r.object("up"));
        PairDist down = parse_pair_dist(r.object("down"));
        double bb = r.number("beta_bid", 0.0);
        double ba = r.number("beta_ask", 0.0);
        rule = guarded(r, [&] { return ReinitRule::pegged(up, down, bb, ba); });
    } else {
        r.fail("type", "unknown reinitialization rule '" + type + "'");
    }
    r.finish();
    guarded(r, [&] {
        rule.validate();
        return 0;
    });
    return rule;
}

std::string config_hash(const Json& resolved) {
    std::uint64_t h = stream_key(resolved.dump());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace htlob::config
