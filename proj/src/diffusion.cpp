#include "htlob/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "htlob/parallel.hpp"
#include "htlob/stats.hpp"

namespace htlob::diffusion {

namespace {

enum Hit : int { None = -1, AskHit = 0, BidHit = 1 };

struct Move {
    double b = 0, a = 0;
    int hit = None;
    double frac = 1.0;  // fraction of the step at which the hit happens
};

// Bivariate Brownian motion with drift, bid first, plus the bridge crossing machinery.
class Engine {
public:
    explicit Engine(const DiffusionParams& p)
        : mb_(p.drift_bid()), ma_(p.drift_ask()), sb_(p.sigma_bid()), sa_(p.sigma_ask()), rho_(p.rho),
          rs_(std::sqrt(1 - p.rho * p.rho)) {}

    double natural_step(double b, double a, double kappa) const {
        const double zb = b / sb_, za = a / sa_;
        return kappa * std::max(zb * zb, za * za);
    }

    double drift_bid() const { return mb_; }
    double drift_ask() const { return ma_; }

    Move move(double b, double a, double h, Rng& rng) {
        const double sh = std::sqrt(h);
        const double z1 = nd_(rng), z2 = nd_(rng);
        return move_with(b, a, h, sh * z1, sh * (rho_ * z1 + rs_ * z2), rng);
    }

    // eb, ea: standardized-noise increments already scaled by sqrt(h) (unit variance per unit time).
    Move move_with(double b, double a, double h, double eb, double ea, Rng& rng) {
        Move m;
        m.b = b + mb_ * h + sb_ * eb;
        m.a = a + ma_ * h + sa_ * ea;
        const bool cross_a = crosses(a, m.a, sa_, h, rng);
        const bool cross_b = crosses(b, m.b, sb_, h, rng);
        if (!cross_a && !cross_b) return m;
        const double fa = cross_a ? crossing_fraction(a, m.a, sa_, h, rng) : 2.0;
        const double fb = cross_b ? crossing_fraction(b, m.b, sb_, h, rng) : 2.0;
        if (fa <= fb) {
            m.hit = AskHit;
            m.frac = fa;
        } else {
            m.hit = BidHit;
            m.frac = fb;
        }
        return m;
    }

private:
    // Brownian bridge from x0 > 0 to x1 over a step of length h: P[min <= 0] = exp(-2 x0 x1 / (s^2 h)).
    bool crosses(double x0, double x1, double s, double h, Rng& rng) const {
        if (x1 <= 0) return true;
        const double e = -2 * x0 * x1 / (s * s * h);
        if (e < -745) return false;
        return uniform_open(rng) < std::exp(e);
    }

    // First zero of the bridge, as a fraction of the step. With a = x0/s and c = |x1|/s,
    // v = T/(h - T) is inverse Gaussian with mean a/c and shape a^2/h.
    double crossing_fraction(double x0, double x1, double s, double h, Rng& rng) {
        const double ap = x0 / s, cp = std::abs(x1) / s;
        const double shape = ap * ap / h;
        double v;
        const double z = nd_(rng);
        if (cp == 0) {
            v = shape / (z * z);
        } else {
            const double mean = ap / cp;
            const double q = mean * z * z;
            const double root = std::sqrt(q * (4 * shape + q));
            const double x = 2 * shape * mean / (2 * shape + q + root);
            v = uniform_open(rng) * (mean + x) <= mean ? x : mean * mean / x;
        }
        if (!std::isfinite(v)) return 1.0;
        return v / (1 + v);
    }

    double mb_, ma_, sb_, sa_, rho_, rs_;
    std::normal_distribution<double> nd_;
};

void require_interior(const QueuePair& q) {
    if (!(q.bid > 0) || !(q.ask > 0) || !std::isfinite(q.bid) || !std::isfinite(q.ask))
        throw InvalidInput("initial state must lie strictly inside the orthant");
}

JumpSide side_of(int hit) { return hit == AskHit ? JumpSide::AskDepleted : JumpSide::BidDepleted; }

QueuePair pre_jump(const Move& m, double b0, double a0) {
    // Value of the surviving coordinate at the hit, taken on the chord of the step.
    if (m.hit == AskHit) return {std::max(0.0, b0 + m.frac * (m.b - b0)), 0.0};
    return {0.0, std::max(0.0, a0 + m.frac * (m.a - a0))};
}

FirstHit run_first_hit(Engine& eng, const QueuePair& init, Rng& rng, double horizon, const StepControl& ctl) {
    double b = init.bid, a = init.ask, t = 0;
    FirstHit out;
    for (std::size_t k = 0; k < ctl.max_steps; ++k) {
        double h = std::max(eng.natural_step(b, a, ctl.kappa), ctl.min_step);
        bool last = false;
        if (t + h >= horizon) {
            h = horizon - t;
            last = true;
        }
        Move m = eng.move(b, a, h, rng);
        out.steps = k + 1;
        if (m.hit != None) {
            out.side = side_of(m.hit);
            out.time = t + m.frac * h;
            if (out.time > horizon) out.time = horizon;
            return out;
        }
        b = m.b;
        a = m.a;
        t += h;
        if (last) {
            out.censored = true;
            out.time = horizon;
            return out;
        }
    }
    throw NumericalError("first_hit: exceeded max_steps without leaving the orthant");
}

// Advance with reinitialization over `dt`, starting at (b, a); returns jumps via callback.
template <class OnJump>
void advance(Engine& eng, const ReinitRule& rule, double& b, double& a, double t0, double dt, Rng& rng,
             const StepControl* ctl, OnJump&& on_jump) {
    double t = t0;
    double rem = dt;
    std::size_t guard = 0;
    while (rem > 0) {
        double h = rem;
        if (ctl) h = std::min(rem, std::max(eng.natural_step(b, a, ctl->kappa), ctl->min_step));
        Move m = eng.move(b, a, h, rng);
        if (m.hit == None) {
            b = m.b;
            a = m.a;
            t += h;
            rem -= h;
            if (rem < 1e-15 * dt) rem = 0;
        } else {
            const double tau = m.frac * h;
            JumpRecord j;
            j.time = t + tau;
            j.side = side_of(m.hit);
            j.pre = pre_jump(m, b, a);
            j.post = rule.draw(j.side, j.pre, rng);
            on_jump(j);
            b = j.post.bid;
            a = j.post.ask;
            t += tau;
            rem -= tau;
            if (rem < 1e-15 * dt) rem = 0;
        }
        if (++guard > 100'000'000) throw NumericalError("simulate_Q: step budget exhausted");
    }
}

}  // namespace

FirstHit first_hit(const DiffusionParams& p, const QueuePair& initial, Rng& rng, double horizon,
                   const StepControl& ctl) {
    p.validate();
    require_interior(initial);
    if (!(horizon > 0)) throw InvalidInput("first_hit: horizon must be positive");
    Engine eng(p);
    return run_first_hit(eng, initial, rng, horizon, ctl);
}

FirstHit first_hit(const DiffusionParams& p, const QueuePair& initial, std::uint64_t seed) {
    Rng rng = make_rng(seed, "first_hit");
    return first_hit(p, initial, rng);
}

ExitStatistics exit_statistics(const DiffusionParams& p, const QueuePair& initial, const McOptions& opt) {
    p.validate();
    require_interior(initial);
    if (opt.paths == 0) throw InvalidInput("exit_statistics: need at least one path");
    if (!std::is_sorted(opt.survival_grid.begin(), opt.survival_grid.end()))
        throw InvalidInput("exit_statistics: survival grid must be sorted");
    double horizon = opt.horizon;
    if (!opt.survival_grid.empty()) {
        if (std::isinf(horizon)) horizon = opt.survival_grid.back();
        if (opt.survival_grid.back() > horizon)
            throw InvalidInput("exit_statistics: survival grid extends past the horizon");
    }
    const std::size_t batch = std::max<std::size_t>(opt.batch, 1);
    const std::size_t nb = (opt.paths + batch - 1) / batch;
    const std::size_t g = opt.survival_grid.size();

    struct Partial {
        std::size_t ask = 0, bid = 0, cens = 0, steps = 0;
        std::vector<std::size_t> bucket;
        std::vector<double> times;
    };
    std::vector<Partial> parts(nb);
    parallel_for(
        nb,
        [&](std::size_t bi) {
            Rng rng = make_rng(opt.seed, "first_hit", bi);
            Engine eng(p);
            Partial& pt = parts[bi];
            pt.bucket.assign(g + 1, 0);
            const std::size_t lo = bi * batch, hi = std::min(opt.paths, lo + batch);
            if (opt.keep_times) pt.times.reserve(hi - lo);
            for (std::size_t i = lo; i < hi; ++i) {
                FirstHit fh = run_first_hit(eng, initial, rng, horizon, opt.step);
                pt.steps += fh.steps;
                if (fh.censored)
                    ++pt.cens;
                else if (fh.side == JumpSide::AskDepleted)
                    ++pt.ask;
                else
                    ++pt.bid;
                if (g) {
                    std::size_t idx = fh.censored ? g
                                                  : static_cast<std::size_t>(
                                                        std::lower_bound(opt.survival_grid.begin(),
                                                                         opt.survival_grid.end(), fh.time) -
                                                        opt.survival_grid.begin());
                    ++pt.bucket[idx];
                }
                if (opt.keep_times) pt.times.push_back(fh.time);
            }
        },
        opt.threads);

    ExitStatistics st;
    st.paths = opt.paths;
    std::vector<std::size_t> bucket(g + 1, 0);
    std::size_t steps = 0;
    for (auto& pt : parts) {
        st.ask_first += pt.ask;
        st.bid_first += pt.bid;
        st.censored += pt.cens;
        steps += pt.steps;
        for (std::size_t j = 0; j <= g; ++j) bucket[j] += pt.bucket[j];
        if (opt.keep_times) st.times.insert(st.times.end(), pt.times.begin(), pt.times.end());
    }
    const double n = static_cast<double>(opt.paths);
    st.p_ask = st.ask_first / n;
    st.p_ask_se = std::sqrt(st.p_ask * (1 - st.p_ask) / n);
    st.mean_steps = steps / n;
    st.grid = opt.survival_grid;
    st.survival.resize(g);
    st.survival_se.resize(g);
    std::size_t above = 0;
    for (std::size_t j = g; j-- > 0;) {
        above += bucket[j + 1];
        const double s = above / n;
        st.survival[j] = s;
        st.survival_se[j] = std::sqrt(s * (1 - s) / n);
    }
    return st;
}

RegulatedPath simulate_Q(const DiffusionParams& p, const ReinitRule& rule, const QueuePair& initial, double horizon,
                         double step, std::uint64_t seed) {
    p.validate();
    rule.validate();
    require_interior(initial);
    if (!(horizon >= 0) || !std::isfinite(horizon)) throw InvalidInput("simulate_Q: horizon must be non-negative");
    if (step == 0) step = horizon / 65536.0;
    RegulatedPath out;
    out.samples.push_back({0.0, initial.bid, initial.ask});
    if (horizon == 0) return out;
    if (!(step > 0)) throw InvalidInput("simulate_Q: step must be positive");
    Rng rng = make_rng(seed, "simulate_q");
    Engine eng(p);
    double b = initial.bid, a = initial.ask;
    const auto nsteps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
    out.samples.reserve(nsteps + 1);
    for (std::size_t k = 0; k < nsteps; ++k) {
        const double t0 = k * step;
        const double t1 = std::min(horizon, (k + 1) * step);
        advance(eng, rule, b, a, t0, t1 - t0, rng, nullptr, [&](const JumpRecord& j) { out.jumps.push_back(j); });
        out.samples.push_back({t1, b, a});
    }
    return out;
}

TerminalState simulate_Q_terminal(const DiffusionParams& p, const ReinitRule& rule, const QueuePair& initial,
                                  double horizon, Rng& rng, const StepControl& ctl) {
    p.validate();
    require_interior(initial);
    Engine eng(p);
    TerminalState ts;
    double b = initial.bid, a = initial.ask;
    advance(eng, rule, b, a, 0.0, horizon, rng, &ctl, [&](const JumpRecord&) { ++ts.jumps; });
    ts.q = {b, a};
    return ts;
}

std::vector<PathSample> rescale_discrete(std::span<const PathSample> path, double n) {
    if (!(n >= 1)) throw InvalidInput("rescale_discrete: n must be at least 1");
    const double s = std::sqrt(n);
    std::vector<PathSample> out;
    out.reserve(path.size());
    for (const auto& p : path) out.push_back({p.time / n, p.q_bid / s, p.q_ask / s});
    return out;
}

double generator_apply(const TestFunction& f, double x, double y, const DiffusionParams& p, GeneratorConvention conv) {
    p.validate();
    if (!(x > 0) || !(y > 0)) throw InvalidInput("generator_apply: point must lie inside the orthant");
    const Cov2 c = p.cov();
    const double cross = conv == GeneratorConvention::Ito ? c.ba : 2 * c.ba;
    return p.drift_bid() * f.hx(x, y) + p.drift_ask() * f.hy(x, y) + 0.5 * c.bb * f.hxx(x, y) +
           0.5 * c.aa * f.hyy(x, y) + cross * f.hxy(x, y);
}

WeakCheck weak_generator_check(const TestFunction& f, double x, double y, const DiffusionParams& p, double t,
                               std::size_t pairs, std::uint64_t seed, const ReinitRule& rule) {
    p.validate();
    if (!(t > 0)) throw InvalidInput("weak_generator_check: t must be positive");
    if (pairs < 2) throw InvalidInput("weak_generator_check: need at least two pairs");
    const double h0 = f.h(x, y), gx = f.hx(x, y), gy = f.hy(x, y);
    const double hxx = f.hxx(x, y), hyy = f.hyy(x, y), hxy = f.hxy(x, y);
    const double mb = p.drift_bid(), ma = p.drift_ask();
    const double gen = generator_apply(f, x, y, p);
    auto taylor = [&](double db, double da) {
        return h0 + gx * db + gy * da + 0.5 * (hxx * db * db + 2 * hxy * db * da + hyy * da * da);
    };
    const double taylor_mean = h0 + t * gen + 0.5 * t * t * (hxx * mb * mb + 2 * hxy * mb * ma + hyy * ma * ma);

    const std::size_t batch = 1 << 14;
    const std::size_t nb = (pairs + batch - 1) / batch;
    std::vector<std::array<double, 2>> acc(nb, {0.0, 0.0});
    const double sh = std::sqrt(t), rs = std::sqrt(1 - p.rho * p.rho);
    parallel_for(nb, [&](std::size_t bi) {
        Rng rng = make_rng(seed, "weak_generator", bi);
        Engine eng(p);
        std::normal_distribution<double> nd;
        const std::size_t lo = bi * batch, hi = std::min(pairs, lo + batch);
        double s1 = 0, s2 = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double z1 = nd(rng), z2 = nd(rng);
            double d = 0;
            for (int sgn : {1, -1}) {
                const double eb = sgn * sh * z1, ea = sgn * sh * (p.rho * z1 + rs * z2);
                Move m = eng.move_with(x, y, t, eb, ea, rng);
                double qb = m.b, qa = m.a;
                if (m.hit != None) {
                    JumpRecord j;
                    j.side = side_of(m.hit);
                    QueuePair post = rule.draw(j.side, pre_jump(m, x, y), rng);
                    TerminalState ts = simulate_Q_terminal(p, rule, post, (1 - m.frac) * t, rng);
                    qb = ts.q.bid;
                    qa = ts.q.ask;
                }
                d += 0.5 * (f.h(qb, qa) - taylor(m.b - x, m.a - y));
            }
            s1 += d;
            s2 += d * d;
        }
        acc[bi] = {s1, s2};
    });
    double s1 = 0, s2 = 0;
    for (auto& v : acc) {
        s1 += v[0];
        s2 += v[1];
    }
    const double n = static_cast<double>(pairs);
    const double md = s1 / n;
    const double vd = std::max(0.0, (s2 - n * md * md) / (n - 1));
    WeakCheck w;
    w.t = t;
    w.pairs = pairs;
    w.generator = gen;
    w.estimate = (md + taylor_mean - h0) / t;
    w.std_error = std::sqrt(vd / n) / t;
    w.error = w.estimate - gen;
    return w;
}

DiffusionParams params_from_moments(const flow::FlowMoments& m) {
    DiffusionParams p;
    p.vbar_bid = m.mean[0];
    p.vbar_ask = m.mean[1];
    p.v2_bid = m.cov[0][0];
    p.v2_ask = m.cov[1][1];
    p.rho = m.cov[0][1] / std::sqrt(m.cov[0][0] * m.cov[1][1]);
    p.validate();
    return p;
}

namespace {

std::uint64_t sub_seed(std::uint64_t seed, const char* name, std::uint64_t a, std::uint64_t b) {
    Rng r = make_rng(seed, stream_key(name) ^ (a * 0x9e3779b97f4a7c15ULL), b);
    return r();
}

}  // namespace

FcltReport net_flow_fclt_check(const flow::FlowSpec& spec, std::span<const double> ladder, const FcltOptions& opt) {
    auto mom = flow::net_flow_moments(spec);
    if (!mom) throw InvalidInput("fclt check: flow has no closed-form long-run moments");
    if (opt.replications < 2 || opt.horizon < 1) throw InvalidInput("fclt check: need replications >= 2, horizon >= 1");
    FcltReport rep;
    rep.flow = flow::flow_name(spec);
    rep.seed = opt.seed;
    rep.target_mean = mom->mean;
    rep.target_cov = {mom->cov[0][0], mom->cov[0][1], mom->cov[1][1]};
    rep.degenerate = !(rep.target_cov.bb > 1e-12) || !(rep.target_cov.aa > 1e-12);
    const std::size_t H = opt.horizon, R = opt.replications;

    for (std::size_t li = 0; li < ladder.size(); ++li) {
        const double n = ladder[li];
        if (!(n >= 1)) throw InvalidInput("fclt check: ladder entries must be >= 1");
        const double sn = std::sqrt(n);
        // incr[r][k] = centered rescaled increment over unit time k of replication r.
        std::vector<double> ib(R * H), ia(R * H);
        std::vector<double> counts(R);
        parallel_for(
            R,
            [&](std::size_t r) {
                auto ev = flow::generate(spec, n * static_cast<double>(H), sub_seed(opt.seed, "fclt", li, r));
                counts[r] = static_cast<double>(ev.size());
                double sb = 0, sa = 0, pb = 0, pa = 0;
                std::size_t e = 0;
                for (std::size_t k = 1; k <= H; ++k) {
                    const double edge = n * static_cast<double>(k);
                    while (e < ev.size() && ev[e].time <= edge) {
                        (ev[e].side == Side::Bid ? sb : sa) += ev[e].delta;
                        ++e;
                    }
                    ib[r * H + k - 1] = (sb - pb) / sn - sn * mom->mean[0];
                    ia[r * H + k - 1] = (sa - pa) / sn - sn * mom->mean[1];
                    pb = sb;
                    pa = sa;
                }
            },
            opt.threads);

        FcltLevel lv;
        lv.n = n;
        lv.replications = R;
        lv.samples = R * H;
        lv.mean_events = stats::mean(counts);
        if (!rep.degenerate) {
            lv.ks = {stats::ks_normal(ib, 0.0, std::sqrt(rep.target_cov.bb)),
                     stats::ks_normal(ia, 0.0, std::sqrt(rep.target_cov.aa))};
            std::vector<double> tb(R), ta(R);
            for (std::size_t r = 0; r < R; ++r) {
                tb[r] = ib[r * H];
                ta[r] = ia[r * H];
            }
            lv.ks_terminal = {stats::ks_normal(tb, 0.0, std::sqrt(rep.target_cov.bb)),
                              stats::ks_normal(ta, 0.0, std::sqrt(rep.target_cov.aa))};
        }
        lv.ks_critical = stats::ks_critical_one_sample(R * H);
        lv.ks_terminal_critical = stats::ks_critical_one_sample(R);
        // Covariance around the known limit mean (zero after centering).
        double cbb = 0, cba = 0, caa = 0;
        for (std::size_t i = 0; i < R * H; ++i) {
            cbb += ib[i] * ib[i];
            cba += ib[i] * ia[i];
            caa += ia[i] * ia[i];
        }
        const double m = static_cast<double>(R * H);
        lv.sample_cov = {cbb / m, cba / m, caa / m};
        const auto& tc = rep.target_cov;
        const double num = std::sqrt(std::pow(lv.sample_cov.bb - tc.bb, 2) + 2 * std::pow(lv.sample_cov.ba - tc.ba, 2) +
                                     std::pow(lv.sample_cov.aa - tc.aa, 2));
        const double den = std::sqrt(tc.bb * tc.bb + 2 * tc.ba * tc.ba + tc.aa * tc.aa);
        lv.cov_rel_error = den > 0 ? num / den : INFINITY;
        lv.corr = lv.sample_cov.bb > 0 && lv.sample_cov.aa > 0 ? lv.sample_cov.corr() : 0.0;
        rep.levels.push_back(lv);
    }
    return rep;
}

QueueLimitCheck queue_limit_check(const flow::FlowSpec& spec, const ReinitRule& limit_rule, const QueuePair& initial,
                                  double n, double horizon, std::size_t replications, std::uint64_t seed,
                                  unsigned threads) {
    auto mom = flow::net_flow_moments(spec);
    if (!mom) throw InvalidInput("queue limit check: flow has no closed-form long-run moments");
    require_interior(initial);
    if (!(n >= 1) || !(horizon > 0) || replications < 2) throw InvalidInput("queue limit check: bad arguments");
    const double sn = std::sqrt(n);
    flow::FlowMoments scaled = *mom;
    scaled.mean = {mom->mean[0] * sn, mom->mean[1] * sn};
    const DiffusionParams lp = params_from_moments(scaled);
    const ReinitRule raw_rule = limit_rule.scaled(sn);

    std::vector<double> db(replications), da(replications), lb(replications), la(replications);
    parallel_for(
        replications,
        [&](std::size_t r) {
            auto ev = flow::generate(spec, n * horizon, sub_seed(seed, "queue_limit.flow", 0, r));
            Rng rr = make_rng(seed, "queue_limit.reinit", r);
            BookState b{0, 1.0, initial.bid * sn, initial.ask * sn, 0.0};
            auto res = replay(ev, b, raw_rule, rr);
            db[r] = res.final_book.q_bid / sn;
            da[r] = res.final_book.q_ask / sn;
            Rng rl = make_rng(seed, "queue_limit.limit", r);
            auto ts = simulate_Q_terminal(lp, limit_rule, initial, horizon, rl);
            lb[r] = ts.q.bid;
            la[r] = ts.q.ask;
        },
        threads);
    QueueLimitCheck out;
    out.n = n;
    out.horizon = horizon;
    out.replications = replications;
    out.mean_discrete = {stats::mean(db), stats::mean(da)};
    out.mean_limit = {stats::mean(lb), stats::mean(la)};
    out.ks = {stats::ks_two_sample(db, lb), stats::ks_two_sample(da, la)};
    out.ks_critical = stats::ks_critical_two_sample(replications, replications);
    return out;
}

}  // namespace htlob::diffusion
