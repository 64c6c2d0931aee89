#include "steadystein/sweeps.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "steadystein/birth_death.hpp"
#include "steadystein/des.hpp"
#include "steadystein/density.hpp"
#include "steadystein/metrics.hpp"
#include "steadystein/stein.hpp"

namespace steadystein {

using nlohmann::json;

std::vector<SweepPoint> erlang_c_grid(size_t min_points) {
    const std::vector<long> ns = {2, 3, 5, 8, 12, 20, 35, 60, 100, 180, 320, 560, 1000};
    const std::vector<double> rhos = {0.2,  0.3,  0.4,  0.45, 0.5,  0.55, 0.6,  0.65, 0.7,
                                      0.75, 0.8,  0.85, 0.9,  0.95, 0.98, 0.99, 0.995, 0.999};
    std::vector<SweepPoint> pts;
    for (long n : ns)
        for (double rho : rhos) {
            const double R = rho * static_cast<double>(n);
            if (R < 1.0 || R >= static_cast<double>(n)) continue;
            pts.push_back({R, 1.0, 0.0, n});
        }
    if (pts.size() < min_points)
        throw std::logic_error("erlang_c_grid: fewer points than requested");
    return pts;
}

std::vector<SweepPoint> erlang_c_small_grid(size_t min_points) {
    const std::vector<long> ns = {2, 5, 12, 35, 100, 320, 1000};
    const std::vector<double> rhos = {0.25, 0.4, 0.55, 0.7, 0.8, 0.88, 0.93, 0.96,
                                      0.98, 0.99, 0.995, 0.998, 0.9995, 0.75, 0.65, 0.35};
    std::vector<SweepPoint> pts;
    for (long n : ns)
        for (double rho : rhos) {
            const double R = rho * static_cast<double>(n);
            if (R < 1.0 || R >= static_cast<double>(n)) continue;
            pts.push_back({R, 1.0, 0.0, n});
        }
    if (pts.size() < min_points)
        throw std::logic_error("erlang_c_small_grid: fewer points than requested");
    return pts;
}

std::vector<SweepPoint> erlang_a_grid(size_t min_points) {
    const std::vector<long> ns = {3, 8, 20, 50, 120, 400};
    const std::vector<double> rhos = {0.4, 0.6, 0.8, 0.95, 1.0, 1.05, 1.2, 1.5, 2.0};
    const std::vector<double> ams = {0.5, 1.0, 2.0}; // alpha/mu
    std::vector<SweepPoint> pts;
    for (long n : ns)
        for (double rho : rhos)
            for (double am : ams) {
                const double R = rho * static_cast<double>(n);
                if (R < 1.0) continue;
                pts.push_back({R, 1.0, am, n});
            }
    if (pts.size() < min_points)
        throw std::logic_error("erlang_a_grid: fewer points than requested");
    return pts;
}

void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& fn) {
    if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (jobs == 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            size_t i;
            while ((i = next.fetch_add(1)) < count) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

namespace {

json point_json(const SweepPoint& p) {
    return json{{"lambda", p.lambda}, {"mu", p.mu}, {"n", p.n}, {"alpha", p.alpha}};
}

} // namespace

SuiteResult verify_bar(int jobs) {
    SuiteResult res;
    res.name = "bar";
    // The identity's double-precision floor is ~ eps * lambda * delta * E[X^2];
    // past rho ~ 0.99 at n = 1000 that floor crosses the 1e-8 gate, so the
    // bar grid stays below it (the theorem/moment sweeps keep the full range).
    std::vector<SweepPoint> pts;
    for (const SweepPoint& p : erlang_c_small_grid(40))
        if (p.lambda / static_cast<double>(p.n) <= 0.99) pts.push_back(p);
    for (const SweepPoint& p : erlang_a_grid(40)) pts.push_back(p);
    std::vector<std::string> rows(pts.size());
    std::atomic<bool> ok{true};
    parallel_for(pts.size(), jobs, [&](size_t i) {
        const SweepPoint& p = pts[i];
        QueueParams qp(p.lambda, p.mu, p.n, p.alpha);
        // deep truncation keeps the cubic's boundary term below the gate
        LatticeDist lat = LatticeDist::stationary(qp, 1e-20);
        json row = point_json(p);
        double worst = 0.0;
        for (long m = 1; m <= 3; ++m) {
            const double r = std::abs(bar_residual_monomial(lat, m));
            row["bar_x" + std::to_string(m)] = r;
            worst = std::max(worst, r);
        }
        row["pass"] = worst < 1e-8;
        if (worst >= 1e-8) ok = false;
        rows[i] = row.dump();
    });
    res.rows = std::move(rows);
    res.passed = ok;
    res.summary = res.passed ? "bar residuals < 1e-8 on all points" : "bar residual violation";
    return res;
}

SuiteResult verify_moment_bounds(int jobs) {
    SuiteResult res;
    res.name = "moments";
    auto cs = erlang_c_small_grid(100);
    auto as = erlang_a_grid(100);
    std::vector<std::string> rows(cs.size() + as.size());
    std::atomic<bool> ok{true};

    parallel_for(cs.size(), jobs, [&](size_t i) {
        const SweepPoint& p = cs[i];
        QueueParams qp(p.lambda, p.mu, p.n, 0.0);
        LatticeDist lat = LatticeDist::stationary(qp);
        const double d = qp.delta(), az = qp.abs_zeta();
        json row = point_json(p);
        bool pass = true;
        auto check = [&](const char* tag, double val, double bound) {
            row[tag] = json{{"value", val}, {"bound", bound}};
            if (!(val <= bound + 1e-12)) pass = false;
        };
        check("xsq_left", lat.indicator_abs_moment(2, true), 4.0 / 3.0 + 2.0 * d * d / 3.0);
        check("xabs_left_o1", lat.indicator_abs_moment(1, true),
              std::sqrt(4.0 / 3.0 + 2.0 * d * d / 3.0));
        check("xabs_left_zeta", lat.indicator_abs_moment(1, true), 2.0 * az);
        check("xabs_right", lat.indicator_abs_moment(1, false),
              1.0 / az + d * d / (4.0 * az) + d / 2.0);
        check("idle_prob", lat.prob_left_of_minus_zeta(), (2.0 + d) * az);
        // idle-server identity: E|(Xtilde+zeta) 1(Xtilde <= -zeta)| = |zeta|
        const double idle = lat.indicator_shift_moment(1, true);
        row["idle_identity_err"] = std::abs(idle - az);
        if (std::abs(idle - az) > 1e-9) pass = false;
        row["pass"] = pass;
        if (!pass) ok = false;
        rows[i] = row.dump();
    });

    parallel_for(as.size(), jobs, [&](size_t i) {
        const SweepPoint& p = as[i];
        QueueParams qp(p.lambda, p.mu, p.n, p.alpha);
        LatticeDist lat = LatticeDist::stationary(qp);
        const double d = qp.delta(), az = qp.abs_zeta();
        const double mu = p.mu, al = p.alpha;
        const double am = al / mu, ma = mu / al;
        json row = point_json(p);
        bool pass = true;
        auto check = [&](const char* tag, double val, double bound) {
            row[tag] = json{{"value", val}, {"bound", bound}};
            if (!(val <= bound + 1e-12)) pass = false;
        };
        if (qp.offered_load() <= static_cast<double>(p.n)) {
            const double b1 = (am * d * d + d * d + 4.0) / 3.0;
            const double b2 = (ma * d * d + 4.0 * ma + d * d) / 3.0;
            check("u_xsq_left", lat.indicator_abs_moment(2, true), b1);
            check("u_xabs_left_o1", lat.indicator_abs_moment(1, true), std::sqrt(b1));
            check("u_xabs_left_zeta", lat.indicator_abs_moment(1, true),
                  2.0 * az + am * std::sqrt(b2));
            check("u_xabs_right", lat.indicator_abs_moment(1, false),
                  (1.0 + d * d / 4.0 + 0.5 * d * std::sqrt(b1)) *
                      std::min(mu / std::min(mu, al), 1.0 / az));
            check("u_shift_sq_right", lat.indicator_shift_moment(2, false), b2);
            check("u_shift_right_o1", lat.indicator_shift_moment(1, false), std::sqrt(b2));
            check("u_shift_right_zeta", lat.indicator_shift_moment(1, false),
                  (d * d * am / 4.0 + d * d / 4.0 + 1.0) / az);
            check("u_idle_prob", lat.prob_left_of_minus_zeta(),
                  (2.0 + d) * (az + am * std::sqrt(b2)));
        } else {
            check("o_xabs_left_o1", lat.indicator_abs_moment(1, true),
                  std::sqrt((al * d * d / 4.0 + mu) / std::min(al, mu)));
            check("o_xabs_left_zeta", lat.indicator_abs_moment(1, true),
                  (d * d / 4.0 + ma) / az);
            check("o_xsq_right", lat.indicator_abs_moment(2, false),
                  (d * d + 4.0 * ma) / 3.0);
            check("o_xabs_right", lat.indicator_abs_moment(1, false),
                  std::sqrt((d * d + 4.0 * ma) / 3.0));
            check("o_shift_left_zeta", lat.indicator_shift_moment(1, true),
                  (d * d / 4.0 + 1.0) / az);
            check("o_shift_sq_left", lat.indicator_shift_moment(2, true),
                  d * d * am / 4.0 + 1.0);
            check("o_shift_left_o1", lat.indicator_shift_moment(1, true),
                  std::sqrt(d * d * am / 4.0 + 1.0));
            check("o_shift_left_am", lat.indicator_shift_moment(1, true),
                  am * std::sqrt((d * d + 4.0 * ma) / 3.0));
            check("o_idle_prob", lat.prob_left_of_minus_zeta(),
                  (3.0 + d) * (16.0 / std::sqrt(2.0)) * (d * d / 4.0 + 1.0) *
                      std::min(std::max(1.0 / qp.zeta(), am), std::sqrt(am)));
        }
        row["pass"] = pass;
        if (!pass) ok = false;
        rows[cs.size() + i] = row.dump();
    });

    res.rows = std::move(rows);
    res.passed = ok;
    res.summary = res.passed ? "all moment-bound inequalities hold" : "moment-bound violation";
    return res;
}

SuiteResult verify_gradient_bounds(int jobs) {
    SuiteResult res;
    res.name = "gradients";
    struct Item {
        SweepPoint p;
        GradientSuite suite;
    };
    std::vector<Item> items;
    for (const SweepPoint& p :
         {SweepPoint{4, 1, 0, 5}, SweepPoint{3, 1, 0, 5}, SweepPoint{17, 1, 0, 20},
          SweepPoint{55, 1, 0, 60}, SweepPoint{96, 1, 0, 100}, SweepPoint{99, 1, 0, 100},
          SweepPoint{310, 1, 0, 320}, SweepPoint{2, 1, 0, 8}}) {
        items.push_back({p, GradientSuite::WassersteinC});
        items.push_back({p, GradientSuite::KolmogorovC});
    }
    for (double am : {0.5, 1.0, 2.0})
        for (const SweepPoint& base :
             {SweepPoint{16, 1, 0, 20}, SweepPoint{26, 1, 0, 20}, SweepPoint{90, 1, 0, 100},
              SweepPoint{130, 1, 0, 100}}) {
            SweepPoint p = base;
            p.alpha = am;
            items.push_back({p, GradientSuite::KolmogorovA});
            items.push_back({p, GradientSuite::WassersteinA});
        }
    std::vector<std::string> rows(items.size());
    std::atomic<bool> ok{true};
    parallel_for(items.size(), jobs, [&](size_t i) {
        QueueParams qp(items[i].p.lambda, items[i].p.mu, items[i].p.n, items[i].p.alpha);
        GradientBoundReport rep = check_gradient_bounds(qp, items[i].suite);
        json row = point_json(items[i].p);
        row["suite"] = rep.suite;
        row["pass"] = rep.passed;
        row["max_slack"] = rep.max_slack;
        row["worst_item"] = rep.worst_item;
        row["max_ode_residual"] = rep.max_ode_residual;
        if (!rep.empirical_constants.empty()) {
            json ec;
            for (auto& [k, v] : rep.empirical_constants) ec[k] = v;
            row["empirical_constants"] = ec;
        }
        if (!rep.passed || rep.max_ode_residual >= 1e-7) ok = false;
        rows[i] = row.dump();
    });
    res.rows = std::move(rows);
    res.passed = ok;
    res.summary = res.passed ? "gradient bounds hold; ODE residual < 1e-7"
                             : "gradient-bound or residual violation";
    return res;
}

SuiteResult verify_mgf(int jobs) {
    SuiteResult res;
    res.name = "mgf";
    std::vector<SweepPoint> pts;
    for (long n : {10L, 50L, 200L, 1000L})
        for (double rho : {0.5, 0.7, 0.9, 0.97, 0.99})
            pts.push_back({rho * static_cast<double>(n), 1.0, 0.0, n});
    std::vector<std::string> rows(pts.size());
    std::atomic<bool> ok{true};
    std::vector<double> c1s(pts.size()), c2s(pts.size());
    parallel_for(pts.size(), jobs, [&](size_t i) {
        QueueParams qp(pts[i].lambda, pts[i].mu, pts[i].n, 0.0);
        LatticeDist lat = LatticeDist::stationary(qp);
        const double r = 2.0 * qp.abs_zeta() / (2.0 + qp.delta() * qp.abs_zeta());
        MgfBoundReport rep = check_mgf_bound(lat, 2.0 / r);
        json row = point_json(pts[i]);
        row["gamma"] = rep.gamma;
        row["c_tilted"] = rep.c_tilted;
        row["c_full"] = rep.c_full;
        c1s[i] = rep.c_tilted;
        c2s[i] = rep.c_full;
        if (!std::isfinite(rep.c_tilted) || !std::isfinite(rep.c_full)) ok = false;
        rows[i] = row.dump();
    });
    double c1 = 0, c2 = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        c1 = std::max(c1, c1s[i]);
        c2 = std::max(c2, c2s[i]);
    }
    res.rows = std::move(rows);
    res.passed = ok && c1 < 50.0 && c2 < 50.0; // empirical constants stay O(1)
    std::ostringstream os;
    os << "sweep-max empirical constants: tilted " << c1 << ", full " << c2;
    res.summary = os.str();
    return res;
}

SuiteResult verify_density_bounds(int jobs) {
    SuiteResult res;
    res.name = "density-bounds";
    auto grid = erlang_c_small_grid(100);
    std::vector<std::string> rows(grid.size() + 4);
    std::atomic<bool> ok{true};
    const double bound_c = std::sqrt(2.0 / M_PI) + 1e-9;
    parallel_for(grid.size(), jobs, [&](size_t i) {
        QueueParams qp(grid[i].lambda, grid[i].mu, grid[i].n, 0.0);
        DensityCurve cc = DensityCurve::build(qp, DiffusionMode::Constant);
        DensityCurve cs = DensityCurve::build(qp, DiffusionMode::StateDependent);
        json row = point_json(grid[i]);
        const double sup_c = cc.sup_density();
        const double sup_s = cs.sup_density();
        row["sup_const"] = sup_c;
        row["sup_statedep"] = sup_s;
        bool pass = sup_c <= bound_c;
        if (qp.offered_load() >= 1.0) pass = pass && sup_s <= 4.0 + 1e-9;
        row["pass"] = pass;
        if (!pass) ok = false;
        rows[i] = row.dump();
    });
    // Erlang-A density bounds (monitored as part of this suite)
    {
        size_t r = grid.size();
        using PT = std::tuple<double, long, double>;
        for (auto [lam, n, al] : {PT(40, 50, 1.0), PT(70, 50, 0.5), PT(90, 50, 2.0),
                                  PT(50, 50, 1.0)}) {
            QueueParams qp(lam, 1.0, n, al);
            DensityCurve c = DensityCurve::build(qp, DiffusionMode::Constant);
            const double bound = qp.offered_load() <= static_cast<double>(n)
                                     ? std::sqrt(2.0 / M_PI)
                                     : std::sqrt(2.0 / M_PI) * std::sqrt(al);
            json row{{"lambda", lam}, {"n", n}, {"alpha", al}};
            row["sup"] = c.sup_density();
            row["bound"] = bound;
            bool pass = c.sup_density() <= bound + 1e-9;
            row["pass"] = pass;
            if (!pass) ok = false;
            rows[r++] = row.dump();
        }
    }
    // m! limit of |zeta| E[Y] as zeta -> 0 (Erlang-C constant mode)
    bool limit_ok = true;
    {
        for (auto [azt, tol] : {std::pair<double, double>{1e-3, 1e-2}, {1e-4, 1e-3}}) {
            const long n = 100;
            const double R = [&] { // solve R + azt*sqrt(R) = n
                double r = static_cast<double>(n);
                for (int it = 0; it < 60; ++it) r = static_cast<double>(n) - azt * std::sqrt(r);
                return r;
            }();
            QueueParams qp(R, 1.0, n, 0.0);
            DensityCurve c = DensityCurve::build(qp, DiffusionMode::Constant);
            const double v = qp.abs_zeta() * c.moment(1);
            if (std::abs(v - 1.0) > tol) limit_ok = false;
            json row{{"abs_zeta", azt}, {"zeta_times_EY", v}, {"tol", tol}};
            res.rows.push_back(row.dump());
        }
    }
    for (auto& r : rows)
        if (!r.empty()) res.rows.push_back(std::move(r));
    res.passed = ok && limit_ok;
    res.summary = res.passed ? "density bounds and small-|zeta| limit hold"
                             : "density bound violation";
    return res;
}

SuiteResult verify_theorem_bounds(int jobs, bool erlang_a_trend) {
    SuiteResult res;
    res.name = "theorem-bounds";
    auto grid = erlang_c_grid(200);
    std::vector<std::string> rows(grid.size());
    std::atomic<bool> ok{true};
    std::vector<double> dws(grid.size()), dks(grid.size());
    parallel_for(grid.size(), jobs, [&](size_t i) {
        QueueParams qp(grid[i].lambda, grid[i].mu, grid[i].n, 0.0);
        LatticeDist lat = LatticeDist::stationary(qp);
        DensityCurve c = DensityCurve::build(qp, DiffusionMode::Constant);
        const double dw = wasserstein1(lat, c);
        const double dk = kolmogorov(lat, c);
        const double sr = std::sqrt(qp.offered_load());
        json row = point_json(grid[i]);
        row["d_w"] = dw;
        row["d_k"] = dk;
        row["sqrtR_dw"] = dw * sr;
        row["sqrtR_dk"] = dk * sr;
        bool pass = dw <= 190.0 / sr && dk <= 156.0 / sr;
        row["pass"] = pass;
        if (!pass) ok = false;
        dws[i] = dw * sr;
        dks[i] = dk * sr;
        rows[i] = row.dump();
    });
    double max_dw = 0, max_dk = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
        max_dw = std::max(max_dw, dws[i]);
        max_dk = std::max(max_dk, dks[i]);
    }
    res.rows = std::move(rows);

    bool trend_ok = true;
    if (erlang_a_trend) {
        for (double am : {0.5, 1.0, 2.0}) {
            std::vector<double> sw, sk;
            for (double R : {10.0, 100.0, 1000.0, 10000.0}) {
                const long n = static_cast<long>(std::ceil(R + std::sqrt(R)));
                QueueParams qp(R, 1.0, n, am);
                LatticeDist lat = LatticeDist::stationary(qp);
                DensityCurve c = DensityCurve::build(qp, DiffusionMode::Constant);
                sw.push_back(std::sqrt(R) * wasserstein1(lat, c));
                sk.push_back(std::sqrt(R) * kolmogorov(lat, c));
            }
            json row{{"alpha_over_mu", am}, {"sqrtR_dw_ladder", sw}, {"sqrtR_dk_ladder", sk}};
            // monitored trend rule: the scaled sequence must stabilize, i.e.
            // per-decade growth stays under 5% and the growth itself shrinks
            bool this_ok = true;
            auto stable = [&](const std::vector<double>& s) {
                double run_max = s[0];
                for (size_t i = 1; i < s.size(); ++i) {
                    if (s[i] > s[i - 1] * 1.05) this_ok = false; // per-decade growth cap
                    if (i + 1 == s.size() && s[i] > run_max * 1.02) this_ok = false;
                    run_max = std::max(run_max, s[i]);
                }
            };
            stable(sw);
            stable(sk);
            if (!this_ok) trend_ok = false;
            row["trend_ok"] = this_ok;
            res.rows.push_back(row.dump());
        }
    }
    res.passed = ok && trend_ok;
    std::ostringstream os;
    os << "max sqrt(R)*d_W = " << max_dw << " (bound 190), max sqrt(R)*d_K = " << max_dk
       << " (bound 156)" << (erlang_a_trend ? (trend_ok ? "; A-trend ok" : "; A-trend FAIL") : "");
    res.summary = os.str();
    return res;
}

SuiteResult verify_ssc(const std::string& preset, double samples, uint64_t seed, int jobs) {
    SuiteResult res;
    res.name = "ssc";
    PhaseType pt;
    if (preset == "h2")
        pt = PhaseType::hyper2(0.5, 2.0, 2.0 / 3.0);
    else if (preset == "e2")
        pt = PhaseType::erlang2(2.0);
    else if (preset == "c2")
        pt = PhaseType::coxian2(1.0, 24.0);
    else
        throw std::invalid_argument("verify_ssc: unknown preset " + preset);
    const long n = 50;
    const double lambda = 65.0; // overloaded so the queue is regularly visited
    const double alpha = 1.0;

    DesConfig cfg;
    cfg.seed = seed;
    cfg.jobs = jobs;
    cfg.replications = 8;
    cfg.ssc_sample_spacing = 5.0;
    cfg.burn_in = 200.0;
    cfg.horizon = std::max(1000.0, samples * cfg.ssc_sample_spacing /
                                       static_cast<double>(cfg.replications));
    DesResult sim = des_simulate(pt, lambda, n, alpha, cfg);
    SscTestReport rep = ssc_binomial_test(sim.ssc, pt.p);

    json head{{"preset", preset},
              {"lambda", lambda},
              {"n", n},
              {"alpha", alpha},
              {"samples", sim.ssc.total_samples},
              {"events", sim.events},
              {"flow_conserved", sim.flow_conserved},
              {"ssc_moment_constant", rep.ssc_moment_constant},
              {"conclusive", rep.conclusive}};
    res.rows.push_back(head.dump());
    for (const auto& it : rep.items) {
        json row{{"phase", it.phase},
                 {"queue_length", it.queue_length},
                 {"samples", it.samples},
                 {"p_value", it.p_value}};
        res.rows.push_back(row.dump());
    }
    bool dev_ok = true;
    for (size_t i = 0; i < rep.dev_mean.size(); ++i) {
        json row{{"coord", i}, {"dev_mean", rep.dev_mean[i]}, {"dev_se", rep.dev_se[i]}};
        res.rows.push_back(row.dump());
        if (std::abs(rep.dev_mean[i]) > 3.0 * rep.dev_se[i] + 1e-12) dev_ok = false;
    }
    // familywise 1% level across the retained strata (Bonferroni)
    const double level = 0.01 / std::max<size_t>(rep.items.size(), 1);
    bool chi_ok = true;
    for (const auto& it : rep.items) chi_ok = chi_ok && it.p_value >= level;
    res.passed = sim.flow_conserved && rep.conclusive && chi_ok && dev_ok;
    std::ostringstream os;
    os << "strata tested: " << rep.items.size() << ", moment constant "
       << rep.ssc_moment_constant << (res.passed ? "" : " [FAIL]");
    res.summary = os.str();
    return res;
}

} // namespace steadystein
