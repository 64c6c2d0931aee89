#include "steadystein/ou.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "steadystein/rng.hpp"

namespace steadystein {

OUSpec OUSpec::make(const PhaseType& pt, double lambda, long n, double alpha) {
    if (!(lambda > 0.0) || n < 1 || !(alpha > 0.0))
        throw std::invalid_argument("OUSpec: need lambda>0, n>=1, alpha>0");
    OUSpec s;
    s.pt = pt;
    s.derived = phasetype_derive(pt);
    s.sigma = sigma_matrix(pt);
    s.lambda = lambda;
    s.n = n;
    s.alpha = alpha;
    s.delta = 1.0 / std::sqrt(lambda);
    s.beta = (static_cast<double>(n) * s.derived.mu - lambda) * s.delta;
    return s;
}

Eigen::VectorXd OUSpec::drift(const Eigen::VectorXd& y) const {
    const double tp = std::max(y.sum(), 0.0);
    return -pt.p * beta - derived.R * (y - pt.p * tp) - alpha * pt.p * tp;
}

Eigen::VectorXd OUSpec::z_hat(const Eigen::VectorXd& y) const {
    const double tp = std::max(y.sum(), 0.0);
    return (y - pt.p * tp + delta * static_cast<double>(n) * derived.gamma)
        .cwiseMax(0.0);
}

Eigen::VectorXd OUSpec::drift_state_dependent(const Eigen::VectorXd& y) const {
    const double tp = std::max(y.sum(), 0.0);
    const Eigen::VectorXd zh = z_hat(y);
    const long d = pt.dim();
    Eigen::VectorXd b(d);
    for (long i = 0; i < d; ++i) {
        double v = delta * lambda * pt.p(i) - alpha * pt.p(i) * tp - pt.nu(i) * zh(i);
        for (long j = 0; j < d; ++j) v += pt.P(j, i) * pt.nu(j) * zh(j);
        b(i) = v;
    }
    return b;
}

Eigen::MatrixXd OUSpec::coeff_state_dependent(const Eigen::VectorXd& y) const {
    const double tp = std::max(y.sum(), 0.0);
    const Eigen::VectorXd zh = z_hat(y);
    const long d = pt.dim();
    Eigen::MatrixXd a(d, d);
    for (long i = 0; i < d; ++i) {
        double diag = delta * delta * lambda * pt.p(i) + delta * alpha * pt.p(i) * tp +
                      delta * pt.nu(i) * zh(i);
        for (long j = 0; j < d; ++j) diag += delta * pt.P(j, i) * pt.nu(j) * zh(j);
        a(i, i) = diag;
        for (long j = 0; j < d; ++j) {
            if (j == i) continue;
            a(i, j) = -delta * (pt.nu(i) * pt.P(i, j) * zh(i) + pt.nu(j) * pt.P(j, i) * zh(j));
        }
    }
    return a;
}

namespace {

struct RepStats {
    double abs_total = 0, total = 0, total2 = 0;
    long clipped = 0;
    bool diverged = false;
};

// Cholesky with eigenvalue clipping fallback; returns true when clipped.
bool factor(const Eigen::MatrixXd& a, Eigen::MatrixXd& L) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
        L = llt.matrixL();
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    L = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    return true;
}

RepStats run_rep(const OUSpec& spec, OuMode mode, const OuConfig& cfg, long rep,
                 const Eigen::MatrixXd& chol_const) {
    CounterRng rng(cfg.seed, static_cast<uint64_t>(rep) + 1);
    const long d = spec.pt.dim();
    const double sdt = std::sqrt(cfg.dt);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd noise(d);
    Eigen::MatrixXd L = chol_const;
    RepStats st;
    const long total_steps = cfg.burn_in_steps + cfg.steps;
    for (long s = 0; s < total_steps; ++s) {
        for (long i = 0; i < d; ++i) noise(i) = rng.normal();
        if (mode == OuMode::Constant) {
            y += spec.drift(y) * cfg.dt + chol_const * noise * sdt;
        } else {
            st.clipped += factor(spec.coeff_state_dependent(y), L) ? 1 : 0;
            y += spec.drift_state_dependent(y) * cfg.dt + L * noise * sdt;
        }
        if (s == cfg.burn_in_steps - 1) continue;
        if (s >= cfg.burn_in_steps) {
            const double t = y.sum();
            st.abs_total += std::abs(t);
            st.total += t;
            st.total2 += t * t;
            if (!(std::abs(t) < 1e6)) {
                st.diverged = true;
                break;
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(cfg.steps);
    st.abs_total *= inv;
    st.total *= inv;
    st.total2 *= inv;
    return st;
}

} // namespace

OuResult ou_simulate(const OUSpec& spec, OuMode mode, const OuConfig& cfg) {
    if (cfg.replications < 2 || cfg.steps < 1 || !(cfg.dt > 0))
        throw std::invalid_argument("ou_simulate: bad config");
    Eigen::MatrixXd chol_const;
    {
        Eigen::LLT<Eigen::MatrixXd> llt(spec.sigma);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("ou_simulate: Sigma is not positive definite");
        chol_const = llt.matrixL();
    }
    const int jobs = cfg.jobs > 0 ? cfg.jobs
                                  : std::max(1u, std::thread::hardware_concurrency());
    std::vector<RepStats> stats(static_cast<size_t>(cfg.replications));
    std::vector<std::thread> pool;
    std::atomic<long> next{0};
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            long r;
            while ((r = next.fetch_add(1)) < cfg.replications)
                stats[static_cast<size_t>(r)] = run_rep(spec, mode, cfg, r, chol_const);
        });
    for (auto& th : pool) th.join();

    long clipped = 0;
    std::vector<double> abs_reps, tot_reps, tot2_reps;
    for (const RepStats& s : stats) {
        if (s.diverged)
            throw std::runtime_error(
                "ou_simulate: trajectory diverged; decrease the step size");
        clipped += s.clipped;
        abs_reps.push_back(s.abs_total);
        tot_reps.push_back(s.total);
        tot2_reps.push_back(s.total2);
    }
    OuResult out;
    out.clip_fraction = static_cast<double>(clipped) /
                        static_cast<double>(cfg.replications * (cfg.burn_in_steps + cfg.steps));
    if (out.clip_fraction > cfg.max_clip_fraction)
        throw std::runtime_error("ou_simulate: indefinite-coefficient clipping exceeded budget");
    const double burn_time = static_cast<double>(cfg.burn_in_steps) * cfg.dt;
    out.abs_total = SimEstimate::from_replications(abs_reps, burn_time, cfg.seed);
    out.total_mean = SimEstimate::from_replications(tot_reps, burn_time, cfg.seed);
    out.total_second = SimEstimate::from_replications(tot2_reps, burn_time, cfg.seed);
    out.abs_total_reps = std::move(abs_reps);
    return out;
}

} // namespace steadystein
