#include "steadystein/birth_death.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace steadystein {

namespace {

constexpr long kTruncationCap = 10'000'000;

// Neumaier compensated sum.
struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double v) {
        double t = s + v;
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

} // namespace

LatticeDist LatticeDist::stationary(const QueueParams& params, double tail_eps) {
    if (!(tail_eps > 0.0) || tail_eps > 1e-6)
        throw std::invalid_argument("stationary: tail_eps must lie in (0, 1e-6]");
    const double lam = params.lambda();
    const double log_lam = std::log(lam);
    const long n = params.n();

    std::vector<double> logpi;
    logpi.reserve(4096);
    logpi.push_back(0.0);
    double log_max = 0.0;
    double log_tail = 0.0;
    const double log_eps = std::log(tail_eps);
    long k = 0;
    while (true) {
        ++k;
        if (k > kTruncationCap)
            throw std::runtime_error("stationary: tail bound not achievable within k_max cap");
        logpi.push_back(logpi.back() + log_lam - std::log(params.death_rate(k)));
        log_max = std::max(log_max, logpi.back());
        if (k > n) {
            const double r = lam / params.death_rate(k + 1);
            if (r < 1.0) {
                // remaining unnormalized mass <= pi_k * r/(1-r) since the
                // ratios lam/d(j) are non-increasing beyond n
                log_tail = logpi.back() + std::log(r) - std::log1p(-r);
                if (log_tail - log_max < log_eps - 2.0) break;
            }
        }
    }

    // normalize by log-sum-exp
    Kahan z;
    for (double lp : logpi) z.add(std::exp(lp - log_max));
    const double log_z = log_max + std::log(z.value());
    std::vector<double> probs(logpi.size());
    for (size_t i = 0; i < logpi.size(); ++i) probs[i] = std::exp(logpi[i] - log_z);
    return LatticeDist(params, std::move(probs), std::exp(log_tail - log_z), log_tail - log_z);
}

double LatticeDist::mean_unscaled() const {
    Kahan s;
    for (size_t i = 0; i < probs_.size(); ++i) s.add(probs_[i] * static_cast<double>(i));
    return s.value();
}

double LatticeDist::scaled_moment(long m, Centering centering) const {
    if (m < 0 || m > 20) throw std::invalid_argument("scaled_moment: need 0 <= m <= 20");
    const double delta = params_.delta();
    const double c = centering == Centering::Fluid ? params_.fluid_equilibrium()
                                                   : params_.offered_load();
    Kahan s;
    for (size_t i = 0; i < probs_.size(); ++i) {
        if (probs_[i] == 0.0) continue;
        s.add(probs_[i] * std::pow(delta * (static_cast<double>(i) - c), static_cast<double>(m)));
    }
    const double est = s.value();

    // Certify: sum_{k>k_max} pi_k |x_k|^m <= 1e-9 * max(|est|, 1), bounding
    // pi_{k_max+j} by pi_{k_max} r^j with r the (non-increasing) jump ratio.
    const long kmax = k_max();
    const double r = params_.lambda() / params_.death_rate(kmax + 1);
    const double log_pi_kmax = log_tail_unnorm_ - std::log(r) + std::log1p(-r);
    double log_bound = -std::numeric_limits<double>::infinity();
    double log_term = log_pi_kmax;
    for (long j = 1; j <= 400000; ++j) {
        log_term += std::log(r);
        const double x = std::abs(delta * (static_cast<double>(kmax + j) - c));
        const double lt = log_term + m * std::log(std::max(x, 1e-300));
        log_bound = std::max(log_bound, lt) +
                    std::log1p(std::exp(std::min(log_bound, lt) - std::max(log_bound, lt)));
        if (lt < log_bound - 46.0) break; // remaining terms negligible vs accumulated bound
    }
    const double scale = std::max(std::abs(est), 1.0);
    if (log_bound > std::log(1e-9 * scale))
        throw std::runtime_error(
            "scaled_moment: truncated tail cannot certify the moment; rebuild with smaller tail_eps");
    return est;
}

double LatticeDist::tail_prob(double z) const {
    const double delta = params_.delta();
    const double c = params_.fluid_equilibrium();
    // first k with x_k >= z
    double kz = std::ceil(z / delta + c - 1e-9);
    if (kz <= 0) return 1.0;
    long k0 = static_cast<long>(kz);
    if (k0 > k_max()) return tail_mass_bound_; // bound, not exact; tiny by construction
    Kahan s;
    for (size_t i = static_cast<size_t>(k0); i < probs_.size(); ++i) s.add(probs_[i]);
    return s.value() + tail_mass_bound_;
}

double LatticeDist::cdf(double x) const {
    const double delta = params_.delta();
    const double c = params_.fluid_equilibrium();
    double kf = std::floor(x / delta + c + 1e-9);
    if (kf < 0) return 0.0;
    long k1 = std::min(static_cast<long>(kf), k_max());
    Kahan s;
    for (long i = 0; i <= k1; ++i) s.add(probs_[static_cast<size_t>(i)]);
    return std::min(s.value(), 1.0);
}

long LatticeDist::k_at_or_below(double z) const {
    const double kf = std::floor(z / params_.delta() + params_.fluid_equilibrium() + 1e-9);
    return std::clamp(static_cast<long>(kf), 0L, k_max());
}

double LatticeDist::indicator_abs_moment(long m, bool left) const {
    const double delta = params_.delta();
    const double c = params_.fluid_equilibrium();
    const long nsrv = params_.n();
    Kahan s;
    for (size_t i = 0; i < probs_.size(); ++i) {
        const bool in = left ? (static_cast<long>(i) <= nsrv) : (static_cast<long>(i) >= nsrv);
        if (!in || probs_[i] == 0.0) continue;
        const double x = delta * (static_cast<double>(i) - c);
        s.add(probs_[i] * std::pow(std::abs(x), static_cast<double>(m)));
    }
    return s.value();
}

double LatticeDist::indicator_shift_moment(long m, bool left) const {
    const double delta = params_.delta();
    const double c = params_.fluid_equilibrium();
    const double zeta = params_.zeta();
    const long nsrv = params_.n();
    Kahan s;
    for (size_t i = 0; i < probs_.size(); ++i) {
        const bool in = left ? (static_cast<long>(i) <= nsrv) : (static_cast<long>(i) >= nsrv);
        if (!in || probs_[i] == 0.0) continue;
        const double u = delta * (static_cast<double>(i) - c) + zeta;
        s.add(probs_[i] * std::pow(std::abs(u), static_cast<double>(m)));
    }
    return s.value();
}

double LatticeDist::prob_left_of_minus_zeta() const {
    Kahan s;
    const long nsrv = std::min(params_.n(), k_max());
    for (long i = 0; i <= nsrv; ++i) s.add(probs_[static_cast<size_t>(i)]);
    return s.value();
}

double LatticeDist::exp_tilted_right_mass(double r) const {
    const double delta = params_.delta();
    const double c = params_.fluid_equilibrium();
    const long nsrv = params_.n();
    Kahan s;
    for (size_t i = static_cast<size_t>(std::min(nsrv, k_max())); i < probs_.size(); ++i) {
        if (static_cast<long>(i) < nsrv) continue;
        if (probs_[i] == 0.0) continue;
        const double x = delta * (static_cast<double>(i) - c);
        s.add(probs_[i] * std::exp(r * x));
    }
    return s.value();
}

double LatticeDist::detailed_balance_residual() const {
    double worst = 0.0;
    const double lam = params_.lambda();
    for (size_t k = 1; k < probs_.size(); ++k) {
        if (probs_[k] < 1e-290 || probs_[k - 1] < 1e-290) continue;
        const double lhs = lam * probs_[k - 1];
        const double rhs = params_.death_rate(static_cast<long>(k)) * probs_[k];
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(lhs, rhs));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// M/C2/n+M two-dimensional chain
// ---------------------------------------------------------------------------

CoxianC2 CoxianC2::from_mean_scv(double mu, double cs2) {
    if (!(mu > 0.0) || !(cs2 >= 0.5))
        throw std::invalid_argument("CoxianC2: need mu > 0 and cs2 >= 0.5");
    CoxianC2 c;
    c.nu1 = 2.0 * mu;
    c.p12 = 1.0 / (2.0 * cs2);
    c.nu2 = c.p12 * c.nu1;
    return c;
}

size_t C2Stationary::idx(long x1, long x2) const {
    return static_cast<size_t>(row_offset_[static_cast<size_t>(x1)] + x2);
}

double C2Stationary::prob(long x1, long x2) const {
    if (x1 < 0 || x2 < 0 || x1 + x2 > cap_ || x2 > n_) return 0.0;
    return pi_[idx(x1, x2)];
}

C2Stationary C2Stationary::solve(const CoxianC2& cox, double lambda, long n, double alpha,
                                 double tail_eps, long max_sweeps, double residual_tol) {
    if (!(lambda > 0.0) || n < 1 || !(alpha > 0.0))
        throw std::invalid_argument("C2Stationary: need lambda>0, n>=1, alpha>0");
    C2Stationary out;
    out.cox_ = cox;
    out.lambda_ = lambda;
    out.alpha_ = alpha;
    out.n_ = n;

    // Truncate total count where the abandonment-driven tail is negligible:
    // beyond n the total-count birth-death ratio is lambda/(d + alpha*(T-n))
    // with d >= min service drain; grow cap until the product bound < tail_eps.
    {
        double log_tail = 0.0;
        long cap = n;
        const double drain = std::min(cox.nu1 * (1 - cox.p12), cox.nu2) * 0.0 + lambda; // base scale
        (void)drain;
        while (true) {
            ++cap;
            const double ratio = lambda / (lambda + alpha * static_cast<double>(cap - n));
            log_tail += std::log(ratio);
            if (ratio < 0.9 && log_tail < std::log(tail_eps)) break;
            if (cap - n > 2'000'000) throw std::runtime_error("C2Stationary: cap blowup");
        }
        out.cap_ = cap;
    }

    const long cap = out.cap_;
    out.row_offset_.assign(static_cast<size_t>(cap) + 2, 0);
    long total = 0;
    for (long x1 = 0; x1 <= cap; ++x1) {
        out.row_offset_[static_cast<size_t>(x1)] = total;
        total += std::min(n, cap - x1) + 1;
    }
    out.row_offset_[static_cast<size_t>(cap) + 1] = total;

    const double nu1 = cox.nu1, nu2 = cox.nu2, p12 = cox.p12;

    struct Flow { size_t from; double rate; };
    // Precompute, for every state, its outflow rate and list of inflows.
    std::vector<double> outrate(static_cast<size_t>(total), 0.0);
    std::vector<std::vector<Flow>> inflows(static_cast<size_t>(total));
    auto for_state = [&](long x1, long x2, auto&& emit) {
        const long tot = x1 + x2;
        const long q1 = std::max(tot - n, 0L);
        const long z1 = x1 - q1; // = min(x1, n - x2)
        if (tot < cap) emit(x1 + 1, x2, lambda);
        if (z1 > 0) {
            emit(x1 - 1, x2, nu1 * static_cast<double>(z1) * (1.0 - p12));
            emit(x1 - 1, x2 + 1, nu1 * static_cast<double>(z1) * p12);
        }
        if (x2 > 0) emit(x1, x2 - 1, nu2 * static_cast<double>(x2));
        if (q1 > 0) emit(x1 - 1, x2, alpha * static_cast<double>(q1));
    };
    for (long x1 = 0; x1 <= cap; ++x1) {
        for (long x2 = 0; x2 <= std::min(n, cap - x1); ++x2) {
            const size_t s = out.idx(x1, x2);
            for_state(x1, x2, [&](long y1, long y2, double rate) {
                if (y1 < 0 || y2 < 0 || y1 + y2 > cap || y2 > n) return; // truncated edge
                outrate[s] += rate;
                inflows[out.idx(y1, y2)].push_back({s, rate});
            });
        }
    }

    // Initial guess: product of a geometric-ish total marginal and a binomial
    // split; anything positive works, this just shortens the sweep count.
    std::vector<double>& pi = out.pi_;
    pi.assign(static_cast<size_t>(total), 0.0);
    {
        LatticeDist bd = LatticeDist::stationary(
            QueueParams(lambda, 1.0 / cox.mean(), n, alpha), 1e-12);
        const double g1 = 1.0 / (1.0 + p12 * nu1 / nu2); // rough phase-1 fraction
        for (long x1 = 0; x1 <= cap; ++x1)
            for (long x2 = 0; x2 <= std::min(n, cap - x1); ++x2) {
                const long tot = x1 + x2;
                double w = bd.pmf_at(tot);
                // crude split of the total across phases
                double frac = std::pow(g1, static_cast<double>(x1)) *
                              std::pow(1 - g1, static_cast<double>(x2));
                pi[out.idx(x1, x2)] = std::max(w * frac, 1e-300);
            }
    }

    // Gauss-Seidel: pi(s) <- inflow(s)/outrate(s), sweeping in place.
    double res = std::numeric_limits<double>::infinity();
    long sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        for (size_t s = 0; s < pi.size(); ++s) {
            if (outrate[s] == 0.0) continue;
            double in = 0.0;
            for (const Flow& f : inflows[s]) in += pi[f.from] * f.rate;
            pi[s] = in / outrate[s];
        }
        // normalize and measure balance residual every few sweeps
        if (sweep % 8 == 7 || sweep == max_sweeps - 1) {
            double z = 0.0;
            for (double v : pi) z += v;
            for (double& v : pi) v /= z;
            res = 0.0;
            for (size_t s = 0; s < pi.size(); ++s) {
                double in = 0.0;
                for (const Flow& f : inflows[s]) in += pi[f.from] * f.rate;
                res = std::max(res, std::abs(in - pi[s] * outrate[s]));
            }
            if (res < residual_tol) break;
        }
    }
    out.sweeps_ = sweep + 1;
    out.residual_ = res;
    if (!(res < residual_tol))
        throw std::runtime_error("C2Stationary: Gauss-Seidel did not reach residual " +
                                 std::to_string(residual_tol) + " (got " + std::to_string(res) + ")");
    double z = 0.0;
    for (double v : pi) z += v;
    for (double& v : pi) v /= z;
    return out;
}

double C2Stationary::mean_abs_scaled_total() const {
    const double delta = 1.0 / std::sqrt(lambda_);
    Kahan s;
    for (long x1 = 0; x1 <= cap_; ++x1)
        for (long x2 = 0; x2 <= std::min(n_, cap_ - x1); ++x2)
            s.add(pi_[idx(x1, x2)] * std::abs(delta * static_cast<double>(x1 + x2 - n_)));
    return s.value();
}

double C2Stationary::scaled_total_moment(long m) const {
    const double delta = 1.0 / std::sqrt(lambda_);
    Kahan s;
    for (long x1 = 0; x1 <= cap_; ++x1)
        for (long x2 = 0; x2 <= std::min(n_, cap_ - x1); ++x2)
            s.add(pi_[idx(x1, x2)] *
                  std::pow(delta * static_cast<double>(x1 + x2 - n_), static_cast<double>(m)));
    return s.value();
}

double C2Stationary::total_tail(long k) const {
    Kahan s;
    for (long x1 = 0; x1 <= cap_; ++x1)
        for (long x2 = 0; x2 <= std::min(n_, cap_ - x1); ++x2)
            if (x1 + x2 >= k) s.add(pi_[idx(x1, x2)]);
    return s.value();
}

std::vector<double> C2Stationary::marginal_x1() const {
    std::vector<double> m(static_cast<size_t>(cap_) + 1, 0.0);
    for (long x1 = 0; x1 <= cap_; ++x1)
        for (long x2 = 0; x2 <= std::min(n_, cap_ - x1); ++x2)
            m[static_cast<size_t>(x1)] += pi_[idx(x1, x2)];
    return m;
}

} // namespace steadystein
