#pragma once

#include <optional>
#include <vector>

#include "steadystein/queue_params.hpp"

namespace steadystein {

enum class Centering { Fluid, OfferedLoad };

/**
 * @brief Exact stationary distribution of the Erlang-A/C customer count,
 * truncated where an analytic geometric tail bound drops below tail_eps.
 *
 * Probabilities are kept on the linear scale (entries far in the tail may
 * underflow to zero; log-domain bookkeeping covers the certification paths).
 */
class LatticeDist {
public:
    static LatticeDist stationary(const QueueParams& params, double tail_eps = 1e-14);

    const QueueParams& params() const { return params_; }
    long k_max() const { return static_cast<long>(probs_.size()) - 1; }
    const std::vector<double>& probs() const { return probs_; }
    double tail_mass_bound() const { return tail_mass_bound_; }
    double log_tail_prob_unnorm() const { return log_tail_unnorm_; }

    double pmf_at(long k) const {
        return (k < 0 || k > k_max()) ? 0.0 : probs_[static_cast<size_t>(k)];
    }

    /// E[X(infinity)] on the unscaled lattice.
    double mean_unscaled() const;

    /// E[Xtilde^m] with Xtilde = delta*(X - c), c per the centering flag.
    /// Throws if the analytic tail bound cannot certify a relative moment
    /// error below 1e-9 at the chosen truncation.
    double scaled_moment(long m, Centering centering = Centering::Fluid) const;

    /// P(Xtilde >= z); z in scaled (fluid-centered) coordinates.
    double tail_prob(double z) const;

    /// Right-continuous CDF of Xtilde at x (scaled coordinates).
    double cdf(double x) const;

    /// Scaled lattice abscissa of state k.
    double x_of(long k) const { return params_.lattice_point(k); }

    /// Largest k with x_k <= z (clamped into the retained range).
    long k_at_or_below(double z) const;

    /// Indicator moments used by the moment-bound suites:
    /// E[|Xtilde|^m 1(Xtilde <= -zeta)] (left=true) or on {Xtilde >= -zeta}.
    double indicator_abs_moment(long m, bool left_of_minus_zeta) const;
    /// E[(Xtilde + zeta)^m 1(...)] variants.
    double indicator_shift_moment(long m, bool left_of_minus_zeta) const;
    /// P(Xtilde <= -zeta).
    double prob_left_of_minus_zeta() const;

    /// Exact E[exp(r*Xtilde) 1(Xtilde >= -zeta)] (log-domain accumulation).
    double exp_tilted_right_mass(double r) const;

    /// Max relative detailed-balance violation over retained states with
    /// non-negligible mass; should be ~1e-15.
    double detailed_balance_residual() const;

private:
    LatticeDist(QueueParams params, std::vector<double> probs, double tail_mass_bound,
                double log_tail_unnorm)
        : params_(params), probs_(std::move(probs)), tail_mass_bound_(tail_mass_bound),
          log_tail_unnorm_(log_tail_unnorm) {}

    QueueParams params_;
    std::vector<double> probs_;
    double tail_mass_bound_;   // normalized mass beyond k_max (analytic bound)
    double log_tail_unnorm_;   // log of the same bound before normalization
};

/// Two-phase Coxian service: phase 1 at rate nu1, then with probability p12
/// phase 2 at rate nu2. Mean 1/nu1 + p12/nu2.
struct CoxianC2 {
    double nu1, nu2, p12;
    /// Standard fit: mean 1/mu, squared coefficient of variation cs2 >= 0.5.
    static CoxianC2 from_mean_scv(double mu, double cs2);
    double mean() const { return 1.0 / nu1 + p12 / nu2; }
};

/**
 * @brief Stationary distribution of the 2-d CTMC for M/C2/n+M.
 *
 * States (x1, x2): x1 phase-1 customers in system, x2 phase-2 customers (all
 * in service). Queued customers are phase 1. Solved by Gauss-Seidel sweeps on
 * the truncated generator, initialized from a product of marginals.
 */
class C2Stationary {
public:
    static C2Stationary solve(const CoxianC2& cox, double lambda, long n, double alpha,
                              double tail_eps = 1e-12, long max_sweeps = 20000,
                              double residual_tol = 1e-10);

    long n() const { return n_; }
    long total_cap() const { return cap_; }
    double prob(long x1, long x2) const;
    /// E|Ttilde| with Ttilde = (T - n)/sqrt(lambda), T = X1 + X2.
    double mean_abs_scaled_total() const;
    /// E[Ttilde^m].
    double scaled_total_moment(long m) const;
    /// P(T >= k).
    double total_tail(long k) const;
    /// Marginal of X1 (ordered by x1), mostly for the degenerate-C2 check.
    std::vector<double> marginal_x1() const;
    double residual() const { return residual_; }
    long sweeps() const { return sweeps_; }

private:
    C2Stationary() = default;
    size_t idx(long x1, long x2) const;

    CoxianC2 cox_{};
    double lambda_ = 0, alpha_ = 0;
    long n_ = 0, cap_ = 0;
    std::vector<double> pi_;
    std::vector<long> row_offset_;
    double residual_ = 0;
    long sweeps_ = 0;
};

} // namespace steadystein
