#pragma once

#include <Eigen/Dense>

#include "steadystein/phase_type.hpp"
#include "steadystein/stats.hpp"

namespace steadystein {

/**
 * @brief d-dimensional piecewise OU approximation of M/Ph/n+M in the
 * square-root staffing regime; scaling delta = 1/sqrt(lambda).
 *
 * Constant mode drives the noise with the fixed covariance Sigma; the
 * state-dependent mode matches the chain's local second-order coefficients.
 */
struct OUSpec {
    PhaseType pt;
    PhaseTypeDerived derived;
    Eigen::MatrixXd sigma; // constant-mode covariance coefficient
    double lambda = 0;
    long n = 0;
    double alpha = 0;
    double beta = 0;  // (n mu - lambda)/sqrt(lambda)
    double delta = 0; // 1/sqrt(lambda)

    static OUSpec make(const PhaseType& pt, double lambda, long n, double alpha);

    /// Piecewise-linear drift -p beta - R(y - p (e^T y)^+) - alpha p (e^T y)^+.
    Eigen::VectorXd drift(const Eigen::VectorXd& y) const;

    /// Scaled in-service headcounts (y_i - p_i (e^T y)^+ + delta gamma_i n)^+.
    Eigen::VectorXd z_hat(const Eigen::VectorXd& y) const;

    /// Drift with the clipped z_hat substitution (equals drift() wherever no
    /// clipping is active).
    Eigen::VectorXd drift_state_dependent(const Eigen::VectorXd& y) const;

    /// State-dependent second-order coefficient matrix a(y).
    Eigen::MatrixXd coeff_state_dependent(const Eigen::VectorXd& y) const;
};

enum class OuMode { Constant, StateDependent };

struct OuConfig {
    double dt = 1e-3;
    long steps = 1'000'000; // post burn-in steps per replication
    long burn_in_steps = 1'000;
    long replications = 32;
    uint64_t seed = 0;
    int jobs = 0; // 0: hardware concurrency
    double max_clip_fraction = 1e-4;
};

struct OuResult {
    SimEstimate abs_total;    // E|e^T Y|
    SimEstimate total_mean;   // E e^T Y
    SimEstimate total_second; // E (e^T Y)^2
    double clip_fraction = 0.0;
    std::vector<double> abs_total_reps; // per-replication means, for pairing
};

/// Long-run Euler-Maruyama averages; throws on divergence or excessive
/// eigenvalue clipping.
OuResult ou_simulate(const OUSpec& spec, OuMode mode, const OuConfig& cfg);

} // namespace steadystein
