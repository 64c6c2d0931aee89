#pragma once

#include <Eigen/Dense>

namespace steadystein {

/**
 * @brief Phase-type service distribution (p, nu, P): initial-phase law p,
 * per-phase rates nu, substochastic routing matrix P with zero diagonal and
 * (I - P) invertible.
 */
struct PhaseType {
    Eigen::VectorXd p;
    Eigen::VectorXd nu;
    Eigen::MatrixXd P;

    long dim() const { return p.size(); }

    /// Throws std::invalid_argument when the tuple is not a valid phase type.
    void validate() const;

    /// Two-phase Coxian with mean 1/mu and squared coefficient of variation cs2.
    static PhaseType coxian2(double mu, double cs2);
    /// Two-phase hyperexponential.
    static PhaseType hyper2(double p1, double nu1, double nu2);
    /// Erlang-2 with phase rate theta.
    static PhaseType erlang2(double theta);
    /// Single exponential phase.
    static PhaseType exponential(double mu);
};

/// Derived quantities: service rate mu, phase-load fractions gamma (sum 1),
/// and R = (I - P^T) diag(nu).
struct PhaseTypeDerived {
    double mu;
    Eigen::VectorXd gamma;
    Eigen::MatrixXd R;
};

PhaseTypeDerived phasetype_derive(const PhaseType& pt);

/// Covariance coefficient of the limiting OU process:
/// Sigma = diag(p) + sum_k gamma_k nu_k H^k + (I-P^T) diag(nu) diag(gamma) (I-P).
Eigen::MatrixXd sigma_matrix(const PhaseType& pt);

} // namespace steadystein
