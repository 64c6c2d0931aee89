#include "steadystein/phase_type.hpp"

#include <stdexcept>

namespace steadystein {

void PhaseType::validate() const {
    const long d = dim();
    if (d < 1 || nu.size() != d || P.rows() != d || P.cols() != d)
        throw std::invalid_argument("PhaseType: inconsistent dimensions");
    if (std::abs(p.sum() - 1.0) > 1e-12 || (p.array() < -1e-15).any())
        throw std::invalid_argument("PhaseType: p must be a probability vector");
    if ((nu.array() <= 0.0).any())
        throw std::invalid_argument("PhaseType: phase rates must be positive");
    for (long i = 0; i < d; ++i) {
        if (P(i, i) != 0.0) throw std::invalid_argument("PhaseType: P must have zero diagonal");
        double row = 0.0;
        for (long j = 0; j < d; ++j) {
            if (P(i, j) < 0.0) throw std::invalid_argument("PhaseType: P entries must be >= 0");
            row += P(i, j);
        }
        if (row > 1.0 + 1e-12)
            throw std::invalid_argument("PhaseType: P must be substochastic");
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(d, d) - P);
    if (!lu.isInvertible())
        throw std::invalid_argument("PhaseType: (I - P) is singular (transience violated)");
    // no redundant phases: p_i > 0 or some P_ji > 0
    for (long i = 0; i < d; ++i) {
        bool reachable = p(i) > 0.0;
        for (long j = 0; j < d && !reachable; ++j) reachable = P(j, i) > 0.0;
        if (!reachable) throw std::invalid_argument("PhaseType: redundant phase");
    }
}

PhaseType PhaseType::coxian2(double mu, double cs2) {
    if (!(mu > 0.0) || !(cs2 >= 0.5))
        throw std::invalid_argument("coxian2: need mu > 0, cs2 >= 0.5");
    PhaseType pt;
    pt.p = Eigen::Vector2d(1.0, 0.0);
    const double nu1 = 2.0 * mu;
    const double p12 = 1.0 / (2.0 * cs2);
    pt.nu = Eigen::Vector2d(nu1, p12 * nu1);
    pt.P = Eigen::Matrix2d::Zero();
    pt.P(0, 1) = p12;
    return pt;
}

PhaseType PhaseType::hyper2(double p1, double nu1, double nu2) {
    PhaseType pt;
    pt.p = Eigen::Vector2d(p1, 1.0 - p1);
    pt.nu = Eigen::Vector2d(nu1, nu2);
    pt.P = Eigen::Matrix2d::Zero();
    return pt;
}

PhaseType PhaseType::erlang2(double theta) {
    PhaseType pt;
    pt.p = Eigen::Vector2d(1.0, 0.0);
    pt.nu = Eigen::Vector2d(theta, theta);
    pt.P = Eigen::Matrix2d::Zero();
    pt.P(0, 1) = 1.0;
    return pt;
}

PhaseType PhaseType::exponential(double mu) {
    PhaseType pt;
    pt.p = Eigen::VectorXd::Ones(1);
    pt.nu = Eigen::VectorXd::Constant(1, mu);
    pt.P = Eigen::MatrixXd::Zero(1, 1);
    return pt;
}

PhaseTypeDerived phasetype_derive(const PhaseType& pt) {
    pt.validate();
    const long d = pt.dim();
    PhaseTypeDerived out;
    out.R = (Eigen::MatrixXd::Identity(d, d) - pt.P.transpose()) * pt.nu.asDiagonal();
    // mean service time = e^T R^{-1} p; mu is its reciprocal
    Eigen::VectorXd Rinv_p = out.R.partialPivLu().solve(pt.p);
    const double mean = Rinv_p.sum();
    if (!(mean > 0.0)) throw std::invalid_argument("phasetype_derive: nonpositive mean");
    out.mu = 1.0 / mean;
    out.gamma = out.mu * Rinv_p;
    return out;
}

Eigen::MatrixXd sigma_matrix(const PhaseType& pt) {
    const PhaseTypeDerived der = phasetype_derive(pt);
    const long d = pt.dim();
    Eigen::MatrixXd sigma = Eigen::MatrixXd(pt.p.asDiagonal());
    for (long k = 0; k < d; ++k) {
        Eigen::MatrixXd H(d, d);
        for (long i = 0; i < d; ++i)
            for (long j = 0; j < d; ++j)
                H(i, j) = (i == j) ? pt.P(k, i) * (1.0 - pt.P(k, i)) : -pt.P(k, i) * pt.P(k, j);
        sigma += der.gamma(k) * pt.nu(k) * H;
    }
    const Eigen::MatrixXd ImP = Eigen::MatrixXd::Identity(d, d) - pt.P;
    sigma += ImP.transpose() * pt.nu.asDiagonal() * der.gamma.asDiagonal() * ImP;
    return sigma;
}

} // namespace steadystein
