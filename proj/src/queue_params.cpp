#include "steadystein/queue_params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace steadystein {

double fluid_equilibrium(double lambda, double mu, long n, double alpha) {
    if (!(lambda > 0.0) || !(mu > 0.0) || n < 1 || alpha < 0.0)
        throw std::invalid_argument("fluid_equilibrium: need lambda>0, mu>0, n>=1, alpha>=0");
    const double R = lambda / mu;
    const double nd = static_cast<double>(n);
    if (R >= nd) {
        if (alpha == 0.0)
            throw std::domain_error("fluid_equilibrium: Erlang-C requires R < n (stability)");
        return nd + (lambda - nd * mu) / alpha;
    }
    return R;
}

QueueParams::QueueParams(double lambda, double mu, long n, double alpha)
    : lambda_(lambda), mu_(mu), alpha_(alpha), n_(n) {
    x_fluid_ = steadystein::fluid_equilibrium(lambda, mu, n, alpha); // validates
    R_ = lambda_ / mu_;
    rho_ = R_ / static_cast<double>(n_);
    delta_ = 1.0 / std::sqrt(R_);
    delta_hw_ = 1.0 / std::sqrt(lambda_);
    zeta_ = delta_ * (x_fluid_ - static_cast<double>(n_));
}

double QueueParams::death_rate(long k) const {
    if (k < 0) throw std::invalid_argument("death_rate: k >= 0 required");
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n_);
    return mu_ * std::min(kd, nd) + alpha_ * std::max(kd - nd, 0.0);
}

double QueueParams::drift(double x) const {
    // b(x) = ((x+zeta)^- - zeta^-)*mu - ((x+zeta)^+ - zeta^+)*alpha
    const double u = x + zeta_;
    const double um = u < 0 ? -u : 0.0;
    const double up = u > 0 ? u : 0.0;
    const double zm = zeta_ < 0 ? -zeta_ : 0.0;
    const double zp = zeta_ > 0 ? zeta_ : 0.0;
    return (um - zm) * mu_ - (up - zp) * alpha_;
}

double QueueParams::diff_coeff(double x, DiffusionMode mode) const {
    if (mode == DiffusionMode::Constant) return 2.0 * mu_;
    // State-dependent: linear interpolation of delta^2*(lambda + d(k) 1{k>0})
    // through the lattice. Breakpoints sit at the k=0 lattice point and at
    // -zeta (the k=n point); the coefficient is clamped flat outside.
    const double left = lattice_left_edge();
    if (x <= left) return delta_ * delta_ * lambda_; // = mu
    const double mzeta = -zeta_;
    if (x <= mzeta) {
        // d = mu*k, k = x/delta + x(inf)
        return mu_ * (1.0 + delta_ * delta_ * x_fluid_ + delta_ * x);
    }
    // d = mu*n + alpha*(k-n), k-n = (x + zeta)/delta
    return mu_ * (1.0 + delta_ * delta_ * static_cast<double>(n_)) + alpha_ * delta_ * (x + zeta_);
}

} // namespace steadystein
