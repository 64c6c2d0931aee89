#pragma once

#include <cstdint>
#include <stdexcept>

namespace steadystein {

/// Which diffusion coefficient to pair with the piecewise-linear drift.
enum class DiffusionMode { Constant, StateDependent };

/**
 * @brief Parameters of an Erlang-C/Erlang-A queue plus every derived scalar.
 *
 * alpha = 0 selects Erlang-C and requires the stability condition R < n.
 * All derived quantities are computed once at construction; instances are
 * immutable and safe to share across threads.
 */
class QueueParams {
public:
    QueueParams(double lambda, double mu, long n, double alpha);

    double lambda() const { return lambda_; }
    double mu() const { return mu_; }
    long n() const { return n_; }
    double alpha() const { return alpha_; }

    bool is_erlang_c() const { return alpha_ == 0.0; }

    /// Offered load R = lambda/mu.
    double offered_load() const { return R_; }
    /// Utilization rho = R/n.
    double rho() const { return rho_; }
    /// Lattice spacing 1/sqrt(R). This is the scaling used everywhere except
    /// the Halfin-Whitt phase-type material, which scales by 1/sqrt(lambda).
    double delta() const { return delta_; }
    /// Halfin-Whitt spacing 1/sqrt(lambda); kept as a separately named
    /// accessor so the two conventions cannot be mixed up silently.
    double delta_hw() const { return delta_hw_; }
    /// Fluid equilibrium x(infinity).
    double fluid_equilibrium() const { return x_fluid_; }
    /// zeta = delta * (x(infinity) - n); <= 0 iff R <= n.
    double zeta() const { return zeta_; }
    double abs_zeta() const { return zeta_ < 0 ? -zeta_ : zeta_; }
    /// Halfin-Whitt slack beta with n*mu = lambda + beta*sqrt(lambda).
    double beta_hw() const { return (n_ * mu_ - lambda_) * delta_hw_; }

    /// Departure rate d(k) = mu*(k ^ n) + alpha*(k - n)^+.
    double death_rate(long k) const;

    /// Scaled lattice point x_k = delta * (k - x(infinity)).
    double lattice_point(long k) const { return delta_ * (static_cast<double>(k) - x_fluid_); }

    /// Piecewise-linear drift b(x) of the approximating diffusion.
    double drift(double x) const;

    /// Diffusion coefficient a(x); constant mode is 2*mu, state-dependent
    /// mode interpolates delta^2*(lambda + d(k) 1{k>0}) between lattice points.
    double diff_coeff(double x, DiffusionMode mode) const;

    /// Left edge of the lattice in scaled coordinates, x_0 = -delta*x(inf).
    /// Equals -1/delta whenever x(infinity) = R.
    double lattice_left_edge() const { return -delta_ * x_fluid_; }

private:
    double lambda_, mu_, alpha_;
    long n_;
    double R_, rho_, delta_, delta_hw_, x_fluid_, zeta_;
};

/// Unique solution of the flow balance equation
/// lambda = (x ^ n)*mu + (x - n)^+ * alpha.
double fluid_equilibrium(double lambda, double mu, long n, double alpha);

} // namespace steadystein
