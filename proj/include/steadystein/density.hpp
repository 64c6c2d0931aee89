#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "steadystein/queue_params.hpp"

namespace steadystein {

namespace detail {
class Piece;
}

/**
 * @brief Normalized stationary density of the 1-d diffusion approximation.
 *
 * Built from the generic form nu(x) ~ (2/a(x)) exp(int_0^x 2b/a). Gaussian
 * and exponential pieces are handled in closed form (including the infinite
 * tails); the middle piece of the Erlang-C state-dependent coefficient is
 * integrated by adaptive Simpson with panels split at the breakpoints.
 */
class DensityCurve {
public:
    static DensityCurve build(const QueueParams& params, DiffusionMode mode);

    const QueueParams& params() const { return params_; }
    DiffusionMode mode() const { return mode_; }

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;
    /// P(Y >= x), computed from the right so deep-tail values keep relative accuracy.
    double sf(double x) const;
    /// E[Y^m] with analytic tail recursions, m <= 20.
    double moment(long m) const;
    /// int_{-inf}^{x} y^j nu(y) dy.
    double partial_moment(long j, double x) const;
    /// int_{x}^{inf} y^j nu(y) dy (right-anchored; no cancellation in the tail).
    double partial_moment_right(long j, double x) const;
    /// P(Y in [lo, hi]), accurate for narrow cells.
    double interval_prob(double lo, double hi) const;
    /// int_lo^hi y nu(y) dy.
    double interval_first_moment(double lo, double hi) const;

    /// Exact supremum of the density (mode candidates are known analytically).
    double sup_density() const;

    /// Piece boundaries (kinks of the density), ascending.
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    double log_kappa() const { return log_kappa_; }

    double drift(double x) const { return params_.drift(x); }
    double coeff(double x) const { return params_.diff_coeff(x, mode_); }

    DensityCurve(const DensityCurve&);
    DensityCurve& operator=(const DensityCurve&) = delete;
    DensityCurve(DensityCurve&&) noexcept;
    ~DensityCurve();

private:
    DensityCurve(QueueParams params, DiffusionMode mode);

    QueueParams params_;
    DiffusionMode mode_;
    std::vector<std::unique_ptr<detail::Piece>> pieces_;
    std::vector<double> mass_below_; // normalized mass strictly below piece i
    std::vector<char> skip_;         // pieces whose mass is below the log-domain floor
    std::vector<double> breakpoints_;
    double log_kappa_ = 0.0;

    size_t piece_index(double x) const;
};

namespace detail {
/// Adaptive Simpson on [a,b]; absolute tolerance per panel.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 48);
} // namespace detail

} // namespace steadystein
