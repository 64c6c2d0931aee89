#pragma once

#include <functional>
#include <string>
#include <vector>

#include "steadystein/birth_death.hpp"
#include "steadystein/density.hpp"

namespace steadystein {

/**
 * @brief Test functions h for the Poisson equation. PiecewiseLinear covers
 * the Lip(1) sample family (slopes in [-1,1]); Indicator drives the
 * Kolmogorov-metric solutions; Monomial the higher-moment checks.
 */
class TestFn {
public:
    static TestFn linear();                       // h(x) = x
    static TestFn indicator(double a);            // h = 1_{(-inf, a]}
    static TestFn abs_kink(double c);             // h(x) = |x - c|
    static TestFn zigzag(double half_width);      // Lip(1) kinks at +-half_width
    static TestFn monomial(long m);               // h(x) = x^m

    enum class Kind { PiecewiseLinear, Indicator, Monomial };
    Kind kind() const { return kind_; }
    double indicator_at() const { return a_; }
    long monomial_degree() const { return m_; }

    double operator()(double x) const;
    /// Derivative where it exists (one-sided at kinks / the indicator jump).
    double derivative(double x) const;

    /// E[h(Y)] and the partial integrals int h dnu needed by the Poisson solution.
    double expectation(const DensityCurve& c) const;
    double partial_left(const DensityCurve& c, double x) const;  // int_{-inf}^x h dnu
    double partial_right(const DensityCurve& c, double x) const; // int_x^{inf} h dnu

    std::string name() const;

private:
    TestFn() = default;
    Kind kind_ = Kind::PiecewiseLinear;
    double a_ = 0.0; // indicator location
    long m_ = 1;     // monomial degree
    std::vector<double> kinks_;  // ascending
    std::vector<double> slopes_; // size kinks_.size() + 1
    double h_at_zero_ = 0.0;
};

/**
 * @brief Solution of G_Y f = E h(Y) - h built from the closed integral forms.
 *
 * f' uses the left-anchored integral for x <= 0 and the right-anchored one
 * for x > 0 (the two are equal; the split avoids cancellation in the tails).
 * The referenced DensityCurve must outlive the solution object.
 */
class PoissonSolution {
public:
    PoissonSolution(const DensityCurve& curve, TestFn h);

    double expectation() const { return Eh_; }
    const TestFn& h() const { return h_; }

    double fprime(double x) const;
    /// Left-anchored and right-anchored integral forms, for cross-checking.
    double fprime_left_form(double x) const;
    double fprime_right_form(double x) const;
    double fsecond(double x) const; // from the rearranged ODE
    double fthird(double x) const;  // where it exists (away from kinks)

    /// |b f' + (a/2) f'' - (E h - h)| with f'' from a centered difference of
    /// f'; this is the honest check that f' actually solves the ODE.
    double ode_residual(double x) const;

private:
    const DensityCurve& curve_;
    TestFn h_;
    double Eh_;
};

PoissonSolution solve_poisson(const DensityCurve& curve, const TestFn& h);

/// Sum_k pi_k [lambda (f(x_{k+1}) - f(x_k)) + d(k)(f(x_{k-1}) - f(x_k))].
double bar_residual(const LatticeDist& lattice, const std::function<double(double)>& f);

/// Same residual for f(x) = x^m with the lattice jumps expanded binomially,
/// which avoids the cancellation of differencing large powers directly.
double bar_residual_monomial(const LatticeDist& lattice, long m);

enum class GradientSuite { WassersteinC, KolmogorovC, KolmogorovA, WassersteinA };

struct GradientBoundReport {
    std::string suite;
    bool passed = true;
    double max_slack = -1e300; // max over checks of value - bound (explicit bounds only)
    double worst_x = 0.0;
    std::string worst_item;
    double max_ode_residual = 0.0;
    // WassersteinA has no explicit constants: report the empirical ones instead
    std::vector<std::pair<std::string, double>> empirical_constants;
};

/// Verifies the explicit-constant derivative bounds of the named suite on a
/// 200-point grid per drift piece (plus both sides of every kink).
GradientBoundReport check_gradient_bounds(const QueueParams& params, GradientSuite suite);

struct MgfBoundReport {
    double gamma = 0.0;
    double lhs_tilted = 0.0;   // E[e^{(r - 1/gamma) W} 1(W >= -zeta)]
    double lhs_full = 0.0;     // E[e^{r W} 1(W >= -zeta)]
    double shape_tilted = 0.0; // gamma * e^{2 zeta^2/(2 + delta |zeta|)}
    double shape_full = 0.0;   // (1/delta^2)(1/|zeta| + delta)^3 * e^{...}
    double c_tilted = 0.0;     // lhs/shape: the empirical constant
    double c_full = 0.0;
};

/// Erlang-C only; requires rho >= 0.1 and gamma > (2 + delta |zeta|)/(2 |zeta|).
MgfBoundReport check_mgf_bound(const LatticeDist& lattice, double gamma);

} // namespace steadystein
