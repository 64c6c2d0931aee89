#include "steadystein/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace steadystein {

namespace {

// int_a^b F_curve(x) dx = [x F(x)]_a^b - int_a^b x nu(x) dx
double integral_of_cdf(const DensityCurve& c, double a, double b, double Fa, double Fb) {
    return b * Fb - a * Fa - c.interval_first_moment(a, b);
}

} // namespace

double wasserstein1(const LatticeDist& lat, const DensityCurve& curve) {
    const auto& pi = lat.probs();
    const long kmax = lat.k_max();

    // |F_lat - F| integrated piecewise; within [x_k, x_{k+1}) the lattice CDF
    // is the constant c and F is monotone, so |F - c| has one sign change.
    double total = 0.0;
    double x_prev = lat.x_of(0);
    double F_prev = curve.cdf(x_prev);

    // left tail: F_lat = 0 below x_0, so the integrand is F itself;
    // int_{-inf}^{x0} F = x0 F(x0) - M1(x0)
    total += x_prev * F_prev - curve.partial_moment(1, x_prev);

    double cum = 0.0;
    for (long k = 0; k <= kmax; ++k) {
        cum += pi[static_cast<size_t>(k)];
        const double a = lat.x_of(k);
        const double b = (k == kmax) ? a : lat.x_of(k + 1);
        if (k == kmax) break;
        const double Fa = (a == x_prev) ? F_prev : curve.cdf(a);
        const double Fb = curve.cdf(b);
        const double c = std::min(cum, 1.0);
        double contrib;
        if (Fb <= c) {
            contrib = c * (b - a) - integral_of_cdf(curve, a, b, Fa, Fb);
        } else if (Fa >= c) {
            contrib = integral_of_cdf(curve, a, b, Fa, Fb) - c * (b - a);
        } else {
            // single crossing x* with F(x*) = c
            double lo = a, hi = b;
            for (int it = 0; it < 80 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (curve.cdf(mid) < c ? lo : hi) = mid;
            }
            const double xs = 0.5 * (lo + hi);
            const double Fs = c;
            contrib = (c * (xs - a) - integral_of_cdf(curve, a, xs, Fa, Fs)) +
                      (integral_of_cdf(curve, xs, b, Fs, Fb) - c * (b - xs));
        }
        total += contrib;
        x_prev = b;
        F_prev = Fb;
    }

    // right tail: F_lat = cum (~1) above x_kmax; int |cum - F| = int (1 - F)
    // up to the truncated lattice mass, which is below every tolerance here.
    const double xk = lat.x_of(kmax);
    const double m1_above = curve.partial_moment_right(1, xk);
    const double sf = curve.sf(xk);
    total += m1_above - xk * sf; // int_{xk}^inf (1 - F) dx
    return total;
}

double kolmogorov(const LatticeDist& lat, const DensityCurve& curve) {
    const auto& pi = lat.probs();
    double sup = 0.0;
    double cum = 0.0;
    for (long k = 0; k <= lat.k_max(); ++k) {
        const double F = curve.cdf(lat.x_of(k));
        sup = std::max(sup, std::abs(F - cum)); // left limit of the lattice CDF
        cum += pi[static_cast<size_t>(k)];
        sup = std::max(sup, std::abs(F - std::min(cum, 1.0)));
        if (cum >= 1.0 - 1e-15 && F >= 1.0 - 1e-15 && lat.x_of(k) > 0) break;
    }
    return sup;
}

double pmf_sup_error(const LatticeDist& lat, const DensityCurve& curve) {
    const auto& pi = lat.probs();
    const double half = 0.5 * lat.params().delta();
    double sup = 0.0;
    for (long k = 0; k <= lat.k_max(); ++k) {
        const double x = lat.x_of(k);
        const double cell = curve.interval_prob(x - half, x + half);
        sup = std::max(sup, std::abs(pi[static_cast<size_t>(k)] - cell));
    }
    return sup;
}

double tail_ratio_error(const LatticeDist& lat, const DensityCurve& curve, double z) {
    const long k = lat.k_at_or_below(z);
    const double xk = lat.x_of(k);
    const double p_lat = lat.tail_prob(xk);
    const double p_curve = curve.sf(xk);
    if (p_lat <= 0.0)
        throw std::domain_error("tail_ratio_error: lattice tail has no mass at z");
    if (p_curve > 0.0 && std::isfinite(p_curve)) return std::abs(p_curve / p_lat - 1.0);
    // curve tail underflowed: report |exp(log ratio) - 1| via logs; the ratio
    // itself is astronomically far from 1, so return a saturated value.
    return std::numeric_limits<double>::infinity();
}

double moment_error(const LatticeDist& lat, const DensityCurve& curve, long m) {
    if (m == 0) return 0.0;
    return std::abs(lat.scaled_moment(m, Centering::Fluid) - curve.moment(m));
}

} // namespace steadystein
