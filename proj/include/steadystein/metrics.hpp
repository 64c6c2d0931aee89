#pragma once

#include <optional>
#include <string>

#include "steadystein/birth_death.hpp"
#include "steadystein/density.hpp"

namespace steadystein {

/// One metric evaluation with the applicable theorem bound, when there is one.
struct ErrorReport {
    std::string metric;
    double value = 0.0;
    double lambda = 0, mu = 0, alpha = 0;
    long n = 0;
    std::optional<double> bound; // e.g. 190/sqrt(R)
    bool bound_satisfied = true;
};

/// Wasserstein-1 distance: integral of |F_lattice - F_curve| with the pieces
/// between lattice atoms resolved exactly (monotone CDF, single crossing).
double wasserstein1(const LatticeDist& lattice, const DensityCurve& curve);

/// Kolmogorov distance; the sup is attained at a lattice atom approached from
/// either side, so the candidate set {x_k-, x_k} plus curve breakpoints is exact.
double kolmogorov(const LatticeDist& lattice, const DensityCurve& curve);

/// sup_k |pi_k - P(Y in [x_k - delta/2, x_k + delta/2])|.
double pmf_sup_error(const LatticeDist& lattice, const DensityCurve& curve);

/// Relative tail error |P(Y >= z)/P(Xtilde >= z) - 1| at the lattice point
/// x_k with k = k_at_or_below(z). Falls back to a log-space ratio when the
/// curve tail underflows.
double tail_ratio_error(const LatticeDist& lattice, const DensityCurve& curve, double z);

/// |E Xtilde^m - E Y^m| (fluid centering on the lattice side).
double moment_error(const LatticeDist& lattice, const DensityCurve& curve, long m);

} // namespace steadystein
