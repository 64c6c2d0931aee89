#pragma once

#include <cstdint>
#include <vector>

namespace steadystein {

/// Monte-Carlo point estimate with the provenance needed to reproduce it.
struct SimEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long replications = 0;
    double burn_in = 0.0;
    uint64_t seed = 0;

    static SimEstimate from_replications(const std::vector<double>& rep_means, double burn_in,
                                         uint64_t seed);
};

/// Regularized lower incomplete gamma P(a, x).
double reg_lower_gamma(double a, double x);

/// Survival function of the chi-square distribution with k degrees of freedom.
double chi_square_sf(double x, double dof);

/// Pearson goodness-of-fit statistic of counts against expected counts;
/// returns the p-value (cells with expected < merge_floor are pooled).
double chi_square_gof_pvalue(const std::vector<double>& observed,
                             const std::vector<double>& expected, double merge_floor = 5.0);

/// Binomial pmf useful for the expected counts (computed in log space).
double binomial_pmf(long k, long n, double p);

} // namespace steadystein
