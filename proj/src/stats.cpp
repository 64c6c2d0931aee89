#include "steadystein/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace steadystein {

SimEstimate SimEstimate::from_replications(const std::vector<double>& rep_means, double burn_in,
                                           uint64_t seed) {
    if (rep_means.size() < 2)
        throw std::invalid_argument("SimEstimate: need at least two replications");
    SimEstimate e;
    e.replications = static_cast<long>(rep_means.size());
    e.burn_in = burn_in;
    e.seed = seed;
    double mean = 0.0;
    for (double v : rep_means) mean += v;
    mean /= static_cast<double>(rep_means.size());
    double var = 0.0;
    for (double v : rep_means) var += (v - mean) * (v - mean);
    var /= static_cast<double>(rep_means.size() - 1);
    e.value = mean;
    e.std_error = std::sqrt(var / static_cast<double>(rep_means.size()));
    return e;
}

// Series / continued-fraction evaluation of P(a,x), standard approach.
double reg_lower_gamma(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("reg_lower_gamma: bad arguments");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term;
        for (int n = 1; n < 500; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Lentz continued fraction for Q(a,x)
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

double chi_square_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    return 1.0 - reg_lower_gamma(0.5 * dof, 0.5 * x);
}

double chi_square_gof_pvalue(const std::vector<double>& observed,
                             const std::vector<double>& expected, double merge_floor) {
    if (observed.size() != expected.size())
        throw std::invalid_argument("chi_square_gof_pvalue: size mismatch");
    // pool sparse cells so the chi-square approximation is trustworthy
    std::vector<double> obs, exp;
    double po = 0.0, pe = 0.0;
    for (size_t i = 0; i < observed.size(); ++i) {
        po += observed[i];
        pe += expected[i];
        if (pe >= merge_floor) {
            obs.push_back(po);
            exp.push_back(pe);
            po = pe = 0.0;
        }
    }
    if (pe > 0.0) {
        if (!exp.empty()) {
            obs.back() += po;
            exp.back() += pe;
        } else {
            obs.push_back(po);
            exp.push_back(pe);
        }
    }
    if (exp.size() < 2) return 1.0; // nothing to test
    double stat = 0.0;
    for (size_t i = 0; i < exp.size(); ++i) {
        const double d = obs[i] - exp[i];
        stat += d * d / exp[i];
    }
    return chi_square_sf(stat, static_cast<double>(exp.size() - 1));
}

double binomial_pmf(long k, long n, double p) {
    if (k < 0 || k > n) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const double lp = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                      k * std::log(p) + (n - k) * std::log1p(-p);
    return std::exp(lp);
}

} // namespace steadystein
