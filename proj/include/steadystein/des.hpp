#pragma once

#include <map>
#include <vector>

#include "steadystein/phase_type.hpp"
#include "steadystein/stats.hpp"

namespace steadystein {

struct DesConfig {
    double horizon = 1e4;   // simulated time per replication after burn-in
    double burn_in = 500.0; // warm-up time, excluded from every statistic
    long replications = 8;
    uint64_t seed = 0;
    int jobs = 0;
    double ssc_sample_spacing = 5.0; // time between queue-composition samples
};

/// Queue-composition samples: counts[i][ell][q] = number of samples with
/// total queue length ell in which q phase-i customers were waiting.
struct SscSamples {
    long dim = 0;
    std::map<long, std::vector<std::vector<long>>> by_queue_length;
    long total_samples = 0;
    // per-coordinate replication means of delta*Q_i - p_i (e^T Xtilde)^+
    std::vector<std::vector<double>> dev_rep_means;
    double dev2_mean = 0.0;  // E|delta Q - p (e^T Xtilde)^+|^2
    double tplus_mean = 0.0; // E (e^T Xtilde)^+
    double delta = 0.0;
};

struct DesResult {
    SimEstimate abs_scaled_total; // E|Ttilde|, Ttilde = (T - n)/sqrt(lambda)
    SimEstimate scaled_total_m2;  // E[Ttilde^2]
    std::vector<SimEstimate> phase_mean; // E[Xtilde_i]
    SscSamples ssc;
    long long events = 0;
    bool flow_conserved = true; // arrivals = departures + abandons + delta(in-system)
};

/// Event-driven simulation of M/Ph/n+M (FCFS, exponential patience).
DesResult des_simulate(const PhaseType& pt, double lambda, long n, double alpha,
                       const DesConfig& cfg);

struct SscTestItem {
    long phase = 0;
    long queue_length = 0;
    long samples = 0;
    double p_value = 1.0;
};

struct SscTestReport {
    bool conclusive = false;  // >= min_total samples available
    bool passed = true;       // every retained stratum above the level
    std::vector<SscTestItem> items;
    std::vector<double> dev_mean;     // mean of delta*Q - p (e^T Xtilde)^+
    std::vector<double> dev_se;
    double ssc_moment_constant = 0.0; // E|dQ - p t^+|^2 / (delta E t^+)
};

/// Chi-square goodness of fit of Q_i | queue length = ell against
/// Binomial(ell, p_i), per phase and stratum; strata below min_stratum
/// samples are skipped, level is the per-test significance threshold.
SscTestReport ssc_binomial_test(const SscSamples& ssc, const Eigen::VectorXd& p,
                                long min_total = 10000, long min_stratum = 500,
                                double level = 0.01);

} // namespace steadystein
