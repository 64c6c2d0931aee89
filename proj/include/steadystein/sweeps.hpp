#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "steadystein/queue_params.hpp"

namespace steadystein {

struct SweepPoint {
    double lambda, mu, alpha;
    long n;
};

/// Erlang-C grid with 1 <= R < n, n up to 1000; at least min_points entries.
std::vector<SweepPoint> erlang_c_grid(size_t min_points = 200);
/// Smaller Erlang-C grid for the heavier per-point suites.
std::vector<SweepPoint> erlang_c_small_grid(size_t min_points = 100);
/// Erlang-A grid mixing under/overloaded points, alpha/mu in {0.5, 1, 2}.
std::vector<SweepPoint> erlang_a_grid(size_t min_points = 100);

/// Ordered parallel map: fn(i) evaluated for i in [0, count) on `jobs` threads.
void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& fn);

/// One verification suite outcome; `rows` are JSON-lines for the report.
struct SuiteResult {
    std::string name;
    bool passed = true;
    std::vector<std::string> rows;
    std::string summary;
};

SuiteResult verify_bar(int jobs);
SuiteResult verify_moment_bounds(int jobs);
SuiteResult verify_gradient_bounds(int jobs);
SuiteResult verify_mgf(int jobs);
SuiteResult verify_density_bounds(int jobs);
SuiteResult verify_theorem_bounds(int jobs, bool erlang_a_trend = true);
SuiteResult verify_ssc(const std::string& preset, double samples, uint64_t seed, int jobs);

} // namespace steadystein
