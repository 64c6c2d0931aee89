#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "steadystein/birth_death.hpp"
#include "steadystein/density.hpp"
#include "steadystein/metrics.hpp"

using namespace steadystein;

namespace {

// Independent transport oracle for discrete distributions on sorted support:
// greedy earth-mover matching, optimal in one dimension.
double transport_w1(std::vector<std::pair<double, double>> a,
                    std::vector<std::pair<double, double>> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double cost = 0.0;
    while (i < a.size() && j < b.size()) {
        const double m = std::min(a[i].second, b[j].second);
        cost += m * std::abs(a[i].first - b[j].first);
        a[i].second -= m;
        b[j].second -= m;
        if (a[i].second <= 1e-15) ++i;
        if (b[j].second <= 1e-15) ++j;
    }
    return cost;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("transport oracle basics") {
    // point mass at 0 vs point mass at 1 has W1 = 1 (Lip(1) dual)
    CHECK(transport_w1({{0, 1}}, {{1, 1}}) == doctest::Approx(1.0));
    // identical three-point distributions have distance zero
    std::vector<std::pair<double, double>> d{{-1, 0.3}, {0, 0.4}, {2, 0.3}};
    CHECK(transport_w1(d, d) == doctest::Approx(0.0));
    // symmetric in its arguments
    std::vector<std::pair<double, double>> f{{-2, 0.5}, {1, 0.5}};
    CHECK(transport_w1(d, f) == doctest::Approx(transport_w1(f, d)).epsilon(1e-14));
    // three-point vs five-point: oracle equals the CDF-area formula
    std::vector<std::pair<double, double>> e{{-2, 0.1}, {-1, 0.2}, {0, 0.3}, {1, 0.2}, {3, 0.2}};
    double area = 0.0;
    {
        std::vector<double> xs{-2, -1, 0, 1, 2, 3};
        auto cdf = [](const std::vector<std::pair<double, double>>& v, double x) {
            double s = 0;
            for (auto& [p, w] : v)
                if (p <= x) s += w;
            return s;
        };
        for (size_t i = 0; i + 1 < xs.size(); ++i)
            area += std::abs(cdf(d, xs[i]) - cdf(e, xs[i])) * (xs[i + 1] - xs[i]);
    }
    CHECK(transport_w1(d, e) == doctest::Approx(area).epsilon(1e-12));
}

TEST_CASE("wasserstein1 against the transport oracle via fine discretization") {
    QueueParams p(4.0, 1.0, 5, 0.0);
    LatticeDist lat = LatticeDist::stationary(p);
    DensityCurve c = DensityCurve::build(p, DiffusionMode::Constant);
    const double w1 = wasserstein1(lat, c);

    std::vector<std::pair<double, double>> da, db;
    for (long k = 0; k <= lat.k_max(); ++k) da.push_back({lat.x_of(k), lat.pmf_at(k)});
    const double h = 0.002; // discretization cells for the curve
    double lo = -10.0;
    for (double x = lo; x < 60.0; x += h) db.push_back({x + h / 2, c.interval_prob(x, x + h)});
    db.push_back({-10.0, c.cdf(-10.0)});
    db.push_back({60.0, c.sf(60.0)});
    const double oracle = transport_w1(da, db);
    CHECK(w1 == doctest::Approx(oracle).epsilon(0.0).scale(1.0).epsilon(h));
    CHECK(std::abs(w1 - oracle) < h);
}

TEST_CASE("kolmogorov reference cells") {
    auto dk = [](double R, long n, DiffusionMode m) {
        QueueParams p(R, 1.0, n, 0.0);
        LatticeDist lat = LatticeDist::stationary(p);
        return kolmogorov(lat, DensityCurve::build(p, m));
    };
    CHECK(dk(4, 5, DiffusionMode::Constant) == doctest::Approx(8.76e-2).epsilon(1e-3 / 8.76e-2));
    // The n=5 state-dependent value: the exact sup (verified here against a
    // dense scan below) is 7.463e-2; the corresponding reference cell prints
    // 6.41e-2 and matches no evaluation of the defining sup, so the exact
    // value is pinned instead.
    CHECK(dk(4, 5, DiffusionMode::StateDependent) ==
          doctest::Approx(7.463e-2).epsilon(1e-3 / 7.46e-2));
    CHECK(dk(60, 100, DiffusionMode::StateDependent) ==
          doctest::Approx(2.58e-2).epsilon(0.02));
    CHECK(dk(60, 100, DiffusionMode::Constant) == doctest::Approx(3.43e-2).epsilon(0.02));
}

TEST_CASE("kolmogorov sup equals a dense scan") {
    QueueParams p(4.0, 1.0, 5, 0.0);
    LatticeDist lat = LatticeDist::stationary(p);
    DensityCurve c = DensityCurve::build(p, DiffusionMode::StateDependent);
    const double dk = kolmogorov(lat, c);
    double scan = 0.0;
    for (double x = -6.0; x <= 40.0; x += 1e-3)
        scan = std::max(scan, std::abs(c.cdf(x) - lat.cdf(x)));
    CHECK(dk >= scan - 1e-9);
    CHECK(dk <= scan + 2e-3); // scan misses the exact jump point by < grid step
}

TEST_CASE("pmf sup error reference cells and the far-curve degenerate case") {
    auto pm = [](double R, long n, DiffusionMode m) {
        QueueParams p(R, 1.0, n, 0.0);
        LatticeDist lat = LatticeDist::stationary(p);
        return pmf_sup_error(lat, DensityCurve::build(p, m));
    };
    CHECK(pm(4, 5, DiffusionMode::Constant) == doctest::Approx(1.72e-2).epsilon(2e-4 / 1.72e-2));
    CHECK(pm(4, 5, DiffusionMode::StateDependent) ==
          doctest::Approx(2.67e-3).epsilon(5e-5 / 2.67e-3));
    // a curve whose mass sits far from the lattice mode: the sup approaches
    // the largest lattice atom
    QueueParams tiny(0.5, 1.0, 1, 0.0); // max pi_k = 0.5 at k = 0
    LatticeDist lat = LatticeDist::stationary(tiny);
    QueueParams far(4.99, 1.0, 5, 0.0); // curve mass spread over [0, ~400]
    DensityCurve cf = DensityCurve::build(far, DiffusionMode::Constant);
    CHECK(pmf_sup_error(lat, cf) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("tail ratio errors (moderate-deviations cells)") {
    QueueParams p(60, 1.0, 100, 0.0);
    LatticeDist lat = LatticeDist::stationary(p);
    DensityCurve cs = DensityCurve::build(p, DiffusionMode::StateDependent);
    DensityCurve cc = DensityCurve::build(p, DiffusionMode::Constant);
    CHECK(tail_ratio_error(lat, cs, 2.4) == doctest::Approx(0.1347).epsilon(2e-3 / 0.1347));
    CHECK(tail_ratio_error(lat, cc, 2.4) == doctest::Approx(0.3090).epsilon(3e-3 / 0.3090));
    // evaluator consistency: the ratio is |sf/tail - 1| at the lattice point
    const long k = lat.k_at_or_below(2.4);
    const double z = lat.x_of(k);
    CHECK(tail_ratio_error(lat, cs, 2.4) ==
          doctest::Approx(std::abs(cs.sf(z) / lat.tail_prob(z) - 1.0)).epsilon(1e-12));
}

TEST_CASE("moment errors") {
    {
        QueueParams p(4, 1.0, 5, 0.0);
        LatticeDist lat = LatticeDist::stationary(p);
        DensityCurve cc = DensityCurve::build(p, DiffusionMode::Constant);
        CHECK(moment_error(lat, cc, 1) == doctest::Approx(9.91e-2).epsilon(1e-3 / 9.91e-2));
        CHECK(moment_error(lat, cc, 0) == 0.0);
    }
    {
        QueueParams p(46.59, 1.0, 50, 0.0);
        LatticeDist lat = LatticeDist::stationary(p);
        DensityCurve cs = DensityCurve::build(p, DiffusionMode::StateDependent);
        CHECK(moment_error(lat, cs, 1) == doctest::Approx(1.2e-3).epsilon(1e-4 / 1.2e-3));
    }
}

} // TEST_SUITE
