#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "steadystein/queue_params.hpp"

using namespace steadystein;

TEST_SUITE("core_models") {

TEST_CASE("fluid equilibrium branches") {
    CHECK(fluid_equilibrium(3, 1, 5, 0) == doctest::Approx(3.0));
    CHECK(fluid_equilibrium(6, 1, 5, 2) == doctest::Approx(5.5));
    CHECK(fluid_equilibrium(5, 1, 5, 1) == doctest::Approx(5.0)); // both branches agree
    CHECK_THROWS_AS(fluid_equilibrium(5, 1, 5, 0), std::domain_error);
    CHECK_THROWS_AS(fluid_equilibrium(6, 1, 5, 0), std::domain_error);
    CHECK_THROWS_AS(fluid_equilibrium(-1, 1, 5, 1), std::invalid_argument);
}

TEST_CASE("drift boundary values (Erlang-C)") {
    QueueParams p(4.0, 1.0, 5, 0.0);
    CHECK(p.drift(-p.zeta()) == doctest::Approx(p.mu() * p.zeta()).epsilon(1e-14));
    CHECK(p.drift(0.0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("state-dependent coefficient matches both closed forms at k=n") {
    // n=5, R=4, k=5: delta^2 (lambda + 5 mu) must equal mu (2 + delta |zeta|)
    QueueParams p(4.0, 1.0, 5, 0.0);
    const double d = p.delta();
    const double x = p.lattice_point(5);
    const double via_rates = d * d * (p.lambda() + p.death_rate(5));
    const double via_form = p.mu() * (2.0 + d * p.abs_zeta());
    CHECK(std::abs(via_rates - via_form) < 1e-12);
    CHECK(std::abs(p.diff_coeff(x, DiffusionMode::StateDependent) - via_form) < 1e-12);
}

TEST_CASE("lattice consistency: b = delta(lambda - d(k)), a = delta^2(lambda + d(k) 1{k>0})") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const long n = 1 + static_cast<long>(u(gen) * 200);
        const double alpha = trial % 3 == 0 ? 0.0 : 0.25 + 2.0 * u(gen);
        double R = alpha == 0.0 ? (0.2 + 0.79 * u(gen)) * static_cast<double>(n)
                                : (0.3 + 1.5 * u(gen)) * static_cast<double>(n);
        if (R < 0.05) R = 0.05;
        const double mu = 0.5 + 2.0 * u(gen);
        QueueParams p(R * mu, mu, n, alpha);
        const double d = p.delta();
        for (long k : {0L, 1L, n / 2, n, n + 3, 2 * n}) {
            const double x = p.lattice_point(k);
            const double b_gen = d * (p.lambda() - p.death_rate(k));
            CHECK(p.drift(x) == doctest::Approx(b_gen).epsilon(1e-12));
            if (alpha == 0.0) {
                const double a_gen = d * d * (p.lambda() + (k > 0 ? p.death_rate(k) : 0.0));
                CHECK(p.diff_coeff(x, DiffusionMode::StateDependent) ==
                      doctest::Approx(a_gen).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("drift monotone non-increasing; coefficient continuous and >= mu") {
    using P = std::tuple<double, long, double>;
    for (auto [lam, n, alpha] : {P(4, 5, 0.0), P(12, 10, 1.0), P(9, 10, 0.5),
                                 P(488.94, 500, 0.0)}) {
        QueueParams p(lam, 1.0, n, alpha);
        double prev = 1e300;
        for (int i = 0; i <= 400; ++i) {
            const double x = -12.0 + 24.0 * i / 400.0;
            const double b = p.drift(x);
            CHECK(b <= prev + 1e-12);
            prev = b;
            if (alpha == 0.0) {
                const double a = p.diff_coeff(x, DiffusionMode::StateDependent);
                CHECK(a >= p.mu() - 1e-12);
            }
        }
        if (alpha == 0.0) {
            for (double bp : {p.lattice_left_edge(), -p.zeta()}) {
                const double left = p.diff_coeff(bp - 1e-9, DiffusionMode::StateDependent);
                const double right = p.diff_coeff(bp + 1e-9, DiffusionMode::StateDependent);
                CHECK(std::abs(left - right) < 1e-6); // 1e-9 kink step * slope ~ delta
            }
            const double bp = -p.zeta();
            CHECK(std::abs(p.diff_coeff(bp, DiffusionMode::StateDependent) -
                           p.mu() * (2.0 + p.delta() * p.abs_zeta())) < 1e-12);
        }
    }
}

TEST_CASE("the two lattice-spacing conventions stay distinct") {
    QueueParams p(8.0, 2.0, 10, 1.0); // R = 4, lambda = 8
    CHECK(p.delta() == doctest::Approx(0.5));
    CHECK(p.delta_hw() == doctest::Approx(1.0 / std::sqrt(8.0)));
    CHECK(p.delta() != p.delta_hw());
}

} // TEST_SUITE
