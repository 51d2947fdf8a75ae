#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fluctwork/average.hpp"
#include "fluctwork/bounds.hpp"
#include "fluctwork/errors.hpp"

using namespace fluctwork;

namespace {

const double kLn2 = std::log(2.0);
const InverseTemperature kHalf{0.5};
const InverseTemperature kBeta1{1.0};

}  // namespace

TEST_CASE("mu_of_wmin examples") {
    CHECK(mu_of_wmin(-1.0, 3.0, -1.0, kHalf) == doctest::Approx(0.0757656854799805).epsilon(1e-13));
    CHECK(mu_of_wmin(-kLn2, kLn2, 0.0, kBeta1) == doctest::Approx(-0.231049060186648).epsilon(1e-13));
    CHECK(mu_of_wmin(1.0, 3.0, -1.0, kHalf) == 1.0);
    CHECK_THROWS_AS(mu_of_wmin(1.5, 3.0, -1.0, kHalf), ValidationError);
    CHECK_THROWS_AS(mu_of_wmin(-1.0, 0.5, -1.0, kHalf), ValidationError);
}

TEST_CASE("mu_of_wmin is increasing") {
    double prev = -1e300;
    for (double w = -30.0; w < 1.0; w += 0.05) {
        const double m = mu_of_wmin(w, 3.0, -1.0, kHalf);
        CHECK(m > prev);
        CHECK(m <= 1.0);
        prev = m;
    }
}

TEST_CASE("solve_wmin examples") {
    const AverageQuery q{3.0, 0.0, -1.0, kHalf};
    CHECK(solve_wmin(q) == doctest::Approx(-1.150068497353748).epsilon(1e-9));
    CHECK(pmax_avg(q) == doctest::Approx(0.277120365142666).epsilon(1e-9));
    CHECK(pmax_avg({kLn2, -kLn2 / 3.0, 0.0, kBeta1}) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(std::abs(solve_wmin({50.0, -1.0, -1.0, kHalf}) + 1.0) < 1e-8);
}

TEST_CASE("solver errors") {
    CHECK_THROWS_AS(solve_wmin({3.0, 1.0, -1.0, kHalf}), InfeasibleQuery);
    CHECK_THROWS_AS(solve_wmin({3.0, 2.0, -1.0, kHalf}), InfeasibleQuery);
    CHECK_THROWS_AS(solve_wmin({0.5, 0.0, -1.0, kHalf}), InfeasibleQuery);
    SolverConfig tight;
    tight.max_iterations = 3;
    CHECK_THROWS_AS(solve_wmin({3.0, 0.0, -1.0, kHalf}, tight), ConvergenceError);
}

TEST_CASE("round trip on a grid") {
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double lambda = 1.1 + 0.3 * i;
            const double mu = 0.95 - 0.5 * j;
            const AverageQuery q{lambda, mu, -1.0, kHalf};
            const double w = solve_wmin(q);
            CHECK(std::abs(mu_of_wmin(w, lambda, -1.0, kHalf) - mu) < 1e-8);
            CHECK(w <= mu);
            // the optimum equals the W_min-constrained bound at the solved W_min
            CHECK(pmax_avg(q) == doctest::Approx(bound_with_wmin({lambda, w, -1.0, kHalf})).epsilon(1e-12));
        }
    }
}

TEST_CASE("pmax_avg decreases with mu and stays below the unconstrained bound") {
    double prev = 1.0;
    for (double mu = -8.0; mu < 0.99; mu += 0.1) {
        const double p = pmax_avg({3.0, mu, -1.0, kHalf});
        CHECK(p < prev);
        CHECK(p <= bound_with_wmin({3.0, kNoMinimum, -1.0, kHalf}));
        prev = p;
    }
}

TEST_CASE("grid defaults") {
    const auto g = GridSpec::defaults_for({kLn2, -kLn2 / 3.0, 0.0, InverseTemperature(2.0)});
    CHECK(g.w_lo == doctest::Approx(-5.0));
    CHECK(g.step == doctest::Approx(0.005));
}

TEST_CASE("oracle reproduces the two-point optimum") {
    const AverageQuery q{kLn2, -kLn2 / 3.0, 0.0, kBeta1};
    const auto r = oracle_max_tail(q, GridSpec::defaults_for(q), 2);
    CHECK(std::abs(r.value - 1.0 / 3.0) < 0.02);
    CHECK(r.value <= 1.0 / 3.0 + 1e-9);
    CHECK(r.effective_support.size() == 2);
    CHECK(r.candidates > 0);
    CHECK(r.grid_points > 1000);
    double mass = 0.0;
    for (const Atom& a : r.support) mass += a.prob;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("oracle on a grid containing the optimal atoms is exact") {
    const AverageQuery q{kLn2, -kLn2 / 3.0, 0.0, kBeta1};
    const auto r = oracle_max_tail(q, {-kLn2, kLn2 / 40.0});
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("oracle never beats the closed form") {
    for (double mu : {-2.0, -0.5, 0.0, 0.5}) {
        const AverageQuery q{3.0, mu, -1.0, kHalf};
        const auto r = oracle_max_tail(q, {-12.0, 0.05});
        CHECK(r.value <= pmax_avg(q) + 1e-9);
        CHECK(r.value > pmax_avg(q) - 0.02);
    }
}

TEST_CASE("oracle reports infeasible grids") {
    const AverageQuery q{kLn2, -kLn2 / 3.0, 0.0, kBeta1};
    // every grid point sits above -dF, so no law meets the identity
    CHECK_THROWS_AS(oracle_max_tail(q, {0.1, 0.1}), InfeasibleQuery);
}

TEST_CASE("oracle is deterministic across thread counts") {
    const AverageQuery q{3.0, 0.0, -1.0, kHalf};
    const auto a = oracle_max_tail(q, {-8.0, 0.05}, 1);
    const auto b = oracle_max_tail(q, {-8.0, 0.05}, 4);
    CHECK(a.value == b.value);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.support[i] == b.support[i]);
}
