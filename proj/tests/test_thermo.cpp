#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fluctwork/errors.hpp"
#include "fluctwork/thermo.hpp"

using namespace fluctwork;

namespace {
const InverseTemperature kBeta1{1.0};
}

TEST_CASE("partition function") {
    CHECK(partition_function(Spectrum{0.0}, kBeta1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(partition_function(Spectrum{0.0, 1.0}, kBeta1) ==
          doctest::Approx(1.36787944117144232).epsilon(1e-14));
    CHECK(partition_function(Spectrum{0.0, 0.0}, InverseTemperature(2.0)) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("partition sums do not overflow for large beta*E") {
    const Spectrum s{-700.0, -699.0};
    const double lz = log_partition_function(s, kBeta1);
    CHECK(std::isfinite(lz));
    CHECK(lz == doctest::Approx(700.0 + std::log1p(std::exp(-1.0))).epsilon(1e-14));
    CHECK(free_energy(s, kBeta1) == doctest::Approx(-lz).epsilon(1e-14));
}

TEST_CASE("free energy") {
    CHECK(free_energy(Spectrum{0.0}, InverseTemperature(3.7)) == 0.0);
    CHECK(free_energy(Spectrum{0.0, 0.0}, kBeta1) == doctest::Approx(-0.693147180559945309).epsilon(1e-14));
    CHECK(free_energy(Spectrum{0.0, 1.0}, kBeta1) == doctest::Approx(-0.313261687518222834).epsilon(1e-14));
}

TEST_CASE("two-level free energy matches -(1/b) ln(exp(-bE) + 1)") {
    for (double e : {-3.0, -0.2, 0.0, 0.5, 4.0}) {
        const InverseTemperature b(0.7);
        CHECK(free_energy(Spectrum{0.0, e}, b) == doctest::Approx(-std::log(std::exp(-0.7 * e) + 1.0) / 0.7));
    }
}

TEST_CASE("gibbs probabilities") {
    const auto sym = gibbs_probabilities(Spectrum{0.0, 0.0}, kBeta1);
    CHECK(sym[0] == 0.5);
    CHECK(sym[1] == 0.5);
    const auto p = gibbs_probabilities(Spectrum{0.0, 1.0}, kBeta1);
    CHECK(p[0] == doctest::Approx(0.731058578630004879).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.268941421369995121).epsilon(1e-14));
    CHECK_THROWS_AS(InverseTemperature(0.0), ValidationError);
    CHECK_THROWS_AS(InverseTemperature(-1.0), ValidationError);
    CHECK_THROWS_AS(InverseTemperature(NAN), ValidationError);
}

TEST_CASE("spectrum validation") {
    CHECK_THROWS_AS(Spectrum(std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(Spectrum({0.0, INFINITY}), ValidationError);
    CHECK_THROWS_AS(Spectrum({NAN}), ValidationError);
}

TEST_CASE("shift invariance of Gibbs state and free energy") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> e(-5, 5), b(0.1, 5), c(-20, 20);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> levels(1 + trial % 5);
        for (double& x : levels) x = e(rng);
        const Spectrum s(levels);
        const InverseTemperature beta(b(rng));
        const double shift = c(rng);
        const auto p = gibbs_probabilities(s, beta);
        const auto q = gibbs_probabilities(s.shifted(shift), beta);
        double sum = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            CHECK(std::abs(p[k] - q[k]) < 1e-12);
            CHECK(p[k] > 0.0);
            sum += p[k];
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(std::abs(free_energy(s.shifted(shift), beta) - free_energy(s, beta) - shift) < 1e-10);
    }
}

TEST_CASE("merge_atoms") {
    const auto a = merge_atoms({{0.0, 0.5}, {0.0, 0.5}});
    REQUIRE(a.size() == 1);
    CHECK(a.atoms()[0] == Atom{0.0, 1.0});

    const auto b = merge_atoms({{1.0, 0.3}, {1.0 + 1e-15, 0.7}});
    REQUIRE(b.size() == 1);
    CHECK(b.atoms()[0].work == 1.0);
    CHECK(b.atoms()[0].prob == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(merge_atoms({{0.0, 0.4}}), ValidationError);
    CHECK_THROWS_AS(merge_atoms({}), ValidationError);
    CHECK_THROWS_AS(merge_atoms({{0.0, -0.5}, {1.0, 1.5}}), ValidationError);

    const auto c = merge_atoms({{2.0, 0.25}, {-1.0, 0.5}, {1.0, 0.25}});
    REQUIRE(c.size() == 3);
    CHECK(c.atoms()[0].work == -1.0);
    CHECK(c.atoms()[2].work == 2.0);
}

TEST_CASE("mean, variance, tail") {
    const auto single = WorkDistribution::delta(1.0);
    CHECK(dist_tail(single, 1.0) == 1.0);

    const auto sym = merge_atoms({{-1.0, 0.5}, {1.0, 0.5}});
    CHECK(dist_tail(sym, 0.0) == 0.5);
    CHECK(dist_mean(sym) == 0.0);
    CHECK(dist_variance(sym) == 1.0);

    const double ln2 = std::log(2.0);
    const auto opt = merge_atoms({{ln2, 1.0 / 3.0}, {-ln2, 2.0 / 3.0}});
    CHECK(dist_tail(opt, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("exp_beta_average") {
    CHECK(exp_beta_average(WorkDistribution::delta(0.0), kBeta1) == 1.0);
    const double p0 = 0.731058578630004879;
    const auto q = merge_atoms({{0.0, p0}, {-1.0, 1.0 - p0}});
    // Z([0,2]) / Z([0,1])
    CHECK(exp_beta_average(q, kBeta1) == doctest::Approx(0.829996598431452080).epsilon(1e-12));
    const double ln2 = std::log(2.0);
    const auto opt = merge_atoms({{ln2, 1.0 / 3.0}, {-ln2, 2.0 / 3.0}});
    CHECK(exp_beta_average(opt, kBeta1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("tail is a non-increasing survival function; Jensen holds") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> w(-4, 4), u(0.01, 1), b(0.1, 3);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Atom> raw(1 + trial % 9);
        double total = 0.0;
        for (Atom& a : raw) total += a.prob = u(rng), a.work = w(rng);
        for (Atom& a : raw) a.prob /= total;
        const auto d = merge_atoms(raw);

        CHECK(dist_tail(d, -1e300) == doctest::Approx(1.0));
        CHECK(dist_tail(d, d.max_work() + 1e-6) == 0.0);
        double prev = 1.0 + 1e-15;
        for (double lam = -5.0; lam <= 5.0; lam += 0.01) {
            const double t = dist_tail(d, lam);
            CHECK(t <= prev);
            prev = t;
        }
        const InverseTemperature beta(b(rng));
        CHECK(exp_beta_average(d, beta) >= std::exp(beta.value() * dist_mean(d)) * (1.0 - 1e-14));
    }
}

TEST_CASE("total variation and atom comparison") {
    const auto a = merge_atoms({{0.0, 0.5}, {1.0, 0.5}});
    const auto b = merge_atoms({{0.0, 0.25}, {2.0, 0.75}});
    CHECK(total_variation(a, a) == 0.0);
    CHECK(total_variation(a, b) == doctest::Approx(0.75));
    CHECK(same_atoms(a, a));
    CHECK_FALSE(same_atoms(a, b));
    CHECK(same_atoms(a, a.shifted(1e-14)));
}
