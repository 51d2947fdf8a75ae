#pragma once

#include <array>
#include <optional>
#include <vector>

#include "fluctwork/thermo.hpp"

namespace fluctwork {

/// Maximize P(W >= lambda) subject to <W> = mu.
struct AverageQuery {
    double lambda;
    double mu;
    double delta_F;
    InverseTemperature beta;
};

struct SolverConfig {
    double tolerance = 1e-10;  // absolute, on w_min
    int max_iterations = 200;
    double expansion = 2.0;  // growth factor of the lower bracket step
};

/// Mean of the saturating two-point law with atoms at w_min and lambda.
/// Requires w_min < -delta_F < lambda.
double mu_of_wmin(double w_min, double lambda, double delta_F, InverseTemperature beta);

/// The unique w_min with mu_of_wmin(w_min) = mu, by bracketing and bisection.
double solve_wmin(const AverageQuery& q, const SolverConfig& cfg = {});

/// Optimal success probability under the average-work constraint.
double pmax_avg(const AverageQuery& q, const SolverConfig& cfg = {});

/// Work grid {w_lo, w_lo + step, ...} up to lambda, plus lambda itself.
struct GridSpec {
    double w_lo;
    double step;

    /// w_lo = -dF - 10/beta, step = 0.01/beta.
    static GridSpec defaults_for(const AverageQuery& q);
};

struct OracleResult {
    double value = 0.0;
    std::array<Atom, 3> support{};       // raw optimal candidate, by work
    std::vector<Atom> effective_support;  // atoms within one grid step merged
    std::size_t grid_points = 0;
    std::size_t candidates = 0;  // triples with a valid non-negative solution
};

/// Brute-force maximum of P(W >= lambda) over all laws with at most three
/// atoms on the grid that satisfy normalization, the mean constraint and
/// the Jarzynski identity. Throws InfeasibleQuery when no triple qualifies.
OracleResult oracle_max_tail(const AverageQuery& q, const GridSpec& grid, unsigned threads = 1);

}  // namespace fluctwork
