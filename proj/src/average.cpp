#include "fluctwork/average.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>
#include <tuple>

#include "fluctwork/bounds.hpp"
#include "fluctwork/errors.hpp"

namespace fluctwork {

double mu_of_wmin(double w_min, double lambda, double delta_F, InverseTemperature beta) {
    if (!std::isfinite(w_min) || !std::isfinite(lambda) || !std::isfinite(delta_F))
        throw ValidationError("mu_of_wmin needs finite arguments");
    if (!(w_min <= -delta_F && -delta_F < lambda)) {
        std::ostringstream os;
        os << "mu_of_wmin needs w_min < -delta_F < lambda, got w_min = " << w_min
           << ", -delta_F = " << -delta_F << ", lambda = " << lambda;
        throw ValidationError(os.str());
    }
    if (w_min == -delta_F) return -delta_F;
    const double p = two_point_success_probability(beta, lambda, w_min, delta_F);
    return w_min + p * (lambda - w_min);
}

namespace {

void check_average_query(const AverageQuery& q) {
    if (!std::isfinite(q.lambda) || !std::isfinite(q.mu) || !std::isfinite(q.delta_F))
        throw ValidationError("average query needs finite lambda, mu and delta_F");
    if (q.lambda <= -q.delta_F)
        throw InfeasibleQuery("lambda <= -delta_F: trivial regime, no two-point optimum");
    if (q.mu >= -q.delta_F) {
        std::ostringstream os;
        os << "mu = " << q.mu << " is not below -delta_F = " << -q.delta_F
           << "; no non-degenerate Jarzynski-obeying law has that mean";
        throw InfeasibleQuery(os.str());
    }
}

}  // namespace

double solve_wmin(const AverageQuery& q, const SolverConfig& cfg) {
    check_average_query(q);
    if (!(cfg.tolerance > 0.0)) throw ValidationError("solver tolerance must be positive");
    if (!(cfg.expansion > 1.0)) throw ValidationError("bracket expansion factor must exceed 1");

    auto mu = [&](double w) { return mu_of_wmin(w, q.lambda, q.delta_F, q.beta); };

    // mu(w) is strictly increasing and reaches -dF > target at w = -dF.
    double hi = -q.delta_F;
    double step = 1.0 / q.beta.value();
    double lo = hi - step;
    int iterations = 0;
    while (mu(lo) >= q.mu) {
        if (++iterations > cfg.max_iterations)
            throw ConvergenceError("could not bracket w_min below the target mean");
        hi = lo;
        step *= cfg.expansion;
        lo = hi - step;
    }
    while (hi - lo > cfg.tolerance) {
        if (++iterations > cfg.max_iterations)
            throw ConvergenceError("bisection for w_min did not converge within the iteration cap");
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at double resolution
        (mu(mid) < q.mu ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double pmax_avg(const AverageQuery& q, const SolverConfig& cfg) {
    const double w = solve_wmin(q, cfg);
    return bound_with_wmin({q.lambda, w, q.delta_F, q.beta});
}

// ---------------------------------------------------------------------------

GridSpec GridSpec::defaults_for(const AverageQuery& q) {
    const double b = q.beta.value();
    return {-q.delta_F - 10.0 / b, 0.01 / b};
}

namespace {

struct Candidate {
    double value = -1.0;
    std::array<std::size_t, 3> index{};
    std::array<double, 3> weight{};

    bool better_than(const Candidate& o) const {
        if (value != o.value) return value > o.value;
        return index < o.index;
    }
};

std::vector<double> build_grid(const AverageQuery& q, const GridSpec& g) {
    if (!(g.step > 0.0) || !std::isfinite(g.step)) throw ValidationError("grid step must be positive");
    if (!std::isfinite(g.w_lo) || g.w_lo >= q.lambda)
        throw ValidationError("grid lower end must lie below lambda");
    std::vector<double> w;
    for (std::size_t i = 0;; ++i) {
        const double x = g.w_lo + static_cast<double>(i) * g.step;
        if (x >= q.lambda - 1e-9 * g.step) break;
        w.push_back(x);
    }
    w.push_back(q.lambda);
    return w;
}

}  // namespace

OracleResult oracle_max_tail(const AverageQuery& q, const GridSpec& grid, unsigned threads) {
    if (!std::isfinite(q.lambda) || !std::isfinite(q.mu) || !std::isfinite(q.delta_F))
        throw ValidationError("oracle needs finite lambda, mu and delta_F");
    const std::vector<double> w = build_grid(q, grid);
    const std::size_t n = w.size();
    const double b = q.beta.value();

    // Third constraint rescaled by e^{-b lambda}.
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(b * (w[i] - q.lambda));
    const double jar = std::exp(-b * (q.delta_F + q.lambda));

    auto search = [&](std::size_t first_i, std::size_t stride, Candidate& best, std::size_t& count) {
        for (std::size_t i = first_i; i < n; i += stride) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dw2 = w[j] - w[i], de2 = e[j] - e[i];
                for (std::size_t k = j + 1; k < n; ++k) {
                    const double dw3 = w[k] - w[i], de3 = e[k] - e[i];
                    const double det = dw2 * de3 - dw3 * de2;
                    if (!(det > 0.0)) continue;
                    const double rm = q.mu - w[i], rj = jar - e[i];
                    const double p2 = (rm * de3 - dw3 * rj) / det;
                    const double p3 = (dw2 * rj - rm * de2) / det;
                    const double p1 = 1.0 - p2 - p3;
                    constexpr double neg = -1e-12;
                    if (p1 < neg || p2 < neg || p3 < neg) continue;
                    ++count;
                    const std::array<double, 3> pw{std::max(p1, 0.0), std::max(p2, 0.0),
                                                   std::max(p3, 0.0)};
                    const std::array<std::size_t, 3> idx{i, j, k};
                    double value = 0.0;
                    for (int a = 0; a < 3; ++a)
                        if (w[idx[a]] >= q.lambda) value += pw[a];
                    const Candidate c{value, idx, pw};
                    if (c.better_than(best)) best = c;
                }
            }
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::vector<Candidate> best(workers);
    std::vector<std::size_t> counts(workers, 0);
    if (workers == 1) {
        search(0, 1, best[0], counts[0]);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back([&, t] { search(t, workers, best[t], counts[t]); });
    }

    Candidate top;
    std::size_t total = 0;
    for (unsigned t = 0; t < workers; ++t) {
        if (best[t].better_than(top)) top = best[t];
        total += counts[t];
    }
    if (total == 0) throw InfeasibleQuery("no three-atom law on the grid meets the constraints");

    OracleResult r;
    r.value = top.value;
    r.grid_points = n;
    r.candidates = total;
    for (int a = 0; a < 3; ++a) r.support[a] = {w[top.index[a]], top.weight[a]};

    // Coalesce atoms no more than one grid step apart.
    for (const Atom& a : r.support) {
        if (a.prob <= 0.0) continue;
        if (!r.effective_support.empty() &&
            a.work - r.effective_support.back().work <= grid.step * (1.0 + 1e-9)) {
            Atom& last = r.effective_support.back();
            const double mass = last.prob + a.prob;
            last.work = (last.work * last.prob + a.work * a.prob) / mass;
            last.prob = mass;
        } else {
            r.effective_support.push_back(a);
        }
    }
    return r;
}

}  // namespace fluctwork
