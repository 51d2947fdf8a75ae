#include "fluctwork/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>

#include "fluctwork/errors.hpp"

namespace fluctwork {

namespace {

std::mutex sink_mutex;
WarningSink warning_sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };

void warn(const std::string& msg) {
    std::lock_guard lock(sink_mutex);
    if (warning_sink) warning_sink(msg);
}

double slack(double a, double b) { return 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

void check_query(const BoundQuery& q) {
    if (!std::isfinite(q.lambda)) throw ValidationError("threshold lambda must be finite");
    if (!std::isfinite(q.delta_F)) throw ValidationError("delta_F must be finite");
    if (std::isnan(q.w_min) || q.w_min == std::numeric_limits<double>::infinity())
        throw ValidationError("w_min must be finite or -infinity");
    if (std::isfinite(q.w_min) && q.w_min > q.lambda + slack(q.w_min, q.lambda)) {
        std::ostringstream os;
        os << "inconsistent query: w_min = " << q.w_min << " exceeds lambda = " << q.lambda;
        throw InfeasibleQuery(os.str());
    }
    if (std::isfinite(q.w_min) && q.w_min > -q.delta_F + slack(q.w_min, q.delta_F)) {
        std::ostringstream os;
        os << "inconsistent query: w_min = " << q.w_min << " exceeds -delta_F = " << -q.delta_F
           << " (no Jarzynski-obeying law has all its mass there)";
        throw InfeasibleQuery(os.str());
    }
}

bool at_second_law_limit(double w, double delta_F) {
    return std::isfinite(w) && std::abs(w + delta_F) <= slack(w, delta_F);
}

}  // namespace

double two_point_success_probability(InverseTemperature beta, double lambda, double w_min,
                                     double delta_F) {
    const double b = beta.value();
    if (w_min == kNoMinimum) return std::exp(-b * (lambda + delta_F));
    const double gap = b * (-delta_F - w_min);  // >= 0
    const double num = gap < 1.0 ? std::exp(b * (w_min - lambda)) * std::expm1(gap)
                                 : std::exp(-b * (delta_F + lambda)) - std::exp(b * (w_min - lambda));
    const double den = -std::expm1(b * (w_min - lambda));
    return num / den;
}

double bound_with_wmin(const BoundQuery& q) {
    check_query(q);
    if (q.lambda <= -q.delta_F) return 1.0;
    if (at_second_law_limit(q.w_min, q.delta_F)) return 0.0;
    return std::clamp(two_point_success_probability(q.beta, q.lambda, q.w_min, q.delta_F), 0.0, 1.0);
}

WorkDistribution optimal_two_point(const BoundQuery& q) {
    check_query(q);
    if (q.w_min == kNoMinimum)
        throw InfeasibleQuery("the saturating law needs a finite w_min");
    if (at_second_law_limit(q.lambda, q.delta_F) || at_second_law_limit(q.w_min, q.delta_F))
        return WorkDistribution::delta(-q.delta_F);
    if (q.lambda < -q.delta_F)
        throw InfeasibleQuery("lambda below -delta_F: the optimum is the deterministic "
                              "quasi-static law, not a two-point law");
    const double p = two_point_success_probability(q.beta, q.lambda, q.w_min, q.delta_F);
    return merge_atoms({{q.w_min, 1.0 - p}, {q.lambda, p}});
}

// ---------------------------------------------------------------------------

double ramp_step_action(const Spectrum& from, const Spectrum& to, std::size_t steps,
                        InverseTemperature beta) {
    if (from.dimension() != to.dimension()) throw ValidationError("ramp endpoints differ in size");
    if (steps == 0) throw ValidationError("ramp needs at least one step");
    double total = 0.0;
    for (std::size_t k = 0; k < from.dimension(); ++k) total += std::abs(to[k] - from[k]);
    return beta.value() * total / static_cast<double>(steps);
}

std::vector<ProtocolStep> quasi_static_ramp(const Spectrum& from, const Spectrum& to,
                                            std::size_t steps, InverseTemperature beta) {
    const double action = ramp_step_action(from, to, steps, beta);
    if (action > kRampWarnAction) {
        std::ostringstream os;
        os << "ramp of " << steps << " steps moves beta*sum|dE| = " << action
           << " per step (> " << kRampWarnAction << "); far from quasi-static";
        warn(os.str());
    }
    std::vector<ProtocolStep> out;
    out.reserve(2 * steps);
    const std::size_t d = from.dimension();
    for (std::size_t j = 1; j <= steps; ++j) {
        if (j == steps) {
            out.emplace_back(Quench{to});
        } else {
            const double t = static_cast<double>(j) / static_cast<double>(steps);
            std::vector<double> levels(d);
            for (std::size_t k = 0; k < d; ++k) levels[k] = from[k] + (to[k] - from[k]) * t;
            out.emplace_back(Quench{Spectrum(std::move(levels))});
        }
        out.emplace_back(Thermalize{});
    }
    return out;
}

WarningSink set_warning_sink(WarningSink sink) {
    std::lock_guard lock(sink_mutex);
    std::swap(sink, warning_sink);
    return sink;
}

// ---------------------------------------------------------------------------

namespace {

Spectrum with_level(const Spectrum& s, std::size_t level, double value) {
    std::vector<double> v(s.levels().begin(), s.levels().end());
    v[level] = value;
    return Spectrum(std::move(v));
}

std::vector<ProtocolStep> segment(const Spectrum& from, const Spectrum& to, std::size_t steps,
                                  RampMode mode, InverseTemperature beta) {
    if (mode == RampMode::Ideal) return {QuasiStatic{to}};
    return quasi_static_ramp(from, to, steps, beta);
}

// log sum_{k != level} exp(-beta E_k)
double log_rest_weight(const Spectrum& s, std::size_t level, InverseTemperature beta) {
    const double b = beta.value();
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.dimension(); ++k)
        if (k != level) top = std::max(top, -b * s[k]);
    double sum = 0.0;
    for (std::size_t k = 0; k < s.dimension(); ++k)
        if (k != level) sum += std::exp(-b * s[k] - top);
    return top + std::log(sum);
}

}  // namespace

Synthesis synth_d_level(const Spectrum& initial, const Spectrum& final, std::size_t level,
                        const BoundQuery& q, std::size_t ramp_steps, RampMode mode) {
    if (initial.dimension() != final.dimension())
        throw ValidationError("initial and final spectra differ in size");
    if (initial.dimension() < 2) throw ValidationError("synthesis needs at least two levels");
    if (level >= initial.dimension()) throw ValidationError("quenched level index out of range");
    if (ramp_steps == 0) throw ValidationError("ramp needs at least one step");
    if (!std::isfinite(q.lambda) || !std::isfinite(q.delta_F) || std::isnan(q.w_min) ||
        q.w_min == std::numeric_limits<double>::infinity())
        throw ValidationError("synthesis needs finite lambda and delta_F, and w_min < +inf");

    const InverseTemperature beta = q.beta;
    const double b = beta.value();
    const double df = free_energy(final, beta) - free_energy(initial, beta);
    if (std::abs(df - q.delta_F) > 1e-9 * std::max(1.0, std::abs(df))) {
        std::ostringstream os;
        os << "query delta_F = " << q.delta_F << " does not match the spectra (" << df << ")";
        throw ValidationError(os.str());
    }
    if (q.w_min > q.lambda + slack(q.w_min, q.lambda))
        throw InfeasibleQuery("inconsistent query: w_min exceeds lambda");

    SynthesisPlan plan;
    plan.ramp_steps = ramp_steps;
    plan.mode = mode;
    plan.level = level;
    plan.w_max = q.lambda;
    plan.w_min = q.w_min;

    // Boundary queries: a reversible transformation is already optimal.
    const bool trivial = q.lambda <= -q.delta_F;
    if (trivial || at_second_law_limit(q.w_min, q.delta_F)) {
        plan.quasi_static_only = true;
        plan.e_a = plan.e_b = final[level];
        plan.p_success = trivial ? 1.0 : 0.0;
        plan.w_max = plan.w_min = -q.delta_F;
        return {plan, Protocol(beta, initial, segment(initial, final, ramp_steps, mode, beta))};
    }

    // e^{-b E_a} = S (e^{-b dF} - e^{b Wmax}) / (e^{b Wmin} - e^{-b dF})
    // e^{-b E_b} = S (e^{b dF} - e^{-b Wmax}) / (e^{-b Wmin} - e^{b dF})
    // with S = sum_{k != level} e^{-b E_k(final)}; written in terms of
    // x = b (Wmax + dF) and y = b (-dF - Wmin).
    const double x = b * (q.lambda + q.delta_F);
    const double y = q.w_min == kNoMinimum ? std::numeric_limits<double>::infinity()
                                           : b * (-q.delta_F - q.w_min);
    const double rhs_a = std::expm1(x) / -std::expm1(-y);
    const double rhs_b = -std::expm1(-x) / std::expm1(y);
    if (!(rhs_a > 0.0) || !std::isfinite(rhs_a)) {
        std::ostringstream os;
        os << "infeasible: right-hand side of the E_a relation is " << rhs_a
           << " (needs lambda > -delta_F > w_min)";
        throw InfeasibleQuery(os.str());
    }
    if (!(rhs_b > 0.0) || !std::isfinite(rhs_b)) {
        std::ostringstream os;
        os << "infeasible: right-hand side of the E_b relation is " << rhs_b
           << (q.w_min == kNoMinimum ? " (w_min = -inf sends E_b to infinity)"
                                     : " (needs lambda > -delta_F > w_min)");
        throw InfeasibleQuery(os.str());
    }

    const double log_s = log_rest_weight(final, level, beta);
    plan.e_a = -(log_s + std::log(rhs_a)) / b;
    plan.e_b = -(log_s + std::log(rhs_b)) / b;
    plan.p_success = 1.0 / (1.0 + rhs_a);

    const Spectrum before_quench = with_level(final, level, plan.e_a);
    const Spectrum after_quench = with_level(final, level, plan.e_b);

    std::vector<ProtocolStep> steps = segment(initial, before_quench, ramp_steps, mode, beta);
    steps.emplace_back(Quench{after_quench});
    steps.emplace_back(Thermalize{});
    auto tail = segment(after_quench, final, ramp_steps, mode, beta);
    steps.insert(steps.end(), std::make_move_iterator(tail.begin()),
                 std::make_move_iterator(tail.end()));
    return {plan, Protocol(beta, initial, std::move(steps))};
}

Synthesis synth_two_level(double e_in, double e_fin, const BoundQuery& q, std::size_t ramp_steps,
                          RampMode mode) {
    return synth_d_level(Spectrum{0.0, e_in}, Spectrum{0.0, e_fin}, 1, q, ramp_steps, mode);
}

}  // namespace fluctwork
