#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fluctwork/process.hpp"
#include "fluctwork/thermo.hpp"

namespace fluctwork {

/// Threshold `lambda` on extracted work, guaranteed minimum `w_min`
/// (-infinity for none), free-energy change `delta_F`.
struct BoundQuery {
    double lambda;
    double w_min;
    double delta_F;
    InverseTemperature beta;
};

inline constexpr double kNoMinimum = -std::numeric_limits<double>::infinity();

/// (e^{-b dF} - e^{b wmin}) / (e^{b lambda} - e^{b wmin}), evaluated without
/// overflow or cancellation for lambda > -dF >= wmin. Also the success weight
/// of the saturating two-point law.
double two_point_success_probability(InverseTemperature beta, double lambda, double w_min,
                                     double delta_F);

/// Largest P(W >= lambda) for any Jarzynski-obeying law supported on
/// [w_min, inf). Throws InfeasibleQuery when w_min > lambda or w_min > -dF.
double bound_with_wmin(const BoundQuery& q);

/// The unique law saturating bound_with_wmin: atoms at w_min and lambda.
WorkDistribution optimal_two_point(const BoundQuery& q);

enum class RampMode { Ideal, Discretized };

inline constexpr std::size_t kDefaultRampSteps = 1000;
inline constexpr double kRampWarnAction = 0.1;

struct SynthesisPlan {
    double e_a = 0.0;
    double e_b = 0.0;
    double p_success = 0.0;
    double w_max = 0.0;
    double w_min = 0.0;
    std::size_t ramp_steps = kDefaultRampSteps;
    RampMode mode = RampMode::Ideal;
    std::size_t level = 1;           // the level that is quenched
    bool quasi_static_only = false;  // boundary query: no quench at all
};

struct Synthesis {
    SynthesisPlan plan;
    Protocol protocol;
};

/// Three-stage optimal protocol for a two-level system with ground level 0
/// and excited level moving from e_in to e_fin. q.delta_F must match the
/// free-energy change of the endpoints.
Synthesis synth_two_level(double e_in, double e_fin, const BoundQuery& q,
                          std::size_t ramp_steps = kDefaultRampSteps,
                          RampMode mode = RampMode::Ideal);

/// d-level version: every level except `level` goes straight to its final
/// value, `level` goes to e_a, is quenched to e_b, then ramps to its final
/// value.
Synthesis synth_d_level(const Spectrum& initial, const Spectrum& final, std::size_t level,
                        const BoundQuery& q, std::size_t ramp_steps = kDefaultRampSteps,
                        RampMode mode = RampMode::Ideal);

/// beta * sum_k |dE_k| for one step of an n-step linear ramp.
double ramp_step_action(const Spectrum& from, const Spectrum& to, std::size_t steps,
                        InverseTemperature beta);

/// n quench + thermalize pairs interpolating every level linearly. Warns
/// through the warning sink when ramp_step_action exceeds 0.1.
std::vector<ProtocolStep> quasi_static_ramp(const Spectrum& from, const Spectrum& to,
                                            std::size_t steps, InverseTemperature beta);

using WarningSink = std::function<void(const std::string&)>;

/// Replaces the warning sink (stderr by default); returns the previous one.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace fluctwork
