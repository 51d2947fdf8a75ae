#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "fluctwork/thermo.hpp"

namespace fluctwork {

/// Instantaneous change of the Hamiltonian at fixed populations.
struct Quench {
    Spectrum target;
};

/// Full relaxation to the Gibbs state of the current Hamiltonian.
struct Thermalize {};

/// Idealized reversible transformation to `target`: the N -> infinity limit
/// of a quench/thermalize ramp. Extracts exactly F(current) - F(target).
struct QuasiStatic {
    Spectrum target;
};

using ProtocolStep = std::variant<Quench, Thermalize, QuasiStatic>;

/// A system prepared in the Gibbs state of `initial`, driven by `steps`.
///
/// Steps must be in canonical form: every Quench acts on a Gibbs state and,
/// unless it is the last step, is immediately followed by Thermalize.
/// Thermalize may only follow a Quench. QuasiStatic may appear wherever the
/// state is Gibbs.
class Protocol {
public:
    Protocol(InverseTemperature beta, Spectrum initial, std::vector<ProtocolStep> steps = {});

    InverseTemperature beta() const noexcept { return beta_; }
    const Spectrum& initial() const noexcept { return initial_; }
    std::span<const ProtocolStep> steps() const noexcept { return steps_; }
    std::size_t dimension() const noexcept { return initial_.dimension(); }

    /// Hamiltonian after the last step.
    const Spectrum& final_spectrum() const noexcept;
    /// True when the protocol ends in a Gibbs state.
    bool ends_thermal() const noexcept;

    /// Index of the first step that breaks canonical form, or steps().size().
    static std::size_t first_noncanonical_step(std::span<const ProtocolStep> steps);

private:
    InverseTemperature beta_;
    Spectrum initial_;
    std::vector<ProtocolStep> steps_;
};

/// Steps of `first` followed by those of `second`. `first` must end thermal
/// in the initial spectrum of `second`, at the same temperature.
Protocol concatenate(const Protocol& first, const Protocol& second);

struct TrajectorySample {
    double work = 0.0;
    std::vector<double> per_step_works;
};

struct ConvolutionConfig {
    std::size_t max_atoms = std::size_t{1} << 22;
};

/// Law of W_j for a quench prev -> next acting on the Gibbs state of prev.
WorkDistribution step_work_distribution(const Spectrum& prev, const Spectrum& next,
                                        InverseTemperature beta);

/// Law of W_1 + W_2 for independent W_1 ~ a and W_2 ~ b.
WorkDistribution convolve(const WorkDistribution& a, const WorkDistribution& b,
                          const ConvolutionConfig& cfg = {});

/// Exact law of total work.
WorkDistribution work_distribution(const Protocol& p, const ConvolutionConfig& cfg = {});

/// Independent trajectories; identical output for identical (seed, n) no
/// matter how many threads are used.
std::vector<TrajectorySample> sample_work(const Protocol& p, std::size_t n, std::uint64_t seed,
                                          unsigned threads = 1);

/// Merges sampled work values into an empirical law (weights count / n).
WorkDistribution empirical_distribution(std::span<const TrajectorySample> samples);

double delta_F(const Protocol& p);

/// |<exp(beta W)> exp(beta dF) - 1|.
double jarzynski_residual(const WorkDistribution& d, InverseTemperature beta, double delta_f);

}  // namespace fluctwork
