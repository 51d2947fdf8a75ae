#include "fluctwork/process.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "fluctwork/errors.hpp"

namespace fluctwork {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

enum class Phase { Gibbs, Quenched };

}  // namespace

std::size_t Protocol::first_noncanonical_step(std::span<const ProtocolStep> steps) {
    Phase phase = Phase::Gibbs;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const bool ok = std::visit(
            overloaded{
                [&](const Quench&) {
                    if (phase != Phase::Gibbs) return false;
                    phase = Phase::Quenched;
                    return true;
                },
                [&](const Thermalize&) {
                    if (phase != Phase::Quenched) return false;
                    phase = Phase::Gibbs;
                    return true;
                },
                [&](const QuasiStatic&) { return phase == Phase::Gibbs; },
            },
            steps[i]);
        if (!ok) return i;
    }
    return steps.size();
}

Protocol::Protocol(InverseTemperature beta, Spectrum initial, std::vector<ProtocolStep> steps)
    : beta_(beta), initial_(std::move(initial)), steps_(std::move(steps)) {
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        const Spectrum* target = nullptr;
        if (const auto* q = std::get_if<Quench>(&steps_[i])) target = &q->target;
        if (const auto* q = std::get_if<QuasiStatic>(&steps_[i])) target = &q->target;
        if (target && target->dimension() != initial_.dimension())
            throw ValidationError("step " + std::to_string(i) + ": spectrum has " +
                                  std::to_string(target->dimension()) + " levels, protocol has " +
                                  std::to_string(initial_.dimension()));
    }
    const std::size_t bad = first_noncanonical_step(steps_);
    if (bad != steps_.size()) {
        const bool is_thermalize = std::holds_alternative<Thermalize>(steps_[bad]);
        throw ValidationError("step " + std::to_string(bad) + ": non-canonical order (" +
                              (is_thermalize ? "thermalize must directly follow a quench"
                                             : "a quench must be followed by thermalize before "
                                               "the next quench or quasi-static segment") +
                              ")");
    }
}

const Spectrum& Protocol::final_spectrum() const noexcept {
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
        if (const auto* q = std::get_if<Quench>(&*it)) return q->target;
        if (const auto* q = std::get_if<QuasiStatic>(&*it)) return q->target;
    }
    return initial_;
}

bool Protocol::ends_thermal() const noexcept {
    return steps_.empty() || !std::holds_alternative<Quench>(steps_.back());
}

Protocol concatenate(const Protocol& first, const Protocol& second) {
    if (first.beta().value() != second.beta().value())
        throw ValidationError("cannot concatenate protocols at different temperatures");
    if (!first.ends_thermal())
        throw ValidationError("first protocol must end in a Gibbs state");
    if (!(first.final_spectrum() == second.initial()))
        throw ValidationError("protocols do not meet at the same spectrum");
    std::vector<ProtocolStep> steps(first.steps().begin(), first.steps().end());
    steps.insert(steps.end(), second.steps().begin(), second.steps().end());
    return Protocol(first.beta(), first.initial(), std::move(steps));
}

// ---------------------------------------------------------------------------

WorkDistribution step_work_distribution(const Spectrum& prev, const Spectrum& next,
                                        InverseTemperature beta) {
    if (prev.dimension() != next.dimension())
        throw ValidationError("quench changes the number of levels");
    const std::vector<double> p = gibbs_probabilities(prev, beta);
    std::vector<Atom> atoms;
    atoms.reserve(p.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p[k] > 0.0) atoms.push_back({prev[k] - next[k], p[k]});
    return merge_atoms(std::move(atoms));
}

WorkDistribution convolve(const WorkDistribution& a, const WorkDistribution& b,
                          const ConvolutionConfig& cfg) {
    if (a.size() == 1) return b.shifted(a.atoms()[0].work);
    if (b.size() == 1) return a.shifted(b.atoms()[0].work);
    if (a.size() > cfg.max_atoms / b.size())
        throw AtomOverflow("exact convolution needs " + std::to_string(a.size()) + " x " +
                           std::to_string(b.size()) + " atoms, above the cap of " +
                           std::to_string(cfg.max_atoms) + "; use Monte Carlo sampling instead");
    std::vector<Atom> out;
    out.reserve(a.size() * b.size());
    for (const Atom& x : a.atoms())
        for (const Atom& y : b.atoms())
            if (const double w = x.prob * y.prob; w > 0.0) out.push_back({x.work + y.work, w});  // drop underflow
    return merge_atoms(std::move(out));
}

namespace {

// One independent work contribution per work-bearing step.
std::vector<WorkDistribution> step_laws(const Protocol& p) {
    std::vector<WorkDistribution> laws;
    const Spectrum* gibbs = &p.initial();
    const InverseTemperature beta = p.beta();
    for (const ProtocolStep& step : p.steps()) {
        std::visit(overloaded{
                       [&](const Quench& q) {
                           laws.push_back(step_work_distribution(*gibbs, q.target, beta));
                           gibbs = &q.target;  // becomes Gibbs after the following thermalize
                       },
                       [&](const Thermalize&) {},
                       [&](const QuasiStatic& q) {
                           laws.push_back(WorkDistribution::delta(
                               free_energy(*gibbs, beta) - free_energy(q.target, beta)));
                           gibbs = &q.target;
                       },
                   },
                   step);
    }
    return laws;
}

WorkDistribution reduce_tree(std::span<const WorkDistribution> laws, const ConvolutionConfig& cfg) {
    if (laws.size() == 1) return laws[0];
    const std::size_t mid = laws.size() / 2;
    return convolve(reduce_tree(laws.first(mid), cfg), reduce_tree(laws.subspan(mid), cfg), cfg);
}

}  // namespace

WorkDistribution work_distribution(const Protocol& p, const ConvolutionConfig& cfg) {
    const std::vector<WorkDistribution> laws = step_laws(p);
    if (laws.empty()) return WorkDistribution::delta(0.0);
    return reduce_tree(laws, cfg);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kSampleBlock = std::size_t{1} << 16;

struct StepSampler {
    std::vector<double> cumulative;  // empty for deterministic steps
    std::vector<double> works;

    double draw(std::mt19937_64& rng) const {
        if (cumulative.empty()) return works.front();
        const double u = std::uniform_real_distribution<double>(0.0, cumulative.back())(rng);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        return works[static_cast<std::size_t>(it - cumulative.begin())];
    }
};

std::vector<StepSampler> build_samplers(const Protocol& p) {
    std::vector<StepSampler> out;
    const Spectrum* gibbs = &p.initial();
    const InverseTemperature beta = p.beta();
    for (const ProtocolStep& step : p.steps()) {
        if (const auto* q = std::get_if<Quench>(&step)) {
            StepSampler s;
            const std::vector<double> prob = gibbs_probabilities(*gibbs, beta);
            double acc = 0.0;
            for (std::size_t k = 0; k < prob.size(); ++k) {
                acc += prob[k];
                s.cumulative.push_back(acc);
                s.works.push_back((*gibbs)[k] - q->target[k]);
            }
            out.push_back(std::move(s));
            gibbs = &q->target;
        } else if (const auto* q = std::get_if<QuasiStatic>(&step)) {
            out.push_back({{}, {free_energy(*gibbs, beta) - free_energy(q->target, beta)}});
            gibbs = &q->target;
        }
    }
    return out;
}

void sample_block(const std::vector<StepSampler>& samplers, std::uint64_t seed, std::size_t block,
                  std::span<TrajectorySample> out) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    std::mt19937_64 rng(seq);
    for (TrajectorySample& t : out) {
        t.per_step_works.resize(samplers.size());
        double total = 0.0;
        for (std::size_t j = 0; j < samplers.size(); ++j) {
            t.per_step_works[j] = samplers[j].draw(rng);
            total += t.per_step_works[j];
        }
        t.work = total;
    }
}

}  // namespace

std::vector<TrajectorySample> sample_work(const Protocol& p, std::size_t n, std::uint64_t seed,
                                          unsigned threads) {
    if (n == 0) throw ValidationError("sample count must be at least 1");
    const std::vector<StepSampler> samplers = build_samplers(p);
    std::vector<TrajectorySample> out(n);
    const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
    const unsigned workers =
        static_cast<unsigned>(std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, blocks));

    auto run = [&](unsigned worker) {
        for (std::size_t b = worker; b < blocks; b += workers) {
            const std::size_t begin = b * kSampleBlock;
            const std::size_t len = std::min(kSampleBlock, n - begin);
            sample_block(samplers, seed, b, std::span(out).subspan(begin, len));
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    }
    return out;
}

WorkDistribution empirical_distribution(std::span<const TrajectorySample> samples) {
    if (samples.empty()) throw ValidationError("no samples");
    const double weight = 1.0 / static_cast<double>(samples.size());
    std::vector<Atom> atoms;
    atoms.reserve(samples.size());
    for (const TrajectorySample& t : samples) atoms.push_back({t.work, weight});
    return merge_atoms(std::move(atoms));
}

double delta_F(const Protocol& p) {
    return free_energy(p.final_spectrum(), p.beta()) - free_energy(p.initial(), p.beta());
}

double jarzynski_residual(const WorkDistribution& d, InverseTemperature beta, double delta_f) {
    double s = 0.0;
    for (const Atom& a : d.atoms()) s += a.prob * std::exp(beta.value() * (a.work + delta_f));
    return std::abs(s - 1.0);
}

}  // namespace fluctwork
