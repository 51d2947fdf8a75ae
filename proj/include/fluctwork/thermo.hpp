#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fluctwork {

/// Inverse temperature beta = 1/(k_B T), with k_B = 1.
class InverseTemperature {
public:
    explicit InverseTemperature(double beta);

    double value() const noexcept { return beta_; }

private:
    double beta_;
};

/// Energy levels of a diagonal Hamiltonian. Level k always labels the
/// same eigenstate across a process.
class Spectrum {
public:
    explicit Spectrum(std::vector<double> levels);
    Spectrum(std::initializer_list<double> levels);

    std::size_t dimension() const noexcept { return levels_.size(); }
    double operator[](std::size_t k) const { return levels_[k]; }
    std::span<const double> levels() const noexcept { return levels_; }
    double min_level() const noexcept;

    Spectrum shifted(double offset) const;

    friend bool operator==(const Spectrum&, const Spectrum&) = default;

private:
    std::vector<double> levels_;
};

double log_partition_function(const Spectrum& s, InverseTemperature beta);
double partition_function(const Spectrum& s, InverseTemperature beta);
double free_energy(const Spectrum& s, InverseTemperature beta);
std::vector<double> gibbs_probabilities(const Spectrum& s, InverseTemperature beta);

struct Atom {
    double work;
    double prob;

    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite law of total extracted work: atoms sorted by strictly increasing
/// work, positive weights summing to one.
class WorkDistribution {
public:
    /// Point mass at `work`.
    static WorkDistribution delta(double work);

    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    double min_work() const noexcept { return atoms_.front().work; }
    double max_work() const noexcept { return atoms_.back().work; }

    /// Tolerance under which two work values are the same atom.
    double tolerance() const noexcept;

    /// Same law with every work value moved by `offset`.
    WorkDistribution shifted(double offset) const;

private:
    explicit WorkDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}
    friend WorkDistribution merge_atoms(std::vector<Atom> raw);

    std::vector<Atom> atoms_;
};

inline constexpr double kMergeRelativeTolerance = 1e-12;
inline constexpr double kMassTolerance = 1e-9;

/// Sorts, merges atoms closer than 1e-12 * max|w| and renormalizes.
/// Throws ValidationError when total mass is off by more than 1e-9.
WorkDistribution merge_atoms(std::vector<Atom> raw);

double dist_mean(const WorkDistribution& d);
double dist_variance(const WorkDistribution& d);
/// P(W >= lambda), counting atoms equal to lambda up to the merge tolerance.
double dist_tail(const WorkDistribution& d, double lambda);
/// <exp(beta W)>.
double exp_beta_average(const WorkDistribution& d, InverseTemperature beta);

/// Atom-wise comparison with merge tolerance on work and `prob_tol` on weight.
bool same_atoms(const WorkDistribution& a, const WorkDistribution& b, double prob_tol = 1e-12);

/// Half the L1 distance between two laws; atoms within tolerance are matched.
double total_variation(const WorkDistribution& a, const WorkDistribution& b);

}  // namespace fluctwork
