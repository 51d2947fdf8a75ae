#include "fluctwork/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "fluctwork/errors.hpp"

namespace fluctwork {

InverseTemperature::InverseTemperature(double beta) : beta_(beta) {
    if (!std::isfinite(beta) || beta <= 0.0)
    {
        std::ostringstream os;
        os << "inverse temperature must be positive and finite, got " << beta;
        throw ValidationError(os.str());
    }
}

Spectrum::Spectrum(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw ValidationError("spectrum needs at least one level");
    for (double e : levels_)
        if (!std::isfinite(e)) throw ValidationError("spectrum levels must be finite");
}

Spectrum::Spectrum(std::initializer_list<double> levels) : Spectrum(std::vector<double>(levels)) {}

double Spectrum::min_level() const noexcept {
    return *std::min_element(levels_.begin(), levels_.end());
}

Spectrum Spectrum::shifted(double offset) const {
    std::vector<double> out(levels_);
    for (double& e : out) e += offset;
    return Spectrum(std::move(out));
}

// Sums are taken relative to the ground level so that exp() never overflows.
double log_partition_function(const Spectrum& s, InverseTemperature beta) {
    const double b = beta.value();
    const double e0 = s.min_level();
    double sum = 0.0;
    for (double e : s.levels()) sum += std::exp(-b * (e - e0));
    return -b * e0 + std::log(sum);
}

double partition_function(const Spectrum& s, InverseTemperature beta) {
    return std::exp(log_partition_function(s, beta));
}

double free_energy(const Spectrum& s, InverseTemperature beta) {
    return -log_partition_function(s, beta) / beta.value();
}

std::vector<double> gibbs_probabilities(const Spectrum& s, InverseTemperature beta) {
    const double b = beta.value();
    const double e0 = s.min_level();
    std::vector<double> p(s.dimension());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::exp(-b * (s[k] - e0));
    const double z = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& x : p) x /= z;
    return p;
}

// ---------------------------------------------------------------------------

namespace {

double max_abs_work(std::span<const Atom> atoms) {
    double m = 0.0;
    for (const Atom& a : atoms) m = std::max(m, std::abs(a.work));
    return m;
}

}  // namespace

WorkDistribution WorkDistribution::delta(double work) {
    if (!std::isfinite(work)) throw ValidationError("work value must be finite");
    return WorkDistribution({Atom{work, 1.0}});
}

double WorkDistribution::tolerance() const noexcept {
    return kMergeRelativeTolerance * max_abs_work(atoms_);
}

WorkDistribution WorkDistribution::shifted(double offset) const {
    std::vector<Atom> out(atoms_);
    for (Atom& a : out) a.work += offset;
    return merge_atoms(std::move(out));
}

WorkDistribution merge_atoms(std::vector<Atom> raw) {
    if (raw.empty()) throw ValidationError("cannot build a work distribution from no atoms");
    for (const Atom& a : raw) {
        if (!std::isfinite(a.work)) throw ValidationError("atom work must be finite");
        if (!(a.prob > 0.0) || !std::isfinite(a.prob))
            throw ValidationError("atom weights must be positive and finite");
    }
    std::sort(raw.begin(), raw.end(), [](const Atom& x, const Atom& y) { return x.work < y.work; });

    const double tol = kMergeRelativeTolerance * max_abs_work(raw);
    std::vector<Atom> merged;
    merged.reserve(raw.size());
    double anchor = raw.front().work;
    for (const Atom& a : raw) {
        if (!merged.empty() && a.work - anchor <= tol) {
            merged.back().prob += a.prob;
        } else {
            merged.push_back(a);
            anchor = a.work;
        }
    }

    double mass = 0.0;
    for (const Atom& a : merged) mass += a.prob;
    if (std::abs(mass - 1.0) > kMassTolerance)
        throw ValidationError("work distribution mass is " + std::to_string(mass) +
                              ", expected 1 (upstream normalization bug)");
    for (Atom& a : merged) a.prob /= mass;
    return WorkDistribution(std::move(merged));
}

double dist_mean(const WorkDistribution& d) {
    double m = 0.0;
    for (const Atom& a : d.atoms()) m += a.prob * a.work;
    return m;
}

double dist_variance(const WorkDistribution& d) {
    const double m = dist_mean(d);
    double v = 0.0;
    for (const Atom& a : d.atoms()) v += a.prob * (a.work - m) * (a.work - m);
    return v;
}

double dist_tail(const WorkDistribution& d, double lambda) {
    const double tol = kMergeRelativeTolerance * std::max(std::abs(lambda), max_abs_work(d.atoms()));
    const auto atoms = d.atoms();
    auto first = std::lower_bound(atoms.begin(), atoms.end(), lambda - tol,
                                  [](const Atom& a, double x) { return a.work < x; });
    double tail = 0.0;
    for (auto it = first; it != atoms.end(); ++it) tail += it->prob;
    return std::min(tail, 1.0);
}

double exp_beta_average(const WorkDistribution& d, InverseTemperature beta) {
    double s = 0.0;
    for (const Atom& a : d.atoms()) s += a.prob * std::exp(beta.value() * a.work);
    return s;
}

namespace {

double pair_tolerance(const WorkDistribution& a, const WorkDistribution& b) {
    return std::max({a.tolerance(), b.tolerance(), 1e-300});
}

}  // namespace

bool same_atoms(const WorkDistribution& a, const WorkDistribution& b, double prob_tol) {
    if (a.size() != b.size()) return false;
    const double tol = pair_tolerance(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a.atoms()[i].work - b.atoms()[i].work) > tol) return false;
        if (std::abs(a.atoms()[i].prob - b.atoms()[i].prob) > prob_tol) return false;
    }
    return true;
}

double total_variation(const WorkDistribution& a, const WorkDistribution& b) {
    const double tol = pair_tolerance(a, b);
    const auto x = a.atoms();
    const auto y = b.atoms();
    std::size_t i = 0, j = 0;
    double l1 = 0.0;
    while (i < x.size() || j < y.size()) {
        if (j == y.size() || (i < x.size() && x[i].work < y[j].work - tol)) {
            l1 += x[i++].prob;
        } else if (i == x.size() || y[j].work < x[i].work - tol) {
            l1 += y[j++].prob;
        } else {
            l1 += std::abs(x[i++].prob - y[j++].prob);
        }
    }
    return 0.5 * l1;
}

}  // namespace fluctwork
