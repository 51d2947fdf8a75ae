#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "fluctwork/average.hpp"
#include "fluctwork/bounds.hpp"
#include "fluctwork/errors.hpp"
#include "fluctwork/process.hpp"
#include "fluctwork/protocol_io.hpp"
#include "fluctwork/szilard.hpp"

namespace fluctwork::cli {

namespace {

constexpr double kJarzynskiTolerance = 1e-10;

// Shortest decimal that reads back to the same double.
std::string num(double x) {
    char buf[64];
    if (x == 0.0) x = 0.0;  // no "-0"
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string sig(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

void require_finite(std::initializer_list<std::pair<const char*, double>> values) {
    for (const auto& [name, v] : values)
        if (!std::isfinite(v)) throw ValidationError(std::string("--") + name + " must be finite");
}

void write_distribution(std::ostream& os, const WorkDistribution& d) {
    os << "w,p\n";
    for (const Atom& a : d.atoms()) os << num(a.work) << ',' << num(a.prob) << '\n';
}

// Writes `body` to --out when given, else to stdout.
void emit(const std::string& out_path, const std::string& body, std::ostream& out) {
    if (out_path.empty()) {
        out << body;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + out_path);
    f << body;
}

struct Axis {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;

    double at(std::size_t i) const {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
};

Axis parse_axis(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 4) throw ValidationError("axis must look like name:lo:hi:count, got " + spec);
    Axis a;
    a.name = parts[0];
    if (a.name != "lambda" && a.name != "wmin" && a.name != "mu")
        throw ValidationError("axis variable must be lambda, wmin or mu, got " + a.name);
    try {
        a.lo = std::stod(parts[1]);
        a.hi = std::stod(parts[2]);
        a.count = std::stoul(parts[3]);
    } catch (const std::exception&) {
        throw ValidationError("bad axis range " + spec);
    }
    require_finite({{"x/y", a.lo}, {"x/y", a.hi}});
    if (a.count < 2) throw ValidationError("axis needs at least 2 points");
    return a;
}

// ---------------------------------------------------------------------------

struct BoundArgs {
    double beta = 0, dF = 0, lambda = 0;
    double wmin = kNoMinimum;
    int digits = 5;
};

int do_bound(const BoundArgs& a, std::ostream& out) {
    require_finite({{"beta", a.beta}, {"dF", a.dF}, {"lambda", a.lambda}});
    const double p = bound_with_wmin({a.lambda, a.wmin, a.dF, InverseTemperature(a.beta)});
    out << sig(p, a.digits) << '\n';
    return kOk;
}

struct SynthArgs {
    double beta = 0, lambda = 0, wmin = 0;
    std::optional<double> dF;
    std::optional<double> e_in, e_fin;
    std::vector<double> initial, final;
    std::size_t level = 1;
    std::size_t steps = kDefaultRampSteps;
    std::string mode = "ideal";
    std::string out;
};

int do_synth(const SynthArgs& a, std::ostream& out) {
    require_finite({{"beta", a.beta}, {"lambda", a.lambda}, {"wmin", a.wmin}});
    const InverseTemperature beta(a.beta);
    const bool two_level = a.e_in || a.e_fin;
    if (two_level == (!a.initial.empty() || !a.final.empty()))
        throw ValidationError("give either --e-in/--e-fin or --initial/--final");
    if (two_level && !(a.e_in && a.e_fin)) throw ValidationError("--e-in and --e-fin go together");
    const Spectrum initial = two_level ? Spectrum{0.0, *a.e_in} : Spectrum(a.initial);
    const Spectrum final = two_level ? Spectrum{0.0, *a.e_fin} : Spectrum(a.final);
    if (initial.dimension() != final.dimension())
        throw ValidationError("--initial and --final differ in size");

    const double df_spectra = free_energy(final, beta) - free_energy(initial, beta);
    const double df = a.dF.value_or(df_spectra);
    const RampMode mode = a.mode == "discretized" ? RampMode::Discretized : RampMode::Ideal;
    const std::size_t level = two_level ? 1 : a.level;
    const Synthesis s =
        synth_d_level(initial, final, level, {a.lambda, a.wmin, df, beta}, a.steps, mode);

    const WorkDistribution d = work_distribution(s.protocol);
    std::ostringstream plan;
    plan << "# e_a=" << num(s.plan.e_a) << '\n'
         << "# e_b=" << num(s.plan.e_b) << '\n'
         << "# level=" << s.plan.level << '\n'
         << "# p_success=" << num(s.plan.p_success) << '\n'
         << "# w_max=" << num(s.plan.w_max) << '\n'
         << "# w_min=" << num(s.plan.w_min) << '\n'
         << "# delta_F=" << num(df) << '\n'
         << "# mode=" << (mode == RampMode::Ideal ? "ideal" : "discretized") << '\n'
         << "# ramp_steps=" << s.plan.ramp_steps << '\n'
         << "# quasi_static_only=" << (s.plan.quasi_static_only ? "true" : "false") << '\n'
         << "# achieved_tail=" << num(dist_tail(d, a.lambda)) << '\n';
    out << plan.str();
    emit(a.out, protocol_to_json(s.protocol), out);
    return kOk;
}

struct SimulateArgs {
    std::string protocol;
    std::optional<double> lambda;
    std::size_t max_atoms = ConvolutionConfig{}.max_atoms;
    std::string out;
};

int do_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    const Protocol p = load_protocol(a.protocol);
    const WorkDistribution d = work_distribution(p, {a.max_atoms});
    const double df = delta_F(p);
    const double residual = jarzynski_residual(d, p.beta(), df);
    if (!(residual < kJarzynskiTolerance)) {
        err << "error: Jarzynski residual " << num(residual) << " exceeds " << num(kJarzynskiTolerance)
            << "; refusing to write the distribution\n";
        return kNumeric;
    }
    const double lambda = a.lambda.value_or(-df);
    std::ostringstream body;
    write_distribution(body, d);
    body << "# atoms=" << d.size() << '\n'
         << "# mean=" << num(dist_mean(d)) << '\n'
         << "# variance=" << num(dist_variance(d)) << '\n'
         << "# lambda=" << num(lambda) << '\n'
         << "# tail=" << num(dist_tail(d, lambda)) << '\n'
         << "# delta_F=" << num(df) << '\n'
         << "# jarzynski_residual=" << num(residual) << '\n';
    emit(a.out, body.str(), out);
    return kOk;
}

struct SampleArgs {
    std::string protocol;
    std::size_t n = 1000000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out;
};

int do_sample(const SampleArgs& a, std::ostream& out) {
    const Protocol p = load_protocol(a.protocol);
    const auto samples = sample_work(p, a.n, a.seed, a.threads);
    std::vector<double> w(samples.size());
    std::transform(samples.begin(), samples.end(), w.begin(), [](const auto& t) { return t.work; });
    std::sort(w.begin(), w.end());
    const double tol = kMergeRelativeTolerance * std::max(std::abs(w.front()), std::abs(w.back()));

    std::ostringstream body;
    body << "# seed=" << a.seed << '\n' << "# n=" << a.n << '\n' << "w,count,frequency\n";
    for (std::size_t i = 0; i < w.size();) {
        std::size_t j = i;
        while (j < w.size() && w[j] - w[i] <= tol) ++j;
        body << num(w[i]) << ',' << (j - i) << ','
             << num(static_cast<double>(j - i) / static_cast<double>(a.n)) << '\n';
        i = j;
    }
    emit(a.out, body.str(), out);
    return kOk;
}

struct SweepArgs {
    std::string x, y;
    double beta = 0, dF = 0;
    std::string quantity = "auto";
    std::string out;
};

int do_sweep(const SweepArgs& a, std::ostream& out) {
    require_finite({{"beta", a.beta}, {"dF", a.dF}});
    const InverseTemperature beta(a.beta);
    const Axis ax = parse_axis(a.x);
    const Axis ay = parse_axis(a.y);
    if (ax.name == ay.name) throw ValidationError("sweep axes must be different variables");
    auto has = [&](const char* n) { return ax.name == n || ay.name == n; };

    std::function<double(double lambda, double other)> cell;
    if (has("lambda") && has("wmin")) {
        if (a.quantity == "mu")
            cell = [&](double l, double w) { return mu_of_wmin(w, l, a.dF, beta); };
        else if (a.quantity == "auto" || a.quantity == "pmax")
            cell = [&](double l, double w) { return bound_with_wmin({l, w, a.dF, beta}); };
        else
            throw ValidationError("quantity for (lambda, wmin) is pmax or mu");
    } else if (has("lambda") && has("mu")) {
        if (a.quantity != "auto" && a.quantity != "pmax")
            throw ValidationError("quantity for (lambda, mu) is pmax");
        cell = [&](double l, double m) { return pmax_avg({l, m, a.dF, beta}); };
    } else {
        throw ValidationError("sweep needs lambda as one axis and wmin or mu as the other");
    }

    std::ostringstream body;
    body << "x,y,value\n";
    for (std::size_t i = 0; i < ax.count; ++i) {
        for (std::size_t j = 0; j < ay.count; ++j) {
            const double x = ax.at(i), y = ay.at(j);
            const double lambda = ax.name == "lambda" ? x : y;
            const double other = ax.name == "lambda" ? y : x;
            body << num(x) << ',' << num(y) << ',';
            try {
                body << num(cell(lambda, other));
            } catch (const InfeasibleQuery&) {
            } catch (const ValidationError&) {
            }
            body << '\n';
        }
    }
    emit(a.out, body.str(), out);
    return kOk;
}

struct SzilardArgs {
    double beta = 0, v_in = 0, v_fin = 0, v_l = 0;
    std::optional<double> v_a, v_b, lambda, wmin;
    std::string out;
};

int do_szilard(const SzilardArgs& a, std::ostream& out) {
    require_finite({{"beta", a.beta}, {"v-in", a.v_in}, {"v-fin", a.v_fin}, {"v-l", a.v_l}});
    const InverseTemperature beta(a.beta);
    const bool volumes = a.v_a || a.v_b;
    const bool query = a.lambda || a.wmin;
    if (volumes == query) throw ValidationError("give either --v-a/--v-b or --lambda/--wmin");

    SzilardPlan plan;
    WorkDistribution d = WorkDistribution::delta(0.0);
    if (volumes) {
        if (!(a.v_a && a.v_b)) throw ValidationError("--v-a and --v-b go together");
        auto r = szilard_distribution(a.v_in, a.v_fin, a.v_l, *a.v_a, *a.v_b, beta);
        plan = r.plan;
        d = std::move(r.distribution);
    } else {
        if (!(a.lambda && a.wmin)) throw ValidationError("--lambda and --wmin go together");
        const double df = gas_delta_F(a.v_in, a.v_fin, beta);
        plan = szilard_plan(a.v_in, a.v_fin, a.v_l, {*a.lambda, *a.wmin, df, beta});
        d = szilard_distribution(plan, beta);
    }
    std::ostringstream body;
    body << "# v_in=" << num(plan.v_in) << '\n'
         << "# v_fin=" << num(plan.v_fin) << '\n'
         << "# v_l=" << num(plan.v_l) << '\n'
         << "# v_a=" << num(plan.v_a) << '\n'
         << "# v_b=" << num(plan.v_b) << '\n'
         << "# p_success=" << num(plan.p_success) << '\n'
         << "# w_max=" << num(plan.w_max) << '\n'
         << "# w_min=" << num(plan.w_min) << '\n'
         << "# delta_F=" << num(gas_delta_F(plan.v_in, plan.v_fin, beta)) << '\n';
    write_distribution(body, d);
    emit(a.out, body.str(), out);
    return kOk;
}

struct SolveArgs {
    double beta = 0, dF = 0, lambda = 0, mu = 0;
    SolverConfig cfg;
};

int do_solve(const SolveArgs& a, std::ostream& out) {
    require_finite({{"beta", a.beta}, {"dF", a.dF}, {"lambda", a.lambda}, {"mu", a.mu}});
    const AverageQuery q{a.lambda, a.mu, a.dF, InverseTemperature(a.beta)};
    const double w = solve_wmin(q, a.cfg);
    const double p = bound_with_wmin({q.lambda, w, q.delta_F, q.beta});
    out << "w_min,p_max,residual\n"
        << num(w) << ',' << num(p) << ','
        << num(std::abs(mu_of_wmin(w, q.lambda, q.delta_F, q.beta) - q.mu)) << '\n';
    return kOk;
}

struct OracleArgs {
    double beta = 0, dF = 0, lambda = 0, mu = 0;
    std::optional<double> w_lo, step;
    unsigned threads = 1;
};

int do_oracle(const OracleArgs& a, std::ostream& out) {
    require_finite({{"beta", a.beta}, {"dF", a.dF}, {"lambda", a.lambda}, {"mu", a.mu}});
    const AverageQuery q{a.lambda, a.mu, a.dF, InverseTemperature(a.beta)};
    GridSpec g = GridSpec::defaults_for(q);
    if (a.w_lo) g.w_lo = *a.w_lo;
    if (a.step) g.step = *a.step;
    const OracleResult r = oracle_max_tail(q, g, a.threads);
    out << "# value=" << num(r.value) << '\n'
        << "# grid_points=" << r.grid_points << '\n'
        << "# feasible_triples=" << r.candidates << '\n';
    try {
        out << "# closed_form=" << num(pmax_avg(q)) << '\n';
    } catch (const std::exception&) {
    }
    for (const Atom& e : r.effective_support)
        out << "# effective_atom=" << num(e.work) << ':' << num(e.prob) << '\n';
    out << "w,p\n";
    for (const Atom& s : r.support) out << num(s.work) << ',' << num(s.prob) << '\n';
    return kOk;
}

struct VerifyArgs {
    std::string protocol;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

int do_verify(const VerifyArgs& a, std::ostream& out) {
    const Protocol p = load_protocol(a.protocol);
    const WorkDistribution d = work_distribution(p);
    const double df = delta_F(p);
    bool all = true;
    auto report = [&](const char* name, bool ok, double value) {
        out << (ok ? "PASS " : "FAIL ") << name << ' ' << num(value) << '\n';
        all = all && ok;
    };

    double mass = 0.0;
    for (const Atom& x : d.atoms()) mass += x.prob;
    report("normalization", std::abs(mass - 1.0) < 1e-12, mass);
    const double residual = jarzynski_residual(d, p.beta(), df);
    report("jarzynski", residual < kJarzynskiTolerance, residual);
    const double mean = dist_mean(d);
    report("second_law", mean <= -df + 1e-10, mean + df);

    bool monotone = true;
    double prev = dist_tail(d, d.min_work() - 1.0);
    for (const Atom& x : d.atoms()) {
        const double t = dist_tail(d, x.work);
        monotone = monotone && t <= prev + 1e-15;
        prev = t;
    }
    const double beyond = dist_tail(d, d.max_work() + 1.0 + std::abs(d.max_work()));
    report("tail_monotone", monotone && beyond == 0.0, beyond);
    report("jensen", exp_beta_average(d, p.beta()) >= std::exp(p.beta().value() * mean) * (1 - 1e-12),
           exp_beta_average(d, p.beta()));

    if (a.samples > 0) {
        const auto s = sample_work(p, a.samples, a.seed, a.threads);
        const double tv = total_variation(empirical_distribution(s), d);
        report("monte_carlo_tv", tv < 0.01, tv);
    }
    return all ? kOk : kNumeric;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Work-extraction fluctuations: bounds, optimal protocols, simulation"};
    app.name("fluctwork");
    app.require_subcommand(1);

    BoundArgs bound;
    auto* cmd_bound = app.add_subcommand("bound", "Optimal P(W >= lambda) given a minimum work");
    cmd_bound->add_option("--beta", bound.beta, "Inverse temperature")->required();
    cmd_bound->add_option("--dF", bound.dF, "Free-energy change F_fin - F_in")->required();
    cmd_bound->add_option("--lambda", bound.lambda, "Work threshold")->required();
    cmd_bound->add_option("--wmin", bound.wmin, "Guaranteed minimum work (default -inf)");
    cmd_bound->add_option("--digits", bound.digits, "Significant digits")->capture_default_str();

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "Synthesize the optimal three-stage protocol");
    cmd_synth->add_option("--beta", synth.beta)->required();
    cmd_synth->add_option("--lambda", synth.lambda)->required();
    cmd_synth->add_option("--wmin", synth.wmin)->required();
    cmd_synth->add_option("--dF", synth.dF, "Checked against the spectra when given");
    cmd_synth->add_option("--e-in", synth.e_in, "Two-level: initial excited energy");
    cmd_synth->add_option("--e-fin", synth.e_fin, "Two-level: final excited energy");
    cmd_synth->add_option("--initial", synth.initial, "d-level initial spectrum")->delimiter(',');
    cmd_synth->add_option("--final", synth.final, "d-level final spectrum")->delimiter(',');
    cmd_synth->add_option("--level", synth.level, "d-level: index of the quenched level");
    cmd_synth->add_option("--steps", synth.steps, "Ramp steps per quasi-static segment")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_synth->add_option("--mode", synth.mode)
        ->check(CLI::IsMember({"ideal", "discretized"}))
        ->capture_default_str();
    cmd_synth->add_option("--out", synth.out, "Protocol file to write");

    SimulateArgs sim;
    auto* cmd_sim = app.add_subcommand("simulate", "Exact work distribution of a protocol file");
    cmd_sim->add_option("--protocol", sim.protocol)->required();
    cmd_sim->add_option("--lambda", sim.lambda, "Tail threshold (default -dF)");
    cmd_sim->add_option("--max-atoms", sim.max_atoms)->capture_default_str();
    cmd_sim->add_option("--out", sim.out);

    SampleArgs sample;
    auto* cmd_sample = app.add_subcommand("sample", "Monte Carlo work histogram");
    cmd_sample->add_option("--protocol", sample.protocol)->required();
    cmd_sample->add_option("--n", sample.n)->check(CLI::PositiveNumber)->capture_default_str();
    cmd_sample->add_option("--seed", sample.seed)->capture_default_str();
    cmd_sample->add_option("--threads", sample.threads)->capture_default_str();
    cmd_sample->add_option("--out", sample.out);

    SweepArgs sweep;
    auto* cmd_sweep = app.add_subcommand("sweep", "Grid of closed-form values, x,y,value");
    cmd_sweep->add_option("--x", sweep.x, "name:lo:hi:count, name in lambda|wmin|mu")->required();
    cmd_sweep->add_option("--y", sweep.y, "name:lo:hi:count")->required();
    cmd_sweep->add_option("--beta", sweep.beta)->required();
    cmd_sweep->add_option("--dF", sweep.dF)->required();
    cmd_sweep->add_option("--quantity", sweep.quantity, "pmax or mu")
        ->check(CLI::IsMember({"auto", "pmax", "mu"}))
        ->capture_default_str();
    cmd_sweep->add_option("--out", sweep.out);

    SzilardArgs szi;
    auto* cmd_szi = app.add_subcommand("szilard", "One-molecule engine plan and work law");
    cmd_szi->add_option("--beta", szi.beta)->required();
    cmd_szi->add_option("--v-in", szi.v_in)->required();
    cmd_szi->add_option("--v-fin", szi.v_fin)->required();
    cmd_szi->add_option("--v-l", szi.v_l, "Left chamber volume")->required();
    cmd_szi->add_option("--v-a", szi.v_a);
    cmd_szi->add_option("--v-b", szi.v_b);
    cmd_szi->add_option("--lambda", szi.lambda);
    cmd_szi->add_option("--wmin", szi.wmin);
    cmd_szi->add_option("--out", szi.out);

    SolveArgs solve;
    auto* cmd_solve = app.add_subcommand("solve-mu", "w_min and P_max under an average-work constraint");
    cmd_solve->add_option("--beta", solve.beta)->required();
    cmd_solve->add_option("--dF", solve.dF)->required();
    cmd_solve->add_option("--lambda", solve.lambda)->required();
    cmd_solve->add_option("--mu", solve.mu)->required();
    cmd_solve->add_option("--tol", solve.cfg.tolerance)->capture_default_str();
    cmd_solve->add_option("--max-iter", solve.cfg.max_iterations)->capture_default_str();

    OracleArgs oracle;
    auto* cmd_oracle = app.add_subcommand("oracle", "Brute-force three-atom maximum on a work grid");
    cmd_oracle->add_option("--beta", oracle.beta)->required();
    cmd_oracle->add_option("--dF", oracle.dF)->required();
    cmd_oracle->add_option("--lambda", oracle.lambda)->required();
    cmd_oracle->add_option("--mu", oracle.mu)->required();
    cmd_oracle->add_option("--wlo", oracle.w_lo, "Grid lower end (default -dF - 10/beta)");
    cmd_oracle->add_option("--step", oracle.step, "Grid step (default 0.01/beta)");
    cmd_oracle->add_option("--threads", oracle.threads)->capture_default_str();

    VerifyArgs verify;
    auto* cmd_verify = app.add_subcommand("verify", "Check the invariants on a protocol file");
    cmd_verify->add_option("--protocol", verify.protocol)->required();
    cmd_verify->add_option("--samples", verify.samples, "Monte Carlo samples (0 skips)");
    cmd_verify->add_option("--seed", verify.seed);
    cmd_verify->add_option("--threads", verify.threads);

    std::vector<const char*> argv{"fluctwork"};
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalid;
    }

    try {
        if (cmd_bound->parsed()) return do_bound(bound, out);
        if (cmd_synth->parsed()) return do_synth(synth, out);
        if (cmd_sim->parsed()) return do_simulate(sim, out, err);
        if (cmd_sample->parsed()) return do_sample(sample, out);
        if (cmd_sweep->parsed()) return do_sweep(sweep, out);
        if (cmd_szi->parsed()) return do_szilard(szi, out);
        if (cmd_solve->parsed()) return do_solve(solve, out);
        if (cmd_oracle->parsed()) return do_oracle(oracle, out);
        if (cmd_verify->parsed()) return do_verify(verify, out);
    } catch (const InfeasibleQuery& e) {
        err << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kNumeric;
    } catch (const AtomOverflow& e) {
        err << "error: " << e.what() << '\n';
        return kNumeric;
    }
    return kInvalid;
}

}  // namespace fluctwork::cli
