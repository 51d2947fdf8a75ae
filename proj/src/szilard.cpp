#include "fluctwork/szilard.hpp"

#include <cmath>
#include <sstream>

#include "fluctwork/errors.hpp"

namespace fluctwork {

namespace {

void require_volume(double v, const char* name) {
    if (!std::isfinite(v) || !(v > 0.0)) {
        std::ostringstream os;
        os << name << " must be a positive finite volume, got " << v;
        throw ValidationError(os.str());
    }
}

}  // namespace

double gas_delta_F(double v_in, double v_fin, InverseTemperature beta) {
    require_volume(v_in, "v_in");
    require_volume(v_fin, "v_fin");
    return -std::log(v_fin / v_in) / beta.value();
}

SzilardOutcome szilard_distribution(double v_in, double v_fin, double v_l, double v_a, double v_b,
                                    InverseTemperature beta) {
    require_volume(v_in, "v_in");
    require_volume(v_fin, "v_fin");
    require_volume(v_l, "v_l");
    require_volume(v_a, "v_a");
    require_volume(v_b, "v_b");
    if (!(v_a > v_b && v_b > v_l)) {
        std::ostringstream os;
        os << "chamber geometry needs v_a > v_b > v_l, got v_a = " << v_a << ", v_b = " << v_b
           << ", v_l = " << v_l;
        throw ValidationError(os.str());
    }
    const double t = 1.0 / beta.value();
    SzilardPlan plan{v_in, v_fin, v_l, v_a, v_b};
    plan.w_max = t * (std::log(v_a / v_in) + std::log(v_fin / v_b));
    // Particle trapped on the right: compression of the right chamber only.
    plan.w_min = plan.w_max + t * std::log((v_b - v_l) / (v_a - v_l));
    plan.p_success = v_l / v_a;
    WorkDistribution d = merge_atoms({{plan.w_min, 1.0 - plan.p_success}, {plan.w_max, plan.p_success}});
    return {std::move(d), plan};
}

SzilardPlan szilard_plan(double v_in, double v_fin, double v_l, const BoundQuery& q) {
    require_volume(v_l, "v_l");
    const double b = q.beta.value();
    const double df = gas_delta_F(v_in, v_fin, q.beta);
    if (std::abs(df - q.delta_F) > 1e-9 * std::max(1.0, std::abs(df))) {
        std::ostringstream os;
        os << "query delta_F = " << q.delta_F << " does not match the volumes (" << df << ")";
        throw ValidationError(os.str());
    }
    // Validates ordering and consistency of the query.
    const double bound = bound_with_wmin(q);

    SzilardPlan plan{v_in, v_fin, v_l};
    if (q.lambda <= -q.delta_F || bound == 0.0) {
        plan.quasi_static_only = true;
        plan.v_a = plan.v_b = v_l;
        plan.p_success = q.lambda <= -q.delta_F ? 1.0 : 0.0;
        plan.w_max = plan.w_min = -q.delta_F;
        return plan;
    }
    if (q.w_min == kNoMinimum)
        throw InfeasibleQuery("w_min = -inf needs an infinitely compressed chamber (v_b = v_l)");

    // v_a/v_l = (e^{b Wmax} - e^{b Wmin}) / (e^{-b dF} - e^{b Wmin})
    // v_b/v_l = (e^{-b Wmax} - e^{-b Wmin}) / (e^{b dF} - e^{-b Wmin})
    const double x = b * (q.lambda + q.delta_F);
    const double y = b * (-q.delta_F - q.w_min);
    const double ratio_a = -std::expm1(-(x + y)) / -std::expm1(-y) * std::exp(x);
    const double ratio_b = std::expm1(x + y) / std::expm1(y) * std::exp(-x);
    if (!(ratio_a > 0.0) || !(ratio_b > 0.0) || !std::isfinite(ratio_a) || !std::isfinite(ratio_b))
        throw InfeasibleQuery("volume relations give a non-positive chamber volume");
    plan.v_a = v_l * ratio_a;
    plan.v_b = v_l * ratio_b;
    plan.p_success = 1.0 / ratio_a;
    plan.w_max = q.lambda;
    plan.w_min = q.w_min;
    return plan;
}

WorkDistribution szilard_distribution(const SzilardPlan& plan, InverseTemperature beta) {
    if (plan.quasi_static_only)
        return WorkDistribution::delta(-gas_delta_F(plan.v_in, plan.v_fin, beta));
    return szilard_distribution(plan.v_in, plan.v_fin, plan.v_l, plan.v_a, plan.v_b, beta).distribution;
}

}  // namespace fluctwork
