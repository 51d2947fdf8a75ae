#pragma once

#include "fluctwork/bounds.hpp"
#include "fluctwork/thermo.hpp"

namespace fluctwork {

// One-molecule gas in a box split into a left chamber of fixed volume v_l
// and a right chamber closed by a piston. The optimal cycle: expand with the
// door open from v_in to v_a, close the door and compress to v_b, reopen and
// thermalize, expand with the door open to v_fin.

struct SzilardPlan {
    double v_in = 0.0;
    double v_fin = 0.0;
    double v_l = 0.0;
    double v_a = 0.0;
    double v_b = 0.0;
    double p_success = 0.0;
    double w_max = 0.0;
    double w_min = 0.0;
    bool quasi_static_only = false;  // door never closed: deterministic -dF
};

struct SzilardOutcome {
    WorkDistribution distribution;
    SzilardPlan plan;
};

/// -(1/beta) ln(v_fin / v_in).
double gas_delta_F(double v_in, double v_fin, InverseTemperature beta);

/// Work law of the cycle for given volumes; needs v_a > v_b > v_l > 0.
SzilardOutcome szilard_distribution(double v_in, double v_fin, double v_l, double v_a, double v_b,
                                    InverseTemperature beta);

/// Volumes v_a, v_b that make the cycle saturate bound_with_wmin for q,
/// whose delta_F must equal gas_delta_F(v_in, v_fin).
SzilardPlan szilard_plan(double v_in, double v_fin, double v_l, const BoundQuery& q);

/// Work law of a plan from szilard_plan (handles the quasi-static route).
WorkDistribution szilard_distribution(const SzilardPlan& plan, InverseTemperature beta);

}  // namespace fluctwork
