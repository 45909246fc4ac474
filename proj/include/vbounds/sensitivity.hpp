#pragma once

// Version confounding: the bias K = psi - tau, its per-individual
// decomposition, and the shift from bounds on psi to bounds on tau.

#include "vbounds/core.hpp"

#include <span>
#include <vector>

namespace vbounds {

// Propensity pi, natural conditional prognoses r_{|1}, r_{|0}, and the four
// conditional interventional expectations E(Y_x | X = x'), written e<x><x'>.
// Assumes the version law does not depend on the intervention, so that
// r(1) = pi e11 + (1 - pi) e10 and r(0) = pi e01 + (1 - pi) e00.
struct IndividualProfile {
    double pi;
    double r_given_1;
    double r_given_0;
    double e11;
    double e10;
    double e00;
    double e01;

    double r_int_1() const { return pi * e11 + (1 - pi) * e10; }
    double r_int_0() const { return pi * e01 + (1 - pi) * e00; }
};

// Throws InputError naming the first field outside [0, 1].
void validate(const IndividualProfile& p);

struct BiasDecomposition {
    double delta1;  // inconsistency between natural and interventional outcomes
    double delta2;  // effect of the versions themselves
    double k_i;
};

double k_individual(const IndividualProfile& p);
BiasDecomposition decompose(const IndividualProfile& p);

// Mean of k_individual; throws InputError on an empty list.
double population_k(std::span<const IndividualProfile> profiles);

TauInterval shift_interval(const IdentifiedInterval& interval, double k);

// K known only to lie in [k_min, k_max]; either end may be infinite, giving a
// one-sided statement about tau.
TauInterval shift_interval(const IdentifiedInterval& interval, double k_min, double k_max);

// f = d_x px1 (1 - px1), g = d_y py1 (1 - py1), where d_x and d_y are the
// coefficients of discrimination of treatment and outcome.
MomentBudget calibrate_budget(const ObservedJoint& joint, double d_x, double d_y);

}  // namespace vbounds
