#pragma once

// Domain types shared by the bounds, sensitivity and simulation layers.
//
// A 2x2 table is indexed (treatment x, outcome y): n11 is treated with the
// outcome, n10 treated without, n01 untreated with, n00 untreated without.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbounds {

class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ContingencyTable {
public:
    // Counts. Throws InputError on negative or non-finite cells or zero total.
    static ContingencyTable from_counts(double n11, double n10, double n01, double n00);
    // Relative frequencies, which must sum to 1 within 1e-9.
    static ContingencyTable from_frequencies(double p11, double p10, double p01, double p00);
    // Counts unless the cells sum to 1 within 1e-9, in which case frequencies.
    static ContingencyTable detect(double n11, double n10, double n01, double n00);

    double n11() const { return cells_[0]; }
    double n10() const { return cells_[1]; }
    double n01() const { return cells_[2]; }
    double n00() const { return cells_[3]; }
    double total() const { return cells_[0] + cells_[1] + cells_[2] + cells_[3]; }
    bool is_frequencies() const { return frequencies_; }
    bool has_zero_cell() const;

private:
    ContingencyTable(std::array<double, 4> cells, bool frequencies)
        : cells_(cells), frequencies_(frequencies) {}

    std::array<double, 4> cells_;
    bool frequencies_;
};

// The four joint probabilities Pr(x, y) and the two marginals.
class ObservedJoint {
public:
    // Throws InputError unless the cells lie in [0,1] and sum to 1 within 1e-12.
    ObservedJoint(double p11, double p10, double p01, double p00);

    double p11() const { return p11_; }
    double p10() const { return p10_; }
    double p01() const { return p01_; }
    double p00() const { return p00_; }
    double px1() const { return p11_ + p10_; }
    double py1() const { return p11_ + p01_; }

    // Pr(y=1 | x=1) and Pr(y=1 | x=0); nullopt when the conditioning event is empty.
    std::optional<double> risk_treated() const;
    std::optional<double> risk_untreated() const;

    bool has_zero_cell() const;

    // Treatment labels exchanged: x -> 1 - x.
    ObservedJoint swap_treatment() const { return {p01_, p00_, p11_, p10_}; }

private:
    double p11_, p10_, p01_, p00_;
};

ObservedJoint normalize(const ContingencyTable& table);

// Pr(y=1|x=1) / Pr(y=1|x=0); nullopt when either conditional is undefined or
// the baseline risk is zero.
std::optional<double> relative_risk(const ObservedJoint& j);

// Pr(y=1|x=1) - Pr(y=1|x=0). Throws InputError on a degenerate treatment margin.
double risk_difference(const ObservedJoint& j);

// Upper bounds f on E[(pi - Pr(x=1))^2] and g on E[(r - Pr(y=1))^2].
class MomentBudget {
public:
    // Negative or non-finite values throw InputError; values above 0.25 are
    // clamped and reported through clamped().
    MomentBudget(double f, double g);

    double f() const { return f_; }
    double g() const { return g_; }
    bool clamped() const { return clamped_; }

    static constexpr double kMax = 0.25;

private:
    double f_, g_;
    bool clamped_ = false;
};

// One point (pi, r0, r1) of the open unit cube carrying probability mass.
struct Atom {
    double pi;
    double r0;
    double r1;
    double weight;
};

struct AtomicMeasure {
    std::vector<Atom> atoms;

    double total_weight() const;
    std::size_t support_size(double threshold = 1e-9) const;
};

// Moments of a measure against the constraint system of the bounds problem.
struct MeasureMoments {
    double mass = 0;
    double x0y1 = 0;     // E[(1-pi) r0]
    double x1y1 = 0;     // E[pi r1]
    double x0y0 = 0;     // E[(1-pi)(1-r0)]
    double x1y0 = 0;     // E[pi (1-r1)]
    double moment_f = 0; // E[(pi - px1)^2]
    double moment_g = 0; // E[(r - py1)^2], r = pi r1 + (1-pi) r0
    double contrast = 0; // E[r1 - r0]
};

MeasureMoments evaluate(const AtomicMeasure& mu, const ObservedJoint& joint);

struct GridLevel {
    int m;
    double lower;
    double upper;
};

// Bounds (L, U) on the mean conditional prognosis difference psi.
struct IdentifiedInterval {
    double lower = 0;
    double upper = 0;
    AtomicMeasure certificate_min;
    AtomicMeasure certificate_max;
    int grid_resolution = 0;
    bool converged = false;
    std::vector<GridLevel> levels;
};

// Interval for the causal estimand tau after removing the version bias K.
// k_min == k_max for a scalar K; one-sided ranges leave the corresponding
// endpoint infinite.
struct TauInterval {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double k_min = 0;
    double k_max = 0;

    bool scalar_k() const { return k_min == k_max; }
};

}  // namespace vbounds
