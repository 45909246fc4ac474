#pragma once

// Bounds on psi = E[r1 - r0] over probability measures on the open unit cube
// {(pi, r0, r1)} that reproduce the observed 2x2 joint and respect the moment
// budget (f, g). The measure is restricted to a finite grid, which turns the
// problem into a linear program in the grid weights. Restricting the support
// shrinks the feasible set, so every grid solution is an inner approximation
// of the exact bounds and refinement can only widen [L, U] on nested grids.

#include "vbounds/core.hpp"
#include "vbounds/lp.hpp"

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbounds {

// Points per axis at the midpoints (k - 0.5)/m, k = 1..m. When anchored, each
// axis also carries the observed value it is tied to: Pr(x=1) on the pi axis,
// Pr(y=1|x=0) on the r0 axis and Pr(y=1|x=1) on the r1 axis (each only if it
// lies strictly inside (0, 1)). The anchor point reproduces the observed
// joint with zero dispersion, so anchored grids are feasible for every
// budget whenever the table has no empty cell.
struct GridSpec {
    int m = 16;
    bool anchored = true;
};

struct Refinement {
    bool enabled = true;
    double tol = 1e-3;
    int max_m = 256;
};

struct BoundsRequest {
    ObservedJoint joint;
    MomentBudget budget;
    GridSpec grid{};
    Refinement refinement{};
    lp::SolveOptions solver{};
};

enum class MomentKind { f, g };

// Row layout of every assembled program.
enum class RowKind { x0y1, x1y1, x0y0, x1y0, moment_f, moment_g, mass };

enum class Objective { contrast, moment_f, moment_g };

// Equality rows whose target cell is exactly zero are relaxed to
// 0 <= a.w <= kZeroCellBand, since no interior atom can meet them exactly.
inline constexpr double kZeroCellBand = 1e-9;

class CubeGrid : public lp::ColumnSource {
public:
    CubeGrid(const ObservedJoint& joint, GridSpec grid, Objective objective,
             std::vector<RowKind> rows);

    std::size_t size() const override { return pi_.size() * r0_.size() * r1_.size(); }
    std::size_t rows() const override { return rows_.size(); }
    double column(std::size_t j, std::span<double> coeffs) const override;
    lp::PricedColumn best_column(double cost_scale, std::span<const double> duals) const override;
    bool structured_pricing() const override { return true; }

    Atom atom(std::size_t j, double weight) const;
    const std::vector<double>& pi_axis() const { return pi_; }
    const std::vector<double>& r0_axis() const { return r0_; }
    const std::vector<double>& r1_axis() const { return r1_; }

private:
    double reduced_cost(double pi, double r0, double r1, double cost_scale,
                        std::span<const double> duals) const;
    double evaluate(double pi, double r0, double r1, std::span<double> coeffs) const;

    double px1_, py1_;
    int m_;
    Objective objective_;
    std::vector<RowKind> rows_;
    std::vector<double> pi_, r0_, r1_;
};

// One program per sense: cost r1 - r0, rows
//   E[(1-pi) r0] = Pr(x=0,y=1)      E[pi r1] = Pr(x=1,y=1)
//   E[(1-pi)(1-r0)] = Pr(x=0,y=0)   E[pi (1-r1)] = Pr(x=1,y=0)
//   E[(pi - px1)^2] <= f            E[(r - py1)^2] <= g
//   sum of weights = 1
// with r = pi r1 + (1 - pi) r0.
lp::LinearProgram assemble(const BoundsRequest& req, lp::Sense sense);

// The same program with grid resolution m taken from the argument.
lp::LinearProgram assemble(const BoundsRequest& req, lp::Sense sense, int m);

class BoundsInfeasible : public std::runtime_error {
public:
    BoundsInfeasible(const std::string& what, std::optional<double> min_f,
                     std::optional<double> min_g)
        : std::runtime_error(what), minimal_f(min_f), minimal_g(min_g) {}

    // Least feasible f given the requested g, and vice versa; empty when the
    // equality rows alone cannot be met on the grid.
    std::optional<double> minimal_f;
    std::optional<double> minimal_g;
};

class SolverLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// L from the minimizing program and U from the maximizing one. With
// refinement enabled, m doubles until both endpoints move by less than the
// tolerance or max_m is reached.
IdentifiedInterval solve_bounds(const BoundsRequest& req);

// Least value of the chosen moment over measures meeting the equality rows
// and the other moment's bound. Throws BoundsInfeasible when the equality
// rows cannot be met at the finest grid.
double minimal_budget(const ObservedJoint& joint, MomentKind which, double other_value,
                      const GridSpec& grid = {}, const Refinement& refinement = {},
                      const lp::SolveOptions& solver = {});

}  // namespace vbounds
