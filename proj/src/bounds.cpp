#include "vbounds/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

namespace vbounds {

namespace {

std::vector<double> make_axis(int m, bool anchored, std::optional<double> anchor) {
    std::vector<double> axis;
    axis.reserve(static_cast<std::size_t>(m) + 1);
    for (int k = 1; k <= m; ++k) axis.push_back((k - 0.5) / m);
    if (anchored && anchor && *anchor > 0 && *anchor < 1 &&
        std::find(axis.begin(), axis.end(), *anchor) == axis.end())
        axis.push_back(*anchor);
    return axis;
}

double cell_target(const ObservedJoint& j, RowKind kind) {
    switch (kind) {
        case RowKind::x0y1: return j.p01();
        case RowKind::x1y1: return j.p11();
        case RowKind::x0y0: return j.p00();
        case RowKind::x1y0: return j.p10();
        default: return 0;
    }
}

const std::vector<RowKind> kAllRows = {RowKind::x0y1,     RowKind::x1y1,     RowKind::x0y0,
                                       RowKind::x1y0,     RowKind::moment_f, RowKind::moment_g,
                                       RowKind::mass};

std::vector<lp::Row> row_bounds(const ObservedJoint& joint, const std::vector<RowKind>& kinds,
                                double f, double g) {
    std::vector<lp::Row> rows;
    for (RowKind k : kinds) {
        switch (k) {
            case RowKind::moment_f: rows.push_back({lp::Relation::le, f}); break;
            case RowKind::moment_g: rows.push_back({lp::Relation::le, g}); break;
            case RowKind::mass: rows.push_back({lp::Relation::eq, 1.0}); break;
            default: {
                double target = cell_target(joint, k);
                if (target == 0)
                    rows.push_back({lp::Relation::le, kZeroCellBand});
                else
                    rows.push_back({lp::Relation::eq, target});
            }
        }
    }
    return rows;
}

}  // namespace

CubeGrid::CubeGrid(const ObservedJoint& joint, GridSpec grid, Objective objective,
                   std::vector<RowKind> rows)
    : px1_(joint.px1()), py1_(joint.py1()), m_(grid.m), objective_(objective),
      rows_(std::move(rows)) {
    if (grid.m < 1) throw InputError("grid resolution must be positive");
    pi_ = make_axis(grid.m, grid.anchored, px1_);
    r0_ = make_axis(grid.m, grid.anchored, joint.risk_untreated());
    r1_ = make_axis(grid.m, grid.anchored, joint.risk_treated());
}

double CubeGrid::evaluate(double pi, double r0, double r1, std::span<double> coeffs) const {
    const double r = pi * r1 + (1 - pi) * r0;
    const double df = pi - px1_;
    const double dg = r - py1_;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        double v = 0;
        switch (rows_[i]) {
            case RowKind::x0y1: v = (1 - pi) * r0; break;
            case RowKind::x1y1: v = pi * r1; break;
            case RowKind::x0y0: v = (1 - pi) * (1 - r0); break;
            case RowKind::x1y0: v = pi * (1 - r1); break;
            case RowKind::moment_f: v = df * df; break;
            case RowKind::moment_g: v = dg * dg; break;
            case RowKind::mass: v = 1; break;
        }
        coeffs[i] = v;
    }
    switch (objective_) {
        case Objective::contrast: return r1 - r0;
        case Objective::moment_f: return df * df;
        case Objective::moment_g: return dg * dg;
    }
    return 0;
}

double CubeGrid::column(std::size_t j, std::span<double> coeffs) const {
    const std::size_t n1 = r1_.size();
    const std::size_t n0 = r0_.size();
    const std::size_t i1 = j % n1;
    const std::size_t i0 = (j / n1) % n0;
    const std::size_t ip = j / (n1 * n0);
    return evaluate(pi_[ip], r0_[i0], r1_[i1], coeffs);
}

Atom CubeGrid::atom(std::size_t j, double weight) const {
    const std::size_t n1 = r1_.size();
    const std::size_t n0 = r0_.size();
    return {pi_[j / (n1 * n0)], r0_[(j / n1) % n0], r1_[j % n1], weight};
}

double CubeGrid::reduced_cost(double pi, double r0, double r1, double cost_scale,
                              std::span<const double> duals) const {
    double a[8];
    double d = cost_scale * evaluate(pi, r0, r1, std::span<double>(a, rows_.size()));
    for (std::size_t i = 0; i < rows_.size(); ++i) d -= duals[i] * a[i];
    return d;
}

// For fixed (pi, r0) every row coefficient and the cost are polynomials of
// degree <= 2 in r1, so the reduced cost along an r1 line is a quadratic.
// Its minimum over the uniform midpoints lies at an end of the axis or at the
// two midpoints bracketing the vertex; the anchor is checked separately.
lp::PricedColumn CubeGrid::best_column(double cost_scale, std::span<const double> duals) const {
    const std::size_t n1 = r1_.size();
    const std::size_t n0 = r0_.size();
    const int m = m_;
    lp::PricedColumn best;

    auto consider = [&](std::size_t ip, std::size_t i0, std::size_t i1) {
        double d = reduced_cost(pi_[ip], r0_[i0], r1_[i1], cost_scale, duals);
        if (!best.found || d < best.reduced_cost)
            best = {(ip * n0 + i0) * n1 + i1, d, true};
    };

    for (std::size_t ip = 0; ip < pi_.size(); ++ip) {
        const double pi = pi_[ip];
        for (std::size_t i0 = 0; i0 < n0; ++i0) {
            const double r0 = r0_[i0];
            const double q0 = reduced_cost(pi, r0, 0.0, cost_scale, duals);
            const double qh = reduced_cost(pi, r0, 0.5, cost_scale, duals);
            const double q1 = reduced_cost(pi, r0, 1.0, cost_scale, duals);
            const double a = 2.0 * (q1 - 2.0 * qh + q0);
            const double b = q1 - q0 - a;

            consider(ip, i0, 0);
            consider(ip, i0, static_cast<std::size_t>(m - 1));
            if (a > 0) {
                const double vertex = -b / (2.0 * a);
                const double k = std::floor(vertex * m - 0.5);
                const double lo = std::clamp(k, 0.0, static_cast<double>(m - 1));
                const double hi = std::clamp(k + 1.0, 0.0, static_cast<double>(m - 1));
                consider(ip, i0, static_cast<std::size_t>(lo));
                consider(ip, i0, static_cast<std::size_t>(hi));
            }
            for (std::size_t i1 = static_cast<std::size_t>(m); i1 < n1; ++i1) consider(ip, i0, i1);
        }
    }
    return best;
}

lp::LinearProgram assemble(const BoundsRequest& req, lp::Sense sense, int m) {
    GridSpec grid = req.grid;
    grid.m = m;
    lp::LinearProgram prog;
    prog.sense = sense;
    prog.rows = row_bounds(req.joint, kAllRows, req.budget.f(), req.budget.g());
    prog.columns = std::make_shared<CubeGrid>(req.joint, grid, Objective::contrast, kAllRows);
    return prog;
}

lp::LinearProgram assemble(const BoundsRequest& req, lp::Sense sense) {
    return assemble(req, sense, req.grid.m);
}

namespace {

struct LevelResult {
    int m;
    lp::LpSolution lo;
    lp::LpSolution hi;
    std::shared_ptr<const CubeGrid> grid;
};

// Certificates keep only atoms whose weight exceeds 1e-12.
AtomicMeasure to_measure(const lp::LpSolution& sol, const CubeGrid& grid) {
    AtomicMeasure mu;
    for (const auto& s : sol.support)
        if (s.weight > 1e-12) mu.atoms.push_back(grid.atom(s.column, s.weight));
    return mu;
}

LevelResult solve_level(const BoundsRequest& req, int m) {
    lp::LinearProgram lo = assemble(req, lp::Sense::minimize, m);
    lp::LinearProgram hi = assemble(req, lp::Sense::maximize, m);
    auto grid = std::static_pointer_cast<const CubeGrid>(lo.columns);
    hi.columns = lo.columns;
    auto upper = std::async(std::launch::async, [&] { return lp::solve(hi, req.solver); });
    lp::LpSolution lower = lp::solve(lo, req.solver);
    return {m, std::move(lower), upper.get(), grid};
}

bool is_infeasible(const LevelResult& r) {
    return r.lo.status == lp::Status::infeasible || r.hi.status == lp::Status::infeasible;
}

void check_limits(const LevelResult& r) {
    for (const auto* s : {&r.lo, &r.hi}) {
        if (s->status == lp::Status::iteration_limit) {
            std::ostringstream msg;
            msg << "simplex iteration limit reached at grid m=" << r.m;
            throw SolverLimit(msg.str());
        }
        if (s->status == lp::Status::unbounded)
            throw SolverLimit("bounded program reported unbounded");
    }
}

std::vector<int> grid_levels(const GridSpec& grid, const Refinement& ref) {
    if (grid.m < 1) throw InputError("grid resolution must be positive");
    std::vector<int> levels{grid.m};
    if (!ref.enabled) return levels;
    if (!(ref.tol > 0)) throw InputError("refinement tolerance must be positive");
    while (levels.back() * 2 <= ref.max_m) levels.push_back(levels.back() * 2);
    return levels;
}

std::optional<double> try_minimal(const ObservedJoint& joint, MomentKind which, double other,
                                  const GridSpec& grid, const Refinement& ref,
                                  const lp::SolveOptions& solver) {
    try {
        return minimal_budget(joint, which, other, grid, ref, solver);
    } catch (const BoundsInfeasible&) {
        return std::nullopt;
    }
}

}  // namespace

IdentifiedInterval solve_bounds(const BoundsRequest& req) {
    const std::vector<int> levels = grid_levels(req.grid, req.refinement);

    IdentifiedInterval out;
    std::optional<LevelResult> last;
    for (int m : levels) {
        LevelResult r = solve_level(req, m);
        check_limits(r);
        if (is_infeasible(r)) {
            last.reset();
            continue;
        }
        double lower = r.lo.objective;
        double upper = r.hi.objective;
        if (std::abs(lower - upper) < 1e-9) lower = upper = 0.5 * (lower + upper);
        out.levels.push_back({m, lower, upper});

        bool settled = false;
        if (last && req.refinement.enabled) {
            const GridLevel& prev = out.levels[out.levels.size() - 2];
            settled = std::abs(lower - prev.lower) < req.refinement.tol &&
                      std::abs(upper - prev.upper) < req.refinement.tol;
        }
        out.lower = lower;
        out.upper = upper;
        out.grid_resolution = m;
        out.certificate_min = to_measure(r.lo, *r.grid);
        out.certificate_max = to_measure(r.hi, *r.grid);
        out.converged = settled;
        last = std::move(r);
        if (settled) break;
    }

    if (out.levels.empty()) {
        GridSpec finest = req.grid;
        finest.m = levels.back();
        Refinement single{false, req.refinement.tol, req.refinement.max_m};
        auto min_f = try_minimal(req.joint, MomentKind::f, req.budget.g(), finest, single,
                                 req.solver);
        auto min_g = try_minimal(req.joint, MomentKind::g, req.budget.f(), finest, single,
                                 req.solver);
        std::ostringstream msg;
        msg << "moment budget infeasible at grid m=" << finest.m;
        if (!min_f && !min_g) msg << "; the observed table cannot be reproduced on the grid";
        throw BoundsInfeasible(msg.str(), min_f, min_g);
    }
    return out;
}

double minimal_budget(const ObservedJoint& joint, MomentKind which, double other_value,
                      const GridSpec& grid, const Refinement& refinement,
                      const lp::SolveOptions& solver) {
    if (!std::isfinite(other_value) || other_value < 0)
        throw InputError("the other moment bound must be non-negative");
    std::vector<RowKind> kinds = {RowKind::x0y1, RowKind::x1y1, RowKind::x0y0, RowKind::x1y0,
                                  which == MomentKind::f ? RowKind::moment_g : RowKind::moment_f,
                                  RowKind::mass};
    const Objective objective = which == MomentKind::f ? Objective::moment_f : Objective::moment_g;

    std::optional<double> value;
    std::optional<double> previous;
    for (int m : grid_levels(grid, refinement)) {
        GridSpec g = grid;
        g.m = m;
        lp::LinearProgram prog;
        prog.sense = lp::Sense::minimize;
        prog.rows = row_bounds(joint, kinds, other_value, other_value);
        prog.columns = std::make_shared<CubeGrid>(joint, g, objective, kinds);
        lp::LpSolution sol = lp::solve(prog, solver);
        if (sol.status == lp::Status::iteration_limit)
            throw SolverLimit("simplex iteration limit reached while computing a minimal budget");
        if (sol.status != lp::Status::optimal) {
            value.reset();
            continue;
        }
        previous = value;
        value = std::max(sol.objective, 0.0);
        if (previous && refinement.enabled && std::abs(*value - *previous) < refinement.tol) break;
    }
    if (!value)
        throw BoundsInfeasible("the observed table cannot be reproduced on the grid", std::nullopt,
                               std::nullopt);
    return *value;
}

}  // namespace vbounds
