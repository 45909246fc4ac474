#pragma once

// Revised simplex for linear programs with a handful of rows and a very large,
// possibly implicit, family of non-negative columns.
//
// Columns are supplied by a ColumnSource. Entering columns are chosen by
// Dantzig's rule over the whole source on every iteration; sources with
// exploitable structure may override best_column() to find the same minimum
// without touching every column. Optimality is always confirmed by a literal
// scan of every column before a solve reports success.

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace vbounds::lp {

enum class Sense { minimize, maximize };
enum class Relation { eq, le };

struct Row {
    Relation relation;
    double rhs;
};

struct PricedColumn {
    std::size_t index = 0;
    double reduced_cost = 0;
    bool found = false;
};

class ColumnSource {
public:
    virtual ~ColumnSource() = default;

    virtual std::size_t size() const = 0;
    virtual std::size_t rows() const = 0;

    // Writes the row coefficients of column j into coeffs (length rows())
    // and returns its objective coefficient. Must be a pure function of j.
    virtual double column(std::size_t j, std::span<double> coeffs) const = 0;

    // Column minimizing cost_scale * cost_j - duals . a_j.
    virtual PricedColumn best_column(double cost_scale, std::span<const double> duals) const;

    // Lowest-index column whose reduced cost is below -tol (Bland's rule).
    virtual PricedColumn first_improving(double cost_scale, std::span<const double> duals,
                                         double tol) const;

    // Whether best_column() is something other than the plain scan.
    virtual bool structured_pricing() const { return false; }
};

class ExplicitColumns : public ColumnSource {
public:
    explicit ExplicitColumns(std::size_t rows) : rows_(rows) {}

    // Appends a column; coeffs.size() must equal rows().
    void add(double cost, std::span<const double> coeffs);

    std::size_t size() const override { return costs_.size(); }
    std::size_t rows() const override { return rows_; }
    double column(std::size_t j, std::span<double> coeffs) const override;

private:
    std::size_t rows_;
    std::vector<double> costs_;
    std::vector<double> coeffs_;
};

struct LinearProgram {
    Sense sense = Sense::minimize;
    std::vector<Row> rows;
    std::shared_ptr<const ColumnSource> columns;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(Status s);

struct SupportEntry {
    std::size_t column;
    double weight;
};

struct LpSolution {
    Status status = Status::infeasible;
    double objective = 0;
    std::vector<SupportEntry> support;
    // Duals of the original rows, in the problem's own sense: at an optimum
    // the objective equals dual_values . rhs.
    std::vector<double> dual_values;
    std::size_t iterations = 0;
    bool used_bland = false;
};

struct SolveOptions {
    double tol_feas = 1e-9;
    double tol_opt = 1e-9;
    std::size_t max_iter = 100000;
    std::size_t refactor_every = 64;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws std::invalid_argument for malformed programs and SolverError when
// the basis becomes singular even under Bland's rule.
LpSolution solve(const LinearProgram& lp, const SolveOptions& opts = {});

}  // namespace vbounds::lp
