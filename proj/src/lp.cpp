#include "vbounds/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace vbounds::lp {

PricedColumn ColumnSource::best_column(double cost_scale, std::span<const double> duals) const {
    std::vector<double> a(rows());
    PricedColumn best;
    const std::size_t n = size();
    for (std::size_t j = 0; j < n; ++j) {
        double d = cost_scale * column(j, a);
        for (std::size_t i = 0; i < a.size(); ++i) d -= duals[i] * a[i];
        if (!best.found || d < best.reduced_cost) best = {j, d, true};
    }
    return best;
}

PricedColumn ColumnSource::first_improving(double cost_scale, std::span<const double> duals,
                                           double tol) const {
    std::vector<double> a(rows());
    const std::size_t n = size();
    for (std::size_t j = 0; j < n; ++j) {
        double d = cost_scale * column(j, a);
        for (std::size_t i = 0; i < a.size(); ++i) d -= duals[i] * a[i];
        if (d < -tol) return {j, d, true};
    }
    return {};
}

void ExplicitColumns::add(double cost, std::span<const double> coeffs) {
    if (coeffs.size() != rows_) throw std::invalid_argument("column has wrong number of rows");
    costs_.push_back(cost);
    coeffs_.insert(coeffs_.end(), coeffs.begin(), coeffs.end());
}

double ExplicitColumns::column(std::size_t j, std::span<double> coeffs) const {
    std::copy_n(coeffs_.begin() + static_cast<std::ptrdiff_t>(j * rows_), rows_, coeffs.begin());
    return costs_[j];
}

const char* to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
        case Status::iteration_limit: return "iteration limit";
    }
    return "unknown";
}

namespace {

struct SingularBasis {};

constexpr double kPivotTol = 1e-11;
constexpr double kSingularTol = 1e-12;

// Variable ids: structural columns [0, n), then one slack per row, then one
// artificial per row. Slacks exist only for <= rows.
class Simplex {
public:
    Simplex(const LinearProgram& lp, const SolveOptions& opts, bool bland)
        : lp_(lp), src_(*lp.columns), opts_(opts), bland_(bland),
          n_(src_.size()), m_(lp.rows.size()), scratch_(m_) {
        sign_.resize(m_);
        b_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            sign_[i] = lp.rows[i].rhs < 0 ? -1.0 : 1.0;
            b_[i] = sign_[i] * lp.rows[i].rhs;
        }
        cost_scale_ = lp.sense == Sense::minimize ? 1.0 : -1.0;
    }

    LpSolution run() {
        init_basis();
        LpSolution out;

        phase_ = 1;
        Status st = iterate(out);
        if (st == Status::iteration_limit) return finish(out, st);
        refactor();
        double infeas = 0;
        for (std::size_t i = 0; i < m_; ++i)
            if (is_artificial(basis_[i])) infeas += std::max(x_[i], 0.0);
        if (infeas > opts_.tol_feas * static_cast<double>(std::max<std::size_t>(m_, 1)))
            return finish(out, Status::infeasible);

        phase_ = 2;
        st = iterate(out);
        return finish(out, st);
    }

private:
    bool is_structural(std::size_t v) const { return v < n_; }
    bool is_slack(std::size_t v) const { return v >= n_ && v < n_ + m_; }
    bool is_artificial(std::size_t v) const { return v >= n_ + m_; }

    // Column of variable v in the sign-adjusted system; returns its cost in
    // the current phase.
    double column_of(std::size_t v, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        if (is_structural(v)) {
            double c = src_.column(v, scratch_);
            for (std::size_t i = 0; i < m_; ++i) out[i] = sign_[i] * scratch_[i];
            return phase_ == 1 ? 0.0 : cost_scale_ * c;
        }
        if (is_slack(v)) {
            std::size_t i = v - n_;
            out[i] = sign_[i];
            return 0.0;
        }
        std::size_t i = v - n_ - m_;
        out[i] = 1.0;
        return phase_ == 1 ? 1.0 : 0.0;
    }

    void init_basis() {
        basis_.assign(m_, 0);
        for (std::size_t i = 0; i < m_; ++i) {
            bool slack_ok = lp_.rows[i].relation == Relation::le && sign_[i] > 0;
            basis_[i] = slack_ok ? n_ + i : n_ + m_ + i;
        }
        binv_.assign(m_ * m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
        x_ = b_;
        pivots_since_refactor_ = 0;
    }

    // Rebuilds the basis inverse by Gauss-Jordan elimination with partial pivoting.
    void refactor() {
        std::vector<double> bmat(m_ * m_), col(m_);
        for (std::size_t k = 0; k < m_; ++k) {
            column_of(basis_[k], col);
            for (std::size_t i = 0; i < m_; ++i) bmat[i * m_ + k] = col[i];
        }
        std::vector<double> inv(m_ * m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
        for (std::size_t c = 0; c < m_; ++c) {
            std::size_t p = c;
            for (std::size_t r = c + 1; r < m_; ++r)
                if (std::abs(bmat[r * m_ + c]) > std::abs(bmat[p * m_ + c])) p = r;
            if (std::abs(bmat[p * m_ + c]) < kSingularTol) throw SingularBasis{};
            if (p != c) {
                for (std::size_t k = 0; k < m_; ++k) {
                    std::swap(bmat[p * m_ + k], bmat[c * m_ + k]);
                    std::swap(inv[p * m_ + k], inv[c * m_ + k]);
                }
            }
            double piv = bmat[c * m_ + c];
            for (std::size_t k = 0; k < m_; ++k) {
                bmat[c * m_ + k] /= piv;
                inv[c * m_ + k] /= piv;
            }
            for (std::size_t r = 0; r < m_; ++r) {
                if (r == c) continue;
                double f = bmat[r * m_ + c];
                if (f == 0) continue;
                for (std::size_t k = 0; k < m_; ++k) {
                    bmat[r * m_ + k] -= f * bmat[c * m_ + k];
                    inv[r * m_ + k] -= f * inv[c * m_ + k];
                }
            }
        }
        binv_ = std::move(inv);
        for (std::size_t i = 0; i < m_; ++i) {
            double s = 0;
            for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * b_[k];
            x_[i] = s;
        }
        pivots_since_refactor_ = 0;
    }

    std::vector<double> duals() {
        std::vector<double> cb(m_), col(m_), y(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) cb[i] = column_of(basis_[i], col);
        for (std::size_t k = 0; k < m_; ++k) {
            double s = 0;
            for (std::size_t i = 0; i < m_; ++i) s += cb[i] * binv_[i * m_ + k];
            y[k] = s;
        }
        return y;
    }

    // Entering variable, or nullopt-equivalent (found == false) at optimality.
    PricedColumn price(const std::vector<double>& y) {
        std::vector<double> ys(m_);
        for (std::size_t i = 0; i < m_; ++i) ys[i] = sign_[i] * y[i];
        const double scale = phase_ == 1 ? 0.0 : cost_scale_;
        const double tol = opts_.tol_opt;

        auto slack_cost = [&](std::size_t i) { return -y[i] * sign_[i]; };

        if (bland_) {
            PricedColumn c = src_.first_improving(scale, ys, tol);
            if (c.found) return c;
            for (std::size_t i = 0; i < m_; ++i) {
                if (lp_.rows[i].relation != Relation::le) continue;
                double d = slack_cost(i);
                if (d < -tol) return {n_ + i, d, true};
            }
            return {};
        }

        PricedColumn best = src_.best_column(scale, ys);
        if (best.found && best.reduced_cost >= -tol && src_.structured_pricing()) {
            // Confirm with a literal scan before declaring optimality.
            best = src_.ColumnSource::best_column(scale, ys);
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (lp_.rows[i].relation != Relation::le) continue;
            double d = slack_cost(i);
            if (!best.found || d < best.reduced_cost) best = {n_ + i, d, true};
        }
        if (!best.found || best.reduced_cost >= -tol) return {};
        return best;
    }

    Status iterate(LpSolution& out) {
        std::vector<double> col(m_), alpha(m_);
        std::size_t degenerate_run = 0;
        for (;;) {
            if (out.iterations >= opts_.max_iter) return Status::iteration_limit;
            if (pivots_since_refactor_ >= opts_.refactor_every) refactor();

            std::vector<double> y = duals();
            PricedColumn enter = price(y);
            if (!enter.found) return Status::optimal;

            column_of(enter.index, col);
            for (std::size_t i = 0; i < m_; ++i) {
                double s = 0;
                for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * col[k];
                alpha[i] = s;
            }

            std::size_t leave = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                double ratio;
                if (phase_ == 2 && is_artificial(basis_[i])) {
                    // Artificials are pinned at zero once feasibility is reached.
                    if (std::abs(alpha[i]) <= kPivotTol) continue;
                    ratio = 0.0;
                } else {
                    if (alpha[i] <= kPivotTol) continue;
                    ratio = std::max(x_[i], 0.0) / alpha[i];
                }
                bool take = false;
                if (leave == m_ || ratio < best_ratio - 1e-12) {
                    take = true;
                } else if (ratio <= best_ratio + 1e-12) {
                    take = bland_ ? basis_[i] < basis_[leave]
                                  : std::abs(alpha[i]) > std::abs(alpha[leave]);
                }
                if (take) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m_) return Status::unbounded;

            const double theta = best_ratio;
            for (std::size_t i = 0; i < m_; ++i) {
                x_[i] -= theta * alpha[i];
                if (x_[i] < 0 && x_[i] > -opts_.tol_feas) x_[i] = 0;
            }
            x_[leave] = theta;

            const double piv = alpha[leave];
            for (std::size_t k = 0; k < m_; ++k) binv_[leave * m_ + k] /= piv;
            for (std::size_t i = 0; i < m_; ++i) {
                if (i == leave || alpha[i] == 0) continue;
                double f = alpha[i];
                for (std::size_t k = 0; k < m_; ++k) binv_[i * m_ + k] -= f * binv_[leave * m_ + k];
            }
            basis_[leave] = enter.index;
            ++pivots_since_refactor_;
            ++out.iterations;

            if (theta <= opts_.tol_feas) {
                if (++degenerate_run > 10 * m_) bland_ = true;
            } else {
                degenerate_run = 0;
            }
        }
    }

    LpSolution finish(LpSolution& out, Status st) {
        out.status = st;
        out.used_bland = bland_;
        if (st != Status::optimal) return out;

        refactor();
        std::vector<double> a(m_);
        double obj = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (!is_structural(basis_[i])) continue;
            double w = std::max(x_[i], 0.0);
            double c = src_.column(basis_[i], a);
            obj += c * w;
            out.support.push_back({basis_[i], w});
        }
        std::sort(out.support.begin(), out.support.end(),
                  [](const SupportEntry& l, const SupportEntry& r) { return l.column < r.column; });
        out.objective = obj;

        std::vector<double> y = duals();
        out.dual_values.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) out.dual_values[i] = cost_scale_ * sign_[i] * y[i];
        return out;
    }

    const LinearProgram& lp_;
    const ColumnSource& src_;
    SolveOptions opts_;
    bool bland_;
    std::size_t n_, m_;
    std::vector<double> scratch_;
    std::vector<double> sign_, b_;
    double cost_scale_ = 1.0;
    int phase_ = 1;
    std::vector<std::size_t> basis_;
    std::vector<double> binv_;
    std::vector<double> x_;
    std::size_t pivots_since_refactor_ = 0;
};

void validate(const LinearProgram& lp) {
    if (!lp.columns) throw std::invalid_argument("linear program has no column source");
    if (lp.rows.empty()) throw std::invalid_argument("linear program has no rows");
    if (lp.columns->rows() != lp.rows.size()) {
        std::ostringstream msg;
        msg << "column source has " << lp.columns->rows() << " rows, program has "
            << lp.rows.size();
        throw std::invalid_argument(msg.str());
    }
    for (const auto& r : lp.rows)
        if (!std::isfinite(r.rhs)) throw std::invalid_argument("non-finite right-hand side");
}

}  // namespace

LpSolution solve(const LinearProgram& lp, const SolveOptions& opts) {
    validate(lp);
    try {
        return Simplex(lp, opts, false).run();
    } catch (const SingularBasis&) {
    }
    try {
        return Simplex(lp, opts, true).run();
    } catch (const SingularBasis&) {
        throw SolverError("basis became numerically singular under Bland's rule");
    }
}

}  // namespace vbounds::lp
