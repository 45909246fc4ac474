#pragma once

// Brute-force LP oracle: enumerates every basic solution of the standard-form
// system (slacks added for <= rows) and keeps the best feasible one. It shares
// no code with the simplex and is only practical for a few dozen columns.

#include "vbounds/lp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace oracle {

struct Result {
    bool feasible = false;
    double objective = 0;
    std::size_t bases_checked = 0;
};

namespace detail {

// Solves the square system M x = rhs in place; false if singular.
inline bool solve_square(std::vector<double> m, std::vector<double> rhs, std::size_t n,
                         std::vector<double>& x) {
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m[r * n + c]) > std::abs(m[p * n + c])) p = r;
        if (std::abs(m[p * n + c]) < 1e-10) return false;
        if (p != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(m[p * n + k], m[c * n + k]);
            std::swap(rhs[p], rhs[c]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = m[r * n + c] / m[c * n + c];
            if (f == 0) continue;
            for (std::size_t k = c; k < n; ++k) m[r * n + k] -= f * m[c * n + k];
            rhs[r] -= f * rhs[c];
        }
    }
    x.assign(n, 0);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= m[i * n + k] * x[k];
        x[i] = s / m[i * n + i];
    }
    return true;
}

}  // namespace detail

inline Result enumerate(const vbounds::lp::LinearProgram& lp) {
    using vbounds::lp::Relation;
    const std::size_t rows = lp.rows.size();
    const std::size_t n = lp.columns->size();

    // Dense standard form [A | slacks] x = b.
    std::vector<std::vector<double>> cols;
    std::vector<double> cost;
    std::vector<double> a(rows);
    for (std::size_t j = 0; j < n; ++j) {
        cost.push_back(lp.columns->column(j, a));
        cols.push_back(a);
    }
    for (std::size_t i = 0; i < rows; ++i) {
        if (lp.rows[i].relation != Relation::le) continue;
        std::vector<double> e(rows, 0.0);
        e[i] = 1.0;
        cols.push_back(e);
        cost.push_back(0.0);
    }
    std::vector<double> b;
    for (const auto& r : lp.rows) b.push_back(r.rhs);

    // Keep a maximal set of independent rows of [A | b]; an inconsistent
    // dependent row means the system has no solution at all.
    const std::size_t total = cols.size();
    std::vector<std::vector<double>> aug(rows, std::vector<double>(total + 1));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < total; ++j) aug[i][j] = cols[j][i];
        aug[i][total] = b[i];
    }
    std::vector<std::size_t> keep;
    {
        auto work = aug;
        std::vector<bool> used(rows, false);
        std::size_t rank = 0;
        std::vector<std::size_t> pivot_rows;
        for (std::size_t c = 0; c < total && rank < rows; ++c) {
            std::size_t p = rows;
            double best = 1e-10;
            for (std::size_t r = 0; r < rows; ++r)
                if (!used[r] && std::abs(work[r][c]) > best) best = std::abs(work[r][c]), p = r;
            if (p == rows) continue;
            used[p] = true;
            pivot_rows.push_back(p);
            ++rank;
            for (std::size_t r = 0; r < rows; ++r) {
                if (r == p) continue;
                double f = work[r][c] / work[p][c];
                for (std::size_t k = 0; k <= total; ++k) work[r][k] -= f * work[p][k];
            }
        }
        for (std::size_t r = 0; r < rows; ++r)
            if (!used[r] && std::abs(work[r][total]) > 1e-9) return {};
        keep = pivot_rows;
        std::sort(keep.begin(), keep.end());
    }

    const std::size_t k = keep.size();
    const double sense = lp.sense == vbounds::lp::Sense::minimize ? 1.0 : -1.0;
    Result best;
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    std::vector<double> m(k * k), rhs(k), x;
    for (;;) {
        ++best.bases_checked;
        for (std::size_t r = 0; r < k; ++r) {
            rhs[r] = b[keep[r]];
            for (std::size_t c = 0; c < k; ++c) m[r * k + c] = cols[pick[c]][keep[r]];
        }
        if (detail::solve_square(m, rhs, k, x) &&
            std::all_of(x.begin(), x.end(), [](double v) { return v >= -1e-10; })) {
            double obj = 0;
            for (std::size_t c = 0; c < k; ++c) obj += cost[pick[c]] * x[c];
            if (!best.feasible || sense * obj < sense * best.objective) {
                best.feasible = true;
                best.objective = obj;
            }
        }
        // Next k-combination of [0, total).
        std::size_t i = k;
        while (i > 0 && pick[i - 1] == total - k + (i - 1)) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return best;
}

}  // namespace oracle
