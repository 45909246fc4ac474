#include "vbounds/core.hpp"

#include <cmath>
#include <sstream>

namespace vbounds {

namespace {

constexpr double kFrequencySumTol = 1e-9;
constexpr double kJointSumTol = 1e-12;

void check_cells(const std::array<double, 4>& cells) {
    static constexpr const char* names[] = {"n11", "n10", "n01", "n00"};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!std::isfinite(cells[i]) || cells[i] < 0) {
            std::ostringstream msg;
            msg << "table cell " << names[i] << " must be a finite non-negative number, got "
                << cells[i];
            throw InputError(msg.str());
        }
    }
    if (cells[0] + cells[1] + cells[2] + cells[3] <= 0)
        throw InputError("table total must be positive");
}

}  // namespace

ContingencyTable ContingencyTable::from_counts(double n11, double n10, double n01,
                                               double n00) {
    std::array<double, 4> cells{n11, n10, n01, n00};
    check_cells(cells);
    return {cells, false};
}

ContingencyTable ContingencyTable::from_frequencies(double p11, double p10, double p01,
                                                    double p00) {
    std::array<double, 4> cells{p11, p10, p01, p00};
    check_cells(cells);
    double sum = p11 + p10 + p01 + p00;
    if (std::abs(sum - 1.0) > kFrequencySumTol) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "relative frequencies must sum to 1, got " << sum;
        throw InputError(msg.str());
    }
    return {cells, true};
}

ContingencyTable ContingencyTable::detect(double n11, double n10, double n01, double n00) {
    if (std::abs(n11 + n10 + n01 + n00 - 1.0) <= kFrequencySumTol)
        return from_frequencies(n11, n10, n01, n00);
    return from_counts(n11, n10, n01, n00);
}

bool ContingencyTable::has_zero_cell() const {
    for (double c : cells_)
        if (c == 0) return true;
    return false;
}

ObservedJoint::ObservedJoint(double p11, double p10, double p01, double p00)
    : p11_(p11), p10_(p10), p01_(p01), p00_(p00) {
    for (double p : {p11, p10, p01, p00}) {
        if (!std::isfinite(p) || p < 0 || p > 1)
            throw InputError("joint probabilities must lie in [0, 1]");
    }
    if (std::abs(p11 + p10 + p01 + p00 - 1.0) > kJointSumTol)
        throw InputError("joint probabilities must sum to 1");
}

std::optional<double> ObservedJoint::risk_treated() const {
    double px = px1();
    if (px <= 0) return std::nullopt;
    return p11_ / px;
}

std::optional<double> ObservedJoint::risk_untreated() const {
    double px0 = p01_ + p00_;
    if (px0 <= 0) return std::nullopt;
    return p01_ / px0;
}

bool ObservedJoint::has_zero_cell() const {
    return p11_ == 0 || p10_ == 0 || p01_ == 0 || p00_ == 0;
}

ObservedJoint normalize(const ContingencyTable& table) {
    double n = table.total();
    if (!(n > 0)) throw InputError("table total must be positive");
    double p11 = table.n11() / n;
    double p10 = table.n10() / n;
    double p01 = table.n01() / n;
    double p00 = table.n00() / n;
    return {p11, p10, p01, p00};
}

std::optional<double> relative_risk(const ObservedJoint& j) {
    auto treated = j.risk_treated();
    auto untreated = j.risk_untreated();
    if (!treated || !untreated || *untreated <= 0) return std::nullopt;
    return *treated / *untreated;
}

double risk_difference(const ObservedJoint& j) {
    auto treated = j.risk_treated();
    auto untreated = j.risk_untreated();
    if (!treated || !untreated)
        throw InputError("risk difference undefined: a treatment group is empty");
    return *treated - *untreated;
}

MomentBudget::MomentBudget(double f, double g) : f_(f), g_(g) {
    if (!std::isfinite(f) || f < 0) throw InputError("moment budget f must be non-negative");
    if (!std::isfinite(g) || g < 0) throw InputError("moment budget g must be non-negative");
    if (f_ > kMax) {
        f_ = kMax;
        clamped_ = true;
    }
    if (g_ > kMax) {
        g_ = kMax;
        clamped_ = true;
    }
}

double AtomicMeasure::total_weight() const {
    double s = 0;
    for (const auto& a : atoms) s += a.weight;
    return s;
}

std::size_t AtomicMeasure::support_size(double threshold) const {
    std::size_t n = 0;
    for (const auto& a : atoms)
        if (a.weight > threshold) ++n;
    return n;
}

MeasureMoments evaluate(const AtomicMeasure& mu, const ObservedJoint& joint) {
    MeasureMoments out;
    const double px = joint.px1();
    const double py = joint.py1();
    for (const auto& a : mu.atoms) {
        const double w = a.weight;
        const double r = a.pi * a.r1 + (1 - a.pi) * a.r0;
        out.mass += w;
        out.x0y1 += w * (1 - a.pi) * a.r0;
        out.x1y1 += w * a.pi * a.r1;
        out.x0y0 += w * (1 - a.pi) * (1 - a.r0);
        out.x1y0 += w * a.pi * (1 - a.r1);
        out.moment_f += w * (a.pi - px) * (a.pi - px);
        out.moment_g += w * (r - py) * (r - py);
        out.contrast += w * (a.r1 - a.r0);
    }
    return out;
}

}  // namespace vbounds
