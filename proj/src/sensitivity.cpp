#include "vbounds/sensitivity.hpp"

#include <cmath>
#include <string>

namespace vbounds {

void validate(const IndividualProfile& p) {
    const std::pair<const char*, double> fields[] = {
        {"pi", p.pi},   {"r_given_1", p.r_given_1}, {"r_given_0", p.r_given_0},
        {"e11", p.e11}, {"e10", p.e10},             {"e00", p.e00},
        {"e01", p.e01}};
    for (const auto& [name, v] : fields) {
        if (!std::isfinite(v) || v < 0 || v > 1)
            throw InputError(std::string("profile field ") + name + " must lie in [0, 1], got " +
                             std::to_string(v));
    }
}

double k_individual(const IndividualProfile& p) {
    return (p.r_given_1 - p.r_int_1()) - (p.r_given_0 - p.r_int_0());
}

BiasDecomposition decompose(const IndividualProfile& p) {
    const double delta1 = p.pi * (p.r_given_1 - p.e11) - (1 - p.pi) * (p.r_given_0 - p.e00);
    const double delta2 = (1 - p.pi) * (p.r_given_1 - p.e10) - p.pi * (p.r_given_0 - p.e01);
    return {delta1, delta2, delta1 + delta2};
}

double population_k(std::span<const IndividualProfile> profiles) {
    if (profiles.empty()) throw InputError("population K needs at least one profile");
    double sum = 0;
    for (const auto& p : profiles) sum += k_individual(p);
    return sum / static_cast<double>(profiles.size());
}

TauInterval shift_interval(const IdentifiedInterval& interval, double k) {
    return shift_interval(interval, k, k);
}

TauInterval shift_interval(const IdentifiedInterval& interval, double k_min, double k_max) {
    if (std::isnan(k_min) || std::isnan(k_max) || k_min > k_max)
        throw InputError("K range must satisfy k_min <= k_max");
    TauInterval t;
    t.k_min = k_min;
    t.k_max = k_max;
    t.lower = interval.lower - k_max;
    t.upper = interval.upper - k_min;
    return t;
}

MomentBudget calibrate_budget(const ObservedJoint& joint, double d_x, double d_y) {
    if (!(d_x >= 0 && d_x <= 1) || !(d_y >= 0 && d_y <= 1))
        throw InputError("coefficients of discrimination must lie in [0, 1]");
    const double px = joint.px1();
    const double py = joint.py1();
    return {d_x * px * (1 - px), d_y * py * (1 - py)};
}

}  // namespace vbounds
