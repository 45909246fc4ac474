#include "vbounds/sim.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace vbounds::sim {

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    // Hash the pair first so that nearby (seed, stream) pairs do not share
    // overlapping SplitMix64 sequences.
    SplitMix64 mix(seed);
    std::uint64_t key = mix.next() ^ SplitMix64(stream ^ 0xD1B54A32D192ED03ULL).next();
    SplitMix64 init(key);
    for (auto& s : s_) s = init.next();
}

std::uint64_t Rng::next() {
    auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

namespace {

constexpr double kSumTol = 1e-12;

std::string type_name(std::size_t i) {
    std::ostringstream s;
    s << "type " << i;
    return s.str();
}

void check_probability(double v, const std::string& what) {
    if (!std::isfinite(v) || v < 0 || v > 1)
        throw InputError(what + " must lie in [0, 1]");
}

void check_distribution(const std::vector<double>& d, std::size_t n, const std::string& what) {
    if (d.size() != n) throw InputError(what + " must have one entry per version");
    double s = 0;
    for (double v : d) {
        check_probability(v, what);
        s += v;
    }
    if (std::abs(s - 1.0) > kSumTol) throw InputError(what + " must sum to 1");
}

std::vector<double> natural_law(const VersionModel& m) {
    std::vector<double> d;
    for (const auto& v : m.versions) d.push_back(v.prob);
    return d;
}

std::size_t draw(const std::vector<double>& weights, double u) {
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    // u landed in the rounding gap above the final partial sum.
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0) return i;
    return 0;
}

}  // namespace

void validate(const PopulationSpec& spec) {
    if (spec.types.empty()) throw InputError("population needs at least one type");
    if (spec.n < 1) throw InputError("population size must be at least 1");
    double share_sum = 0;
    for (std::size_t i = 0; i < spec.types.size(); ++i) {
        const auto& t = spec.types[i];
        const std::string name = type_name(i);
        check_probability(t.share, name + " share");
        share_sum += t.share;
        const auto& m = t.model;
        if (m.versions.empty()) throw InputError(name + " has no versions");
        check_distribution(natural_law(m), m.versions.size(), name + " version law");
        for (const auto& v : m.versions) {
            const std::string vn = name + " version '" + v.label + "'";
            check_probability(v.treat, vn + " treatment probability");
            check_probability(v.y_treated, vn + " treated outcome probability");
            check_probability(v.y_control, vn + " control outcome probability");
        }
        if (!m.invariant_versions) {
            check_distribution(m.dist_treated, m.versions.size(),
                               name + " interventional version law under x=1");
            check_distribution(m.dist_control, m.versions.size(),
                               name + " interventional version law under x=0");
        }
    }
    if (std::abs(share_sum - 1.0) > kSumTol) throw InputError("type shares must sum to 1");
    for (std::size_t i = 0; i < spec.types.size(); ++i) {
        double pi = 0;
        for (const auto& v : spec.types[i].model.versions) pi += v.prob * v.treat;
        if (!(pi > 0 && pi < 1))
            throw InputError(type_name(i) + " has propensity " + std::to_string(pi) +
                             "; natural treatment must be uncertain");
    }
}

OracleSummary oracle(const PopulationSpec& spec) {
    validate(spec);
    OracleSummary out{};
    double psi = 0, tau = 0, k = 0;
    double p11 = 0, p10 = 0, p01 = 0, p00 = 0;
    for (std::size_t i = 0; i < spec.types.size(); ++i) {
        const auto& m = spec.types[i].model;
        const double s = spec.types[i].share;

        double pi = 0, treated_y = 0, control_y = 0;
        for (const auto& v : m.versions) {
            pi += v.prob * v.treat;
            treated_y += v.prob * v.treat * v.y_treated;
            control_y += v.prob * (1 - v.treat) * v.y_control;
        }
        const double r_given_1 = treated_y / pi;
        const double r_given_0 = control_y / (1 - pi);

        const std::vector<double> d1 = m.invariant_versions ? natural_law(m) : m.dist_treated;
        const std::vector<double> d0 = m.invariant_versions ? natural_law(m) : m.dist_control;
        double r_int_1 = 0, r_int_0 = 0;
        for (std::size_t v = 0; v < m.versions.size(); ++v) {
            r_int_1 += d1[v] * m.versions[v].y_treated;
            r_int_0 += d0[v] * m.versions[v].y_control;
        }

        out.per_type.push_back({pi, r_given_0, r_given_1, r_int_0, r_int_1});
        psi += s * (r_given_1 - r_given_0);
        tau += s * (r_int_1 - r_int_0);
        k += s * ((r_given_1 - r_int_1) - (r_given_0 - r_int_0));
        p11 += s * pi * r_given_1;
        p10 += s * pi * (1 - r_given_1);
        p01 += s * (1 - pi) * r_given_0;
        p00 += s * (1 - pi) * (1 - r_given_0);
    }
    out.psi = psi;
    out.tau = tau;
    out.k = k;
    out.p11 = p11;
    out.p10 = p10;
    out.p01 = p01;
    out.p00 = p00;

    const double px = p11 + p10;
    const double py = p11 + p01;
    double f = 0, g = 0;
    for (std::size_t i = 0; i < spec.types.size(); ++i) {
        const auto& t = out.per_type[i];
        const double s = spec.types[i].share;
        const double r = t.pi * t.r_given_1 + (1 - t.pi) * t.r_given_0;
        f += s * (t.pi - px) * (t.pi - px);
        g += s * (r - py) * (r - py);
    }
    out.f_true = f;
    out.g_true = g;
    return out;
}

IndividualProfile profile(const VersionModel& m) {
    if (!m.invariant_versions)
        throw InputError("profiles require the version law to be invariant under intervention");
    double pi = 0;
    for (const auto& v : m.versions) pi += v.prob * v.treat;
    if (!(pi > 0 && pi < 1)) throw InputError("profiles require 0 < pi < 1");
    IndividualProfile p{pi, 0, 0, 0, 0, 0, 0};
    for (const auto& v : m.versions) {
        const double w1 = v.prob * v.treat / pi;
        const double w0 = v.prob * (1 - v.treat) / (1 - pi);
        p.e11 += w1 * v.y_treated;
        p.e01 += w1 * v.y_control;
        p.e10 += w0 * v.y_treated;
        p.e00 += w0 * v.y_control;
    }
    p.r_given_1 = p.e11;
    p.r_given_0 = p.e00;
    return p;
}

std::vector<Observation> sample(const PopulationSpec& spec) {
    validate(spec);
    std::vector<double> shares;
    for (const auto& t : spec.types) shares.push_back(t.share);
    std::vector<std::vector<double>> laws;
    for (const auto& t : spec.types) laws.push_back(natural_law(t.model));

    std::vector<Observation> out(spec.n);
    for (std::uint64_t i = 0; i < spec.n; ++i) {
        Rng rng(spec.seed, i);
        const std::size_t type = draw(shares, rng.uniform());
        const auto& model = spec.types[type].model;
        const Version& v = model.versions[draw(laws[type], rng.uniform())];
        const bool x = rng.uniform() < v.treat;
        const bool y = rng.uniform() < (x ? v.y_treated : v.y_control);
        out[i] = {static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y)};
    }
    return out;
}

ContingencyTable tabulate(const std::vector<Observation>& data) {
    double n[2][2] = {{0, 0}, {0, 0}};
    for (const auto& o : data) n[o.x][o.y] += 1;
    return ContingencyTable::from_counts(n[1][1], n[1][0], n[0][1], n[0][0]);
}

std::uint64_t run_seed(std::uint64_t base, int run) {
    return Rng(base, 0xC0FFEE0000000000ULL + static_cast<std::uint64_t>(run)).next();
}

CoverageReport coverage_experiment(const PopulationSpec& spec, int runs,
                                   const CoverageOptions& opts) {
    if (runs < 1) throw InputError("coverage experiment needs at least one run");
    CoverageReport rep{};
    rep.oracle = oracle(spec);
    const auto& o = rep.oracle;
    const double n = static_cast<double>(spec.n);
    const double px = o.p11 + o.p10;
    const double py = o.p11 + o.p01;
    rep.f_slack = opts.slack_se * std::sqrt(px * (1 - px) / n);
    rep.g_slack = opts.slack_se * std::sqrt(py * (1 - py) / n);
    rep.epsilon = 1.0 / opts.grid.m;

    const double f = opts.f_override.value_or(o.f_true + rep.f_slack);
    const double g = opts.g_override.value_or(o.g_true + rep.g_slack);
    rep.budget_violated = f < o.f_true - rep.f_slack || g < o.g_true - rep.g_slack;
    const MomentBudget budget(f, g);

    int psi_hits = 0, tau_hits = 0;
    for (int r = 0; r < runs; ++r) {
        PopulationSpec run_spec = spec;
        run_spec.seed = run_seed(spec.seed, r);
        const ObservedJoint joint = normalize(tabulate(sample(run_spec)));

        BoundsRequest req{joint, budget, opts.grid, Refinement{false}, opts.solver};
        const IdentifiedInterval iv = solve_bounds(req);
        const TauInterval tau = shift_interval(iv, o.k);

        CoverageRun row{};
        row.run = r;
        row.seed = run_spec.seed;
        row.p11 = joint.p11();
        row.p10 = joint.p10();
        row.p01 = joint.p01();
        row.p00 = joint.p00();
        row.f = budget.f();
        row.g = budget.g();
        row.lower = iv.lower;
        row.upper = iv.upper;
        row.psi_covered = iv.lower - rep.epsilon <= o.psi && o.psi <= iv.upper + rep.epsilon;
        row.tau_covered = tau.lower - rep.epsilon <= o.tau && o.tau <= tau.upper + rep.epsilon;
        psi_hits += row.psi_covered;
        tau_hits += row.tau_covered;
        rep.runs.push_back(row);
    }
    rep.psi_coverage = static_cast<double>(psi_hits) / runs;
    rep.tau_coverage = static_cast<double>(tau_hits) / runs;
    return rep;
}

}  // namespace vbounds::sim
