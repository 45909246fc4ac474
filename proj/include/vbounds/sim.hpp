#pragma once

// Discrete stochastic potential outcomes. Each individual passes through three
// stages: a background type is drawn from the population mixture, a version
// of treatment is drawn from the type's version law, then treatment follows
// the version-dependent natural rule and the outcome is drawn from a law that
// depends on both version and treatment. Interventions fix treatment after
// the version draw; by default they leave the version law unchanged.

#include "vbounds/bounds.hpp"
#include "vbounds/core.hpp"
#include "vbounds/sensitivity.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vbounds::sim {

// SplitMix64, used to seed and to derive independent streams.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    std::uint64_t next();

private:
    std::uint64_t state_;
};

// xoshiro256** with one stream per (seed, stream id) pair. Output depends only
// on those two values, never on the order in which streams are consumed.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);
    std::uint64_t next();
    // Uniform on [0, 1) with 53 random bits.
    double uniform();

private:
    std::uint64_t s_[4];
};

struct Version {
    std::string label;
    double prob;       // natural version law
    double treat;      // Pr(X = 1 | version) under the natural process
    double y_treated;  // Pr(Y = 1 | version, x = 1)
    double y_control;  // Pr(Y = 1 | version, x = 0)
};

struct VersionModel {
    std::vector<Version> versions;
    bool invariant_versions = true;
    // Version laws under the interventions x = 1 and x = 0; used only when
    // invariant_versions is false.
    std::vector<double> dist_treated;
    std::vector<double> dist_control;
};

struct TypeShare {
    VersionModel model;
    double share;
};

struct PopulationSpec {
    std::vector<TypeShare> types;
    std::uint64_t n = 1;
    std::uint64_t seed = 0;
};

// Throws InputError describing the first violated invariant.
void validate(const PopulationSpec& spec);

struct TypeOracle {
    double pi;
    double r_given_0;
    double r_given_1;
    double r_int_0;
    double r_int_1;
};

struct OracleSummary {
    double psi;
    double tau;
    double k;
    double f_true;
    double g_true;
    double p11, p10, p01, p00;
    std::vector<TypeOracle> per_type;

    ObservedJoint joint() const { return {p11, p10, p01, p00}; }
};

OracleSummary oracle(const PopulationSpec& spec);

// Interventional expectations of one type conditional on its natural
// treatment; requires invariant versions.
IndividualProfile profile(const VersionModel& model);

struct Observation {
    std::uint8_t x;
    std::uint8_t y;
};

std::vector<Observation> sample(const PopulationSpec& spec);

ContingencyTable tabulate(const std::vector<Observation>& data);

struct CoverageOptions {
    GridSpec grid{32, true};
    double slack_se = 3.0;
    // Replaces the oracle-derived budget when set.
    std::optional<double> f_override;
    std::optional<double> g_override;
    lp::SolveOptions solver{};
};

struct CoverageRun {
    int run;
    std::uint64_t seed;
    double p11, p10, p01, p00;
    double f, g;
    double lower, upper;
    bool psi_covered;
    bool tau_covered;
};

struct CoverageReport {
    OracleSummary oracle;
    std::vector<CoverageRun> runs;
    double f_slack;
    double g_slack;
    double epsilon;
    double psi_coverage;
    double tau_coverage;
    // The budget in use is below the oracle moments minus the sampling slack,
    // so misses do not indicate a coverage failure of the method.
    bool budget_violated;
};

// Seed of run r, derived from the spec seed.
std::uint64_t run_seed(std::uint64_t base, int run);

CoverageReport coverage_experiment(const PopulationSpec& spec, int runs,
                                   const CoverageOptions& opts = {});

}  // namespace vbounds::sim
