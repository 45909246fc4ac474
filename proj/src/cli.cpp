#include "vbounds/cli.hpp"

#include "vbounds/bounds.hpp"
#include "vbounds/io.hpp"
#include "vbounds/lp.hpp"
#include "vbounds/report.hpp"
#include "vbounds/sensitivity.hpp"
#include "vbounds/sim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>

namespace vbounds::cli {

namespace {

struct Options {
    std::string table;
    std::string config;
    std::string profiles;
    std::optional<double> f, g, dx, dy;
    std::optional<double> k, k_min, k_max;
    std::optional<int> grid_m;
    bool refine = false;
    bool json = false;
    std::optional<int> runs;
    std::optional<std::uint64_t> seed;
};

int default_grid_m() {
    if (const char* env = std::getenv(kGridEnv)) {
        char* end = nullptr;
        long m = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || m < 1 || m > 4096)
            throw InputError(std::string(kGridEnv) + " must be an integer between 1 and 4096");
        return static_cast<int>(m);
    }
    return 64;
}

io::AnalysisConfig load_analysis(const Options& o) {
    io::AnalysisConfig cfg;
    cfg.grid.m = default_grid_m();
    if (!o.config.empty()) {
        auto j = io::read_json(o.config);
        const bool config_sets_m = j.is_object() && j.contains("grid") && j["grid"].is_object() &&
                                   j["grid"].contains("m");
        const int env_m = cfg.grid.m;
        cfg = io::parse_config(j, std::filesystem::path(o.config).parent_path(), o.config);
        if (!config_sets_m) cfg.grid.m = env_m;
    }
    if (!o.table.empty()) cfg.table = io::read_table(o.table);
    if (!cfg.table) throw InputError("no table given (use --table or a config with 'table')");

    const bool explicit_flags = o.f || o.g;
    const bool discrimination_flags = o.dx || o.dy;
    if (explicit_flags && discrimination_flags)
        throw InputError("give either --f/--g or --dx/--dy, not both");
    if (explicit_flags) {
        if (!o.f || !o.g) throw InputError("--f and --g must be given together");
        cfg.budget = io::ExplicitBudget{*o.f, *o.g};
    } else if (discrimination_flags) {
        if (!o.dx || !o.dy) throw InputError("--dx and --dy must be given together");
        cfg.budget = io::Discrimination{*o.dx, *o.dy};
    }

    const int k_modes = (o.k ? 1 : 0) + ((o.k_min || o.k_max) ? 1 : 0) + (o.profiles.empty() ? 0 : 1);
    if (k_modes > 1) throw InputError("give only one of --k, --k-min/--k-max, --profiles");
    if (o.k) cfg.k = io::KScalar{*o.k};
    if (o.k_min || o.k_max) cfg.k = io::KRange{o.k_min, o.k_max};
    if (!o.profiles.empty()) cfg.k = io::KProfiles{o.profiles};

    if (o.grid_m) {
        if (*o.grid_m < 1 || *o.grid_m > 4096) throw InputError("--grid-m must lie in [1, 4096]");
        cfg.grid.m = *o.grid_m;
    }
    if (o.refine) cfg.refinement.enabled = true;
    if (o.json) cfg.json = true;
    return cfg;
}

report::BudgetInfo resolve_budget(const io::AnalysisConfig& cfg, const ObservedJoint& joint) {
    if (const auto* e = std::get_if<io::ExplicitBudget>(&cfg.budget))
        return {MomentBudget(e->f, e->g), "explicit", std::nullopt, std::nullopt};
    if (const auto* d = std::get_if<io::Discrimination>(&cfg.budget))
        return {calibrate_budget(joint, d->dx, d->dy), "discrimination", d->dx, d->dy};
    throw InputError("no moment budget given (use --f/--g, --dx/--dy or a config 'budget')");
}

void emit(const nlohmann::json& rep, bool json, std::ostream& out) {
    out << (json ? report::render_json(rep) : report::render_text(rep));
}

int cmd_bounds(const Options& o, std::ostream& out, std::ostream& err) {
    const io::AnalysisConfig cfg = load_analysis(o);
    const ObservedJoint joint = normalize(*cfg.table);
    const report::BudgetInfo budget = resolve_budget(cfg, joint);
    if (budget.budget.clamped()) err << "warning: moment budget above 0.25 clamped to 0.25\n";
    if (cfg.table->has_zero_cell())
        err << "warning: table has an empty cell; its equality row is relaxed to a 1e-9 band\n";

    std::optional<report::KInfo> k;
    if (const auto* s = std::get_if<io::KScalar>(&cfg.k)) {
        k = report::KInfo{"scalar", s->k, s->k, std::nullopt};
    } else if (const auto* r = std::get_if<io::KRange>(&cfg.k)) {
        k = report::KInfo{"range", r->min, r->max, std::nullopt};
    } else if (const auto* p = std::get_if<io::KProfiles>(&cfg.k)) {
        auto profiles = io::read_profiles(p->path);
        double kv = population_k(profiles);
        k = report::KInfo{"profiles", kv, kv, profiles.size()};
    }

    BoundsRequest req{joint, budget.budget, cfg.grid, cfg.refinement, {}};
    IdentifiedInterval iv;
    try {
        iv = solve_bounds(req);
    } catch (const BoundsInfeasible& e) {
        emit(report::bounds_infeasible(cfg.label, *cfg.table, budget, e), cfg.json, out);
        err << "error: " << e.what() << "\n";
        return kInfeasibleBudget;
    }

    std::optional<TauInterval> tau;
    if (k) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        tau = shift_interval(iv, k->min.value_or(-inf), k->max.value_or(inf));
    }
    report::BoundsSummary summary{cfg.label,      *cfg.table, budget, cfg.grid, cfg.refinement,
                                  std::move(iv), k,          tau,    cfg.published_risk_difference};
    emit(report::bounds(summary), cfg.json, out);
    return kSuccess;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
    const io::AnalysisConfig cfg = load_analysis(o);
    const auto* d = std::get_if<io::Discrimination>(&cfg.budget);
    if (!d) throw InputError("calibrate needs coefficients of discrimination (--dx and --dy)");
    const ObservedJoint joint = normalize(*cfg.table);
    const MomentBudget budget = calibrate_budget(joint, d->dx, d->dy);
    emit(report::calibrate(cfg.label, *cfg.table, d->dx, d->dy, budget), cfg.json, out);
    return kSuccess;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    if (o.config.empty()) throw InputError("simulate needs --config with a population spec");
    io::SimulationConfig cfg = io::read_simulation(o.config);
    if (o.runs) cfg.runs = *o.runs;
    if (cfg.runs < 1) throw InputError("simulate needs at least one run");
    if (o.seed) cfg.population.seed = *o.seed;
    if (o.grid_m) {
        if (*o.grid_m < 1 || *o.grid_m > 4096) throw InputError("--grid-m must lie in [1, 4096]");
        cfg.coverage.grid.m = *o.grid_m;
    }
    const sim::CoverageReport rep = sim::coverage_experiment(cfg.population, cfg.runs, cfg.coverage);
    emit(report::simulate(cfg.population, rep, cfg.coverage), o.json || cfg.json, out);
    return kSuccess;
}

int cmd_decompose(const Options& o, std::ostream& out) {
    if (o.profiles.empty()) throw InputError("decompose needs a profiles file");
    const auto profiles = io::read_profiles(o.profiles);
    emit(report::decompose(profiles), o.json, out);
    return kSuccess;
}

void add_table_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--table", o.table, "Table file (counts or relative frequencies)");
    cmd->add_option("--config", o.config, "JSON analysis config");
    cmd->add_flag("--json", o.json, "Emit a JSON report");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bounds on causal effects from 2x2 tables under background and version confounding",
                 "vbounds"};
    app.require_subcommand(1);
    Options o;

    auto* bounds = app.add_subcommand("bounds", "Bound psi and, given K, tau");
    add_table_options(bounds, o);
    bounds->add_option("--f", o.f, "Bound on the propensity dispersion");
    bounds->add_option("--g", o.g, "Bound on the prognosis dispersion");
    bounds->add_option("--dx", o.dx, "Coefficient of discrimination for treatment");
    bounds->add_option("--dy", o.dy, "Coefficient of discrimination for outcome");
    bounds->add_option("--k", o.k, "Version bias K");
    bounds->add_option("--k-min", o.k_min, "Lower end of a K range");
    bounds->add_option("--k-max", o.k_max, "Upper end of a K range");
    bounds->add_option("--profiles", o.profiles, "CSV of individual profiles; K is their mean");
    bounds->add_option("--grid-m", o.grid_m, "Grid points per axis");
    bounds->add_flag("--refine", o.refine, "Double the grid until the bounds settle");

    auto* calibrate = app.add_subcommand("calibrate", "Moment budget from coefficients of discrimination");
    add_table_options(calibrate, o);
    calibrate->add_option("--dx", o.dx, "Coefficient of discrimination for treatment");
    calibrate->add_option("--dy", o.dy, "Coefficient of discrimination for outcome");

    auto* simulate = app.add_subcommand("simulate", "Coverage experiment on a simulated population");
    simulate->add_option("--config", o.config, "JSON population spec")->required();
    simulate->add_option("--runs", o.runs, "Number of simulated data sets");
    simulate->add_option("--seed", o.seed, "Override the spec seed");
    simulate->add_option("--grid-m", o.grid_m, "Grid points per axis");
    simulate->add_flag("--json", o.json, "Emit a JSON report");

    auto* decompose = app.add_subcommand("decompose", "Split K_i into inconsistency and version effects");
    decompose->add_option("profiles,--profiles", o.profiles, "CSV of individual profiles");
    decompose->add_flag("--json", o.json, "Emit a JSON report");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (bounds->parsed()) return cmd_bounds(o, out, err);
        if (calibrate->parsed()) return cmd_calibrate(o, out);
        if (simulate->parsed()) return cmd_simulate(o, out);
        if (decompose->parsed()) return cmd_decompose(o, out);
    } catch (const BoundsInfeasible& e) {
        err << "error: " << e.what() << "\n";
        return kInfeasibleBudget;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const SolverLimit& e) {
        err << "error: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const lp::SolverError& e) {
        err << "error: " << e.what() << "\n";
        return kSolverFailure;
    }
    return kInputError;
}

}  // namespace vbounds::cli
