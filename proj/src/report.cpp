#include "vbounds/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace vbounds::report {

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json measure_json(const AtomicMeasure& mu) {
    json atoms = json::array();
    for (const auto& a : mu.atoms)
        atoms.push_back({{"pi", a.pi}, {"r0", a.r0}, {"r1", a.r1}, {"weight", a.weight}});
    return atoms;
}

std::string count_text(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::ostringstream s;
        s << static_cast<long long>(v);
        return s.str();
    }
    return fixed4(v);
}

std::string num(const json& v) { return v.is_null() ? "undefined" : fixed4(v.get<double>()); }

void table_lines(std::ostringstream& out, const json& r) {
    const json& t = r["table"];
    const bool freq = t["kind"] == "frequencies";
    auto cell = [&](const char* k) {
        return freq ? fixed4(t[k].get<double>()) : count_text(t[k].get<double>());
    };
    out << "Table (" << t["kind"].get<std::string>() << "): n11=" << cell("n11")
        << " n10=" << cell("n10") << " n01=" << cell("n01") << " n00=" << cell("n00");
    if (!freq) out << "  N=" << count_text(t["total"].get<double>());
    out << "\n";
    if (t["zero_cell"].get<bool>())
        out << "Warning: the table has an empty cell; its equality is relaxed to a 1e-9 band\n";
    const json& j = r["joint"];
    out << "Observed joint: p11=" << num(j["p11"]) << " p10=" << num(j["p10"])
        << " p01=" << num(j["p01"]) << " p00=" << num(j["p00"]) << "\n";
    out << "Margins: Pr(x=1)=" << num(j["px1"]) << " Pr(y=1)=" << num(j["py1"]) << "\n";
}

void budget_line(std::ostringstream& out, const json& b) {
    out << "Budget (" << b["source"].get<std::string>();
    if (b["source"] == "discrimination")
        out << " dx=" << num(b["dx"]) << " dy=" << num(b["dy"]);
    out << "): f=" << num(b["f"]) << " g=" << num(b["g"]);
    if (b["clamped"].get<bool>()) out << " (clamped to 0.25)";
    out << "\n";
}

json budget_json(const BudgetInfo& b) {
    return {{"f", b.budget.f()},
            {"g", b.budget.g()},
            {"source", b.source},
            {"dx", opt(b.dx)},
            {"dy", opt(b.dy)},
            {"clamped", b.budget.clamped()}};
}

std::string render_bounds(const json& r) {
    std::ostringstream out;
    if (!r["label"].get<std::string>().empty()) out << "Analysis: " << r["label"].get<std::string>() << "\n";
    table_lines(out, r);
    out << "Relative risk: " << num(r["relative_risk"]) << "\n";
    out << "Risk difference: " << num(r["risk_difference"]);
    if (r.contains("published_risk_difference")) {
        out << " (published value " << num(r["published_risk_difference"]);
        double gap = r["risk_difference"].get<double>() - r["published_risk_difference"].get<double>();
        out << (std::abs(gap) >= 5e-5 ? "; the table gives a different value)" : ")");
    }
    out << "\n";
    budget_line(out, r["budget"]);

    if (r["status"] == "infeasible") {
        out << "Infeasible: " << r["message"].get<std::string>() << "\n";
        out << "Least feasible f for this g: " << num(r["minimal_f"]) << "\n";
        out << "Least feasible g for this f: " << num(r["minimal_g"]) << "\n";
        return out.str();
    }

    const json& g = r["grid"];
    out << "Grid: m=" << g["resolution"].get<int>() << (g["anchored"].get<bool>() ? " anchored" : "");
    if (g["refine"].get<bool>()) {
        out << ", refined from m=" << g["m_start"].get<int>() << " with tolerance "
            << num(g["refine_tol"]) << (g["converged"].get<bool>() ? " (converged)" : " (not converged)");
    } else {
        out << ", refinement off";
    }
    out << "\n";
    if (g["levels"].size() > 1) {
        for (const auto& lv : g["levels"])
            out << "  m=" << lv["m"].get<int>() << ": " << num(lv["lower"]) << " .. "
                << num(lv["upper"]) << "\n";
    }
    out << "psi bounds: " << num(r["psi"]["lower"]) << " <= psi <= " << num(r["psi"]["upper"]) << "\n";
    for (const char* which : {"min", "max"}) {
        const json& atoms = r["certificates"][which];
        out << "Certificate (" << which << "): " << atoms.size() << " atoms\n";
        for (const auto& a : atoms)
            out << "  pi=" << num(a["pi"]) << " r0=" << num(a["r0"]) << " r1=" << num(a["r1"])
                << " weight=" << num(a["weight"]) << "\n";
    }

    if (r.contains("k")) {
        const json& k = r["k"];
        const json& tau = r["tau"];
        std::string prefix;
        if (k["mode"] == "range") {
            if (!k["min"].is_null() && !k["max"].is_null())
                prefix = num(k["min"]) + " <= K <= " + num(k["max"]);
            else if (!k["min"].is_null())
                prefix = "K >= " + num(k["min"]);
            else
                prefix = "K <= " + num(k["max"]);
        } else {
            prefix = "K = " + num(k["min"]);
            if (k["mode"] == "profiles")
                prefix += " (mean over " + std::to_string(k["profiles"].get<std::size_t>()) + " profiles)";
        }
        out << prefix << ": ";
        if (!tau["lower"].is_null() && !tau["upper"].is_null())
            out << num(tau["lower"]) << " <= tau <= " << num(tau["upper"]);
        else if (!tau["upper"].is_null())
            out << "tau <= " << num(tau["upper"]);
        else if (!tau["lower"].is_null())
            out << "tau >= " << num(tau["lower"]);
        else
            out << "tau unrestricted";
        out << "\n";
    }
    return out.str();
}

std::string render_calibrate(const json& r) {
    std::ostringstream out;
    if (!r["label"].get<std::string>().empty()) out << "Analysis: " << r["label"].get<std::string>() << "\n";
    table_lines(out, r);
    budget_line(out, r["budget"]);
    return out.str();
}

std::string render_decompose(const json& r) {
    std::ostringstream out;
    out << "row  delta1  delta2  K_i\n";
    for (const auto& p : r["profiles"])
        out << p["row"].get<std::size_t>() << "  " << num(p["delta1"]) << "  " << num(p["delta2"])
            << "  " << num(p["k_i"]) << "\n";
    out << "Population K over " << r["count"].get<std::size_t>() << " profiles: " << num(r["population_k"])
        << "\n";
    return out.str();
}

std::string render_simulate(const json& r) {
    std::ostringstream out;
    const json& p = r["population"];
    const json& o = r["oracle"];
    const json& c = r["coverage"];
    out << "Population: " << p["types"].get<std::size_t>() << " type(s), N=" << p["n"].get<std::uint64_t>()
        << ", seed=" << p["seed"].get<std::uint64_t>() << "\n";
    out << "Oracle: psi=" << num(o["psi"]) << " tau=" << num(o["tau"]) << " K=" << num(o["k"])
        << " f=" << num(o["f_true"]) << " g=" << num(o["g_true"]) << "\n";
    const json& j = o["joint"];
    out << "Oracle joint: p11=" << num(j["p11"]) << " p10=" << num(j["p10"]) << " p01=" << num(j["p01"])
        << " p00=" << num(j["p00"]) << "\n";
    std::size_t i = 0;
    for (const auto& t : o["per_type"])
        out << "  type " << i++ << ": pi=" << num(t["pi"]) << " r|0=" << num(t["r_given_0"])
            << " r|1=" << num(t["r_given_1"]) << " r(0)=" << num(t["r_int_0"]) << " r(1)="
            << num(t["r_int_1"]) << "\n";
    out << "Budget: f=" << num(c["f_budget"]) << " g=" << num(c["g_budget"]) << " (slack f "
        << num(c["f_slack"]) << ", g " << num(c["g_slack"]) << ")\n";
    if (c["budget_violated"].get<bool>())
        out << "Warning: budget below the oracle moments; misses reflect the budget, not the method\n";
    out << "Grid: m=" << c["grid_m"].get<int>() << ", tolerance " << num(c["epsilon"]) << "\n";
    const auto runs = c["runs"].get<std::size_t>();
    std::size_t psi_hits = 0, tau_hits = 0;
    for (const auto& row : c["rows"]) {
        psi_hits += row["psi_covered"].get<bool>();
        tau_hits += row["tau_covered"].get<bool>();
    }
    out << "Coverage: psi " << psi_hits << "/" << runs << " (" << num(c["psi"]) << "), tau " << tau_hits
        << "/" << runs << " (" << num(c["tau"]) << ")\n";
    out << "run  L  U  psi  tau\n";
    for (const auto& row : c["rows"])
        out << row["run"].get<int>() << "  " << num(row["lower"]) << "  " << num(row["upper"]) << "  "
            << (row["psi_covered"].get<bool>() ? "yes" : "no") << "  "
            << (row["tau_covered"].get<bool>() ? "yes" : "no") << "\n";
    return out.str();
}

}  // namespace

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    std::string s(buf);
    if (s == "-0.0000") s = "0.0000";
    return s;
}

json table_json(const ContingencyTable& t) {
    return {{"n11", t.n11()},
            {"n10", t.n10()},
            {"n01", t.n01()},
            {"n00", t.n00()},
            {"total", t.total()},
            {"kind", t.is_frequencies() ? "frequencies" : "counts"},
            {"zero_cell", t.has_zero_cell()}};
}

json joint_json(const ObservedJoint& j) {
    return {{"p11", j.p11()}, {"p10", j.p10()}, {"p01", j.p01()},
            {"p00", j.p00()}, {"px1", j.px1()}, {"py1", j.py1()}};
}

namespace {

json table_block(const std::string& command, const std::string& label, const ContingencyTable& t) {
    const ObservedJoint joint = normalize(t);
    json r;
    r["command"] = command;
    r["label"] = label;
    r["table"] = table_json(t);
    r["joint"] = joint_json(joint);
    r["relative_risk"] = opt(relative_risk(joint));
    try {
        r["risk_difference"] = risk_difference(joint);
    } catch (const InputError&) {
        r["risk_difference"] = nullptr;
    }
    return r;
}

}  // namespace

json bounds(const BoundsSummary& s) {
    json r = table_block("bounds", s.label, s.table);
    r["status"] = "ok";
    if (s.published_risk_difference) r["published_risk_difference"] = *s.published_risk_difference;
    r["budget"] = budget_json(s.budget);

    json levels = json::array();
    for (const auto& lv : s.interval.levels)
        levels.push_back({{"m", lv.m}, {"lower", lv.lower}, {"upper", lv.upper}});
    r["grid"] = {{"m_start", s.grid.m},
                 {"resolution", s.interval.grid_resolution},
                 {"anchored", s.grid.anchored},
                 {"refine", s.refinement.enabled},
                 {"refine_tol", s.refinement.tol},
                 {"max_m", s.refinement.max_m},
                 {"converged", s.interval.converged},
                 {"levels", levels}};
    r["psi"] = {{"lower", s.interval.lower}, {"upper", s.interval.upper}};
    r["certificates"] = {{"min", measure_json(s.interval.certificate_min)},
                         {"max", measure_json(s.interval.certificate_max)}};
    if (s.k && s.tau) {
        json k = {{"mode", s.k->mode}, {"min", opt(s.k->min)}, {"max", opt(s.k->max)}};
        if (s.k->profiles) k["profiles"] = *s.k->profiles;
        r["k"] = k;
        r["tau"] = {{"lower", finite_or_null(s.tau->lower)}, {"upper", finite_or_null(s.tau->upper)}};
    }
    return r;
}

json bounds_infeasible(const std::string& label, const ContingencyTable& table,
                       const BudgetInfo& budget, const BoundsInfeasible& err) {
    json r = table_block("bounds", label, table);
    r["status"] = "infeasible";
    r["budget"] = budget_json(budget);
    r["message"] = err.what();
    r["minimal_f"] = opt(err.minimal_f);
    r["minimal_g"] = opt(err.minimal_g);
    return r;
}

json calibrate(const std::string& label, const ContingencyTable& table, double dx, double dy,
               const MomentBudget& budget) {
    json r = table_block("calibrate", label, table);
    r["budget"] = budget_json({budget, "discrimination", dx, dy});
    return r;
}

json decompose(const std::vector<IndividualProfile>& profiles) {
    json rows = json::array();
    std::size_t row = 1;
    for (const auto& p : profiles) {
        const BiasDecomposition d = vbounds::decompose(p);
        rows.push_back({{"row", row++}, {"delta1", d.delta1}, {"delta2", d.delta2}, {"k_i", d.k_i}});
    }
    return {{"command", "decompose"},
            {"profiles", rows},
            {"count", profiles.size()},
            {"population_k", population_k(profiles)}};
}

json simulate(const sim::PopulationSpec& spec, const sim::CoverageReport& rep,
              const sim::CoverageOptions& opts) {
    const auto& o = rep.oracle;
    json per_type = json::array();
    for (const auto& t : o.per_type)
        per_type.push_back({{"pi", t.pi},
                            {"r_given_0", t.r_given_0},
                            {"r_given_1", t.r_given_1},
                            {"r_int_0", t.r_int_0},
                            {"r_int_1", t.r_int_1}});
    json rows = json::array();
    for (const auto& r : rep.runs)
        rows.push_back({{"run", r.run},
                        {"seed", r.seed},
                        {"joint", {{"p11", r.p11}, {"p10", r.p10}, {"p01", r.p01}, {"p00", r.p00}}},
                        {"lower", r.lower},
                        {"upper", r.upper},
                        {"psi_covered", r.psi_covered},
                        {"tau_covered", r.tau_covered}});
    const double f = rep.runs.empty() ? 0.0 : rep.runs.front().f;
    const double g = rep.runs.empty() ? 0.0 : rep.runs.front().g;
    return {{"command", "simulate"},
            {"population", {{"n", spec.n}, {"seed", spec.seed}, {"types", spec.types.size()}}},
            {"oracle",
             {{"psi", o.psi},
              {"tau", o.tau},
              {"k", o.k},
              {"f_true", o.f_true},
              {"g_true", o.g_true},
              {"joint", {{"p11", o.p11}, {"p10", o.p10}, {"p01", o.p01}, {"p00", o.p00}}},
              {"per_type", per_type}}},
            {"coverage",
             {{"runs", rep.runs.size()},
              {"grid_m", opts.grid.m},
              {"anchored", opts.grid.anchored},
              {"epsilon", rep.epsilon},
              {"slack_se", opts.slack_se},
              {"f_slack", rep.f_slack},
              {"g_slack", rep.g_slack},
              {"f_budget", f},
              {"g_budget", g},
              {"budget_violated", rep.budget_violated},
              {"psi", rep.psi_coverage},
              {"tau", rep.tau_coverage},
              {"rows", rows}}}};
}

std::string render_json(const json& report) { return report.dump(2) + "\n"; }

std::string render_text(const json& report) {
    const std::string cmd = report.at("command").get<std::string>();
    if (cmd == "bounds") return render_bounds(report);
    if (cmd == "calibrate") return render_calibrate(report);
    if (cmd == "decompose") return render_decompose(report);
    if (cmd == "simulate") return render_simulate(report);
    throw std::invalid_argument("unknown report type " + cmd);
}

}  // namespace vbounds::report
