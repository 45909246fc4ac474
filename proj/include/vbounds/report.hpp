#pragma once

// Machine-readable reports are JSON objects; the text form is rendered from
// the same object, so both always carry the same numbers (text rounds to four
// decimals).

#include "vbounds/bounds.hpp"
#include "vbounds/core.hpp"
#include "vbounds/sensitivity.hpp"
#include "vbounds/sim.hpp"

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace vbounds::report {

using nlohmann::json;

struct BudgetInfo {
    MomentBudget budget;
    std::string source;  // "explicit" or "discrimination"
    std::optional<double> dx;
    std::optional<double> dy;
};

struct KInfo {
    std::string mode;  // "scalar", "range" or "profiles"
    std::optional<double> min;
    std::optional<double> max;
    std::optional<std::size_t> profiles;
};

struct BoundsSummary {
    std::string label;
    ContingencyTable table;
    BudgetInfo budget;
    GridSpec grid;
    Refinement refinement;
    IdentifiedInterval interval;
    std::optional<KInfo> k;
    std::optional<TauInterval> tau;
    std::optional<double> published_risk_difference;
};

json table_json(const ContingencyTable& t);
json joint_json(const ObservedJoint& j);

json bounds(const BoundsSummary& s);
json bounds_infeasible(const std::string& label, const ContingencyTable& table,
                       const BudgetInfo& budget, const BoundsInfeasible& err);
json calibrate(const std::string& label, const ContingencyTable& table, double dx, double dy,
               const MomentBudget& budget);
json decompose(const std::vector<IndividualProfile>& profiles);
json simulate(const sim::PopulationSpec& spec, const sim::CoverageReport& rep,
              const sim::CoverageOptions& opts);

// Pretty-printed JSON with a trailing newline.
std::string render_json(const json& report);
std::string render_text(const json& report);

// Fixed four-decimal rendering used throughout the text reports.
std::string fixed4(double v);

}  // namespace vbounds::report
