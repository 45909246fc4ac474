#pragma once

// Input formats.
//
// Table files hold the four cells n11 n10 n01 n00, either as one line of four
// numbers or as one "name value" line per cell (a '=' or ':' between name and
// value is accepted). '#' starts a comment. Cells summing to 1 are read as
// relative frequencies, anything else as counts.
//
// Profile files are CSV with the header pi,r_given_1,r_given_0,e11,e10,e00,e01
// (columns in any order).
//
// Analysis and population configs are JSON; see README.md for the schema.

#include "vbounds/bounds.hpp"
#include "vbounds/core.hpp"
#include "vbounds/sensitivity.hpp"
#include "vbounds/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vbounds::io {

class ParseError : public InputError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);
    ParseError(const std::string& source, const std::string& what);
};

ContingencyTable parse_table(std::istream& in, const std::string& source);
ContingencyTable read_table(const std::filesystem::path& path);

std::vector<IndividualProfile> parse_profiles(std::istream& in, const std::string& source);
std::vector<IndividualProfile> read_profiles(const std::filesystem::path& path);

// Parses JSON text; syntax errors become ParseError carrying the line number.
nlohmann::json parse_json(std::istream& in, const std::string& source);
nlohmann::json read_json(const std::filesystem::path& path);

struct ExplicitBudget {
    double f;
    double g;
};

struct Discrimination {
    double dx;
    double dy;
};

using BudgetSpec = std::variant<std::monostate, ExplicitBudget, Discrimination>;

struct KScalar {
    double k;
};

// Either end may be absent, giving a one-sided range.
struct KRange {
    std::optional<double> min;
    std::optional<double> max;
};

struct KProfiles {
    std::filesystem::path path;
};

using KSpec = std::variant<std::monostate, KScalar, KRange, KProfiles>;

struct AnalysisConfig {
    std::string label;
    std::optional<ContingencyTable> table;
    BudgetSpec budget;
    KSpec k;
    GridSpec grid{64, true};
    Refinement refinement{false, 1e-3, 256};
    bool json = false;
    std::optional<double> published_risk_difference;
};

// Relative paths inside the config resolve against base_dir.
AnalysisConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir,
                            const std::string& source);
AnalysisConfig read_config(const std::filesystem::path& path);

struct SimulationConfig {
    sim::PopulationSpec population;
    int runs = 100;
    sim::CoverageOptions coverage;
    bool json = false;
};

sim::PopulationSpec parse_population(const nlohmann::json& j, const std::string& source);
SimulationConfig parse_simulation(const nlohmann::json& j, const std::string& source);
SimulationConfig read_simulation(const std::filesystem::path& path);

}  // namespace vbounds::io
