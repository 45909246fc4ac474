#include "vbounds/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace vbounds::io {

using nlohmann::json;

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : InputError(source + ":" + std::to_string(line) + ": " + what) {}

ParseError::ParseError(const std::string& source, const std::string& what)
    : InputError(source + ": " + what) {}

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

std::optional<double> to_number(std::string_view tok) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<std::string> split_fields(const std::string& line, const std::string& seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (seps.find(c) != std::string::npos) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

}  // namespace

ContingencyTable parse_table(std::istream& in, const std::string& source) {
    static const std::array<std::string, 4> names = {"n11", "n10", "n01", "n00"};
    std::array<std::optional<double>, 4> cells;
    std::size_t first_line = 0;
    std::string raw;
    std::size_t lineno = 0;
    bool positional = false;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (!first_line) first_line = lineno;
        auto fields = split_fields(line, " \t,=:");
        if (fields.size() == 4 && to_number(fields[0])) {
            if (positional || std::any_of(cells.begin(), cells.end(), [](auto& c) { return c; }))
                throw ParseError(source, lineno, "table given twice");
            for (std::size_t i = 0; i < 4; ++i) {
                auto v = to_number(fields[i]);
                if (!v) throw ParseError(source, lineno, "not a number: '" + fields[i] + "'");
                cells[i] = v;
            }
            positional = true;
            continue;
        }
        if (fields.size() != 2)
            throw ParseError(source, lineno,
                             "expected 'name value' or four numbers, got '" + line + "'");
        auto it = std::find(names.begin(), names.end(), fields[0]);
        if (it == names.end())
            throw ParseError(source, lineno,
                             "unknown cell '" + fields[0] + "' (expected n11, n10, n01, n00)");
        auto idx = static_cast<std::size_t>(it - names.begin());
        if (positional || cells[idx]) throw ParseError(source, lineno, "cell " + *it + " given twice");
        auto v = to_number(fields[1]);
        if (!v) throw ParseError(source, lineno, "not a number: '" + fields[1] + "'");
        cells[idx] = v;
    }
    for (std::size_t i = 0; i < 4; ++i)
        if (!cells[i]) throw ParseError(source, "missing cell " + names[i]);
    try {
        return ContingencyTable::detect(*cells[0], *cells[1], *cells[2], *cells[3]);
    } catch (const InputError& e) {
        throw ParseError(source, first_line, e.what());
    }
}

ContingencyTable read_table(const std::filesystem::path& path) {
    auto in = open(path);
    return parse_table(in, path.string());
}

std::vector<IndividualProfile> parse_profiles(std::istream& in, const std::string& source) {
    static const std::array<std::string, 7> columns = {"pi",  "r_given_1", "r_given_0", "e11",
                                                       "e10", "e00",       "e01"};
    std::string raw;
    std::size_t lineno = 0;
    std::vector<std::size_t> order;  // CSV column -> field index
    std::vector<IndividualProfile> out;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        std::vector<std::string> fields;
        for (auto& f : split_fields(line, ",")) fields.push_back(trim(f));
        if (order.empty()) {
            for (const auto& f : fields) {
                auto it = std::find(columns.begin(), columns.end(), f);
                if (it == columns.end()) throw ParseError(source, lineno, "unknown column '" + f + "'");
                order.push_back(static_cast<std::size_t>(it - columns.begin()));
            }
            std::vector<std::size_t> sorted = order;
            std::sort(sorted.begin(), sorted.end());
            if (sorted.size() != columns.size() ||
                std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                throw ParseError(source, lineno,
                                 "header must name each of pi,r_given_1,r_given_0,e11,e10,e00,e01 once");
            continue;
        }
        if (fields.size() != order.size())
            throw ParseError(source, lineno,
                             "expected " + std::to_string(order.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        std::array<double, 7> v{};
        for (std::size_t c = 0; c < fields.size(); ++c) {
            auto x = to_number(fields[c]);
            if (!x) throw ParseError(source, lineno, "not a number: '" + fields[c] + "'");
            v[order[c]] = *x;
        }
        IndividualProfile p{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
        try {
            validate(p);
        } catch (const InputError& e) {
            throw ParseError(source, lineno, e.what());
        }
        out.push_back(p);
    }
    if (order.empty()) throw ParseError(source, "missing header line");
    if (out.empty()) throw ParseError(source, "no profiles");
    return out;
}

std::vector<IndividualProfile> read_profiles(const std::filesystem::path& path) {
    auto in = open(path);
    return parse_profiles(in, path.string());
}

json parse_json(std::istream& in, const std::string& source) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Map the byte offset to a line number.
        std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        std::size_t line = 1 + static_cast<std::size_t>(
                                   std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        if (upto > 0 && upto <= text.size() && text[upto - 1] == '\n') --line;
        std::string what = e.what();
        auto pos = what.find("parse error");
        throw ParseError(source, line, pos == std::string::npos ? what : what.substr(pos));
    }
}

json read_json(const std::filesystem::path& path) {
    auto in = open(path);
    return parse_json(in, path.string());
}

namespace {

// Typed access to JSON members with error messages naming the key path.
class Reader {
public:
    Reader(const json& j, std::string source, std::string path)
        : j_(j), source_(std::move(source)), path_(std::move(path)) {
        if (!j_.is_object()) fail("must be an object");
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(source_, (path_.empty() ? std::string("top level") : "'" + path_ + "'") +
                                      " " + what);
    }

    std::string key_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void allow_only(std::initializer_list<const char*> keys) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool ok = std::any_of(keys.begin(), keys.end(),
                                  [&](const char* k) { return it.key() == k; });
            if (!ok) throw ParseError(source_, "unknown key '" + key_path(it.key()) + "'");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    const json& raw(const std::string& key) const { return j_.at(key); }

    Reader child(const std::string& key) const { return Reader(j_.at(key), source_, key_path(key)); }

    double number(const std::string& key) const {
        const json& v = j_.at(key);
        if (!v.is_number()) throw ParseError(source_, "'" + key_path(key) + "' must be a number");
        return v.get<double>();
    }

    std::optional<double> opt_number(const std::string& key) const {
        if (!has(key) || j_.at(key).is_null()) return std::nullopt;
        return number(key);
    }

    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    std::uint64_t unsigned_int(const std::string& key) const {
        const json& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw ParseError(source_, "'" + key_path(key) + "' must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean_or(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ParseError(source_, "'" + key_path(key) + "' must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) const {
        const json& v = j_.at(key);
        if (!v.is_string()) throw ParseError(source_, "'" + key_path(key) + "' must be a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) const {
        const json& v = j_.at(key);
        if (!v.is_array()) throw ParseError(source_, "'" + key_path(key) + "' must be an array");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number())
                throw ParseError(source_, "'" + key_path(key) + "' must contain only numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    const std::string& source() const { return source_; }

private:
    const json& j_;
    std::string source_;
    std::string path_;
};

int grid_m(const Reader& r, const std::string& key) {
    double m = r.number(key);
    if (m < 1 || m != std::floor(m) || m > 4096)
        r.fail("key '" + key + "' must be an integer between 1 and 4096");
    return static_cast<int>(m);
}

}  // namespace

AnalysisConfig parse_config(const json& j, const std::filesystem::path& base_dir,
                            const std::string& source) {
    Reader r(j, source, "");
    r.allow_only({"label", "table", "table_file", "budget", "k", "grid", "output",
                  "published_risk_difference"});
    AnalysisConfig cfg;
    if (r.has("label")) cfg.label = r.string("label");

    if (r.has("table") && r.has("table_file")) r.fail("may give 'table' or 'table_file', not both");
    try {
        if (r.has("table")) {
            Reader t = r.child("table");
            t.allow_only({"n11", "n10", "n01", "n00"});
            cfg.table = ContingencyTable::detect(t.number("n11"), t.number("n10"), t.number("n01"),
                                                 t.number("n00"));
        } else if (r.has("table_file")) {
            cfg.table = read_table(base_dir / r.string("table_file"));
        }
    } catch (const ParseError&) {
        throw;
    } catch (const nlohmann::json::out_of_range& e) {
        throw ParseError(source, std::string("'table' is missing a cell: ") + e.what());
    } catch (const InputError& e) {
        throw ParseError(source, std::string("'table': ") + e.what());
    }

    if (r.has("budget")) {
        Reader b = r.child("budget");
        b.allow_only({"f", "g", "dx", "dy"});
        bool explicit_mode = b.has("f") || b.has("g");
        bool discrimination = b.has("dx") || b.has("dy");
        if (explicit_mode == discrimination)
            b.fail("must give either f and g, or dx and dy");
        if (explicit_mode) {
            if (!b.has("f") || !b.has("g")) b.fail("needs both f and g");
            cfg.budget = ExplicitBudget{b.number("f"), b.number("g")};
        } else {
            if (!b.has("dx") || !b.has("dy")) b.fail("needs both dx and dy");
            cfg.budget = Discrimination{b.number("dx"), b.number("dy")};
        }
    }

    if (r.has("k")) {
        const json& k = r.raw("k");
        if (k.is_number()) {
            cfg.k = KScalar{k.get<double>()};
        } else {
            Reader kr = r.child("k");
            kr.allow_only({"min", "max", "profiles"});
            if (kr.has("profiles")) {
                if (kr.has("min") || kr.has("max")) kr.fail("profiles cannot be combined with min/max");
                cfg.k = KProfiles{base_dir / kr.string("profiles")};
            } else {
                KRange range{kr.opt_number("min"), kr.opt_number("max")};
                if (!range.min && !range.max) kr.fail("needs min, max or profiles");
                cfg.k = range;
            }
        }
    }

    if (r.has("grid")) {
        Reader g = r.child("grid");
        g.allow_only({"m", "refine", "refine_tol", "max_m", "anchored"});
        if (g.has("m")) cfg.grid.m = grid_m(g, "m");
        cfg.grid.anchored = g.boolean_or("anchored", cfg.grid.anchored);
        cfg.refinement.enabled = g.boolean_or("refine", cfg.refinement.enabled);
        cfg.refinement.tol = g.number_or("refine_tol", cfg.refinement.tol);
        if (!(cfg.refinement.tol > 0)) g.fail("refine_tol must be positive");
        if (g.has("max_m")) cfg.refinement.max_m = grid_m(g, "max_m");
    }

    if (r.has("output")) {
        std::string out = r.string("output");
        if (out != "text" && out != "json") r.fail("key 'output' must be \"text\" or \"json\"");
        cfg.json = out == "json";
    }
    cfg.published_risk_difference = r.opt_number("published_risk_difference");
    return cfg;
}

AnalysisConfig read_config(const std::filesystem::path& path) {
    return parse_config(read_json(path), path.parent_path(), path.string());
}

sim::PopulationSpec parse_population(const json& j, const std::string& source) {
    Reader r(j, source, "population");
    r.allow_only({"n", "seed", "types"});
    sim::PopulationSpec spec;
    spec.n = r.has("n") ? r.unsigned_int("n") : 100000;
    spec.seed = r.has("seed") ? r.unsigned_int("seed") : 0;
    if (!r.has("types") || !r.raw("types").is_array()) r.fail("needs an array 'types'");
    const json& types = r.raw("types");
    for (std::size_t i = 0; i < types.size(); ++i) {
        Reader t(types[i], source, "population.types[" + std::to_string(i) + "]");
        t.allow_only({"share", "invariant_versions", "versions", "dist_treated", "dist_control"});
        sim::TypeShare ts;
        ts.share = t.number_or("share", 1.0);
        ts.model.invariant_versions = t.boolean_or("invariant_versions", true);
        if (!t.has("versions") || !t.raw("versions").is_array()) t.fail("needs an array 'versions'");
        const json& versions = t.raw("versions");
        for (std::size_t v = 0; v < versions.size(); ++v) {
            Reader vr(versions[v], source,
                      "population.types[" + std::to_string(i) + "].versions[" + std::to_string(v) + "]");
            vr.allow_only({"label", "prob", "treat", "y_treated", "y_control"});
            sim::Version ver;
            ver.label = vr.has("label") ? vr.string("label") : "v" + std::to_string(v);
            for (const char* key : {"prob", "treat", "y_treated", "y_control"})
                if (!vr.has(key)) vr.fail(std::string("needs '") + key + "'");
            ver.prob = vr.number("prob");
            ver.treat = vr.number("treat");
            ver.y_treated = vr.number("y_treated");
            ver.y_control = vr.number("y_control");
            ts.model.versions.push_back(ver);
        }
        if (!ts.model.invariant_versions) {
            if (!t.has("dist_treated") || !t.has("dist_control"))
                t.fail("needs dist_treated and dist_control when invariant_versions is false");
            ts.model.dist_treated = t.numbers("dist_treated");
            ts.model.dist_control = t.numbers("dist_control");
        }
        spec.types.push_back(std::move(ts));
    }
    try {
        sim::validate(spec);
    } catch (const ParseError&) {
        throw;
    } catch (const InputError& e) {
        throw ParseError(source, e.what());
    }
    return spec;
}

SimulationConfig parse_simulation(const json& j, const std::string& source) {
    Reader r(j, source, "");
    r.allow_only({"population", "runs", "coverage", "output"});
    if (!r.has("population")) r.fail("needs a 'population' object");
    SimulationConfig cfg;
    cfg.population = parse_population(r.raw("population"), source);
    if (r.has("runs")) {
        std::uint64_t runs = r.unsigned_int("runs");
        if (runs < 1) r.fail("key 'runs' must be at least 1");
        if (runs > 1000000) r.fail("key 'runs' is too large");
        cfg.runs = static_cast<int>(runs);
    }
    if (r.has("coverage")) {
        Reader c = r.child("coverage");
        c.allow_only({"grid_m", "anchored", "slack_se", "f", "g"});
        if (c.has("grid_m")) cfg.coverage.grid.m = grid_m(c, "grid_m");
        cfg.coverage.grid.anchored = c.boolean_or("anchored", true);
        cfg.coverage.slack_se = c.number_or("slack_se", cfg.coverage.slack_se);
        if (cfg.coverage.slack_se < 0) c.fail("slack_se must be non-negative");
        cfg.coverage.f_override = c.opt_number("f");
        cfg.coverage.g_override = c.opt_number("g");
    }
    if (r.has("output")) cfg.json = r.string("output") == "json";
    return cfg;
}

SimulationConfig read_simulation(const std::filesystem::path& path) {
    return parse_simulation(read_json(path), path.string());
}

}  // namespace vbounds::io
