#include <doctest.h>

#include "vbounds/io.hpp"

#include <sstream>

using namespace vbounds;
using namespace vbounds::io;
using doctest::Approx;

namespace {

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

AnalysisConfig config_from(const std::string& text) {
    std::istringstream in(text);
    return parse_config(parse_json(in, "cfg.json"), VBOUNDS_FIXTURES, "cfg.json");
}

}  // namespace

TEST_CASE("one-line tables") {
    std::istringstream counts("# drug\n978 1864 114 3649\n");
    auto t = parse_table(counts, "t");
    CHECK_FALSE(t.is_frequencies());
    CHECK(t.n11() == 978);
    CHECK(t.n00() == 3649);
    std::istringstream freqs("0.05,0.45,0.005,0.495");
    CHECK(parse_table(freqs, "t").is_frequencies());
}

TEST_CASE("named-cell tables") {
    std::istringstream in("n00 = 3649\nn11: 978\n  n01\t114  # comment\nn10 1864\n");
    auto t = parse_table(in, "t");
    CHECK(t.n11() == 978);
    CHECK(t.n10() == 1864);
    CHECK(t.n01() == 114);
    CHECK(t.n00() == 3649);
}

TEST_CASE("table errors carry line numbers") {
    std::istringstream bad("n11 1\nn10 x\n");
    CHECK(message_of([&] { parse_table(bad, "t.table"); }).find("t.table:2:") == 0);
    std::istringstream dup("n11 1\nn11 2\nn01 1\nn00 1\n");
    CHECK(message_of([&] { parse_table(dup, "t.table"); }).find("t.table:2:") == 0);
    std::istringstream missing("n11 1\nn10 2\n");
    CHECK_FALSE(message_of([&] { parse_table(missing, "t.table"); }).empty());
    std::istringstream three("1 2 3\n");
    CHECK(message_of([&] { parse_table(three, "t.table"); }).find("t.table:1:") == 0);
    std::istringstream zero("0 0 0 0\n");
    CHECK_THROWS_AS(parse_table(zero, "t.table"), InputError);
}

TEST_CASE("fixture tables") {
    auto golf = read_table(VBOUNDS_FIXTURES "/golf.table");
    CHECK(golf.is_frequencies());
    CHECK(golf.n01() == 0.005);
    auto vaccine = read_table(VBOUNDS_FIXTURES "/vaccine.table");
    CHECK(vaccine.total() == 43448);
    CHECK_THROWS_AS(read_table(VBOUNDS_FIXTURES "/missing.table"), InputError);
}

TEST_CASE("profile csv") {
    std::istringstream in("e01,pi,r_given_1,r_given_0,e11,e10,e00\n0.03,0.5,0.10,0.01,0.10,0.02,0.01\n");
    auto ps = parse_profiles(in, "p.csv");
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].pi == 0.5);
    CHECK(ps[0].e01 == 0.03);
    CHECK(ps[0].e10 == 0.02);

    std::istringstream out_of_range(
        "pi,r_given_1,r_given_0,e11,e10,e00,e01\n0.5,0.1,0.1,0.1,0.1,0.1,0.1\n0.5,1.2,0.1,0.1,0.1,0.1,0.1\n");
    auto msg = message_of([&] { parse_profiles(out_of_range, "p.csv"); });
    CHECK(msg.find("p.csv:3:") == 0);
    CHECK(msg.find("r_given_1") != std::string::npos);

    std::istringstream short_row("pi,r_given_1,r_given_0,e11,e10,e00,e01\n0.5,0.1\n");
    CHECK(message_of([&] { parse_profiles(short_row, "p.csv"); }).find("p.csv:2:") == 0);
    std::istringstream no_header("pi,r_given_1\n");
    CHECK_THROWS_AS(parse_profiles(no_header, "p.csv"), InputError);
    std::istringstream empty("pi,r_given_1,r_given_0,e11,e10,e00,e01\n");
    CHECK_THROWS_AS(parse_profiles(empty, "p.csv"), InputError);
}

TEST_CASE("json syntax errors carry line numbers") {
    std::istringstream in("{\n  \"label\": \"x\",\n  \"budget\": {\"f\": 0.1,,}\n}\n");
    CHECK(message_of([&] { parse_json(in, "c.json"); }).find("c.json:3:") == 0);
}

TEST_CASE("analysis config") {
    auto cfg = config_from(R"({"label": "golf", "table_file": "golf.table",
        "budget": {"f": 0.125, "g": 0.03}, "k": 0.05, "grid": {"m": 16, "refine": true, "max_m": 64}})");
    CHECK(cfg.label == "golf");
    REQUIRE(cfg.table);
    CHECK(cfg.table->is_frequencies());
    REQUIRE(std::holds_alternative<ExplicitBudget>(cfg.budget));
    CHECK(std::get<ExplicitBudget>(cfg.budget).g == 0.03);
    REQUIRE(std::holds_alternative<KScalar>(cfg.k));
    CHECK(cfg.grid.m == 16);
    CHECK(cfg.refinement.enabled);
    CHECK(cfg.refinement.max_m == 64);

    auto inline_table = config_from(R"({"table": {"n11": 978, "n10": 1864, "n01": 114, "n00": 3649},
        "budget": {"dx": 0.5, "dy": 0.5}, "k": {"min": 0.15}})");
    CHECK(inline_table.table->total() == 6605);
    REQUIRE(std::holds_alternative<Discrimination>(inline_table.budget));
    REQUIRE(std::holds_alternative<KRange>(inline_table.k));
    CHECK(*std::get<KRange>(inline_table.k).min == 0.15);
    CHECK_FALSE(std::get<KRange>(inline_table.k).max);

    auto array_table = config_from(
        R"({"table": {"n11": 1, "n10": 1, "n01": 1, "n00": 1}, "k": {"profiles": "golf_profiles.csv"}})");
    REQUIRE(std::holds_alternative<KProfiles>(array_table.k));
    CHECK(std::get<KProfiles>(array_table.k).path.filename() == "golf_profiles.csv");
}

TEST_CASE("analysis config errors") {
    CHECK_THROWS_AS(config_from(R"({"tabel": {"n11": 1}})"), InputError);
    CHECK_THROWS_AS(config_from(R"({"budget": {"f": 0.1, "dx": 0.5}})"), InputError);
    CHECK_THROWS_AS(config_from(R"({"budget": {"f": 0.1}})"), InputError);
    CHECK_THROWS_AS(config_from(R"({"k": {"min": 0.2, "profiles": "x.csv"}})"), InputError);
    CHECK_THROWS_AS(config_from(R"({"grid": {"m": 0}})"), InputError);
    CHECK_THROWS_AS(config_from(R"({"table": {"n11": 1, "n10": 2, "n01": 3}})"), InputError);
    CHECK_THROWS_AS(config_from(R"({"table": {"n11": 1, "n10": 2, "n01": 3, "n00": -4}})"), InputError);
    CHECK_THROWS_AS(config_from(R"([1, 2])"), InputError);
}

TEST_CASE("fixture configs parse") {
    for (const char* name : {"golf.json", "drug.json", "vaccine.json", "golf_calibrate.json"}) {
        CAPTURE(name);
        auto cfg = read_config(std::string(VBOUNDS_FIXTURES "/") + name);
        CHECK(cfg.table.has_value());
    }
    auto vaccine = read_config(VBOUNDS_FIXTURES "/vaccine.json");
    REQUIRE(vaccine.published_risk_difference);
    CHECK(*vaccine.published_risk_difference == -0.0064);
}

TEST_CASE("simulation config") {
    auto cfg = read_simulation(VBOUNDS_FIXTURES "/golf_toy.json");
    CHECK(cfg.runs == 100);
    CHECK(cfg.population.n == 100000);
    CHECK(cfg.population.seed == 20240601);
    REQUIRE(cfg.population.types.size() == 1);
    CHECK(cfg.population.types[0].model.versions.size() == 2);
    CHECK(cfg.population.types[0].model.versions[0].y_treated == 0.10);
    CHECK(cfg.coverage.grid.m == 32);

    auto bad = nlohmann::json::parse(R"({"population": {"n": 10, "seed": 1, "types": [
        {"share": 1, "versions": [{"label": "a", "prob": 1, "treat": 1, "y_treated": 0.5, "y_control": 0.5}]}]}})");
    CHECK_THROWS_AS(parse_simulation(bad, "s.json"), InputError);
    auto zero_runs = nlohmann::json::parse(R"({"population": {"n": 10, "seed": 1, "types": [
        {"share": 1, "versions": [{"label": "a", "prob": 1, "treat": 0.5, "y_treated": 0.5, "y_control": 0.5}]}]},
        "runs": 0})");
    CHECK_THROWS_AS(parse_simulation(zero_runs, "s.json"), InputError);
}
