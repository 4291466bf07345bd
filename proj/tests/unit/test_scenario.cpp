#include "doctest.h"

#include "scoot/csv.hpp"
#include "scoot/scenario.hpp"

using namespace scoot;

TEST_CASE("scenario parsing: scalars, arrays, comments") {
    const std::string text =
        "# demo scenario\n"
        "phi = 10\n"
        "lambda = 2.5\n"
        "scheme = pw3\n"
        "pi = [3.2, 3.0, 2.0, 1.0]\n"
        "\n"
        "K = 20 # trailing comment\n";
    const Scenario sc = Scenario::parse_text(text, "demo");
    CHECK(sc.number("phi") == 10.0);
    CHECK(sc.number("lambda") == 2.5);
    CHECK(sc.word("scheme") == "pw3");
    const auto pi = sc.numbers("pi");
    REQUIRE(pi.size() == 4);
    CHECK(pi[1] == 3.0);
    CHECK(sc.number("K") == 20.0);
    CHECK(sc.number_or("absent", -1.0) == -1.0);
}

TEST_CASE("scenario parsing reports the offending line") {
    try {
        Scenario::parse_text("phi = 10\noops\n", "bad");
        FAIL("expected a parse error");
    } catch (const ScenarioError& e) {
        CHECK(std::string(e.what()).find("bad:2") != std::string::npos);
    }
    try {
        Scenario::parse_text("pi = [1, 2\n", "bad2");
        FAIL("expected a parse error");
    } catch (const ScenarioError& e) {
        CHECK(std::string(e.what()).find("bad2:1") != std::string::npos);
    }
    try {
        Scenario::parse_text("lambda = abc\n", "bad3").number("lambda");
        FAIL("expected a number error");
    } catch (const ScenarioError& e) {
        CHECK(std::string(e.what()).find("lambda") != std::string::npos);
    }
}

TEST_CASE("scenario round-trips through text") {
    Scenario sc;
    SystemParams p;
    p.charging = ChargingProfile::piecewise(8, 8.0);
    scenario_set_params(sc, p);
    DesignVariables d;
    d.grid_dim = 13;
    d.chargers = 6.0;
    d.headway = 0.75;
    d.truck_load = 19.0;
    d.promotions = {4.9, 4.8, 3.4, 1.7, 0.0, 0.0, 0.0, 0.0};
    scenario_set_design(sc, d);
    sc.set("seed", 77.0);

    const Scenario back = Scenario::parse_text(sc.to_text(), "roundtrip");
    const SystemParams p2 = params_from_scenario(back);
    CHECK(p2.region == p.region);
    CHECK(p2.charging.tau.size() == p.charging.tau.size());
    CHECK(p2.charging.tau[6] == doctest::Approx(p.charging.tau[6]).epsilon(1e-15));
    const DesignVariables d2 = design_from_scenario(back, p2);
    CHECK(d2.grid_dim == 13);
    CHECK(d2.headway == 0.75);
    CHECK(d2.promotions[0] == 4.9);
    CHECK(back.number("seed") == 77.0);
    // Byte-for-byte stability of re-serialization.
    CHECK(back.to_text() == sc.to_text());
}

TEST_CASE("csv formatting is stable") {
    CsvTable t({"a", "b"});
    t.add_row({CsvTable::cell(1.0 / 3.0), CsvTable::cell(42.0)});
    CHECK(t.to_string() == "a,b\n0.333333,42\n");
    CHECK(CsvTable::cell_full(1.0 / 3.0) == "0.33333333333333331");
}
