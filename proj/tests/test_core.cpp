#include "emsynth/core.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace emsynth;

TEST_CASE("activity is capacity times capacity factor")
{
    CHECK(compute_activity(100.0, 0.5) == doctest::Approx(50.0));
    CHECK(compute_activity(0.0, 0.9) == 0.0);
    CHECK(compute_activity(7.25, 0.4) == doctest::Approx(2.9));
    CHECK_THROWS_AS(compute_activity(-1.0, 0.5), DomainError);
    CHECK_THROWS_AS(compute_activity(1.0, -0.5), DomainError);
}

TEST_CASE("emissions are activity times emission factor")
{
    CHECK(compute_emissions(50.0, 2.0) == doctest::Approx(100.0));
    CHECK(compute_emissions(0.0, 5.0) == 0.0);
    CHECK(compute_emissions(3.3, 0.91) == doctest::Approx(3.003));
    CHECK_THROWS_AS(compute_emissions(-1.0, 2.0), DomainError);
}

TEST_CASE("decomposition inverts the equations")
{
    KnownFactors cf_ef;
    cf_ef.capacity_factor = 0.5;
    cf_ef.emission_factor = 2.0;
    CHECK(decompose_emissions(100.0, cf_ef) == doctest::Approx(100.0));
    CHECK(decompose_emissions(0.0, cf_ef) == 0.0);

    KnownFactors c_ef;
    c_ef.capacity = 8.0;
    c_ef.emission_factor = 1.5;
    CHECK(decompose_emissions(12.0, c_ef) == doctest::Approx(1.0));

    SUBCASE("zero known factor with positive total is inconsistent")
    {
        KnownFactors zero;
        zero.capacity = 0.0;
        zero.emission_factor = 2.0;
        CHECK_THROWS_AS(decompose_emissions(5.0, zero), InconsistencyError);
        CHECK(decompose_emissions(0.0, zero) == 0.0);
    }
    SUBCASE("exactly two factors must be known")
    {
        KnownFactors one;
        one.capacity = 2.0;
        CHECK_THROWS_AS(decompose_emissions(5.0, one), UsageError);
        KnownFactors three;
        three.capacity = 2.0;
        three.capacity_factor = 0.5;
        three.emission_factor = 1.0;
        CHECK_THROWS_AS(decompose_emissions(5.0, three), UsageError);
    }
}

TEST_CASE("decompose/compose round trips at 1e-12 relative")
{
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(0.01, 1000.0);
    for (int i = 0; i < 10000; ++i) {
        const double c = dist(rng);
        const double cf = dist(rng);
        const double ef = dist(rng);
        const double e = compute_emissions(compute_activity(c, cf), ef);

        const double c2 = infer_capacity(e, cf, ef);
        const double cf2 = infer_capacity_factor(e, c, ef);
        const double ef2 = infer_emission_factor(e, c, cf);
        CHECK(std::abs(compute_emissions(compute_activity(c2, cf), ef) - e) <= 1e-12 * e);
        CHECK(std::abs(compute_emissions(compute_activity(c, cf2), ef) - e) <= 1e-12 * e);
        CHECK(std::abs(compute_emissions(compute_activity(c, cf), ef2) - e) <= 1e-12 * e);
    }
}

TEST_CASE("composition equals the triple product and is monotone")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double c = dist(rng);
        const double cf = dist(rng);
        const double ef = dist(rng);
        const double e = compute_emissions(compute_activity(c, cf), ef);
        CHECK(e == doctest::Approx(c * cf * ef).epsilon(1e-15));
        CHECK(compute_emissions(compute_activity(c + 1.0, cf), ef) >= e);
        CHECK(compute_emissions(compute_activity(c, cf + 1.0), ef) >= e);
        CHECK(compute_emissions(compute_activity(c, cf), ef + 1.0) >= e);
    }
}

TEST_CASE("co2e is the GWP-weighted sum")
{
    const GwpTable gwp = GwpTable::defaults();
    CHECK(to_co2e({{Gas::CO2, 10.0}}, gwp, 100) == doctest::Approx(10.0));
    CHECK(to_co2e({{Gas::CH4, 1.0}}, gwp, 100) == doctest::Approx(28.0));
    CHECK(to_co2e({{Gas::CO2, 5.0}, {Gas::CH4, 2.0}, {Gas::N2O, 0.1}}, gwp, 100) ==
          doctest::Approx(87.5));

    SUBCASE("missing table entry is a configuration error")
    {
        GwpTable partial;
        partial.set(Gas::CH4, 100, 28.0);
        CHECK_THROWS_AS(to_co2e({{Gas::N2O, 1.0}}, partial, 100), ConfigError);
        CHECK_THROWS_AS(to_co2e({{Gas::CH4, 1.0}}, partial, 20), ConfigError);
    }
    SUBCASE("non-GHG gases are rejected")
    {
        CHECK_THROWS_AS(to_co2e({{Gas::SO2, 1.0}}, gwp, 100), ConfigError);
        CHECK_THROWS_AS(to_co2e({{Gas::CO2e100, 1.0}}, gwp, 100), ConfigError);
    }
}

TEST_CASE("co2e is linear")
{
    const GwpTable gwp = GwpTable::defaults();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(0.0, 50.0);
    for (int i = 0; i < 200; ++i) {
        std::map<Gas, double> a{{Gas::CO2, dist(rng)}, {Gas::CH4, dist(rng)}, {Gas::N2O, dist(rng)}};
        std::map<Gas, double> b{{Gas::CO2, dist(rng)}, {Gas::CH4, dist(rng)}, {Gas::N2O, dist(rng)}};
        std::map<Gas, double> sum;
        for (Gas gas : greenhouse_gases()) {
            sum[gas] = a[gas] + b[gas];
        }
        CHECK(to_co2e(a, gwp, 100) + to_co2e(b, gwp, 100) ==
              doctest::Approx(to_co2e(sum, gwp, 100)).epsilon(1e-12));
    }
}

TEST_CASE("gwp table pins CO2 to one and rejects bad factors")
{
    GwpTable table;
    CHECK(table.factor(Gas::CO2, 100) == 1.0);
    CHECK(table.factor(Gas::CO2, 20) == 1.0);
    CHECK_THROWS_AS(table.set(Gas::CO2, 100, 2.0), ConfigError);
    CHECK_THROWS_AS(table.set(Gas::CH4, 100, -1.0), ConfigError);
    CHECK_THROWS_AS(table.set(Gas::SO2, 100, 1.0), ConfigError);

    const GwpTable defaults = GwpTable::defaults();
    CHECK(defaults.factor(Gas::CH4, 20) == doctest::Approx(84.0));
    CHECK(defaults.factor(Gas::N2O, 100) == doctest::Approx(265.0));
}

TEST_CASE("gas codes form a closed, classified set")
{
    for (Gas gas : all_gases()) {
        auto parsed = parse_gas(to_string(gas));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == gas);
    }
    CHECK(!parse_gas("XYZ").has_value());
    CHECK(parse_gas("PM2.5") == Gas::PM2_5);

    int ghg = 0, derived = 0, pollutant = 0;
    for (Gas gas : all_gases()) {
        ghg += is_greenhouse_gas(gas);
        derived += is_derived_gas(gas);
        pollutant += is_non_ghg(gas);
    }
    CHECK(ghg == 3);
    CHECK(derived == 2);
    CHECK(pollutant == 8);
}

TEST_CASE("confidence levels are totally ordered")
{
    CHECK(ConfidenceLevel::very_low < ConfidenceLevel::low);
    CHECK(ConfidenceLevel::low < ConfidenceLevel::medium);
    CHECK(ConfidenceLevel::medium < ConfidenceLevel::high);
    CHECK(ConfidenceLevel::high < ConfidenceLevel::very_high);
    CHECK(parse_confidence("medium") == ConfidenceLevel::medium);
}

TEST_CASE("calendar helpers honor leap years and end-exclusive spans")
{
    CHECK(is_leap_year(2024));
    CHECK(!is_leap_year(2023));
    CHECK(!is_leap_year(1900));
    CHECK(is_leap_year(2000));
    CHECK(days_in_month(2024, 2) == 29);
    CHECK(days_in_month(2023, 2) == 28);

    CHECK(day_difference({2021, 1, 15}, {2021, 2, 14}) == 30);
    CHECK(day_difference({2024, 2, 1}, {2024, 3, 1}) == 29);
    CHECK(day_difference({2021, 1, 1}, {2022, 1, 1}) == 365);
    CHECK_THROWS_AS(day_difference({2022, 1, 1}, {2021, 1, 1}), DomainError);

    CHECK(months_between({2021, 1}, {2021, 12}) == 12);
    CHECK(months_between({2021, 11}, {2022, 2}) == 4);
    CHECK(YearMonth{2021, 12}.next() == YearMonth{2022, 1});
    CHECK(YearMonth::parse("2021-03") == YearMonth{2021, 3});
    CHECK(!YearMonth::parse("2021-13").has_value());
    CHECK(Date::parse("2024-02-29").has_value());
    CHECK(!Date::parse("2023-02-29").has_value());
}

TEST_CASE("capacity factor bounds")
{
    CHECK(cf_within_bounds(1.0, CfBoundMode::strict));
    CHECK(!cf_within_bounds(1.2, CfBoundMode::strict));
    CHECK(cf_within_bounds(1.2, CfBoundMode::extended));
    CHECK(!cf_within_bounds(1.6, CfBoundMode::extended));
    CHECK(!cf_within_bounds(-0.1, CfBoundMode::strict));
}

TEST_CASE("default pollutant paths follow the direct-route sector list")
{
    const Subsector power = Subsector::make("electricity-generation");
    CHECK(power.path_for(Gas::SO2) == PollutantPath::direct);
    const Subsector textiles = Subsector::make("textiles-leather-apparel");
    CHECK(textiles.path_for(Gas::SO2) == PollutantPath::copollutant);
    CHECK_THROWS_AS(textiles.path_for(Gas::CO2), DomainError);
}
