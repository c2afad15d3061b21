#include "emsynth/ingestion.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace emsynth;
using emsynth::testing::TempDir;

namespace {

SubsectorRegistry two_subsectors()
{
    SubsectorRegistry registry;
    registry.emplace("power", Subsector::make("power", "1A1", "power-profile"));
    registry.emplace("textiles", Subsector::make("textiles", "2H", "industry"));
    return registry;
}

const char* kAssetHeader =
    "id,subsector,country,lat,lon,capacity,capacity_factor,economic_output,scraped,emitting,"
    "ef_co2,reported_co2_t,reported_start,reported_end,reported_granularity\n";

}  // namespace

TEST_CASE("asset registry loads valid rows")
{
    TempDir dir("assets");
    const std::string path = dir.write(
        "assets.csv",
        std::string(kAssetHeader) +
            "p1,power,ALB,41.3,19.8,100,0.5,,false,true,2.0,,,,\n"
            "t1,textiles,ALB,,,,,5,true,true,,,,,\n"
            "t2,textiles,BTN,,,,,3,true,true,,1000,2022-01-01,2023-01-01,annual\n");
    auto loaded = load_asset_registry(path, two_subsectors());
    REQUIRE(loaded.ok());
    REQUIRE(loaded.value.assets().size() == 3);

    const Asset* p1 = loaded.value.find("p1");
    REQUIRE(p1 != nullptr);
    CHECK(p1->capacity == 100.0);
    CHECK(p1->emission_factors.at(Gas::CO2) == 2.0);
    CHECK(p1->located());
    CHECK(!p1->has_reported_emissions);

    const Asset* t2 = loaded.value.find("t2");
    REQUIRE(t2 != nullptr);
    CHECK(t2->has_reported_emissions);
    CHECK(t2->reported.at(Gas::CO2) == 1000.0);
    REQUIRE(t2->reported_period.has_value());
    CHECK(t2->reported_period->granularity == Granularity::annual);
}

TEST_CASE("duplicate asset id is reported with its row")
{
    TempDir dir("assets_dup");
    const std::string path = dir.write("assets.csv",
                                       std::string(kAssetHeader) +
                                           "a,power,ALB,,,1,0.5,,false,true,1,,,,\n"
                                           "b,power,ALB,,,1,0.5,,false,true,1,,,,\n"
                                           "a,power,ALB,,,1,0.5,,false,true,1,,,,\n");
    auto loaded = load_asset_registry(path, two_subsectors());
    REQUIRE(!loaded.ok());
    REQUIRE(loaded.errors.size() == 1);
    // header is line 1, the duplicate sits on line 4
    CHECK(loaded.errors[0].find(":4:") != std::string::npos);
    CHECK(loaded.errors[0].find("duplicate") != std::string::npos);
}

TEST_CASE("empty asset file with valid header loads empty with a warning")
{
    TempDir dir("assets_empty");
    const std::string path = dir.write("assets.csv", kAssetHeader);
    auto loaded = load_asset_registry(path, two_subsectors());
    CHECK(loaded.ok());
    CHECK(loaded.value.assets().empty());
    REQUIRE(loaded.warnings.size() == 1);
    CHECK(loaded.warnings[0].find("no asset rows") != std::string::npos);
}

TEST_CASE("asset validation catches bad rows")
{
    TempDir dir("assets_bad");
    SUBCASE("unknown subsector")
    {
        auto loaded = load_asset_registry(
            dir.write("a.csv", std::string(kAssetHeader) + "x,mining,ALB,,,1,0.5,,false,true,1,,,,\n"),
            two_subsectors());
        REQUIRE(!loaded.ok());
        CHECK(loaded.errors[0].find("unknown subsector") != std::string::npos);
    }
    SUBCASE("out-of-range coordinates")
    {
        auto loaded = load_asset_registry(
            dir.write("b.csv", std::string(kAssetHeader) + "x,power,ALB,95,19,1,0.5,,false,true,1,,,,\n"),
            two_subsectors());
        REQUIRE(!loaded.ok());
        CHECK(loaded.errors[0].find("latitude") != std::string::npos);
    }
    SUBCASE("capacity factor bound is mode dependent")
    {
        const std::string path = dir.write(
            "c.csv", std::string(kAssetHeader) + "x,power,ALB,,,1,1.2,,false,true,1,,,,\n");
        CHECK(!load_asset_registry(path, two_subsectors(), CfBoundMode::strict).ok());
        CHECK(load_asset_registry(path, two_subsectors(), CfBoundMode::extended).ok());
    }
    SUBCASE("negative emission factor")
    {
        auto loaded = load_asset_registry(
            dir.write("d.csv", std::string(kAssetHeader) + "x,power,ALB,,,1,0.5,,false,true,-2,,,,\n"),
            two_subsectors());
        REQUIRE(!loaded.ok());
        CHECK(loaded.errors[0].find("negative emission factor") != std::string::npos);
    }
    SUBCASE("reported values need a period")
    {
        auto loaded = load_asset_registry(
            dir.write("e.csv", std::string(kAssetHeader) + "x,power,ALB,,,1,0.5,,false,true,1,10,,,\n"),
            two_subsectors());
        REQUIRE(!loaded.ok());
        CHECK(loaded.errors[0].find("reported_start") != std::string::npos);
    }
    SUBCASE("reported periods must align with their granularity")
    {
        auto annual = load_asset_registry(
            dir.write("f.csv", std::string(kAssetHeader) +
                                   "x,power,ALB,,,,,,false,true,,10,2022-03-01,2023-03-01,annual\n"),
            two_subsectors());
        REQUIRE(!annual.ok());
        CHECK(annual.errors[0].find("calendar year") != std::string::npos);

        auto quarterly = load_asset_registry(
            dir.write("g.csv", std::string(kAssetHeader) +
                                   "x,power,ALB,,,,,,false,true,,10,2022-02-01,2022-05-01,quarterly\n"),
            two_subsectors());
        REQUIRE(!quarterly.ok());
        CHECK(quarterly.errors[0].find("calendar quarter") != std::string::npos);

        auto monthly = load_asset_registry(
            dir.write("h.csv", std::string(kAssetHeader) +
                                   "x,power,ALB,,,,,,false,true,,10,2022-02-15,2022-03-15,monthly\n"),
            two_subsectors());
        REQUIRE(!monthly.ok());
        CHECK(monthly.errors[0].find("calendar month") != std::string::npos);

        auto span = load_asset_registry(
            dir.write("i.csv", std::string(kAssetHeader) +
                                   "x,power,ALB,,,,,,false,true,,10,2022-02-15,2022-03-15,span\n"),
            two_subsectors());
        CHECK(span.ok());  // spans may use any day bounds
    }
}

TEST_CASE("unknown columns are ignored with a warning")
{
    TempDir dir("assets_unknown");
    const std::string path =
        dir.write("assets.csv", "id,subsector,country,operator_name\np1,power,ALB,Acme\n");
    auto loaded = load_asset_registry(path, two_subsectors());
    CHECK(loaded.ok());
    REQUIRE(loaded.warnings.size() == 1);
    CHECK(loaded.warnings[0].find("operator_name") != std::string::npos);
}

TEST_CASE("registry export round trips and loading is order insensitive")
{
    TempDir dir("assets_rt");
    const std::string rows1 =
        "p1,power,ALB,41.3,19.8,100,0.5,,false,true,2.0,,,,\n"
        "t2,textiles,BTN,,,,,3,true,true,,1000,2022-01-01,2023-01-01,annual\n"
        "t1,textiles,ALB,,,,,5,true,false,,,,,\n";
    const std::string rows2 =
        "t1,textiles,ALB,,,,,5,true,false,,,,,\n"
        "p1,power,ALB,41.3,19.8,100,0.5,,false,true,2.0,,,,\n"
        "t2,textiles,BTN,,,,,3,true,true,,1000,2022-01-01,2023-01-01,annual\n";
    auto a = load_asset_registry(dir.write("a.csv", kAssetHeader + rows1), two_subsectors());
    auto b = load_asset_registry(dir.write("b.csv", kAssetHeader + rows2), two_subsectors());
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(a.value == b.value);

    const std::string exported = (dir.path() / "exported.csv").string();
    export_asset_registry(a.value, exported);
    auto reloaded = load_asset_registry(exported, two_subsectors());
    REQUIRE(reloaded.ok());
    CHECK(reloaded.value == a.value);
}

TEST_CASE("country totals table")
{
    TempDir dir("totals");
    const std::string header = "country,subsector,gas,year,tonnes,source\n";
    SUBCASE("single valid row")
    {
        auto loaded = load_country_totals(
            dir.write("t.csv", header + "USA,power,CO2,2023,1e9,edgar\n"), two_subsectors());
        REQUIRE(loaded.ok());
        const CountryTotal* total = loaded.value.find({"USA", "power", Gas::CO2, 2023});
        REQUIRE(total != nullptr);
        CHECK(total->tonnes == doctest::Approx(1e9));
        CHECK(total->source == "edgar");
    }
    SUBCASE("duplicate keys rejected")
    {
        auto loaded = load_country_totals(dir.write("t.csv", header +
                                                                 "USA,power,CO2,2023,1,a\n"
                                                                 "USA,power,CO2,2023,2,b\n"),
                                          two_subsectors());
        REQUIRE(!loaded.ok());
        CHECK(loaded.errors[0].find("duplicate") != std::string::npos);
    }
    SUBCASE("negative amounts rejected")
    {
        auto loaded = load_country_totals(dir.write("t.csv", header + "USA,power,CO2,2023,-5,a\n"),
                                          two_subsectors());
        REQUIRE(!loaded.ok());
        CHECK(loaded.errors[0].find("negative") != std::string::npos);
    }
    SUBCASE("derived and non-GHG gases rejected")
    {
        CHECK(!load_country_totals(dir.write("t.csv", header + "USA,power,CO2e100,2023,5,a\n"),
                                   two_subsectors())
                   .ok());
        CHECK(!load_country_totals(dir.write("u.csv", header + "USA,power,SO2,2023,5,a\n"),
                                   two_subsectors())
                   .ok());
    }
}

TEST_CASE("proxy surfaces")
{
    TempDir dir("proxy");
    const std::string header = "subsector,country,cell,weight\n";
    SUBCASE("weights load sorted by cell id")
    {
        auto loaded = load_proxy_surface(dir.write("p.csv", header +
                                                               "power,ALB,c2,3\n"
                                                               "power,ALB,c1,2\n"));
        REQUIRE(loaded.ok());
        const auto* cells = loaded.value.find("power", "ALB");
        REQUIRE(cells != nullptr);
        REQUIRE(cells->size() == 2);
        CHECK((*cells)[0].cell == "c1");
        CHECK(!loaded.value.proxy_empty("power", "ALB"));
    }
    SUBCASE("zero-weight surface is flagged proxy-empty")
    {
        auto loaded = load_proxy_surface(dir.write("p.csv", header +
                                                               "power,ALB,c1,0\n"
                                                               "power,ALB,c2,0\n"));
        REQUIRE(loaded.ok());
        CHECK(loaded.value.proxy_empty("power", "ALB"));
        REQUIRE(!loaded.warnings.empty());
        CHECK(loaded.warnings[0].find("proxy-empty") != std::string::npos);
    }
    SUBCASE("negative weights and duplicates rejected")
    {
        CHECK(!load_proxy_surface(dir.write("a.csv", header + "power,ALB,c1,-1\n")).ok());
        CHECK(!load_proxy_surface(dir.write("b.csv", header +
                                                         "power,ALB,c1,1\n"
                                                         "power,ALB,c1,2\n"))
                   .ok());
    }
}

TEST_CASE("temporal profiles")
{
    TempDir dir("profiles");
    const std::string header = "profile,m1,m2,m3,m4,m5,m6,m7,m8,m9,m10,m11,m12\n";
    SUBCASE("uniform profile accepted")
    {
        std::string row = "flat";
        for (int i = 0; i < 12; ++i) {
            row += ",0.0833333333333333";
        }
        auto loaded = load_profiles(dir.write("p.csv", header + row + "\n"));
        REQUIRE(loaded.ok());
        const TemporalProfile* p = loaded.value.find("flat");
        REQUIRE(p != nullptr);
        double sum = 0.0;
        for (double w : p->weights) {
            sum += w;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("slightly off sums are renormalized")
    {
        std::string row = "near";
        for (int i = 0; i < 11; ++i) {
            row += ",0.08333333";
        }
        row += ",0.08333374";  // sum 1.0000000 + 4e-7, inside tolerance
        auto loaded = load_profiles(dir.write("p.csv", header + row + "\n"));
        REQUIRE(loaded.ok());
        double sum = 0.0;
        for (double w : loaded.value.find("near")->weights) {
            sum += w;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("profiles summing far from one are rejected")
    {
        std::string row = "bad";
        for (int i = 0; i < 12; ++i) {
            row += ",0.0666";
        }
        auto loaded = load_profiles(dir.write("p.csv", header + row + "\n"));
        REQUIRE(!loaded.ok());
        CHECK(loaded.errors[0].find("outside 1 +/- 1e-6") != std::string::npos);
    }
    SUBCASE("all-zero profiles are rejected")
    {
        std::string row = "zero";
        for (int i = 0; i < 12; ++i) {
            row += ",0";
        }
        auto loaded = load_profiles(dir.write("p.csv", header + row + "\n"));
        REQUIRE(!loaded.ok());
        CHECK(loaded.errors[0].find("all zero") != std::string::npos);
    }
}

TEST_CASE("gwp table loader")
{
    TempDir dir("gwp");
    const std::string header = "gas,horizon_years,factor\n";
    auto loaded = load_gwp_table(dir.write("g.csv", header +
                                                        "CH4,100,28\n"
                                                        "N2O,100,265\n"));
    REQUIRE(loaded.ok());
    CHECK(loaded.value.factor(Gas::CH4, 100) == 28.0);
    CHECK(loaded.value.factor(Gas::CO2, 100) == 1.0);

    CHECK(!load_gwp_table(dir.write("bad.csv", header + "CO2,100,2\n")).ok());
    CHECK(!load_gwp_table(dir.write("bad2.csv", header + "SO2,100,1\n")).ok());
}

TEST_CASE("input cross-validation")
{
    const SubsectorRegistry subsectors = two_subsectors();

    AssetRegistry registry;
    Asset asset;
    asset.id = "p1";
    asset.subsector = "power";
    asset.country = "ALB";
    registry.add(asset);

    TemporalProfileSet profiles;
    profiles.add(TemporalProfile::uniform("power-profile"));
    profiles.add(TemporalProfile::uniform("industry"));

    ProxySurfaceTable proxies;
    proxies.add("power", "ALB", {"c1", 1.0});

    CountryTotalTable totals;
    totals.add({"ALB", "power", Gas::CO2, 2022}, {100.0, "ref"});

    SUBCASE("consistent fixture yields an empty report")
    {
        const ValidationReport report =
            validate_inputs(registry, totals, proxies, profiles, subsectors);
        CHECK(report.empty());
    }
    SUBCASE("total with no assets and no proxy is unallocatable")
    {
        totals.add({"BTN", "textiles", Gas::CO2, 2022}, {50.0, "ref"});
        const ValidationReport report =
            validate_inputs(registry, totals, proxies, profiles, subsectors);
        REQUIRE(report.findings.size() == 1);
        CHECK(report.findings[0].code == "unallocatable");
    }
    SUBCASE("subsector without a profile warns about the uniform fallback")
    {
        TemporalProfileSet only_power;
        only_power.add(TemporalProfile::uniform("power-profile"));
        const ValidationReport report =
            validate_inputs(registry, totals, proxies, only_power, subsectors);
        REQUIRE(report.findings.size() == 1);
        CHECK(report.findings[0].code == "uniform_fallback");
        CHECK(report.findings[0].message.find("textiles") != std::string::npos);
    }
}
