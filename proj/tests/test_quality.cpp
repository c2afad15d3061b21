#include "emsynth/quality.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace emsynth;
using emsynth::testing::TempDir;

TEST_CASE("default rubric placement")
{
    const ConfidenceRubric rubric = ConfidenceRubric::defaults();
    CHECK(assign_confidence({EfGranularity::asset, ActivitySource::reported}, rubric) ==
          ConfidenceLevel::high);
    CHECK(assign_confidence({EfGranularity::country, ActivitySource::proxy}, rubric) ==
          ConfidenceLevel::low);
    // country-level factors never rank above medium
    for (ActivitySource activity :
         {ActivitySource::reported, ActivitySource::satellite_modeled, ActivitySource::proxy,
          ActivitySource::imputed}) {
        CHECK(assign_confidence({EfGranularity::country, activity}, rubric) <=
              ConfidenceLevel::medium);
    }
    // determinism
    CHECK(assign_confidence({EfGranularity::asset, ActivitySource::reported}, rubric) ==
          assign_confidence({EfGranularity::asset, ActivitySource::reported}, rubric));
}

TEST_CASE("rubric must be total and monotone in EF granularity")
{
    ConfidenceRubric partial;
    partial.set({EfGranularity::asset, ActivitySource::reported}, ConfidenceLevel::high);
    CHECK_THROWS_AS(partial.validate(), ConfigError);
    CHECK_THROWS_AS(partial.level({EfGranularity::global, ActivitySource::proxy}), ConfigError);

    ConfidenceRubric inverted = ConfidenceRubric::defaults();
    inverted.set({EfGranularity::global, ActivitySource::reported}, ConfidenceLevel::very_high);
    CHECK_THROWS_AS(inverted.validate(), ConfigError);
}

TEST_CASE("rubric loads from csv")
{
    TempDir dir("rubric");
    std::string content = "ef_granularity,activity_source,level\n";
    const ConfidenceRubric defaults = ConfidenceRubric::defaults();
    for (const auto& [evidence, level] : defaults.rules()) {
        content += to_string(evidence.ef) + "," + to_string(evidence.activity) + "," +
                   to_string(level) + "\n";
    }
    auto loaded = load_rubric(dir.write("rubric.csv", content));
    REQUIRE(loaded.ok());
    CHECK(loaded.value.rules() == defaults.rules());

    auto incomplete = load_rubric(
        dir.write("partial.csv", "ef_granularity,activity_source,level\nasset,reported,high\n"));
    CHECK(!incomplete.ok());
}

TEST_CASE("uncertainty quadrature")
{
    CHECK(propagate_uncertainty({3.0, 4.0}) == 5.0);
    CHECK(propagate_uncertainty({7.5}) == 7.5);
    CHECK(propagate_uncertainty({}) == 0.0);
    CHECK_THROWS_AS(propagate_uncertainty({-1.0}), DomainError);

    SUBCASE("permutation invariant and at least the largest component")
    {
        std::mt19937 rng(19);
        std::uniform_real_distribution<double> dist(0.0, 50.0);
        for (int run = 0; run < 50; ++run) {
            std::vector<double> components;
            const int n = 2 + static_cast<int>(dist(rng)) % 5;
            for (int i = 0; i < n; ++i) {
                components.push_back(dist(rng));
            }
            std::vector<double> shuffled = components;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            CHECK(propagate_uncertainty(components) ==
                  doctest::Approx(propagate_uncertainty(shuffled)).epsilon(1e-12));
            for (double u : components) {
                CHECK(propagate_uncertainty(components) >= u);
            }
        }
    }
}

TEST_CASE("additive combination weights by quantity")
{
    // 100 t at 10% plus 300 t at 10%: sqrt(10^2 + 30^2)/400 of a percent base
    const double combined = combine_additive_uncertainty({{100.0, 10.0}, {300.0, 10.0}});
    CHECK(combined == doctest::Approx(std::sqrt(1000.0 * 1000.0 + 3000.0 * 3000.0) / 400.0));
    CHECK(combined == doctest::Approx(7.9056941504).epsilon(1e-9));
    CHECK(combine_additive_uncertainty({}) == 0.0);
    CHECK_THROWS_AS(combine_additive_uncertainty({{100.0, -1.0}}), DomainError);
}

TEST_CASE("comparison metrics")
{
    SUBCASE("identical series")
    {
        const std::vector<double> series{1.0, 2.0, 3.0, 4.0};
        const Metrics m = compare_metrics(series, series);
        CHECK(m.rmse == 0.0);
        CHECK(m.mae == 0.0);
        CHECK(m.r2 == doctest::Approx(1.0));
        CHECK(m.spearman == doctest::Approx(1.0));
    }
    SUBCASE("constant offset")
    {
        const std::vector<double> reference{1.0, 2.0, 3.0, 4.0};
        std::vector<double> estimates;
        for (double r : reference) {
            estimates.push_back(r + 1.0);
        }
        const Metrics m = compare_metrics(estimates, reference);
        CHECK(m.mae == doctest::Approx(1.0));
        CHECK(m.rmse == doctest::Approx(1.0));
        CHECK(m.spearman == doctest::Approx(1.0));
    }
    SUBCASE("reversed order has rank correlation -1")
    {
        const std::vector<double> reference{1.0, 2.0, 3.0, 4.0, 5.0};
        const std::vector<double> estimates{5.0, 4.0, 3.0, 2.0, 1.0};
        const Metrics m = compare_metrics(estimates, reference);
        CHECK(m.spearman == doctest::Approx(-1.0));
    }
    SUBCASE("rmse dominates mae and mse is its square")
    {
        std::mt19937 rng(29);
        std::uniform_real_distribution<double> dist(-10.0, 10.0);
        for (int run = 0; run < 100; ++run) {
            std::vector<double> est, ref;
            const int n = 2 + static_cast<int>(std::abs(dist(rng))) % 10;
            for (int i = 0; i < n; ++i) {
                est.push_back(dist(rng));
                ref.push_back(dist(rng));
            }
            const Metrics m = compare_metrics(est, ref);
            CHECK(m.rmse >= m.mae - 1e-12);
            CHECK(m.mse == doctest::Approx(m.rmse * m.rmse).epsilon(1e-12));
            CHECK(m.spearman >= -1.0 - 1e-12);
            CHECK(m.spearman <= 1.0 + 1e-12);
        }
    }
    SUBCASE("spearman is invariant under monotone transforms")
    {
        const std::vector<double> est{3.0, 1.0, 4.0, 1.5, 9.0};
        const std::vector<double> ref{2.0, 0.5, 7.0, 1.0, 8.0};
        const double base = compare_metrics(est, ref).spearman;
        std::vector<double> est_cubed;
        for (double v : est) {
            est_cubed.push_back(v * v * v);
        }
        std::vector<double> ref_exp;
        for (double v : ref) {
            ref_exp.push_back(std::exp(v / 4.0));
        }
        CHECK(compare_metrics(est_cubed, ref).spearman == doctest::Approx(base));
        CHECK(compare_metrics(est, ref_exp).spearman == doctest::Approx(base));
    }
    SUBCASE("length and pairing requirements")
    {
        CHECK_THROWS_AS(compare_metrics({1.0}, {1.0}), UsageError);
        CHECK_THROWS_AS(compare_metrics({1.0, 2.0}, {1.0}), UsageError);
    }
}

TEST_CASE("average ranks share tie ranks")
{
    const auto ranks = average_ranks({10.0, 20.0, 20.0, 30.0});
    CHECK(ranks == std::vector<double>{1.0, 2.5, 2.5, 4.0});
    const auto all_equal = average_ranks({5.0, 5.0, 5.0});
    CHECK(all_equal == std::vector<double>{2.0, 2.0, 2.0});
}
