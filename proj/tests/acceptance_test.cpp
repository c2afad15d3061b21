// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Tolerances are pinned in the assertions, not configurable.

#include "emsynth/analysis.hpp"
#include "emsynth/copollutants.hpp"
#include "emsynth/core.hpp"
#include "emsynth/csv.hpp"
#include "emsynth/disaggregation.hpp"
#include "emsynth/pipeline.hpp"
#include "emsynth/quality.hpp"
#include "emsynth/temporal.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>

using namespace emsynth;
using emsynth::testing::TempDir;
using emsynth::testing::read_file;

namespace {

struct Criterion {
    int id;
    std::string name;
    std::vector<std::string> failures;

    Criterion(int id_, std::string name_) : id(id_), name(std::move(name_)) {}

    void expect(bool condition, const std::string& what)
    {
        if (!condition && failures.size() < 10) {
            failures.push_back(what);
        }
    }

    ~Criterion()
    {
        const bool pass = failures.empty();
        std::printf("[criterion %2d] %-24s %s\n", id, name.c_str(), pass ? "PASS" : "FAIL");
        for (const auto& failure : failures) {
            std::printf("               %s\n", failure.c_str());
        }
        std::fflush(stdout);
        CHECK_MESSAGE(pass, "criterion ", id, " (", name, ") failed: ",
                      failures.empty() ? "" : failures.front());
    }
};

std::string toy_config_path()
{
    return std::string(EMSYNTH_FIXTURE_DIR) + "/toy/config.json";
}

std::string golden_path(const std::string& name)
{
    return std::string(EMSYNTH_FIXTURE_DIR) + "/golden/" + name;
}

double now_seconds()
{
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// 1. Conservation over randomized fixtures, at every hierarchy level
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: conservation suite")
{
    Criterion criterion(1, "conservation_suite");
    const double start = now_seconds();

    std::mt19937 rng(20240501);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> asset_count_dist(0, 50);

    TempDir dir("accept_conservation");
    const std::string uniform_profile_row = [] {
        std::string row = "flat";
        for (int i = 0; i < 12; ++i) {
            row += ",0.0833333333333333";
        }
        return row + "\n";
    }();

    for (int fixture = 0; fixture < 200; ++fixture) {
        const std::vector<std::string> countries{"AAA", "BBB"};
        const int asset_count = asset_count_dist(rng);

        std::string assets = "id,subsector,country,capacity,capacity_factor,economic_output,"
                             "ef_co2,reported_co2_t,reported_start,reported_end,"
                             "reported_granularity\n";
        std::string gadm = "id,gadm0,gadm1,gadm2,fua\n";
        for (int i = 0; i < asset_count; ++i) {
            const std::string id = "a" + std::to_string(i);
            const std::string country = countries[static_cast<size_t>(i) % 2];
            const double mode = unit(rng);
            assets += id + ",sec," + country + ",";
            if (mode < 0.4) {  // equation asset
                assets += format_double(1.0 + 100.0 * unit(rng)) + "," +
                          format_double(unit(rng)) + ",," + format_double(2.0 * unit(rng)) +
                          ",,,,\n";
            } else if (mode < 0.6) {  // reported asset
                assets += ",,," + std::string(",") + format_double(1000.0 * unit(rng)) +
                          ",2022-01-01,2023-01-01,annual\n";
            } else {  // pool asset, sometimes with an output proxy
                const std::string output =
                    unit(rng) < 0.5 ? format_double(1.0 + 10.0 * unit(rng)) : "";
                assets += ",," + output + ",,,,,\n";
            }
            if (unit(rng) < 0.7) {
                const int state = 1 + (i % 3);
                gadm += id + "," + country + "," + country + "." + std::to_string(state) + "," +
                        country + "." + std::to_string(state) + "." + std::to_string(1 + i % 2) +
                        ",\n";
            }
        }

        std::string totals = "country,subsector,gas,year,tonnes,source\n";
        std::vector<std::pair<std::string, double>> expected_totals;
        for (const auto& country : countries) {
            if (unit(rng) < 0.85) {
                const double total = unit(rng) < 0.1 ? 0.0 : 1e6 * unit(rng);
                totals += country + ",sec,CO2,2022," + format_double(total) + ",ref\n";
                expected_totals.emplace_back(country, total);
            }
        }

        std::string proxy = "subsector,country,cell,weight\n";
        for (const auto& country : countries) {
            const double mode = unit(rng);
            if (mode < 0.33) {
                continue;  // no proxy surface at all
            }
            const int cells = 1 + static_cast<int>(3.0 * unit(rng));
            for (int cell = 0; cell < cells; ++cell) {
                const double weight = mode < 0.66 ? 0.0 : 10.0 * unit(rng);
                const std::string cell_id = "c-" + country + "-" + std::to_string(cell);
                proxy += "sec," + country + "," + cell_id + "," + format_double(weight) + "\n";
                if (unit(rng) < 0.5) {
                    gadm += cell_id + "," + country + "," + country + ".9," + country + ".9.9,\n";
                }
            }
        }

        dir.write("assets.csv", assets);
        dir.write("country_totals.csv", totals);
        dir.write("proxy.csv", proxy);
        dir.write("profiles.csv",
                  "profile,m1,m2,m3,m4,m5,m6,m7,m8,m9,m10,m11,m12\n" + uniform_profile_row);
        dir.write("boundaries.csv", gadm);
        dir.write("config.json", R"({
          "inputs": {"assets": "assets.csv", "country_totals": "country_totals.csv",
                     "proxy": "proxy.csv", "profiles": "profiles.csv",
                     "boundaries": "boundaries.csv"},
          "window": {"start": "2022-01", "end": "2022-12"},
          "subsectors": [{"id": "sec", "profile": "flat"}]
        })");

        const RunConfig config = RunConfig::from_file((dir.path() / "config.json").string());
        const SynthesisResult result = synthesize(config);
        criterion.expect(result.status == RunStatus::ok,
                         "fixture " + std::to_string(fixture) + " did not finish clean");
        if (result.status != RunStatus::ok) {
            continue;
        }

        std::vector<EmissionRecord> all = result.asset_records;
        all.insert(all.end(), result.remainder_records.begin(), result.remainder_records.end());
        auto boundaries = load_boundaries((dir.path() / "boundaries.csv").string());

        for (const auto& entry : result.report.audit) {
            criterion.expect(entry.pass, "fixture " + std::to_string(fixture) +
                                             " audit failed for " + entry.country);
            // at every hierarchy level the country's units absorb the mass
            for (AdminLevel level : {AdminLevel::gadm0, AdminLevel::gadm1, AdminLevel::gadm2}) {
                const RollupResult rolled =
                    rollup(all, level, boundaries.value, PeriodGranularity::annual);
                double level_sum = 0.0;
                for (const auto& [key, value] : rolled.rows) {
                    const bool in_country = key.unit == entry.country ||
                                            key.unit.rfind(entry.country + ".", 0) == 0;
                    if (in_country && key.subsector == entry.subsector && key.gas == entry.gas &&
                        key.period.start.year == entry.year) {
                        level_sum += value.tonnes;
                    }
                }
                const double scale = std::max(1.0, entry.effective_total);
                criterion.expect(std::abs(level_sum - entry.effective_total) / scale <= 1e-6,
                                 "fixture " + std::to_string(fixture) + " level " +
                                     to_string(level) + " sum " + format_double(level_sum) +
                                     " != effective " + format_double(entry.effective_total));
            }
        }
    }
    const double elapsed = now_seconds() - start;
    criterion.expect(elapsed < 10.0,
                     "runtime " + format_double(elapsed) + "s exceeds the 10s budget");
}

// ---------------------------------------------------------------------------
// 2. Remainder rule, exact
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: remainder rule")
{
    Criterion criterion(2, "remainder_rule");
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 1e9);
    for (int i = 0; i < 5000; ++i) {
        const double total = dist(rng);
        const double asset_sum = dist(rng);
        const RemainderSplit split = compute_remainder(total, asset_sum);
        if (asset_sum > total) {
            criterion.expect(split.remainder == 0.0, "remainder not zero when assets exceed");
            criterion.expect(split.effective_total == asset_sum, "effective != asset_sum");
            criterion.expect(split.rule == RemainderRule::assets_exceed_total, "wrong rule");
        } else {
            criterion.expect(split.remainder == total - asset_sum, "remainder not exact");
            criterion.expect(split.effective_total == total, "effective != total");
        }
    }
}

// ---------------------------------------------------------------------------
// 3. Temporal conservation with a brute-force span oracle
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: temporal conservation")
{
    Criterion criterion(3, "temporal_conservation");
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int run = 0; run < 1000; ++run) {
        TemporalProfile profile;
        double sum = 0.0;
        for (auto& w : profile.weights) {
            w = unit(rng) + 1e-9;
            sum += w;
        }
        for (auto& w : profile.weights) {
            w /= sum;
        }
        const double annual = 1e9 * unit(rng);
        const auto months = annual_to_monthly(annual, profile);
        const double total = std::accumulate(months.begin(), months.end(), 0.0);
        criterion.expect(std::abs(total - annual) <= 1e-9 * std::max(1.0, annual),
                         "annual split drifted: " + format_double(total - annual));

        const double quarter = 1e9 * unit(rng);
        const auto thirds = quarterly_to_monthly(quarter);
        criterion.expect(std::abs(thirds[0] + thirds[1] + thirds[2] - quarter) <=
                             1e-9 * std::max(1.0, quarter),
                         "quarterly split drifted");
    }

    // 50 random spans, at least one forced across leap February
    auto advance = [](Date d, long days) {
        while (days-- > 0) {
            if (d.day < days_in_month(d.year, d.month)) {
                ++d.day;
            } else if (d.month < 12) {
                ++d.month;
                d.day = 1;
            } else {
                ++d.year;
                d.month = 1;
                d.day = 1;
            }
        }
        return d;
    };
    for (int run = 0; run < 50; ++run) {
        Date start = run == 0 ? Date{2024, 1, 20}
                              : advance(Date{2023, 1, 1}, static_cast<long>(700 * unit(rng)));
        Date end = advance(start, 1 + static_cast<long>(400 * unit(rng)));
        const double amount = 1e6 * unit(rng);
        const auto months = span_to_monthly(start, end, amount);

        std::map<std::pair<int, int>, long> day_count;
        for (Date cursor = start; cursor < end; cursor = advance(cursor, 1)) {
            day_count[{cursor.year, cursor.month}] += 1;
        }
        const double total_days = static_cast<double>(day_difference(start, end));
        double total = 0.0;
        criterion.expect(months.size() == day_count.size(), "month coverage mismatch");
        for (const auto& [ym, share] : months) {
            const auto it = day_count.find({ym.year, ym.month});
            if (it == day_count.end()) {
                criterion.expect(false, "unexpected month " + ym.to_string());
                continue;
            }
            const double expected = amount * static_cast<double>(it->second) / total_days;
            criterion.expect(std::abs(share - expected) <= 1e-9 * std::max(1.0, expected),
                             "span share off for " + ym.to_string());
            total += share;
        }
        criterion.expect(std::abs(total - amount) <= 1e-9 * std::max(1.0, amount),
                         "span total drifted");
    }
}

// ---------------------------------------------------------------------------
// 4. Imputation rule order and idempotence
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: imputation order")
{
    Criterion criterion(4, "imputation_order");
    const MonthWindow window{{2022, 1}, {2022, 4}};

    auto build = [&](const std::vector<std::optional<double>>& values) {
        MonthlySeries series("s", Gas::CO2, window);
        for (size_t i = 0; i < values.size(); ++i) {
            if (values[i]) {
                series.set(window.at(static_cast<int>(i)), *values[i], FillFlag::observed);
            }
        }
        return series;
    };
    auto values_of = [&](const MonthlySeries& series) {
        std::vector<double> out;
        for (int i = 0; i < window.size(); ++i) {
            out.push_back(series.value(window.at(i)));
        }
        return out;
    };

    const auto case1 = impute_series(build({std::nullopt, 5.0, std::nullopt, std::nullopt}));
    criterion.expect(values_of(case1.series) == std::vector<double>{5.0, 5.0, 5.0, 5.0},
                     "[_,5,_,_] did not become [5,5,5,5]");
    const auto case2 = impute_series(build({std::nullopt, 5.0, std::nullopt, 7.0}));
    criterion.expect(values_of(case2.series) == std::vector<double>{5.0, 5.0, 7.0, 7.0},
                     "[_,5,_,7] did not become [5,5,7,7]");

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(0.0, 1e6);
    for (int run = 0; run < 100; ++run) {
        std::vector<std::optional<double>> values;
        for (int i = 0; i < 4; ++i) {
            values.emplace_back(dist(rng));
        }
        const MonthlySeries complete = build(values);
        const auto once = impute_series(complete);
        const auto twice = impute_series(once.series);
        criterion.expect(values_of(once.series) == values_of(twice.series),
                         "imputation not idempotent on a complete series");
    }
}

// ---------------------------------------------------------------------------
// 5. Co-pollutant round trip and linearity
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: copollutant round trip")
{
    Criterion criterion(5, "copollutant_roundtrip");
    const GwpTable gwp = GwpTable::defaults();

    ReferenceInventory pollutants, ghg;
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> dist(1.0, 1e5);
    const std::vector<std::string> countries{"AAA", "BBB", "CCC"};
    const std::vector<std::string> fuels{"coal", "gas", ""};
    for (const auto& country : countries) {
        for (const auto& fuel : fuels) {
            ghg.rows.push_back({country, "", "sec", fuel, Gas::CO2, dist(rng)});
            ghg.rows.push_back({country, "", "sec", fuel, Gas::CH4, dist(rng) / 100.0});
            ghg.rows.push_back({country, "", "sec", fuel, Gas::N2O, dist(rng) / 1000.0});
            pollutants.rows.push_back({country, "", "sec", fuel, Gas::NOx, dist(rng)});
            pollutants.rows.push_back({country, "", "sec", fuel, Gas::SO2, dist(rng)});
        }
    }
    const CoPollutantRatioTable table = build_ratio_table(pollutants, ghg, gwp, 100);

    for (const auto& reference : pollutants.rows) {
        std::map<Gas, double> amounts;
        for (const auto& row : ghg.rows) {
            if (row.country == reference.country && row.fuel == reference.fuel) {
                amounts[row.gas] += row.tonnes;
            }
        }
        const double co2e = to_co2e(amounts, gwp, 100);
        Co2ePoint point;
        point.source = reference.country + "/" + reference.fuel;
        point.subsector = reference.subsector;
        point.country = reference.country;
        point.fuel = reference.fuel;
        point.period = Period::year(2022);
        point.co2e = co2e;
        const auto records = scale_pollutants({point}, reference.gas, table);
        criterion.expect(records.size() == 1, "reference key lost");
        if (records.size() == 1) {
            criterion.expect(std::abs(records[0].tonnes - reference.tonnes) <=
                                 1e-9 * std::max(1.0, reference.tonnes),
                             "round trip drifted for " + point.source);
            for (double k : {0.5, 2.0, 10.0}) {
                Co2ePoint scaled = point;
                scaled.co2e = k * point.co2e;
                const auto scaled_records = scale_pollutants({scaled}, reference.gas, table);
                criterion.expect(std::abs(scaled_records[0].tonnes - k * records[0].tonnes) <=
                                     1e-9 * std::max(1.0, k * records[0].tonnes),
                                 "linearity broken at k=" + format_double(k));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 6. Equation algebra round trips
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: equation algebra")
{
    Criterion criterion(6, "equation_algebra");
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(1e-3, 1e6);
    for (int i = 0; i < 10000; ++i) {
        const double c = dist(rng);
        const double cf = dist(rng);
        const double ef = dist(rng);
        const double e = compute_emissions(compute_activity(c, cf), ef);
        const double c2 = infer_capacity(e, cf, ef);
        const double cf2 = infer_capacity_factor(e, c, ef);
        const double ef2 = infer_emission_factor(e, c, cf);
        criterion.expect(
            std::abs(compute_emissions(compute_activity(c2, cf), ef) - e) < 1e-12 * e,
            "capacity inverse drifted");
        criterion.expect(
            std::abs(compute_emissions(compute_activity(c, cf2), ef) - e) < 1e-12 * e,
            "capacity-factor inverse drifted");
        criterion.expect(
            std::abs(compute_emissions(compute_activity(c, cf), ef2) - e) < 1e-12 * e,
            "emission-factor inverse drifted");
    }
}

// ---------------------------------------------------------------------------
// 7. Metrics harness against a brute-force reference
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: metrics harness")
{
    Criterion criterion(7, "metrics_harness");
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> dist(-100.0, 100.0);
    std::uniform_int_distribution<int> len_dist(2, 20);
    std::uniform_int_distribution<int> tie_dist(0, 3);

    // independent O(n^2) rank oracle: 1 + #less + (#equal - 1)/2
    auto brute_ranks = [](const std::vector<double>& values) {
        std::vector<double> ranks(values.size());
        for (size_t i = 0; i < values.size(); ++i) {
            int less = 0, equal = 0;
            for (size_t j = 0; j < values.size(); ++j) {
                less += values[j] < values[i];
                equal += values[j] == values[i];
            }
            ranks[i] = 1.0 + less + (equal - 1) / 2.0;
        }
        return ranks;
    };
    auto pearson = [](const std::vector<double>& a, const std::vector<double>& b) {
        const size_t n = a.size();
        double ma = 0.0, mb = 0.0;
        for (size_t i = 0; i < n; ++i) {
            ma += a[i];
            mb += b[i];
        }
        ma /= n;
        mb /= n;
        double cov = 0.0, va = 0.0, vb = 0.0;
        for (size_t i = 0; i < n; ++i) {
            cov += (a[i] - ma) * (b[i] - mb);
            va += (a[i] - ma) * (a[i] - ma);
            vb += (b[i] - mb) * (b[i] - mb);
        }
        return (va > 0.0 && vb > 0.0) ? cov / std::sqrt(va * vb) : 0.0;
    };

    for (int run = 0; run < 100; ++run) {
        const int n = len_dist(rng);
        std::vector<double> est, ref;
        for (int i = 0; i < n; ++i) {
            est.push_back(dist(rng));
            ref.push_back(dist(rng));
        }
        // inject ties sometimes
        for (int t = tie_dist(rng); t > 0 && n > 2; --t) {
            est[static_cast<size_t>(t) % n] = est[0];
        }

        const Metrics metrics = compare_metrics(est, ref);
        double se = 0.0, ae = 0.0;
        for (int i = 0; i < n; ++i) {
            se += (est[static_cast<size_t>(i)] - ref[static_cast<size_t>(i)]) *
                  (est[static_cast<size_t>(i)] - ref[static_cast<size_t>(i)]);
            ae += std::abs(est[static_cast<size_t>(i)] - ref[static_cast<size_t>(i)]);
        }
        const double mse = se / n;
        double ref_mean = std::accumulate(ref.begin(), ref.end(), 0.0) / n;
        double ss_tot = 0.0;
        for (double r : ref) {
            ss_tot += (r - ref_mean) * (r - ref_mean);
        }
        criterion.expect(std::abs(metrics.mse - mse) < 1e-12 * std::max(1.0, mse), "mse drifted");
        criterion.expect(std::abs(metrics.rmse - std::sqrt(mse)) < 1e-12 * std::max(1.0, mse),
                         "rmse drifted");
        criterion.expect(std::abs(metrics.mae - ae / n) < 1e-12 * std::max(1.0, ae / n),
                         "mae drifted");
        criterion.expect(std::abs(metrics.r2 - (1.0 - se / ss_tot)) < 1e-12, "r2 drifted");

        const auto expected_est_ranks = brute_ranks(est);
        const auto expected_ref_ranks = brute_ranks(ref);
        criterion.expect(average_ranks(est) == expected_est_ranks, "estimate ranks differ");
        criterion.expect(average_ranks(ref) == expected_ref_ranks, "reference ranks differ");
        criterion.expect(std::abs(metrics.spearman -
                                  pearson(expected_est_ranks, expected_ref_ranks)) < 1e-12,
                         "spearman drifted");
    }

    const std::vector<double> forward{1.0, 2.0, 3.0, 4.0, 5.0};
    const std::vector<double> reversed{5.0, 4.0, 3.0, 2.0, 1.0};
    criterion.expect(std::abs(compare_metrics(reversed, forward).spearman + 1.0) < 1e-12,
                     "reversed series is not -1");
}

// ---------------------------------------------------------------------------
// 8. Natural breaks equal the exhaustive-partition optimum
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: natural breaks oracle")
{
    Criterion criterion(8, "jenks_oracle");

    auto exhaustive = [](std::vector<double> sorted, int k) {
        std::sort(sorted.begin(), sorted.end());
        const int n = static_cast<int>(sorted.size());
        auto ssd = [&](int i, int j) {
            double mean = 0.0;
            for (int t = i; t <= j; ++t) {
                mean += sorted[static_cast<size_t>(t)];
            }
            mean /= (j - i + 1);
            double total = 0.0;
            for (int t = i; t <= j; ++t) {
                total += (sorted[static_cast<size_t>(t)] - mean) *
                         (sorted[static_cast<size_t>(t)] - mean);
            }
            return total;
        };
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> splits(static_cast<size_t>(k - 1));
        std::function<void(int, int)> recurse = [&](int next, int depth) {
            if (depth == k - 1) {
                double total = 0.0;
                int begin = 0;
                for (int s = 0; s < k - 1; ++s) {
                    total += ssd(begin, splits[static_cast<size_t>(s)] - 1);
                    begin = splits[static_cast<size_t>(s)];
                }
                total += ssd(begin, n - 1);
                best = std::min(best, total);
                return;
            }
            for (int s = next; s <= n - (k - 1 - depth); ++s) {
                splits[static_cast<size_t>(depth)] = s;
                recurse(s + 1, depth + 1);
            }
        };
        recurse(1, 0);
        return best;
    };

    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dist(0.0, 1000.0);
    std::uniform_int_distribution<int> n_dist(2, 12);
    for (int run = 0; run < 300; ++run) {
        const int n = n_dist(rng);
        std::vector<double> values;
        for (int i = 0; i < n; ++i) {
            values.push_back(dist(rng));
        }
        for (int k = 2; k <= std::min(4, n); ++k) {
            const double expected = exhaustive(values, k);
            const JenksResult result = jenks_breaks(values, k);
            criterion.expect(std::abs(result.within_class_ssd - expected) <=
                                 1e-9 * std::max(1.0, expected),
                             "ssd mismatch at n=" + std::to_string(n) + " k=" + std::to_string(k));
        }
    }

    const JenksResult canonical = jenks_breaks({1.0, 2.0, 3.0, 10.0, 11.0, 12.0}, 2);
    criterion.expect(canonical.breaks.size() == 1 && canonical.breaks[0] > 3.0 &&
                         canonical.breaks[0] < 10.0,
                     "canonical break does not sit between 3 and 10");
}

// ---------------------------------------------------------------------------
// 9. Threshold classification boundary
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: threshold classification")
{
    Criterion criterion(9, "gdp_threshold");
    const auto labels = classify_by_threshold({57333.0, 57332.99, 60000.0, 0.0}, 57333.0);
    criterion.expect(labels[0] == GdpClass::higher, "boundary value 57,333 must class higher");
    criterion.expect(labels[1] == GdpClass::lower, "57,332.99 must class lower");
    criterion.expect(labels[2] == GdpClass::higher, "60,000 must class higher");
    criterion.expect(labels[3] == GdpClass::lower, "0 must class lower");
}

// ---------------------------------------------------------------------------
// 10. Uncertainty quadrature
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: uncertainty quadrature")
{
    Criterion criterion(10, "uncertainty_quadrature");
    criterion.expect(propagate_uncertainty({3.0, 4.0}) == 5.0, "3-4-5 must be exact");

    std::mt19937 rng(37);
    std::uniform_real_distribution<double> dist(0.0, 50.0);
    std::uniform_int_distribution<int> len_dist(1, 8);
    for (int run = 0; run < 50; ++run) {
        std::vector<double> components;
        const int n = len_dist(rng);
        for (int i = 0; i < n; ++i) {
            components.push_back(dist(rng));
        }
        std::vector<double> shuffled = components;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const double a = propagate_uncertainty(components);
        const double b = propagate_uncertainty(shuffled);
        criterion.expect(std::abs(a - b) <= 1e-12 * std::max(1.0, a),
                         "quadrature is not permutation invariant");
    }
}

// ---------------------------------------------------------------------------
// 11. Byte determinism of the synthesize subcommand
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: determinism")
{
    Criterion criterion(11, "determinism");
    TempDir stage("accept_det");
    namespace fs = std::filesystem;

    // stage the fixture so both runs read identical paths
    for (const auto& entry : fs::directory_iterator(fs::path(EMSYNTH_FIXTURE_DIR) / "toy")) {
        stage.write(entry.path().filename().string(), read_file(entry.path().string()));
    }
    const std::string config = (stage.path() / "config.json").string();
    auto run_cli = [&](const std::string& out_dir) {
        const std::string command = std::string(EMSYNTH_CLI_PATH) + " synthesize --config " +
                                    config + " --out-dir " + out_dir + " > /dev/null 2>&1";
        return std::system(command.c_str());
    };

    TempDir out1("accept_det1");
    TempDir out2("accept_det2");
    criterion.expect(run_cli(out1.path().string()) == 0, "first run failed");
    criterion.expect(run_cli(out2.path().string()) == 0, "second run failed");
    const std::vector<std::string> files{"monthly_assets.csv", "monthly_remainder.csv",
                                         "inventory.csv", "assets.geojson", "run_config.json"};
    for (const auto& name : files) {
        criterion.expect(read_file((out1.path() / name).string()) ==
                             read_file((out2.path() / name).string()),
                         name + " differs between identical runs");
    }

    // permute every csv's rows in place; exports must not move a byte
    std::mt19937 rng(41);
    for (const auto& entry : fs::directory_iterator(stage.path())) {
        if (entry.path().extension() != ".csv") {
            continue;
        }
        std::vector<std::string> lines;
        {
            std::ifstream in(entry.path());
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty()) {
                    lines.push_back(line);
                }
            }
        }
        std::shuffle(lines.begin() + 1, lines.end(), rng);
        std::string content;
        for (const auto& line : lines) {
            content += line + "\n";
        }
        stage.write(entry.path().filename().string(), content);
    }
    TempDir out3("accept_det3");
    criterion.expect(run_cli(out3.path().string()) == 0, "permuted run failed");
    for (const auto& name : files) {
        criterion.expect(read_file((out1.path() / name).string()) ==
                             read_file((out3.path() / name).string()),
                         name + " differs after permuting input rows");
    }
}

// ---------------------------------------------------------------------------
// 12. Golden end-to-end fixture
// ---------------------------------------------------------------------------
namespace {

struct GoldenTable {
    // key -> (numeric columns, string columns)
    std::map<std::string, std::pair<std::vector<double>, std::vector<std::string>>> rows;
};

GoldenTable load_table(const std::string& path, const std::vector<std::string>& key_cols,
                       const std::vector<std::string>& num_cols,
                       const std::vector<std::string>& str_cols)
{
    GoldenTable table;
    CsvReader csv = CsvReader::from_file(path);
    for (size_t row = 0; row < csv.row_count(); ++row) {
        std::string key;
        for (const auto& column : key_cols) {
            key += csv.get(row, column).value_or("") + "|";
        }
        std::vector<double> nums;
        for (const auto& column : num_cols) {
            nums.push_back(std::stod(csv.get(row, column).value_or("0")));
        }
        std::vector<std::string> strs;
        for (const auto& column : str_cols) {
            strs.push_back(csv.get(row, column).value_or(""));
        }
        table.rows[key] = {std::move(nums), std::move(strs)};
    }
    return table;
}

void compare_tables(Criterion& criterion, const std::string& name, const GoldenTable& got,
                    const GoldenTable& want)
{
    criterion.expect(got.rows.size() == want.rows.size(),
                     name + ": row count " + std::to_string(got.rows.size()) + " != golden " +
                         std::to_string(want.rows.size()));
    for (const auto& [key, expected] : want.rows) {
        auto it = got.rows.find(key);
        if (it == got.rows.end()) {
            criterion.expect(false, name + ": missing row " + key);
            continue;
        }
        for (size_t i = 0; i < expected.first.size(); ++i) {
            const double w = expected.first[i];
            const double g = it->second.first[i];
            criterion.expect(std::abs(g - w) <= 1e-6 * std::max(1.0, std::abs(w)),
                             name + ": " + key + " value " + format_double(g) + " != " +
                                 format_double(w));
        }
        criterion.expect(it->second.second == expected.second,
                         name + ": " + key + " labels differ");
    }
}

}  // namespace

TEST_CASE("acceptance: golden fixture")
{
    Criterion criterion(12, "golden_fixture");
    const double start = now_seconds();

    const RunConfig config = RunConfig::from_file(toy_config_path());
    const SynthesisResult result = synthesize(config);
    criterion.expect(result.status == RunStatus::ok, "toy fixture run not clean");
    TempDir out("accept_golden");
    write_outputs(result, config, out.path().string());

    const std::vector<std::string> monthly_keys{"source_id", "gas", "year", "month"};
    const std::vector<std::string> monthly_nums{"tonnes", "uncertainty_pct"};
    const std::vector<std::string> monthly_strs{"source_type", "subsector", "country",
                                                "fill_flag", "provenance", "confidence"};
    compare_tables(criterion, "monthly_assets",
                   load_table((out.path() / "monthly_assets.csv").string(), monthly_keys,
                              monthly_nums, monthly_strs),
                   load_table(golden_path("monthly_assets.csv"), monthly_keys, monthly_nums,
                              monthly_strs));
    compare_tables(criterion, "monthly_remainder",
                   load_table((out.path() / "monthly_remainder.csv").string(), monthly_keys,
                              monthly_nums, monthly_strs),
                   load_table(golden_path("monthly_remainder.csv"), monthly_keys, monthly_nums,
                              monthly_strs));

    const std::vector<std::string> inv_keys{"unit_id", "level", "subsector", "gas", "provenance"};
    const std::vector<std::string> inv_nums{"tonnes"};
    const std::vector<std::string> inv_strs{"period_start", "period_end", "confidence"};
    compare_tables(criterion, "inventory",
                   load_table((out.path() / "inventory.csv").string(), inv_keys, inv_nums,
                              inv_strs),
                   load_table(golden_path("inventory.csv"), inv_keys, inv_nums, inv_strs));

    const double elapsed = now_seconds() - start;
    criterion.expect(elapsed < 5.0,
                     "runtime " + format_double(elapsed) + "s exceeds the 5s budget");
}
