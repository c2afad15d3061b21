#include "emsynth/analysis.hpp"
#include "emsynth/csv.hpp"
#include "emsynth/log.hpp"
#include "emsynth/pipeline.hpp"
#include "emsynth/quality.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace emsynth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConservation = 2;

struct CommonOptions {
    std::string config_path;
    std::string window;
    int horizon = 0;
    std::string out_dir = "out";
    std::vector<std::string> formats;
    int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOptions& options, bool with_outputs)
{
    cmd->add_option("--config", options.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--window", options.window, "month window, e.g. 2021-01:2022-12");
    cmd->add_option("--horizon", options.horizon, "GWP horizon in years")
        ->check(CLI::IsMember({100, 20}));
    cmd->add_option("--jobs", options.jobs, "parallel worker count");
    if (with_outputs) {
        cmd->add_option("--out-dir", options.out_dir, "output directory");
        cmd->add_option("--format", options.formats, "export format (csv, geojson)")
            ->check(CLI::IsMember({"csv", "geojson"}));
    }
}

RunConfig load_config(const CommonOptions& options)
{
    RunConfig config = RunConfig::from_file(options.config_path);
    if (!options.window.empty()) {
        const auto parts = split(options.window, ':');
        if (parts.size() != 2) {
            throw UsageError("--window expects START:END, e.g. 2021-01:2022-12");
        }
        auto start = YearMonth::parse(parts[0]);
        auto end = YearMonth::parse(parts[1]);
        if (!start || !end || *end < *start) {
            throw UsageError("invalid --window range");
        }
        config.window_start = *start;
        config.window_end = *end;
    }
    if (options.horizon != 0) {
        config.horizon_years = options.horizon;
    }
    if (options.jobs > 0) {
        config.jobs = options.jobs;
    }
    if (!options.formats.empty()) {
        config.export_formats.clear();
        for (const auto& text : options.formats) {
            config.export_formats.push_back(*parse_export_format(text));
        }
    }
    return config;
}

int print_run_outcome(const SynthesisResult& result)
{
    for (const auto& finding : result.report.validation.findings) {
        std::cerr << (finding.severity == ValidationFinding::Severity::error ? "error: "
                                                                             : "warning: ")
                  << finding.message << "\n";
    }
    switch (result.status) {
    case RunStatus::ok:
        return kExitOk;
    case RunStatus::validation_failed:
        for (const auto& error : result.report.load_errors) {
            std::cerr << "error: " << error << "\n";
        }
        std::cerr << "validation failed\n";
        return kExitValidation;
    case RunStatus::conservation_failed:
        for (const auto& entry : result.report.audit) {
            if (!entry.pass) {
                std::cerr << "conservation failure: (" << entry.country << ", " << entry.subsector
                          << ", " << to_string(entry.gas) << ", " << entry.year
                          << ") rel_error=" << entry.rel_error << "\n";
            }
        }
        std::cerr << "conservation audit failed\n";
        return kExitConservation;
    }
    return kExitOk;
}

int run_validate(const CommonOptions& options)
{
    const RunConfig config = load_config(options);
    RunReport report;

    size_t error_count = 0;
    auto show = [&](const auto& loaded) {
        for (const auto& error : loaded.errors) {
            std::cerr << "error: " << error << "\n";
            ++error_count;
        }
        for (const auto& warning : loaded.warnings) {
            std::cerr << "warning: " << warning << "\n";
        }
        return loaded.ok();
    };

    auto assets = load_asset_registry(config.assets_path, config.subsectors, config.cf_mode);
    auto totals = load_country_totals(config.country_totals_path, config.subsectors);
    auto proxies = load_proxy_surface(config.proxy_path);
    auto profiles = load_profiles(config.profiles_path);
    auto boundaries = load_boundaries(config.boundaries_path);
    const bool loaded_ok = show(assets) && show(totals) && show(proxies) && show(profiles) &&
                           show(boundaries);
    if (!config.gwp_path.empty()) {
        show(load_gwp_table(config.gwp_path));
    }
    if (!config.rubric_path.empty()) {
        show(load_rubric(config.rubric_path));
    }
    if (!config.reference_pollutants_path.empty()) {
        show(load_reference_inventory(config.reference_pollutants_path, true));
    }
    if (!config.reference_ghg_path.empty()) {
        show(load_reference_inventory(config.reference_ghg_path, false));
    }
    if (!config.reference_pollutants_secondary_path.empty()) {
        show(load_reference_inventory(config.reference_pollutants_secondary_path, true));
    }
    if (!config.reference_ghg_secondary_path.empty()) {
        show(load_reference_inventory(config.reference_ghg_secondary_path, false));
    }
    if (!loaded_ok || error_count > 0) {
        std::cerr << "validation failed\n";
        return kExitValidation;
    }

    const ValidationReport cross = validate_inputs(assets.value, totals.value, proxies.value,
                                                   profiles.value, config.subsectors);
    for (const auto& finding : cross.findings) {
        std::cerr << (finding.severity == ValidationFinding::Severity::error ? "error: "
                                                                             : "warning: ")
                  << "[" << finding.code << "] " << finding.message << "\n";
    }
    if (cross.error_count() > 0) {
        std::cerr << "validation failed\n";
        return kExitValidation;
    }
    std::cout << "inputs valid: " << assets.value.assets().size() << " assets, "
              << totals.value.rows().size() << " reference totals\n";
    return kExitOk;
}

int run_synthesize(const CommonOptions& options, const std::string& previous)
{
    const RunConfig config = load_config(options);
    SynthesisResult result;
    if (previous.empty()) {
        result = synthesize(config);
        if (result.status != RunStatus::validation_failed) {
            write_outputs(result, config, options.out_dir);
        }
    } else {
        result = iterate(config, previous, options.out_dir);
    }
    const int code = print_run_outcome(result);
    if (code == kExitOk) {
        std::cout << "synthesis complete: " << result.asset_records.size() << " asset records, "
                  << result.remainder_records.size() << " remainder records -> "
                  << options.out_dir << "\n";
    }
    return code;
}

int run_aggregate(const CommonOptions& options, const std::string& monthly_path,
                  const std::string& remainder_path, const std::string& level_text,
                  const std::string& out_path, bool integral)
{
    const RunConfig config = load_config(options);
    auto level = parse_admin_level(level_text);
    if (!level) {
        throw UsageError("unknown level '" + level_text + "'");
    }
    auto records = read_monthly_csv(monthly_path);
    if (!records.ok()) {
        for (const auto& error : records.errors) {
            std::cerr << "error: " << error << "\n";
        }
        return kExitValidation;
    }
    if (!remainder_path.empty()) {
        auto remainder = read_monthly_csv(remainder_path);
        if (!remainder.ok()) {
            for (const auto& error : remainder.errors) {
                std::cerr << "error: " << error << "\n";
            }
            return kExitValidation;
        }
        records.value.insert(records.value.end(), remainder.value.begin(),
                             remainder.value.end());
    }
    auto boundaries = load_boundaries(config.boundaries_path);
    if (!boundaries.ok()) {
        for (const auto& error : boundaries.errors) {
            std::cerr << "error: " << error << "\n";
        }
        return kExitValidation;
    }
    RollupResult rolled = rollup(records.value, *level, boundaries.value,
                                 PeriodGranularity::annual);
    std::vector<InventoryRow> rows;
    for (const auto& [key, value] : rolled.rows) {
        InventoryRow row;
        row.unit_id = key.unit;
        row.level = to_string(*level);
        row.subsector = key.subsector;
        row.gas = key.gas;
        row.period_start = key.period.start;
        row.period_end = key.period.end;
        row.tonnes = value.tonnes;
        row.provenance = key.provenance;
        row.confidence = value.confidence;
        rows.push_back(std::move(row));
    }
    if (integral) {
        rows = integralize_inventory(std::move(rows));
    }
    write_inventory_csv(std::move(rows), out_path, config.to_json());
    std::cout << "wrote " << rolled.rows.size() << " rows to " << out_path << "\n";
    return kExitOk;
}

int run_pollutants(const CommonOptions& options, const std::string& out_path)
{
    const RunConfig config = load_config(options);
    if (config.reference_pollutants_path.empty() || config.reference_ghg_path.empty()) {
        std::cerr << "error: config must name reference_pollutants and reference_ghg inputs\n";
        return kExitValidation;
    }
    auto pollutants = load_reference_inventory(config.reference_pollutants_path, true);
    auto ghg = load_reference_inventory(config.reference_ghg_path, false);
    for (const auto& error : pollutants.errors) std::cerr << "error: " << error << "\n";
    for (const auto& error : ghg.errors) std::cerr << "error: " << error << "\n";
    if (!pollutants.ok() || !ghg.ok()) {
        return kExitValidation;
    }
    GwpTable gwp = GwpTable::defaults();
    if (!config.gwp_path.empty()) {
        auto loaded = load_gwp_table(config.gwp_path);
        if (!loaded.ok()) {
            for (const auto& error : loaded.errors) std::cerr << "error: " << error << "\n";
            return kExitValidation;
        }
        gwp = std::move(loaded.value);
    }
    RatioBuildReport build_report;
    const CoPollutantRatioTable table = build_ratio_table(pollutants.value, ghg.value, gwp,
                                                          config.horizon_years, &build_report);
    for (const auto& skipped : build_report.skipped) {
        std::cerr << "warning: " << skipped << "\n";
    }
    std::ofstream out(out_path);
    if (!out) {
        throw IoError("cannot write " + out_path);
    }
    CsvWriter writer(out);
    writer.row({"subsector", "gas", "country", "fuel", "ratio", "co2e_weight_t"});
    for (const auto& [key, entry] : table.entries()) {
        writer.row({std::get<0>(key), to_string(std::get<1>(key)), std::get<2>(key),
                    std::get<3>(key), format_double(entry.ratio),
                    format_double(entry.co2e_weight)});
    }
    std::cout << "wrote " << table.entries().size() << " ratios to " << out_path << "\n";
    return kExitOk;
}

int run_analyze_trend(const std::string& in_path, const std::string& out_path)
{
    CsvReader csv = CsvReader::from_file(in_path);
    for (const auto& required : {"unit", "year", "value"}) {
        if (!csv.has_column(required)) {
            throw UsageError(in_path + ": trend input needs columns unit,year,value");
        }
    }
    std::map<std::string, std::map<int, double>> by_unit;
    for (size_t row = 0; row < csv.row_count(); ++row) {
        const size_t line = csv.line_number(row);
        const std::string unit = csv.get(row, "unit").value_or("");
        const int year = parse_int_cell(csv.get(row, "year").value_or(""), in_path, line, "year");
        by_unit[unit][year] =
            parse_double_cell(csv.get(row, "value").value_or(""), in_path, line, "value");
    }

    std::ofstream out(out_path);
    CsvWriter writer(out);
    writer.row({"unit", "first_year", "last_year", "mean_annual_pct", "cagr_pct", "steps_pct",
                "excluded_steps"});
    for (const auto& [unit, years] : by_unit) {
        if (years.size() < 2) {
            continue;
        }
        const int first_year = years.begin()->first;
        std::vector<double> values;
        for (int y = first_year; y <= years.rbegin()->first; ++y) {
            auto it = years.find(y);
            values.push_back(it == years.end() ? 0.0 : it->second);
        }
        try {
            const TrendResult trend = pct_change_series(values, unit, first_year);
            std::string steps;
            for (size_t i = 0; i < trend.step_pct.size(); ++i) {
                if (i > 0) {
                    steps += ";";
                }
                steps += format_double(trend.step_pct[i]);
            }
            writer.row({unit, std::to_string(trend.first_year), std::to_string(trend.last_year),
                        format_double(trend.mean_annual_pct),
                        trend.cagr_pct ? format_double(*trend.cagr_pct) : "", steps,
                        std::to_string(trend.diagnostics.size())});
        } catch (const DomainError& e) {
            std::cerr << "warning: " << unit << ": " << e.what() << "\n";
        }
    }
    std::cout << "wrote trends to " << out_path << "\n";
    return kExitOk;
}

int run_analyze_jenks(const std::string& in_path, int k, const std::string& out_path)
{
    CsvReader csv = CsvReader::from_file(in_path);
    if (!csv.has_column("unit") || !csv.has_column("value")) {
        throw UsageError(in_path + ": jenks input needs columns unit,value");
    }
    std::vector<std::string> units;
    std::vector<double> values;
    for (size_t row = 0; row < csv.row_count(); ++row) {
        units.push_back(csv.get(row, "unit").value_or(""));
        values.push_back(parse_double_cell(csv.get(row, "value").value_or(""), in_path,
                                           csv.line_number(row), "value"));
    }
    const JenksResult result = jenks_breaks(values, k);
    if (result.degenerate) {
        std::cerr << "warning: degenerate classification, all values equal\n";
    }
    std::ofstream out(out_path);
    CsvWriter writer(out);
    std::string breaks_text;
    for (size_t i = 0; i < result.breaks.size(); ++i) {
        if (i > 0) {
            breaks_text += ";";
        }
        breaks_text += format_double(result.breaks[i]);
    }
    writer.comment("breaks " + breaks_text);
    writer.comment("within_class_ssd " + format_double(result.within_class_ssd));
    writer.row({"unit", "value", "class"});
    for (size_t i = 0; i < units.size(); ++i) {
        writer.row({units[i], format_double(values[i]), std::to_string(result.assignment[i])});
    }
    std::cout << "wrote " << k << "-class breaks to " << out_path << "\n";
    return kExitOk;
}

int run_analyze_threshold(const std::string& in_path, double threshold,
                          const std::string& out_path)
{
    CsvReader csv = CsvReader::from_file(in_path);
    if (!csv.has_column("unit") || !csv.has_column("value")) {
        throw UsageError(in_path + ": threshold input needs columns unit,value");
    }
    std::vector<std::string> units;
    std::vector<double> values;
    for (size_t row = 0; row < csv.row_count(); ++row) {
        units.push_back(csv.get(row, "unit").value_or(""));
        values.push_back(parse_double_cell(csv.get(row, "value").value_or(""), in_path,
                                           csv.line_number(row), "value"));
    }
    const auto labels = classify_by_threshold(values, threshold);
    std::ofstream out(out_path);
    CsvWriter writer(out);
    writer.comment("threshold " + format_double(threshold));
    writer.row({"unit", "value", "class"});
    for (size_t i = 0; i < units.size(); ++i) {
        writer.row({units[i], format_double(values[i]), to_string(labels[i])});
    }
    std::cout << "wrote labels to " << out_path << "\n";
    return kExitOk;
}

int run_analyze_metrics(const std::string& estimates_path, const std::string& reference_path)
{
    auto read_keyed = [](const std::string& path) {
        CsvReader csv = CsvReader::from_file(path);
        if (!csv.has_column("key") || !csv.has_column("value")) {
            throw UsageError(path + ": metrics input needs columns key,value");
        }
        std::map<std::string, double> values;
        for (size_t row = 0; row < csv.row_count(); ++row) {
            values[csv.get(row, "key").value_or("")] = parse_double_cell(
                csv.get(row, "value").value_or(""), path, csv.line_number(row), "value");
        }
        return values;
    };
    const auto estimates = read_keyed(estimates_path);
    const auto reference = read_keyed(reference_path);
    std::vector<double> est, ref;
    for (const auto& [key, value] : reference) {
        auto it = estimates.find(key);
        if (it != estimates.end()) {
            ref.push_back(value);
            est.push_back(it->second);
        }
    }
    const Metrics metrics = compare_metrics(est, ref);
    std::cout << "pairs=" << est.size() << "\n"
              << "rmse=" << format_double(metrics.rmse) << "\n"
              << "mse=" << format_double(metrics.mse) << "\n"
              << "mae=" << format_double(metrics.mae) << "\n"
              << "r2=" << format_double(metrics.r2) << "\n"
              << "spearman=" << format_double(metrics.spearman) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"emsynth: monthly asset-level emissions inventory synthesis"};
    app.require_subcommand(1);

    CommonOptions validate_options;
    CLI::App* validate_cmd = app.add_subcommand("validate", "load and cross-check all inputs");
    add_common(validate_cmd, validate_options, false);

    CommonOptions synth_options;
    std::string previous_dir;
    CLI::App* synth_cmd = app.add_subcommand("synthesize", "run the full synthesis");
    add_common(synth_cmd, synth_options, true);
    synth_cmd->add_option("--previous", previous_dir,
                          "previous output directory; writes a change report");

    CommonOptions agg_options;
    std::string agg_monthly, agg_remainder, agg_level = "gadm0", agg_out = "inventory.csv";
    bool agg_integral = false;
    CLI::App* agg_cmd = app.add_subcommand("aggregate", "roll up a monthly export");
    add_common(agg_cmd, agg_options, false);
    agg_cmd->add_option("--monthly", agg_monthly, "monthly_assets.csv from a previous run")
        ->required();
    agg_cmd->add_option("--remainder", agg_remainder, "monthly_remainder.csv (optional)");
    agg_cmd->add_option("--level", agg_level, "gadm0, gadm1, gadm2 or fua");
    agg_cmd->add_option("--out", agg_out, "output file");
    agg_cmd->add_flag("--integral", agg_integral,
                      "whole tonnes, apportioned by largest remainder");

    CommonOptions poll_options;
    std::string poll_out = "ratio_table.csv";
    CLI::App* poll_cmd = app.add_subcommand("pollutants", "build the co-pollutant ratio table");
    add_common(poll_cmd, poll_options, false);
    poll_cmd->add_option("--out", poll_out, "output file");

    CLI::App* analyze_cmd = app.add_subcommand("analyze", "trend and classification analytics");
    analyze_cmd->require_subcommand(1);
    std::string trend_in, trend_out = "trends.csv";
    CLI::App* trend_cmd = analyze_cmd->add_subcommand("trend", "annual percent-change trends");
    trend_cmd->add_option("--in", trend_in, "csv with columns unit,year,value")->required();
    trend_cmd->add_option("--out", trend_out, "output file");
    std::string jenks_in, jenks_out = "classes.csv";
    int jenks_k = 2;
    CLI::App* jenks_cmd = analyze_cmd->add_subcommand("jenks", "natural-breaks classification");
    jenks_cmd->add_option("--in", jenks_in, "csv with columns unit,value")->required();
    jenks_cmd->add_option("--k", jenks_k, "class count")->required();
    jenks_cmd->add_option("--out", jenks_out, "output file");
    std::string thr_in, thr_out = "labels.csv";
    double thr_value = 0.0;
    CLI::App* thr_cmd = analyze_cmd->add_subcommand("threshold", "two-way threshold labels");
    thr_cmd->add_option("--in", thr_in, "csv with columns unit,value")->required();
    thr_cmd->add_option("--threshold", thr_value, "boundary value")->required();
    thr_cmd->add_option("--out", thr_out, "output file");
    std::string metrics_est, metrics_ref;
    CLI::App* metrics_cmd = analyze_cmd->add_subcommand("metrics", "comparison statistics");
    metrics_cmd->add_option("--estimates", metrics_est, "csv with columns key,value")->required();
    metrics_cmd->add_option("--reference", metrics_ref, "csv with columns key,value")->required();

    std::string diff_old, diff_new, diff_out = "change_report.csv";
    double diff_threshold = 1.0;
    CLI::App* diff_cmd = app.add_subcommand("diff", "compare two inventory exports");
    diff_cmd->add_option("--old", diff_old, "previous inventory.csv")->required();
    diff_cmd->add_option("--new", diff_new, "new inventory.csv")->required();
    diff_cmd->add_option("--threshold", diff_threshold, "percent-change threshold");
    diff_cmd->add_option("--out", diff_out, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            return run_validate(validate_options);
        }
        if (synth_cmd->parsed()) {
            return run_synthesize(synth_options, previous_dir);
        }
        if (agg_cmd->parsed()) {
            return run_aggregate(agg_options, agg_monthly, agg_remainder, agg_level, agg_out,
                                 agg_integral);
        }
        if (poll_cmd->parsed()) {
            return run_pollutants(poll_options, poll_out);
        }
        if (analyze_cmd->parsed()) {
            if (trend_cmd->parsed()) {
                return run_analyze_trend(trend_in, trend_out);
            }
            if (jenks_cmd->parsed()) {
                return run_analyze_jenks(jenks_in, jenks_k, jenks_out);
            }
            if (thr_cmd->parsed()) {
                return run_analyze_threshold(thr_in, thr_value, thr_out);
            }
            if (metrics_cmd->parsed()) {
                return run_analyze_metrics(metrics_est, metrics_ref);
            }
        }
        if (diff_cmd->parsed()) {
            const ChangeReport report = diff_inventories(diff_old, diff_new, diff_threshold);
            write_change_report(report, diff_out);
            std::cout << report.entries.size() << " keys changed more than "
                      << format_double(diff_threshold) << "% -> " << diff_out << "\n";
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
