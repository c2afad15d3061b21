#pragma once

#include "emsynth/aggregation.hpp"
#include "emsynth/copollutants.hpp"
#include "emsynth/core.hpp"
#include "emsynth/disaggregation.hpp"
#include "emsynth/ingestion.hpp"
#include "emsynth/quality.hpp"
#include "emsynth/temporal.hpp"
#include "emsynth/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace emsynth {

// Relative uncertainty defaults (percent) per estimation component; see
// docs/formats.md for the combination rules.
struct UncertaintyConfig {
    double capacity_pct = 10.0;
    double capacity_factor_pct = 10.0;
    double ef_pct = 20.0;
    double reported_pct = 5.0;
    double allocated_pct = 50.0;
    double remainder_pct = 100.0;
    double imputed_pct = 100.0;
    double ratio_pct = 30.0;
};

// Derives a country total for `target_subsector` by subtracting the
// categories already covered from a broader external total.
struct ImplicitRule {
    std::string broad_subsector;
    std::vector<std::string> covered;
    std::string target_subsector;
};

struct RunConfig {
    // input paths (resolved against the config file location)
    std::string assets_path;
    std::string country_totals_path;
    std::string proxy_path;
    std::string profiles_path;
    std::string gwp_path;
    std::string boundaries_path;
    std::string reference_pollutants_path;            // optional
    std::string reference_ghg_path;                   // optional
    std::string reference_pollutants_secondary_path;  // optional, fill-from-second
    std::string reference_ghg_secondary_path;         // optional
    std::string rubric_path;                          // optional -> built-in default

    YearMonth window_start{2021, 1};
    std::optional<YearMonth> window_end;  // defaults to December of the latest data year

    int horizon_years = 100;
    CfBoundMode cf_mode = CfBoundMode::strict;
    SubsectorRegistry subsectors;
    std::vector<Gas> pollutant_gases;  // defaults to every non-GHG gas
    UncertaintyConfig uncertainty;
    std::vector<ImplicitRule> implicit_rules;
    std::vector<ExportFormat> export_formats{ExportFormat::csv};
    int jobs = 1;
    double change_threshold_pct = 1.0;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text, const std::string& base_dir);
    // Compact deterministic serialization, embedded in every output.
    std::string to_json() const;
};

struct ConservationEntry {
    std::string country;
    std::string subsector;
    Gas gas = Gas::CO2;
    int year = 0;
    double asset_sum = 0.0;
    double remainder_sum = 0.0;
    double effective_total = 0.0;
    double rel_error = 0.0;
    RemainderRule rule = RemainderRule::remainder_distributed;
    bool pass = true;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunReport {
    std::vector<std::string> load_errors;
    std::vector<std::string> load_warnings;
    ValidationReport validation;
    std::vector<std::string> notes;  // per-stage diagnostics
    std::vector<ConservationEntry> audit;
    bool conservation_ok = true;
    std::vector<StageTiming> timings;

    std::string to_json() const;
};

enum class RunStatus { ok, validation_failed, conservation_failed };

struct SynthesisResult {
    std::vector<EmissionRecord> asset_records;      // monthly, per asset and gas
    std::vector<EmissionRecord> remainder_records;  // monthly, per proxy cell or parked
    RunReport report;
    RunStatus status = RunStatus::ok;
};

// Runs the full synthesis: ingest, per-asset estimation, data-informed
// allocation, temporal completion, remainder allocation, co-pollutants,
// confidence/uncertainty, conservation audit. Deterministic for a given
// (inputs, config).
SynthesisResult synthesize(const RunConfig& config);

// Writes monthly tables, per-level annual inventory, optional GeoJSON and
// the run report into out_dir. Byte-deterministic.
void write_outputs(const SynthesisResult& result, const RunConfig& config,
                   const std::string& out_dir);

void write_monthly_csv(const std::vector<EmissionRecord>& records, const std::string& path,
                       const std::string& config_json);
Loaded<std::vector<EmissionRecord>> read_monthly_csv(const std::string& path);

struct ChangeEntry {
    std::string unit_id;
    std::string level;
    std::string subsector;
    Gas gas = Gas::CO2;
    std::string period;
    double old_tonnes = 0.0;
    double new_tonnes = 0.0;
    std::optional<double> pct_change;  // absent when the key is new or removed
};

struct ChangeReport {
    double threshold_pct = 0.0;
    std::vector<ChangeEntry> entries;
};

// Keys of inventory.csv whose totals moved by more than the threshold,
// plus keys that appeared or disappeared.
ChangeReport diff_inventories(const std::string& old_inventory_csv,
                              const std::string& new_inventory_csv, double threshold_pct);
void write_change_report(const ChangeReport& report, const std::string& path);

// Full recomputation with the new inputs, then a change report against the
// previous run's inventory.
SynthesisResult iterate(const RunConfig& config, const std::string& previous_out_dir,
                        const std::string& out_dir);

}  // namespace emsynth
