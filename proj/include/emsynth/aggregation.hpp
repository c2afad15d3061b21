#pragma once

#include "emsynth/core.hpp"
#include "emsynth/ingestion.hpp"
#include "emsynth/temporal.hpp"
#include "emsynth/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emsynth {

enum class AdminLevel : std::uint8_t { gadm0, gadm1, gadm2, fua };

std::string to_string(AdminLevel level);
std::optional<AdminLevel> parse_admin_level(const std::string& text);

// Virtual child that absorbs spatially uncertain mass below country level,
// so hierarchy totals stay conserved.
std::string unlocated_unit(const std::string& country);

struct AdminUnit {
    std::string id;
    AdminLevel level = AdminLevel::gadm0;
    std::string parent;        // empty for gadm0 and fua
    std::string geometry_ref;  // optional

    bool operator==(const AdminUnit&) const = default;
};

// Precomputed source -> admin unit lookup (the engine never does
// point-in-polygon itself).
struct BoundaryEntry {
    std::string gadm0;  // optional; record country is authoritative
    std::string gadm1;
    std::string gadm2;
    std::vector<std::string> fuas;  // zero or more
};

class BoundaryIndex {
public:
    void add(const std::string& source, BoundaryEntry entry);
    const BoundaryEntry* find(const std::string& source) const;
    size_t size() const { return entries_.size(); }

    template <typename Fn>
    void for_each(Fn&& fn) const
    {
        for (const auto& [source, entry] : entries_) {
            fn(source, entry);
        }
    }

private:
    std::map<std::string, BoundaryEntry> entries_;
};

// Schema: id,gadm0,gadm1,gadm2,fua; fua holds ';'-separated unit ids.
Loaded<BoundaryIndex> load_boundaries(const std::string& path);

// Enumerates the admin units referenced by a boundary index, with parent
// links (gadm2 under gadm1 under gadm0; FUAs stand alone). Rejects indexes
// where a unit appears under two different parents.
std::vector<AdminUnit> derive_admin_units(const BoundaryIndex& index);

// Admin units a record contributes to at a level. Exactly one for gadm
// levels (the unlocated child when the index has no entry), zero or more
// FUAs, empty only when the record has no country.
std::vector<std::string> units_of(const EmissionRecord& record, AdminLevel level,
                                  const BoundaryIndex& index);

enum class PeriodGranularity : std::uint8_t { monthly, annual };

struct RollupKey {
    std::string unit;
    AdminLevel level = AdminLevel::gadm0;
    std::string subsector;
    Gas gas = Gas::CO2;
    Period period;
    Provenance provenance = Provenance::modeled;

    auto tie() const { return std::tie(unit, level, subsector, gas, period.start, period.end, provenance); }
    bool operator<(const RollupKey& other) const { return tie() < other.tie(); }
    bool operator==(const RollupKey& other) const { return tie() == other.tie(); }
};

struct RollupValue {
    double tonnes = 0.0;
    ConfidenceLevel confidence = ConfidenceLevel::very_high;  // min over contributors
    double uncertainty_pct = 0.0;  // quantity-weighted quadrature
};

struct RollupResult {
    std::map<RollupKey, RollupValue> rows;
    std::vector<std::string> quarantined;  // records with no country

    double total(Gas gas) const;
};

// Sums records per admin unit at a level. Conservation: the per-gas total
// over all units equals the per-gas total of the resolvable input records.
RollupResult rollup(const std::vector<EmissionRecord>& records, AdminLevel level,
                    const BoundaryIndex& index, PeriodGranularity granularity);

struct RankOptions {
    AdminLevel level = AdminLevel::gadm0;
    std::optional<std::string> unit;       // restrict to one unit
    std::optional<std::string> subsector;  // restrict to one subsector
    std::optional<MonthWindow> period;     // restrict to records starting inside
    std::optional<Gas> gas;                // absent -> CO2e over GHGs
    int horizon_years = 100;
    const GwpTable* gwp = nullptr;         // required when gas is absent
};

// Descending by emissions total, ties by source id ascending.
std::vector<std::pair<std::string, double>> rank_assets(const std::vector<EmissionRecord>& records,
                                                        const BoundaryIndex& index,
                                                        const RankOptions& options);

// Per-month series for one admin unit; months without records are zero
// with an explicit flag, never absent.
MonthlySeries unit_timeseries(const std::vector<EmissionRecord>& records, const std::string& unit,
                              AdminLevel level, const BoundaryIndex& index, Gas gas,
                              MonthWindow window);

// One exported inventory row (tabular and geo share this shape).
struct InventoryRow {
    std::string unit_id;
    std::string level;  // gadm0/gadm1/gadm2/fua or "asset"
    std::string subsector;
    Gas gas = Gas::CO2;
    Date period_start;
    Date period_end;
    double tonnes = 0.0;
    Provenance provenance = Provenance::modeled;
    ConfidenceLevel confidence = ConfidenceLevel::medium;
    std::optional<double> lat;  // point location for located assets
    std::optional<double> lon;
};

enum class ExportFormat : std::uint8_t { csv, geojson };

std::optional<ExportFormat> parse_export_format(const std::string& text);

// Byte-deterministic exports: rows are sorted, numbers use shortest
// round-trip formatting, and the serialized run config is embedded.
void write_inventory_csv(std::vector<InventoryRow> rows, const std::string& path,
                         const std::string& config_json);
void write_inventory_geojson(std::vector<InventoryRow> rows, const std::string& path,
                             const std::string& config_json);
void export_inventory(std::vector<InventoryRow> rows, ExportFormat format,
                      const std::string& path, const std::string& config_json);

// Reads a file written by write_inventory_csv (round-trip support).
Loaded<std::vector<InventoryRow>> read_inventory_csv(const std::string& path);

// Integral-tonnes export option: within each (level, subsector, gas,
// period, provenance) group, whole tonnes are apportioned by largest
// remainder so the group total stays exactly the rounded float total.
std::vector<InventoryRow> integralize_inventory(std::vector<InventoryRow> rows);

}  // namespace emsynth
