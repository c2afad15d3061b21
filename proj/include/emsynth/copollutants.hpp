#pragma once

#include "emsynth/core.hpp"
#include "emsynth/ingestion.hpp"
#include "emsynth/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emsynth {

// One reference-inventory row; fuel and region may be empty.
struct ReferenceEntry {
    std::string country;
    std::string region;
    std::string subsector;
    std::string fuel;
    Gas gas = Gas::CO2;
    double tonnes = 0.0;
};

struct ReferenceInventory {
    std::vector<ReferenceEntry> rows;
};

// Schema: country,region,subsector,fuel,gas,tonnes. `pollutant_side` selects
// whether non-GHG (true) or GHG (false) gas codes are expected.
Loaded<ReferenceInventory> load_reference_inventory(const std::string& path, bool pollutant_side);

// Prefer-first merge: rows of `secondary` whose (country,subsector,fuel,gas)
// key is absent from `primary` are appended.
ReferenceInventory merge_reference_inventories(const ReferenceInventory& primary,
                                               const ReferenceInventory& secondary);

// Pollutant mass per tonne CO2e. Undefined when there is pollutant mass but
// no CO2e to anchor it.
std::optional<double> compute_ratio(double pollutant_mass, double co2e_mass);

enum class RatioLevel { exact, fuel_collapsed, region, global };

std::string to_string(RatioLevel level);

struct RatioLookup {
    double ratio = 0.0;
    RatioLevel level = RatioLevel::exact;
};

class CoPollutantRatioTable {
public:
    struct Entry {
        double ratio = 0.0;
        double co2e_weight = 0.0;  // weight for collapsed means
    };

    void set(const std::string& subsector, Gas gas, const std::string& country,
             const std::string& fuel, double ratio, double co2e_weight);
    void set_region(const std::string& country, const std::string& region);

    // Fallback chain: exact key, fuel-collapsed country mean, region mean,
    // global mean. Means are CO2e-weighted.
    std::optional<RatioLookup> lookup(const std::string& subsector, Gas gas,
                                      const std::string& country,
                                      const std::string& fuel) const;

    size_t size() const { return entries_.size(); }
    const std::map<std::tuple<std::string, Gas, std::string, std::string>, Entry>& entries() const
    {
        return entries_;
    }

private:
    // key: (subsector, gas, country, fuel)
    std::map<std::tuple<std::string, Gas, std::string, std::string>, Entry> entries_;
    std::map<std::string, std::string> region_of_;
};

struct RatioBuildReport {
    std::vector<std::string> skipped;  // keys with pollutant mass but zero CO2e
};

// Ratios per (subsector, gas, country, fuel) from paired reference
// inventories; the GHG side is converted to CO2e first.
CoPollutantRatioTable build_ratio_table(const ReferenceInventory& pollutants,
                                        const ReferenceInventory& ghg,
                                        const GwpTable& gwp, int horizon_years,
                                        RatioBuildReport* report = nullptr);

// A CO2e quantity to be scaled into a pollutant estimate.
struct Co2ePoint {
    std::string source;
    std::string subsector;
    std::string country;
    std::string fuel;  // empty when unknown
    Period period;
    double co2e = 0.0;
    ConfidenceLevel confidence = ConfidenceLevel::medium;
    std::optional<double> uncertainty_pct;
    FillFlag fill = FillFlag::observed;
};

// pollutant mass = CO2e * ratio. Points without a usable ratio are skipped
// and listed in `skipped`. Confidence is capped at medium: the ratios are
// country-level factors.
std::vector<EmissionRecord> scale_pollutants(const std::vector<Co2ePoint>& points, Gas pollutant,
                                             const CoPollutantRatioTable& table,
                                             std::vector<std::string>* skipped = nullptr);

// Direct route: activity times a pollutant emission factor. Only valid for
// subsectors whose path for the gas is `direct`.
double direct_pollutants(double activity, double pollutant_ef, const Subsector& subsector,
                         Gas gas);

}  // namespace emsynth
