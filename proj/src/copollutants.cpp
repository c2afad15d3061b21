#include "emsynth/copollutants.hpp"

#include "emsynth/csv.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace emsynth {

Loaded<ReferenceInventory> load_reference_inventory(const std::string& path, bool pollutant_side)
{
    Loaded<ReferenceInventory> result;
    CsvReader csv = CsvReader::from_file(path);
    for (const auto& required : {"country", "subsector", "gas", "tonnes"}) {
        if (!csv.has_column(required)) {
            result.errors.push_back(path + ": missing required column '" + std::string(required) + "'");
        }
    }
    if (!result.errors.empty()) {
        return result;
    }

    std::map<std::string, std::string> region_seen;
    std::set<std::tuple<std::string, std::string, std::string, Gas>> keys;
    for (size_t row = 0; row < csv.row_count(); ++row) {
        const size_t line = csv.line_number(row);
        const std::string prefix = path + ":" + std::to_string(line) + ": ";
        try {
            ReferenceEntry entry;
            entry.country = csv.get(row, "country").value_or("");
            entry.region = csv.get(row, "region").value_or("");
            entry.subsector = csv.get(row, "subsector").value_or("");
            entry.fuel = csv.get(row, "fuel").value_or("");
            const std::string gas_text = csv.get(row, "gas").value_or("");
            auto gas = parse_gas(gas_text);
            if (!gas) {
                result.errors.push_back(prefix + "unknown gas '" + gas_text + "'");
                continue;
            }
            if (is_derived_gas(*gas)) {
                result.errors.push_back(prefix + "derived gas " + gas_text + " not accepted");
                continue;
            }
            if (pollutant_side && !is_non_ghg(*gas)) {
                result.errors.push_back(prefix + "expected a non-GHG pollutant, got " + gas_text);
                continue;
            }
            if (!pollutant_side && !is_greenhouse_gas(*gas)) {
                result.errors.push_back(prefix + "expected a greenhouse gas, got " + gas_text);
                continue;
            }
            entry.gas = *gas;
            entry.tonnes = parse_double_cell(csv.get(row, "tonnes").value_or(""), path, line, "tonnes");
            if (entry.tonnes < 0.0) {
                result.errors.push_back(prefix + "negative tonnes");
                continue;
            }
            if (entry.country.empty() || entry.subsector.empty()) {
                result.errors.push_back(prefix + "empty country or subsector");
                continue;
            }
            if (!keys.insert({entry.country, entry.subsector, entry.fuel, entry.gas}).second) {
                result.errors.push_back(prefix + "duplicate reference key");
                continue;
            }
            if (!entry.region.empty()) {
                auto [it, inserted] = region_seen.emplace(entry.country, entry.region);
                if (!inserted && it->second != entry.region) {
                    result.errors.push_back(prefix + "country " + entry.country +
                                            " assigned to two regions: " + it->second + " and " +
                                            entry.region);
                    continue;
                }
            }
            result.value.rows.push_back(std::move(entry));
        } catch (const Error& e) {
            result.errors.push_back(e.what());
        }
    }
    return result;
}

ReferenceInventory merge_reference_inventories(const ReferenceInventory& primary,
                                               const ReferenceInventory& secondary)
{
    ReferenceInventory merged = primary;
    std::set<std::tuple<std::string, std::string, std::string, Gas>> keys;
    for (const auto& row : primary.rows) {
        keys.insert({row.country, row.subsector, row.fuel, row.gas});
    }
    for (const auto& row : secondary.rows) {
        if (keys.insert({row.country, row.subsector, row.fuel, row.gas}).second) {
            merged.rows.push_back(row);
        }
    }
    return merged;
}

std::optional<double> compute_ratio(double pollutant_mass, double co2e_mass)
{
    if (pollutant_mass < 0.0 || co2e_mass < 0.0) {
        throw DomainError("ratio inputs must be nonnegative");
    }
    if (co2e_mass <= 0.0) {
        if (pollutant_mass > 0.0) {
            return std::nullopt;  // undefined, caller skips with diagnostic
        }
        return 0.0;
    }
    return pollutant_mass / co2e_mass;
}

std::string to_string(RatioLevel level)
{
    switch (level) {
    case RatioLevel::exact: return "exact";
    case RatioLevel::fuel_collapsed: return "fuel_collapsed";
    case RatioLevel::region: return "region";
    case RatioLevel::global: return "global";
    }
    return "?";
}

void CoPollutantRatioTable::set(const std::string& subsector, Gas gas, const std::string& country,
                                const std::string& fuel, double ratio, double co2e_weight)
{
    if (ratio < 0.0 || !std::isfinite(ratio)) {
        throw DomainError("co-pollutant ratio must be finite and nonnegative");
    }
    entries_[{subsector, gas, country, fuel}] = Entry{ratio, co2e_weight};
}

void CoPollutantRatioTable::set_region(const std::string& country, const std::string& region)
{
    if (!region.empty()) {
        region_of_[country] = region;
    }
}

std::optional<RatioLookup> CoPollutantRatioTable::lookup(const std::string& subsector, Gas gas,
                                                         const std::string& country,
                                                         const std::string& fuel) const
{
    if (auto it = entries_.find({subsector, gas, country, fuel}); it != entries_.end()) {
        return RatioLookup{it->second.ratio, RatioLevel::exact};
    }

    // CO2e-weighted mean of the entries matched by `accept`.
    auto weighted_mean = [this, &subsector, gas](auto&& accept) -> std::optional<double> {
        double mass = 0.0;
        double weight = 0.0;
        for (const auto& [key, entry] : entries_) {
            if (std::get<0>(key) != subsector || std::get<1>(key) != gas) {
                continue;
            }
            if (!accept(std::get<2>(key), std::get<3>(key))) {
                continue;
            }
            mass += entry.ratio * entry.co2e_weight;
            weight += entry.co2e_weight;
        }
        if (weight <= 0.0) {
            return std::nullopt;
        }
        return mass / weight;
    };

    // same country, collapsed over fuel
    if (auto r = weighted_mean([&](const std::string& c, const std::string&) { return c == country; })) {
        return RatioLookup{*r, RatioLevel::fuel_collapsed};
    }

    // same region; prefer the query's fuel, then collapse
    auto region_it = region_of_.find(country);
    if (region_it != region_of_.end()) {
        const std::string& region = region_it->second;
        auto in_region = [&](const std::string& c) {
            auto it = region_of_.find(c);
            return it != region_of_.end() && it->second == region;
        };
        if (!fuel.empty()) {
            if (auto r = weighted_mean([&](const std::string& c, const std::string& f) {
                    return in_region(c) && f == fuel;
                })) {
                return RatioLookup{*r, RatioLevel::region};
            }
        }
        if (auto r = weighted_mean(
                [&](const std::string& c, const std::string&) { return in_region(c); })) {
            return RatioLookup{*r, RatioLevel::region};
        }
    }

    // global mean; prefer the query's fuel, then collapse
    if (!fuel.empty()) {
        if (auto r = weighted_mean(
                [&](const std::string&, const std::string& f) { return f == fuel; })) {
            return RatioLookup{*r, RatioLevel::global};
        }
    }
    if (auto r = weighted_mean([](const std::string&, const std::string&) { return true; })) {
        return RatioLookup{*r, RatioLevel::global};
    }
    return std::nullopt;
}

CoPollutantRatioTable build_ratio_table(const ReferenceInventory& pollutants,
                                        const ReferenceInventory& ghg,
                                        const GwpTable& gwp, int horizon_years,
                                        RatioBuildReport* report)
{
    CoPollutantRatioTable table;

    // CO2e of the GHG side per (subsector, country, fuel)
    std::map<std::tuple<std::string, std::string, std::string>, std::map<Gas, double>> ghg_by_key;
    for (const auto& row : ghg.rows) {
        ghg_by_key[{row.subsector, row.country, row.fuel}][row.gas] += row.tonnes;
        table.set_region(row.country, row.region);
    }
    std::map<std::tuple<std::string, std::string, std::string>, double> co2e_by_key;
    for (const auto& [key, amounts] : ghg_by_key) {
        co2e_by_key[key] = to_co2e(amounts, gwp, horizon_years);
    }

    std::map<std::tuple<std::string, Gas, std::string, std::string>, double> pollutant_by_key;
    for (const auto& row : pollutants.rows) {
        pollutant_by_key[{row.subsector, row.gas, row.country, row.fuel}] += row.tonnes;
        table.set_region(row.country, row.region);
    }

    for (const auto& [key, mass] : pollutant_by_key) {
        const auto& [subsector, gas, country, fuel] = key;
        auto co2e_it = co2e_by_key.find({subsector, country, fuel});
        const double co2e = co2e_it == co2e_by_key.end() ? 0.0 : co2e_it->second;
        auto ratio = compute_ratio(mass, co2e);
        if (!ratio) {
            if (report != nullptr) {
                report->skipped.push_back("(" + subsector + ", " + to_string(gas) + ", " + country +
                                          ", " + (fuel.empty() ? "-" : fuel) +
                                          "): pollutant mass with zero CO2e, ratio undefined");
            }
            continue;
        }
        table.set(subsector, gas, country, fuel, *ratio, co2e);
    }
    return table;
}

std::vector<EmissionRecord> scale_pollutants(const std::vector<Co2ePoint>& points, Gas pollutant,
                                             const CoPollutantRatioTable& table,
                                             std::vector<std::string>* skipped)
{
    if (!is_non_ghg(pollutant)) {
        throw UsageError("scale_pollutants expects a non-GHG gas, got " + to_string(pollutant));
    }
    std::vector<EmissionRecord> records;
    records.reserve(points.size());
    for (const auto& point : points) {
        auto found = table.lookup(point.subsector, pollutant, point.country, point.fuel);
        if (!found) {
            if (skipped != nullptr) {
                skipped->push_back("no ratio for (" + point.subsector + ", " +
                                   to_string(pollutant) + ", " + point.country + ", " +
                                   (point.fuel.empty() ? "-" : point.fuel) + "); " + point.source +
                                   " omitted");
            }
            continue;
        }
        EmissionRecord record;
        record.source = point.source;
        record.subsector = point.subsector;
        record.country = point.country;
        record.gas = pollutant;
        record.period = point.period;
        record.tonnes = point.co2e * found->ratio;
        record.provenance = Provenance::modeled;
        record.confidence = std::min(point.confidence, ConfidenceLevel::medium);
        record.uncertainty_pct = point.uncertainty_pct;
        record.fill = point.fill;
        records.push_back(std::move(record));
    }
    return records;
}

double direct_pollutants(double activity, double pollutant_ef, const Subsector& subsector, Gas gas)
{
    if (subsector.path_for(gas) != PollutantPath::direct) {
        throw UsageError("subsector " + subsector.id + " estimates " + to_string(gas) +
                         " via the co-pollutant route, not directly");
    }
    return compute_emissions(activity, pollutant_ef);
}

}  // namespace emsynth
