#pragma once

#include "emsynth/core.hpp"
#include "emsynth/types.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace emsynth {

using SubsectorRegistry = std::map<std::string, Subsector>;

// Loader outcome: either a fully parsed table or a row-addressed error
// report. Nothing is half-loaded: callers must check ok() before using value.
template <typename T>
struct Loaded {
    T value{};
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }
};

class AssetRegistry {
public:
    void add(Asset asset);  // keeps assets sorted by id

    const std::vector<Asset>& assets() const { return assets_; }
    const Asset* find(const std::string& id) const;

    std::vector<const Asset*> by_subsector(const std::string& subsector) const;
    std::vector<const Asset*> by_country(const std::string& country) const;
    std::vector<const Asset*> by_country_subsector(const std::string& country,
                                                   const std::string& subsector) const;

    bool operator==(const AssetRegistry& other) const { return assets_ == other.assets_; }

private:
    std::vector<Asset> assets_;
};

struct CountryTotalKey {
    std::string country;
    std::string subsector;
    Gas gas = Gas::CO2;
    int year = 0;

    auto operator<=>(const CountryTotalKey&) const = default;
};

struct CountryTotal {
    double tonnes = 0.0;
    std::string source;
};

class CountryTotalTable {
public:
    // Returns false when the key is already present.
    bool add(const CountryTotalKey& key, CountryTotal total);
    const CountryTotal* find(const CountryTotalKey& key) const;
    const std::map<CountryTotalKey, CountryTotal>& rows() const { return rows_; }

private:
    std::map<CountryTotalKey, CountryTotal> rows_;
};

struct ProxyCell {
    std::string cell;  // opaque spatial unit: grid cell id or admin id
    double weight = 0.0;

    bool operator==(const ProxyCell&) const = default;
};

// Nonnegative spatial weights per (subsector, country).
class ProxySurfaceTable {
public:
    void add(const std::string& subsector, const std::string& country, ProxyCell cell);

    // Cells sorted by id; empty when the key is unknown.
    const std::vector<ProxyCell>* find(const std::string& subsector,
                                       const std::string& country) const;
    // True when the key exists but all weights are zero.
    bool proxy_empty(const std::string& subsector, const std::string& country) const;
    const std::map<std::pair<std::string, std::string>, std::vector<ProxyCell>>& surfaces() const
    {
        return surfaces_;
    }

private:
    std::map<std::pair<std::string, std::string>, std::vector<ProxyCell>> surfaces_;
};

// Twelve monthly fractions summing to one.
struct TemporalProfile {
    std::string id;
    std::array<double, 12> weights{};

    static TemporalProfile uniform(std::string id = "uniform");
};

class TemporalProfileSet {
public:
    void add(TemporalProfile profile);
    const TemporalProfile* find(const std::string& id) const;
    const std::map<std::string, TemporalProfile>& profiles() const { return profiles_; }

private:
    std::map<std::string, TemporalProfile> profiles_;
};

// File loaders; schemas in docs/formats.md. Every error names a row.
Loaded<AssetRegistry> load_asset_registry(const std::string& path,
                                          const SubsectorRegistry& subsectors,
                                          CfBoundMode cf_mode = CfBoundMode::strict);
Loaded<CountryTotalTable> load_country_totals(const std::string& path,
                                              const SubsectorRegistry& subsectors);
Loaded<ProxySurfaceTable> load_proxy_surface(const std::string& path);
Loaded<TemporalProfileSet> load_profiles(const std::string& path);
Loaded<GwpTable> load_gwp_table(const std::string& path);

// Writes a registry in the assets.csv schema; reloading yields an equal one.
void export_asset_registry(const AssetRegistry& registry, const std::string& path);

struct ValidationFinding {
    enum class Severity { warning, error };
    Severity severity = Severity::warning;
    std::string code;     // e.g. "unallocatable", "uniform_fallback"
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;

    bool empty() const { return findings.empty(); }
    size_t error_count() const;
};

// Cross-references the loaded tables: totals that no asset and no proxy can
// absorb, and subsectors that will fall back to the uniform profile.
ValidationReport validate_inputs(const AssetRegistry& registry,
                                 const CountryTotalTable& totals,
                                 const ProxySurfaceTable& proxies,
                                 const TemporalProfileSet& profiles,
                                 const SubsectorRegistry& subsectors);

}  // namespace emsynth
