#pragma once

#include "emsynth/ingestion.hpp"
#include "emsynth/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emsynth {

// Global ratio of emitting to total establishments, per subsector.
class EmittingRatioTable {
public:
    void set(const std::string& subsector, double ratio);
    void set_global(double ratio);
    std::optional<double> find(const std::string& subsector) const;  // subsector, then global

private:
    std::map<std::string, double> per_subsector_;
    std::optional<double> global_;
};

// Effective emitting-establishment count: the ratio-adjusted total, unless
// the scraped count is larger.
long long adjust_emitting_count(long long total_establishments, double emitting_ratio,
                                long long scraped_emitting);

// Country emission factor from totals; undefined when activity is zero
// (callers fall through to default imputation).
std::optional<double> derive_country_ef(double total_emissions, double total_activity);

// One asset entering an allocation: its share weight and any value it
// already carries (reported or previously estimated).
struct AllocationInput {
    std::string id;
    double proxy = 0.0;                  // activity proxy weight, >= 0
    std::optional<double> prior;         // tonnes this asset already holds
};

enum class RemainderRule { assets_exceed_total, remainder_distributed };

struct AssetShare {
    std::string id;
    double tonnes = 0.0;
    bool kept_prior = false;  // value kept, excluded from the pool
};

struct AssetAllocation {
    std::vector<AssetShare> shares;   // one per input, input order
    double pool = 0.0;                // mass distributed to pool assets
    double prior_sum = 0.0;
    double effective_total = 0.0;     // max(country total, sum of shares)
    bool uniform_fallback = false;    // all proxies zero, uniform split used
};

// Distributes a country total over assets: priors are kept and shrink the
// pool (floored at zero); the rest is shared proportionally to proxies.
// When priors meet or exceed the total they replace the national estimate.
AssetAllocation allocate_country_to_assets(double country_total,
                                           const std::vector<AllocationInput>& assets);

// Default-value imputation pools and outcome.
enum class ImputeSource { none, country, global };

struct ImputedAsset {
    Asset asset;
    ImputeSource capacity_source = ImputeSource::none;
    ImputeSource capacity_factor_source = ImputeSource::none;
    std::map<Gas, ImputeSource> ef_source;
    bool unestimable = false;
};

// Fills missing capacity (pool mean), capacity factor (pool median) and
// emission factors (pool median per gas) from the country pool, falling
// back to the global pool. Fields the pools cannot supply stay missing and
// mark the asset unestimable.
ImputedAsset impute_asset_defaults(const Asset& asset,
                                   const std::vector<const Asset*>& country_pool,
                                   const std::vector<const Asset*>& global_pool,
                                   const std::vector<Gas>& gases_needed);

double median(std::vector<double> values);  // empty input throws
double mean(const std::vector<double>& values);

struct RemainderSplit {
    double effective_total = 0.0;
    double remainder = 0.0;
    RemainderRule rule = RemainderRule::remainder_distributed;
};

// Asset data win when they exceed the reference total; otherwise the gap
// becomes spatially-uncertain remainder mass.
RemainderSplit compute_remainder(double country_total, double asset_sum);

struct CellShare {
    std::string cell;
    double tonnes = 0.0;
};

struct RemainderAllocation {
    std::vector<CellShare> cells;
    std::optional<double> parked;  // set when no proxy weight could absorb the mass
};

// Shares remainder mass over proxy cells; a proxy-empty surface parks the
// whole amount at country level.
RemainderAllocation allocate_remainder(double remainder, const std::vector<ProxyCell>& cells);

struct ImplicitResult {
    double tonnes = 0.0;
    bool clamped = false;  // covered categories exceeded the broad total
};

// Broad external total minus already-covered categories, clamped at zero.
ImplicitResult implicit_subtract(double broad_total, const std::vector<double>& covered);

}  // namespace emsynth
