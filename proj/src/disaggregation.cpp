#include "emsynth/disaggregation.hpp"

#include "emsynth/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace emsynth {

void EmittingRatioTable::set(const std::string& subsector, double ratio)
{
    if (ratio < 0.0 || ratio > 1.0) {
        throw DomainError("emitting ratio must lie in [0,1], got " + std::to_string(ratio));
    }
    per_subsector_[subsector] = ratio;
}

void EmittingRatioTable::set_global(double ratio)
{
    if (ratio < 0.0 || ratio > 1.0) {
        throw DomainError("emitting ratio must lie in [0,1], got " + std::to_string(ratio));
    }
    global_ = ratio;
}

std::optional<double> EmittingRatioTable::find(const std::string& subsector) const
{
    auto it = per_subsector_.find(subsector);
    if (it != per_subsector_.end()) {
        return it->second;
    }
    return global_;
}

long long adjust_emitting_count(long long total_establishments, double emitting_ratio,
                                long long scraped_emitting)
{
    if (total_establishments < 0 || scraped_emitting < 0) {
        throw DomainError("establishment counts must be nonnegative");
    }
    if (emitting_ratio < 0.0 || emitting_ratio > 1.0) {
        throw DomainError("emitting ratio must lie in [0,1], got " + std::to_string(emitting_ratio));
    }
    const long long adjusted = std::llround(static_cast<double>(total_establishments) * emitting_ratio);
    return std::max(adjusted, scraped_emitting);
}

std::optional<double> derive_country_ef(double total_emissions, double total_activity)
{
    if (total_emissions < 0.0 || total_activity < 0.0) {
        throw DomainError("emissions and activity totals must be nonnegative");
    }
    if (total_activity <= 0.0) {
        return std::nullopt;  // EF undefined; fall through to default imputation
    }
    return total_emissions / total_activity;
}

AssetAllocation allocate_country_to_assets(double country_total,
                                           const std::vector<AllocationInput>& assets)
{
    if (country_total < 0.0) {
        throw DomainError("country total must be nonnegative");
    }
    AssetAllocation result;
    result.shares.reserve(assets.size());

    double prior_sum = 0.0;
    std::vector<size_t> pool_members;
    for (size_t i = 0; i < assets.size(); ++i) {
        const auto& input = assets[i];
        if (input.proxy < 0.0) {
            throw DomainError("negative activity proxy for asset " + input.id);
        }
        AssetShare share;
        share.id = input.id;
        if (input.prior) {
            if (*input.prior < 0.0) {
                throw DomainError("negative prior value for asset " + input.id);
            }
            share.tonnes = *input.prior;
            share.kept_prior = true;
            prior_sum += *input.prior;
        } else {
            pool_members.push_back(i);
        }
        result.shares.push_back(std::move(share));
    }
    result.prior_sum = prior_sum;
    result.pool = std::max(0.0, country_total - prior_sum);

    if (!pool_members.empty() && result.pool > 0.0) {
        std::vector<double> weights;
        weights.reserve(pool_members.size());
        double weight_sum = 0.0;
        for (size_t idx : pool_members) {
            weights.push_back(assets[idx].proxy);
            weight_sum += assets[idx].proxy;
        }
        if (weight_sum <= 0.0) {
            // no usable proxy: split uniformly, flagged for low confidence
            weights.assign(pool_members.size(), 1.0);
            result.uniform_fallback = true;
        }
        std::vector<double> shares = proportional_shares(result.pool, weights);
        for (size_t j = 0; j < pool_members.size(); ++j) {
            result.shares[pool_members[j]].tonnes = shares[j];
        }
    } else if (pool_members.empty()) {
        result.pool = 0.0;  // nothing can absorb it at asset level
    }

    double share_sum = 0.0;
    for (const auto& share : result.shares) {
        share_sum += share.tonnes;
    }
    result.effective_total = std::max(country_total, share_sum);
    return result;
}

double median(std::vector<double> values)
{
    if (values.empty()) {
        throw DomainError("median of empty pool");
    }
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    if (n % 2 == 1) {
        return values[n / 2];
    }
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values)
{
    if (values.empty()) {
        throw DomainError("mean of empty pool");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

namespace {

template <typename Getter>
std::vector<double> collect(const std::vector<const Asset*>& pool, Getter get)
{
    std::vector<double> out;
    for (const Asset* asset : pool) {
        if (auto v = get(*asset)) {
            out.push_back(*v);
        }
    }
    return out;
}

}  // namespace

ImputedAsset impute_asset_defaults(const Asset& asset,
                                   const std::vector<const Asset*>& country_pool,
                                   const std::vector<const Asset*>& global_pool,
                                   const std::vector<Gas>& gases_needed)
{
    ImputedAsset result;
    result.asset = asset;

    auto fill = [&](auto getter, double (*combine)(std::vector<double>),
                    ImputeSource& source) -> std::optional<double> {
        auto country_values = collect(country_pool, getter);
        if (!country_values.empty()) {
            source = ImputeSource::country;
            return combine(std::move(country_values));
        }
        auto global_values = collect(global_pool, getter);
        if (!global_values.empty()) {
            source = ImputeSource::global;
            return combine(std::move(global_values));
        }
        source = ImputeSource::none;
        return std::nullopt;
    };
    // median() takes by value; wrap mean to match
    static constexpr auto mean_of = [](std::vector<double> v) { return mean(v); };

    if (!result.asset.capacity) {
        auto v = fill([](const Asset& a) { return a.capacity; }, +mean_of, result.capacity_source);
        if (v) {
            result.asset.capacity = v;
        }
    }
    if (!result.asset.capacity_factor) {
        auto v = fill([](const Asset& a) { return a.capacity_factor; }, median,
                      result.capacity_factor_source);
        if (v) {
            result.asset.capacity_factor = v;
        }
    }
    for (Gas gas : gases_needed) {
        if (result.asset.emission_factors.count(gas) > 0) {
            continue;
        }
        ImputeSource source = ImputeSource::none;
        auto getter = [gas](const Asset& a) -> std::optional<double> {
            auto it = a.emission_factors.find(gas);
            if (it == a.emission_factors.end()) {
                return std::nullopt;
            }
            return it->second;
        };
        auto v = fill(getter, median, source);
        if (v) {
            result.asset.emission_factors[gas] = *v;
        }
        result.ef_source[gas] = source;
    }

    bool has_all_efs = true;
    for (Gas gas : gases_needed) {
        if (result.asset.emission_factors.count(gas) == 0) {
            has_all_efs = false;
        }
    }
    result.unestimable = !result.asset.capacity.has_value() ||
                         !result.asset.capacity_factor.has_value() || !has_all_efs;
    return result;
}

RemainderSplit compute_remainder(double country_total, double asset_sum)
{
    if (country_total < 0.0 || asset_sum < 0.0) {
        throw DomainError("totals must be nonnegative");
    }
    RemainderSplit split;
    if (asset_sum > country_total) {
        // asset data are assumed more complete; they replace the reference
        split.effective_total = asset_sum;
        split.remainder = 0.0;
        split.rule = RemainderRule::assets_exceed_total;
    } else {
        split.effective_total = country_total;
        split.remainder = country_total - asset_sum;
        split.rule = RemainderRule::remainder_distributed;
    }
    return split;
}

RemainderAllocation allocate_remainder(double remainder, const std::vector<ProxyCell>& cells)
{
    if (remainder < 0.0) {
        throw DomainError("remainder must be nonnegative");
    }
    RemainderAllocation result;
    if (remainder == 0.0) {
        result.cells.reserve(cells.size());
        for (const auto& cell : cells) {
            result.cells.push_back({cell.cell, 0.0});
        }
        return result;
    }

    double weight_sum = 0.0;
    for (const auto& cell : cells) {
        if (cell.weight < 0.0) {
            throw DomainError("negative proxy weight for cell " + cell.cell);
        }
        weight_sum += cell.weight;
    }
    if (cells.empty() || weight_sum <= 0.0) {
        result.parked = remainder;
        return result;
    }

    std::vector<double> weights;
    weights.reserve(cells.size());
    for (const auto& cell : cells) {
        weights.push_back(cell.weight);
    }
    std::vector<double> shares = proportional_shares(remainder, weights);
    result.cells.reserve(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) {
        result.cells.push_back({cells[i].cell, shares[i]});
    }
    return result;
}

ImplicitResult implicit_subtract(double broad_total, const std::vector<double>& covered)
{
    if (broad_total < 0.0) {
        throw DomainError("broad total must be nonnegative");
    }
    double covered_sum = 0.0;
    for (double value : covered) {
        if (value < 0.0) {
            throw DomainError("covered amounts must be nonnegative");
        }
        covered_sum += value;
    }
    ImplicitResult result;
    const double difference = broad_total - covered_sum;
    if (difference < 0.0) {
        result.tonnes = 0.0;
        result.clamped = true;
    } else {
        result.tonnes = difference;
    }
    return result;
}

}  // namespace emsynth
