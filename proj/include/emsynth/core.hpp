#pragma once

#include "emsynth/types.hpp"

#include <map>
#include <optional>

namespace emsynth {

// Activity is the product of capacity and capacity factor.
double compute_activity(double capacity, double capacity_factor);

// Emissions are the product of activity and an emission factor, in tonnes.
double compute_emissions(double activity, double emission_factor);

// Two of the three factors behind an emissions total, the third is inferred.
struct KnownFactors {
    std::optional<double> capacity;
    std::optional<double> capacity_factor;
    std::optional<double> emission_factor;
};

// Returns the missing factor so that total == C * CF * EF holds exactly.
// Exactly two factors must be known and both must be positive when the
// total is positive.
double decompose_emissions(double total, const KnownFactors& known);

double infer_capacity(double total, double capacity_factor, double emission_factor);
double infer_capacity_factor(double total, double capacity, double emission_factor);
double infer_emission_factor(double total, double capacity, double capacity_factor);

// GWP-weighted sum over greenhouse gases. Every gas in `amounts` must have
// a table entry for the horizon; derived and non-GHG codes are rejected.
double to_co2e(const std::map<Gas, double>& amounts, const GwpTable& gwp, int horizon_years);

// Capacity-factor bound checking. Strict mode caps CF at 1; the extended
// mode admits reported values up to 1.5.
enum class CfBoundMode { strict, extended };

double cf_upper_bound(CfBoundMode mode);
bool cf_within_bounds(double cf, CfBoundMode mode);

}  // namespace emsynth
