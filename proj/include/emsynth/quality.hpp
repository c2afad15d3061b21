#pragma once

#include "emsynth/ingestion.hpp"
#include "emsynth/types.hpp"

#include <map>
#include <vector>

namespace emsynth {

// What backs an estimate: how fine the emission factor is and where the
// activity number came from.
struct Evidence {
    EfGranularity ef = EfGranularity::asset;
    ActivitySource activity = ActivitySource::reported;

    auto operator<=>(const Evidence&) const = default;
};

// Total mapping from evidence to a confidence level. Monotone in the EF
// axis: a finer emission factor never lowers confidence.
class ConfidenceRubric {
public:
    void set(Evidence evidence, ConfidenceLevel level);
    ConfidenceLevel level(Evidence evidence) const;  // throws ConfigError on gaps

    // Checks totality and EF-axis monotonicity; throws ConfigError.
    void validate() const;

    static ConfidenceRubric defaults();
    const std::map<Evidence, ConfidenceLevel>& rules() const { return rules_; }

private:
    std::map<Evidence, ConfidenceLevel> rules_;
};

// Schema: ef_granularity,activity_source,level
Loaded<ConfidenceRubric> load_rubric(const std::string& path);

ConfidenceLevel assign_confidence(const Evidence& evidence, const ConfidenceRubric& rubric);

// Relative uncertainties of a multiplicative chain combine in quadrature.
double propagate_uncertainty(const std::vector<double>& component_pcts);

struct WeightedUncertainty {
    double quantity = 0.0;
    double pct = 0.0;
};

// Relative uncertainty of a sum: quantity-weighted quadrature.
double combine_additive_uncertainty(const std::vector<WeightedUncertainty>& parts);

struct Metrics {
    double rmse = 0.0;
    double mse = 0.0;
    double mae = 0.0;
    double r2 = 0.0;        // 1 - SS_res / SS_tot about the reference mean
    double spearman = 0.0;  // average ranks for ties
};

// Standard comparison statistics between paired series of equal length >= 2.
Metrics compare_metrics(const std::vector<double>& estimates,
                        const std::vector<double>& reference);

// Average ranks (1-based); ties share the mean of their rank range.
std::vector<double> average_ranks(const std::vector<double>& values);

}  // namespace emsynth
