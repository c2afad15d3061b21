#pragma once

#include "emsynth/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace emsynth {

struct TrendResult {
    std::string unit;
    int first_year = 0;
    int last_year = 0;
    std::vector<double> step_pct;            // valid year-over-year percent changes
    std::vector<std::string> diagnostics;    // excluded steps (zero/negative anchors)
    double mean_annual_pct = 0.0;            // arithmetic mean of the valid steps
    std::optional<double> cagr_pct;          // compound rate between first/last positive anchors
};

// Year-over-year percent changes of an annual series. Requires at least two
// positive anchors; steps touching a zero or negative anchor are excluded.
TrendResult pct_change_series(const std::vector<double>& annual_totals,
                              const std::string& unit = {}, int first_year = 0);

struct JenksResult {
    std::vector<double> breaks;       // k-1 midpoints between adjacent classes
    std::vector<int> assignment;      // class index per input value, input order
    double within_class_ssd = 0.0;
    bool degenerate = false;          // all values equal
};

// Exact 1-D natural-breaks classification: dynamic programming over the
// sorted values, minimizing total within-class sum of squared deviations.
// Ties prefer the lowest break positions. Requires n >= k >= 2.
JenksResult jenks_breaks(const std::vector<double>& values, int classes);

enum class GdpClass { higher, lower };

std::string to_string(GdpClass c);

// value >= threshold -> higher, else lower.
std::vector<GdpClass> classify_by_threshold(const std::vector<double>& values, double threshold);

struct GroupComparison {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double ratio_of_means = 0.0;  // mean_a / mean_b
};

// Compares mean changes between two groups (ratio-of-means; the groups are
// unpaired so no per-element ratio exists).
GroupComparison compare_group_changes(const std::vector<double>& group_a,
                                      const std::vector<double>& group_b);

}  // namespace emsynth
