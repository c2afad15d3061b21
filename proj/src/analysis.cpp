#include "emsynth/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace emsynth {

TrendResult pct_change_series(const std::vector<double>& annual_totals, const std::string& unit,
                              int first_year)
{
    TrendResult result;
    result.unit = unit;
    result.first_year = first_year;
    result.last_year = first_year + static_cast<int>(annual_totals.size()) - 1;

    int positive_anchors = 0;
    for (double v : annual_totals) {
        if (v > 0.0) {
            ++positive_anchors;
        }
    }
    if (positive_anchors < 2) {
        throw DomainError("trend needs at least two positive anchor values");
    }

    for (size_t t = 1; t < annual_totals.size(); ++t) {
        const double prev = annual_totals[t - 1];
        const double curr = annual_totals[t];
        if (prev <= 0.0 || curr <= 0.0) {
            result.diagnostics.push_back("step " + std::to_string(first_year + static_cast<int>(t) - 1) +
                                         "->" + std::to_string(first_year + static_cast<int>(t)) +
                                         " excluded: nonpositive anchor");
            continue;
        }
        result.step_pct.push_back((curr - prev) / prev * 100.0);
    }
    if (!result.step_pct.empty()) {
        result.mean_annual_pct = std::accumulate(result.step_pct.begin(), result.step_pct.end(), 0.0) /
                                 static_cast<double>(result.step_pct.size());
    }

    // compound rate between the first and last positive anchors
    size_t first_pos = annual_totals.size();
    size_t last_pos = 0;
    for (size_t i = 0; i < annual_totals.size(); ++i) {
        if (annual_totals[i] > 0.0) {
            if (first_pos == annual_totals.size()) {
                first_pos = i;
            }
            last_pos = i;
        }
    }
    if (last_pos > first_pos) {
        const double years = static_cast<double>(last_pos - first_pos);
        result.cagr_pct =
            (std::pow(annual_totals[last_pos] / annual_totals[first_pos], 1.0 / years) - 1.0) * 100.0;
    }
    return result;
}

namespace {

// prefix sums for O(1) within-class SSD of sorted[i..j]
class SsdCalculator {
public:
    explicit SsdCalculator(const std::vector<double>& sorted)
        : sum_(sorted.size() + 1, 0.0), sum_sq_(sorted.size() + 1, 0.0)
    {
        for (size_t i = 0; i < sorted.size(); ++i) {
            sum_[i + 1] = sum_[i] + sorted[i];
            sum_sq_[i + 1] = sum_sq_[i] + sorted[i] * sorted[i];
        }
    }

    double ssd(size_t i, size_t j) const  // inclusive bounds
    {
        const double n = static_cast<double>(j - i + 1);
        const double s = sum_[j + 1] - sum_[i];
        const double sq = sum_sq_[j + 1] - sum_sq_[i];
        return std::max(0.0, sq - s * s / n);
    }

private:
    std::vector<double> sum_;
    std::vector<double> sum_sq_;
};

}  // namespace

JenksResult jenks_breaks(const std::vector<double>& values, int classes)
{
    const int n = static_cast<int>(values.size());
    if (classes < 2) {
        throw UsageError("natural breaks need at least 2 classes");
    }
    if (classes > n) {
        throw UsageError("more classes (" + std::to_string(classes) + ") than values (" +
                         std::to_string(n) + ")");
    }

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    SsdCalculator cost(sorted);

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // best[c][i]: minimal SSD splitting sorted[0..i] into c+1 classes
    std::vector<std::vector<double>> best(static_cast<size_t>(classes),
                                          std::vector<double>(static_cast<size_t>(n), kInf));
    std::vector<std::vector<int>> split(static_cast<size_t>(classes),
                                        std::vector<int>(static_cast<size_t>(n), 0));
    for (int i = 0; i < n; ++i) {
        best[0][static_cast<size_t>(i)] = cost.ssd(0, static_cast<size_t>(i));
    }
    for (int c = 1; c < classes; ++c) {
        for (int i = c; i < n; ++i) {
            // last class starts at t; scan ascending and keep the first
            // minimizer so ties prefer the lowest break
            for (int t = c; t <= i; ++t) {
                const double candidate = best[static_cast<size_t>(c - 1)][static_cast<size_t>(t - 1)] +
                                         cost.ssd(static_cast<size_t>(t), static_cast<size_t>(i));
                if (candidate < best[static_cast<size_t>(c)][static_cast<size_t>(i)]) {
                    best[static_cast<size_t>(c)][static_cast<size_t>(i)] = candidate;
                    split[static_cast<size_t>(c)][static_cast<size_t>(i)] = t;
                }
            }
        }
    }

    JenksResult result;
    result.within_class_ssd = best[static_cast<size_t>(classes - 1)][static_cast<size_t>(n - 1)];
    result.degenerate = sorted.front() == sorted.back();

    // backtrack class boundaries over the sorted order
    std::vector<int> starts(static_cast<size_t>(classes), 0);
    int end = n - 1;
    for (int c = classes - 1; c >= 1; --c) {
        const int t = split[static_cast<size_t>(c)][static_cast<size_t>(end)];
        starts[static_cast<size_t>(c)] = t;
        end = t - 1;
    }

    result.breaks.reserve(static_cast<size_t>(classes - 1));
    for (int c = 1; c < classes; ++c) {
        const int t = starts[static_cast<size_t>(c)];
        result.breaks.push_back(0.5 * (sorted[static_cast<size_t>(t - 1)] + sorted[static_cast<size_t>(t)]));
    }

    // class of each sorted position, then mapped back to input order;
    // equal values always land in the same (lowest eligible) class
    auto class_of_sorted = [&](int pos) {
        int c = 0;
        for (int k = 1; k < classes; ++k) {
            if (pos >= starts[static_cast<size_t>(k)]) {
                c = k;
            }
        }
        return c;
    };
    result.assignment.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto pos = static_cast<int>(
            std::lower_bound(sorted.begin(), sorted.end(), values[static_cast<size_t>(i)]) -
            sorted.begin());
        result.assignment[static_cast<size_t>(i)] = class_of_sorted(pos);
    }
    return result;
}

std::string to_string(GdpClass c)
{
    return c == GdpClass::higher ? "higher" : "lower";
}

std::vector<GdpClass> classify_by_threshold(const std::vector<double>& values, double threshold)
{
    std::vector<GdpClass> labels;
    labels.reserve(values.size());
    for (double value : values) {
        labels.push_back(value >= threshold ? GdpClass::higher : GdpClass::lower);
    }
    return labels;
}

GroupComparison compare_group_changes(const std::vector<double>& group_a,
                                      const std::vector<double>& group_b)
{
    if (group_a.empty() || group_b.empty()) {
        throw DomainError("group comparison needs nonempty groups");
    }
    GroupComparison result;
    result.mean_a = std::accumulate(group_a.begin(), group_a.end(), 0.0) /
                    static_cast<double>(group_a.size());
    result.mean_b = std::accumulate(group_b.begin(), group_b.end(), 0.0) /
                    static_cast<double>(group_b.size());
    if (result.mean_b == 0.0) {
        throw DomainError("group comparison undefined: second group mean is zero");
    }
    result.ratio_of_means = result.mean_a / result.mean_b;
    return result;
}

}  // namespace emsynth
