#pragma once

#include "emsynth/ingestion.hpp"
#include "emsynth/types.hpp"

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace emsynth {

// Inclusive month range.
struct MonthWindow {
    YearMonth first;
    YearMonth last;

    bool operator==(const MonthWindow&) const = default;

    int size() const { return months_between(first, last); }
    bool contains(YearMonth ym) const { return first <= ym && ym <= last; }
    YearMonth at(int offset) const { return YearMonth::from_index(first.index() + offset); }
    int offset_of(YearMonth ym) const { return ym.index() - first.index(); }
};

// Per-source, per-gas monthly values over a window. Months may be missing
// while a series is under construction; a completed series has a value and
// exactly one fill flag for every month.
class MonthlySeries {
public:
    MonthlySeries() = default;
    MonthlySeries(std::string source, Gas gas, MonthWindow window);

    const std::string& source() const { return source_; }
    Gas gas() const { return gas_; }
    const MonthWindow& window() const { return window_; }

    bool has(YearMonth ym) const;
    double value(YearMonth ym) const;
    FillFlag flag(YearMonth ym) const;
    void set(YearMonth ym, double tonnes, FillFlag flag);
    // Adds to an existing value, keeping the first flag; sets when absent.
    void accumulate(YearMonth ym, double tonnes, FillFlag flag);
    void clear(YearMonth ym);

    bool complete() const;
    int present_count() const;
    double sum() const;                 // over present months
    double sum_year(int year) const;    // over present window months of a year

    // Grows the window to new_last; added months start missing.
    void extend(YearMonth new_last);

    std::vector<YearMonth> missing_months() const;

private:
    std::string source_;
    Gas gas_ = Gas::CO2;
    MonthWindow window_{};
    std::vector<double> values_;
    std::vector<FillFlag> flags_;
    std::vector<bool> present_;
};

// total split proportionally to weights, with the residual folded into the
// largest-weight slot so the shares sum back to the input.
std::vector<double> proportional_shares(double total, const std::vector<double>& weights);

// Integral apportionment that preserves the exact integer total: floor the
// proportional shares, then hand remaining units to the largest fractional
// parts (ties broken by ascending index).
std::vector<long long> apportion_largest_remainder(long long total,
                                                   const std::vector<double>& weights);

// One year of monthly values from an annual amount and a profile.
std::array<double, 12> annual_to_monthly(double annual, const TemporalProfile& profile);

// A quarter spread evenly over its three months.
std::array<double, 3> quarterly_to_monthly(double quarter);

// Day-overlap apportionment of an amount over [start, end), end-exclusive,
// Gregorian calendar. Returns one entry per month touched by the span.
std::vector<std::pair<YearMonth, double>> span_to_monthly(Date start, Date end, double amount);

// Intensive quantities are carried to each month unchanged, never split.
std::vector<double> carry_to_monthly(double amount, int month_count);

// Factors available for equation-based reconstruction of missing months.
struct EqContext {
    std::optional<double> capacity;
    std::optional<double> capacity_factor;
    std::optional<double> emission_factor;

    bool complete() const
    {
        return capacity.has_value() && capacity_factor.has_value() && emission_factor.has_value();
    }
};

struct ImputationResult {
    MonthlySeries series;
    bool unestimable = false;
    // Capacity factor re-derived from filled values where capacity and the
    // emission factor are known, keeping the equations consistent.
    std::vector<std::optional<double>> derived_capacity_factor;
};

// Fills the gaps of a sparse series in priority order: implied zeros,
// equation reconstruction, one global backward pass, one global forward
// pass, country averages, global averages. Months that stay unfillable
// leave the series incomplete and set `unestimable`.
ImputationResult impute_series(
    const MonthlySeries& sparse,
    const std::function<bool(YearMonth)>& zero_implied = nullptr,
    const std::optional<EqContext>& eq_context = std::nullopt,
    const std::vector<std::optional<double>>* country_avg = nullptr,
    const std::vector<std::optional<double>>* global_avg = nullptr);

// Extends a series to `horizon`, filling each missing month from the latest
// earlier year's value for the same month-of-year. Months with no earlier
// same-month value fall back to the last known value.
MonthlySeries extrapolate_months(const MonthlySeries& series, YearMonth horizon);

}  // namespace emsynth
