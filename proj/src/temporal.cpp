#include "emsynth/temporal.hpp"

#include "emsynth/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace emsynth {

MonthlySeries::MonthlySeries(std::string source, Gas gas, MonthWindow window)
    : source_(std::move(source)),
      gas_(gas),
      window_(window),
      values_(static_cast<size_t>(window.size()), 0.0),
      flags_(static_cast<size_t>(window.size()), FillFlag::observed),
      present_(static_cast<size_t>(window.size()), false)
{
}

bool MonthlySeries::has(YearMonth ym) const
{
    if (!window_.contains(ym)) {
        return false;
    }
    return present_[static_cast<size_t>(window_.offset_of(ym))];
}

double MonthlySeries::value(YearMonth ym) const
{
    if (!has(ym)) {
        throw DomainError("no value for month " + ym.to_string() + " in series " + source_);
    }
    return values_[static_cast<size_t>(window_.offset_of(ym))];
}

FillFlag MonthlySeries::flag(YearMonth ym) const
{
    if (!has(ym)) {
        throw DomainError("no value for month " + ym.to_string() + " in series " + source_);
    }
    return flags_[static_cast<size_t>(window_.offset_of(ym))];
}

void MonthlySeries::set(YearMonth ym, double tonnes, FillFlag flag)
{
    if (!window_.contains(ym)) {
        throw DomainError("month " + ym.to_string() + " outside series window " +
                          window_.first.to_string() + ".." + window_.last.to_string());
    }
    const auto idx = static_cast<size_t>(window_.offset_of(ym));
    values_[idx] = tonnes;
    flags_[idx] = flag;
    present_[idx] = true;
}

void MonthlySeries::accumulate(YearMonth ym, double tonnes, FillFlag flag)
{
    if (has(ym)) {
        const auto idx = static_cast<size_t>(window_.offset_of(ym));
        values_[idx] += tonnes;
    } else {
        set(ym, tonnes, flag);
    }
}

void MonthlySeries::clear(YearMonth ym)
{
    if (window_.contains(ym)) {
        present_[static_cast<size_t>(window_.offset_of(ym))] = false;
    }
}

bool MonthlySeries::complete() const
{
    return std::all_of(present_.begin(), present_.end(), [](bool p) { return p; });
}

int MonthlySeries::present_count() const
{
    return static_cast<int>(std::count(present_.begin(), present_.end(), true));
}

double MonthlySeries::sum() const
{
    double total = 0.0;
    for (size_t i = 0; i < values_.size(); ++i) {
        if (present_[i]) {
            total += values_[i];
        }
    }
    return total;
}

double MonthlySeries::sum_year(int year) const
{
    double total = 0.0;
    for (int offset = 0; offset < window_.size(); ++offset) {
        YearMonth ym = window_.at(offset);
        if (ym.year == year && present_[static_cast<size_t>(offset)]) {
            total += values_[static_cast<size_t>(offset)];
        }
    }
    return total;
}

void MonthlySeries::extend(YearMonth new_last)
{
    if (new_last <= window_.last) {
        return;
    }
    const auto new_size = static_cast<size_t>(months_between(window_.first, new_last));
    values_.resize(new_size, 0.0);
    flags_.resize(new_size, FillFlag::observed);
    present_.resize(new_size, false);
    window_.last = new_last;
}

std::vector<YearMonth> MonthlySeries::missing_months() const
{
    std::vector<YearMonth> missing;
    for (int offset = 0; offset < window_.size(); ++offset) {
        if (!present_[static_cast<size_t>(offset)]) {
            missing.push_back(window_.at(offset));
        }
    }
    return missing;
}

std::vector<double> proportional_shares(double total, const std::vector<double>& weights)
{
    if (total < 0.0) {
        throw DomainError("cannot share out a negative total");
    }
    double weight_sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) {
            throw DomainError("negative proportional weight");
        }
        weight_sum += w;
    }
    std::vector<double> shares(weights.size(), 0.0);
    if (weights.empty() || total == 0.0) {
        return shares;
    }
    if (weight_sum <= 0.0) {
        throw DomainError("proportional weights sum to zero with a positive total");
    }
    for (size_t i = 0; i < weights.size(); ++i) {
        shares[i] = total * (weights[i] / weight_sum);
    }
    // Fold the float residual into the heaviest slot.
    double assigned = std::accumulate(shares.begin(), shares.end(), 0.0);
    size_t largest = static_cast<size_t>(
        std::max_element(weights.begin(), weights.end()) - weights.begin());
    shares[largest] += total - assigned;
    return shares;
}

std::vector<long long> apportion_largest_remainder(long long total,
                                                   const std::vector<double>& weights)
{
    if (total < 0) {
        throw DomainError("cannot apportion a negative total");
    }
    std::vector<long long> result(weights.size(), 0);
    if (weights.empty() || total == 0) {
        return result;
    }
    double weight_sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) {
            throw DomainError("negative apportionment weight");
        }
        weight_sum += w;
    }
    if (weight_sum <= 0.0) {
        throw DomainError("apportionment weights sum to zero with a positive total");
    }

    std::vector<double> fractional(weights.size());
    long long floored_total = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        const double exact = static_cast<double>(total) * (weights[i] / weight_sum);
        result[i] = static_cast<long long>(std::floor(exact));
        fractional[i] = exact - std::floor(exact);
        floored_total += result[i];
    }
    long long leftover = total - floored_total;

    std::vector<size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return fractional[a] > fractional[b];
    });
    for (long long unit = 0; unit < leftover; ++unit) {
        result[order[static_cast<size_t>(unit) % order.size()]] += 1;
    }
    return result;
}

std::array<double, 12> annual_to_monthly(double annual, const TemporalProfile& profile)
{
    std::vector<double> weights(profile.weights.begin(), profile.weights.end());
    std::vector<double> shares = proportional_shares(annual, weights);
    std::array<double, 12> months{};
    std::copy(shares.begin(), shares.end(), months.begin());
    return months;
}

std::array<double, 3> quarterly_to_monthly(double quarter)
{
    std::vector<double> shares = proportional_shares(quarter, {1.0, 1.0, 1.0});
    return {shares[0], shares[1], shares[2]};
}

std::vector<std::pair<YearMonth, double>> span_to_monthly(Date start, Date end, double amount)
{
    if (!(start < end)) {
        throw DomainError("span start " + start.to_string() + " must precede end " +
                          end.to_string());
    }
    if (amount < 0.0) {
        throw DomainError("span amount must be nonnegative");
    }

    std::vector<YearMonth> months;
    std::vector<double> overlap;
    YearMonth cursor{start.year, start.month};
    const YearMonth last{end.year, end.month};
    while (cursor <= last) {
        Date month_start{cursor.year, cursor.month, 1};
        YearMonth next = cursor.next();
        Date month_end{next.year, next.month, 1};
        Date lo = std::max(start, month_start);
        Date hi = std::min(end, month_end);
        if (lo < hi) {
            months.push_back(cursor);
            overlap.push_back(static_cast<double>(day_difference(lo, hi)));
        }
        cursor = next;
    }

    std::vector<double> shares = proportional_shares(amount, overlap);
    std::vector<std::pair<YearMonth, double>> result;
    result.reserve(months.size());
    for (size_t i = 0; i < months.size(); ++i) {
        result.emplace_back(months[i], shares[i]);
    }
    return result;
}

std::vector<double> carry_to_monthly(double amount, int month_count)
{
    if (month_count < 0) {
        throw DomainError("negative month count");
    }
    return std::vector<double>(static_cast<size_t>(month_count), amount);
}

ImputationResult impute_series(const MonthlySeries& sparse,
                               const std::function<bool(YearMonth)>& zero_implied,
                               const std::optional<EqContext>& eq_context,
                               const std::vector<std::optional<double>>* country_avg,
                               const std::vector<std::optional<double>>* global_avg)
{
    ImputationResult result;
    result.series = sparse;
    MonthlySeries& series = result.series;
    const MonthWindow& window = series.window();
    const int n = window.size();

    // 1. zeros where absence of activity is implied
    if (zero_implied) {
        for (int i = 0; i < n; ++i) {
            YearMonth ym = window.at(i);
            if (!series.has(ym) && zero_implied(ym)) {
                series.set(ym, 0.0, FillFlag::zero_filled);
            }
        }
    }

    // 2. equation reconstruction where all three factors are known
    if (eq_context && eq_context->complete()) {
        const double reconstructed = compute_emissions(
            compute_activity(*eq_context->capacity, *eq_context->capacity_factor),
            *eq_context->emission_factor);
        for (int i = 0; i < n; ++i) {
            YearMonth ym = window.at(i);
            if (!series.has(ym)) {
                series.set(ym, reconstructed, FillFlag::eq_constrained);
            }
        }
    }

    // 3a. one global backward pass: the next known value propagates earlier
    {
        std::optional<double> next_known;
        for (int i = n - 1; i >= 0; --i) {
            YearMonth ym = window.at(i);
            if (series.has(ym)) {
                next_known = series.value(ym);
            } else if (next_known) {
                series.set(ym, *next_known, FillFlag::backfilled);
            }
        }
    }
    // 3b. one global forward pass: the last known value propagates later
    {
        std::optional<double> last_known;
        for (int i = 0; i < n; ++i) {
            YearMonth ym = window.at(i);
            if (series.has(ym)) {
                last_known = series.value(ym);
            } else if (last_known) {
                series.set(ym, *last_known, FillFlag::forwardfilled);
            }
        }
    }

    // 4/5. country then global averages for anything still open
    auto fill_from = [&](const std::vector<std::optional<double>>* avg, FillFlag flag) {
        if (avg == nullptr) {
            return;
        }
        for (int i = 0; i < n; ++i) {
            YearMonth ym = window.at(i);
            if (!series.has(ym) && i < static_cast<int>(avg->size()) &&
                (*avg)[static_cast<size_t>(i)].has_value()) {
                series.set(ym, *(*avg)[static_cast<size_t>(i)], flag);
            }
        }
    };
    fill_from(country_avg, FillFlag::country_avg);
    fill_from(global_avg, FillFlag::global_avg);

    result.unestimable = !series.complete();

    // Re-impose equation consistency on the stored factors: derive the
    // capacity factor implied by each filled value when C and EF are known.
    if (eq_context && eq_context->capacity && eq_context->emission_factor) {
        const double denom = *eq_context->capacity * *eq_context->emission_factor;
        result.derived_capacity_factor.assign(static_cast<size_t>(n), std::nullopt);
        if (denom > 0.0) {
            for (int i = 0; i < n; ++i) {
                YearMonth ym = window.at(i);
                if (series.has(ym)) {
                    result.derived_capacity_factor[static_cast<size_t>(i)] =
                        series.value(ym) / denom;
                }
            }
        }
    }
    return result;
}

MonthlySeries extrapolate_months(const MonthlySeries& series, YearMonth horizon)
{
    MonthlySeries result = series;
    result.extend(horizon);
    const MonthWindow& window = result.window();
    for (int i = 0; i < window.size(); ++i) {
        YearMonth ym = window.at(i);
        if (result.has(ym)) {
            continue;
        }
        // latest earlier year with a value for this month-of-year
        bool filled = false;
        for (YearMonth probe{ym.year - 1, ym.month}; probe >= window.first;
             probe = YearMonth{probe.year - 1, probe.month}) {
            if (result.has(probe)) {
                result.set(ym, result.value(probe), FillFlag::month_extrapolated);
                filled = true;
                break;
            }
        }
        if (!filled) {
            // shorter-than-a-year history: carry the last known value
            for (int j = i - 1; j >= 0; --j) {
                YearMonth prev = window.at(j);
                if (result.has(prev)) {
                    result.set(ym, result.value(prev), FillFlag::forwardfilled);
                    break;
                }
            }
        }
    }
    return result;
}

}  // namespace emsynth
