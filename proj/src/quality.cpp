#include "emsynth/quality.hpp"

#include "emsynth/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace emsynth {

namespace {

const std::vector<EfGranularity>& ef_axis()
{
    static const std::vector<EfGranularity> axis{EfGranularity::asset, EfGranularity::regional,
                                                 EfGranularity::country, EfGranularity::global};
    return axis;
}

const std::vector<ActivitySource>& activity_axis()
{
    static const std::vector<ActivitySource> axis{
        ActivitySource::reported, ActivitySource::satellite_modeled, ActivitySource::proxy,
        ActivitySource::imputed};
    return axis;
}

}  // namespace

void ConfidenceRubric::set(Evidence evidence, ConfidenceLevel level)
{
    rules_[evidence] = level;
}

ConfidenceLevel ConfidenceRubric::level(Evidence evidence) const
{
    auto it = rules_.find(evidence);
    if (it == rules_.end()) {
        throw ConfigError("confidence rubric has no rule for (" + to_string(evidence.ef) + ", " +
                          to_string(evidence.activity) + ")");
    }
    return it->second;
}

void ConfidenceRubric::validate() const
{
    for (EfGranularity ef : ef_axis()) {
        for (ActivitySource activity : activity_axis()) {
            if (rules_.count({ef, activity}) == 0) {
                throw ConfigError("confidence rubric is not total: missing (" + to_string(ef) +
                                  ", " + to_string(activity) + ")");
            }
        }
    }
    // finer EF granularity never lowers confidence
    for (ActivitySource activity : activity_axis()) {
        for (size_t i = 1; i < ef_axis().size(); ++i) {
            const ConfidenceLevel finer = level({ef_axis()[i - 1], activity});
            const ConfidenceLevel coarser = level({ef_axis()[i], activity});
            if (coarser > finer) {
                throw ConfigError("confidence rubric not monotone: (" +
                                  to_string(ef_axis()[i]) + ", " + to_string(activity) +
                                  ") outranks finer EF granularity");
            }
        }
    }
}

ConfidenceRubric ConfidenceRubric::defaults()
{
    using L = ConfidenceLevel;
    ConfidenceRubric r;
    // rows: EF granularity, columns: activity source
    // (reported, satellite-modeled, proxy, imputed)
    const struct {
        EfGranularity ef;
        L levels[4];
    } rows[] = {
        {EfGranularity::asset, {L::high, L::high, L::medium, L::medium}},
        {EfGranularity::regional, {L::medium, L::medium, L::medium, L::low}},
        {EfGranularity::country, {L::medium, L::low, L::low, L::low}},
        {EfGranularity::global, {L::low, L::low, L::very_low, L::very_low}},
    };
    for (const auto& row : rows) {
        for (size_t i = 0; i < activity_axis().size(); ++i) {
            r.set({row.ef, activity_axis()[i]}, row.levels[i]);
        }
    }
    r.validate();
    return r;
}

Loaded<ConfidenceRubric> load_rubric(const std::string& path)
{
    Loaded<ConfidenceRubric> result;
    CsvReader csv = CsvReader::from_file(path);
    for (const auto& required : {"ef_granularity", "activity_source", "level"}) {
        if (!csv.has_column(required)) {
            result.errors.push_back(path + ": missing required column '" + std::string(required) + "'");
        }
    }
    if (!result.errors.empty()) {
        return result;
    }
    for (size_t row = 0; row < csv.row_count(); ++row) {
        const std::string prefix = path + ":" + std::to_string(csv.line_number(row)) + ": ";
        auto ef = parse_ef_granularity(csv.get(row, "ef_granularity").value_or(""));
        auto activity = parse_activity_source(csv.get(row, "activity_source").value_or(""));
        auto level = parse_confidence(csv.get(row, "level").value_or(""));
        if (!ef || !activity || !level) {
            result.errors.push_back(prefix + "invalid rubric row");
            continue;
        }
        result.value.set({*ef, *activity}, *level);
    }
    if (result.ok()) {
        try {
            result.value.validate();
        } catch (const Error& e) {
            result.errors.push_back(std::string(e.what()));
        }
    }
    return result;
}

ConfidenceLevel assign_confidence(const Evidence& evidence, const ConfidenceRubric& rubric)
{
    return rubric.level(evidence);
}

double propagate_uncertainty(const std::vector<double>& component_pcts)
{
    double sum_sq = 0.0;
    for (double u : component_pcts) {
        if (u < 0.0) {
            throw DomainError("uncertainty components must be nonnegative");
        }
        sum_sq += u * u;
    }
    return std::sqrt(sum_sq);
}

double combine_additive_uncertainty(const std::vector<WeightedUncertainty>& parts)
{
    double total = 0.0;
    double sum_sq = 0.0;
    for (const auto& part : parts) {
        if (part.pct < 0.0 || part.quantity < 0.0) {
            throw DomainError("uncertainty components must be nonnegative");
        }
        total += part.quantity;
        sum_sq += (part.pct * part.quantity) * (part.pct * part.quantity);
    }
    if (total <= 0.0) {
        return 0.0;
    }
    return std::sqrt(sum_sq) / total;
}

std::vector<double> average_ranks(const std::vector<double>& values)
{
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        // ranks i+1 .. j+1 share their mean
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) {
            ranks[order[k]] = shared;
        }
        i = j + 1;
    }
    return ranks;
}

Metrics compare_metrics(const std::vector<double>& estimates, const std::vector<double>& reference)
{
    if (estimates.size() != reference.size()) {
        throw UsageError("paired series must have equal length");
    }
    const size_t n = estimates.size();
    if (n < 2) {
        throw UsageError("paired series must have length >= 2");
    }

    Metrics m;
    double sum_sq = 0.0;
    double sum_abs = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double diff = estimates[i] - reference[i];
        sum_sq += diff * diff;
        sum_abs += std::abs(diff);
    }
    m.mse = sum_sq / static_cast<double>(n);
    m.rmse = std::sqrt(m.mse);
    m.mae = sum_abs / static_cast<double>(n);

    const double ref_mean = std::accumulate(reference.begin(), reference.end(), 0.0) /
                            static_cast<double>(n);
    double ss_tot = 0.0;
    for (double r : reference) {
        ss_tot += (r - ref_mean) * (r - ref_mean);
    }
    m.r2 = ss_tot > 0.0 ? 1.0 - sum_sq / ss_tot : (sum_sq == 0.0 ? 1.0 : 0.0);

    // Spearman: Pearson correlation of the average ranks.
    const std::vector<double> rank_est = average_ranks(estimates);
    const std::vector<double> rank_ref = average_ranks(reference);
    const double mean_est = std::accumulate(rank_est.begin(), rank_est.end(), 0.0) /
                            static_cast<double>(n);
    const double mean_ref = std::accumulate(rank_ref.begin(), rank_ref.end(), 0.0) /
                            static_cast<double>(n);
    double cov = 0.0, var_est = 0.0, var_ref = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double de = rank_est[i] - mean_est;
        const double dr = rank_ref[i] - mean_ref;
        cov += de * dr;
        var_est += de * de;
        var_ref += dr * dr;
    }
    m.spearman = (var_est > 0.0 && var_ref > 0.0) ? cov / std::sqrt(var_est * var_ref) : 0.0;
    return m;
}

}  // namespace emsynth
