#include "emsynth/core.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace emsynth {

namespace {

struct GasInfo {
    Gas gas;
    const char* code;
};

constexpr std::array<GasInfo, 13> kGasInfo{{
    {Gas::CO2, "CO2"},
    {Gas::CH4, "CH4"},
    {Gas::N2O, "N2O"},
    {Gas::CO2e100, "CO2e100"},
    {Gas::CO2e20, "CO2e20"},
    {Gas::CO, "CO"},
    {Gas::OC, "OC"},
    {Gas::BC, "BC"},
    {Gas::VOC, "VOC"},
    {Gas::PM2_5, "PM2.5"},
    {Gas::NOx, "NOx"},
    {Gas::NH3, "NH3"},
    {Gas::SO2, "SO2"},
}};

}  // namespace

const std::vector<Gas>& all_gases()
{
    static const std::vector<Gas> gases = [] {
        std::vector<Gas> result;
        for (const auto& info : kGasInfo) {
            result.push_back(info.gas);
        }
        return result;
    }();
    return gases;
}

const std::vector<Gas>& greenhouse_gases()
{
    static const std::vector<Gas> gases{Gas::CO2, Gas::CH4, Gas::N2O};
    return gases;
}

const std::vector<Gas>& non_ghg_gases()
{
    static const std::vector<Gas> gases{Gas::CO, Gas::OC, Gas::BC, Gas::VOC,
                                        Gas::PM2_5, Gas::NOx, Gas::NH3, Gas::SO2};
    return gases;
}

bool is_greenhouse_gas(Gas gas)
{
    return gas == Gas::CO2 || gas == Gas::CH4 || gas == Gas::N2O;
}

bool is_derived_gas(Gas gas)
{
    return gas == Gas::CO2e100 || gas == Gas::CO2e20;
}

bool is_non_ghg(Gas gas)
{
    return !is_greenhouse_gas(gas) && !is_derived_gas(gas);
}

std::string to_string(Gas gas)
{
    for (const auto& info : kGasInfo) {
        if (info.gas == gas) {
            return info.code;
        }
    }
    return "?";
}

std::optional<Gas> parse_gas(const std::string& code)
{
    for (const auto& info : kGasInfo) {
        if (code == info.code) {
            return info.gas;
        }
    }
    return std::nullopt;
}

std::string to_string(ConfidenceLevel level)
{
    switch (level) {
    case ConfidenceLevel::very_low: return "very_low";
    case ConfidenceLevel::low: return "low";
    case ConfidenceLevel::medium: return "medium";
    case ConfidenceLevel::high: return "high";
    case ConfidenceLevel::very_high: return "very_high";
    }
    return "?";
}

std::optional<ConfidenceLevel> parse_confidence(const std::string& text)
{
    if (text == "very_low") return ConfidenceLevel::very_low;
    if (text == "low") return ConfidenceLevel::low;
    if (text == "medium") return ConfidenceLevel::medium;
    if (text == "high") return ConfidenceLevel::high;
    if (text == "very_high") return ConfidenceLevel::very_high;
    return std::nullopt;
}

void GwpTable::set(Gas gas, int horizon_years, double factor)
{
    if (gas == Gas::CO2 && factor != 1.0) {
        throw ConfigError("GWP of CO2 must be 1, got " + std::to_string(factor));
    }
    if (!(factor > 0.0)) {
        throw ConfigError("GWP factor for " + emsynth::to_string(gas) + " must be positive");
    }
    if (!is_greenhouse_gas(gas)) {
        throw ConfigError("GWP entry for non-greenhouse gas " + emsynth::to_string(gas));
    }
    entries_[{gas, horizon_years}] = factor;
}

double GwpTable::factor(Gas gas, int horizon_years) const
{
    if (gas == Gas::CO2) {
        return 1.0;
    }
    auto it = entries_.find({gas, horizon_years});
    if (it == entries_.end()) {
        throw ConfigError("no GWP entry for " + emsynth::to_string(gas) + " at horizon " +
                          std::to_string(horizon_years));
    }
    return it->second;
}

bool GwpTable::contains(Gas gas, int horizon_years) const
{
    return gas == Gas::CO2 || entries_.count({gas, horizon_years}) > 0;
}

GwpTable GwpTable::defaults()
{
    // IPCC AR5 (no climate-carbon feedbacks); matches the shipped gwp.csv.
    GwpTable table;
    table.set(Gas::CO2, 100, 1.0);
    table.set(Gas::CH4, 100, 28.0);
    table.set(Gas::N2O, 100, 265.0);
    table.set(Gas::CO2, 20, 1.0);
    table.set(Gas::CH4, 20, 84.0);
    table.set(Gas::N2O, 20, 264.0);
    return table;
}

PollutantPath Subsector::path_for(Gas gas) const
{
    if (!is_non_ghg(gas)) {
        throw DomainError("pollutant path queried for non-pollutant gas " + emsynth::to_string(gas));
    }
    auto it = pollutant_path.find(gas);
    if (it == pollutant_path.end()) {
        throw ConfigError("subsector " + id + " has no pollutant path for " + emsynth::to_string(gas));
    }
    return it->second;
}

bool Subsector::is_default_direct_subsector(const std::string& id)
{
    static const std::vector<std::string> direct{
        "electricity-generation",
        "oil-and-gas-refining",
        "road-transportation",
        "domestic-shipping",
        "international-shipping",
        "residential-onsite-fuel-usage",
        "non-residential-onsite-fuel-usage",
        "petrochemicals-steam-cracking",
        "cropland-fires",
    };
    for (const auto& d : direct) {
        if (id == d) {
            return true;
        }
    }
    return false;
}

Subsector Subsector::make(std::string id, std::string ipcc_sector, std::string profile_id)
{
    Subsector s;
    s.id = std::move(id);
    s.ipcc_sector = std::move(ipcc_sector);
    s.profile_id = std::move(profile_id);
    const auto path = is_default_direct_subsector(s.id) ? PollutantPath::direct
                                                        : PollutantPath::copollutant;
    for (Gas gas : non_ghg_gases()) {
        s.pollutant_path[gas] = path;
    }
    return s;
}

YearMonth YearMonth::from_index(int idx)
{
    YearMonth ym;
    // floor division, months can index before year 0 in principle
    int year = idx / 12;
    int rem = idx % 12;
    if (rem < 0) {
        rem += 12;
        year -= 1;
    }
    ym.year = year;
    ym.month = rem + 1;
    return ym;
}

std::string YearMonth::to_string() const
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

std::optional<YearMonth> YearMonth::parse(const std::string& text)
{
    int y = 0, m = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d-%d%c", &y, &m, &extra) != 2) {
        return std::nullopt;
    }
    if (m < 1 || m > 12) {
        return std::nullopt;
    }
    return YearMonth{y, m};
}

int months_between(YearMonth first, YearMonth last)
{
    if (first > last) {
        throw DomainError("month window start " + first.to_string() + " after end " + last.to_string());
    }
    return last.index() - first.index() + 1;
}

std::string Date::to_string() const
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::optional<Date> Date::parse(const std::string& text)
{
    int y = 0, m = 0, d = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3) {
        return std::nullopt;
    }
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) {
        return std::nullopt;
    }
    return Date{y, m, d};
}

bool is_leap_year(int year)
{
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month)
{
    static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) {
        return 29;
    }
    return days[month - 1];
}

namespace {

// Days since 0000-03-01, civil-calendar arithmetic.
long days_from_civil(int y, int m, int d)
{
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

}  // namespace

long day_difference(Date a, Date b)
{
    if (a > b) {
        throw DomainError("day span start " + a.to_string() + " after end " + b.to_string());
    }
    return days_from_civil(b.year, b.month, b.day) - days_from_civil(a.year, a.month, a.day);
}

std::string to_string(Granularity g)
{
    switch (g) {
    case Granularity::monthly: return "monthly";
    case Granularity::quarterly: return "quarterly";
    case Granularity::annual: return "annual";
    case Granularity::span: return "span";
    }
    return "?";
}

std::optional<Granularity> parse_granularity(const std::string& text)
{
    if (text == "monthly") return Granularity::monthly;
    if (text == "quarterly") return Granularity::quarterly;
    if (text == "annual") return Granularity::annual;
    if (text == "span") return Granularity::span;
    return std::nullopt;
}

Period Period::month(YearMonth ym)
{
    Period p;
    p.start = Date{ym.year, ym.month, 1};
    YearMonth next = ym.next();
    p.end = Date{next.year, next.month, 1};
    p.granularity = Granularity::monthly;
    return p;
}

Period Period::year(int y)
{
    Period p;
    p.start = Date{y, 1, 1};
    p.end = Date{y + 1, 1, 1};
    p.granularity = Granularity::annual;
    return p;
}

std::string to_string(Provenance p)
{
    switch (p) {
    case Provenance::reported: return "reported";
    case Provenance::modeled: return "modeled";
    case Provenance::disaggregated: return "disaggregated";
    case Provenance::remainder: return "remainder";
    case Provenance::imputed: return "imputed";
    }
    return "?";
}

std::optional<Provenance> parse_provenance(const std::string& text)
{
    if (text == "reported") return Provenance::reported;
    if (text == "modeled") return Provenance::modeled;
    if (text == "disaggregated") return Provenance::disaggregated;
    if (text == "remainder") return Provenance::remainder;
    if (text == "imputed") return Provenance::imputed;
    return std::nullopt;
}

std::string to_string(FillFlag flag)
{
    switch (flag) {
    case FillFlag::observed: return "observed";
    case FillFlag::zero_filled: return "zero_filled";
    case FillFlag::eq_constrained: return "eq_constrained";
    case FillFlag::backfilled: return "backfilled";
    case FillFlag::forwardfilled: return "forwardfilled";
    case FillFlag::country_avg: return "country_avg";
    case FillFlag::global_avg: return "global_avg";
    case FillFlag::profile_split: return "profile_split";
    case FillFlag::span_apportioned: return "span_apportioned";
    case FillFlag::month_extrapolated: return "month_extrapolated";
    }
    return "?";
}

std::string to_string(EfGranularity g)
{
    switch (g) {
    case EfGranularity::asset: return "asset";
    case EfGranularity::regional: return "regional";
    case EfGranularity::country: return "country";
    case EfGranularity::global: return "global";
    }
    return "?";
}

std::optional<EfGranularity> parse_ef_granularity(const std::string& text)
{
    if (text == "asset") return EfGranularity::asset;
    if (text == "regional") return EfGranularity::regional;
    if (text == "country") return EfGranularity::country;
    if (text == "global") return EfGranularity::global;
    return std::nullopt;
}

std::string to_string(ActivitySource s)
{
    switch (s) {
    case ActivitySource::reported: return "reported";
    case ActivitySource::satellite_modeled: return "satellite-modeled";
    case ActivitySource::proxy: return "proxy";
    case ActivitySource::imputed: return "imputed";
    }
    return "?";
}

std::optional<ActivitySource> parse_activity_source(const std::string& text)
{
    if (text == "reported") return ActivitySource::reported;
    if (text == "satellite-modeled") return ActivitySource::satellite_modeled;
    if (text == "proxy") return ActivitySource::proxy;
    if (text == "imputed") return ActivitySource::imputed;
    return std::nullopt;
}

double compute_activity(double capacity, double capacity_factor)
{
    if (capacity < 0.0) {
        throw DomainError("capacity must be nonnegative, got " + std::to_string(capacity));
    }
    if (capacity_factor < 0.0) {
        throw DomainError("capacity factor must be nonnegative, got " + std::to_string(capacity_factor));
    }
    return capacity * capacity_factor;
}

double compute_emissions(double activity, double emission_factor)
{
    if (activity < 0.0) {
        throw DomainError("activity must be nonnegative, got " + std::to_string(activity));
    }
    if (emission_factor < 0.0) {
        throw DomainError("emission factor must be nonnegative, got " + std::to_string(emission_factor));
    }
    return activity * emission_factor;
}

namespace {

double invert_product(double total, double a, double b, const char* missing)
{
    if (total < 0.0) {
        throw DomainError("emissions total must be nonnegative");
    }
    if (a < 0.0 || b < 0.0) {
        throw DomainError("known factors must be nonnegative");
    }
    if (total == 0.0) {
        return 0.0;
    }
    if (a == 0.0 || b == 0.0) {
        throw InconsistencyError(std::string("cannot infer ") + missing +
                                 ": a known factor is zero while the total is positive");
    }
    return total / (a * b);
}

}  // namespace

double infer_capacity(double total, double capacity_factor, double emission_factor)
{
    return invert_product(total, capacity_factor, emission_factor, "capacity");
}

double infer_capacity_factor(double total, double capacity, double emission_factor)
{
    return invert_product(total, capacity, emission_factor, "capacity factor");
}

double infer_emission_factor(double total, double capacity, double capacity_factor)
{
    return invert_product(total, capacity, capacity_factor, "emission factor");
}

double decompose_emissions(double total, const KnownFactors& known)
{
    const int known_count = static_cast<int>(known.capacity.has_value()) +
                            static_cast<int>(known.capacity_factor.has_value()) +
                            static_cast<int>(known.emission_factor.has_value());
    if (known_count != 2) {
        throw UsageError("decompose_emissions requires exactly two known factors, got " +
                         std::to_string(known_count));
    }
    if (!known.capacity.has_value()) {
        return infer_capacity(total, *known.capacity_factor, *known.emission_factor);
    }
    if (!known.capacity_factor.has_value()) {
        return infer_capacity_factor(total, *known.capacity, *known.emission_factor);
    }
    return infer_emission_factor(total, *known.capacity, *known.capacity_factor);
}

double to_co2e(const std::map<Gas, double>& amounts, const GwpTable& gwp, int horizon_years)
{
    double total = 0.0;
    for (const auto& [gas, tonnes] : amounts) {
        if (!is_greenhouse_gas(gas)) {
            throw ConfigError("to_co2e received non-greenhouse gas " + to_string(gas));
        }
        total += tonnes * gwp.factor(gas, horizon_years);
    }
    return total;
}

double cf_upper_bound(CfBoundMode mode)
{
    return mode == CfBoundMode::strict ? 1.0 : 1.5;
}

bool cf_within_bounds(double cf, CfBoundMode mode)
{
    return cf >= 0.0 && cf <= cf_upper_bound(mode);
}

}  // namespace emsynth
