#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace emsynth {

// Base error with a coarse category so callers (and the CLI exit-code
// mapping) can distinguish bad data from bad configuration or bad usage.
class Error : public std::runtime_error {
public:
    enum class Kind { domain, unit, inconsistency, configuration, usage, io };

    Error(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(Kind::domain, msg) {}
};

class UnitError : public Error {
public:
    explicit UnitError(const std::string& msg) : Error(Kind::unit, msg) {}
};

class InconsistencyError : public Error {
public:
    explicit InconsistencyError(const std::string& msg) : Error(Kind::inconsistency, msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(Kind::configuration, msg) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(Kind::usage, msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(Kind::io, msg) {}
};

// Closed set of gas codes. CO2e codes are derived by GWP weighting and are
// never accepted in raw inputs.
enum class Gas : std::uint8_t {
    CO2,
    CH4,
    N2O,
    CO2e100,
    CO2e20,
    CO,
    OC,
    BC,
    VOC,
    PM2_5,
    NOx,
    NH3,
    SO2,
};

const std::vector<Gas>& all_gases();
const std::vector<Gas>& greenhouse_gases();     // CO2, CH4, N2O
const std::vector<Gas>& non_ghg_gases();        // CO..SO2
bool is_greenhouse_gas(Gas gas);
bool is_derived_gas(Gas gas);                   // CO2e100, CO2e20
bool is_non_ghg(Gas gas);

std::string to_string(Gas gas);
std::optional<Gas> parse_gas(const std::string& code);

// Qualitative confidence, totally ordered.
enum class ConfidenceLevel : std::uint8_t {
    very_low = 0,
    low      = 1,
    medium   = 2,
    high     = 3,
    very_high = 4,
};

std::string to_string(ConfidenceLevel level);
std::optional<ConfidenceLevel> parse_confidence(const std::string& text);

// Global-warming-potential factors keyed by (gas, horizon in years).
// GWP(CO2, h) is pinned to 1 for every horizon present in the table.
class GwpTable {
public:
    void set(Gas gas, int horizon_years, double factor);
    double factor(Gas gas, int horizon_years) const;  // throws ConfigError when absent
    bool contains(Gas gas, int horizon_years) const;
    const std::map<std::pair<Gas, int>, double>& entries() const { return entries_; }

    // Default 100-yr/20-yr table (IPCC AR5 values, see docs/formats.md).
    static GwpTable defaults();

private:
    std::map<std::pair<Gas, int>, double> entries_;
};

// Which estimation route a non-GHG gas takes for a subsector.
enum class PollutantPath : std::uint8_t { direct, copollutant };

struct Subsector {
    std::string id;
    std::string ipcc_sector;
    std::string profile_id;  // temporal profile key; empty -> uniform fallback
    // Defined for every non-GHG gas; defaults come from the direct-path
    // sector list (see Subsector::default_path_for).
    std::map<Gas, PollutantPath> pollutant_path;

    PollutantPath path_for(Gas gas) const;

    // Subsectors on the built-in direct list default every non-GHG gas to
    // the direct route; everything else defaults to the co-pollutant route.
    static bool is_default_direct_subsector(const std::string& id);
    static Subsector make(std::string id, std::string ipcc_sector = {}, std::string profile_id = {});
};

// Calendar month, the engine's native time step.
struct YearMonth {
    int year = 0;
    int month = 1;  // 1-12

    bool operator==(const YearMonth&) const = default;
    auto operator<=>(const YearMonth&) const = default;

    int index() const { return year * 12 + (month - 1); }
    static YearMonth from_index(int idx);
    YearMonth next() const { return from_index(index() + 1); }

    std::string to_string() const;                          // "2021-03"
    static std::optional<YearMonth> parse(const std::string& text);
};

// Number of months in [first, last], inclusive. first must not exceed last.
int months_between(YearMonth first, YearMonth last);

struct Date {
    int year = 0;
    int month = 1;
    int day = 1;

    bool operator==(const Date&) const = default;
    auto operator<=>(const Date&) const = default;

    std::string to_string() const;                          // ISO-8601
    static std::optional<Date> parse(const std::string& text);
};

bool is_leap_year(int year);
int days_in_month(int year, int month);
// Days from a to b; a <= b required. End-exclusive convention: the span
// [a, b) covers that many days.
long day_difference(Date a, Date b);

enum class Granularity : std::uint8_t { monthly, quarterly, annual, span };

std::string to_string(Granularity g);
std::optional<Granularity> parse_granularity(const std::string& text);

struct Period {
    Date start;
    Date end;  // end-exclusive
    Granularity granularity = Granularity::monthly;

    bool operator==(const Period&) const = default;

    static Period month(YearMonth ym);
    static Period year(int y);
};

enum class Provenance : std::uint8_t { reported, modeled, disaggregated, remainder, imputed };

std::string to_string(Provenance p);
std::optional<Provenance> parse_provenance(const std::string& text);

// What produced each month of a completed series.
enum class FillFlag : std::uint8_t {
    observed,
    zero_filled,
    eq_constrained,
    backfilled,
    forwardfilled,
    country_avg,
    global_avg,
    profile_split,
    span_apportioned,
    month_extrapolated,
};

std::string to_string(FillFlag flag);

// Where the emission factor used for an estimate came from, coarse to fine.
enum class EfGranularity : std::uint8_t { asset = 0, regional = 1, country = 2, global = 3 };
// How the activity behind an estimate was obtained.
enum class ActivitySource : std::uint8_t { reported = 0, satellite_modeled = 1, proxy = 2, imputed = 3 };

std::string to_string(EfGranularity g);
std::optional<EfGranularity> parse_ef_granularity(const std::string& text);
std::string to_string(ActivitySource s);
std::optional<ActivitySource> parse_activity_source(const std::string& text);

// One emitting facility.
struct Asset {
    std::string id;
    std::string subsector;
    std::string country;  // GADM level-0 code

    std::optional<double> lat;
    std::optional<double> lon;

    std::optional<double> capacity;          // subsector units per month
    std::optional<double> capacity_factor;   // dimensionless
    std::optional<double> economic_output;   // activity proxy, optional
    std::optional<std::string> fuel;         // co-pollutant ratio key, optional

    std::map<Gas, double> emission_factors;  // tonnes per activity unit

    bool scraped = false;
    bool emitting = true;
    bool intensive = false;  // quantity does not scale with time
    bool has_reported_emissions = false;

    EfGranularity ef_granularity = EfGranularity::asset;
    ActivitySource activity_source = ActivitySource::reported;

    // At most one reported observation per gas, all sharing one period.
    std::map<Gas, double> reported;  // tonnes over reported_period
    std::optional<Period> reported_period;

    bool located() const { return lat.has_value() && lon.has_value(); }
    bool operator==(const Asset&) const = default;
};

// A (source, subsector, gas, period) mass with provenance attached once at
// creation.
struct EmissionRecord {
    std::string source;  // asset id, admin-unit id or proxy cell id
    std::string subsector;
    std::string country;
    Gas gas = Gas::CO2;
    Period period;
    double tonnes = 0.0;
    Provenance provenance = Provenance::modeled;
    ConfidenceLevel confidence = ConfidenceLevel::medium;
    std::optional<double> uncertainty_pct;  // relative half-width, percent
    FillFlag fill = FillFlag::observed;
};

}  // namespace emsynth
