#include "emsynth/ingestion.hpp"

#include "emsynth/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace emsynth {

namespace {

// Column-name suffix <-> gas code for ef_* and reported_*_t columns.
const std::vector<std::pair<std::string, Gas>>& gas_column_suffixes()
{
    static const std::vector<std::pair<std::string, Gas>> suffixes{
        {"co2", Gas::CO2}, {"ch4", Gas::CH4}, {"n2o", Gas::N2O},
        {"co", Gas::CO},   {"oc", Gas::OC},   {"bc", Gas::BC},
        {"voc", Gas::VOC}, {"pm25", Gas::PM2_5}, {"nox", Gas::NOx},
        {"nh3", Gas::NH3}, {"so2", Gas::SO2},
    };
    return suffixes;
}

std::string gas_suffix(Gas gas)
{
    for (const auto& [suffix, g] : gas_column_suffixes()) {
        if (g == gas) {
            return suffix;
        }
    }
    return "?";
}

std::string row_prefix(const std::string& file, size_t line)
{
    return file + ":" + std::to_string(line) + ": ";
}

void warn_unknown_columns(const CsvReader& csv, const std::set<std::string>& known,
                          std::vector<std::string>& warnings)
{
    for (const auto& column : csv.header()) {
        if (known.count(column) == 0) {
            warnings.push_back(csv.name() + ": ignoring unknown column '" + column + "'");
        }
    }
}

// Reported periods must line up with their declared granularity so monthly
// placement is unambiguous. Spans may use any day bounds.
std::optional<std::string> period_alignment_error(Date start, Date end, Granularity granularity)
{
    auto is_month_start = [](Date d) { return d.day == 1; };
    auto months_apart = [](Date a, Date b) {
        return (b.year * 12 + b.month) - (a.year * 12 + a.month);
    };
    switch (granularity) {
    case Granularity::monthly:
        if (!is_month_start(start) || !is_month_start(end) || months_apart(start, end) != 1) {
            return "monthly period must cover exactly one calendar month";
        }
        return std::nullopt;
    case Granularity::quarterly:
        if (!is_month_start(start) || !is_month_start(end) || months_apart(start, end) != 3 ||
            (start.month - 1) % 3 != 0) {
            return "quarterly period must cover exactly one calendar quarter";
        }
        return std::nullopt;
    case Granularity::annual:
        if (start.month != 1 || start.day != 1 || end.month != 1 || end.day != 1 ||
            end.year != start.year + 1) {
            return "annual period must cover exactly one calendar year";
        }
        return std::nullopt;
    case Granularity::span:
        return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

void AssetRegistry::add(Asset asset)
{
    auto it = std::lower_bound(assets_.begin(), assets_.end(), asset.id,
                               [](const Asset& a, const std::string& id) { return a.id < id; });
    assets_.insert(it, std::move(asset));
}

const Asset* AssetRegistry::find(const std::string& id) const
{
    auto it = std::lower_bound(assets_.begin(), assets_.end(), id,
                               [](const Asset& a, const std::string& i) { return a.id < i; });
    if (it != assets_.end() && it->id == id) {
        return &*it;
    }
    return nullptr;
}

std::vector<const Asset*> AssetRegistry::by_subsector(const std::string& subsector) const
{
    std::vector<const Asset*> result;
    for (const auto& asset : assets_) {
        if (asset.subsector == subsector) {
            result.push_back(&asset);
        }
    }
    return result;
}

std::vector<const Asset*> AssetRegistry::by_country(const std::string& country) const
{
    std::vector<const Asset*> result;
    for (const auto& asset : assets_) {
        if (asset.country == country) {
            result.push_back(&asset);
        }
    }
    return result;
}

std::vector<const Asset*> AssetRegistry::by_country_subsector(const std::string& country,
                                                              const std::string& subsector) const
{
    std::vector<const Asset*> result;
    for (const auto& asset : assets_) {
        if (asset.country == country && asset.subsector == subsector) {
            result.push_back(&asset);
        }
    }
    return result;
}

bool CountryTotalTable::add(const CountryTotalKey& key, CountryTotal total)
{
    return rows_.emplace(key, std::move(total)).second;
}

const CountryTotal* CountryTotalTable::find(const CountryTotalKey& key) const
{
    auto it = rows_.find(key);
    return it == rows_.end() ? nullptr : &it->second;
}

void ProxySurfaceTable::add(const std::string& subsector, const std::string& country,
                            ProxyCell cell)
{
    auto& cells = surfaces_[{subsector, country}];
    auto it = std::lower_bound(cells.begin(), cells.end(), cell.cell,
                               [](const ProxyCell& c, const std::string& id) { return c.cell < id; });
    cells.insert(it, std::move(cell));
}

const std::vector<ProxyCell>* ProxySurfaceTable::find(const std::string& subsector,
                                                      const std::string& country) const
{
    auto it = surfaces_.find({subsector, country});
    return it == surfaces_.end() ? nullptr : &it->second;
}

bool ProxySurfaceTable::proxy_empty(const std::string& subsector, const std::string& country) const
{
    const auto* cells = find(subsector, country);
    if (cells == nullptr) {
        return false;
    }
    double sum = 0.0;
    for (const auto& cell : *cells) {
        sum += cell.weight;
    }
    return sum <= 0.0;
}

TemporalProfile TemporalProfile::uniform(std::string id)
{
    TemporalProfile p;
    p.id = std::move(id);
    p.weights.fill(1.0 / 12.0);
    return p;
}

void TemporalProfileSet::add(TemporalProfile profile)
{
    profiles_[profile.id] = std::move(profile);
}

const TemporalProfile* TemporalProfileSet::find(const std::string& id) const
{
    auto it = profiles_.find(id);
    return it == profiles_.end() ? nullptr : &it->second;
}

Loaded<AssetRegistry> load_asset_registry(const std::string& path,
                                          const SubsectorRegistry& subsectors,
                                          CfBoundMode cf_mode)
{
    Loaded<AssetRegistry> result;
    CsvReader csv = CsvReader::from_file(path);

    std::set<std::string> known{"id", "subsector", "country", "lat", "lon",
                                "capacity", "capacity_factor", "fuel", "economic_output",
                                "intensive", "scraped", "emitting",
                                "activity_source", "ef_granularity",
                                "reported_start", "reported_end", "reported_granularity"};
    for (const auto& [suffix, gas] : gas_column_suffixes()) {
        known.insert("ef_" + suffix);
        if (is_greenhouse_gas(gas)) {
            known.insert("reported_" + suffix + "_t");
        }
    }
    warn_unknown_columns(csv, known, result.warnings);

    for (const auto& required : {"id", "subsector", "country"}) {
        if (!csv.has_column(required)) {
            result.errors.push_back(path + ": missing required column '" + std::string(required) + "'");
        }
    }
    if (!result.errors.empty()) {
        return result;
    }
    if (csv.row_count() == 0) {
        result.warnings.push_back(path + ": no asset rows");
        return result;
    }

    std::set<std::string> seen_ids;
    for (size_t row = 0; row < csv.row_count(); ++row) {
        const size_t line = csv.line_number(row);
        const std::string prefix = row_prefix(path, line);
        size_t errors_before = result.errors.size();
        Asset asset;
        try {
            asset.id = csv.get(row, "id").value_or("");
            asset.subsector = csv.get(row, "subsector").value_or("");
            asset.country = csv.get(row, "country").value_or("");
            if (asset.id.empty()) {
                result.errors.push_back(prefix + "empty asset id");
            } else if (!seen_ids.insert(asset.id).second) {
                result.errors.push_back(prefix + "duplicate asset id '" + asset.id + "'");
            }
            if (asset.country.empty()) {
                result.errors.push_back(prefix + "empty country");
            }
            if (subsectors.count(asset.subsector) == 0) {
                result.errors.push_back(prefix + "unknown subsector '" + asset.subsector + "'");
            }

            auto lat = csv.get(row, "lat");
            auto lon = csv.get(row, "lon");
            if (lat.has_value() != lon.has_value()) {
                result.errors.push_back(prefix + "lat and lon must both be present or both absent");
            } else if (lat) {
                asset.lat = parse_double_cell(*lat, path, line, "lat");
                asset.lon = parse_double_cell(*lon, path, line, "lon");
                if (*asset.lat < -90.0 || *asset.lat > 90.0) {
                    result.errors.push_back(prefix + "latitude out of range: " + *lat);
                }
                if (*asset.lon < -180.0 || *asset.lon > 180.0) {
                    result.errors.push_back(prefix + "longitude out of range: " + *lon);
                }
            }

            if (auto v = csv.get(row, "capacity")) {
                asset.capacity = parse_double_cell(*v, path, line, "capacity");
                if (*asset.capacity < 0.0) {
                    result.errors.push_back(prefix + "negative capacity");
                }
            }
            if (auto v = csv.get(row, "capacity_factor")) {
                asset.capacity_factor = parse_double_cell(*v, path, line, "capacity_factor");
                if (!cf_within_bounds(*asset.capacity_factor, cf_mode)) {
                    result.errors.push_back(prefix + "capacity factor " + *v + " outside [0, " +
                                            format_double(cf_upper_bound(cf_mode)) + "]");
                }
            }
            if (auto v = csv.get(row, "economic_output")) {
                asset.economic_output = parse_double_cell(*v, path, line, "economic_output");
                if (*asset.economic_output < 0.0) {
                    result.errors.push_back(prefix + "negative economic_output");
                }
            }
            if (auto v = csv.get(row, "fuel")) {
                asset.fuel = *v;
            }
            if (auto v = csv.get(row, "intensive")) {
                asset.intensive = parse_bool_cell(*v, path, line, "intensive");
            }
            if (auto v = csv.get(row, "scraped")) {
                asset.scraped = parse_bool_cell(*v, path, line, "scraped");
            }
            if (auto v = csv.get(row, "emitting")) {
                asset.emitting = parse_bool_cell(*v, path, line, "emitting");
            }
            if (auto v = csv.get(row, "activity_source")) {
                auto parsed = parse_activity_source(*v);
                if (!parsed) {
                    result.errors.push_back(prefix + "invalid activity_source '" + *v + "'");
                } else {
                    asset.activity_source = *parsed;
                }
            }
            if (auto v = csv.get(row, "ef_granularity")) {
                auto parsed = parse_ef_granularity(*v);
                if (!parsed) {
                    result.errors.push_back(prefix + "invalid ef_granularity '" + *v + "'");
                } else {
                    asset.ef_granularity = *parsed;
                }
            }

            for (const auto& [suffix, gas] : gas_column_suffixes()) {
                if (auto v = csv.get(row, "ef_" + suffix)) {
                    double ef = parse_double_cell(*v, path, line, "ef_" + suffix);
                    if (ef < 0.0) {
                        result.errors.push_back(prefix + "negative emission factor ef_" + suffix);
                    } else {
                        asset.emission_factors[gas] = ef;
                    }
                }
            }

            for (Gas gas : greenhouse_gases()) {
                const std::string column = "reported_" + gas_suffix(gas) + "_t";
                if (auto v = csv.get(row, column)) {
                    double tonnes = parse_double_cell(*v, path, line, column);
                    if (tonnes < 0.0) {
                        result.errors.push_back(prefix + "negative reported amount in " + column);
                    } else {
                        asset.reported[gas] = tonnes;
                    }
                }
            }
            if (!asset.reported.empty()) {
                asset.has_reported_emissions = true;
                auto start_text = csv.get(row, "reported_start");
                auto end_text = csv.get(row, "reported_end");
                auto gran_text = csv.get(row, "reported_granularity");
                if (!start_text || !end_text || !gran_text) {
                    result.errors.push_back(prefix +
                                            "reported amounts require reported_start, reported_end "
                                            "and reported_granularity");
                } else {
                    auto start = Date::parse(*start_text);
                    auto end = Date::parse(*end_text);
                    auto gran = parse_granularity(*gran_text);
                    if (!start) {
                        result.errors.push_back(prefix + "invalid reported_start '" + *start_text + "'");
                    }
                    if (!end) {
                        result.errors.push_back(prefix + "invalid reported_end '" + *end_text + "'");
                    }
                    if (!gran) {
                        result.errors.push_back(prefix + "invalid reported_granularity '" + *gran_text + "'");
                    }
                    if (start && end && gran) {
                        if (!(*start < *end)) {
                            result.errors.push_back(prefix + "reported period start must precede end");
                        } else if (auto misaligned = period_alignment_error(*start, *end, *gran)) {
                            result.errors.push_back(prefix + *misaligned);
                        } else {
                            asset.reported_period = Period{*start, *end, *gran};
                        }
                    }
                }
            }
        } catch (const Error& e) {
            result.errors.push_back(e.what());
        }
        if (result.errors.size() == errors_before) {
            result.value.add(std::move(asset));
        }
    }
    return result;
}

Loaded<CountryTotalTable> load_country_totals(const std::string& path,
                                              const SubsectorRegistry& subsectors)
{
    Loaded<CountryTotalTable> result;
    CsvReader csv = CsvReader::from_file(path);
    warn_unknown_columns(csv, {"country", "subsector", "gas", "year", "tonnes", "source"},
                         result.warnings);
    for (const auto& required : {"country", "subsector", "gas", "year", "tonnes"}) {
        if (!csv.has_column(required)) {
            result.errors.push_back(path + ": missing required column '" + std::string(required) + "'");
        }
    }
    if (!result.errors.empty()) {
        return result;
    }
    if (csv.row_count() == 0) {
        result.warnings.push_back(path + ": no reference totals");
    }

    for (size_t row = 0; row < csv.row_count(); ++row) {
        const size_t line = csv.line_number(row);
        const std::string prefix = row_prefix(path, line);
        try {
            CountryTotalKey key;
            key.country = csv.get(row, "country").value_or("");
            key.subsector = csv.get(row, "subsector").value_or("");
            const std::string gas_text = csv.get(row, "gas").value_or("");
            auto gas = parse_gas(gas_text);
            if (!gas) {
                result.errors.push_back(prefix + "unknown gas '" + gas_text + "'");
                continue;
            }
            if (is_derived_gas(*gas)) {
                result.errors.push_back(prefix + "derived gas " + gas_text +
                                        " cannot be ingested as a reference total");
                continue;
            }
            if (!is_greenhouse_gas(*gas)) {
                result.errors.push_back(prefix + "non-GHG reference totals are not accepted (gas " +
                                        gas_text + "); pollutant reference data belongs in the "
                                        "co-pollutant reference tables");
                continue;
            }
            key.gas = *gas;
            key.year = parse_int_cell(csv.get(row, "year").value_or(""), path, line, "year");
            if (key.country.empty() || key.subsector.empty()) {
                result.errors.push_back(prefix + "empty country or subsector");
                continue;
            }
            if (subsectors.count(key.subsector) == 0) {
                result.errors.push_back(prefix + "unknown subsector '" + key.subsector + "'");
                continue;
            }
            CountryTotal total;
            total.tonnes = parse_double_cell(csv.get(row, "tonnes").value_or(""), path, line, "tonnes");
            if (total.tonnes < 0.0) {
                result.errors.push_back(prefix + "negative tonnes");
                continue;
            }
            total.source = csv.get(row, "source").value_or("");
            if (!result.value.add(key, std::move(total))) {
                result.errors.push_back(prefix + "duplicate key (" + key.country + ", " +
                                        key.subsector + ", " + to_string(key.gas) + ", " +
                                        std::to_string(key.year) + ")");
            }
        } catch (const Error& e) {
            result.errors.push_back(e.what());
        }
    }
    return result;
}

Loaded<ProxySurfaceTable> load_proxy_surface(const std::string& path)
{
    Loaded<ProxySurfaceTable> result;
    CsvReader csv = CsvReader::from_file(path);
    warn_unknown_columns(csv, {"subsector", "country", "cell", "weight"}, result.warnings);
    for (const auto& required : {"subsector", "country", "cell", "weight"}) {
        if (!csv.has_column(required)) {
            result.errors.push_back(path + ": missing required column '" + std::string(required) + "'");
        }
    }
    if (!result.errors.empty()) {
        return result;
    }

    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (size_t row = 0; row < csv.row_count(); ++row) {
        const size_t line = csv.line_number(row);
        const std::string prefix = row_prefix(path, line);
        try {
            const std::string subsector = csv.get(row, "subsector").value_or("");
            const std::string country = csv.get(row, "country").value_or("");
            ProxyCell cell;
            cell.cell = csv.get(row, "cell").value_or("");
            cell.weight = parse_double_cell(csv.get(row, "weight").value_or(""), path, line, "weight");
            if (subsector.empty() || country.empty() || cell.cell.empty()) {
                result.errors.push_back(prefix + "empty subsector, country or cell");
                continue;
            }
            if (cell.weight < 0.0) {
                result.errors.push_back(prefix + "negative proxy weight");
                continue;
            }
            if (!seen.insert({subsector, country, cell.cell}).second) {
                result.errors.push_back(prefix + "duplicate proxy cell (" + subsector + ", " +
                                        country + ", " + cell.cell + ")");
                continue;
            }
            result.value.add(subsector, country, std::move(cell));
        } catch (const Error& e) {
            result.errors.push_back(e.what());
        }
    }

    for (const auto& [key, cells] : result.value.surfaces()) {
        double sum = 0.0;
        for (const auto& cell : cells) {
            sum += cell.weight;
        }
        if (sum <= 0.0) {
            result.warnings.push_back(path + ": proxy surface (" + key.first + ", " + key.second +
                                      ") has zero total weight; flagged proxy-empty");
        }
    }
    return result;
}

Loaded<TemporalProfileSet> load_profiles(const std::string& path)
{
    Loaded<TemporalProfileSet> result;
    CsvReader csv = CsvReader::from_file(path);

    std::set<std::string> known{"profile"};
    std::vector<std::string> month_columns;
    for (int m = 1; m <= 12; ++m) {
        month_columns.push_back("m" + std::to_string(m));
        known.insert(month_columns.back());
    }
    warn_unknown_columns(csv, known, result.warnings);
    for (const auto& column : month_columns) {
        if (!csv.has_column(column)) {
            result.errors.push_back(path + ": missing month column '" + column + "'");
        }
    }
    if (!csv.has_column("profile")) {
        result.errors.push_back(path + ": missing required column 'profile'");
    }
    if (!result.errors.empty()) {
        return result;
    }

    constexpr double kSumTolerance = 1e-6;
    for (size_t row = 0; row < csv.row_count(); ++row) {
        const size_t line = csv.line_number(row);
        const std::string prefix = row_prefix(path, line);
        try {
            TemporalProfile profile;
            profile.id = csv.get(row, "profile").value_or("");
            if (profile.id.empty()) {
                result.errors.push_back(prefix + "empty profile id");
                continue;
            }
            if (result.value.find(profile.id) != nullptr) {
                result.errors.push_back(prefix + "duplicate profile '" + profile.id + "'");
                continue;
            }
            double sum = 0.0;
            bool bad = false;
            for (int m = 0; m < 12; ++m) {
                double w = parse_double_cell(csv.get(row, month_columns[m]).value_or(""), path,
                                             line, month_columns[m]);
                if (w < 0.0) {
                    result.errors.push_back(prefix + "negative weight in " + month_columns[m]);
                    bad = true;
                    break;
                }
                profile.weights[m] = w;
                sum += w;
            }
            if (bad) {
                continue;
            }
            if (sum <= 0.0) {
                result.errors.push_back(prefix + "profile '" + profile.id + "' is all zero");
                continue;
            }
            if (std::abs(sum - 1.0) > kSumTolerance) {
                result.errors.push_back(prefix + "profile '" + profile.id + "' weights sum to " +
                                        format_double(sum) + ", outside 1 +/- 1e-6");
                continue;
            }
            if (sum != 1.0) {
                for (auto& w : profile.weights) {
                    w /= sum;
                }
            }
            result.value.add(std::move(profile));
        } catch (const Error& e) {
            result.errors.push_back(e.what());
        }
    }
    return result;
}

Loaded<GwpTable> load_gwp_table(const std::string& path)
{
    Loaded<GwpTable> result;
    CsvReader csv = CsvReader::from_file(path);
    warn_unknown_columns(csv, {"gas", "horizon_years", "factor"}, result.warnings);
    for (const auto& required : {"gas", "horizon_years", "factor"}) {
        if (!csv.has_column(required)) {
            result.errors.push_back(path + ": missing required column '" + std::string(required) + "'");
        }
    }
    if (!result.errors.empty()) {
        return result;
    }

    for (size_t row = 0; row < csv.row_count(); ++row) {
        const size_t line = csv.line_number(row);
        const std::string prefix = row_prefix(path, line);
        try {
            const std::string gas_text = csv.get(row, "gas").value_or("");
            auto gas = parse_gas(gas_text);
            if (!gas) {
                result.errors.push_back(prefix + "unknown gas '" + gas_text + "'");
                continue;
            }
            int horizon = parse_int_cell(csv.get(row, "horizon_years").value_or(""), path, line,
                                         "horizon_years");
            double factor = parse_double_cell(csv.get(row, "factor").value_or(""), path, line,
                                              "factor");
            result.value.set(*gas, horizon, factor);
        } catch (const Error& e) {
            result.errors.push_back(prefix + e.what());
        }
    }
    return result;
}

void export_asset_registry(const AssetRegistry& registry, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    CsvWriter writer(out);

    std::vector<std::string> header{"id", "subsector", "country", "lat", "lon",
                                    "capacity", "capacity_factor", "fuel", "economic_output",
                                    "intensive", "scraped", "emitting",
                                    "activity_source", "ef_granularity"};
    std::vector<std::pair<std::string, Gas>> ef_columns;
    for (const auto& [suffix, gas] : gas_column_suffixes()) {
        ef_columns.emplace_back("ef_" + suffix, gas);
        header.push_back(ef_columns.back().first);
    }
    std::vector<std::pair<std::string, Gas>> reported_columns;
    for (Gas gas : greenhouse_gases()) {
        reported_columns.emplace_back("reported_" + gas_suffix(gas) + "_t", gas);
        header.push_back(reported_columns.back().first);
    }
    header.push_back("reported_start");
    header.push_back("reported_end");
    header.push_back("reported_granularity");
    writer.row(header);

    auto opt_num = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    for (const auto& asset : registry.assets()) {
        std::vector<std::string> cells{
            asset.id, asset.subsector, asset.country,
            opt_num(asset.lat), opt_num(asset.lon),
            opt_num(asset.capacity), opt_num(asset.capacity_factor),
            asset.fuel.value_or(""), opt_num(asset.economic_output),
            asset.intensive ? "true" : "false",
            asset.scraped ? "true" : "false",
            asset.emitting ? "true" : "false",
            to_string(asset.activity_source), to_string(asset.ef_granularity)};
        for (const auto& [column, gas] : ef_columns) {
            auto it = asset.emission_factors.find(gas);
            cells.push_back(it == asset.emission_factors.end() ? "" : format_double(it->second));
        }
        for (const auto& [column, gas] : reported_columns) {
            auto it = asset.reported.find(gas);
            cells.push_back(it == asset.reported.end() ? "" : format_double(it->second));
        }
        if (asset.reported_period) {
            cells.push_back(asset.reported_period->start.to_string());
            cells.push_back(asset.reported_period->end.to_string());
            cells.push_back(to_string(asset.reported_period->granularity));
        } else {
            cells.push_back("");
            cells.push_back("");
            cells.push_back("");
        }
        writer.row(cells);
    }
}

size_t ValidationReport::error_count() const
{
    size_t count = 0;
    for (const auto& finding : findings) {
        if (finding.severity == ValidationFinding::Severity::error) {
            ++count;
        }
    }
    return count;
}

ValidationReport validate_inputs(const AssetRegistry& registry,
                                 const CountryTotalTable& totals,
                                 const ProxySurfaceTable& proxies,
                                 const TemporalProfileSet& profiles,
                                 const SubsectorRegistry& subsectors)
{
    ValidationReport report;

    // Totals that neither an asset nor a proxy cell can absorb.
    std::set<std::pair<std::string, std::string>> seen_pairs;
    for (const auto& [key, total] : totals.rows()) {
        if (!seen_pairs.insert({key.country, key.subsector}).second) {
            continue;
        }
        const bool has_assets = !registry.by_country_subsector(key.country, key.subsector).empty();
        const auto* cells = proxies.find(key.subsector, key.country);
        const bool has_proxy = cells != nullptr && !proxies.proxy_empty(key.subsector, key.country);
        if (!has_assets && !has_proxy) {
            report.findings.push_back(
                {ValidationFinding::Severity::warning, "unallocatable",
                 "reference total for (" + key.country + ", " + key.subsector +
                     ") has no assets and no proxy surface; any remainder will be parked at "
                     "country level"});
        }
    }

    // Subsectors whose profile is missing: they fall back to uniform.
    for (const auto& [id, subsector] : subsectors) {
        if (subsector.profile_id.empty() || profiles.find(subsector.profile_id) == nullptr) {
            report.findings.push_back(
                {ValidationFinding::Severity::warning, "uniform_fallback",
                 "subsector " + id + " has no temporal profile; uniform split will be used"});
        }
    }

    return report;
}

}  // namespace emsynth
