#include "emsynth/aggregation.hpp"

#include "emsynth/csv.hpp"
#include "emsynth/quality.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

namespace emsynth {

std::string to_string(AdminLevel level)
{
    switch (level) {
    case AdminLevel::gadm0: return "gadm0";
    case AdminLevel::gadm1: return "gadm1";
    case AdminLevel::gadm2: return "gadm2";
    case AdminLevel::fua: return "fua";
    }
    return "?";
}

std::optional<AdminLevel> parse_admin_level(const std::string& text)
{
    if (text == "gadm0") return AdminLevel::gadm0;
    if (text == "gadm1") return AdminLevel::gadm1;
    if (text == "gadm2") return AdminLevel::gadm2;
    if (text == "fua") return AdminLevel::fua;
    return std::nullopt;
}

std::string unlocated_unit(const std::string& country)
{
    return country + ".unlocated";
}

void BoundaryIndex::add(const std::string& source, BoundaryEntry entry)
{
    entries_[source] = std::move(entry);
}

const BoundaryEntry* BoundaryIndex::find(const std::string& source) const
{
    auto it = entries_.find(source);
    return it == entries_.end() ? nullptr : &it->second;
}

Loaded<BoundaryIndex> load_boundaries(const std::string& path)
{
    Loaded<BoundaryIndex> result;
    CsvReader csv = CsvReader::from_file(path);
    if (!csv.has_column("id")) {
        result.errors.push_back(path + ": missing required column 'id'");
        return result;
    }
    for (size_t row = 0; row < csv.row_count(); ++row) {
        const std::string prefix = path + ":" + std::to_string(csv.line_number(row)) + ": ";
        const std::string id = csv.get(row, "id").value_or("");
        if (id.empty()) {
            result.errors.push_back(prefix + "empty id");
            continue;
        }
        if (result.value.find(id) != nullptr) {
            result.errors.push_back(prefix + "duplicate id '" + id + "'");
            continue;
        }
        BoundaryEntry entry;
        entry.gadm0 = csv.get(row, "gadm0").value_or("");
        entry.gadm1 = csv.get(row, "gadm1").value_or("");
        entry.gadm2 = csv.get(row, "gadm2").value_or("");
        if (auto fua = csv.get(row, "fua")) {
            for (auto& unit : split(*fua, ';')) {
                unit = trim(unit);
                if (!unit.empty()) {
                    entry.fuas.push_back(unit);
                }
            }
            std::sort(entry.fuas.begin(), entry.fuas.end());
        }
        result.value.add(id, std::move(entry));
    }
    return result;
}

std::vector<AdminUnit> derive_admin_units(const BoundaryIndex& index)
{
    std::map<std::pair<std::string, AdminLevel>, AdminUnit> units;
    auto put = [&](const std::string& id, AdminLevel level, const std::string& parent) {
        if (id.empty()) {
            return;
        }
        auto [it, inserted] = units.try_emplace({id, level});
        if (inserted) {
            it->second = AdminUnit{id, level, parent, {}};
        } else if (it->second.parent != parent) {
            throw DomainError("admin unit " + id + " appears under two parents: " +
                              it->second.parent + " and " + parent);
        }
    };
    index.for_each([&](const std::string& source, const BoundaryEntry& entry) {
        (void)source;
        if (!entry.gadm0.empty()) {
            put(entry.gadm0, AdminLevel::gadm0, "");
        }
        if (!entry.gadm1.empty()) {
            put(entry.gadm1, AdminLevel::gadm1, entry.gadm0);
        }
        if (!entry.gadm2.empty()) {
            put(entry.gadm2, AdminLevel::gadm2, entry.gadm1);
        }
        for (const auto& fua : entry.fuas) {
            put(fua, AdminLevel::fua, "");
        }
    });
    std::vector<AdminUnit> result;
    result.reserve(units.size());
    for (auto& [key, unit] : units) {
        result.push_back(std::move(unit));
    }
    return result;
}

std::vector<std::string> units_of(const EmissionRecord& record, AdminLevel level,
                                  const BoundaryIndex& index)
{
    if (record.country.empty()) {
        return {};
    }
    if (level == AdminLevel::gadm0) {
        return {record.country};
    }
    const BoundaryEntry* entry = index.find(record.source);
    if (level == AdminLevel::fua) {
        if (entry == nullptr) {
            return {};
        }
        return entry->fuas;
    }
    // country mismatches are treated as unlocated rather than silently
    // moving mass across countries
    if (entry != nullptr && (entry->gadm0.empty() || entry->gadm0 == record.country)) {
        const std::string& unit = level == AdminLevel::gadm1 ? entry->gadm1 : entry->gadm2;
        if (!unit.empty()) {
            return {unit};
        }
    }
    return {unlocated_unit(record.country)};
}

double RollupResult::total(Gas gas) const
{
    double sum = 0.0;
    for (const auto& [key, value] : rows) {
        if (key.gas == gas) {
            sum += value.tonnes;
        }
    }
    return sum;
}

RollupResult rollup(const std::vector<EmissionRecord>& records, AdminLevel level,
                    const BoundaryIndex& index, PeriodGranularity granularity)
{
    RollupResult result;
    std::map<RollupKey, std::vector<WeightedUncertainty>> uncertainty_parts;

    for (const auto& record : records) {
        if (record.country.empty()) {
            result.quarantined.push_back("record " + record.source + " (" + record.subsector +
                                         ", " + to_string(record.gas) + ") has no country");
            continue;
        }
        const auto units = units_of(record, level, index);
        for (const auto& unit : units) {
            RollupKey key;
            key.unit = unit;
            key.level = level;
            key.subsector = record.subsector;
            key.gas = record.gas;
            key.period = granularity == PeriodGranularity::annual
                             ? Period::year(record.period.start.year)
                             : record.period;
            key.provenance = record.provenance;

            auto& value = result.rows[key];
            if (value.tonnes == 0.0 && uncertainty_parts.count(key) == 0) {
                value.confidence = record.confidence;
            } else {
                value.confidence = std::min(value.confidence, record.confidence);
            }
            value.tonnes += record.tonnes;
            uncertainty_parts[key].push_back(
                {record.tonnes, record.uncertainty_pct.value_or(0.0)});
        }
    }
    for (auto& [key, value] : result.rows) {
        value.uncertainty_pct = combine_additive_uncertainty(uncertainty_parts[key]);
    }
    return result;
}

std::vector<std::pair<std::string, double>> rank_assets(const std::vector<EmissionRecord>& records,
                                                        const BoundaryIndex& index,
                                                        const RankOptions& options)
{
    if (!options.gas && options.gwp == nullptr) {
        throw UsageError("ranking by CO2e requires a GWP table");
    }
    std::map<std::string, double> totals;
    for (const auto& record : records) {
        if (options.subsector && record.subsector != *options.subsector) {
            continue;
        }
        if (options.period &&
            !options.period->contains({record.period.start.year, record.period.start.month})) {
            continue;
        }
        if (options.unit) {
            const auto units = units_of(record, options.level, index);
            if (std::find(units.begin(), units.end(), *options.unit) == units.end()) {
                continue;
            }
        }
        double contribution = 0.0;
        if (options.gas) {
            if (record.gas != *options.gas) {
                continue;
            }
            contribution = record.tonnes;
        } else {
            if (!is_greenhouse_gas(record.gas)) {
                continue;
            }
            contribution = record.tonnes * options.gwp->factor(record.gas, options.horizon_years);
        }
        totals[record.source] += contribution;
    }

    std::vector<std::pair<std::string, double>> ranked(totals.begin(), totals.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    return ranked;
}

MonthlySeries unit_timeseries(const std::vector<EmissionRecord>& records, const std::string& unit,
                              AdminLevel level, const BoundaryIndex& index, Gas gas,
                              MonthWindow window)
{
    MonthlySeries series(unit, gas, window);
    for (const auto& record : records) {
        if (record.gas != gas) {
            continue;
        }
        YearMonth ym{record.period.start.year, record.period.start.month};
        if (!window.contains(ym)) {
            continue;
        }
        const auto units = units_of(record, level, index);
        if (std::find(units.begin(), units.end(), unit) == units.end()) {
            continue;
        }
        series.accumulate(ym, record.tonnes, FillFlag::observed);
    }
    for (int i = 0; i < window.size(); ++i) {
        YearMonth ym = window.at(i);
        if (!series.has(ym)) {
            series.set(ym, 0.0, FillFlag::zero_filled);
        }
    }
    return series;
}

namespace {

void sort_rows(std::vector<InventoryRow>& rows)
{
    std::sort(rows.begin(), rows.end(), [](const InventoryRow& a, const InventoryRow& b) {
        return std::tie(a.level, a.unit_id, a.subsector, a.gas, a.period_start, a.period_end,
                        a.provenance) <
               std::tie(b.level, b.unit_id, b.subsector, b.gas, b.period_start, b.period_end,
                        b.provenance);
    });
}

}  // namespace

void write_inventory_csv(std::vector<InventoryRow> rows, const std::string& path,
                         const std::string& config_json)
{
    sort_rows(rows);
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    CsvWriter writer(out);
    if (!config_json.empty()) {
        writer.comment("config " + config_json);
    }
    writer.row({"unit_id", "level", "subsector", "gas", "period_start", "period_end", "tonnes",
                "provenance", "confidence"});
    for (const auto& row : rows) {
        writer.row({row.unit_id, row.level, row.subsector, to_string(row.gas),
                    row.period_start.to_string(), row.period_end.to_string(),
                    format_double(row.tonnes), to_string(row.provenance),
                    to_string(row.confidence)});
    }
}

void write_inventory_geojson(std::vector<InventoryRow> rows, const std::string& path,
                             const std::string& config_json)
{
    sort_rows(rows);
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    if (!config_json.empty()) {
        doc["run_config"] = nlohmann::ordered_json::parse(config_json);
    }
    auto& features = doc["features"];
    features = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json feature;
        feature["type"] = "Feature";
        if (row.lat && row.lon) {
            feature["geometry"] = {{"type", "Point"},
                                   {"coordinates", {*row.lon, *row.lat}}};
        } else {
            feature["geometry"] = nullptr;
        }
        auto& props = feature["properties"];
        props["unit_id"] = row.unit_id;
        props["level"] = row.level;
        props["subsector"] = row.subsector;
        props["gas"] = to_string(row.gas);
        props["period_start"] = row.period_start.to_string();
        props["period_end"] = row.period_end.to_string();
        props["tonnes"] = row.tonnes;
        props["provenance"] = to_string(row.provenance);
        props["confidence"] = to_string(row.confidence);
        features.push_back(std::move(feature));
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << doc.dump(2) << "\n";
}

std::optional<ExportFormat> parse_export_format(const std::string& text)
{
    if (text == "csv") return ExportFormat::csv;
    if (text == "geojson") return ExportFormat::geojson;
    return std::nullopt;
}

void export_inventory(std::vector<InventoryRow> rows, ExportFormat format,
                      const std::string& path, const std::string& config_json)
{
    switch (format) {
    case ExportFormat::csv:
        write_inventory_csv(std::move(rows), path, config_json);
        return;
    case ExportFormat::geojson:
        write_inventory_geojson(std::move(rows), path, config_json);
        return;
    }
    throw UsageError("unknown export format");
}

std::vector<InventoryRow> integralize_inventory(std::vector<InventoryRow> rows)
{
    std::map<std::tuple<std::string, std::string, Gas, Date, Date, Provenance>,
             std::vector<size_t>> groups;
    for (size_t i = 0; i < rows.size(); ++i) {
        const InventoryRow& row = rows[i];
        groups[{row.level, row.subsector, row.gas, row.period_start, row.period_end,
                row.provenance}]
            .push_back(i);
    }
    for (auto& [key, members] : groups) {
        // deterministic tie-breaking: apportion in ascending unit id order
        std::sort(members.begin(), members.end(),
                  [&](size_t a, size_t b) { return rows[a].unit_id < rows[b].unit_id; });
        double total = 0.0;
        std::vector<double> weights;
        weights.reserve(members.size());
        for (size_t i : members) {
            total += rows[i].tonnes;
            weights.push_back(rows[i].tonnes);
        }
        const long long integral_total = std::llround(total);
        if (integral_total == 0) {
            for (size_t i : members) {
                rows[i].tonnes = 0.0;
            }
            continue;
        }
        const auto shares = apportion_largest_remainder(integral_total, weights);
        for (size_t j = 0; j < members.size(); ++j) {
            rows[members[j]].tonnes = static_cast<double>(shares[j]);
        }
    }
    return rows;
}

Loaded<std::vector<InventoryRow>> read_inventory_csv(const std::string& path)
{
    Loaded<std::vector<InventoryRow>> result;
    CsvReader csv = CsvReader::from_file(path);
    for (const auto& required : {"unit_id", "level", "subsector", "gas", "period_start",
                                 "period_end", "tonnes", "provenance", "confidence"}) {
        if (!csv.has_column(required)) {
            result.errors.push_back(path + ": missing required column '" + std::string(required) + "'");
        }
    }
    if (!result.errors.empty()) {
        return result;
    }
    for (size_t row = 0; row < csv.row_count(); ++row) {
        const size_t line = csv.line_number(row);
        const std::string prefix = path + ":" + std::to_string(line) + ": ";
        try {
            InventoryRow r;
            r.unit_id = csv.get(row, "unit_id").value_or("");
            r.level = csv.get(row, "level").value_or("");
            r.subsector = csv.get(row, "subsector").value_or("");
            auto gas = parse_gas(csv.get(row, "gas").value_or(""));
            auto start = Date::parse(csv.get(row, "period_start").value_or(""));
            auto end = Date::parse(csv.get(row, "period_end").value_or(""));
            auto provenance = parse_provenance(csv.get(row, "provenance").value_or(""));
            auto confidence = parse_confidence(csv.get(row, "confidence").value_or(""));
            if (!gas || !start || !end || !provenance || !confidence) {
                result.errors.push_back(prefix + "malformed inventory row");
                continue;
            }
            r.gas = *gas;
            r.period_start = *start;
            r.period_end = *end;
            r.provenance = *provenance;
            r.confidence = *confidence;
            r.tonnes = parse_double_cell(csv.get(row, "tonnes").value_or(""), path, line, "tonnes");
            result.value.push_back(std::move(r));
        } catch (const Error& e) {
            result.errors.push_back(e.what());
        }
    }
    return result;
}

}  // namespace emsynth
