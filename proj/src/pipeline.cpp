#include "emsynth/pipeline.hpp"

#include "emsynth/csv.hpp"
#include "emsynth/log.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

namespace emsynth {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& work)
{
    if (jobs <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) {
            work(i);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const size_t worker_count = std::min<size_t>(static_cast<size_t>(jobs), count);
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (size_t w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& worker : workers) {
        worker.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

std::string resolve_path(const std::string& base_dir, const std::string& path)
{
    if (path.empty()) {
        return path;
    }
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) {
        return path;
    }
    return (fs::path(base_dir) / p).lexically_normal().string();
}

std::string gas_code(Gas gas)
{
    return to_string(gas);
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path);
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text, fs::path(path).parent_path().string());
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& base_dir)
{
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig config;
    if (!doc.contains("inputs") || !doc.at("inputs").is_object()) {
        throw ConfigError("config must declare an 'inputs' object");
    }
    const auto& inputs = doc.at("inputs");
    auto path_of = [&](const char* key, bool required) -> std::string {
        if (!inputs.contains(key)) {
            if (required) {
                throw ConfigError(std::string("config inputs missing '") + key + "'");
            }
            return {};
        }
        return resolve_path(base_dir, inputs.at(key).get<std::string>());
    };
    config.assets_path = path_of("assets", true);
    config.country_totals_path = path_of("country_totals", true);
    config.proxy_path = path_of("proxy", true);
    config.profiles_path = path_of("profiles", true);
    config.gwp_path = path_of("gwp", false);
    config.boundaries_path = path_of("boundaries", true);
    config.reference_pollutants_path = path_of("reference_pollutants", false);
    config.reference_ghg_path = path_of("reference_ghg", false);
    config.reference_pollutants_secondary_path = path_of("reference_pollutants_secondary", false);
    config.reference_ghg_secondary_path = path_of("reference_ghg_secondary", false);
    config.rubric_path = path_of("rubric", false);

    if (doc.contains("window")) {
        const auto& window = doc.at("window");
        if (window.contains("start")) {
            auto start = YearMonth::parse(window.at("start").get<std::string>());
            if (!start) {
                throw ConfigError("invalid window start");
            }
            config.window_start = *start;
        }
        if (window.contains("end")) {
            auto end = YearMonth::parse(window.at("end").get<std::string>());
            if (!end) {
                throw ConfigError("invalid window end");
            }
            config.window_end = *end;
        }
    }
    if (config.window_end && *config.window_end < config.window_start) {
        throw ConfigError("window end precedes window start");
    }

    config.horizon_years = doc.value("horizon_years", 100);
    if (config.horizon_years != 100 && config.horizon_years != 20) {
        throw ConfigError("horizon_years must be 100 or 20");
    }
    const std::string cf_mode = doc.value("cf_bound_mode", std::string("strict"));
    if (cf_mode == "strict") {
        config.cf_mode = CfBoundMode::strict;
    } else if (cf_mode == "extended") {
        config.cf_mode = CfBoundMode::extended;
    } else {
        throw ConfigError("cf_bound_mode must be 'strict' or 'extended'");
    }

    if (!doc.contains("subsectors") || !doc.at("subsectors").is_array() ||
        doc.at("subsectors").empty()) {
        throw ConfigError("config must declare at least one subsector");
    }
    for (const auto& item : doc.at("subsectors")) {
        Subsector s = Subsector::make(item.at("id").get<std::string>(),
                                      item.value("ipcc_sector", std::string()),
                                      item.value("profile", std::string()));
        if (item.contains("direct_gases")) {
            for (Gas gas : non_ghg_gases()) {
                s.pollutant_path[gas] = PollutantPath::copollutant;
            }
            for (const auto& code : item.at("direct_gases")) {
                auto gas = parse_gas(code.get<std::string>());
                if (!gas || !is_non_ghg(*gas)) {
                    throw ConfigError("direct_gases entries must be non-GHG gas codes");
                }
                s.pollutant_path[*gas] = PollutantPath::direct;
            }
        }
        if (config.subsectors.count(s.id) > 0) {
            throw ConfigError("duplicate subsector '" + s.id + "'");
        }
        config.subsectors.emplace(s.id, std::move(s));
    }

    if (doc.contains("pollutant_gases")) {
        for (const auto& code : doc.at("pollutant_gases")) {
            auto gas = parse_gas(code.get<std::string>());
            if (!gas || !is_non_ghg(*gas)) {
                throw ConfigError("pollutant_gases entries must be non-GHG gas codes");
            }
            config.pollutant_gases.push_back(*gas);
        }
    } else {
        config.pollutant_gases = non_ghg_gases();
    }

    if (doc.contains("uncertainty")) {
        const auto& u = doc.at("uncertainty");
        config.uncertainty.capacity_pct = u.value("capacity_pct", config.uncertainty.capacity_pct);
        config.uncertainty.capacity_factor_pct =
            u.value("capacity_factor_pct", config.uncertainty.capacity_factor_pct);
        config.uncertainty.ef_pct = u.value("ef_pct", config.uncertainty.ef_pct);
        config.uncertainty.reported_pct = u.value("reported_pct", config.uncertainty.reported_pct);
        config.uncertainty.allocated_pct = u.value("allocated_pct", config.uncertainty.allocated_pct);
        config.uncertainty.remainder_pct = u.value("remainder_pct", config.uncertainty.remainder_pct);
        config.uncertainty.imputed_pct = u.value("imputed_pct", config.uncertainty.imputed_pct);
        config.uncertainty.ratio_pct = u.value("ratio_pct", config.uncertainty.ratio_pct);
    }

    if (doc.contains("implicit")) {
        for (const auto& item : doc.at("implicit")) {
            ImplicitRule rule;
            rule.broad_subsector = item.at("broad_subsector").get<std::string>();
            rule.target_subsector = item.at("target_subsector").get<std::string>();
            for (const auto& covered : item.at("covered")) {
                rule.covered.push_back(covered.get<std::string>());
            }
            if (config.subsectors.count(rule.target_subsector) == 0) {
                throw ConfigError("implicit rule targets unknown subsector '" +
                                  rule.target_subsector + "'");
            }
            config.implicit_rules.push_back(std::move(rule));
        }
    }

    if (doc.contains("export_formats")) {
        config.export_formats.clear();
        for (const auto& item : doc.at("export_formats")) {
            auto format = parse_export_format(item.get<std::string>());
            if (!format) {
                throw UsageError("unknown export format '" + item.get<std::string>() + "'");
            }
            config.export_formats.push_back(*format);
        }
    }

    config.jobs = doc.value("jobs", 1);
    if (config.jobs < 1) {
        throw ConfigError("jobs must be >= 1");
    }
    config.change_threshold_pct = doc.value("change_threshold_pct", 1.0);
    return config;
}

std::string RunConfig::to_json() const
{
    ordered_json doc;
    auto& inputs = doc["inputs"];
    inputs["assets"] = assets_path;
    inputs["country_totals"] = country_totals_path;
    inputs["proxy"] = proxy_path;
    inputs["profiles"] = profiles_path;
    if (!gwp_path.empty()) inputs["gwp"] = gwp_path;
    inputs["boundaries"] = boundaries_path;
    if (!reference_pollutants_path.empty()) inputs["reference_pollutants"] = reference_pollutants_path;
    if (!reference_ghg_path.empty()) inputs["reference_ghg"] = reference_ghg_path;
    if (!reference_pollutants_secondary_path.empty()) {
        inputs["reference_pollutants_secondary"] = reference_pollutants_secondary_path;
    }
    if (!reference_ghg_secondary_path.empty()) {
        inputs["reference_ghg_secondary"] = reference_ghg_secondary_path;
    }
    if (!rubric_path.empty()) inputs["rubric"] = rubric_path;

    doc["window"]["start"] = window_start.to_string();
    if (window_end) {
        doc["window"]["end"] = window_end->to_string();
    }
    doc["horizon_years"] = horizon_years;
    doc["cf_bound_mode"] = cf_mode == CfBoundMode::strict ? "strict" : "extended";

    auto& subs = doc["subsectors"];
    subs = ordered_json::array();
    for (const auto& [id, s] : subsectors) {
        ordered_json item;
        item["id"] = id;
        if (!s.ipcc_sector.empty()) item["ipcc_sector"] = s.ipcc_sector;
        if (!s.profile_id.empty()) item["profile"] = s.profile_id;
        ordered_json direct = ordered_json::array();
        for (Gas gas : non_ghg_gases()) {
            auto it = s.pollutant_path.find(gas);
            if (it != s.pollutant_path.end() && it->second == PollutantPath::direct) {
                direct.push_back(gas_code(gas));
            }
        }
        item["direct_gases"] = direct;
        subs.push_back(std::move(item));
    }

    auto& pollutants = doc["pollutant_gases"];
    pollutants = ordered_json::array();
    for (Gas gas : pollutant_gases) {
        pollutants.push_back(gas_code(gas));
    }

    auto& u = doc["uncertainty"];
    u["capacity_pct"] = uncertainty.capacity_pct;
    u["capacity_factor_pct"] = uncertainty.capacity_factor_pct;
    u["ef_pct"] = uncertainty.ef_pct;
    u["reported_pct"] = uncertainty.reported_pct;
    u["allocated_pct"] = uncertainty.allocated_pct;
    u["remainder_pct"] = uncertainty.remainder_pct;
    u["imputed_pct"] = uncertainty.imputed_pct;
    u["ratio_pct"] = uncertainty.ratio_pct;

    if (!implicit_rules.empty()) {
        auto& rules = doc["implicit"];
        rules = ordered_json::array();
        for (const auto& rule : implicit_rules) {
            ordered_json item;
            item["broad_subsector"] = rule.broad_subsector;
            item["covered"] = rule.covered;
            item["target_subsector"] = rule.target_subsector;
            rules.push_back(std::move(item));
        }
    }

    auto& formats = doc["export_formats"];
    formats = ordered_json::array();
    for (ExportFormat format : export_formats) {
        formats.push_back(format == ExportFormat::csv ? "csv" : "geojson");
    }
    doc["jobs"] = jobs;
    doc["change_threshold_pct"] = change_threshold_pct;
    return doc.dump();
}

std::string RunReport::to_json() const
{
    ordered_json doc;
    doc["load_errors"] = load_errors;
    doc["load_warnings"] = load_warnings;
    auto& findings = doc["validation"];
    findings = ordered_json::array();
    for (const auto& finding : validation.findings) {
        ordered_json item;
        item["severity"] =
            finding.severity == ValidationFinding::Severity::error ? "error" : "warning";
        item["code"] = finding.code;
        item["message"] = finding.message;
        findings.push_back(std::move(item));
    }
    doc["notes"] = notes;
    auto& audit_rows = doc["conservation_audit"];
    audit_rows = ordered_json::array();
    for (const auto& entry : audit) {
        ordered_json item;
        item["country"] = entry.country;
        item["subsector"] = entry.subsector;
        item["gas"] = gas_code(entry.gas);
        item["year"] = entry.year;
        item["asset_sum_t"] = entry.asset_sum;
        item["remainder_sum_t"] = entry.remainder_sum;
        item["effective_total_t"] = entry.effective_total;
        item["rel_error"] = entry.rel_error;
        item["rule"] = entry.rule == RemainderRule::assets_exceed_total ? "assets_exceed_total"
                                                                        : "remainder_distributed";
        item["pass"] = entry.pass;
        audit_rows.push_back(std::move(item));
    }
    doc["conservation_ok"] = conservation_ok;
    auto& times = doc["timings"];
    times = ordered_json::array();
    for (const auto& timing : timings) {
        ordered_json item;
        item["stage"] = timing.stage;
        item["seconds"] = timing.seconds;
        times.push_back(std::move(item));
    }
    return doc.dump(2);
}

namespace {

// Per-month origin of a series value; filled months inherit their anchor's.
struct MonthMeta {
    Provenance provenance = Provenance::modeled;
    Evidence evidence;
    double uncertainty_pct = 0.0;
    bool uniform_fallback = false;
    bool ratio_scaled = false;  // co-pollutant route, confidence capped at medium
    bool set = false;
};

struct SeriesState {
    const Asset* asset = nullptr;
    MonthlySeries series;
    std::vector<MonthMeta> meta;

    void place(YearMonth ym, double tonnes, FillFlag flag, const MonthMeta& m)
    {
        series.set(ym, tonnes, flag);
        auto idx = static_cast<size_t>(series.window().offset_of(ym));
        meta[idx] = m;
        meta[idx].set = true;
    }
};

using SeriesKey = std::pair<std::string, Gas>;  // (asset id, gas)

struct Engine {
    const RunConfig& config;
    RunReport& report;

    AssetRegistry registry;
    CountryTotalTable totals;
    ProxySurfaceTable proxies;
    TemporalProfileSet profiles;
    GwpTable gwp;
    BoundaryIndex boundaries;
    ConfidenceRubric rubric;
    std::optional<CoPollutantRatioTable> ratios;

    MonthWindow window{};
    std::map<SeriesKey, SeriesState> series;
    std::vector<EmissionRecord> remainder_records;

    explicit Engine(const RunConfig& cfg, RunReport& rep) : config(cfg), report(rep) {}

    void note(const std::string& text) { report.notes.push_back(text); }

    const TemporalProfile& profile_for(const std::string& subsector_id) const
    {
        static const TemporalProfile uniform = TemporalProfile::uniform();
        auto it = config.subsectors.find(subsector_id);
        if (it == config.subsectors.end() || it->second.profile_id.empty()) {
            return uniform;
        }
        const TemporalProfile* p = profiles.find(it->second.profile_id);
        return p == nullptr ? uniform : *p;
    }

    // Reference totals are calendar-year quantities; they are only compared
    // against (and allocated into) years the window covers in full.
    bool year_in_scope(int year) const
    {
        return window.contains(YearMonth{year, 1}) && window.contains(YearMonth{year, 12});
    }

    SeriesState& series_for(const Asset& asset, Gas gas)
    {
        auto [it, inserted] = series.try_emplace({asset.id, gas});
        if (inserted) {
            it->second.asset = &asset;
            it->second.series = MonthlySeries(asset.id, gas, window);
            it->second.meta.assign(static_cast<size_t>(window.size()), MonthMeta{});
        }
        return it->second;
    }

    bool has_series(const std::string& asset_id, Gas gas) const
    {
        return series.count({asset_id, gas}) > 0;
    }

    double eq_uncertainty() const
    {
        return propagate_uncertainty({config.uncertainty.capacity_pct,
                                      config.uncertainty.capacity_factor_pct,
                                      config.uncertainty.ef_pct});
    }

    // ---- stages ----

    void place_reported(const Asset& asset);
    void place_equation(const Asset& asset);
    void complete_own_data();
    void derive_filled_meta(SeriesState& state);
    void run_implicit_rules();
    void allocate();
    void impute_defaults_for(const Asset& asset, Gas gas);
    void fill_from_averages();
    void zero_fill_non_emitting();
    void spread_remainders();
    void add_pollutants();
    void audit_unreferenced();
    std::vector<EmissionRecord> finalize_records();

    std::set<Gas> tracked_gases(const std::string& country, const std::string& subsector) const;
    std::vector<const Asset*> emitting_assets(const std::string& country,
                                              const std::string& subsector) const;
    double asset_sum_for(const std::string& country, const std::string& subsector, Gas gas,
                         int year) const;
};

std::set<Gas> Engine::tracked_gases(const std::string& country, const std::string& subsector) const
{
    std::set<Gas> gases;
    for (const auto& [key, state] : series) {
        if (state.asset->country == country && state.asset->subsector == subsector) {
            gases.insert(key.second);
        }
    }
    for (const auto& [key, total] : totals.rows()) {
        if (key.country == country && key.subsector == subsector && year_in_scope(key.year)) {
            gases.insert(key.gas);
        }
    }
    return gases;
}

std::vector<const Asset*> Engine::emitting_assets(const std::string& country,
                                                  const std::string& subsector) const
{
    std::vector<const Asset*> result;
    for (const Asset* asset : registry.by_country_subsector(country, subsector)) {
        if (asset->emitting) {
            result.push_back(asset);
        }
    }
    return result;
}

double Engine::asset_sum_for(const std::string& country, const std::string& subsector, Gas gas,
                             int year) const
{
    double sum = 0.0;
    for (const auto& [key, state] : series) {
        if (key.second == gas && state.asset->country == country &&
            state.asset->subsector == subsector) {
            sum += state.series.sum_year(year);
        }
    }
    return sum;
}

void Engine::place_reported(const Asset& asset)
{
    if (!asset.reported_period || asset.reported.empty() || !asset.emitting) {
        return;
    }
    const Period& period = *asset.reported_period;
    for (const auto& [gas, tonnes] : asset.reported) {
        // work out the monthly placements first; a report entirely outside
        // the window must not create a series (the asset stays eligible for
        // allocation instead)
        std::vector<std::tuple<YearMonth, double, FillFlag>> placements;
        switch (period.granularity) {
        case Granularity::monthly:
            placements.emplace_back(YearMonth{period.start.year, period.start.month}, tonnes,
                                    FillFlag::observed);
            break;
        case Granularity::quarterly: {
            const auto months = quarterly_to_monthly(tonnes);
            YearMonth ym{period.start.year, period.start.month};
            for (int i = 0; i < 3; ++i) {
                placements.emplace_back(ym, months[static_cast<size_t>(i)],
                                        FillFlag::span_apportioned);
                ym = ym.next();
            }
            break;
        }
        case Granularity::annual: {
            const auto shares = annual_to_monthly(tonnes, profile_for(asset.subsector));
            for (int m = 1; m <= 12; ++m) {
                placements.emplace_back(YearMonth{period.start.year, m},
                                        shares[static_cast<size_t>(m - 1)],
                                        FillFlag::profile_split);
            }
            break;
        }
        case Granularity::span:
            for (const auto& [ym, amount] : span_to_monthly(period.start, period.end, tonnes)) {
                placements.emplace_back(ym, amount, FillFlag::span_apportioned);
            }
            break;
        }

        bool any_in_window = false;
        for (const auto& [ym, amount, flag] : placements) {
            if (window.contains(ym)) {
                any_in_window = true;
            }
        }
        if (!any_in_window) {
            note("asset " + asset.id + ": reported " + gas_code(gas) +
                 " lies outside the window, ignored");
            continue;
        }

        MonthMeta meta;
        meta.provenance = Provenance::reported;
        meta.evidence = {EfGranularity::asset, ActivitySource::reported};
        meta.uncertainty_pct = config.uncertainty.reported_pct;
        SeriesState& state = series_for(asset, gas);
        for (const auto& [ym, amount, flag] : placements) {
            if (window.contains(ym)) {
                state.place(ym, amount, flag, meta);
            }
        }
    }

    // reported total plus two known factors pins down the third
    const int known = static_cast<int>(asset.capacity.has_value()) +
                      static_cast<int>(asset.capacity_factor.has_value());
    double covered_months = 12.0;
    switch (period.granularity) {
    case Granularity::monthly: covered_months = 1.0; break;
    case Granularity::quarterly: covered_months = 3.0; break;
    case Granularity::annual: covered_months = 12.0; break;
    case Granularity::span:
        covered_months = static_cast<double>(day_difference(period.start, period.end)) / 30.44;
        break;
    }
    for (const auto& [gas, tonnes] : asset.reported) {
        const bool has_ef = asset.emission_factors.count(gas) > 0;
        if (known + static_cast<int>(has_ef) != 2 || tonnes <= 0.0) {
            continue;
        }
        const double monthly = tonnes / covered_months;
        try {
            KnownFactors factors;
            factors.capacity = asset.capacity;
            factors.capacity_factor = asset.capacity_factor;
            if (has_ef) {
                factors.emission_factor = asset.emission_factors.at(gas);
            }
            const double inferred = decompose_emissions(monthly, factors);
            const char* which = !asset.capacity ? "capacity"
                                : !asset.capacity_factor ? "capacity_factor"
                                                         : "emission_factor";
            note("asset " + asset.id + ": inferred " + which + " " + format_double(inferred) +
                 " from reported " + gas_code(gas) + " total");
        } catch (const Error& e) {
            note("asset " + asset.id + ": decomposition failed: " + e.what());
        }
    }
}

void Engine::place_equation(const Asset& asset)
{
    if (!asset.emitting || !asset.capacity || !asset.capacity_factor) {
        return;
    }
    const double activity = compute_activity(*asset.capacity, *asset.capacity_factor);
    for (const auto& [gas, ef] : asset.emission_factors) {
        if (!is_greenhouse_gas(gas)) {
            continue;  // pollutant factors are handled by the co-pollutant stage
        }
        SeriesState& state = series_for(asset, gas);
        const double monthly = compute_emissions(activity, ef);
        MonthMeta meta;
        meta.provenance = Provenance::modeled;
        meta.evidence = {asset.ef_granularity, asset.activity_source};
        meta.uncertainty_pct = eq_uncertainty();
        for (int i = 0; i < window.size(); ++i) {
            YearMonth ym = window.at(i);
            if (!state.series.has(ym)) {
                state.place(ym, monthly, FillFlag::eq_constrained, meta);
            }
        }
    }
}

// Completes every series that has at least one month of own data:
// month-of-year extrapolation for the tail, then the global backward and
// forward passes for interior and leading gaps.
void Engine::complete_own_data()
{
    std::vector<SeriesState*> pending;
    for (auto& [key, state] : series) {
        if (state.series.present_count() > 0 && !state.series.complete()) {
            pending.push_back(&state);
        }
    }
    parallel_for(pending.size(), config.jobs, [&](size_t i) {
        SeriesState& state = *pending[i];
        state.series = extrapolate_months(state.series, window.last);
        auto imputed = impute_series(state.series);
        state.series = std::move(imputed.series);
    });
    for (SeriesState* state : pending) {
        derive_filled_meta(*state);
    }
}

// Months produced by extrapolation or the fill passes inherit the metadata
// of the month whose value they copied.
void Engine::derive_filled_meta(SeriesState& state)
{
    const MonthWindow& w = state.series.window();
    const int n = w.size();
    auto meta_at = [&](int i) -> MonthMeta& { return state.meta[static_cast<size_t>(i)]; };

    // extrapolated months: latest earlier same-month-of-year with metadata
    for (int i = 0; i < n; ++i) {
        YearMonth ym = w.at(i);
        if (!state.series.has(ym) || meta_at(i).set ||
            state.series.flag(ym) != FillFlag::month_extrapolated) {
            continue;
        }
        for (YearMonth probe{ym.year - 1, ym.month}; probe >= w.first;
             probe = YearMonth{probe.year - 1, probe.month}) {
            const int j = w.offset_of(probe);
            if (meta_at(j).set) {
                meta_at(i) = meta_at(j);
                break;
            }
        }
    }
    // backfilled months copy the nearest later anchor
    {
        const MonthMeta* next = nullptr;
        for (int i = n - 1; i >= 0; --i) {
            YearMonth ym = w.at(i);
            if (meta_at(i).set) {
                next = &meta_at(i);
            } else if (state.series.has(ym) && state.series.flag(ym) == FillFlag::backfilled &&
                       next != nullptr) {
                meta_at(i) = *next;
            }
        }
    }
    // forward-filled months copy the nearest earlier anchor
    {
        const MonthMeta* last = nullptr;
        for (int i = 0; i < n; ++i) {
            YearMonth ym = w.at(i);
            if (meta_at(i).set) {
                last = &meta_at(i);
            } else if (state.series.has(ym) && state.series.flag(ym) == FillFlag::forwardfilled &&
                       last != nullptr) {
                meta_at(i) = *last;
            }
        }
    }
}

void Engine::run_implicit_rules()
{
    for (const auto& rule : config.implicit_rules) {
        // keys of the broad subsector present in the window
        std::vector<CountryTotalKey> broad_keys;
        for (const auto& [key, total] : totals.rows()) {
            if (key.subsector == rule.broad_subsector && year_in_scope(key.year)) {
                broad_keys.push_back(key);
            }
        }
        for (const auto& broad_key : broad_keys) {
            CountryTotalKey target_key = broad_key;
            target_key.subsector = rule.target_subsector;
            if (totals.find(target_key) != nullptr) {
                note("implicit rule for " + rule.target_subsector + " skipped for " +
                     broad_key.country + "/" + std::to_string(broad_key.year) +
                     ": explicit total present");
                continue;
            }
            std::vector<double> covered;
            for (const auto& covered_subsector : rule.covered) {
                CountryTotalKey covered_key = broad_key;
                covered_key.subsector = covered_subsector;
                if (const CountryTotal* t = totals.find(covered_key)) {
                    covered.push_back(t->tonnes);
                } else {
                    covered.push_back(asset_sum_for(broad_key.country, covered_subsector,
                                                    broad_key.gas, broad_key.year));
                }
            }
            const auto derived =
                implicit_subtract(totals.find(broad_key)->tonnes, covered);
            if (derived.clamped) {
                note("implicit " + rule.target_subsector + " for " + broad_key.country + "/" +
                     std::to_string(broad_key.year) +
                     " clamped to zero: covered categories exceed the broad total");
            }
            CountryTotal total;
            total.tonnes = derived.tonnes;
            total.source = "implicit:" + rule.broad_subsector;
            totals.add(target_key, total);
        }
    }
}

void Engine::allocate()
{
    // distinct (country, subsector, gas) with reference totals in scope
    std::set<std::tuple<std::string, std::string, Gas>> keys;
    for (const auto& [key, total] : totals.rows()) {
        if (year_in_scope(key.year)) {
            keys.insert({key.country, key.subsector, key.gas});
        }
    }

    for (const auto& [country, subsector, gas] : keys) {
        const auto assets = emitting_assets(country, subsector);
        // pool membership is decided once: assets with no timeline of their
        // own for this gas receive allocated shares every reference year
        std::set<std::string> pool_ids;
        std::vector<const Asset*> pool;
        for (const Asset* asset : assets) {
            if (!has_series(asset->id, gas)) {
                pool.push_back(asset);
                pool_ids.insert(asset->id);
            }
        }

        // activity proxy ladder: economic output, else capacity, else uniform
        std::vector<double> pool_proxy(pool.size(), 1.0);
        bool all_output = !pool.empty();
        bool all_capacity = !pool.empty();
        for (const Asset* asset : pool) {
            all_output = all_output && asset->economic_output.has_value();
            all_capacity = all_capacity && asset->capacity.has_value();
        }
        for (size_t i = 0; i < pool.size(); ++i) {
            if (all_output) {
                pool_proxy[i] = *pool[i]->economic_output;
            } else if (all_capacity) {
                pool_proxy[i] = *pool[i]->capacity;
            }
        }

        bool needs_defaults = false;
        for (int year = window.first.year; year <= window.last.year; ++year) {
            const CountryTotal* total = totals.find({country, subsector, gas, year});
            if (total == nullptr || !year_in_scope(year)) {
                continue;
            }
            std::vector<AllocationInput> inputs;
            inputs.reserve(assets.size());
            for (size_t i = 0, pool_at = 0; i < assets.size(); ++i) {
                const Asset* asset = assets[i];
                AllocationInput input;
                input.id = asset->id;
                if (pool_ids.count(asset->id) > 0) {
                    input.proxy = pool_proxy[pool_at++];
                } else {
                    input.prior = series.at({asset->id, gas}).series.sum_year(year);
                }
                inputs.push_back(std::move(input));
            }
            const AssetAllocation allocation = allocate_country_to_assets(total->tonnes, inputs);

            if (!pool.empty() && allocation.pool == 0.0 && total->tonnes > 0.0) {
                // prior estimates met or exceeded the reference total: the
                // remaining assets get default-imputed factors instead
                needs_defaults = true;
                continue;
            }
            if (allocation.uniform_fallback) {
                note("allocation (" + country + ", " + subsector + ", " + gas_code(gas) + ", " +
                     std::to_string(year) + "): no usable activity proxy, uniform split");
            }
            const TemporalProfile& profile = profile_for(subsector);
            for (size_t i = 0; i < inputs.size(); ++i) {
                const AssetShare& share = allocation.shares[i];
                if (share.kept_prior) {
                    continue;
                }
                SeriesState& state = series_for(*assets[i], gas);
                MonthMeta meta;
                meta.provenance = Provenance::disaggregated;
                meta.evidence = {EfGranularity::country, ActivitySource::proxy};
                meta.uncertainty_pct = config.uncertainty.allocated_pct;
                meta.uniform_fallback = allocation.uniform_fallback;
                const auto shares = annual_to_monthly(share.tonnes, profile);
                for (int m = 1; m <= 12; ++m) {
                    state.place(YearMonth{year, m}, shares[static_cast<size_t>(m - 1)],
                                FillFlag::profile_split, meta);
                }
            }
        }

        if (needs_defaults) {
            for (const Asset* asset : pool) {
                if (!has_series(asset->id, gas)) {
                    impute_defaults_for(*asset, gas);
                }
            }
        }
    }

    // groups where a gas is tracked through peers but no reference total
    // exists anywhere in scope: equation estimates from default factors
    std::set<std::pair<std::string, std::string>> groups;
    for (const auto& asset : registry.assets()) {
        groups.insert({asset.country, asset.subsector});
    }
    for (const auto& [country, subsector] : groups) {
        for (Gas gas : tracked_gases(country, subsector)) {
            if (keys.count({country, subsector, gas}) > 0) {
                continue;
            }
            for (const Asset* asset : emitting_assets(country, subsector)) {
                if (!has_series(asset->id, gas)) {
                    impute_defaults_for(*asset, gas);
                }
            }
        }
    }
}

void Engine::impute_defaults_for(const Asset& asset, Gas gas)
{
    std::vector<const Asset*> country_pool;
    for (const Asset* peer : emitting_assets(asset.country, asset.subsector)) {
        if (peer->id != asset.id) {
            country_pool.push_back(peer);
        }
    }
    std::vector<const Asset*> global_pool;
    for (const Asset* peer : registry.by_subsector(asset.subsector)) {
        if (peer->id != asset.id && peer->emitting) {
            global_pool.push_back(peer);
        }
    }

    const ImputedAsset imputed = impute_asset_defaults(asset, country_pool, global_pool, {gas});
    if (imputed.unestimable) {
        note("asset " + asset.id + " (" + gas_code(gas) +
             "): unestimable, both imputation pools empty");
        return;
    }
    const double monthly =
        compute_emissions(compute_activity(*imputed.asset.capacity, *imputed.asset.capacity_factor),
                          imputed.asset.emission_factors.at(gas));

    MonthMeta meta;
    meta.provenance = Provenance::imputed;
    auto ef_it = imputed.ef_source.find(gas);
    const ImputeSource ef_source = ef_it == imputed.ef_source.end() ? ImputeSource::none
                                                                    : ef_it->second;
    meta.evidence.ef = ef_source == ImputeSource::global    ? EfGranularity::global
                       : ef_source == ImputeSource::country ? EfGranularity::country
                                                            : asset.ef_granularity;
    const bool activity_imputed = imputed.capacity_source != ImputeSource::none ||
                                  imputed.capacity_factor_source != ImputeSource::none;
    meta.evidence.activity = activity_imputed ? ActivitySource::imputed : asset.activity_source;
    meta.uncertainty_pct = config.uncertainty.imputed_pct;

    SeriesState& state = series_for(asset, gas);
    for (int i = 0; i < window.size(); ++i) {
        YearMonth ym = window.at(i);
        if (!state.series.has(ym)) {
            state.place(ym, monthly, FillFlag::eq_constrained, meta);
        }
    }
}

void Engine::zero_fill_non_emitting()
{
    for (const auto& asset : registry.assets()) {
        if (asset.emitting) {
            continue;
        }
        for (Gas gas : tracked_gases(asset.country, asset.subsector)) {
            SeriesState& state = series_for(asset, gas);
            MonthMeta meta;
            meta.provenance = Provenance::modeled;
            meta.evidence = {EfGranularity::asset, ActivitySource::reported};
            meta.uncertainty_pct = 0.0;
            for (int i = 0; i < window.size(); ++i) {
                YearMonth ym = window.at(i);
                if (!state.series.has(ym)) {
                    state.place(ym, 0.0, FillFlag::zero_filled, meta);
                }
            }
        }
    }
}

// Country and global per-month averages over completed peers, for assets
// nothing else could estimate.
void Engine::fill_from_averages()
{
    // finish any series that gained allocated months
    complete_own_data();

    struct Avg {
        std::vector<double> sum;
        std::vector<int> count;
    };
    std::map<std::tuple<std::string, std::string, Gas>, Avg> country_avgs;
    std::map<std::pair<std::string, Gas>, Avg> global_avgs;
    const auto n = static_cast<size_t>(window.size());
    for (const auto& [key, state] : series) {
        if (!state.series.complete() || !state.asset->emitting) {
            continue;
        }
        auto& country_avg =
            country_avgs[{state.asset->country, state.asset->subsector, key.second}];
        auto& global_avg = global_avgs[{state.asset->subsector, key.second}];
        for (auto* avg : {&country_avg, &global_avg}) {
            if (avg->sum.empty()) {
                avg->sum.assign(n, 0.0);
                avg->count.assign(n, 0);
            }
        }
        for (int i = 0; i < window.size(); ++i) {
            const double value = state.series.value(window.at(i));
            country_avg.sum[static_cast<size_t>(i)] += value;
            country_avg.count[static_cast<size_t>(i)] += 1;
            global_avg.sum[static_cast<size_t>(i)] += value;
            global_avg.count[static_cast<size_t>(i)] += 1;
        }
    }

    auto monthly_avg = [&](const Avg* avg, size_t i) -> std::optional<double> {
        if (avg == nullptr || avg->sum.empty() || avg->count[i] == 0) {
            return std::nullopt;
        }
        return avg->sum[i] / avg->count[i];
    };

    // every emitting asset gets a value for every tracked gas, every month
    std::set<std::pair<std::string, std::string>> groups;
    for (const auto& asset : registry.assets()) {
        groups.insert({asset.country, asset.subsector});
    }
    for (const auto& [country, subsector] : groups) {
        for (Gas gas : tracked_gases(country, subsector)) {
            for (const Asset* asset : emitting_assets(country, subsector)) {
                SeriesState& state = series_for(*asset, gas);
                if (state.series.complete()) {
                    continue;
                }
                const Avg* country_avg = nullptr;
                if (auto it = country_avgs.find({country, subsector, gas});
                    it != country_avgs.end()) {
                    country_avg = &it->second;
                }
                const Avg* global_avg = nullptr;
                if (auto it = global_avgs.find({subsector, gas}); it != global_avgs.end()) {
                    global_avg = &it->second;
                }
                bool fully_filled = true;
                for (int i = 0; i < window.size(); ++i) {
                    YearMonth ym = window.at(i);
                    if (state.series.has(ym)) {
                        continue;
                    }
                    MonthMeta meta;
                    meta.provenance = Provenance::imputed;
                    meta.uncertainty_pct = config.uncertainty.imputed_pct;
                    if (auto v = monthly_avg(country_avg, static_cast<size_t>(i))) {
                        meta.evidence = {EfGranularity::country, ActivitySource::imputed};
                        state.place(ym, *v, FillFlag::country_avg, meta);
                    } else if (auto g = monthly_avg(global_avg, static_cast<size_t>(i))) {
                        meta.evidence = {EfGranularity::global, ActivitySource::imputed};
                        state.place(ym, *g, FillFlag::global_avg, meta);
                    } else {
                        fully_filled = false;
                    }
                }
                if (!fully_filled) {
                    note("asset " + asset->id + " (" + gas_code(gas) +
                         "): unestimable, no peers to average");
                    series.erase({asset->id, gas});
                }
            }
        }
    }
}

void Engine::spread_remainders()
{
    for (const auto& [key, total] : totals.rows()) {
        if (!year_in_scope(key.year)) {
            if (key.year >= window.first.year && key.year <= window.last.year) {
                note("reference total (" + key.country + ", " + key.subsector + ", " +
                     gas_code(key.gas) + ", " + std::to_string(key.year) +
                     ") ignored: year only partially inside the window");
            }
            continue;
        }
        const double asset_sum = asset_sum_for(key.country, key.subsector, key.gas, key.year);
        const RemainderSplit split = compute_remainder(total.tonnes, asset_sum);

        ConservationEntry entry;
        entry.country = key.country;
        entry.subsector = key.subsector;
        entry.gas = key.gas;
        entry.year = key.year;
        entry.asset_sum = asset_sum;
        entry.effective_total = split.effective_total;
        entry.rule = split.rule;

        double remainder_sum = 0.0;
        // float dust from profile splits is not a real remainder
        const double negligible = 1e-12 * std::max(1.0, split.effective_total);
        if (split.remainder > negligible) {
            const std::vector<ProxyCell>* cells = proxies.find(key.subsector, key.country);
            const RemainderAllocation allocation =
                allocate_remainder(split.remainder, cells == nullptr ? std::vector<ProxyCell>{}
                                                                     : *cells);
            const TemporalProfile& profile = profile_for(key.subsector);
            auto emit_monthly = [&](const std::string& source, double annual) {
                const auto shares = annual_to_monthly(annual, profile);
                for (int m = 1; m <= 12; ++m) {
                    YearMonth ym{key.year, m};
                    if (!window.contains(ym)) {
                        continue;
                    }
                    EmissionRecord record;
                    record.source = source;
                    record.subsector = key.subsector;
                    record.country = key.country;
                    record.gas = key.gas;
                    record.period = Period::month(ym);
                    record.tonnes = shares[static_cast<size_t>(m - 1)];
                    record.provenance = Provenance::remainder;
                    record.confidence = assign_confidence(
                        {EfGranularity::country, ActivitySource::proxy}, rubric);
                    record.uncertainty_pct = config.uncertainty.remainder_pct;
                    record.fill = FillFlag::profile_split;
                    remainder_sum += record.tonnes;
                    remainder_records.push_back(std::move(record));
                }
            };
            for (const auto& cell : allocation.cells) {
                emit_monthly(cell.cell, cell.tonnes);
            }
            if (allocation.parked) {
                emit_monthly(key.country, *allocation.parked);
                note("remainder for (" + key.country + ", " + key.subsector + ", " +
                     gas_code(key.gas) + ", " + std::to_string(key.year) + ") parked at country: " +
                     "proxy surface empty or missing");
            }
        }
        entry.remainder_sum = remainder_sum;
        const double lhs = entry.asset_sum + entry.remainder_sum;
        entry.rel_error = entry.effective_total > 0.0
                              ? std::abs(lhs - entry.effective_total) / entry.effective_total
                              : std::abs(lhs);
        entry.pass = entry.rel_error <= 1e-6;
        if (!entry.pass) {
            report.conservation_ok = false;
        }
        report.audit.push_back(std::move(entry));
    }
}

// Keys with asset mass but no reference total: the asset sum is the
// effective total, so the end-to-end conservation statement covers every
// exported record. Runs after the pollutant stage.
void Engine::audit_unreferenced()
{
    std::set<std::tuple<std::string, std::string, Gas, int>> unreferenced;
    for (const auto& [key, state] : series) {
        for (int year = window.first.year; year <= window.last.year; ++year) {
            if (!year_in_scope(year) ||
                totals.find({state.asset->country, state.asset->subsector, key.second, year}) !=
                    nullptr) {
                continue;
            }
            if (state.series.sum_year(year) > 0.0) {
                unreferenced.insert(
                    {state.asset->country, state.asset->subsector, key.second, year});
            }
        }
    }
    for (const auto& [country, subsector, gas, year] : unreferenced) {
        ConservationEntry entry;
        entry.country = country;
        entry.subsector = subsector;
        entry.gas = gas;
        entry.year = year;
        entry.asset_sum = asset_sum_for(country, subsector, gas, year);
        entry.remainder_sum = 0.0;
        const RemainderSplit split = compute_remainder(0.0, entry.asset_sum);
        entry.effective_total = split.effective_total;
        entry.rule = split.rule;
        entry.rel_error = 0.0;
        entry.pass = true;
        report.audit.push_back(std::move(entry));
    }
}

// Pollutant scaling is parallel per asset: phase one computes each asset's
// pollutant months against the immutable GHG series, phase two merges them
// into the series map sequentially.
void Engine::add_pollutants()
{
    struct PollutantSeries {
        const Asset* asset = nullptr;
        Gas gas = Gas::CO;
        std::vector<double> values;
        std::vector<FillFlag> fills;
        std::vector<MonthMeta> metas;
    };
    struct AssetOutput {
        std::vector<PollutantSeries> series;
        std::vector<std::string> notes;
    };

    std::vector<const Asset*> asset_list;
    for (const auto& asset : registry.assets()) {
        asset_list.push_back(&asset);
    }
    std::vector<AssetOutput> outputs(asset_list.size());

    parallel_for(asset_list.size(), config.jobs, [&](size_t index) {
        const Asset& asset = *asset_list[index];
        AssetOutput& out = outputs[index];
        auto subsector_it = config.subsectors.find(asset.subsector);
        if (subsector_it == config.subsectors.end()) {
            return;
        }
        const Subsector& subsector = subsector_it->second;

        // monthly CO2e and its confidence/uncertainty inputs from the
        // asset's greenhouse-gas series
        std::vector<double> co2e(static_cast<size_t>(window.size()), 0.0);
        std::vector<std::vector<WeightedUncertainty>> parts(static_cast<size_t>(window.size()));
        std::vector<ActivitySource> worst_activity(static_cast<size_t>(window.size()),
                                                   ActivitySource::reported);
        std::vector<FillFlag> fills(static_cast<size_t>(window.size()), FillFlag::eq_constrained);
        std::vector<double> dominant(static_cast<size_t>(window.size()), -1.0);
        bool any_ghg = false;
        for (Gas gas : greenhouse_gases()) {
            auto it = series.find({asset.id, gas});
            if (it == series.end() || !it->second.series.complete()) {
                continue;
            }
            any_ghg = true;
            const double factor = gwp.factor(gas, config.horizon_years);
            for (int i = 0; i < window.size(); ++i) {
                const auto idx = static_cast<size_t>(i);
                const double mass = it->second.series.value(window.at(i)) * factor;
                co2e[idx] += mass;
                parts[idx].push_back({mass, it->second.meta[idx].uncertainty_pct});
                worst_activity[idx] =
                    std::max(worst_activity[idx], it->second.meta[idx].evidence.activity);
                if (mass > dominant[idx]) {
                    dominant[idx] = mass;
                    fills[idx] = it->second.series.flag(window.at(i));
                }
            }
        }
        if (!any_ghg) {
            return;
        }

        for (Gas gas : config.pollutant_gases) {
            const PollutantPath path = subsector.path_for(gas);
            PollutantSeries produced;
            produced.asset = &asset;
            produced.gas = gas;
            if (path == PollutantPath::direct) {
                if (asset.emission_factors.count(gas) == 0) {
                    continue;  // direct route without a factor: nothing to estimate
                }
                MonthMeta meta;
                meta.provenance = Provenance::modeled;
                meta.evidence = {asset.ef_granularity, asset.activity_source};
                meta.uncertainty_pct = eq_uncertainty();
                meta.set = true;
                double monthly = 0.0;
                if (asset.emitting && asset.capacity && asset.capacity_factor) {
                    monthly = direct_pollutants(
                        compute_activity(*asset.capacity, *asset.capacity_factor),
                        asset.emission_factors.at(gas), subsector, gas);
                } else if (asset.emitting) {
                    out.notes.push_back("asset " + asset.id + ": direct " + gas_code(gas) +
                                        " skipped, capacity or capacity factor missing");
                    continue;
                }
                produced.values.assign(static_cast<size_t>(window.size()), monthly);
                produced.fills.assign(static_cast<size_t>(window.size()),
                                      asset.emitting ? FillFlag::eq_constrained
                                                     : FillFlag::zero_filled);
                produced.metas.assign(static_cast<size_t>(window.size()), meta);
            } else {
                if (!ratios) {
                    continue;  // no reference inventories configured
                }
                auto found = ratios->lookup(asset.subsector, gas, asset.country,
                                            asset.fuel.value_or(""));
                if (!found) {
                    out.notes.push_back("asset " + asset.id + ": no co-pollutant ratio for (" +
                                        asset.subsector + ", " + gas_code(gas) + ", " +
                                        asset.country + "); omitted");
                    continue;
                }
                if (found->level != RatioLevel::exact) {
                    out.notes.push_back("asset " + asset.id + ": " + gas_code(gas) +
                                        " ratio from " + to_string(found->level) + " fallback");
                }
                for (int i = 0; i < window.size(); ++i) {
                    const auto idx = static_cast<size_t>(i);
                    MonthMeta meta;
                    meta.provenance = Provenance::modeled;
                    meta.evidence = {EfGranularity::country, worst_activity[idx]};
                    meta.ratio_scaled = true;
                    meta.set = true;
                    meta.uncertainty_pct = propagate_uncertainty(
                        {combine_additive_uncertainty(parts[idx]), config.uncertainty.ratio_pct});
                    produced.values.push_back(co2e[idx] * found->ratio);
                    produced.fills.push_back(fills[idx]);
                    produced.metas.push_back(meta);
                }
            }
            out.series.push_back(std::move(produced));
        }
    });

    for (auto& out : outputs) {
        for (const auto& note_text : out.notes) {
            note(note_text);
        }
        for (auto& produced : out.series) {
            SeriesState& state = series_for(*produced.asset, produced.gas);
            for (int i = 0; i < window.size(); ++i) {
                YearMonth ym = window.at(i);
                if (!state.series.has(ym)) {
                    const auto idx = static_cast<size_t>(i);
                    state.place(ym, produced.values[idx], produced.fills[idx],
                                produced.metas[idx]);
                }
            }
        }
    }
}

std::vector<EmissionRecord> Engine::finalize_records()
{
    std::vector<EmissionRecord> records;
    for (const auto& [key, state] : series) {
        const MonthWindow& w = state.series.window();
        for (int i = 0; i < w.size(); ++i) {
            YearMonth ym = w.at(i);
            if (!state.series.has(ym)) {
                continue;
            }
            const MonthMeta& meta = state.meta[static_cast<size_t>(i)];
            EmissionRecord record;
            record.source = key.first;
            record.subsector = state.asset->subsector;
            record.country = state.asset->country;
            record.gas = key.second;
            record.period = Period::month(ym);
            record.tonnes = state.series.value(ym);
            record.provenance = meta.provenance;
            record.fill = state.series.flag(ym);
            record.uncertainty_pct = meta.uncertainty_pct;

            ConfidenceLevel level = assign_confidence(meta.evidence, rubric);
            if (meta.uniform_fallback) {
                level = std::min(level, ConfidenceLevel::low);
            }
            if (meta.ratio_scaled) {
                level = std::min(level, ConfidenceLevel::medium);  // country-level ratio
            }
            record.confidence = level;
            records.push_back(std::move(record));
        }
    }
    return records;
}

}  // namespace

SynthesisResult synthesize(const RunConfig& config)
{
    SynthesisResult result;
    RunReport& report = result.report;
    Engine engine(config, report);

    auto timed = [&](const char* stage, auto&& fn) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto stop = std::chrono::steady_clock::now();
        report.timings.push_back(
            {stage, std::chrono::duration<double>(stop - start).count()});
    };

    // ---- ingest ----
    bool load_failed = false;
    timed("ingest", [&] {
        auto take = [&](auto&& loaded, auto& into) {
            report.load_errors.insert(report.load_errors.end(), loaded.errors.begin(),
                                      loaded.errors.end());
            report.load_warnings.insert(report.load_warnings.end(), loaded.warnings.begin(),
                                        loaded.warnings.end());
            if (loaded.ok()) {
                into = std::move(loaded.value);
            } else {
                load_failed = true;
            }
        };
        take(load_asset_registry(config.assets_path, config.subsectors, config.cf_mode),
             engine.registry);
        take(load_country_totals(config.country_totals_path, config.subsectors), engine.totals);
        take(load_proxy_surface(config.proxy_path), engine.proxies);
        take(load_profiles(config.profiles_path), engine.profiles);
        take(load_boundaries(config.boundaries_path), engine.boundaries);
        try {
            derive_admin_units(engine.boundaries);  // containment consistency
        } catch (const Error& e) {
            report.load_errors.push_back(std::string(e.what()));
            load_failed = true;
        }
        if (!config.gwp_path.empty()) {
            take(load_gwp_table(config.gwp_path), engine.gwp);
        } else {
            engine.gwp = GwpTable::defaults();
        }
        if (!config.rubric_path.empty()) {
            take(load_rubric(config.rubric_path), engine.rubric);
        } else {
            engine.rubric = ConfidenceRubric::defaults();
        }
        if (!config.reference_pollutants_path.empty() && !config.reference_ghg_path.empty()) {
            ReferenceInventory pollutants, ghg;
            take(load_reference_inventory(config.reference_pollutants_path, true), pollutants);
            take(load_reference_inventory(config.reference_ghg_path, false), ghg);
            if (!config.reference_pollutants_secondary_path.empty()) {
                ReferenceInventory secondary;
                take(load_reference_inventory(config.reference_pollutants_secondary_path, true),
                     secondary);
                pollutants = merge_reference_inventories(pollutants, secondary);
            }
            if (!config.reference_ghg_secondary_path.empty()) {
                ReferenceInventory secondary;
                take(load_reference_inventory(config.reference_ghg_secondary_path, false),
                     secondary);
                ghg = merge_reference_inventories(ghg, secondary);
            }
            if (!load_failed) {
                RatioBuildReport ratio_report;
                engine.ratios =
                    build_ratio_table(pollutants, ghg, engine.gwp, config.horizon_years,
                                      &ratio_report);
                for (const auto& skipped : ratio_report.skipped) {
                    report.notes.push_back("ratio table: " + skipped);
                }
            }
        }
    });
    if (load_failed) {
        result.status = RunStatus::validation_failed;
        for (const auto& error : report.load_errors) {
            logging::error(error);
        }
        return result;
    }
    for (const auto& warning : report.load_warnings) {
        logging::warn(warning);
    }

    report.validation = validate_inputs(engine.registry, engine.totals, engine.proxies,
                                        engine.profiles, config.subsectors);
    if (report.validation.error_count() > 0) {
        result.status = RunStatus::validation_failed;
        return result;
    }

    // resolve the window end: December of the latest data year when unset
    YearMonth end;
    if (config.window_end) {
        end = *config.window_end;
    } else {
        int latest = config.window_start.year;
        for (const auto& [key, total] : engine.totals.rows()) {
            latest = std::max(latest, key.year);
        }
        for (const auto& asset : engine.registry.assets()) {
            if (asset.reported_period) {
                latest = std::max(latest, asset.reported_period->start.year);
            }
        }
        end = YearMonth{latest, 12};
        report.notes.push_back("window end resolved to " + end.to_string());
    }
    engine.window = MonthWindow{config.window_start, end};

    // ---- per-asset estimation and its timeline completion ----
    timed("asset_estimation", [&] {
        for (const auto& asset : engine.registry.assets()) {
            engine.place_reported(asset);
        }
        for (const auto& asset : engine.registry.assets()) {
            engine.place_equation(asset);
        }
        engine.complete_own_data();
    });

    // ---- data-informed allocation ----
    timed("allocation", [&] {
        engine.run_implicit_rules();
        engine.allocate();
    });

    // ---- temporal completion ----
    timed("temporal_completion", [&] {
        engine.zero_fill_non_emitting();
        engine.fill_from_averages();
    });

    // ---- spatial remainder ----
    timed("remainder", [&] { engine.spread_remainders(); });

    // ---- co-pollutants ----
    timed("copollutants", [&] {
        engine.add_pollutants();
        engine.audit_unreferenced();
    });

    // ---- confidence, uncertainty, record assembly ----
    timed("finalize", [&] { result.asset_records = engine.finalize_records(); });
    result.remainder_records = std::move(engine.remainder_records);

    // ---- hierarchy conservation check ----
    timed("rollup_audit", [&] {
        std::vector<EmissionRecord> all = result.asset_records;
        all.insert(all.end(), result.remainder_records.begin(), result.remainder_records.end());
        std::map<Gas, double> direct_totals;
        for (const auto& record : all) {
            direct_totals[record.gas] += record.tonnes;
        }
        for (AdminLevel level : {AdminLevel::gadm0, AdminLevel::gadm1, AdminLevel::gadm2}) {
            RollupResult rolled = rollup(all, level, engine.boundaries, PeriodGranularity::annual);
            for (const auto& quarantined : rolled.quarantined) {
                report.notes.push_back("quarantined: " + quarantined);
            }
            for (const auto& [gas, total] : direct_totals) {
                const double level_total = rolled.total(gas);
                const double scale = std::max(1.0, std::abs(total));
                if (std::abs(level_total - total) / scale > 1e-6) {
                    report.conservation_ok = false;
                    report.notes.push_back("level conservation failed at " + to_string(level) +
                                           " for " + gas_code(gas));
                }
            }
        }
    });

    result.status = report.conservation_ok ? RunStatus::ok : RunStatus::conservation_failed;
    return result;
}

namespace {

std::string monthly_source_type(const EmissionRecord& record)
{
    if (record.source == record.country) {
        return "country";
    }
    return "cell";
}

std::vector<InventoryRow> annual_rollup_rows(const std::vector<EmissionRecord>& records,
                                             const BoundaryIndex& boundaries)
{
    std::vector<InventoryRow> rows;
    for (AdminLevel level :
         {AdminLevel::gadm0, AdminLevel::gadm1, AdminLevel::gadm2, AdminLevel::fua}) {
        RollupResult rolled = rollup(records, level, boundaries, PeriodGranularity::annual);
        for (const auto& [key, value] : rolled.rows) {
            InventoryRow row;
            row.unit_id = key.unit;
            row.level = to_string(level);
            row.subsector = key.subsector;
            row.gas = key.gas;
            row.period_start = key.period.start;
            row.period_end = key.period.end;
            row.tonnes = value.tonnes;
            row.provenance = key.provenance;
            row.confidence = value.confidence;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

void write_monthly_csv(const std::vector<EmissionRecord>& records, const std::string& path,
                       const std::string& config_json)
{
    std::vector<const EmissionRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& record : records) {
        sorted.push_back(&record);
    }
    std::sort(sorted.begin(), sorted.end(), [](const EmissionRecord* a, const EmissionRecord* b) {
        return std::tie(a->source, a->subsector, a->gas, a->period.start, a->country) <
               std::tie(b->source, b->subsector, b->gas, b->period.start, b->country);
    });

    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    CsvWriter writer(out);
    if (!config_json.empty()) {
        writer.comment("config " + config_json);
    }
    writer.row({"source_id", "source_type", "subsector", "country", "gas", "year", "month",
                "tonnes", "fill_flag", "provenance", "confidence", "uncertainty_pct"});
    for (const EmissionRecord* record : sorted) {
        const bool is_asset = record->provenance != Provenance::remainder;
        writer.row({record->source,
                    is_asset ? "asset" : monthly_source_type(*record),
                    record->subsector,
                    record->country,
                    to_string(record->gas),
                    std::to_string(record->period.start.year),
                    std::to_string(record->period.start.month),
                    format_double(record->tonnes),
                    to_string(record->fill),
                    to_string(record->provenance),
                    to_string(record->confidence),
                    record->uncertainty_pct ? format_double(*record->uncertainty_pct) : ""});
    }
}

Loaded<std::vector<EmissionRecord>> read_monthly_csv(const std::string& path)
{
    Loaded<std::vector<EmissionRecord>> result;
    CsvReader csv = CsvReader::from_file(path);
    for (const auto& required : {"source_id", "subsector", "country", "gas", "year", "month",
                                 "tonnes", "fill_flag", "provenance", "confidence"}) {
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
            EmissionRecord record;
            record.source = csv.get(row, "source_id").value_or("");
            record.subsector = csv.get(row, "subsector").value_or("");
            record.country = csv.get(row, "country").value_or("");
            auto gas = parse_gas(csv.get(row, "gas").value_or(""));
            auto provenance = parse_provenance(csv.get(row, "provenance").value_or(""));
            auto confidence = parse_confidence(csv.get(row, "confidence").value_or(""));
            if (!gas || !provenance || !confidence) {
                result.errors.push_back(prefix + "malformed monthly row");
                continue;
            }
            record.gas = *gas;
            record.provenance = *provenance;
            record.confidence = *confidence;
            const int year = parse_int_cell(csv.get(row, "year").value_or(""), path, line, "year");
            const int month = parse_int_cell(csv.get(row, "month").value_or(""), path, line, "month");
            if (month < 1 || month > 12) {
                result.errors.push_back(prefix + "month out of range");
                continue;
            }
            record.period = Period::month(YearMonth{year, month});
            record.tonnes =
                parse_double_cell(csv.get(row, "tonnes").value_or(""), path, line, "tonnes");
            if (auto u = csv.get(row, "uncertainty_pct")) {
                record.uncertainty_pct = parse_double_cell(*u, path, line, "uncertainty_pct");
            }
            result.value.push_back(std::move(record));
        } catch (const Error& e) {
            result.errors.push_back(e.what());
        }
    }
    return result;
}

void write_outputs(const SynthesisResult& result, const RunConfig& config,
                   const std::string& out_dir)
{
    fs::create_directories(out_dir);
    const std::string config_json = config.to_json();

    {
        std::ofstream out(fs::path(out_dir) / "run_config.json");
        out << config_json << "\n";
    }
    {
        // the report carries the config copy for provenance
        ordered_json doc = ordered_json::parse(result.report.to_json());
        doc["config"] = ordered_json::parse(config_json);
        std::ofstream out(fs::path(out_dir) / "run_report.json");
        out << doc.dump(2) << "\n";
    }
    if (result.status != RunStatus::ok) {
        // a failed conservation audit aborts the data exports; the report
        // above lists the failing keys
        return;
    }
    write_monthly_csv(result.asset_records, (fs::path(out_dir) / "monthly_assets.csv").string(),
                      config_json);
    write_monthly_csv(result.remainder_records,
                      (fs::path(out_dir) / "monthly_remainder.csv").string(), config_json);

    // boundaries reload for the rollup exports
    BoundaryIndex boundaries;
    if (!config.boundaries_path.empty()) {
        auto loaded = load_boundaries(config.boundaries_path);
        if (loaded.ok()) {
            boundaries = std::move(loaded.value);
        }
    }
    std::vector<EmissionRecord> all = result.asset_records;
    all.insert(all.end(), result.remainder_records.begin(), result.remainder_records.end());

    const bool want_csv = std::find(config.export_formats.begin(), config.export_formats.end(),
                                    ExportFormat::csv) != config.export_formats.end();
    const bool want_geojson = std::find(config.export_formats.begin(), config.export_formats.end(),
                                        ExportFormat::geojson) != config.export_formats.end();
    if (want_csv) {
        write_inventory_csv(annual_rollup_rows(all, boundaries),
                            (fs::path(out_dir) / "inventory.csv").string(), config_json);
    }
    if (want_geojson) {
        // asset-level annual rows with point locations
        std::map<std::tuple<std::string, std::string, Gas, int, Provenance>, InventoryRow> rows;
        AssetRegistry registry;
        auto loaded = load_asset_registry(config.assets_path, config.subsectors, config.cf_mode);
        if (loaded.ok()) {
            registry = std::move(loaded.value);
        }
        for (const auto& record : result.asset_records) {
            auto key = std::make_tuple(record.source, record.subsector, record.gas,
                                       record.period.start.year, record.provenance);
            auto [it, inserted] = rows.try_emplace(key);
            InventoryRow& row = it->second;
            if (inserted) {
                row.unit_id = record.source;
                row.level = "asset";
                row.subsector = record.subsector;
                row.gas = record.gas;
                row.period_start = Date{record.period.start.year, 1, 1};
                row.period_end = Date{record.period.start.year + 1, 1, 1};
                row.provenance = record.provenance;
                row.confidence = record.confidence;
                if (const Asset* asset = registry.find(record.source)) {
                    row.lat = asset->lat;
                    row.lon = asset->lon;
                }
            }
            row.tonnes += record.tonnes;
            row.confidence = std::min(row.confidence, record.confidence);
        }
        std::vector<InventoryRow> geo_rows;
        geo_rows.reserve(rows.size());
        for (auto& [key, row] : rows) {
            geo_rows.push_back(std::move(row));
        }
        write_inventory_geojson(std::move(geo_rows),
                                (fs::path(out_dir) / "assets.geojson").string(), config_json);
    }
}

ChangeReport diff_inventories(const std::string& old_inventory_csv,
                              const std::string& new_inventory_csv, double threshold_pct)
{
    auto old_loaded = read_inventory_csv(old_inventory_csv);
    auto new_loaded = read_inventory_csv(new_inventory_csv);
    if (!old_loaded.ok() || !new_loaded.ok()) {
        std::string message = "cannot diff inventories:";
        for (const auto& e : old_loaded.errors) message += " " + e;
        for (const auto& e : new_loaded.errors) message += " " + e;
        throw IoError(message);
    }

    using Key = std::tuple<std::string, std::string, std::string, Gas, std::string>;
    auto keyed = [](const std::vector<InventoryRow>& rows) {
        std::map<Key, double> totals;  // summed over provenance
        for (const auto& row : rows) {
            totals[{row.unit_id, row.level, row.subsector, row.gas,
                    row.period_start.to_string() + ".." + row.period_end.to_string()}] += row.tonnes;
        }
        return totals;
    };
    const auto old_totals = keyed(old_loaded.value);
    const auto new_totals = keyed(new_loaded.value);

    ChangeReport report;
    report.threshold_pct = threshold_pct;
    std::set<Key> keys;
    for (const auto& [key, value] : old_totals) keys.insert(key);
    for (const auto& [key, value] : new_totals) keys.insert(key);
    for (const auto& key : keys) {
        auto old_it = old_totals.find(key);
        auto new_it = new_totals.find(key);
        const double old_tonnes = old_it == old_totals.end() ? 0.0 : old_it->second;
        const double new_tonnes = new_it == new_totals.end() ? 0.0 : new_it->second;
        ChangeEntry entry;
        entry.unit_id = std::get<0>(key);
        entry.level = std::get<1>(key);
        entry.subsector = std::get<2>(key);
        entry.gas = std::get<3>(key);
        entry.period = std::get<4>(key);
        entry.old_tonnes = old_tonnes;
        entry.new_tonnes = new_tonnes;
        if (old_it == old_totals.end() || new_it == new_totals.end()) {
            if (old_tonnes != new_tonnes) {
                report.entries.push_back(std::move(entry));
            }
            continue;
        }
        if (old_tonnes == 0.0) {
            if (new_tonnes != 0.0) {
                report.entries.push_back(std::move(entry));
            }
            continue;
        }
        const double pct = (new_tonnes - old_tonnes) / old_tonnes * 100.0;
        entry.pct_change = pct;
        if (std::abs(pct) > threshold_pct) {
            report.entries.push_back(std::move(entry));
        }
    }
    return report;
}

void write_change_report(const ChangeReport& report, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    CsvWriter writer(out);
    writer.comment("threshold_pct " + format_double(report.threshold_pct));
    writer.row({"unit_id", "level", "subsector", "gas", "period", "old_tonnes", "new_tonnes",
                "pct_change"});
    for (const auto& entry : report.entries) {
        writer.row({entry.unit_id, entry.level, entry.subsector, to_string(entry.gas),
                    entry.period, format_double(entry.old_tonnes), format_double(entry.new_tonnes),
                    entry.pct_change ? format_double(*entry.pct_change) : ""});
    }
}

SynthesisResult iterate(const RunConfig& config, const std::string& previous_out_dir,
                        const std::string& out_dir)
{
    SynthesisResult result = synthesize(config);
    if (result.status == RunStatus::validation_failed) {
        return result;
    }
    write_outputs(result, config, out_dir);
    const auto old_inventory = fs::path(previous_out_dir) / "inventory.csv";
    const auto new_inventory = fs::path(out_dir) / "inventory.csv";
    if (fs::exists(old_inventory) && fs::exists(new_inventory)) {
        const ChangeReport changes = diff_inventories(old_inventory.string(),
                                                      new_inventory.string(),
                                                      config.change_threshold_pct);
        write_change_report(changes, (fs::path(out_dir) / "change_report.csv").string());
        result.report.notes.push_back("change report: " + std::to_string(changes.entries.size()) +
                                      " keys moved more than " +
                                      format_double(config.change_threshold_pct) + "%");
    }
    return result;
}

}  // namespace emsynth
