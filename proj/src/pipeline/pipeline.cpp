#include "odmforge/pipeline/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "odmforge/core/csv.hpp"
#include "odmforge/core/error.hpp"
#include "odmforge/core/parallel.hpp"
#include "odmforge/core/text.hpp"
#include "odmforge/harmonise/harmonise.hpp"
#include "odmforge/mfa/mfa.hpp"

namespace odmforge::pipeline {

namespace fs = std::filesystem;

RunConfig RunConfig::from_json(const nlohmann::json& doc, const std::string& source) {
    RunConfig config;
    try {
        for (const auto& p : doc.at("profiles")) config.profiles.emplace_back(p.get<std::string>());
        for (const auto& p : doc.at("odms")) config.odms.emplace_back(p.get<std::string>());
        for (const auto& p : doc.at("crosswalks"))
            config.crosswalks.emplace_back(p.get<std::string>());
        config.zones = doc.at("zones").get<std::string>();
        if (doc.contains("geometry")) config.geometry = fs::path(doc["geometry"].get<std::string>());
        config.level = doc.value("level", 3);
        config.k_out = doc.value("k_out", 20);
        if (doc.value("strategy", "drop") == "mask")
            config.strategy = privacy::SuppressionPolicy::Strategy::mask;
        if (doc.contains("baseline")) {
            config.baseline = products::DateRange{
                core::parse_date(doc["baseline"].at("start").get<std::string>()),
                core::parse_date(doc["baseline"].at("end").get<std::string>())};
        }
        config.alpha = doc.value("alpha", 0.5);
        config.output_dir = doc.at("output_dir").get<std::string>();
        if (doc.contains("retention_days")) config.retention_days = doc["retention_days"].get<int>();
        if (doc.contains("retention_now"))
            config.retention_now = core::parse_date(doc["retention_now"].get<std::string>());
        if (doc.value("mode", "strict") == "permissive") config.mode = ingest::ParseMode::permissive;
        if (doc.contains("anomaly")) {
            config.anomaly.trigger = doc["anomaly"].value("trigger", 3.0);
            config.anomaly.window_weeks = doc["anomaly"].value("window_weeks", 4);
        }
        if (doc.contains("mfa_source")) config.mfa_source = doc["mfa_source"].get<std::string>();
        config.zone_ceiling = doc.value("zone_ceiling", 5000);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::bad_config, source + ": " + e.what());
    }
    config.validate();
    return config;
}

RunConfig RunConfig::load(const fs::path& path) {
    auto in = core::open_input(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::bad_config, path.string() + ": " + e.what());
    }
    return from_json(doc, path.string());
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json doc;
    for (const auto& p : profiles) doc["profiles"].push_back(p.string());
    for (const auto& p : odms) doc["odms"].push_back(p.string());
    for (const auto& p : crosswalks) doc["crosswalks"].push_back(p.string());
    doc["zones"] = zones.string();
    if (geometry) doc["geometry"] = geometry->string();
    doc["level"] = level;
    doc["k_out"] = k_out;
    doc["strategy"] =
        strategy == privacy::SuppressionPolicy::Strategy::mask ? "mask" : "drop";
    if (baseline)
        doc["baseline"] = {{"start", core::format_date(baseline->start)},
                           {"end", core::format_date(baseline->end)}};
    doc["alpha"] = alpha;
    doc["output_dir"] = output_dir.string();
    if (retention_days) doc["retention_days"] = *retention_days;
    if (retention_now) doc["retention_now"] = core::format_date(*retention_now);
    doc["mode"] = mode == ingest::ParseMode::permissive ? "permissive" : "strict";
    doc["anomaly"] = {{"trigger", anomaly.trigger}, {"window_weeks", anomaly.window_weeks}};
    if (mfa_source) doc["mfa_source"] = *mfa_source;
    doc["zone_ceiling"] = zone_ceiling;
    return doc;
}

void RunConfig::validate() const {
    if (profiles.empty()) fail(Errc::bad_config, "config: no provider profiles");
    if (profiles.size() != odms.size())
        fail(Errc::bad_config, "config: profiles and odms must pair up (" +
                                   std::to_string(profiles.size()) + " vs " +
                                   std::to_string(odms.size()) + ")");
    if (level < 0 || level > harmonise::kMaxLevel)
        fail(Errc::bad_config, "config: level outside 0..3");
    if (k_out < 1) fail(Errc::bad_config, "config: k_out must be >= 1");
    if (!(alpha > 0 && alpha <= 1)) fail(Errc::bad_config, "config: alpha outside (0,1]");
    if (output_dir.empty()) fail(Errc::bad_config, "config: output_dir missing");
    for (const auto& p : profiles)
        if (!fs::exists(p)) fail(Errc::bad_config, "config: missing profile " + p.string());
    for (const auto& p : odms)
        if (!fs::exists(p)) fail(Errc::bad_config, "config: missing odm " + p.string());
    for (const auto& p : crosswalks)
        if (!fs::exists(p)) fail(Errc::bad_config, "config: missing crosswalk " + p.string());
    if (!fs::exists(zones)) fail(Errc::bad_config, "config: missing zones " + zones.string());
    if (geometry && !fs::exists(*geometry))
        fail(Errc::bad_config, "config: missing geometry " + geometry->string());
}

namespace {

std::uint64_t config_hash(const RunConfig& config) {
    return core::fnv1a64(config.to_json().dump());
}

std::string hex64(std::uint64_t value) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

} // namespace

RunResult run_pipeline(const RunConfig& config) {
    RunResult result;
    nlohmann::json manifest;
    manifest["tool"] = "odmforge";
    manifest["version"] = kToolVersion;
    manifest["config_hash"] = hex64(config_hash(config));
    manifest["generated_at"] = core::now_utc_iso();

    std::string stage = "setup";
    try {
        config.validate();
        fs::create_directories(config.output_dir);

        // ---- ingest ------------------------------------------------------
        stage = "ingest";
        std::vector<ingest::ProviderProfile> profiles;
        std::vector<ingest::CanonicalFeed> feeds;
        for (std::size_t i = 0; i < config.profiles.size(); ++i) {
            ingest::ProviderProfile profile = ingest::load_profile(config.profiles[i]);
            std::vector<ingest::ODMCell> cells =
                ingest::parse_odm(config.odms[i], profile, config.mode);
            ingest::CanonicalFeed feed = ingest::canonicalize(cells, profile);
            manifest["stages"]["ingest"][profile.provider_id] = {
                {"rows", cells.size()}, {"canonical_cells", feed.size()},
                {"total_count", feed.total_count()}};
            profiles.push_back(std::move(profile));
            feeds.push_back(std::move(feed));
        }

        // ---- reasonability gate -------------------------------------------
        stage = "reasonability";
        privacy::ReasonabilityLimits limits;
        limits.zone_ceiling = config.zone_ceiling;
        bool all_pass = true;
        for (std::size_t i = 0; i < feeds.size(); ++i) {
            privacy::ReasonabilityReport report =
                privacy::reasonability_test(feeds[i], profiles[i], limits);
            const fs::path report_path =
                config.output_dir / "reports" /
                ("reasonability_" + profiles[i].provider_id + ".json");
            auto out = core::open_output(report_path);
            out << report.to_json().dump(2) << "\n";
            manifest["stages"]["reasonability"][profiles[i].provider_id] =
                report.verdict ? "pass" : "fail";
            if (!report.verdict) {
                all_pass = false;
                result.diagnostics.push_back("reasonability: feed of provider " +
                                             profiles[i].provider_id + " failed the audit (see " +
                                             report_path.string() + ")");
            }
        }
        if (!all_pass) {
            result.exit_code = 2;
            return result; // hard gate: no products are written
        }

        // ---- harmonise -----------------------------------------------------
        stage = "harmonise";
        auto registry =
            std::make_shared<const harmonise::ZoneRegistry>(harmonise::ZoneRegistry::load_csv(config.zones));
        std::map<std::string, harmonise::ZoneCrosswalk> crosswalks;
        for (const auto& path : config.crosswalks)
            for (auto& [zoning_id, xwalk] : harmonise::load_crosswalks_csv(path)) {
                xwalk.validate(*registry);
                crosswalks[zoning_id] = std::move(xwalk);
            }

        std::vector<ingest::CanonicalFeed> daily3(feeds.size());
        std::vector<ingest::CanonicalFeed> dailyL(feeds.size());
        for (std::size_t i = 0; i < feeds.size(); ++i) {
            auto xwalk = crosswalks.find(profiles[i].zoning_id);
            if (xwalk == crosswalks.end())
                fail(Errc::unknown_zoning,
                     "no crosswalk for zoning '" + profiles[i].zoning_id + "'");
            ingest::CanonicalFeed feed = feeds[i];
            if (!profiles[i].extrapolated) feed = harmonise::extrapolate(feed, profiles[i]);
            ingest::CanonicalFeed mapped3 =
                harmonise::map_zones(feed, xwalk->second, *registry, harmonise::kMaxLevel);
            daily3[i] = harmonise::rebin_time(mapped3, harmonise::TimeBin::daily);
            if (config.level == harmonise::kMaxLevel) {
                dailyL[i] = daily3[i];
            } else {
                ingest::CanonicalFeed mappedL =
                    harmonise::map_zones(feed, xwalk->second, *registry, config.level);
                dailyL[i] = harmonise::rebin_time(mappedL, harmonise::TimeBin::daily);
            }
            manifest["stages"]["harmonise"][profiles[i].provider_id] = {
                {"daily_cells_nuts3", daily3[i].size()},
                {"total_count", daily3[i].total_count()}};
        }

        std::vector<harmonise::HarmonizedODM> odms3 =
            harmonise::build_harmonized(daily3, registry, harmonise::kMaxLevel);
        std::vector<harmonise::HarmonizedODM> odmsL =
            config.level == harmonise::kMaxLevel
                ? odms3
                : harmonise::build_harmonized(dailyL, registry, config.level);

        // ---- suppress ------------------------------------------------------
        stage = "suppress";
        privacy::SuppressionPolicy policy{config.k_out, config.strategy};
        int strictest = 0;
        for (const auto& p : profiles) strictest = std::max(strictest, p.threshold_k);
        if (policy.k_out < strictest) {
            policy.k_out = strictest;
            manifest["stages"]["suppress"]["note"] =
                "k_out raised from " + std::to_string(config.k_out) + " to " +
                std::to_string(strictest) + " (strictest provider guarantee)";
        }
        privacy::validate_policy(policy, profiles);
        manifest["stages"]["suppress"]["k_out"] = policy.k_out;

        privacy::SuppressionStats totals;
        auto suppress_all = [&](std::vector<harmonise::HarmonizedODM>& odms) {
            for (auto& odm : odms) {
                privacy::SuppressResult r = privacy::suppress(odm, policy);
                totals += r.stats;
                odm = std::move(r.odm);
            }
        };
        suppress_all(odms3);
        if (config.level != harmonise::kMaxLevel) suppress_all(odmsL);
        else odmsL = odms3;
        manifest["stages"]["suppress"]["cells_in"] = totals.cells_in;
        manifest["stages"]["suppress"]["cells_suppressed"] = totals.cells_suppressed;
        manifest["stages"]["suppress"]["count_suppressed"] = totals.count_suppressed;

        // harmonised per-day files (post-suppression, at the configured level)
        std::map<std::string, std::vector<std::string>> harmonised_days;
        for (const auto& odm : odmsL) {
            const fs::path path = config.output_dir / "harmonised" / odm.provider_id /
                                  (core::format_date(odm.day) + ".csv");
            harmonise::write_harmonized_csv(odm, path);
            harmonised_days[odm.provider_id].push_back(core::format_date(odm.day));
        }
        for (const auto& [provider, days] : harmonised_days) {
            nlohmann::json meta;
            meta["provider_id"] = provider;
            meta["level"] = config.level;
            meta["days"] = days;
            meta["zones"] = config.zones.string();
            auto out =
                core::open_output(config.output_dir / "harmonised" / provider / "meta.json");
            out << meta.dump(2) << "\n";
        }

        // ---- products ------------------------------------------------------
        stage = "products";
        std::vector<products::MobilityIndicatorSeries> all_series;
        std::vector<products::AnomalyFlag> all_flags;
        std::vector<std::string> flag_providers;
        std::vector<products::ConnectivityMatrix> all_matrices;

        std::map<std::string, std::vector<harmonise::HarmonizedODM>> odms_by_provider;
        for (const auto& odm : odms3) odms_by_provider[odm.provider_id].push_back(odm);

        // keep provider output order aligned with the configured order
        for (const auto& profile : profiles) {
            const auto& odms = odms_by_provider[profile.provider_id];
            if (odms.empty()) continue;
            std::vector<products::MobilityIndicatorSeries> series =
                products::mobility_indicators(odms, config.level);

            core::Date first = odms.front().day, last = odms.front().day;
            for (const auto& odm : odms) {
                first = std::min(first, odm.day);
                last = std::max(last, odm.day);
            }
            std::optional<products::DateRange> baseline = config.baseline;
            std::string trend_note;
            if (!baseline) {
                try {
                    baseline = products::default_baseline(first, last);
                } catch (const OdmError& e) {
                    trend_note = e.what();
                }
            }
            if (baseline) {
                for (auto& s : series) s = products::compute_trend(s, *baseline);
                manifest["stages"]["products"]["baseline"] = {
                    {"start", core::format_date(baseline->start)},
                    {"end", core::format_date(baseline->end)}};
            } else {
                manifest["stages"]["products"]["trend_note"] = trend_note;
            }

            for (const auto& s : series) {
                auto flags =
                    products::detect_anomalies(s, config.anomaly.trigger, config.anomaly.window_weeks);
                for (auto& f : flags) {
                    all_flags.push_back(std::move(f));
                    flag_providers.push_back(profile.provider_id);
                }
            }

            std::set<core::IsoWeek> weeks;
            for (const auto& odm : odms) weeks.insert(core::iso_week(odm.day));
            for (const core::IsoWeek& week : weeks) {
                auto [wd, we] = products::connectivity_matrix(odms, week, policy);
                all_matrices.push_back(std::move(wd));
                all_matrices.push_back(std::move(we));
            }

            manifest["stages"]["products"][profile.provider_id] = {
                {"series", series.size()},
                {"weeks", weeks.size()}};
            for (auto& s : series) all_series.push_back(std::move(s));
        }

        {
            auto out = core::open_output(config.output_dir / "products" / "indicators.csv");
            products::write_indicators_csv(all_series, out);
        }
        {
            auto out = core::open_output(config.output_dir / "products" / "connectivity.csv");
            products::write_connectivity_csv(all_matrices, out);
        }
        {
            auto out = core::open_output(config.output_dir / "products" / "anomalies.csv");
            core::write_csv_row(out, {"provider_id", "nuts_code", "date", "metric", "zscore",
                                      "direction"});
            for (std::size_t i = 0; i < all_flags.size(); ++i) {
                const auto& f = all_flags[i];
                core::write_csv_row(out, {flag_providers[i], f.region, core::format_date(f.date),
                                          f.metric, core::format_fixed(f.zscore, 6),
                                          products::direction_name(f.direction)});
            }
        }
        manifest["stages"]["products"]["indicator_series"] = all_series.size();
        manifest["stages"]["products"]["anomaly_flags"] = all_flags.size();
        manifest["stages"]["products"]["connectivity_matrices"] = all_matrices.size();

        // ---- mfa -----------------------------------------------------------
        stage = "mfa";
        std::size_t source_index = 0;
        if (config.mfa_source) {
            bool found = false;
            for (std::size_t i = 0; i < profiles.size(); ++i)
                if (profiles[i].provider_id == *config.mfa_source) {
                    source_index = i;
                    found = true;
                }
            if (!found)
                fail(Errc::bad_config, "mfa_source '" + *config.mfa_source +
                                           "' is not a configured provider");
        } else {
            for (std::size_t i = 1; i < feeds.size(); ++i)
                if (feeds[i].zone_codes.size() > feeds[source_index].zone_codes.size())
                    source_index = i;
        }
        const ingest::CanonicalFeed& mfa_feed = feeds[source_index];
        manifest["stages"]["mfa"]["source_provider"] = mfa_feed.meta.provider_id;

        const std::vector<core::Date> mfa_days = mfa_feed.days();
        std::vector<mfa::DailyMFA> daily_mfas(mfa_days.size());
        core::parallel_for(mfa_days.size(), [&](std::size_t i) {
            daily_mfas[i] = mfa::cluster_daily(mfa::build_graph(mfa_feed, mfa_days[i]));
        });
        std::vector<mfa::PersistentMFA> persistent = mfa::fuzzy_intersect(daily_mfas, config.alpha);
        std::vector<mfa::StabilityPoint> stability = mfa::daily_stability(daily_mfas);

        {
            auto out = core::open_output(config.output_dir / "products" / "mfa_daily.csv");
            mfa::write_daily_csv(daily_mfas, out);
        }
        {
            auto out = core::open_output(config.output_dir / "products" / "mfa_members.csv");
            mfa::write_members_csv(persistent, out);
        }
        {
            auto out = core::open_output(config.output_dir / "products" / "mfa_stability.csv");
            mfa::write_stability_csv(stability, out);
        }
        if (config.geometry) {
            mfa::GeometryTable table = mfa::GeometryTable::load_wkt_csv(*config.geometry);
            nlohmann::json geo = mfa::export_mfa_geojson(persistent, table);
            auto out = core::open_output(config.output_dir / "products" / "mfa.geojson");
            out << geo.dump(2) << "\n";
        }
        manifest["stages"]["mfa"]["daily"] = daily_mfas.size();
        manifest["stages"]["mfa"]["persistent"] = persistent.size();
        manifest["stages"]["mfa"]["alpha"] = config.alpha;

        // ---- retention -----------------------------------------------------
        if (config.retention_days) {
            stage = "retention";
            const core::Date now =
                config.retention_now ? *config.retention_now : core::today_utc();
            auto purged =
                privacy::retention_sweep(config.output_dir, *config.retention_days, now);
            manifest["stages"]["retention"] = {{"horizon_days", *config.retention_days},
                                               {"purged", purged}};
        }

        // ---- manifest ------------------------------------------------------
        stage = "manifest";
        result.manifest = config.output_dir / "manifest.json";
        auto out = core::open_output(result.manifest);
        out << manifest.dump(2) << "\n";
    } catch (const std::exception& e) {
        result.exit_code = 1;
        result.diagnostics.push_back(stage + ": " + e.what());
    }
    return result;
}

} // namespace odmforge::pipeline
