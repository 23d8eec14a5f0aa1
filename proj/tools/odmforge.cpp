// odmforge command line: synthetic scenarios, privacy audit, harmonisation
// and the mobility data products, runnable stage by stage or end to end.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "odmforge/core/csv.hpp"
#include "odmforge/core/error.hpp"
#include "odmforge/core/text.hpp"
#include "odmforge/harmonise/harmonise.hpp"
#include "odmforge/mfa/mfa.hpp"
#include "odmforge/pipeline/pipeline.hpp"
#include "odmforge/privacy/privacy.hpp"
#include "odmforge/products/products.hpp"
#include "odmforge/synth/synth.hpp"

namespace {

using namespace odmforge;
namespace fs = std::filesystem;

products::DateRange parse_baseline(const std::string& text) {
    const auto sep = text.find(':');
    if (sep == std::string::npos)
        fail(Errc::bad_config, "baseline must be START:END, got '" + text + "'");
    return {core::parse_date(text.substr(0, sep)), core::parse_date(text.substr(sep + 1))};
}

struct HarmonisedDir {
    std::vector<harmonise::HarmonizedODM> odms;
    std::string provider_id;
    int level = 3;
};

HarmonisedDir load_harmonised(const fs::path& dir,
                              std::shared_ptr<const harmonise::ZoneRegistry> registry) {
    const fs::path meta_path = dir / "meta.json";
    auto in = core::open_input(meta_path);
    nlohmann::json meta = nlohmann::json::parse(in);
    HarmonisedDir out;
    out.provider_id = meta.at("provider_id").get<std::string>();
    out.level = meta.at("level").get<int>();
    for (const auto& day_text : meta.at("days")) {
        const core::Date day = core::parse_date(day_text.get<std::string>());
        out.odms.push_back(harmonise::read_harmonized_csv(
            dir / (day_text.get<std::string>() + ".csv"), registry, day, out.level,
            out.provider_id));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"odmforge - origin-destination mobility analytics toolkit"};
    app.require_subcommand(1);

    // ---- synth -------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic multi-provider scenario");
    std::string synth_spec, synth_out, synth_write_default;
    synth_cmd->add_option("--spec", synth_spec, "scenario spec JSON (default: built-in scenario)");
    synth_cmd->add_option("--output", synth_out, "output directory");
    synth_cmd->add_option("--write-default", synth_write_default,
                          "write the built-in scenario spec to this path and exit");

    // ---- audit ---------------------------------------------------------------
    auto* audit_cmd = app.add_subcommand("audit", "reasonability test of one provider feed");
    std::string audit_profile, audit_odm, audit_report;
    bool audit_permissive = false;
    int audit_ceiling = 5000;
    audit_cmd->add_option("--profile", audit_profile, "provider profile JSON")->required();
    audit_cmd->add_option("--odm", audit_odm, "ODM CSV feed")->required();
    audit_cmd->add_option("--report", audit_report, "write the report JSON here");
    audit_cmd->add_flag("--permissive", audit_permissive,
                        "admit sub-threshold rows instead of rejecting the feed");
    audit_cmd->add_option("--zone-ceiling", audit_ceiling, "max zones per feed");

    // ---- harmonise -----------------------------------------------------------
    auto* harm_cmd = app.add_subcommand("harmonise", "map one feed onto the reference zoning");
    std::string harm_profile, harm_odm, harm_xwalk, harm_zones, harm_out;
    int harm_level = 3, harm_k = 20;
    bool harm_permissive = false;
    harm_cmd->add_option("--profile", harm_profile)->required();
    harm_cmd->add_option("--odm", harm_odm)->required();
    harm_cmd->add_option("--crosswalk", harm_xwalk)->required();
    harm_cmd->add_option("--zones", harm_zones)->required();
    harm_cmd->add_option("--level", harm_level, "reference level 0..3");
    harm_cmd->add_option("--k-out", harm_k, "output suppression threshold");
    harm_cmd->add_option("--output", harm_out)->required();
    harm_cmd->add_flag("--permissive", harm_permissive);

    // ---- indicators ------------------------------------------------------------
    auto* ind_cmd = app.add_subcommand("indicators", "mobility indicators from harmonised files");
    std::string ind_dir, ind_zones, ind_out, ind_baseline;
    int ind_level = 3, ind_window = 4;
    double ind_trigger = 3.0;
    ind_cmd->add_option("--harmonised", ind_dir, "harmonised/<provider> directory")->required();
    ind_cmd->add_option("--zones", ind_zones)->required();
    ind_cmd->add_option("--level", ind_level);
    ind_cmd->add_option("--baseline", ind_baseline, "trend baseline START:END");
    ind_cmd->add_option("--anomaly-trigger", ind_trigger);
    ind_cmd->add_option("--anomaly-window", ind_window, "weeks of same-weekday history");
    ind_cmd->add_option("--output", ind_out)->required();

    // ---- connectivity ------------------------------------------------------------
    auto* conn_cmd = app.add_subcommand("connectivity", "weekly connectivity matrices");
    std::string conn_dir, conn_zones, conn_out;
    int conn_k = 20;
    conn_cmd->add_option("--harmonised", conn_dir)->required();
    conn_cmd->add_option("--zones", conn_zones)->required();
    conn_cmd->add_option("--k-out", conn_k);
    conn_cmd->add_option("--output", conn_out)->required();

    // ---- mfa ---------------------------------------------------------------------
    auto* mfa_cmd = app.add_subcommand("mfa", "mobility functional areas");
    std::string mfa_profile, mfa_odm, mfa_daily_file, mfa_geometry, mfa_out;
    double mfa_alpha = 0.5;
    bool mfa_permissive = false;
    mfa_cmd->add_option("--profile", mfa_profile, "provider profile (with --odm)");
    mfa_cmd->add_option("--odm", mfa_odm, "feed to cluster at provider granularity");
    mfa_cmd->add_option("--daily", mfa_daily_file, "precomputed daily MFA CSV");
    mfa_cmd->add_option("--alpha", mfa_alpha, "persistence threshold in (0,1]");
    mfa_cmd->add_option("--geometry", mfa_geometry, "zone geometry CSV for GeoJSON export");
    mfa_cmd->add_option("--output", mfa_out)->required();
    mfa_cmd->add_flag("--permissive", mfa_permissive);

    // ---- sweep -----------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "purge store files past the retention horizon");
    std::string sweep_store, sweep_now;
    int sweep_days = 0;
    sweep_cmd->add_option("--store", sweep_store)->required();
    sweep_cmd->add_option("--retention-days", sweep_days)->required();
    sweep_cmd->add_option("--now", sweep_now, "reference date (default: today UTC)");

    // ---- run ---------------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "full pipeline from a run config");
    std::string run_config, run_baseline, run_output;
    int run_level = 0, run_k = 0, run_retention = 0;
    double run_alpha = 0;
    bool run_permissive = false, run_strict = false;
    run_cmd->add_option("--config", run_config)->required();
    run_cmd->add_option("--level", run_level, "override reference level (0..3)");
    run_cmd->add_option("--k-out", run_k, "override the output suppression threshold");
    run_cmd->add_option("--alpha", run_alpha, "override the MFA persistence threshold");
    run_cmd->add_option("--baseline", run_baseline, "override trend baseline START:END");
    run_cmd->add_option("--output", run_output, "override the output directory");
    run_cmd->add_option("--retention-days", run_retention, "override the retention horizon");
    run_cmd->add_flag("--permissive", run_permissive, "admit sub-threshold input rows");
    run_cmd->add_flag("--strict", run_strict, "reject sub-threshold input rows (default)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) {
            if (!synth_write_default.empty()) {
                auto out = core::open_output(synth_write_default);
                out << synth::default_scenario().to_json().dump(2) << "\n";
                std::cout << "wrote default scenario spec to " << synth_write_default << "\n";
                if (synth_out.empty()) return 0;
            }
            if (synth_out.empty()) {
                std::cerr << "odmforge synth: --output is required\n";
                return 1;
            }
            synth::ScenarioSpec spec = synth_spec.empty() ? synth::default_scenario()
                                                          : synth::ScenarioSpec::load(synth_spec);
            synth::ScenarioFiles files = synth::generate_scenario(spec, synth_out);
            std::cout << "scenario written under " << files.root.string() << " ("
                      << files.rows_emitted << " ODM rows, " << files.feeds.size()
                      << " providers)\n";
            return 0;
        }

        if (audit_cmd->parsed()) {
            ingest::ProviderProfile profile = ingest::load_profile(audit_profile);
            auto cells = ingest::parse_odm(fs::path(audit_odm), profile,
                                           audit_permissive ? ingest::ParseMode::permissive
                                                            : ingest::ParseMode::strict);
            ingest::CanonicalFeed feed = ingest::canonicalize(cells, profile);
            privacy::ReasonabilityLimits limits;
            limits.zone_ceiling = audit_ceiling;
            privacy::ReasonabilityReport report = privacy::reasonability_test(feed, profile, limits);
            if (!audit_report.empty()) {
                auto out = core::open_output(audit_report);
                out << report.to_json().dump(2) << "\n";
            } else {
                std::cout << report.to_json().dump(2) << "\n";
            }
            std::cerr << "audit verdict for " << profile.provider_id << ": "
                      << (report.verdict ? "pass" : "fail") << "\n";
            return report.verdict ? 0 : 1;
        }

        if (harm_cmd->parsed()) {
            ingest::ProviderProfile profile = ingest::load_profile(harm_profile);
            auto cells = ingest::parse_odm(fs::path(harm_odm), profile,
                                           harm_permissive ? ingest::ParseMode::permissive
                                                           : ingest::ParseMode::strict);
            ingest::CanonicalFeed feed = ingest::canonicalize(cells, profile);
            if (!profile.extrapolated) feed = harmonise::extrapolate(feed, profile);
            auto registry = std::make_shared<const harmonise::ZoneRegistry>(
                harmonise::ZoneRegistry::load_csv(harm_zones));
            auto crosswalks = harmonise::load_crosswalks_csv(harm_xwalk);
            auto it = crosswalks.find(profile.zoning_id);
            if (it == crosswalks.end())
                fail(Errc::unknown_zoning, "no crosswalk for zoning '" + profile.zoning_id + "'");
            it->second.validate(*registry);
            auto mapped = harmonise::map_zones(feed, it->second, *registry, harm_level);
            auto daily = harmonise::rebin_time(mapped, harmonise::TimeBin::daily);
            auto odms = harmonise::build_harmonized({daily}, registry, harm_level);

            privacy::SuppressionPolicy policy{std::max(harm_k, profile.threshold_k),
                                              privacy::SuppressionPolicy::Strategy::drop};
            std::vector<std::string> days;
            const fs::path dir = fs::path(harm_out) / profile.provider_id;
            for (auto& odm : odms) {
                auto suppressed = privacy::suppress(odm, policy);
                harmonise::write_harmonized_csv(suppressed.odm,
                                                dir / (core::format_date(odm.day) + ".csv"));
                days.push_back(core::format_date(odm.day));
            }
            nlohmann::json meta = {{"provider_id", profile.provider_id},
                                   {"level", harm_level},
                                   {"days", days},
                                   {"zones", harm_zones}};
            auto out = core::open_output(dir / "meta.json");
            out << meta.dump(2) << "\n";
            std::cout << "harmonised " << days.size() << " day(s) for " << profile.provider_id
                      << " at level " << harm_level << " under " << dir.string() << "\n";
            return 0;
        }

        if (ind_cmd->parsed()) {
            auto registry = std::make_shared<const harmonise::ZoneRegistry>(
                harmonise::ZoneRegistry::load_csv(ind_zones));
            HarmonisedDir data = load_harmonised(ind_dir, registry);
            auto series = products::mobility_indicators(data.odms, ind_level);
            products::DateRange baseline{};
            if (!ind_baseline.empty()) {
                baseline = parse_baseline(ind_baseline);
            } else {
                core::Date first = data.odms.front().day, last = first;
                for (const auto& odm : data.odms) {
                    first = std::min(first, odm.day);
                    last = std::max(last, odm.day);
                }
                baseline = products::default_baseline(first, last);
            }
            std::vector<products::AnomalyFlag> flags;
            for (auto& s : series) {
                s = products::compute_trend(s, baseline);
                auto f = products::detect_anomalies(s, ind_trigger, ind_window);
                flags.insert(flags.end(), f.begin(), f.end());
            }
            {
                auto out = core::open_output(fs::path(ind_out) / "indicators.csv");
                products::write_indicators_csv(series, out);
            }
            {
                auto out = core::open_output(fs::path(ind_out) / "anomalies.csv");
                products::write_anomalies_csv(flags, data.provider_id, out);
            }
            std::cout << "wrote " << series.size() << " indicator series and " << flags.size()
                      << " anomaly flag(s) under " << ind_out << "\n";
            return 0;
        }

        if (conn_cmd->parsed()) {
            auto registry = std::make_shared<const harmonise::ZoneRegistry>(
                harmonise::ZoneRegistry::load_csv(conn_zones));
            HarmonisedDir data = load_harmonised(conn_dir, registry);
            privacy::SuppressionPolicy policy{conn_k, privacy::SuppressionPolicy::Strategy::drop};
            std::set<core::IsoWeek> weeks;
            for (const auto& odm : data.odms) weeks.insert(core::iso_week(odm.day));
            std::vector<products::ConnectivityMatrix> matrices;
            for (const auto& week : weeks) {
                auto [wd, we] = products::connectivity_matrix(data.odms, week, policy);
                matrices.push_back(std::move(wd));
                matrices.push_back(std::move(we));
            }
            auto out = core::open_output(fs::path(conn_out) / "connectivity.csv");
            products::write_connectivity_csv(matrices, out);
            std::cout << "wrote " << matrices.size() << " weekly matrices under " << conn_out
                      << "\n";
            return 0;
        }

        if (mfa_cmd->parsed()) {
            std::vector<mfa::DailyMFA> daily;
            if (!mfa_daily_file.empty()) {
                auto in = core::open_input(mfa_daily_file);
                daily = mfa::read_daily_csv(in, mfa_daily_file);
            } else {
                if (mfa_profile.empty() || mfa_odm.empty())
                    fail(Errc::bad_config, "mfa needs either --daily or --profile with --odm");
                ingest::ProviderProfile profile = ingest::load_profile(mfa_profile);
                auto cells = ingest::parse_odm(fs::path(mfa_odm), profile,
                                               mfa_permissive ? ingest::ParseMode::permissive
                                                              : ingest::ParseMode::strict);
                ingest::CanonicalFeed feed = ingest::canonicalize(cells, profile);
                for (core::Date day : feed.days())
                    daily.push_back(mfa::cluster_daily(mfa::build_graph(feed, day)));
                auto out = core::open_output(fs::path(mfa_out) / "mfa_daily.csv");
                mfa::write_daily_csv(daily, out);
            }
            auto persistent = mfa::fuzzy_intersect(daily, mfa_alpha);
            auto stability = mfa::daily_stability(daily);
            {
                auto out = core::open_output(fs::path(mfa_out) / "mfa_members.csv");
                mfa::write_members_csv(persistent, out);
            }
            {
                auto out = core::open_output(fs::path(mfa_out) / "mfa_stability.csv");
                mfa::write_stability_csv(stability, out);
            }
            if (!mfa_geometry.empty()) {
                auto table = mfa::GeometryTable::load_wkt_csv(mfa_geometry);
                auto geo = mfa::export_mfa_geojson(persistent, table);
                auto out = core::open_output(fs::path(mfa_out) / "mfa.geojson");
                out << geo.dump(2) << "\n";
            }
            std::cout << persistent.size() << " persistent MFA(s) from " << daily.size()
                      << " daily partition(s) under " << mfa_out << "\n";
            return 0;
        }

        if (sweep_cmd->parsed()) {
            const core::Date now =
                sweep_now.empty() ? core::today_utc() : core::parse_date(sweep_now);
            auto purged = privacy::retention_sweep(sweep_store, sweep_days, now);
            for (const auto& id : purged) std::cout << id << "\n";
            std::cerr << "purged " << purged.size() << " file(s)\n";
            return 0;
        }

        if (run_cmd->parsed()) {
            pipeline::RunConfig config = pipeline::RunConfig::load(run_config);
            if (run_cmd->count("--level")) config.level = run_level;
            if (run_cmd->count("--k-out")) config.k_out = run_k;
            if (run_cmd->count("--alpha")) config.alpha = run_alpha;
            if (run_cmd->count("--baseline")) config.baseline = parse_baseline(run_baseline);
            if (run_cmd->count("--output")) config.output_dir = run_output;
            if (run_cmd->count("--retention-days")) config.retention_days = run_retention;
            if (run_permissive) config.mode = ingest::ParseMode::permissive;
            if (run_strict) config.mode = ingest::ParseMode::strict;

            pipeline::RunResult result = pipeline::run_pipeline(config);
            for (const auto& d : result.diagnostics) std::cerr << "odmforge run: " << d << "\n";
            if (result.exit_code == 0)
                std::cout << "pipeline complete, manifest at " << result.manifest.string()
                          << "\n";
            return result.exit_code;
        }
    } catch (const OdmError& e) {
        std::cerr << "odmforge: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "odmforge: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
