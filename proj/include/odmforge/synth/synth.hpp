#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "odmforge/ingest/ingest.hpp"

namespace odmforge::synth {

/// One synthetic base zone. Base codes double as NUTS3 codes (5 characters,
/// prefix-consistent), so the reference hierarchy can be derived from them.
struct SynthZone {
    std::string code;
    double x = 0, y = 0;   // abstract plane, gravity distances
    std::int64_t population = 0;
    std::string metro;     // planted ground-truth cluster label
};

struct ModulationPhase {
    core::Date from = 0;
    double multiplier = 1.0;
};

/// Per-date demand multiplier: step phases, a weekend factor and sparse
/// multiplicative overrides (anomaly injection).
struct ModulationSpec {
    std::vector<ModulationPhase> phases; // sorted by `from`; 1.0 before the first
    double weekend_factor = 1.0;
    std::map<core::Date, double> overrides;

    double at(core::Date day) const;
};

struct ProviderSpec {
    ingest::ProviderProfile profile;
    std::map<std::string, std::string> zone_map; // base zone -> provider zone
    double sim_market_share = 1.0;               // subscriber share used for generation
    bool integer_counts = true;                  // device counts
    double roamer_share = 0.0;                   // extra inbound-roamer slice, 0 = none
};

struct ScenarioSpec {
    std::uint64_t seed = 1;
    core::Date start_date = 0;
    int num_days = 0;
    double gravity_scale = 0;
    double distance_decay = 1.0;
    double self_rate = 0;     // internal flow per head of population
    double noise_sigma = 0;   // multiplicative log-normal, mean one
    std::vector<SynthZone> zones;
    ModulationSpec modulation;
    std::vector<ProviderSpec> providers;

    void validate() const;

    static ScenarioSpec from_json(const nlohmann::json& doc, const std::string& source);
    static ScenarioSpec load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

/// The planted two-metro, three-provider scenario exercising every
/// heterogeneity axis.
ScenarioSpec default_scenario();

/// Expected (pre-noise, full-population) daily flow between base zones.
double truth_flow(const ScenarioSpec& spec, std::size_t origin, std::size_t destination,
                  core::Date day);

struct ScenarioFiles {
    std::filesystem::path root;
    std::vector<std::filesystem::path> profiles;
    std::vector<std::filesystem::path> feeds;
    std::filesystem::path zones_csv;
    std::filesystem::path crosswalks_csv;
    std::filesystem::path geometry_csv;
    std::filesystem::path truth_flows_csv;
    std::filesystem::path truth_metros_csv;
    std::filesystem::path scenario_json;
    std::filesystem::path run_config_json;
    std::size_t rows_emitted = 0;
};

/// Writes the full multi-provider scenario: provider profiles and ODM CSVs,
/// the reference zoning, crosswalks, zone geometry, ground truth tables and
/// a ready-to-run pipeline config. Byte-identical for identical specs.
ScenarioFiles generate_scenario(const ScenarioSpec& spec, const std::filesystem::path& out_dir);

} // namespace odmforge::synth
