#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "odmforge/ingest/ingest.hpp"
#include "odmforge/privacy/privacy.hpp"
#include "odmforge/products/products.hpp"

namespace odmforge::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";

struct AnomalyConfig {
    double trigger = 3.0;
    int window_weeks = 4;
};

struct RunConfig {
    std::vector<std::filesystem::path> profiles; // paired index-wise with odms
    std::vector<std::filesystem::path> odms;
    std::vector<std::filesystem::path> crosswalks;
    std::filesystem::path zones;
    std::optional<std::filesystem::path> geometry; // enables the GeoJSON export
    int level = 3;
    int k_out = 20;
    privacy::SuppressionPolicy::Strategy strategy = privacy::SuppressionPolicy::Strategy::drop;
    std::optional<products::DateRange> baseline; // default: earliest 4 full ISO weeks
    double alpha = 0.5;
    std::filesystem::path output_dir;
    std::optional<int> retention_days;
    std::optional<core::Date> retention_now; // defaults to today (UTC)
    ingest::ParseMode mode = ingest::ParseMode::strict;
    AnomalyConfig anomaly;
    std::optional<std::string> mfa_source; // provider_id; default: finest zoning
    int zone_ceiling = 5000;

    static RunConfig from_json(const nlohmann::json& doc, const std::string& source);
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void validate() const;
};

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> diagnostics; // stage-named messages
    std::filesystem::path manifest;
};

/// Runs ingest -> reasonability gate -> harmonise -> suppress -> products
/// and MFA, writing all artifacts under config.output_dir. Outputs are
/// deterministic for identical inputs (timestamps aside).
RunResult run_pipeline(const RunConfig& config);

} // namespace odmforge::pipeline
