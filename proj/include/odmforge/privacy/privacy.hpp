#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "odmforge/harmonise/harmonise.hpp"
#include "odmforge/ingest/ingest.hpp"

namespace odmforge::privacy {

struct SuppressionPolicy {
    int k_out = 20;
    enum class Strategy {
        drop, // remove the cell
        mask  // keep the pair with the count replaced by 0
    } strategy = Strategy::drop;
};

/// The output threshold must never weaken the strictest provider guarantee.
void validate_policy(const SuppressionPolicy& policy,
                     std::span<const ingest::ProviderProfile> profiles);

struct SuppressionStats {
    std::size_t cells_in = 0;
    std::size_t cells_suppressed = 0;
    double count_suppressed = 0;

    SuppressionStats& operator+=(const SuppressionStats& other) {
        cells_in += other.cells_in;
        cells_suppressed += other.cells_suppressed;
        count_suppressed += other.count_suppressed;
        return *this;
    }
};

struct SuppressResult {
    harmonise::HarmonizedODM odm;
    SuppressionStats stats;
};

/// Removes (or masks) every cell with 0 < count < k_out.
SuppressResult suppress(const harmonise::HarmonizedODM& odm, const SuppressionPolicy& policy);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string details;
};

struct ReasonabilityReport {
    std::string feed_id;
    std::vector<CheckResult> checks;
    bool verdict = false; // pass iff every check passes
    std::string generated_at;

    nlohmann::json to_json() const;
};

struct ReasonabilityLimits {
    int zone_ceiling = 5000; // max distinct zones per feed/country
};

/// Audits a canonical feed against its declared profile: aggregate-only
/// schema, threshold compliance, granularity bounds and attribute-slice
/// sparsity. Failures are report content, never exceptions.
ReasonabilityReport reasonability_test(const ingest::CanonicalFeed& feed,
                                       const ingest::ProviderProfile& profile,
                                       const ReasonabilityLimits& limits = {});

/// Deletes store files whose embedded data date (YYYY-MM-DD in the file
/// name) is older than now - horizon_days. Returns the purged identifiers
/// (paths relative to the store root, sorted). Idempotent.
std::vector<std::string> retention_sweep(const std::filesystem::path& store_root,
                                         int horizon_days, core::Date now);

} // namespace odmforge::privacy
