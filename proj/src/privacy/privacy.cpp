#include "odmforge/privacy/privacy.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "odmforge/core/error.hpp"
#include "odmforge/core/text.hpp"

namespace odmforge::privacy {

void validate_policy(const SuppressionPolicy& policy,
                     std::span<const ingest::ProviderProfile> profiles) {
    if (policy.k_out < 1) fail(Errc::invalid_range, "k_out must be >= 1");
    int strictest = 0;
    for (const auto& p : profiles) strictest = std::max(strictest, p.threshold_k);
    if (policy.k_out < strictest)
        fail(Errc::invalid_range, "k_out " + std::to_string(policy.k_out) +
                                      " is weaker than the strictest provider threshold K=" +
                                      std::to_string(strictest));
}

SuppressResult suppress(const harmonise::HarmonizedODM& odm, const SuppressionPolicy& policy) {
    SuppressResult result;
    result.odm.day = odm.day;
    result.odm.level = odm.level;
    result.odm.provider_id = odm.provider_id;
    result.odm.provenance = odm.provenance;
    result.odm.registry = odm.registry;
    result.odm.provenance.push_back("suppressed below k_out=" + std::to_string(policy.k_out) +
                                    (policy.strategy == SuppressionPolicy::Strategy::mask
                                         ? " (masked)"
                                         : " (dropped)"));
    result.stats.cells_in = odm.cells.size();
    result.odm.cells.reserve(odm.cells.size());
    for (const auto& c : odm.cells) {
        if (c.count > 0 && c.count < policy.k_out) {
            ++result.stats.cells_suppressed;
            result.stats.count_suppressed += c.count;
            if (policy.strategy == SuppressionPolicy::Strategy::mask)
                result.odm.cells.push_back({c.origin, c.dest, 0.0});
        } else {
            result.odm.cells.push_back(c);
        }
    }
    return result;
}

nlohmann::json ReasonabilityReport::to_json() const {
    nlohmann::json doc;
    doc["feed_id"] = feed_id;
    doc["note"] = "reconstruction of the aggregate-data audit; the original quantitative "
                  "re-identification bound is not public";
    doc["verdict"] = verdict ? "pass" : "fail";
    doc["generated_at"] = generated_at;
    doc["checks"] = nlohmann::json::array();
    for (const CheckResult& c : checks)
        doc["checks"].push_back(
            {{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
    return doc;
}

namespace {

// Field names that indicate user- or device-level data. Aggregate ODM feeds
// must never carry them.
const std::set<std::string>& user_level_fields() {
    static const std::set<std::string> fields = {
        "imsi",   "imei",       "msisdn",     "user_id",   "device_id", "subscriber_id",
        "sim_id", "phone",      "phone_number", "customer_id", "mac",     "uid"};
    return fields;
}

} // namespace

ReasonabilityReport reasonability_test(const ingest::CanonicalFeed& feed,
                                       const ingest::ProviderProfile& profile,
                                       const ReasonabilityLimits& limits) {
    ReasonabilityReport report;
    report.feed_id = profile.provider_id;
    report.generated_at = core::now_utc_iso();

    // (a) schema is aggregate-only
    {
        CheckResult check{"schema-aggregate", true, "only aggregate ODM fields present"};
        const auto& allowed = ingest::canonical_feed_fields();
        for (const auto& [canonical, column] : profile.column_map) {
            const bool known =
                std::find(allowed.begin(), allowed.end(), canonical) != allowed.end();
            const bool suspicious = user_level_fields().count(core::to_lower(canonical)) ||
                                    user_level_fields().count(core::to_lower(column));
            if (!known || suspicious) {
                check.pass = false;
                check.details = "column_map exposes non-aggregate field '" + canonical + "' -> '" +
                                column + "'";
                break;
            }
        }
        report.checks.push_back(std::move(check));
    }

    // (b) every cell respects the declared confidentiality threshold
    {
        CheckResult check{"threshold", true, ""};
        std::size_t violations = 0;
        std::string first;
        double min_count = -1;
        for (std::size_t i = 0; i < feed.cells.size(); ++i) {
            const auto& c = feed.cells[i];
            if (min_count < 0 || c.count < min_count) min_count = c.count;
            if (c.count < profile.threshold_k) {
                if (violations == 0) {
                    const auto cell = feed.cell_at(i);
                    first = cell.origin.code + "->" + cell.destination.code + " @ " +
                            core::format_minute(cell.window.start) + " count " +
                            core::format_double(cell.count);
                }
                ++violations;
            }
        }
        if (violations > 0) {
            check.pass = false;
            check.details = std::to_string(violations) + " cell(s) below K=" +
                            std::to_string(profile.threshold_k) + "; first: " + first;
        } else {
            check.details = feed.empty() ? "empty feed"
                                         : "min cell count " + core::format_double(min_count) +
                                               " >= K=" + std::to_string(profile.threshold_k);
        }
        report.checks.push_back(std::move(check));
    }

    // (c) granularity stays within the agreed bounds
    {
        CheckResult check{"granularity", true, ""};
        if (profile.window_minutes < 15) {
            check.pass = false;
            check.details = "time window below 15 minutes";
        } else if (feed.zone_codes.size() > static_cast<std::size_t>(limits.zone_ceiling)) {
            check.pass = false;
            check.details = std::to_string(feed.zone_codes.size()) + " zones exceed the ceiling of " +
                            std::to_string(limits.zone_ceiling);
        } else {
            check.details = "window " + std::to_string(profile.window_minutes) + " min, " +
                            std::to_string(feed.zone_codes.size()) + " zones (ceiling " +
                            std::to_string(limits.zone_ceiling) + ")";
        }
        report.checks.push_back(std::move(check));
    }

    // (d) attribute slices respect the threshold as well
    {
        CheckResult check{"attribute-sparsity", true, ""};
        if (!feed.has_attributes()) {
            check.details = "no attribute-disaggregated cells";
        } else {
            std::map<std::uint32_t, double> slice_min;
            for (const auto& c : feed.cells) {
                if (c.attrs() == 0) continue;
                auto [it, inserted] = slice_min.try_emplace(c.attrs(), c.count);
                if (!inserted) it->second = std::min(it->second, c.count);
            }
            std::string offending;
            for (const auto& [attr, min_count] : slice_min) {
                if (min_count < profile.threshold_k) {
                    const auto& a = feed.attr_sets[attr];
                    offending += (offending.empty() ? "" : ", ") + std::string("{") + a.age_band +
                                 "," + a.sex + "," + a.roamer_direction + "} min " +
                                 core::format_double(min_count);
                }
            }
            if (!offending.empty()) {
                check.pass = false;
                check.details = "attribute slice(s) below K: " + offending;
            } else {
                check.details = std::to_string(slice_min.size()) +
                                " attribute slice(s), all at or above K";
            }
        }
        report.checks.push_back(std::move(check));
    }

    report.verdict = std::all_of(report.checks.begin(), report.checks.end(),
                                 [](const CheckResult& c) { return c.pass; });
    return report;
}

namespace {

// First YYYY-MM-DD embedded in the file name, if any.
std::optional<core::Date> embedded_date(const std::string& name) {
    for (std::size_t i = 0; i + 10 <= name.size(); ++i) {
        const std::string_view candidate(name.data() + i, 10);
        bool shaped = candidate[4] == '-' && candidate[7] == '-';
        for (std::size_t j : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
            shaped = shaped && candidate[j] >= '0' && candidate[j] <= '9';
        if (!shaped) continue;
        try {
            return core::parse_date(candidate);
        } catch (const OdmError&) {
            continue;
        }
    }
    return std::nullopt;
}

} // namespace

std::vector<std::string> retention_sweep(const std::filesystem::path& store_root,
                                         int horizon_days, core::Date now) {
    if (horizon_days <= 0) fail(Errc::invalid_range, "horizon_days must be positive");
    std::error_code ec;
    if (!std::filesystem::is_directory(store_root, ec) || ec)
        fail(Errc::storage_unavailable, "store root " + store_root.string() + " is not accessible");

    const core::Date cutoff = now - horizon_days;
    std::vector<std::string> purged;
    try {
        for (const auto& entry : std::filesystem::recursive_directory_iterator(store_root)) {
            if (!entry.is_regular_file()) continue;
            auto date = embedded_date(entry.path().filename().string());
            if (date && *date < cutoff) {
                std::error_code rm;
                std::filesystem::remove(entry.path(), rm);
                if (rm) fail(Errc::storage_unavailable, "cannot purge " + entry.path().string());
                purged.push_back(std::filesystem::relative(entry.path(), store_root).string());
            }
        }
    } catch (const std::filesystem::filesystem_error& e) {
        fail(Errc::storage_unavailable, std::string("store scan failed: ") + e.what());
    }
    std::sort(purged.begin(), purged.end());
    return purged;
}

} // namespace odmforge::privacy
