#pragma once

#include <memory>
#include <string>
#include <vector>

#include "odmforge/harmonise/zones.hpp"
#include "odmforge/ingest/ingest.hpp"

namespace odmforge::harmonise {

/// Synthetic durations used for the two sub-bins of a weekly rebin. They
/// are internal bin markers, not durations a provider may declare.
inline constexpr int kWeekdayBinMinutes = 5 * core::kMinutesPerDay;
inline constexpr int kWeekendBinMinutes = 2 * core::kMinutesPerDay;

/// Zoning id carried by feeds mapped onto the reference zoning.
std::string reference_zoning_id(int level);

/// Fans every cell out onto level-3 reference zones through the crosswalk
/// weights, then rolls up to `level` by ancestor aggregation. Total count
/// is preserved to 1e-9 relative.
ingest::CanonicalFeed map_zones(const ingest::CanonicalFeed& feed, const ZoneCrosswalk& xwalk,
                                const ZoneRegistry& registry, int level);

enum class TimeBin { daily, weekly };

/// Re-bins to calendar days (UTC), or to ISO weeks split into a weekday
/// (Mon-Fri) and a weekend (Sat-Sun) sub-bin.
ingest::CanonicalFeed rebin_time(const ingest::CanonicalFeed& feed, TimeBin target);

/// Scales every count by 1/market_share for a non-extrapolated provider.
ingest::CanonicalFeed extrapolate(const ingest::CanonicalFeed& feed,
                                  const ingest::ProviderProfile& profile);

/// One provider-day of harmonised movements on the reference zoning.
struct HarmonizedODM {
    struct Cell {
        std::uint32_t origin; // registry index at `level`
        std::uint32_t dest;
        double count;
    };

    core::Date day = 0;
    int level = kMaxLevel;
    std::string provider_id;
    std::vector<std::string> provenance;
    std::vector<Cell> cells; // sorted by (origin, dest)
    std::shared_ptr<const ZoneRegistry> registry;

    double total() const;
};

/// Partitions each daily reference-zone feed into one HarmonizedODM per
/// calendar day. Providers are kept separate; counts are never summed
/// across feeds.
std::vector<HarmonizedODM> build_harmonized(const std::vector<ingest::CanonicalFeed>& feeds,
                                            std::shared_ptr<const ZoneRegistry> registry,
                                            int level);

void write_harmonized_csv(const HarmonizedODM& odm, const std::filesystem::path& path);
HarmonizedODM read_harmonized_csv(const std::filesystem::path& path,
                                  std::shared_ptr<const ZoneRegistry> registry, core::Date day,
                                  int level, const std::string& provider_id);

} // namespace odmforge::harmonise
