#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odmforge/harmonise/harmonise.hpp"
#include "odmforge/privacy/privacy.hpp"

namespace odmforge::products {

struct IndicatorPoint {
    core::Date date = 0;
    double internal = 0; // origin and destination inside the region
    double inward = 0;   // destination inside, origin outside
    double outward = 0;  // origin inside, destination outside
    double total = 0;    // internal + inward + outward
    std::optional<double> trend_pct;
};

/// Daily directional mobility of one region for one provider.
struct MobilityIndicatorSeries {
    std::string region; // nuts code
    int level = 0;
    std::string provider_id;
    std::vector<IndicatorPoint> points; // dates strictly increasing
};

/// Classifies each day's flows by direction for every region at `level`
/// that is touched by the odms. The odms must all belong to one provider
/// and be harmonised at NUTS3 (or finer than the requested level).
std::vector<MobilityIndicatorSeries>
mobility_indicators(const std::vector<harmonise::HarmonizedODM>& odms, int level);

struct DateRange {
    core::Date start = 0;
    core::Date end = 0; // inclusive

    bool contains(core::Date d) const { return d >= start && d <= end; }
};

/// Earliest span of 4 full ISO weeks inside [first, last]; the usual
/// pre-crisis reference window.
DateRange default_baseline(core::Date first, core::Date last);

/// Fills trend_pct: 100 * total(d) / median of total over baseline dates of
/// the same day class (weekday vs weekend). Baseline dates get trends too.
MobilityIndicatorSeries compute_trend(const MobilityIndicatorSeries& series, DateRange baseline);

struct ConnectivityMatrix {
    struct Entry {
        std::uint32_t origin; // registry index at level 3
        std::uint32_t dest;
        double count;
    };

    core::IsoWeek week{};
    enum class DayClass { weekday, weekend } day_class = DayClass::weekday;
    int level = harmonise::kMaxLevel; // fixed at NUTS3
    std::string provider_id;
    std::vector<Entry> entries; // sorted by (origin, dest), no diagonal
    std::vector<core::Date> missing_days;
    std::shared_ptr<const harmonise::ZoneRegistry> registry;

    double total() const;
};

/// Sums the week's daily NUTS3 odms into a weekday (Mon-Fri) and a weekend
/// (Sat-Sun) matrix. Internal movements are excluded; output suppression is
/// applied per the policy.
std::pair<ConnectivityMatrix, ConnectivityMatrix>
connectivity_matrix(const std::vector<harmonise::HarmonizedODM>& odms, core::IsoWeek week,
                    const privacy::SuppressionPolicy& policy);

struct AnomalyFlag {
    std::string region;
    core::Date date = 0;
    std::string metric; // internal | inward | outward | total
    double zscore = 0;
    enum class Direction { spike, drop } direction = Direction::spike;
};

/// Robust same-weekday z-scores over the trailing `window_weeks`
/// observations; a date is flagged when |z| >= trigger. Windows with zero
/// MAD are unscorable and skipped (counted in *unscorable when given).
std::vector<AnomalyFlag> detect_anomalies(const MobilityIndicatorSeries& series, double trigger,
                                          int window_weeks, std::size_t* unscorable = nullptr);

void write_indicators_csv(std::span<const MobilityIndicatorSeries> series, std::ostream& out);
void write_connectivity_csv(std::span<const ConnectivityMatrix> matrices, std::ostream& out);
void write_anomalies_csv(std::span<const AnomalyFlag> flags, const std::string& provider_id,
                         std::ostream& out);

const char* day_class_name(ConnectivityMatrix::DayClass day_class);
const char* direction_name(AnomalyFlag::Direction direction);

} // namespace odmforge::products
