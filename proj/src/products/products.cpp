#include "odmforge/products/products.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "odmforge/core/csv.hpp"
#include "odmforge/core/error.hpp"
#include "odmforge/core/text.hpp"

namespace odmforge::products {

using harmonise::HarmonizedODM;
using harmonise::ZoneRegistry;

namespace {

void require_single_provider(const std::vector<HarmonizedODM>& odms) {
    for (const auto& odm : odms)
        if (odm.provider_id != odms.front().provider_id)
            fail(Errc::mixed_providers, "odms mix providers '" + odms.front().provider_id +
                                            "' and '" + odm.provider_id + "'");
}

double median(std::vector<double> values) {
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace

std::vector<MobilityIndicatorSeries>
mobility_indicators(const std::vector<HarmonizedODM>& odms, int level) {
    if (level < 0 || level > harmonise::kMaxLevel)
        fail(Errc::invalid_range, "indicator level outside 0..3");
    if (odms.empty()) return {};
    require_single_provider(odms);
    for (const auto& odm : odms)
        if (odm.level < level)
            fail(Errc::level_unavailable, "odms harmonised at level " +
                                              std::to_string(odm.level) +
                                              " cannot serve level " + std::to_string(level));

    const auto registry = odms.front().registry;

    std::vector<core::Date> days;
    days.reserve(odms.size());
    for (const auto& odm : odms) days.push_back(odm.day);
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());
    std::map<core::Date, std::size_t> day_pos;
    for (std::size_t i = 0; i < days.size(); ++i) day_pos[days[i]] = i;

    struct Direction {
        double internal = 0, inward = 0, outward = 0;
    };
    // region registry index -> per-day directional sums
    std::map<std::uint32_t, std::vector<Direction>> acc;
    for (const auto& odm : odms) {
        const std::size_t di = day_pos[odm.day];
        for (const auto& c : odm.cells) {
            const std::uint32_t o = registry->ancestor(c.origin, level);
            const std::uint32_t d = registry->ancestor(c.dest, level);
            auto slot = [&](std::uint32_t region) -> Direction& {
                auto [it, inserted] = acc.try_emplace(region);
                if (inserted) it->second.resize(days.size());
                return it->second[di];
            };
            if (o == d) {
                slot(o).internal += c.count;
            } else {
                slot(o).outward += c.count;
                slot(d).inward += c.count;
            }
        }
    }

    std::vector<MobilityIndicatorSeries> out;
    out.reserve(acc.size());
    for (const auto& [region, per_day] : acc) {
        MobilityIndicatorSeries series;
        series.region = registry->zone(region).nuts_code;
        series.level = level;
        series.provider_id = odms.front().provider_id;
        series.points.reserve(days.size());
        for (std::size_t i = 0; i < days.size(); ++i) {
            IndicatorPoint p;
            p.date = days[i];
            p.internal = per_day[i].internal;
            p.inward = per_day[i].inward;
            p.outward = per_day[i].outward;
            p.total = p.internal + p.inward + p.outward;
            series.points.push_back(p);
        }
        out.push_back(std::move(series));
    }
    return out;
}

DateRange default_baseline(core::Date first, core::Date last) {
    const core::Date monday = first + ((7 - core::weekday(first)) % 7);
    const core::Date end = monday + 27; // 4 ISO weeks
    if (end > last)
        fail(Errc::insufficient_baseline,
             "data span " + core::format_date(first) + ".." + core::format_date(last) +
                 " does not contain 4 full ISO weeks");
    return {monday, end};
}

MobilityIndicatorSeries compute_trend(const MobilityIndicatorSeries& series, DateRange baseline) {
    std::vector<double> weekday_totals, weekend_totals;
    for (const auto& p : series.points) {
        if (!baseline.contains(p.date)) continue;
        (core::is_weekend(p.date) ? weekend_totals : weekday_totals).push_back(p.total);
    }
    if (weekday_totals.size() < 2 || weekend_totals.size() < 2)
        fail(Errc::insufficient_baseline,
             "baseline " + core::format_date(baseline.start) + ".." +
                 core::format_date(baseline.end) + " holds " +
                 std::to_string(weekday_totals.size()) + " weekday and " +
                 std::to_string(weekend_totals.size()) +
                 " weekend point(s); need at least 2 of each");

    const double weekday_median = median(std::move(weekday_totals));
    const double weekend_median = median(std::move(weekend_totals));

    MobilityIndicatorSeries out = series;
    for (auto& p : out.points) {
        const double base = core::is_weekend(p.date) ? weekend_median : weekday_median;
        if (base > 0)
            p.trend_pct = 100.0 * p.total / base;
        else
            p.trend_pct.reset(); // no meaningful reference level
    }
    return out;
}

double ConnectivityMatrix::total() const {
    double total = 0;
    for (const Entry& e : entries) total += e.count;
    return total;
}

std::pair<ConnectivityMatrix, ConnectivityMatrix>
connectivity_matrix(const std::vector<HarmonizedODM>& odms, core::IsoWeek week,
                    const privacy::SuppressionPolicy& policy) {
    const core::Date monday = core::iso_week_monday(week);

    ConnectivityMatrix weekday, weekend;
    weekday.week = weekend.week = week;
    weekday.day_class = ConnectivityMatrix::DayClass::weekday;
    weekend.day_class = ConnectivityMatrix::DayClass::weekend;

    std::map<std::pair<std::uint32_t, std::uint32_t>, double> weekday_acc, weekend_acc;
    std::set<core::Date> seen;
    for (const auto& odm : odms) {
        if (odm.day < monday || odm.day > monday + 6) continue;
        if (odm.level != harmonise::kMaxLevel)
            fail(Errc::level_unavailable, "connectivity needs odms at NUTS3, got level " +
                                              std::to_string(odm.level));
        if (!weekday.provider_id.empty() && odm.provider_id != weekday.provider_id)
            fail(Errc::mixed_providers, "connectivity odms mix providers");
        weekday.provider_id = weekend.provider_id = odm.provider_id;
        weekday.registry = weekend.registry = odm.registry;
        seen.insert(odm.day);
        auto& acc = core::is_weekend(odm.day) ? weekend_acc : weekday_acc;
        for (const auto& c : odm.cells) {
            if (c.origin == c.dest) continue; // internal flows live in the indicators
            acc[{c.origin, c.dest}] += c.count;
        }
    }

    for (core::Date d = monday; d <= monday + 6; ++d)
        if (!seen.count(d)) {
            weekday.missing_days.push_back(d);
            weekend.missing_days.push_back(d);
        }

    auto emit = [&policy](const std::map<std::pair<std::uint32_t, std::uint32_t>, double>& acc,
                          ConnectivityMatrix& m) {
        for (const auto& [key, count] : acc) {
            if (count > 0 && count < policy.k_out) {
                if (policy.strategy == privacy::SuppressionPolicy::Strategy::mask)
                    m.entries.push_back({key.first, key.second, 0.0});
                continue;
            }
            m.entries.push_back({key.first, key.second, count});
        }
    };
    emit(weekday_acc, weekday);
    emit(weekend_acc, weekend);
    return {std::move(weekday), std::move(weekend)};
}

std::vector<AnomalyFlag> detect_anomalies(const MobilityIndicatorSeries& series, double trigger,
                                          int window_weeks, std::size_t* unscorable) {
    if (trigger <= 0) fail(Errc::invalid_range, "anomaly trigger must be positive");
    if (window_weeks < 1) fail(Errc::invalid_range, "window_weeks must be >= 1");
    if (unscorable) *unscorable = 0;

    static constexpr const char* metric_names[] = {"internal", "inward", "outward", "total"};
    auto metric_value = [](const IndicatorPoint& p, int m) {
        switch (m) {
        case 0: return p.internal;
        case 1: return p.inward;
        case 2: return p.outward;
        default: return p.total;
        }
    };

    std::vector<AnomalyFlag> flags;
    const auto& pts = series.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        // trailing same-weekday observations, most recent first
        std::vector<std::size_t> window;
        for (std::size_t j = i; j-- > 0;) {
            if (core::weekday(pts[j].date) != core::weekday(pts[i].date)) continue;
            window.push_back(j);
            if (window.size() == static_cast<std::size_t>(window_weeks)) break;
        }
        if (window.size() < static_cast<std::size_t>(window_weeks)) continue;

        for (int m = 0; m < 4; ++m) {
            std::vector<double> values;
            values.reserve(window.size());
            for (std::size_t j : window) values.push_back(metric_value(pts[j], m));
            const double med = median(values);
            std::vector<double> deviations;
            deviations.reserve(values.size());
            for (double v : values) deviations.push_back(std::abs(v - med));
            const double mad = median(std::move(deviations));
            if (mad == 0) {
                if (unscorable) ++*unscorable;
                continue;
            }
            const double z = (metric_value(pts[i], m) - med) / (1.4826 * mad);
            if (std::abs(z) >= trigger) {
                AnomalyFlag flag;
                flag.region = series.region;
                flag.date = pts[i].date;
                flag.metric = metric_names[m];
                flag.zscore = z;
                flag.direction = z > 0 ? AnomalyFlag::Direction::spike : AnomalyFlag::Direction::drop;
                flags.push_back(std::move(flag));
            }
        }
    }
    return flags;
}

const char* day_class_name(ConnectivityMatrix::DayClass day_class) {
    return day_class == ConnectivityMatrix::DayClass::weekday ? "weekday" : "weekend";
}

const char* direction_name(AnomalyFlag::Direction direction) {
    return direction == AnomalyFlag::Direction::spike ? "spike" : "drop";
}

void write_indicators_csv(std::span<const MobilityIndicatorSeries> series, std::ostream& out) {
    core::write_csv_row(out, {"provider_id", "nuts_code", "level", "date", "internal", "inward",
                              "outward", "total", "trend_pct"});
    for (const auto& s : series)
        for (const auto& p : s.points)
            core::write_csv_row(
                out, {s.provider_id, s.region, std::to_string(s.level), core::format_date(p.date),
                      core::format_fixed(p.internal, 3), core::format_fixed(p.inward, 3),
                      core::format_fixed(p.outward, 3), core::format_fixed(p.total, 3),
                      p.trend_pct ? core::format_fixed(*p.trend_pct, 6) : std::string()});
}

void write_connectivity_csv(std::span<const ConnectivityMatrix> matrices, std::ostream& out) {
    core::write_csv_row(out,
                        {"provider_id", "week", "day_class", "origin", "destination", "count"});
    for (const auto& m : matrices)
        for (const auto& e : m.entries)
            core::write_csv_row(out, {m.provider_id, core::format_iso_week(m.week),
                                      day_class_name(m.day_class),
                                      m.registry->zone(e.origin).nuts_code,
                                      m.registry->zone(e.dest).nuts_code,
                                      core::format_fixed(e.count, 3)});
}

void write_anomalies_csv(std::span<const AnomalyFlag> flags, const std::string& provider_id,
                         std::ostream& out) {
    core::write_csv_row(out, {"provider_id", "nuts_code", "date", "metric", "zscore", "direction"});
    for (const auto& f : flags)
        core::write_csv_row(out, {provider_id, f.region, core::format_date(f.date), f.metric,
                                  core::format_fixed(f.zscore, 6), direction_name(f.direction)});
}

} // namespace odmforge::products
