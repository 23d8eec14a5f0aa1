#include "odmforge/harmonise/harmonise.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "odmforge/core/csv.hpp"
#include "odmforge/core/error.hpp"
#include "odmforge/core/text.hpp"

namespace odmforge::harmonise {

using ingest::CanonicalFeed;
using ingest::FeedMeta;
using ingest::FeedBuilder;

std::string reference_zoning_id(int level) { return "nuts" + std::to_string(level); }

namespace {

// Per-group dense (origin x dest) accumulator with O(touched) reset.
class DenseGrid {
  public:
    explicit DenseGrid(std::size_t cells) : values_(cells, 0.0), stamp_(cells, 0) {}

    void begin_group() {
        ++epoch_;
        touched_.clear();
    }

    void add(std::uint32_t key, double v) {
        if (stamp_[key] != epoch_) {
            stamp_[key] = epoch_;
            values_[key] = 0.0;
            touched_.push_back(key);
        }
        values_[key] += v;
    }

    // Keys in ascending order; value per key.
    std::vector<std::uint32_t>& sorted_touched() {
        std::sort(touched_.begin(), touched_.end());
        return touched_;
    }

    double value(std::uint32_t key) const { return values_[key]; }

  private:
    std::vector<double> values_;
    std::vector<std::uint32_t> stamp_;
    std::vector<std::uint32_t> touched_;
    std::uint32_t epoch_ = 0;
};

constexpr std::size_t kDenseLimit = 4u << 20; // max dense grid cells

} // namespace

CanonicalFeed map_zones(const CanonicalFeed& feed, const ZoneCrosswalk& xwalk,
                        const ZoneRegistry& registry, int level) {
    if (level < 0 || level > kMaxLevel)
        fail(Errc::invalid_range, "map_zones: level " + std::to_string(level) + " outside 0..3");

    // Resolve the fan-out of every feed zone up front: crosswalk targets at
    // NUTS3 rolled to the requested level, duplicate ancestors combined.
    std::vector<std::string> unmapped;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> fanout(feed.zone_codes.size());
    std::set<std::uint32_t> target_set;
    for (std::size_t zi = 0; zi < feed.zone_codes.size(); ++zi) {
        const std::string& code = feed.zone_codes[zi];
        auto entry = xwalk.entries.find(code);
        if (entry == xwalk.entries.end()) {
            unmapped.push_back(code);
            continue;
        }
        double sum = 0;
        std::map<std::uint32_t, double> combined;
        for (const auto& [nuts3, weight] : entry->second) {
            if (weight <= 0.0 || weight > 1.0)
                fail(Errc::bad_weights, "crosswalk " + xwalk.zoning_id + ": zone " + code +
                                            " weight " + core::format_double(weight) +
                                            " outside (0,1]");
            auto idx = registry.index_of(nuts3);
            if (!idx || registry.zone(*idx).level != kMaxLevel)
                fail(Errc::unknown_zoning, "crosswalk " + xwalk.zoning_id + ": target " + nuts3 +
                                               " is not a level-3 reference zone");
            combined[registry.ancestor(*idx, level)] += weight;
            sum += weight;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            fail(Errc::bad_weights, "crosswalk " + xwalk.zoning_id + ": zone " + code +
                                        " weights sum to " + core::format_double(sum));
        fanout[zi].assign(combined.begin(), combined.end());
        for (const auto& [target, weight] : combined) target_set.insert(target);
    }
    if (!unmapped.empty()) {
        std::string msg = "no crosswalk entry for zone(s):";
        for (const std::string& code : unmapped) msg += " " + code;
        fail(Errc::unmapped_zone, msg);
    }

    // Compact target indexing. Registry indices ascend in code order, so the
    // compact table stays lexicographically sorted.
    std::vector<std::uint32_t> targets(target_set.begin(), target_set.end());
    std::unordered_map<std::uint32_t, std::uint32_t> compact;
    compact.reserve(targets.size() * 2);
    for (std::uint32_t i = 0; i < targets.size(); ++i) compact[targets[i]] = i;
    for (auto& per_zone : fanout)
        for (auto& [target, weight] : per_zone) target = compact[target];

    FeedMeta out_meta = feed.meta;
    out_meta.zoning_id = reference_zoning_id(level);
    out_meta.notes.push_back("mapped from zoning '" + feed.meta.zoning_id + "' to " +
                             reference_zoning_id(level));

    const std::uint32_t t = static_cast<std::uint32_t>(targets.size());
    bool uniform_duration = true;
    for (const auto& c : feed.cells)
        if (c.duration_minutes != feed.cells.front().duration_minutes) {
            uniform_duration = false;
            break;
        }
    const bool dense_ok = !feed.has_attributes() && uniform_duration &&
                          static_cast<std::size_t>(t) * t <= kDenseLimit && t > 0;

    if (dense_ok) {
        CanonicalFeed out;
        out.meta = std::move(out_meta);
        out.attr_sets.push_back(ingest::Attributes{});
        out.zone_codes.reserve(t);
        for (std::uint32_t target : targets) out.zone_codes.push_back(registry.zone(target).nuts_code);

        DenseGrid grid(static_cast<std::size_t>(t) * t);
        std::size_t i = 0;
        const auto& cells = feed.cells;
        while (i < cells.size()) {
            const core::Minute start = cells[i].start;
            const std::int32_t duration = cells[i].duration_minutes;
            grid.begin_group();
            while (i < cells.size() && cells[i].start == start &&
                   cells[i].duration_minutes == duration) {
                const auto& c = cells[i];
                for (const auto& [o, wo] : fanout[c.origin])
                    for (const auto& [d, wd] : fanout[c.dest])
                        grid.add(o * t + d, c.count * wo * wd);
                ++i;
            }
            for (std::uint32_t key : grid.sorted_touched()) {
                CanonicalFeed::Cell cell;
                cell.start = start;
                cell.origin = key / t;
                cell.dest = key % t;
                cell.attrs_flags = 0;
                cell.duration_minutes = duration;
                cell.count = grid.value(key);
                out.cells.push_back(cell);
            }
        }
        return out;
    }

    FeedBuilder builder(std::move(out_meta));
    std::vector<std::uint32_t> builder_zone(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k)
        builder_zone[k] = builder.zone(registry.zone(targets[k]).nuts_code);
    std::vector<std::uint32_t> attr_of(feed.attr_sets.size());
    for (std::size_t a = 0; a < feed.attr_sets.size(); ++a)
        attr_of[a] = builder.attrs(feed.attr_sets[a]);
    for (const auto& c : feed.cells) {
        for (const auto& [o, wo] : fanout[c.origin])
            for (const auto& [d, wd] : fanout[c.dest])
                builder.add(c.start, builder_zone[o], builder_zone[d], c.duration_minutes,
                            c.count * wo * wd, attr_of[c.attrs()], c.pre_suppression());
    }
    return builder.finish();
}

CanonicalFeed rebin_time(const CanonicalFeed& feed, TimeBin target) {
    for (const auto& c : feed.cells)
        if (c.duration_minutes <= 0 || core::kMinutesPerDay % c.duration_minutes != 0)
            fail(Errc::non_divisible_window,
                 "window duration " + std::to_string(c.duration_minutes) +
                     " does not divide a day");

    FeedMeta out_meta = feed.meta;
    if (target == TimeBin::daily) {
        out_meta.window_minutes = core::kMinutesPerDay;
        if (!(feed.meta.window_minutes == core::kMinutesPerDay))
            out_meta.notes.push_back("re-binned to calendar days (UTC)");

        const std::uint32_t t = static_cast<std::uint32_t>(feed.zone_codes.size());
        if (!feed.has_attributes() && static_cast<std::size_t>(t) * t <= kDenseLimit && t > 0) {
            CanonicalFeed out;
            out.meta = std::move(out_meta);
            out.attr_sets.push_back(ingest::Attributes{});
            out.zone_codes = feed.zone_codes;
            DenseGrid grid(static_cast<std::size_t>(t) * t);
            std::size_t i = 0;
            const auto& cells = feed.cells;
            while (i < cells.size()) {
                const core::Date day = core::minute_to_date(cells[i].start);
                grid.begin_group();
                while (i < cells.size() && core::minute_to_date(cells[i].start) == day) {
                    grid.add(cells[i].origin * t + cells[i].dest, cells[i].count);
                    ++i;
                }
                for (std::uint32_t key : grid.sorted_touched()) {
                    CanonicalFeed::Cell cell;
                    cell.start = core::date_to_minute(day);
                    cell.origin = key / t;
                    cell.dest = key % t;
                    cell.attrs_flags = 0;
                    cell.duration_minutes = core::kMinutesPerDay;
                    cell.count = grid.value(key);
                    out.cells.push_back(cell);
                }
            }
            return out;
        }

        FeedBuilder builder(std::move(out_meta));
        std::vector<std::uint32_t> zone_of(feed.zone_codes.size());
        for (std::size_t z = 0; z < feed.zone_codes.size(); ++z)
            zone_of[z] = builder.zone(feed.zone_codes[z]);
        std::vector<std::uint32_t> attr_of(feed.attr_sets.size());
        for (std::size_t a = 0; a < feed.attr_sets.size(); ++a)
            attr_of[a] = builder.attrs(feed.attr_sets[a]);
        for (const auto& c : feed.cells)
            builder.add(core::date_to_minute(core::minute_to_date(c.start)), zone_of[c.origin],
                        zone_of[c.dest], core::kMinutesPerDay, c.count, attr_of[c.attrs()],
                        c.pre_suppression());
        return builder.finish();
    }

    // Weekly: one Mon-Fri and one Sat-Sun sub-bin per ISO week, anchored at
    // the week's Monday and Saturday.
    out_meta.window_minutes = core::kMinutesPerDay;
    out_meta.notes.push_back("re-binned to ISO weeks (weekday/weekend sub-bins)");
    FeedBuilder builder(std::move(out_meta));
    std::vector<std::uint32_t> zone_of(feed.zone_codes.size());
    for (std::size_t z = 0; z < feed.zone_codes.size(); ++z)
        zone_of[z] = builder.zone(feed.zone_codes[z]);
    std::vector<std::uint32_t> attr_of(feed.attr_sets.size());
    for (std::size_t a = 0; a < feed.attr_sets.size(); ++a)
        attr_of[a] = builder.attrs(feed.attr_sets[a]);
    for (const auto& c : feed.cells) {
        const core::Date day = core::minute_to_date(c.start);
        const core::Date monday = iso_week_monday(core::iso_week(day));
        const bool weekend = core::is_weekend(day);
        const core::Minute bin_start = core::date_to_minute(weekend ? monday + 5 : monday);
        builder.add(bin_start, zone_of[c.origin], zone_of[c.dest],
                    weekend ? kWeekendBinMinutes : kWeekdayBinMinutes, c.count, attr_of[c.attrs()],
                    c.pre_suppression());
    }
    return builder.finish();
}

CanonicalFeed extrapolate(const CanonicalFeed& feed, const ingest::ProviderProfile& profile) {
    if (profile.extrapolated)
        fail(Errc::already_extrapolated,
             "provider " + profile.provider_id + " already delivers extrapolated counts");
    if (feed.meta.extrapolated)
        fail(Errc::already_extrapolated,
             "feed of provider " + feed.meta.provider_id + " was already extrapolated");
    if (!profile.market_share)
        fail(Errc::missing_field, "provider " + profile.provider_id + " lacks market_share");
    const double factor = 1.0 / *profile.market_share;
    CanonicalFeed out = feed;
    for (auto& c : out.cells) c.count *= factor;
    out.meta.extrapolated = true;
    out.meta.notes.push_back("extrapolated by 1/market_share = " + core::format_double(factor));
    return out;
}

double HarmonizedODM::total() const {
    double total = 0;
    for (const Cell& c : cells) total += c.count;
    return total;
}

std::vector<HarmonizedODM> build_harmonized(const std::vector<CanonicalFeed>& feeds,
                                            std::shared_ptr<const ZoneRegistry> registry,
                                            int level) {
    if (level < 0 || level > kMaxLevel)
        fail(Errc::invalid_range, "build_harmonized: level outside 0..3");
    std::vector<HarmonizedODM> out;
    for (const CanonicalFeed& feed : feeds) {
        std::vector<std::uint32_t> reg_index(feed.zone_codes.size());
        for (std::size_t z = 0; z < feed.zone_codes.size(); ++z) {
            auto idx = registry->index_of(feed.zone_codes[z]);
            if (!idx)
                fail(Errc::unknown_zoning, "feed zone " + feed.zone_codes[z] +
                                               " is not in the reference registry");
            if (registry->zone(*idx).level != level)
                fail(Errc::invalid_range, "feed zone " + feed.zone_codes[z] + " is at level " +
                                              std::to_string(registry->zone(*idx).level) +
                                              ", expected " + std::to_string(level));
            reg_index[z] = *idx;
        }

        // Attribute-bearing and attribute-free cells are disjoint populations:
        // when both coexist, harmonised totals use the attribute-free view.
        bool has_plain = false;
        for (const auto& c : feed.cells)
            if (c.attrs() == 0) {
                has_plain = true;
                break;
            }
        const bool drop_attr_cells = feed.has_attributes() && has_plain;

        std::vector<std::string> provenance = {feed.meta.provider_id};
        provenance.insert(provenance.end(), feed.meta.notes.begin(), feed.meta.notes.end());
        if (drop_attr_cells)
            provenance.push_back("attribute-disaggregated cells excluded (disjoint population)");
        else if (feed.has_attributes())
            provenance.push_back("summed over attribute slices of a fully disaggregated feed");

        std::size_t i = 0;
        while (i < feed.cells.size()) {
            const auto& first = feed.cells[i];
            if (first.duration_minutes != core::kMinutesPerDay)
                fail(Errc::invalid_range, "build_harmonized: feed of provider " +
                                              feed.meta.provider_id + " is not daily-binned");
            const core::Date day = core::minute_to_date(first.start);
            HarmonizedODM odm;
            odm.day = day;
            odm.level = level;
            odm.provider_id = feed.meta.provider_id;
            odm.provenance = provenance;
            odm.registry = registry;
            while (i < feed.cells.size() &&
                   core::minute_to_date(feed.cells[i].start) == day) {
                const auto& c = feed.cells[i];
                ++i;
                if (drop_attr_cells && c.attrs() != 0) continue;
                const std::uint32_t o = reg_index[c.origin];
                const std::uint32_t d = reg_index[c.dest];
                if (!odm.cells.empty() && odm.cells.back().origin == o &&
                    odm.cells.back().dest == d)
                    odm.cells.back().count += c.count; // attribute slices of one pair
                else
                    odm.cells.push_back({o, d, c.count});
            }
            out.push_back(std::move(odm));
        }
    }
    return out;
}

void write_harmonized_csv(const HarmonizedODM& odm, const std::filesystem::path& path) {
    auto out = core::open_output(path);
    core::write_csv_row(out, {"origin", "destination", "count"});
    for (const auto& c : odm.cells)
        core::write_csv_row(out, {odm.registry->zone(c.origin).nuts_code,
                                  odm.registry->zone(c.dest).nuts_code,
                                  core::format_fixed(c.count, 6)});
}

HarmonizedODM read_harmonized_csv(const std::filesystem::path& path,
                                  std::shared_ptr<const ZoneRegistry> registry, core::Date day,
                                  int level, const std::string& provider_id) {
    auto in = core::open_input(path);
    core::CsvReader reader(in, path.string());
    const int c_o = reader.column("origin");
    const int c_d = reader.column("destination");
    const int c_n = reader.column("count");
    if (c_o < 0 || c_d < 0 || c_n < 0)
        fail(Errc::missing_field, path.string() + ": need columns origin, destination, count");
    HarmonizedODM odm;
    odm.day = day;
    odm.level = level;
    odm.provider_id = provider_id;
    odm.registry = registry;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        auto o = registry->index_of(fields[c_o]);
        auto d = registry->index_of(fields[c_d]);
        if (!o || !d)
            fail(Errc::unknown_zoning, path.string() + ": unknown zone in row " +
                                           std::to_string(reader.line_number()));
        odm.cells.push_back({*o, *d, core::parse_double(fields[c_n])});
    }
    std::sort(odm.cells.begin(), odm.cells.end(), [](const auto& a, const auto& b) {
        return std::tie(a.origin, a.dest) < std::tie(b.origin, b.dest);
    });
    return odm;
}

} // namespace odmforge::harmonise
