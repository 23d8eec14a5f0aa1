#include "odmforge/ingest/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "odmforge/core/csv.hpp"
#include "odmforge/core/error.hpp"
#include "odmforge/core/text.hpp"

namespace odmforge::ingest {

bool is_valid_window_duration(int minutes) {
    static constexpr int allowed[] = {15, 30, 60, 120, 240, 480, 720, 1440};
    return std::find(std::begin(allowed), std::end(allowed), minutes) != std::end(allowed);
}

const std::vector<std::string>& canonical_feed_fields() {
    static const std::vector<std::string> fields = {
        "origin", "destination", "window_start", "count", "age_band", "sex", "roamer"};
    return fields;
}

void ProviderProfile::validate() {
    warnings.clear();
    if (provider_id.empty()) fail(Errc::missing_field, "profile: provider_id is empty");
    if (zoning_id.empty()) fail(Errc::unknown_zoning, "profile " + provider_id + ": zoning_id is empty");
    if (!is_valid_window_duration(window_minutes))
        fail(Errc::invalid_range, "profile " + provider_id + ": window_minutes " +
                                      std::to_string(window_minutes) +
                                      " not in {15,30,60,120,240,480,720,1440}");
    if (window_minutes < 60)
        warnings.push_back("window_minutes " + std::to_string(window_minutes) +
                           " is below the one-hour floor typical of provider feeds; "
                           "accepted for synthetic stress runs");
    if (stop_time_minutes != kStopTimeWindowMajority &&
        (stop_time_minutes < 15 || stop_time_minutes > 60))
        fail(Errc::invalid_range, "profile " + provider_id + ": stop_time_minutes " +
                                      std::to_string(stop_time_minutes) +
                                      " outside [15,60] (or \"time-window-majority\")");
    if (threshold_k < 1)
        fail(Errc::invalid_range,
             "profile " + provider_id + ": threshold_k must be >= 1");
    if (!extrapolated) {
        if (!market_share)
            fail(Errc::missing_field,
                 "profile " + provider_id + ": market_share required when extrapolated is false");
        if (*market_share <= 0.0 || *market_share > 1.0)
            fail(Errc::invalid_range,
                 "profile " + provider_id + ": market_share must be in (0,1]");
    }
    for (const char* required : {"origin", "destination", "window_start", "count"})
        if (!column_map.count(required))
            fail(Errc::missing_field,
                 "profile " + provider_id + ": column_map lacks '" + required + "'");
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& doc, const char* key,
                                    const std::string& source) {
    auto it = doc.find(key);
    if (it == doc.end())
        fail(Errc::missing_field, source + ": missing '" + std::string(key) + "'");
    return *it;
}

} // namespace

ProviderProfile profile_from_json(const nlohmann::json& doc, const std::string& source) {
    if (!doc.is_object()) fail(Errc::bad_config, source + ": profile must be a JSON object");
    ProviderProfile p;
    try {
        p.provider_id = require_field(doc, "provider_id", source).get<std::string>();
        p.zoning_id = require_field(doc, "zoning_id", source).get<std::string>();
        p.window_minutes = require_field(doc, "window_minutes", source).get<int>();
        const auto& stop = require_field(doc, "stop_time_minutes", source);
        if (stop.is_string()) {
            if (stop.get<std::string>() != "time-window-majority")
                fail(Errc::invalid_range,
                     source + ": stop_time_minutes string must be \"time-window-majority\"");
            p.stop_time_minutes = kStopTimeWindowMajority;
        } else {
            p.stop_time_minutes = stop.get<int>();
        }
        p.extrapolated = require_field(doc, "extrapolated", source).get<bool>();
        if (doc.contains("market_share")) p.market_share = doc["market_share"].get<double>();
        p.threshold_k = require_field(doc, "threshold_k", source).get<int>();
        for (const auto& [key, value] :
             require_field(doc, "column_map", source).items())
            p.column_map[key] = value.get<std::string>();
        if (doc.contains("crs_id")) p.crs_id = doc["crs_id"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::bad_config, source + ": " + e.what());
    }
    p.validate();
    return p;
}

nlohmann::json profile_to_json(const ProviderProfile& profile) {
    nlohmann::json doc;
    doc["provider_id"] = profile.provider_id;
    doc["zoning_id"] = profile.zoning_id;
    doc["window_minutes"] = profile.window_minutes;
    if (profile.stop_time_minutes == kStopTimeWindowMajority)
        doc["stop_time_minutes"] = "time-window-majority";
    else
        doc["stop_time_minutes"] = profile.stop_time_minutes;
    doc["extrapolated"] = profile.extrapolated;
    if (profile.market_share) doc["market_share"] = *profile.market_share;
    doc["threshold_k"] = profile.threshold_k;
    doc["column_map"] = profile.column_map;
    doc["crs_id"] = profile.crs_id;
    return doc;
}

ProviderProfile load_profile(const std::filesystem::path& path) {
    std::ifstream in = core::open_input(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::bad_config, path.string() + ": " + e.what());
    }
    return profile_from_json(doc, path.string());
}

std::vector<ODMCell> parse_odm(const std::filesystem::path& path, const ProviderProfile& profile,
                               ParseMode mode) {
    std::ifstream in = core::open_input(path);
    return parse_odm(in, path.string(), profile, mode);
}

std::vector<ODMCell> parse_odm(std::istream& in, const std::string& source,
                               const ProviderProfile& profile, ParseMode mode) {
    core::CsvReader reader(in, source);

    auto mapped_column = [&](const char* canonical, bool required) -> int {
        auto it = profile.column_map.find(canonical);
        if (it == profile.column_map.end()) {
            if (required)
                fail(Errc::missing_field, source + ": column_map lacks '" + canonical + "'");
            return -1;
        }
        int idx = reader.column(it->second);
        if (idx < 0 && required)
            fail(Errc::missing_field,
                 source + ": header lacks column '" + it->second + "' (" + canonical + ")");
        return idx;
    };

    const int col_origin = mapped_column("origin", true);
    const int col_dest = mapped_column("destination", true);
    const int col_start = mapped_column("window_start", true);
    const int col_count = mapped_column("count", true);
    const int col_age = mapped_column("age_band", false);
    const int col_sex = mapped_column("sex", false);
    const int col_roamer = mapped_column("roamer", false);
    const size_t width = reader.header().size();

    std::vector<ODMCell> cells;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const std::string where = source + " row " + std::to_string(reader.line_number());
        if (fields.size() != width)
            fail(Errc::malformed_row, where + ": expected " + std::to_string(width) +
                                          " fields, got " + std::to_string(fields.size()));
        ODMCell cell;
        cell.origin = {profile.zoning_id, fields[col_origin]};
        cell.destination = {profile.zoning_id, fields[col_dest]};
        if (cell.origin.code.empty() || cell.destination.code.empty())
            fail(Errc::malformed_row, where + ": empty zone code");
        try {
            cell.window.start = core::parse_minute(fields[col_start]);
            cell.count = core::parse_double(fields[col_count]);
        } catch (const OdmError& e) {
            fail(Errc::malformed_row, where + ": " + e.what());
        }
        cell.window.duration_minutes = profile.window_minutes;
        if (!std::isfinite(cell.count))
            fail(Errc::malformed_row, where + ": non-finite count");
        if (cell.count < 0)
            fail(Errc::negative_count, where + ": count " + core::format_double(cell.count));
        if (!cell.window.aligned())
            fail(Errc::window_misaligned,
                 where + ": window start " + core::format_minute(cell.window.start) +
                     " not aligned to " + std::to_string(profile.window_minutes) + " minutes");
        if (cell.count < profile.threshold_k) {
            if (mode == ParseMode::strict)
                fail(Errc::threshold_violation,
                     where + ": count " + core::format_double(cell.count) +
                         " below declared threshold K=" + std::to_string(profile.threshold_k));
            cell.pre_suppression = true;
        }
        if (col_age >= 0) cell.attributes.age_band = fields[col_age];
        if (col_sex >= 0) cell.attributes.sex = fields[col_sex];
        if (col_roamer >= 0) cell.attributes.roamer_direction = fields[col_roamer];
        cells.push_back(std::move(cell));
    }
    return cells;
}

double CanonicalFeed::total_count() const {
    double total = 0;
    for (const Cell& c : cells) total += c.count;
    return total;
}

ODMCell CanonicalFeed::cell_at(std::size_t i) const {
    const Cell& c = cells[i];
    ODMCell out;
    out.origin = {meta.zoning_id, zone_codes[c.origin]};
    out.destination = {meta.zoning_id, zone_codes[c.dest]};
    out.window = {c.start, c.duration_minutes};
    out.count = c.count;
    out.attributes = attr_sets[c.attrs()];
    out.pre_suppression = c.pre_suppression();
    return out;
}

std::vector<core::Date> CanonicalFeed::days() const {
    std::vector<core::Date> out;
    for (const Cell& c : cells) {
        core::Date d = core::minute_to_date(c.start);
        if (out.empty() || out.back() != d) out.push_back(d);
    }
    // cells are sorted by start, so days come out ascending already
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::uint32_t FeedBuilder::zone(const std::string& code) {
    auto [it, inserted] = zone_index_.try_emplace(code, static_cast<std::uint32_t>(zones_.size()));
    if (inserted) zones_.push_back(code);
    return it->second;
}

std::uint32_t FeedBuilder::attrs(const Attributes& attrs) {
    if (attrs.empty()) return 0;
    auto key = std::make_tuple(attrs.age_band, attrs.sex, attrs.roamer_direction);
    auto [it, inserted] =
        attr_index_.try_emplace(key, static_cast<std::uint32_t>(attrs_.size() + 1));
    if (inserted) attrs_.push_back(attrs);
    return it->second;
}

void FeedBuilder::add(core::Minute start, std::uint32_t origin, std::uint32_t dest,
                      int duration_minutes, double count, std::uint32_t attr_index,
                      bool pre_suppression) {
    CanonicalFeed::Cell cell;
    cell.start = start;
    cell.origin = origin;
    cell.dest = dest;
    cell.attrs_flags = attr_index | (pre_suppression ? CanonicalFeed::Cell::kPreSuppressionBit : 0);
    cell.duration_minutes = duration_minutes;
    cell.count = count;
    cells_.push_back(cell);
}

CanonicalFeed FeedBuilder::finish() {
    CanonicalFeed feed;
    feed.meta = std::move(meta_);

    // Re-index zones and attribute sets so index order == lexicographic order.
    std::vector<std::uint32_t> zone_rank(zones_.size());
    feed.zone_codes.reserve(zones_.size());
    for (const auto& [code, old_index] : zone_index_) {
        zone_rank[old_index] = static_cast<std::uint32_t>(feed.zone_codes.size());
        feed.zone_codes.push_back(code);
    }
    std::vector<std::uint32_t> attr_rank(attrs_.size() + 1);
    attr_rank[0] = 0;
    feed.attr_sets.push_back(Attributes{});
    for (const auto& [key, old_index] : attr_index_) {
        attr_rank[old_index] = static_cast<std::uint32_t>(feed.attr_sets.size());
        feed.attr_sets.push_back(
            Attributes{std::get<0>(key), std::get<1>(key), std::get<2>(key)});
    }

    feed.cells = std::move(cells_);
    for (auto& c : feed.cells) {
        const bool pre = c.pre_suppression();
        c.origin = zone_rank[c.origin];
        c.dest = zone_rank[c.dest];
        c.attrs_flags = attr_rank[c.attrs()] | (pre ? CanonicalFeed::Cell::kPreSuppressionBit : 0);
    }

    auto key_of = [](const CanonicalFeed::Cell& c) {
        return std::make_tuple(c.start, c.origin, c.dest, c.attrs(), c.duration_minutes);
    };
    std::sort(feed.cells.begin(), feed.cells.end(),
              [&](const CanonicalFeed::Cell& a, const CanonicalFeed::Cell& b) {
                  return key_of(a) < key_of(b);
              });

    // Additive merge of duplicate (origin, destination, window, attributes) keys.
    std::size_t out = 0;
    for (std::size_t i = 0; i < feed.cells.size(); ++i) {
        if (out > 0 && key_of(feed.cells[out - 1]) == key_of(feed.cells[i])) {
            feed.cells[out - 1].count += feed.cells[i].count;
            feed.cells[out - 1].attrs_flags |=
                feed.cells[i].attrs_flags & CanonicalFeed::Cell::kPreSuppressionBit;
        } else {
            feed.cells[out++] = feed.cells[i];
        }
    }
    feed.cells.resize(out);
    return feed;
}

CanonicalFeed canonicalize(const std::vector<ODMCell>& cells, const ProviderProfile& profile) {
    FeedMeta meta;
    meta.provider_id = profile.provider_id;
    meta.zoning_id = profile.zoning_id;
    meta.window_minutes = profile.window_minutes;
    meta.stop_time_minutes = profile.stop_time_minutes;
    meta.threshold_k = profile.threshold_k;
    meta.extrapolated = profile.extrapolated;

    FeedBuilder builder(std::move(meta));
    const std::string* scope = nullptr;
    for (const ODMCell& cell : cells) {
        if (cell.origin.provider_scope != cell.destination.provider_scope)
            fail(Errc::mixed_providers,
                 "cell mixes zoning systems '" + cell.origin.provider_scope + "' and '" +
                     cell.destination.provider_scope + "'");
        if (!scope) {
            scope = &cell.origin.provider_scope;
        } else if (cell.origin.provider_scope != *scope) {
            fail(Errc::mixed_providers, "feed mixes zoning systems '" + *scope + "' and '" +
                                            cell.origin.provider_scope + "'");
        }
        builder.add(cell.window.start, builder.zone(cell.origin.code),
                    builder.zone(cell.destination.code), cell.window.duration_minutes, cell.count,
                    builder.attrs(cell.attributes), cell.pre_suppression);
    }
    return builder.finish();
}

std::map<std::string, std::string> canonical_column_map(bool with_attributes) {
    std::map<std::string, std::string> map = {{"origin", "origin"},
                                              {"destination", "destination"},
                                              {"window_start", "window_start"},
                                              {"count", "count"}};
    if (with_attributes) {
        map["age_band"] = "age_band";
        map["sex"] = "sex";
        map["roamer"] = "roamer";
    }
    return map;
}

void write_odm_csv(const CanonicalFeed& feed, std::ostream& out) {
    const bool attrs = feed.has_attributes();
    std::vector<std::string> row;
    if (attrs)
        row = {"origin", "destination", "window_start", "count", "age_band", "sex", "roamer"};
    else
        row = {"origin", "destination", "window_start", "count"};
    core::write_csv_row(out, row);
    for (const auto& c : feed.cells) {
        row[0] = feed.zone_codes[c.origin];
        row[1] = feed.zone_codes[c.dest];
        row[2] = core::format_minute(c.start);
        row[3] = core::format_double(c.count);
        if (attrs) {
            const Attributes& a = feed.attr_sets[c.attrs()];
            row[4] = a.age_band;
            row[5] = a.sex;
            row[6] = a.roamer_direction;
        }
        core::write_csv_row(out, row);
    }
}

void write_odm_csv(const CanonicalFeed& feed, const std::filesystem::path& path) {
    std::ofstream out = core::open_output(path);
    write_odm_csv(feed, out);
}

} // namespace odmforge::ingest
