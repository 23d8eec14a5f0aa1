#include "odmforge/harmonise/zones.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "odmforge/core/csv.hpp"
#include "odmforge/core/error.hpp"
#include "odmforge/core/text.hpp"

namespace odmforge::harmonise {

ZoneRegistry ZoneRegistry::from_zones(std::vector<RefZone> zones) {
    ZoneRegistry reg;
    std::sort(zones.begin(), zones.end(),
              [](const RefZone& a, const RefZone& b) { return a.nuts_code < b.nuts_code; });
    reg.zones_ = std::move(zones);
    for (std::uint32_t i = 0; i < reg.zones_.size(); ++i) {
        const RefZone& z = reg.zones_[i];
        if (z.nuts_code.empty())
            fail(Errc::unknown_zoning, "reference zone with empty code");
        if (z.level < 0 || z.level > kMaxLevel)
            fail(Errc::invalid_range, "zone " + z.nuts_code + ": level " +
                                          std::to_string(z.level) + " outside 0..3");
        if (z.level == 0 && !z.parent.empty())
            fail(Errc::invalid_range, "zone " + z.nuts_code + ": level 0 zones have no parent");
        if (z.level > 0 && z.parent.empty())
            fail(Errc::missing_field, "zone " + z.nuts_code + ": missing parent");
        if (z.population && *z.population <= 0)
            fail(Errc::invalid_range, "zone " + z.nuts_code + ": population must be positive");
        if (!reg.index_.emplace(z.nuts_code, i).second)
            fail(Errc::invalid_range, "duplicate reference zone " + z.nuts_code);
    }
    reg.ancestors_.resize(reg.zones_.size());
    for (std::uint32_t i = 0; i < reg.zones_.size(); ++i) {
        const RefZone& z = reg.zones_[i];
        auto& anc = reg.ancestors_[i];
        anc.fill(UINT32_MAX);
        anc[z.level] = i;
        std::uint32_t cursor = i;
        for (int level = z.level - 1; level >= 0; --level) {
            const RefZone& child = reg.zones_[cursor];
            auto it = reg.index_.find(child.parent);
            if (it == reg.index_.end())
                fail(Errc::unknown_zoning,
                     "zone " + child.nuts_code + ": unknown parent " + child.parent);
            const RefZone& parent = reg.zones_[it->second];
            if (parent.level != level)
                fail(Errc::invalid_range, "zone " + child.nuts_code + ": parent " +
                                              parent.nuts_code + " is not one level up");
            if (child.nuts_code.rfind(parent.nuts_code, 0) != 0)
                fail(Errc::invalid_range, "zone " + child.nuts_code +
                                              ": code does not extend parent " + parent.nuts_code);
            cursor = it->second;
            anc[level] = cursor;
        }
    }
    return reg;
}

ZoneRegistry ZoneRegistry::load_csv(const std::filesystem::path& path) {
    auto in = core::open_input(path);
    core::CsvReader reader(in, path.string());
    const int c_code = reader.column("nuts_code");
    const int c_level = reader.column("level");
    const int c_parent = reader.column("parent");
    const int c_pop = reader.column("population");
    if (c_code < 0 || c_level < 0 || c_parent < 0)
        fail(Errc::missing_field, path.string() + ": need columns nuts_code, level, parent");
    std::vector<RefZone> zones;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        RefZone z;
        z.nuts_code = fields[c_code];
        z.level = static_cast<int>(core::parse_int(fields[c_level]));
        z.parent = fields[c_parent];
        if (c_pop >= 0 && !fields[c_pop].empty())
            z.population = core::parse_int(fields[c_pop]);
        zones.push_back(std::move(z));
    }
    return from_zones(std::move(zones));
}

std::optional<std::uint32_t> ZoneRegistry::index_of(std::string_view code) const {
    auto it = index_.find(code);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t ZoneRegistry::ancestor(std::uint32_t index, int level) const {
    const std::uint32_t a = ancestors_[index][level];
    if (a == UINT32_MAX)
        fail(Errc::level_unavailable, "zone " + zones_[index].nuts_code + " has no level " +
                                          std::to_string(level) + " ancestor");
    return a;
}

std::vector<std::uint32_t> ZoneRegistry::zones_at(int level) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < zones_.size(); ++i)
        if (zones_[i].level == level) out.push_back(i);
    return out;
}

void write_zones_csv(const ZoneRegistry& registry, const std::filesystem::path& path) {
    auto out = core::open_output(path);
    core::write_csv_row(out, {"nuts_code", "level", "parent", "population"});
    for (std::uint32_t i = 0; i < registry.size(); ++i) {
        const RefZone& z = registry.zone(i);
        core::write_csv_row(out, {z.nuts_code, std::to_string(z.level), z.parent,
                                  z.population ? std::to_string(*z.population) : ""});
    }
}

void ZoneCrosswalk::validate(const ZoneRegistry& registry) const {
    for (const auto& [code, targets] : entries) {
        if (targets.empty())
            fail(Errc::bad_weights, "crosswalk " + zoning_id + ": zone " + code + " maps nowhere");
        double sum = 0;
        for (const auto& [nuts3, weight] : targets) {
            if (weight <= 0.0 || weight > 1.0)
                fail(Errc::bad_weights, "crosswalk " + zoning_id + ": zone " + code +
                                            " weight " + core::format_double(weight) +
                                            " outside (0,1]");
            auto idx = registry.index_of(nuts3);
            if (!idx || registry.zone(*idx).level != kMaxLevel)
                fail(Errc::unknown_zoning, "crosswalk " + zoning_id + ": target " + nuts3 +
                                               " is not a level-3 reference zone");
            sum += weight;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            fail(Errc::bad_weights, "crosswalk " + zoning_id + ": zone " + code +
                                        " weights sum to " + core::format_double(sum));
    }
}

std::map<std::string, ZoneCrosswalk> load_crosswalks_csv(const std::filesystem::path& path) {
    auto in = core::open_input(path);
    core::CsvReader reader(in, path.string());
    const int c_zoning = reader.column("zoning_id");
    const int c_zone = reader.column("zone_code");
    const int c_nuts = reader.column("nuts3_code");
    const int c_weight = reader.column("weight");
    if (c_zoning < 0 || c_zone < 0 || c_nuts < 0 || c_weight < 0)
        fail(Errc::missing_field,
             path.string() + ": need columns zoning_id, zone_code, nuts3_code, weight");
    std::map<std::string, ZoneCrosswalk> out;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        ZoneCrosswalk& xwalk = out[fields[c_zoning]];
        xwalk.zoning_id = fields[c_zoning];
        xwalk.entries[fields[c_zone]].emplace_back(fields[c_nuts],
                                                   core::parse_double(fields[c_weight]));
    }
    return out;
}

void write_crosswalks_csv(const std::vector<ZoneCrosswalk>& crosswalks,
                          const std::filesystem::path& path) {
    auto out = core::open_output(path);
    core::write_csv_row(out, {"zoning_id", "zone_code", "nuts3_code", "weight"});
    for (const ZoneCrosswalk& xwalk : crosswalks)
        for (const auto& [code, targets] : xwalk.entries)
            for (const auto& [nuts3, weight] : targets)
                core::write_csv_row(out,
                                    {xwalk.zoning_id, code, nuts3, core::format_double(weight)});
}

} // namespace odmforge::harmonise
