#pragma once

// Shared fixtures: a small NUTS-style registry, crosswalk builders and a
// naive fan-out oracle for map_zones.

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "odmforge/harmonise/harmonise.hpp"
#include "odmforge/ingest/ingest.hpp"

namespace testutil {

// Builds a registry from level-3 codes alone; parents derive by prefix
// (level 0 = 2 chars .. level 3 = 5 chars), like real NUTS codes.
inline odmforge::harmonise::ZoneRegistry registry_from_nuts3(const std::vector<std::string>& nuts3) {
    using odmforge::harmonise::RefZone;
    std::map<std::string, RefZone> zones;
    for (const std::string& code : nuts3) {
        for (int level = 0; level <= 3; ++level) {
            const std::string c = code.substr(0, 2 + level);
            RefZone& z = zones[c];
            z.nuts_code = c;
            z.level = level;
            if (level > 0) z.parent = c.substr(0, 1 + level);
        }
    }
    std::vector<RefZone> list;
    for (auto& [code, z] : zones) list.push_back(z);
    return odmforge::harmonise::ZoneRegistry::from_zones(std::move(list));
}

inline odmforge::harmonise::ZoneCrosswalk
crosswalk_of(const std::string& zoning_id,
             const std::map<std::string, std::vector<std::pair<std::string, double>>>& entries) {
    odmforge::harmonise::ZoneCrosswalk xwalk;
    xwalk.zoning_id = zoning_id;
    xwalk.entries = entries;
    return xwalk;
}

// Naive reference for map_zones: per-cell nested fan-out with roll-up by
// code prefix, accumulated in a sorted map.
inline std::map<std::tuple<std::string, std::string, odmforge::core::Minute>, double>
naive_map_zones(const odmforge::ingest::CanonicalFeed& feed,
                const odmforge::harmonise::ZoneCrosswalk& xwalk, int level) {
    std::map<std::tuple<std::string, std::string, odmforge::core::Minute>, double> out;
    for (std::size_t i = 0; i < feed.size(); ++i) {
        const auto cell = feed.cell_at(i);
        for (const auto& [o_code, o_w] : xwalk.entries.at(cell.origin.code))
            for (const auto& [d_code, d_w] : xwalk.entries.at(cell.destination.code)) {
                const std::string o = o_code.substr(0, 2 + level);
                const std::string d = d_code.substr(0, 2 + level);
                out[{o, d, cell.window.start}] += cell.count * o_w * d_w;
            }
    }
    return out;
}

} // namespace testutil
