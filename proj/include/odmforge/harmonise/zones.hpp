#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace odmforge::harmonise {

inline constexpr int kMaxLevel = 3;

/// One zone of the hierarchical reference zoning (NUTS-style).
struct RefZone {
    std::string nuts_code;
    int level = 0;                         // 0 (country) .. 3
    std::string parent;                    // empty for level 0
    std::optional<std::int64_t> population;
};

/// Validated, immutable registry of reference zones. Zone indices are
/// assigned in lexicographic code order.
class ZoneRegistry {
  public:
    static ZoneRegistry from_zones(std::vector<RefZone> zones);
    static ZoneRegistry load_csv(const std::filesystem::path& path);

    std::size_t size() const { return zones_.size(); }
    const RefZone& zone(std::uint32_t index) const { return zones_[index]; }
    std::optional<std::uint32_t> index_of(std::string_view code) const;

    /// Ancestor of `index` at `level` (identity when levels match).
    std::uint32_t ancestor(std::uint32_t index, int level) const;

    std::vector<std::uint32_t> zones_at(int level) const;

  private:
    std::vector<RefZone> zones_; // sorted by code
    std::map<std::string, std::uint32_t, std::less<>> index_;
    std::vector<std::array<std::uint32_t, kMaxLevel + 1>> ancestors_;
};

void write_zones_csv(const ZoneRegistry& registry, const std::filesystem::path& path);

/// Weighted mapping from one provider zoning onto reference level-3 zones.
struct ZoneCrosswalk {
    std::string zoning_id;
    // provider zone code -> [(nuts3 code, weight in (0,1])], weights sum to 1
    std::map<std::string, std::vector<std::pair<std::string, double>>> entries;

    void validate(const ZoneRegistry& registry) const;
};

/// Loads every zoning present in the file, keyed by zoning_id.
std::map<std::string, ZoneCrosswalk> load_crosswalks_csv(const std::filesystem::path& path);

void write_crosswalks_csv(const std::vector<ZoneCrosswalk>& crosswalks,
                          const std::filesystem::path& path);

} // namespace odmforge::harmonise
