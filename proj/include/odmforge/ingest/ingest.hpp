#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "odmforge/core/time.hpp"

namespace odmforge::ingest {

/// Zone identifier, unique within one zoning system.
struct ZoneId {
    std::string provider_scope; // identifier of the zoning system
    std::string code;           // opaque zone code, non-empty

    friend bool operator==(const ZoneId&, const ZoneId&) = default;
    friend auto operator<=>(const ZoneId&, const ZoneId&) = default;
};

/// Durations a provider may declare for its reporting windows, in minutes.
bool is_valid_window_duration(int minutes);

struct TimeWindow {
    core::Minute start;   // UTC, minute precision
    int duration_minutes; // positive

    bool aligned() const {
        return duration_minutes > 0 &&
               ((start % duration_minutes) + duration_minutes) % duration_minutes == 0;
    }

    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
    friend auto operator<=>(const TimeWindow&, const TimeWindow&) = default;
};

/// Optional per-cell disaggregation attributes. Empty strings mean absent.
struct Attributes {
    std::string age_band;
    std::string sex;
    std::string roamer_direction;

    bool empty() const { return age_band.empty() && sex.empty() && roamer_direction.empty(); }

    friend bool operator==(const Attributes&, const Attributes&) = default;
    friend auto operator<=>(const Attributes&, const Attributes&) = default;
};

/// One aggregated movement count between two zones in one time window.
struct ODMCell {
    ZoneId origin;
    ZoneId destination;
    TimeWindow window;
    double count = 0;
    Attributes attributes;
    /// Test-only escape hatch: marks a cell admitted below the provider's
    /// confidentiality threshold (permissive parsing, synthetic data).
    bool pre_suppression = false;
};

/// Sentinel for providers that register movements by majority presence in
/// a long time window instead of a stop-time rule.
inline constexpr int kStopTimeWindowMajority = -1;

/// Declarative description of one feed's heterogeneity axes.
struct ProviderProfile {
    std::string provider_id;
    std::string zoning_id;
    int window_minutes = 0;
    int stop_time_minutes = 0; // [15,60] or kStopTimeWindowMajority
    bool extrapolated = false;
    std::optional<double> market_share; // required when extrapolated == false
    int threshold_k = 1;
    std::map<std::string, std::string> column_map; // canonical field -> CSV column
    std::string crs_id;
    std::vector<std::string> warnings; // filled by validate()

    void validate();
};

/// Canonical field names a feed may carry. Anything else in a column_map is
/// a schema violation (and a privacy finding, see privacy::reasonability_test).
const std::vector<std::string>& canonical_feed_fields();

ProviderProfile load_profile(const std::filesystem::path& path);
ProviderProfile profile_from_json(const nlohmann::json& doc, const std::string& source);
nlohmann::json profile_to_json(const ProviderProfile& profile);

enum class ParseMode {
    strict,    // a row below threshold_k is a ThresholdViolation
    permissive // such rows are kept and flagged pre_suppression
};

std::vector<ODMCell> parse_odm(const std::filesystem::path& path, const ProviderProfile& profile,
                               ParseMode mode = ParseMode::strict);
std::vector<ODMCell> parse_odm(std::istream& in, const std::string& source,
                               const ProviderProfile& profile, ParseMode mode = ParseMode::strict);

struct FeedMeta {
    std::string provider_id;
    std::string zoning_id;
    int window_minutes = 0;
    int stop_time_minutes = 0;
    int threshold_k = 1;
    bool extrapolated = false;
    std::vector<std::string> notes; // provenance trail
};

/// One provider's feed after canonicalization: duplicate keys merged,
/// deterministic order, zone codes and attribute sets interned. Immutable
/// after construction and safe to share across threads read-only.
class CanonicalFeed {
  public:
    struct Cell {
        core::Minute start;
        std::uint32_t origin;         // index into zone_codes()
        std::uint32_t dest;           // index into zone_codes()
        std::uint32_t attrs_flags;    // low 31 bits: attribute set index; high bit: pre_suppression
        std::int32_t duration_minutes;
        double count;

        static constexpr std::uint32_t kPreSuppressionBit = 0x80000000u;
        std::uint32_t attrs() const { return attrs_flags & ~kPreSuppressionBit; }
        bool pre_suppression() const { return attrs_flags & kPreSuppressionBit; }
    };

    FeedMeta meta;
    std::vector<std::string> zone_codes; // sorted, unique; cell indices follow this order
    std::vector<Attributes> attr_sets;   // [0] is the empty set; rest sorted
    std::vector<Cell> cells;             // sorted by (start, origin, dest, attrs)

    std::size_t size() const { return cells.size(); }
    bool empty() const { return cells.empty(); }
    double total_count() const;
    bool has_attributes() const { return attr_sets.size() > 1; }

    /// Materialises cell i as a string-typed ODMCell view.
    ODMCell cell_at(std::size_t i) const;

    std::vector<core::Date> days() const; // distinct window-start days, ascending
};

/// Builder used by every producer of canonical feeds; finish() sorts,
/// merges duplicate keys additively and interns tables.
class FeedBuilder {
  public:
    explicit FeedBuilder(FeedMeta meta) : meta_(std::move(meta)) {}

    std::uint32_t zone(const std::string& code);
    std::uint32_t attrs(const Attributes& attrs);
    void add(core::Minute start, std::uint32_t origin, std::uint32_t dest, int duration_minutes,
             double count, std::uint32_t attr_index = 0, bool pre_suppression = false);
    CanonicalFeed finish();

  private:
    FeedMeta meta_;
    std::map<std::string, std::uint32_t> zone_index_;
    std::vector<std::string> zones_;
    std::map<std::tuple<std::string, std::string, std::string>, std::uint32_t> attr_index_;
    std::vector<Attributes> attrs_;
    std::vector<CanonicalFeed::Cell> cells_;
};

CanonicalFeed canonicalize(const std::vector<ODMCell>& cells, const ProviderProfile& profile);

/// Canonical CSV serialisation; parsing it back and re-serialising is
/// byte-identical. Attribute columns appear only when the feed has any.
void write_odm_csv(const CanonicalFeed& feed, std::ostream& out);
void write_odm_csv(const CanonicalFeed& feed, const std::filesystem::path& path);

/// Identity column map for feeds written by write_odm_csv.
std::map<std::string, std::string> canonical_column_map(bool with_attributes);

} // namespace odmforge::ingest
