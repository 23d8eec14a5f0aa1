#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "odmforge/harmonise/harmonise.hpp"
#include "odmforge/ingest/ingest.hpp"

namespace odmforge::mfa {

/// Undirected daily mobility graph at the feed's own granularity. Edge
/// weights sum both directed flows; self-loops are excluded, so zones that
/// move only within themselves appear as zero-degree nodes.
struct MobilityGraph {
    struct Edge {
        std::uint32_t u, v; // u < v, indices into nodes
        double weight;      // > 0
    };

    core::Date day = 0;
    std::vector<std::string> nodes; // zone codes, sorted
    std::vector<Edge> edges;        // sorted by (u, v)

    std::vector<double> degrees() const;
    double total_weight() const;
};

MobilityGraph build_graph(const ingest::CanonicalFeed& feed, core::Date day);
MobilityGraph build_graph(const harmonise::HarmonizedODM& odm);

/// Daily partition of the graph into high-exchange clusters.
struct DailyMFA {
    core::Date day = 0;
    std::vector<std::vector<std::string>> clusters; // disjoint, sorted members
    std::vector<std::string> singletons;            // zero-degree zones
    double modularity = 0;
};

struct ClusterOptions {
    double resolution = 1.0; // plain modularity
};

/// Greedy modularity maximisation (Louvain-style level iteration) with
/// deterministic node visitation in ascending zone-code order; ties break
/// toward the community containing the lowest zone code.
DailyMFA cluster_daily(const MobilityGraph& graph, const ClusterOptions& options = {});

/// Weighted modularity of a partition given as node-index groups.
double modularity(const MobilityGraph& graph,
                  const std::vector<std::vector<std::uint32_t>>& partition,
                  double resolution = 1.0);

struct PersistentMFA {
    int id = 0;
    std::vector<std::pair<std::string, double>> members; // (zone, membership >= alpha)
    double alpha = 0;
    int support_days = 0; // days on which >= 2 members were co-clustered
};

/// Reduces daily partitions to persistent areas: the co-assignment score
/// s(i,j) = (days together) / (days both clustered) induces a graph with
/// edges s >= alpha; persistent MFAs are its connected components of size
/// >= 2. Membership is the mean score toward a zone's alpha-neighbours.
std::vector<PersistentMFA> fuzzy_intersect(const std::vector<DailyMFA>& daily, double alpha);

/// Day-over-day partition stability: Jaccard similarity of the co-clustered
/// pair sets of consecutive daily MFAs.
struct StabilityPoint {
    core::Date from = 0, to = 0;
    double jaccard = 0;
};
std::vector<StabilityPoint> daily_stability(const std::vector<DailyMFA>& daily);

/// Zone geometries for map export, as GeoJSON geometry objects.
class GeometryTable {
  public:
    static GeometryTable load_wkt_csv(const std::filesystem::path& path);
    static GeometryTable load_geojson(const std::filesystem::path& path);

    void set(const std::string& zone, nlohmann::json geometry);
    const nlohmann::json* find(const std::string& zone) const;
    std::size_t size() const { return geometry_.size(); }

  private:
    std::map<std::string, nlohmann::json> geometry_;
};

/// RFC 7946 FeatureCollection with one Feature per persistent MFA.
nlohmann::json export_mfa_geojson(const std::vector<PersistentMFA>& mfas,
                                  const GeometryTable& geometries);

/// Parses WKT POLYGON / MULTIPOLYGON into a GeoJSON geometry object.
nlohmann::json wkt_to_geojson(const std::string& wkt);

void write_daily_csv(std::span<const DailyMFA> daily, std::ostream& out);
std::vector<DailyMFA> read_daily_csv(std::istream& in, const std::string& source);
void write_members_csv(std::span<const PersistentMFA> mfas, std::ostream& out);
void write_stability_csv(std::span<const StabilityPoint> points, std::ostream& out);

} // namespace odmforge::mfa
