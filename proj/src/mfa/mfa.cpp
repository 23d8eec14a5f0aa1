#include "odmforge/mfa/mfa.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <set>

#include "odmforge/core/csv.hpp"
#include "odmforge/core/error.hpp"
#include "odmforge/core/text.hpp"

namespace odmforge::mfa {

std::vector<double> MobilityGraph::degrees() const {
    std::vector<double> k(nodes.size(), 0.0);
    for (const Edge& e : edges) {
        k[e.u] += e.weight;
        k[e.v] += e.weight;
    }
    return k;
}

double MobilityGraph::total_weight() const {
    double w = 0;
    for (const Edge& e : edges) w += e.weight;
    return w;
}

namespace {

MobilityGraph graph_from_cells(core::Date day, const std::vector<std::string>& all_codes,
                               const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& cells) {
    if (cells.empty())
        fail(Errc::empty_day, "no movements on " + core::format_date(day));

    // Nodes: every zone touched that day, in code order.
    std::set<std::uint32_t> touched;
    for (const auto& [o, d, count] : cells) {
        touched.insert(o);
        touched.insert(d);
    }
    std::vector<std::uint32_t> node_of_src(all_codes.size(), UINT32_MAX);
    MobilityGraph graph;
    graph.day = day;
    graph.nodes.reserve(touched.size());
    for (std::uint32_t src : touched) {
        node_of_src[src] = static_cast<std::uint32_t>(graph.nodes.size());
        graph.nodes.push_back(all_codes[src]);
    }

    std::map<std::pair<std::uint32_t, std::uint32_t>, double> weights;
    for (const auto& [o, d, count] : cells) {
        if (o == d || count <= 0) continue; // self-loops never form edges
        const std::uint32_t u = node_of_src[o];
        const std::uint32_t v = node_of_src[d];
        weights[{std::min(u, v), std::max(u, v)}] += count;
    }
    graph.edges.reserve(weights.size());
    for (const auto& [pair, w] : weights)
        if (w > 0) graph.edges.push_back({pair.first, pair.second, w});
    return graph;
}

} // namespace

MobilityGraph build_graph(const ingest::CanonicalFeed& feed, core::Date day) {
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> cells;
    for (const auto& c : feed.cells)
        if (core::minute_to_date(c.start) == day) cells.emplace_back(c.origin, c.dest, c.count);
    return graph_from_cells(day, feed.zone_codes, cells);
}

MobilityGraph build_graph(const harmonise::HarmonizedODM& odm) {
    std::vector<std::string> codes;
    codes.reserve(odm.registry->size());
    for (std::uint32_t i = 0; i < odm.registry->size(); ++i)
        codes.push_back(odm.registry->zone(i).nuts_code);
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> cells;
    cells.reserve(odm.cells.size());
    for (const auto& c : odm.cells) cells.emplace_back(c.origin, c.dest, c.count);
    return graph_from_cells(odm.day, codes, cells);
}

double modularity(const MobilityGraph& graph,
                  const std::vector<std::vector<std::uint32_t>>& partition, double resolution) {
    const double m2 = 2.0 * graph.total_weight();
    if (m2 <= 0) return 0.0;
    std::vector<std::uint32_t> comm(graph.nodes.size(), UINT32_MAX);
    for (std::uint32_t c = 0; c < partition.size(); ++c)
        for (std::uint32_t node : partition[c]) comm[node] = c;
    for (std::uint32_t node = 0; node < comm.size(); ++node)
        if (comm[node] == UINT32_MAX)
            fail(Errc::invalid_range, "partition does not cover node " + graph.nodes[node]);

    std::vector<double> s_in(partition.size(), 0.0), s_tot(partition.size(), 0.0);
    const std::vector<double> k = graph.degrees();
    for (std::uint32_t node = 0; node < comm.size(); ++node) s_tot[comm[node]] += k[node];
    for (const auto& e : graph.edges)
        if (comm[e.u] == comm[e.v]) s_in[comm[e.u]] += 2.0 * e.weight;

    double q = 0;
    for (std::uint32_t c = 0; c < partition.size(); ++c)
        q += s_in[c] / m2 - resolution * (s_tot[c] / m2) * (s_tot[c] / m2);
    return q;
}

namespace {

// One level of the aggregation hierarchy. Node order is ascending by the
// lowest base zone contained, which keeps visitation deterministic.
struct LevelGraph {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency;
    std::vector<double> self_loop; // aggregated intra-community weight (counted twice)
    std::vector<double> degree;    // self_loop + incident edge weights

    std::size_t size() const { return adjacency.size(); }
};

// Local moving phase. Returns whether any node changed community.
bool local_moving(const LevelGraph& g, double m2, double resolution,
                  std::vector<std::uint32_t>& comm) {
    const std::size_t n = g.size();
    std::vector<double> s_tot(g.degree);
    // Community members ordered by node index; the front is the community's
    // ranking key for tie-breaks (lowest contained code).
    std::vector<std::set<std::uint32_t>> members(n);
    for (std::uint32_t i = 0; i < n; ++i) members[i].insert(i);

    const double eps = 1e-12 * std::max(1.0, m2);
    bool any_move = false;
    bool moved = true;
    for (int pass = 0; moved && pass < 200; ++pass) {
        moved = false;
        std::map<std::uint32_t, double> w_to;
        for (std::uint32_t i = 0; i < n; ++i) {
            const std::uint32_t old_c = comm[i];
            w_to.clear();
            for (const auto& [nbr, w] : g.adjacency[i]) w_to[comm[nbr]] += w;

            s_tot[old_c] -= g.degree[i];
            members[old_c].erase(i);

            auto key_of = [&](std::uint32_t c) {
                return members[c].empty() ? i : *members[c].begin();
            };
            auto gain_of = [&](std::uint32_t c, double w) {
                return w - resolution * g.degree[i] * s_tot[c] / m2;
            };

            std::uint32_t best_c = old_c;
            double w_old = 0;
            if (auto it = w_to.find(old_c); it != w_to.end()) w_old = it->second;
            double best_g = gain_of(old_c, w_old);
            std::uint32_t best_key = key_of(old_c);
            for (const auto& [c, w] : w_to) {
                if (c == old_c) continue;
                const double gain = gain_of(c, w);
                if (gain > best_g + eps) {
                    best_c = c;
                    best_g = gain;
                    best_key = key_of(c);
                } else if (gain > best_g - eps && best_c != old_c && key_of(c) < best_key) {
                    // tie between improving candidates: lowest-coded wins
                    best_c = c;
                    best_g = std::max(best_g, gain);
                    best_key = key_of(c);
                }
            }

            comm[i] = best_c;
            s_tot[best_c] += g.degree[i];
            members[best_c].insert(i);
            if (best_c != old_c) {
                moved = true;
                any_move = true;
            }
        }
    }
    return any_move;
}

} // namespace

DailyMFA cluster_daily(const MobilityGraph& graph, const ClusterOptions& options) {
    DailyMFA result;
    result.day = graph.day;

    const std::size_t n = graph.nodes.size();
    const std::vector<double> base_degree = graph.degrees();
    for (std::uint32_t i = 0; i < n; ++i)
        if (base_degree[i] == 0) result.singletons.push_back(graph.nodes[i]);

    if (graph.edges.empty()) {
        result.modularity = 0.0;
        return result;
    }

    const double m2 = 2.0 * graph.total_weight();

    // Level 0 mirrors the input graph.
    LevelGraph level;
    level.adjacency.resize(n);
    level.self_loop.assign(n, 0.0);
    level.degree = base_degree;
    for (const auto& e : graph.edges) {
        level.adjacency[e.u].emplace_back(e.v, e.weight);
        level.adjacency[e.v].emplace_back(e.u, e.weight);
    }

    std::vector<std::uint32_t> comm_of_base(n);
    std::iota(comm_of_base.begin(), comm_of_base.end(), 0);

    while (true) {
        std::vector<std::uint32_t> comm(level.size());
        std::iota(comm.begin(), comm.end(), 0);
        if (!local_moving(level, m2, options.resolution, comm)) break;

        // Relabel surviving communities in order of their lowest node, which
        // is also their lowest contained base code.
        std::vector<std::uint32_t> new_label(level.size(), UINT32_MAX);
        std::uint32_t next = 0;
        for (std::uint32_t i = 0; i < level.size(); ++i)
            if (new_label[comm[i]] == UINT32_MAX) new_label[comm[i]] = next++;
        for (auto& c : comm_of_base) c = new_label[comm[c]];

        // Aggregate.
        LevelGraph up;
        up.adjacency.resize(next);
        up.self_loop.assign(next, 0.0);
        up.degree.assign(next, 0.0);
        std::map<std::pair<std::uint32_t, std::uint32_t>, double> cross;
        for (std::uint32_t i = 0; i < level.size(); ++i) {
            const std::uint32_t ci = new_label[comm[i]];
            up.self_loop[ci] += level.self_loop[i];
            up.degree[ci] += level.degree[i];
            for (const auto& [j, w] : level.adjacency[i]) {
                const std::uint32_t cj = new_label[comm[j]];
                if (ci == cj)
                    up.self_loop[ci] += w; // both endpoints add once -> counted twice
                else if (ci < cj)
                    cross[{ci, cj}] += w;
            }
        }
        for (const auto& [pair, w] : cross) {
            up.adjacency[pair.first].emplace_back(pair.second, w);
            up.adjacency[pair.second].emplace_back(pair.first, w);
        }
        if (up.size() == level.size()) break; // no aggregation progress
        level = std::move(up);
    }

    // Assemble clusters of positive-degree nodes.
    std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
    for (std::uint32_t i = 0; i < n; ++i)
        if (base_degree[i] > 0) groups[comm_of_base[i]].push_back(i);

    std::vector<std::vector<std::uint32_t>> partition;
    partition.reserve(groups.size());
    for (auto& [label, nodes] : groups) partition.push_back(std::move(nodes));
    std::sort(partition.begin(), partition.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    // Documented lower bounds: never return below the trivial partitions.
    std::vector<std::vector<std::uint32_t>> full = partition;
    for (std::uint32_t i = 0; i < n; ++i)
        if (base_degree[i] == 0) full.push_back({i});
    double q = modularity(graph, full, options.resolution);

    {
        std::vector<std::vector<std::uint32_t>> one_full;
        std::vector<std::uint32_t> everyone;
        for (std::uint32_t i = 0; i < n; ++i)
            if (base_degree[i] > 0) everyone.push_back(i);
        one_full.push_back(std::move(everyone));
        for (std::uint32_t i = 0; i < n; ++i)
            if (base_degree[i] == 0) one_full.push_back({i});
        const double q_one = modularity(graph, one_full, options.resolution);
        if (q_one > q) {
            partition.clear();
            partition.push_back(one_full.front());
            q = q_one;
        }
    }

    result.modularity = q;
    result.clusters.reserve(partition.size());
    for (const auto& nodes : partition) {
        std::vector<std::string> cluster;
        cluster.reserve(nodes.size());
        for (std::uint32_t node : nodes) cluster.push_back(graph.nodes[node]);
        result.clusters.push_back(std::move(cluster));
    }
    return result;
}

std::vector<PersistentMFA> fuzzy_intersect(const std::vector<DailyMFA>& daily, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        fail(Errc::alpha_out_of_range, "alpha " + core::format_double(alpha) + " outside (0,1]");
    if (daily.empty()) return {};

    // Universe: zones that take part in a cluster on at least one day.
    std::map<std::string, std::uint32_t> zone_index;
    for (const DailyMFA& d : daily)
        for (const auto& cluster : d.clusters)
            for (const std::string& zone : cluster) zone_index.try_emplace(zone, 0);
    std::vector<std::string> zones;
    zones.reserve(zone_index.size());
    for (auto& [zone, idx] : zone_index) {
        idx = static_cast<std::uint32_t>(zones.size());
        zones.push_back(zone);
    }
    const std::size_t n = zones.size();
    if (n == 0) return {};

    auto tri = [n](std::uint32_t i, std::uint32_t j) {
        // i < j
        return static_cast<std::size_t>(i) * (2 * n - i - 1) / 2 + (j - i - 1);
    };
    std::vector<std::uint32_t> together(n * (n - 1) / 2, 0), both(n * (n - 1) / 2, 0);

    for (const DailyMFA& d : daily) {
        std::vector<std::uint32_t> present;
        for (const auto& cluster : d.clusters) {
            std::vector<std::uint32_t> ids;
            ids.reserve(cluster.size());
            for (const std::string& zone : cluster) ids.push_back(zone_index[zone]);
            std::sort(ids.begin(), ids.end());
            for (std::size_t a = 0; a < ids.size(); ++a)
                for (std::size_t b = a + 1; b < ids.size(); ++b)
                    ++together[tri(ids[a], ids[b])];
            present.insert(present.end(), ids.begin(), ids.end());
        }
        std::sort(present.begin(), present.end());
        for (std::size_t a = 0; a < present.size(); ++a)
            for (std::size_t b = a + 1; b < present.size(); ++b)
                ++both[tri(present[a], present[b])];
    }

    // Union-find over the alpha-thresholded co-assignment graph.
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto score = [&](std::uint32_t i, std::uint32_t j) -> double {
        const std::size_t p = tri(i, j);
        if (both[p] == 0) return 0.0;
        return static_cast<double>(together[p]) / static_cast<double>(both[p]);
    };
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (score(i, j) >= alpha) parent[find(i)] = find(j);

    std::map<std::uint32_t, std::vector<std::uint32_t>> components;
    for (std::uint32_t i = 0; i < n; ++i) components[find(i)].push_back(i);

    std::vector<std::vector<std::uint32_t>> kept;
    for (auto& [root, ids] : components)
        if (ids.size() >= 2) kept.push_back(std::move(ids));
    std::sort(kept.begin(), kept.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    std::vector<PersistentMFA> out;
    out.reserve(kept.size());
    for (std::size_t c = 0; c < kept.size(); ++c) {
        const auto& ids = kept[c];
        PersistentMFA mfa;
        mfa.id = static_cast<int>(c + 1);
        mfa.alpha = alpha;

        for (std::uint32_t i : ids) {
            double sum = 0;
            std::size_t neighbours = 0;
            for (std::uint32_t j : ids) {
                if (i == j) continue;
                const double s = score(std::min(i, j), std::max(i, j));
                if (s >= alpha) {
                    sum += s;
                    ++neighbours;
                }
            }
            mfa.members.emplace_back(zones[i], neighbours ? sum / neighbours : 0.0);
        }

        // Days on which the area was actually expressed by a daily cluster.
        std::set<std::uint32_t> member_set(ids.begin(), ids.end());
        for (const DailyMFA& d : daily) {
            for (const auto& cluster : d.clusters) {
                std::size_t hits = 0;
                for (const std::string& zone : cluster)
                    if (member_set.count(zone_index[zone]) && ++hits >= 2) break;
                if (hits >= 2) {
                    ++mfa.support_days;
                    break;
                }
            }
        }
        out.push_back(std::move(mfa));
    }
    return out;
}

namespace {

std::set<std::pair<std::string, std::string>> pair_set(const DailyMFA& d) {
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& cluster : d.clusters)
        for (std::size_t a = 0; a < cluster.size(); ++a)
            for (std::size_t b = a + 1; b < cluster.size(); ++b)
                pairs.emplace(std::min(cluster[a], cluster[b]), std::max(cluster[a], cluster[b]));
    return pairs;
}

} // namespace

std::vector<StabilityPoint> daily_stability(const std::vector<DailyMFA>& daily) {
    std::vector<StabilityPoint> out;
    for (std::size_t i = 1; i < daily.size(); ++i) {
        const auto a = pair_set(daily[i - 1]);
        const auto b = pair_set(daily[i]);
        std::size_t inter = 0;
        for (const auto& p : a) inter += b.count(p);
        const std::size_t uni = a.size() + b.size() - inter;
        out.push_back({daily[i - 1].day, daily[i].day,
                       uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni)});
    }
    return out;
}

void GeometryTable::set(const std::string& zone, nlohmann::json geometry) {
    geometry_[zone] = std::move(geometry);
}

const nlohmann::json* GeometryTable::find(const std::string& zone) const {
    auto it = geometry_.find(zone);
    return it == geometry_.end() ? nullptr : &it->second;
}

GeometryTable GeometryTable::load_wkt_csv(const std::filesystem::path& path) {
    auto in = core::open_input(path);
    core::CsvReader reader(in, path.string());
    const int c_zone = reader.column("zone_code");
    const int c_wkt = reader.column("wkt");
    if (c_zone < 0 || c_wkt < 0)
        fail(Errc::missing_field, path.string() + ": need columns zone_code, wkt");
    GeometryTable table;
    std::vector<std::string> fields;
    while (reader.next(fields)) table.set(fields[c_zone], wkt_to_geojson(fields[c_wkt]));
    return table;
}

GeometryTable GeometryTable::load_geojson(const std::filesystem::path& path) {
    auto in = core::open_input(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::bad_config, path.string() + ": " + e.what());
    }
    GeometryTable table;
    if (!doc.contains("features"))
        fail(Errc::bad_config, path.string() + ": not a FeatureCollection");
    for (const auto& feature : doc["features"]) {
        if (!feature.contains("properties") || !feature["properties"].contains("zone_code"))
            fail(Errc::bad_config, path.string() + ": feature lacks properties.zone_code");
        table.set(feature["properties"]["zone_code"].get<std::string>(), feature["geometry"]);
    }
    return table;
}

nlohmann::json export_mfa_geojson(const std::vector<PersistentMFA>& mfas,
                                  const GeometryTable& geometries) {
    std::vector<std::string> missing;
    for (const auto& mfa : mfas)
        for (const auto& [zone, membership] : mfa.members)
            if (!geometries.find(zone)) missing.push_back(zone);
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        std::string msg = "zones without geometry:";
        for (const auto& zone : missing) msg += " " + zone;
        fail(Errc::missing_geometry, msg);
    }

    nlohmann::json features = nlohmann::json::array();
    for (const auto& mfa : mfas) {
        nlohmann::json polygons = nlohmann::json::array();
        for (const auto& [zone, membership] : mfa.members) {
            const nlohmann::json& geom = *geometries.find(zone);
            const std::string type = geom.value("type", "");
            if (type == "Polygon")
                polygons.push_back(geom["coordinates"]);
            else if (type == "MultiPolygon")
                for (const auto& poly : geom["coordinates"]) polygons.push_back(poly);
            else
                fail(Errc::missing_geometry, "zone " + zone + " has unsupported geometry '" +
                                                 type + "'");
        }
        features.push_back({{"type", "Feature"},
                            {"properties",
                             {{"id", mfa.id},
                              {"support_days", mfa.support_days},
                              {"member_count", mfa.members.size()}}},
                            {"geometry",
                             {{"type", "MultiPolygon"}, {"coordinates", polygons}}}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

namespace {

struct WktParser {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    std::string word() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && (std::isalpha(static_cast<unsigned char>(text[pos])))) ++pos;
        return std::string(text.substr(start, pos - start));
    }

    double number() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && text[pos] != ' ' && text[pos] != ',' && text[pos] != ')' &&
               text[pos] != '(')
            ++pos;
        return core::parse_double(text.substr(start, pos - start));
    }

    nlohmann::json ring() {
        if (!consume('(')) fail(Errc::bad_config, "WKT: expected '(' before ring");
        nlohmann::json coords = nlohmann::json::array();
        do {
            const double x = number();
            const double y = number();
            coords.push_back({x, y});
        } while (consume(','));
        if (!consume(')')) fail(Errc::bad_config, "WKT: expected ')' after ring");
        return coords;
    }

    nlohmann::json polygon() {
        if (!consume('(')) fail(Errc::bad_config, "WKT: expected '(' before polygon");
        nlohmann::json rings = nlohmann::json::array();
        do {
            rings.push_back(ring());
        } while (consume(','));
        if (!consume(')')) fail(Errc::bad_config, "WKT: expected ')' after polygon");
        return rings;
    }
};

} // namespace

nlohmann::json wkt_to_geojson(const std::string& wkt) {
    WktParser parser{wkt};
    const std::string type = core::to_lower(parser.word());
    if (type == "polygon")
        return {{"type", "Polygon"}, {"coordinates", parser.polygon()}};
    if (type == "multipolygon") {
        if (!parser.consume('(')) fail(Errc::bad_config, "WKT: expected '(' after MULTIPOLYGON");
        nlohmann::json polys = nlohmann::json::array();
        do {
            polys.push_back(parser.polygon());
        } while (parser.consume(','));
        if (!parser.consume(')')) fail(Errc::bad_config, "WKT: unbalanced MULTIPOLYGON");
        return {{"type", "MultiPolygon"}, {"coordinates", polys}};
    }
    fail(Errc::bad_config, "WKT: unsupported geometry '" + type + "'");
}

void write_daily_csv(std::span<const DailyMFA> daily, std::ostream& out) {
    core::write_csv_row(out, {"day", "cluster", "zone", "modularity"});
    for (const auto& d : daily) {
        const std::string day = core::format_date(d.day);
        const std::string q = core::format_double(d.modularity);
        for (std::size_t c = 0; c < d.clusters.size(); ++c)
            for (const auto& zone : d.clusters[c])
                core::write_csv_row(out, {day, std::to_string(c + 1), zone, q});
        for (const auto& zone : d.singletons) core::write_csv_row(out, {day, "", zone, q});
    }
}

std::vector<DailyMFA> read_daily_csv(std::istream& in, const std::string& source) {
    core::CsvReader reader(in, source);
    const int c_day = reader.column("day");
    const int c_cluster = reader.column("cluster");
    const int c_zone = reader.column("zone");
    const int c_q = reader.column("modularity");
    if (c_day < 0 || c_cluster < 0 || c_zone < 0 || c_q < 0)
        fail(Errc::missing_field, source + ": need columns day, cluster, zone, modularity");

    std::map<core::Date, DailyMFA> by_day;
    std::map<std::pair<core::Date, long long>, std::size_t> cluster_pos;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const core::Date day = core::parse_date(fields[c_day]);
        DailyMFA& d = by_day[day];
        d.day = day;
        d.modularity = core::parse_double(fields[c_q]);
        if (fields[c_cluster].empty()) {
            d.singletons.push_back(fields[c_zone]);
        } else {
            const long long cluster = core::parse_int(fields[c_cluster]);
            auto [it, inserted] = cluster_pos.try_emplace({day, cluster}, d.clusters.size());
            if (inserted) d.clusters.emplace_back();
            d.clusters[it->second].push_back(fields[c_zone]);
        }
    }
    std::vector<DailyMFA> out;
    out.reserve(by_day.size());
    for (auto& [day, d] : by_day) {
        for (auto& cluster : d.clusters) std::sort(cluster.begin(), cluster.end());
        std::sort(d.singletons.begin(), d.singletons.end());
        out.push_back(std::move(d));
    }
    return out;
}

void write_members_csv(std::span<const PersistentMFA> mfas, std::ostream& out) {
    core::write_csv_row(out, {"mfa_id", "zone_code", "membership", "support_days"});
    for (const auto& mfa : mfas)
        for (const auto& [zone, membership] : mfa.members)
            core::write_csv_row(out, {std::to_string(mfa.id), zone,
                                      core::format_fixed(membership, 6),
                                      std::to_string(mfa.support_days)});
}

void write_stability_csv(std::span<const StabilityPoint> points, std::ostream& out) {
    core::write_csv_row(out, {"from_day", "to_day", "jaccard"});
    for (const auto& p : points)
        core::write_csv_row(out, {core::format_date(p.from), core::format_date(p.to),
                                  core::format_fixed(p.jaccard, 6)});
}

} // namespace odmforge::mfa
