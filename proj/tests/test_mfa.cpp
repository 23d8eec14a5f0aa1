#include <doctest.h>

#include <cstring>
#include <numeric>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "helpers.hpp"
#include "odmforge/core/error.hpp"
#include "odmforge/mfa/mfa.hpp"
#include "oracles.hpp"

using namespace odmforge;
using namespace odmforge::mfa;
using ingest::ODMCell;

namespace {

const core::Date kDay = core::parse_date("2020-03-02");

MobilityGraph graph_of(const std::vector<std::string>& nodes,
                       const std::vector<std::tuple<int, int, double>>& edges) {
    MobilityGraph g;
    g.day = kDay;
    g.nodes = nodes; // assumed sorted by the caller
    for (const auto& [u, v, w] : edges)
        g.edges.push_back({static_cast<std::uint32_t>(std::min(u, v)),
                           static_cast<std::uint32_t>(std::max(u, v)), w});
    std::sort(g.edges.begin(), g.edges.end(),
              [](const auto& a, const auto& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    return g;
}

ingest::CanonicalFeed feed_of(const std::vector<std::tuple<std::string, std::string, double>>& cells) {
    ingest::ProviderProfile p;
    p.provider_id = "mno1";
    p.zoning_id = "grid-a";
    p.window_minutes = 1440;
    p.stop_time_minutes = 30;
    p.extrapolated = true;
    p.threshold_k = 1;
    p.column_map = ingest::canonical_column_map(false);
    std::vector<ODMCell> odm_cells;
    for (const auto& [o, d, count] : cells) {
        ODMCell c;
        c.origin = {"grid-a", o};
        c.destination = {"grid-a", d};
        c.window = {core::date_to_minute(kDay), 1440};
        c.count = count;
        odm_cells.push_back(c);
    }
    return ingest::canonicalize(odm_cells, p);
}

DailyMFA daily_of(core::Date day, const std::vector<std::vector<std::string>>& clusters) {
    DailyMFA d;
    d.day = day;
    d.clusters = clusters;
    return d;
}

MobilityGraph random_graph(std::mt19937_64& rng, int max_nodes = 8) {
    const int n = static_cast<int>(testutil::rand_int(rng, 2, max_nodes));
    std::vector<std::string> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back("Z" + std::to_string(i));
    std::vector<std::tuple<int, int, double>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (testutil::rand_int(rng, 0, 1))
                edges.emplace_back(i, j, static_cast<double>(testutil::rand_int(rng, 1, 20)));
    return graph_of(nodes, edges);
}

} // namespace

TEST_CASE("build_graph symmetrises directed flows") {
    const auto g = build_graph(feed_of({{"a", "b", 10}, {"b", "a", 5}}), kDay);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].weight == 15.0);
    CHECK(g.nodes.size() == 2);
}

TEST_CASE("build_graph keeps self-loop-only zones as zero-degree nodes") {
    const auto g = build_graph(feed_of({{"a", "a", 100}}), kDay);
    CHECK(g.edges.empty());
    REQUIRE(g.nodes.size() == 1);
    CHECK(g.nodes[0] == "a");
    CHECK(g.degrees()[0] == 0.0);
}

TEST_CASE("build_graph keeps disjoint pairs as separate components") {
    const auto g = build_graph(feed_of({{"a", "b", 10}, {"c", "d", 2}}), kDay);
    REQUIRE(g.edges.size() == 2);
    CHECK(g.edges[0].weight == 10.0);
    CHECK(g.edges[1].weight == 2.0);
}

TEST_CASE("build_graph rejects a day without movements") {
    try {
        build_graph(feed_of({{"a", "b", 10}}), kDay + 1);
        FAIL("expected EmptyDay");
    } catch (const OdmError& e) {
        CHECK(e.code() == Errc::empty_day);
    }
}

TEST_CASE("two cliques joined by a weak bridge split exactly") {
    std::vector<std::string> nodes = {"A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4"};
    std::vector<std::tuple<int, int, double>> edges;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            edges.emplace_back(i, j, 10.0);
            edges.emplace_back(4 + i, 4 + j, 10.0);
        }
    edges.emplace_back(3, 4, 1.0); // bridge A4 - B1
    const auto g = graph_of(nodes, edges);

    // oracle first: exhaustive search over all partitions of 8 nodes
    const auto best = testutil::exhaustive_best_partition(g);
    const auto expected = testutil::assign_as_sets(g, best.assign);
    REQUIRE(expected.size() == 2);
    CHECK(expected.count({"A1", "A2", "A3", "A4"}) == 1);
    CHECK(expected.count({"B1", "B2", "B3", "B4"}) == 1);

    const auto daily = cluster_daily(g);
    CHECK(testutil::partition_as_sets(daily.clusters) == expected);
    CHECK(daily.modularity == doctest::Approx(best.q).epsilon(1e-12));
}

TEST_CASE("a uniform triangle stays one cluster") {
    const auto g = graph_of({"a", "b", "c"}, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
    const auto best = testutil::exhaustive_best_partition(g);
    REQUIRE(testutil::assign_as_sets(g, best.assign).size() == 1);

    const auto daily = cluster_daily(g);
    REQUIRE(daily.clusters.size() == 1);
    CHECK(daily.clusters[0].size() == 3);
    CHECK(daily.modularity == doctest::Approx(0.0)); // whole graph in one community
}

TEST_CASE("an edgeless graph is all singletons") {
    MobilityGraph g;
    g.day = kDay;
    g.nodes = {"a", "b", "c"};
    const auto daily = cluster_daily(g);
    CHECK(daily.clusters.empty());
    CHECK(daily.singletons.size() == 3);
    CHECK(daily.modularity == 0.0);
}

TEST_CASE("planted three-block graphs are recovered exactly") {
    std::mt19937_64 rng(61);
    for (int round = 0; round < 5; ++round) {
        // blocks {0,1,2} {3,4} {5,6,7}: strong inside, single weak ties between
        std::vector<std::string> nodes;
        for (int i = 0; i < 8; ++i) nodes.push_back("N" + std::to_string(i));
        std::vector<std::tuple<int, int, double>> edges;
        const int blocks[8] = {0, 0, 0, 1, 1, 2, 2, 2};
        for (int i = 0; i < 8; ++i)
            for (int j = i + 1; j < 8; ++j)
                if (blocks[i] == blocks[j])
                    edges.emplace_back(i, j,
                                       static_cast<double>(testutil::rand_int(rng, 12, 20)));
        edges.emplace_back(2, 3, 1.0);
        edges.emplace_back(4, 5, 1.0);
        const auto g = graph_of(nodes, edges);

        const auto best = testutil::exhaustive_best_partition(g);
        const auto expected = testutil::assign_as_sets(g, best.assign);
        const auto daily = cluster_daily(g);
        CHECK(testutil::partition_as_sets(daily.clusters) == expected);
    }
}

TEST_CASE("clustering is deterministic") {
    std::mt19937_64 rng(67);
    for (int round = 0; round < 10; ++round) {
        const auto g = random_graph(rng);
        const auto a = cluster_daily(g);
        const auto b = cluster_daily(g);
        CHECK(a.clusters == b.clusters);
        CHECK(a.singletons == b.singletons);
        CHECK(std::memcmp(&a.modularity, &b.modularity, sizeof(double)) == 0);
    }
}

TEST_CASE("clustering always returns a partition with the documented bounds") {
    std::mt19937_64 rng(71);
    for (int round = 0; round < 60; ++round) {
        const auto g = random_graph(rng);
        const auto daily = cluster_daily(g);

        // disjoint cover of the node set
        std::set<std::string> seen;
        std::size_t count = 0;
        for (const auto& cluster : daily.clusters) {
            CHECK(!cluster.empty());
            for (const auto& zone : cluster) {
                CHECK(seen.insert(zone).second);
                ++count;
            }
        }
        for (const auto& zone : daily.singletons) {
            CHECK(seen.insert(zone).second);
            ++count;
        }
        CHECK(count == g.nodes.size());

        // the returned Q matches the reference formula on the same partition
        std::vector<std::uint32_t> assign(g.nodes.size());
        std::map<std::string, std::uint32_t> index;
        for (std::uint32_t i = 0; i < g.nodes.size(); ++i) index[g.nodes[i]] = i;
        std::uint32_t label = 0;
        for (const auto& cluster : daily.clusters) {
            for (const auto& zone : cluster) assign[index[zone]] = label;
            ++label;
        }
        for (const auto& zone : daily.singletons) assign[index[zone]] = label++;
        CHECK(daily.modularity ==
              doctest::Approx(testutil::modularity_reference(g, assign)).epsilon(1e-12));

        // lower bounds: all-singletons and one-cluster partitions
        std::vector<std::uint32_t> singles(g.nodes.size());
        std::iota(singles.begin(), singles.end(), 0);
        CHECK(daily.modularity >= testutil::modularity_reference(g, singles) - 1e-12);
        std::vector<std::uint32_t> one(g.nodes.size(), 0);
        CHECK(daily.modularity >= testutil::modularity_reference(g, one) - 1e-12);
    }
}

TEST_CASE("uniform edge scaling leaves the partition unchanged") {
    std::mt19937_64 rng(73);
    for (int round = 0; round < 10; ++round) {
        auto g = random_graph(rng);
        const auto before = cluster_daily(g);
        for (auto& e : g.edges) e.weight *= 37.5;
        const auto after = cluster_daily(g);
        CHECK(before.clusters == after.clusters);
        CHECK(before.singletons == after.singletons);
    }
}

TEST_CASE("identical daily partitions persist with membership one") {
    std::vector<DailyMFA> daily;
    for (int d = 0; d < 5; ++d)
        daily.push_back(daily_of(kDay + d, {{"a", "b"}, {"c", "d", "e"}}));
    const auto mfas = fuzzy_intersect(daily, 0.5);
    REQUIRE(mfas.size() == 2);
    CHECK(mfas[0].members.size() == 2);
    CHECK(mfas[1].members.size() == 3);
    for (const auto& mfa : mfas) {
        CHECK(mfa.support_days == 5);
        for (const auto& [zone, membership] : mfa.members)
            CHECK(membership == doctest::Approx(1.0));
    }
}

TEST_CASE("three-of-four-day co-assignment scores 0.75") {
    std::vector<DailyMFA> daily;
    for (int d = 0; d < 3; ++d) daily.push_back(daily_of(kDay + d, {{"a", "b"}}));
    daily.push_back(daily_of(kDay + 3, {{"a"}, {"b"}}));
    const auto mfas = fuzzy_intersect(daily, 0.5);
    REQUIRE(mfas.size() == 1);
    REQUIRE(mfas[0].members.size() == 2);
    CHECK(mfas[0].members[0].second == doctest::Approx(0.75));
    CHECK(mfas[0].members[1].second == doctest::Approx(0.75));
    CHECK(mfas[0].support_days == 3);

    // a stricter alpha rejects the pair
    CHECK(fuzzy_intersect(daily, 0.8).empty());
}

TEST_CASE("fuzzy_intersect validates alpha") {
    CHECK_THROWS_AS((void)fuzzy_intersect({daily_of(kDay, {{"a", "b"}})}, 0.0), OdmError);
    CHECK_THROWS_AS((void)fuzzy_intersect({daily_of(kDay, {{"a", "b"}})}, 1.5), OdmError);
    try {
        (void)fuzzy_intersect({daily_of(kDay, {{"a", "b"}})}, -1.0);
        FAIL("expected AlphaOutOfRange");
    } catch (const OdmError& e) {
        CHECK(e.code() == Errc::alpha_out_of_range);
    }
}

TEST_CASE("alpha near one reduces to the meet of the daily partitions") {
    std::mt19937_64 rng(79);
    const double alpha = 1.0 - 1e-12;
    for (int round = 0; round < 40; ++round) {
        const int days = static_cast<int>(testutil::rand_int(rng, 1, 6));
        const int zones = static_cast<int>(testutil::rand_int(rng, 2, 10));
        std::vector<DailyMFA> daily;
        for (int d = 0; d < days; ++d) {
            std::map<int, std::vector<std::string>> groups;
            for (int z = 0; z < zones; ++z) {
                if (testutil::rand_int(rng, 0, 4) == 0) continue; // absent that day
                groups[static_cast<int>(testutil::rand_int(rng, 0, 3))].push_back(
                    "Z" + std::to_string(z));
            }
            DailyMFA mfa;
            mfa.day = kDay + d;
            for (auto& [label, members] : groups) mfa.clusters.push_back(std::move(members));
            daily.push_back(std::move(mfa));
        }

        const auto mfas = fuzzy_intersect(daily, alpha);
        std::set<std::vector<std::string>> got;
        for (const auto& mfa : mfas) {
            std::vector<std::string> members;
            for (const auto& [zone, membership] : mfa.members) {
                members.push_back(zone);
                CHECK(membership == doctest::Approx(1.0));
            }
            got.insert(members);
        }
        CHECK(got == testutil::meet_of_partitions(daily));
    }
}

TEST_CASE("membership stays at or above alpha") {
    std::mt19937_64 rng(83);
    for (int round = 0; round < 30; ++round) {
        const int days = static_cast<int>(testutil::rand_int(rng, 1, 6));
        std::vector<DailyMFA> daily;
        for (int d = 0; d < days; ++d) {
            std::map<int, std::vector<std::string>> groups;
            for (int z = 0; z < 8; ++z)
                groups[static_cast<int>(testutil::rand_int(rng, 0, 2))].push_back(
                    "Z" + std::to_string(z));
            DailyMFA mfa;
            mfa.day = kDay + d;
            for (auto& [label, members] : groups) mfa.clusters.push_back(std::move(members));
            daily.push_back(std::move(mfa));
        }
        const double alpha = 0.25 + 0.5 * testutil::rand_unit(rng);
        for (const auto& mfa : fuzzy_intersect(daily, alpha))
            for (const auto& [zone, membership] : mfa.members) CHECK(membership >= alpha);
    }
}

TEST_CASE("daily stability is one for identical partitions") {
    std::vector<DailyMFA> daily = {daily_of(kDay, {{"a", "b"}, {"c", "d"}}),
                                   daily_of(kDay + 1, {{"a", "b"}, {"c", "d"}}),
                                   daily_of(kDay + 2, {{"a", "c"}, {"b", "d"}})};
    const auto stability = daily_stability(daily);
    REQUIRE(stability.size() == 2);
    CHECK(stability[0].jaccard == doctest::Approx(1.0));
    CHECK(stability[1].jaccard == doctest::Approx(0.0)); // disjoint pair sets
}

TEST_CASE("daily MFA CSV round trips") {
    std::vector<DailyMFA> daily = {daily_of(kDay, {{"a", "b"}, {"c", "d", "e"}}),
                                   daily_of(kDay + 1, {{"a", "c"}})};
    daily[0].singletons = {"f"};
    daily[0].modularity = 0.25;
    daily[1].modularity = 0.125;

    std::ostringstream out;
    write_daily_csv(daily, out);
    std::istringstream in(out.str());
    const auto back = read_daily_csv(in, "roundtrip");
    REQUIRE(back.size() == 2);
    CHECK(back[0].clusters == daily[0].clusters);
    CHECK(back[0].singletons == daily[0].singletons);
    CHECK(back[0].modularity == 0.25);
    CHECK(back[1].clusters == daily[1].clusters);
}

TEST_CASE("wkt polygons convert to GeoJSON") {
    const auto poly = wkt_to_geojson("POLYGON ((30 10, 40 40, 20 40, 10 20, 30 10))");
    CHECK(poly["type"] == "Polygon");
    CHECK(poly["coordinates"].size() == 1);
    CHECK(poly["coordinates"][0].size() == 5);
    CHECK(poly["coordinates"][0][0][0] == 30.0);

    const auto multi = wkt_to_geojson(
        "MULTIPOLYGON (((0 0, 1 0, 1 1, 0 0)), ((5 5, 6 5, 6 6, 5 5)))");
    CHECK(multi["type"] == "MultiPolygon");
    CHECK(multi["coordinates"].size() == 2);

    CHECK_THROWS_AS((void)wkt_to_geojson("LINESTRING (0 0, 1 1)"), OdmError);
}

TEST_CASE("geojson export emits one feature per MFA") {
    GeometryTable table;
    table.set("a", wkt_to_geojson("POLYGON ((0 0, 1 0, 1 1, 0 0))"));
    table.set("b", wkt_to_geojson("POLYGON ((2 2, 3 2, 3 3, 2 2))"));
    table.set("c", wkt_to_geojson("POLYGON ((4 4, 5 4, 5 5, 4 4))"));
    table.set("d", wkt_to_geojson("POLYGON ((6 6, 7 6, 7 7, 6 6))"));

    std::vector<PersistentMFA> mfas(2);
    mfas[0].id = 1;
    mfas[0].members = {{"a", 1.0}, {"b", 0.8}};
    mfas[0].support_days = 5;
    mfas[1].id = 2;
    mfas[1].members = {{"c", 1.0}, {"d", 1.0}};
    mfas[1].support_days = 4;

    const auto doc = export_mfa_geojson(mfas, table);
    CHECK(doc["type"] == "FeatureCollection");
    REQUIRE(doc["features"].size() == 2);
    CHECK(doc["features"][0]["properties"]["id"] == 1);
    CHECK(doc["features"][0]["properties"]["member_count"] == 2);
    CHECK(doc["features"][0]["properties"]["support_days"] == 5);
    CHECK(doc["features"][0]["geometry"]["type"] == "MultiPolygon");
    CHECK(doc["features"][0]["geometry"]["coordinates"].size() == 2);
}

TEST_CASE("geojson export of no MFAs is a valid empty collection") {
    const auto doc = export_mfa_geojson({}, GeometryTable{});
    CHECK(doc["type"] == "FeatureCollection");
    CHECK(doc["features"].empty());
}

TEST_CASE("geojson export names zones without geometry") {
    GeometryTable table;
    table.set("a", wkt_to_geojson("POLYGON ((0 0, 1 0, 1 1, 0 0))"));
    std::vector<PersistentMFA> mfas(1);
    mfas[0].id = 1;
    mfas[0].members = {{"a", 1.0}, {"missing-zone", 1.0}};
    try {
        export_mfa_geojson(mfas, table);
        FAIL("expected MissingGeometry");
    } catch (const OdmError& e) {
        CHECK(e.code() == Errc::missing_geometry);
        CHECK(std::string(e.what()).find("missing-zone") != std::string::npos);
    }
}
