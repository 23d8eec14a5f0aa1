#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "helpers.hpp"
#include "odmforge/core/error.hpp"
#include "odmforge/harmonise/harmonise.hpp"

using namespace odmforge;
using namespace odmforge::harmonise;
using ingest::Attributes;
using ingest::CanonicalFeed;
using ingest::ODMCell;
using ingest::ProviderProfile;

namespace {

ProviderProfile grid_profile(int window_minutes = 60) {
    ProviderProfile p;
    p.provider_id = "mno1";
    p.zoning_id = "grid-a";
    p.window_minutes = window_minutes;
    p.stop_time_minutes = 30;
    p.extrapolated = false;
    p.market_share = 0.25;
    p.threshold_k = 1;
    p.column_map = ingest::canonical_column_map(false);
    p.validate();
    return p;
}

ODMCell cell(const std::string& o, const std::string& d, core::Minute start, double count,
             int duration = 60) {
    ODMCell c;
    c.origin = {"grid-a", o};
    c.destination = {"grid-a", d};
    c.window = {start, duration};
    c.count = count;
    return c;
}

const core::Minute kDay0 = core::date_to_minute(core::parse_date("2020-03-02")); // a Monday

CanonicalFeed feed_of(std::vector<ODMCell> cells, int window_minutes = 60) {
    return ingest::canonicalize(cells, grid_profile(window_minutes));
}

} // namespace

TEST_CASE("map_zones identity mapping") {
    const auto registry = testutil::registry_from_nuts3({"XX111", "XX112"});
    const auto xwalk = testutil::crosswalk_of(
        "grid-a", {{"a", {{"XX111", 1.0}}}, {"b", {{"XX112", 1.0}}}});
    const auto mapped = map_zones(feed_of({cell("a", "b", kDay0, 100)}), xwalk, registry, 3);
    REQUIRE(mapped.size() == 1);
    CHECK(mapped.cell_at(0).origin.code == "XX111");
    CHECK(mapped.cell_at(0).destination.code == "XX112");
    CHECK(mapped.cell_at(0).count == 100.0);
    CHECK(mapped.meta.zoning_id == "nuts3");
}

TEST_CASE("map_zones fans out by the weight product") {
    const auto registry = testutil::registry_from_nuts3({"XX111", "XX112", "XX113"});
    const auto xwalk = testutil::crosswalk_of(
        "grid-a",
        {{"a", {{"XX111", 0.6}, {"XX112", 0.4}}}, {"b", {{"XX113", 1.0}}}});
    const auto mapped = map_zones(feed_of({cell("a", "b", kDay0, 100)}), xwalk, registry, 3);
    REQUIRE(mapped.size() == 2);
    CHECK(mapped.cell_at(0).origin.code == "XX111");
    CHECK(mapped.cell_at(0).count == doctest::Approx(60.0));
    CHECK(mapped.cell_at(1).origin.code == "XX112");
    CHECK(mapped.cell_at(1).count == doctest::Approx(40.0));
}

TEST_CASE("map_zones splits a self cell over all weight pairs") {
    const auto registry = testutil::registry_from_nuts3({"XX111", "XX112"});
    const auto xwalk = testutil::crosswalk_of(
        "grid-a", {{"a", {{"XX111", 0.5}, {"XX112", 0.5}}}});
    const auto feed = feed_of({cell("a", "a", kDay0, 80)});
    const auto mapped = map_zones(feed, xwalk, registry, 3);
    REQUIRE(mapped.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(mapped.cell_at(i).count == doctest::Approx(20.0));

    // brute-force enumeration agrees
    const auto oracle = testutil::naive_map_zones(feed, xwalk, 3);
    REQUIRE(oracle.size() == 4);
    for (const auto& [key, value] : oracle) CHECK(value == doctest::Approx(20.0));
}

TEST_CASE("map_zones matches the naive oracle on random feeds") {
    const std::vector<std::string> nuts3 = {"XX111", "XX112", "XX121", "XX122", "XX211", "XX212"};
    const auto registry = testutil::registry_from_nuts3(nuts3);
    std::mt19937_64 rng(23);
    for (int round = 0; round < 25; ++round) {
        // random provider zoning with random weights onto 1..3 targets
        std::map<std::string, std::vector<std::pair<std::string, double>>> entries;
        const int zones = static_cast<int>(testutil::rand_int(rng, 2, 5));
        for (int z = 0; z < zones; ++z) {
            const int targets = static_cast<int>(testutil::rand_int(rng, 1, 3));
            std::vector<double> raw;
            double sum = 0;
            for (int t = 0; t < targets; ++t) {
                raw.push_back(0.05 + testutil::rand_unit(rng));
                sum += raw.back();
            }
            std::vector<std::pair<std::string, double>> list;
            double emitted = 0;
            for (int t = 0; t < targets; ++t) {
                double w = t == targets - 1 ? 1.0 - emitted : raw[t] / sum;
                emitted += w;
                list.emplace_back(nuts3[testutil::rand_int(rng, 0, nuts3.size() - 1)], w);
            }
            // merge duplicate targets the oracle way (weights may repeat a code)
            entries["z" + std::to_string(z)] = list;
        }
        const auto xwalk = testutil::crosswalk_of("grid-a", entries);

        std::vector<ODMCell> cells;
        const int n = static_cast<int>(testutil::rand_int(rng, 1, 60));
        for (int i = 0; i < n; ++i)
            cells.push_back(cell("z" + std::to_string(testutil::rand_int(rng, 0, zones - 1)),
                                 "z" + std::to_string(testutil::rand_int(rng, 0, zones - 1)),
                                 kDay0 + 60 * testutil::rand_int(rng, 0, 47),
                                 static_cast<double>(testutil::rand_int(rng, 1, 1000))));
        const auto feed = feed_of(cells);
        const int level = static_cast<int>(testutil::rand_int(rng, 0, 3));
        const auto mapped = map_zones(feed, xwalk, registry, level);
        const auto oracle = testutil::naive_map_zones(feed, xwalk, level);

        REQUIRE(mapped.size() == oracle.size());
        for (std::size_t i = 0; i < mapped.size(); ++i) {
            const auto c = mapped.cell_at(i);
            const auto it = oracle.find({c.origin.code, c.destination.code, c.window.start});
            REQUIRE(it != oracle.end());
            CHECK(c.count == doctest::Approx(it->second).epsilon(1e-12));
        }
        // conservation
        CHECK(mapped.total_count() ==
              doctest::Approx(feed.total_count()).epsilon(1e-9));
    }
}

TEST_CASE("map_zones lists every unmapped zone") {
    const auto registry = testutil::registry_from_nuts3({"XX111"});
    const auto xwalk = testutil::crosswalk_of("grid-a", {{"a", {{"XX111", 1.0}}}});
    try {
        map_zones(feed_of({cell("a", "b", kDay0, 10), cell("c", "a", kDay0, 10)}), xwalk,
                  registry, 3);
        FAIL("expected UnmappedZone");
    } catch (const OdmError& e) {
        CHECK(e.code() == Errc::unmapped_zone);
        CHECK(std::string(e.what()).find("b") != std::string::npos);
        CHECK(std::string(e.what()).find("c") != std::string::npos);
    }
}

TEST_CASE("map_zones rejects bad weights") {
    const auto registry = testutil::registry_from_nuts3({"XX111", "XX112"});
    const auto bad_sum = testutil::crosswalk_of(
        "grid-a", {{"a", {{"XX111", 0.6}, {"XX112", 0.3}}}});
    try {
        map_zones(feed_of({cell("a", "a", kDay0, 10)}), bad_sum, registry, 3);
        FAIL("expected BadWeights");
    } catch (const OdmError& e) {
        CHECK(e.code() == Errc::bad_weights);
    }
}

TEST_CASE("rebin_time daily sums a day of hourly cells") {
    std::vector<ODMCell> cells;
    for (int h = 0; h < 24; ++h) cells.push_back(cell("a", "b", kDay0 + 60 * h, 1));
    const auto daily = rebin_time(feed_of(cells), TimeBin::daily);
    REQUIRE(daily.size() == 1);
    CHECK(daily.cell_at(0).count == 24.0);
    CHECK(daily.cell_at(0).window.duration_minutes == core::kMinutesPerDay);
    CHECK(daily.total_count() == 24.0);
}

TEST_CASE("rebin_time weekly splits weekday and weekend sub-bins") {
    std::vector<ODMCell> cells;
    for (int d = 0; d < 7; ++d)
        cells.push_back(cell("a", "b", kDay0 + d * core::kMinutesPerDay, 10, 1440));
    const auto weekly = rebin_time(feed_of(cells, 1440), TimeBin::weekly);
    REQUIRE(weekly.size() == 2);
    const auto first = weekly.cell_at(0);
    const auto second = weekly.cell_at(1);
    CHECK(first.window.duration_minutes == kWeekdayBinMinutes);
    CHECK(first.count == 50.0);
    CHECK(second.window.duration_minutes == kWeekendBinMinutes);
    CHECK(second.count == 20.0);
    CHECK(core::minute_to_date(first.window.start) == core::parse_date("2020-03-02"));
    CHECK(core::minute_to_date(second.window.start) == core::parse_date("2020-03-07"));
}

TEST_CASE("rebin_time daily is idempotent on daily feeds") {
    const auto daily =
        feed_of({cell("a", "b", kDay0, 12, 1440), cell("b", "a", kDay0 + 1440, 7, 1440)}, 1440);
    const auto again = rebin_time(daily, TimeBin::daily);
    std::ostringstream a, b;
    ingest::write_odm_csv(daily, a);
    ingest::write_odm_csv(again, b);
    CHECK(a.str() == b.str());
}

TEST_CASE("extrapolate scales by the inverse market share") {
    const auto feed = feed_of({cell("a", "b", kDay0, 50)});
    const auto scaled = extrapolate(feed, grid_profile());
    CHECK(scaled.cell_at(0).count == doctest::Approx(200.0));
    CHECK(scaled.meta.extrapolated);

    try {
        extrapolate(scaled, grid_profile());
        FAIL("expected AlreadyExtrapolated");
    } catch (const OdmError& e) {
        CHECK(e.code() == Errc::already_extrapolated);
    }
}

TEST_CASE("extrapolate with unit share changes nothing but the mark") {
    ProviderProfile p = grid_profile();
    p.market_share = 1.0;
    const auto feed = feed_of({cell("a", "b", kDay0, 50)});
    const auto scaled = extrapolate(feed, p);
    CHECK(scaled.cell_at(0).count == 50.0);
    CHECK(scaled.meta.extrapolated);
}

TEST_CASE("extrapolate refuses feeds declared extrapolated") {
    ProviderProfile p = grid_profile();
    p.extrapolated = true;
    p.market_share.reset();
    const auto feed = ingest::canonicalize({cell("a", "b", kDay0, 50)}, p);
    try {
        extrapolate(feed, p);
        FAIL("expected AlreadyExtrapolated");
    } catch (const OdmError& e) {
        CHECK(e.code() == Errc::already_extrapolated);
    }
}

TEST_CASE("scale equivariance: cell ratios survive extrapolation") {
    const auto feed = feed_of({cell("a", "b", kDay0, 50), cell("b", "a", kDay0, 20)});
    const auto scaled = extrapolate(feed, grid_profile());
    CHECK(scaled.cell_at(0).count / scaled.cell_at(1).count ==
          doctest::Approx(feed.cell_at(0).count / feed.cell_at(1).count));
}

namespace {

CanonicalFeed mapped_daily(const CanonicalFeed& feed, const ZoneRegistry& registry,
                           const ZoneCrosswalk& xwalk, int level) {
    return rebin_time(map_zones(feed, xwalk, registry, level), TimeBin::daily);
}

} // namespace

TEST_CASE("build_harmonized partitions by day and provider") {
    const auto registry_obj = testutil::registry_from_nuts3({"XX111", "XX112"});
    auto registry = std::make_shared<const ZoneRegistry>(registry_obj);
    const auto xwalk = testutil::crosswalk_of(
        "grid-a", {{"a", {{"XX111", 1.0}}}, {"b", {{"XX112", 1.0}}}});

    std::vector<ODMCell> cells;
    for (int d = 0; d < 3; ++d)
        cells.push_back(cell("a", "b", kDay0 + d * core::kMinutesPerDay, 40 + d));
    const auto daily = mapped_daily(feed_of(cells), *registry, xwalk, 3);
    const auto odms = build_harmonized({daily}, registry, 3);
    REQUIRE(odms.size() == 3);
    CHECK(odms[0].day == core::parse_date("2020-03-02"));
    CHECK(odms[2].day == core::parse_date("2020-03-04"));
    CHECK(odms[0].total() == 40.0);

    // two providers, same day -> two odms, never summed
    auto other = daily;
    other.meta.provider_id = "mno2";
    const auto two = build_harmonized({daily, other}, registry, 3);
    CHECK(two.size() == 6);
    int day0_count = 0;
    for (const auto& odm : two)
        if (odm.day == core::parse_date("2020-03-02")) ++day0_count;
    CHECK(day0_count == 2);
}

TEST_CASE("roll-up to a coarser level preserves totals and children sums") {
    // 4-zone toy hierarchy: XX11{1,2} under XX11, XX12{1,2} under XX12
    const std::vector<std::string> nuts3 = {"XX111", "XX112", "XX121", "XX122"};
    const auto registry_obj = testutil::registry_from_nuts3(nuts3);
    auto registry = std::make_shared<const ZoneRegistry>(registry_obj);
    std::map<std::string, std::vector<std::pair<std::string, double>>> identity;
    for (const auto& z : nuts3) identity["p" + z] = {{z, 1.0}};
    const auto xwalk = testutil::crosswalk_of("grid-a", identity);

    std::mt19937_64 rng(5);
    std::vector<ODMCell> cells;
    for (int i = 0; i < 40; ++i)
        cells.push_back(cell("p" + nuts3[testutil::rand_int(rng, 0, 3)],
                             "p" + nuts3[testutil::rand_int(rng, 0, 3)], kDay0,
                             static_cast<double>(testutil::rand_int(rng, 1, 100))));
    const auto feed = feed_of(cells);

    const auto at3 = mapped_daily(feed, *registry, xwalk, 3);
    const auto at2 = mapped_daily(feed, *registry, xwalk, 2);
    CHECK(at3.total_count() == doctest::Approx(at2.total_count()).epsilon(1e-12));

    // level-2 cells equal the sum of their level-3 children cells
    const auto oracle2 = testutil::naive_map_zones(feed, xwalk, 2);
    for (std::size_t i = 0; i < at2.size(); ++i) {
        const auto c = at2.cell_at(i);
        double child_sum = 0;
        for (std::size_t j = 0; j < at3.size(); ++j) {
            const auto c3 = at3.cell_at(j);
            if (c3.origin.code.substr(0, 4) == c.origin.code &&
                c3.destination.code.substr(0, 4) == c.destination.code)
                child_sum += c3.count;
        }
        CHECK(c.count == doctest::Approx(child_sum).epsilon(1e-12));
    }
    (void)oracle2;
}

TEST_CASE("map_zones and daily rebin commute") {
    const std::vector<std::string> nuts3 = {"XX111", "XX112", "XX121"};
    const auto registry = testutil::registry_from_nuts3(nuts3);
    const auto xwalk = testutil::crosswalk_of(
        "grid-a", {{"a", {{"XX111", 0.7}, {"XX121", 0.3}}}, {"b", {{"XX112", 1.0}}}});

    std::mt19937_64 rng(17);
    std::vector<ODMCell> cells;
    for (int i = 0; i < 120; ++i)
        cells.push_back(cell(testutil::rand_int(rng, 0, 1) ? "a" : "b",
                             testutil::rand_int(rng, 0, 1) ? "a" : "b",
                             kDay0 + 60 * testutil::rand_int(rng, 0, 71),
                             static_cast<double>(testutil::rand_int(rng, 1, 50))));
    const auto feed = feed_of(cells);

    const auto a = rebin_time(map_zones(feed, xwalk, registry, 3), TimeBin::daily);
    const auto b = map_zones(rebin_time(feed, TimeBin::daily), xwalk, registry, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.cell_at(i).origin.code == b.cell_at(i).origin.code);
        CHECK(a.cell_at(i).destination.code == b.cell_at(i).destination.code);
        CHECK(a.cell_at(i).count == doctest::Approx(b.cell_at(i).count).epsilon(1e-12));
    }
}

TEST_CASE("build_harmonized rejects non-daily feeds") {
    const auto registry_obj = testutil::registry_from_nuts3({"XX111"});
    auto registry = std::make_shared<const ZoneRegistry>(registry_obj);
    const auto xwalk = testutil::crosswalk_of("grid-a", {{"a", {{"XX111", 1.0}}}});
    const auto hourly = map_zones(feed_of({cell("a", "a", kDay0, 10)}), xwalk, *registry, 3);
    CHECK_THROWS_AS((void)build_harmonized({hourly}, registry, 3), OdmError);
}

TEST_CASE("zone registry validates structure") {
    using harmonise::RefZone;
    CHECK_THROWS_AS((void)ZoneRegistry::from_zones({RefZone{"XX1", 1, "", std::nullopt}}),
                    OdmError); // missing parent
    CHECK_THROWS_AS((void)ZoneRegistry::from_zones(
                        {RefZone{"XX", 0, "", std::nullopt}, RefZone{"YY1", 1, "XX", std::nullopt}}),
                    OdmError); // prefix mismatch
    const auto registry = testutil::registry_from_nuts3({"XX111"});
    CHECK(registry.zone(registry.ancestor(*registry.index_of("XX111"), 0)).nuts_code == "XX");
    CHECK(registry.zone(registry.ancestor(*registry.index_of("XX111"), 2)).nuts_code == "XX11");
}
