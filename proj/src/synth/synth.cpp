#include "odmforge/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "odmforge/core/csv.hpp"
#include "odmforge/core/error.hpp"
#include "odmforge/core/text.hpp"

namespace odmforge::synth {

double ModulationSpec::at(core::Date day) const {
    double m = 1.0;
    for (const ModulationPhase& phase : phases) {
        if (phase.from > day) break;
        m = phase.multiplier;
    }
    if (core::is_weekend(day)) m *= weekend_factor;
    if (auto it = overrides.find(day); it != overrides.end()) m *= it->second;
    return m;
}

void ScenarioSpec::validate() const {
    if (num_days < 1) fail(Errc::invalid_spec, "num_days must be >= 1");
    if (gravity_scale < 0) fail(Errc::invalid_spec, "gravity scale must be >= 0");
    if (distance_decay <= 0) fail(Errc::invalid_spec, "distance_decay must be > 0");
    if (self_rate < 0) fail(Errc::invalid_spec, "self_rate must be >= 0");
    if (noise_sigma < 0) fail(Errc::invalid_spec, "noise_sigma must be >= 0");
    if (modulation.weekend_factor <= 0) fail(Errc::invalid_spec, "weekend_factor must be > 0");
    if (zones.empty()) fail(Errc::invalid_spec, "scenario needs at least one zone");
    if (providers.empty()) fail(Errc::invalid_spec, "scenario needs at least one provider");

    std::set<std::string> codes;
    for (const SynthZone& z : zones) {
        if (z.code.size() != 5)
            fail(Errc::invalid_spec, "zone code '" + z.code +
                                         "' must be 5 characters (NUTS3-style)");
        if (!codes.insert(z.code).second)
            fail(Errc::invalid_spec, "duplicate zone code " + z.code);
        if (z.population <= 0)
            fail(Errc::invalid_spec, "zone " + z.code + ": population must be positive");
    }
    for (std::size_t i = 0; i < zones.size(); ++i)
        for (std::size_t j = i + 1; j < zones.size(); ++j) {
            const double dx = zones[i].x - zones[j].x;
            const double dy = zones[i].y - zones[j].y;
            if (dx * dx + dy * dy < 1e-18)
                fail(Errc::invalid_spec, "zones " + zones[i].code + " and " + zones[j].code +
                                             " share coordinates");
        }

    for (const ProviderSpec& p : providers) {
        ProviderSpec copy = p;
        copy.profile.validate(); // throws on bad profile
        if (p.sim_market_share <= 0 || p.sim_market_share > 1)
            fail(Errc::invalid_spec,
                 "provider " + p.profile.provider_id + ": sim_market_share outside (0,1]");
        if (p.roamer_share < 0 || p.roamer_share >= 1)
            fail(Errc::invalid_spec,
                 "provider " + p.profile.provider_id + ": roamer_share outside [0,1)");
        for (const SynthZone& z : zones)
            if (!p.zone_map.count(z.code))
                fail(Errc::invalid_spec, "provider " + p.profile.provider_id +
                                             ": zone_map misses base zone " + z.code);
        for (const auto& [base, pz] : p.zone_map) {
            if (pz.empty())
                fail(Errc::invalid_spec,
                     "provider " + p.profile.provider_id + ": empty provider zone code");
            if (!codes.count(base))
                fail(Errc::invalid_spec, "provider " + p.profile.provider_id +
                                             ": zone_map names unknown base zone " + base);
        }
    }
}

ScenarioSpec ScenarioSpec::from_json(const nlohmann::json& doc, const std::string& source) {
    ScenarioSpec spec;
    try {
        spec.seed = doc.at("seed").get<std::uint64_t>();
        spec.start_date = core::parse_date(doc.at("start_date").get<std::string>());
        spec.num_days = doc.at("num_days").get<int>();
        const auto& gravity = doc.at("gravity");
        spec.gravity_scale = gravity.at("scale").get<double>();
        spec.distance_decay = gravity.at("distance_decay").get<double>();
        spec.self_rate = gravity.value("self_rate", 0.0);
        spec.noise_sigma = doc.value("noise_sigma", 0.0);
        for (const auto& z : doc.at("zones"))
            spec.zones.push_back(SynthZone{z.at("code").get<std::string>(),
                                           z.at("x").get<double>(), z.at("y").get<double>(),
                                           z.at("population").get<std::int64_t>(),
                                           z.value("metro", "")});
        if (doc.contains("modulation")) {
            const auto& mod = doc["modulation"];
            spec.modulation.weekend_factor = mod.value("weekend_factor", 1.0);
            if (mod.contains("phases"))
                for (const auto& ph : mod["phases"])
                    spec.modulation.phases.push_back(
                        {core::parse_date(ph.at("from").get<std::string>()),
                         ph.at("multiplier").get<double>()});
            if (mod.contains("overrides"))
                for (const auto& [date, factor] : mod["overrides"].items())
                    spec.modulation.overrides[core::parse_date(date)] = factor.get<double>();
        }
        for (const auto& p : doc.at("providers")) {
            ProviderSpec ps;
            ps.profile = ingest::profile_from_json(p.at("profile"), source);
            for (const auto& [base, pz] : p.at("zone_map").items())
                ps.zone_map[base] = pz.get<std::string>();
            ps.sim_market_share = p.value("sim_market_share", 1.0);
            ps.integer_counts = p.value("integer_counts", true);
            ps.roamer_share = p.value("roamer_share", 0.0);
            spec.providers.push_back(std::move(ps));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::invalid_spec, source + ": " + e.what());
    }
    std::sort(spec.modulation.phases.begin(), spec.modulation.phases.end(),
              [](const ModulationPhase& a, const ModulationPhase& b) { return a.from < b.from; });
    spec.validate();
    return spec;
}

ScenarioSpec ScenarioSpec::load(const std::filesystem::path& path) {
    auto in = core::open_input(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::invalid_spec, path.string() + ": " + e.what());
    }
    return from_json(doc, path.string());
}

nlohmann::json ScenarioSpec::to_json() const {
    nlohmann::json doc;
    doc["seed"] = seed;
    doc["start_date"] = core::format_date(start_date);
    doc["num_days"] = num_days;
    doc["gravity"] = {{"scale", gravity_scale},
                      {"distance_decay", distance_decay},
                      {"self_rate", self_rate}};
    doc["noise_sigma"] = noise_sigma;
    doc["zones"] = nlohmann::json::array();
    for (const SynthZone& z : zones) {
        nlohmann::json zj = {{"code", z.code}, {"x", z.x}, {"y", z.y},
                             {"population", z.population}};
        if (!z.metro.empty()) zj["metro"] = z.metro;
        doc["zones"].push_back(zj);
    }
    doc["modulation"]["weekend_factor"] = modulation.weekend_factor;
    doc["modulation"]["phases"] = nlohmann::json::array();
    for (const ModulationPhase& ph : modulation.phases)
        doc["modulation"]["phases"].push_back(
            {{"from", core::format_date(ph.from)}, {"multiplier", ph.multiplier}});
    doc["modulation"]["overrides"] = nlohmann::json::object();
    for (const auto& [date, factor] : modulation.overrides)
        doc["modulation"]["overrides"][core::format_date(date)] = factor;
    doc["providers"] = nlohmann::json::array();
    for (const ProviderSpec& p : providers) {
        nlohmann::json pj;
        pj["profile"] = ingest::profile_to_json(p.profile);
        pj["zone_map"] = p.zone_map;
        pj["sim_market_share"] = p.sim_market_share;
        pj["integer_counts"] = p.integer_counts;
        pj["roamer_share"] = p.roamer_share;
        doc["providers"].push_back(pj);
    }
    return doc;
}

double truth_flow(const ScenarioSpec& spec, std::size_t origin, std::size_t destination,
                  core::Date day) {
    const double m = spec.modulation.at(day);
    if (origin == destination)
        return spec.self_rate * static_cast<double>(spec.zones[origin].population) * m;
    const double dx = spec.zones[origin].x - spec.zones[destination].x;
    const double dy = spec.zones[origin].y - spec.zones[destination].y;
    const double dist = std::sqrt(dx * dx + dy * dy);
    return spec.gravity_scale * static_cast<double>(spec.zones[origin].population) *
           static_cast<double>(spec.zones[destination].population) /
           std::pow(dist, spec.distance_decay) * m;
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ull;
    x ^= x >> 33;
    return x;
}

std::uint64_t splitmix_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t bits) {
    // (0, 1]: never zero, safe under log()
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Mean-one multiplicative log-normal noise, keyed so the value does not
/// depend on generation order (portable Box-Muller, no std distributions).
double lognormal_noise(double sigma, std::uint64_t key) {
    if (sigma == 0) return 1.0;
    std::uint64_t state = key;
    const double u1 = uniform01(splitmix_next(state));
    const double u2 = uniform01(splitmix_next(state));
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return std::exp(sigma * z - 0.5 * sigma * sigma);
}

double round_half_even(double v) {
    // default FP environment rounds to nearest, ties to even
    return std::nearbyint(v);
}

// Diurnal weights across the day's windows, summing to ~1.
std::vector<double> diurnal_weights(int windows) {
    std::vector<double> w(windows);
    double sum = 0;
    for (int t = 0; t < windows; ++t) {
        const double s = std::sin(M_PI * (t + 0.5) / windows);
        w[t] = 0.2 + s * s;
        sum += w[t];
    }
    for (double& x : w) x /= sum;
    return w;
}

struct DerivedZoning {
    std::vector<std::string> codes;                       // provider zones, sorted
    std::map<std::string, std::uint32_t> index;           // code -> position
    std::vector<std::vector<std::uint32_t>> base_members; // per provider zone
};

DerivedZoning derive_zoning(const ScenarioSpec& spec, const ProviderSpec& provider) {
    DerivedZoning z;
    for (std::size_t b = 0; b < spec.zones.size(); ++b) {
        const std::string& pz = provider.zone_map.at(spec.zones[b].code);
        auto [it, inserted] = z.index.try_emplace(pz, 0);
        (void)it;
        if (inserted) z.codes.push_back(pz);
    }
    std::sort(z.codes.begin(), z.codes.end());
    for (std::uint32_t i = 0; i < z.codes.size(); ++i) z.index[z.codes[i]] = i;
    z.base_members.resize(z.codes.size());
    for (std::uint32_t b = 0; b < spec.zones.size(); ++b)
        z.base_members[z.index.at(provider.zone_map.at(spec.zones[b].code))].push_back(b);
    return z;
}

} // namespace

ScenarioSpec default_scenario() {
    ScenarioSpec spec;
    spec.seed = 20200203;
    spec.start_date = core::parse_date("2020-02-03"); // a Monday
    spec.num_days = 84;                               // 12 ISO weeks
    spec.gravity_scale = 4e-6;
    spec.distance_decay = 2.0;
    spec.self_rate = 0.12;
    spec.noise_sigma = 0.1;
    spec.modulation.weekend_factor = 0.85;
    spec.modulation.phases = {{core::parse_date("2020-03-02"), 0.45},
                              {core::parse_date("2020-03-30"), 0.7}};

    // Two planted metros, nine zones each on a 3x3 grid, far apart.
    const std::int64_t pops[9] = {52000, 46000, 41000, 47000, 56000,
                                  43000, 40000, 49000, 45000};
    for (int metro = 0; metro < 2; ++metro) {
        const double x0 = metro == 0 ? 0.0 : 40.0;
        for (int cell = 0; cell < 9; ++cell) {
            SynthZone z;
            z.code = "XX" + std::to_string(metro + 1) + std::to_string(cell / 3 + 1) +
                     std::to_string(cell % 3 + 1);
            z.x = x0 + cell % 3;
            z.y = cell / 3;
            z.population = metro == 0 ? pops[cell] : (pops[cell] * 9) / 10;
            z.metro = "XX" + std::to_string(metro + 1);
            spec.zones.push_back(std::move(z));
        }
    }

    ProviderSpec fine;
    fine.profile.provider_id = "finegrid";
    fine.profile.zoning_id = "fine-grid-xx";
    fine.profile.window_minutes = 60;
    fine.profile.stop_time_minutes = 15;
    fine.profile.extrapolated = false;
    fine.profile.market_share = 0.35;
    fine.profile.threshold_k = 10;
    fine.profile.crs_id = "EPSG:4326";
    fine.profile.column_map = ingest::canonical_column_map(false);
    for (const SynthZone& z : spec.zones) fine.zone_map[z.code] = z.code;
    fine.sim_market_share = 0.35;
    fine.integer_counts = true;

    ProviderSpec coarse;
    coarse.profile.provider_id = "coarse";
    coarse.profile.zoning_id = "coarse-zones-xx";
    coarse.profile.window_minutes = 1440;
    coarse.profile.stop_time_minutes = 60;
    coarse.profile.extrapolated = true;
    coarse.profile.threshold_k = 30;
    coarse.profile.crs_id = "EPSG:3035";
    coarse.profile.column_map = {{"origin", "from_zone"},
                                 {"destination", "to_zone"},
                                 {"window_start", "period_begin"},
                                 {"count", "devices"}};
    for (const SynthZone& z : spec.zones) coarse.zone_map[z.code] = "C" + z.code.substr(0, 4);
    coarse.sim_market_share = 0.28;
    coarse.integer_counts = true;

    ProviderSpec mid;
    mid.profile.provider_id = "midzone";
    mid.profile.zoning_id = "mid-zones-xx";
    mid.profile.window_minutes = 480;
    mid.profile.stop_time_minutes = ingest::kStopTimeWindowMajority;
    mid.profile.extrapolated = false;
    mid.profile.market_share = 0.55;
    mid.profile.threshold_k = 20;
    mid.profile.crs_id = "EPSG:4326";
    mid.profile.column_map = {{"origin", "o"},
                              {"destination", "d"},
                              {"window_start", "ts"},
                              {"count", "n"},
                              {"roamer", "visitor_class"}};
    for (std::size_t b = 0; b < spec.zones.size(); ++b) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "M%02zu", b / 2 + 1);
        mid.zone_map[spec.zones[b].code] = buf;
    }
    mid.sim_market_share = 0.55;
    mid.integer_counts = true;
    mid.roamer_share = 0.1;

    spec.providers = {std::move(fine), std::move(coarse), std::move(mid)};
    spec.validate();
    return spec;
}

ScenarioFiles generate_scenario(const ScenarioSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    ScenarioFiles files;
    files.root = out_dir;

    // Reference zoning derived from the base codes by prefix truncation.
    struct Node {
        int level;
        std::string parent;
        std::int64_t population = 0;
    };
    std::map<std::string, Node> nuts;
    for (const SynthZone& z : spec.zones) {
        for (int level = 0; level <= 3; ++level) {
            const std::string code = z.code.substr(0, 2 + level);
            auto& node = nuts[code];
            node.level = level;
            node.parent = level == 0 ? "" : code.substr(0, 1 + level);
            node.population += z.population;
        }
    }
    files.zones_csv = out_dir / "reference" / "zones.csv";
    {
        auto out = core::open_output(files.zones_csv);
        core::write_csv_row(out, {"nuts_code", "level", "parent", "population"});
        for (const auto& [code, node] : nuts)
            core::write_csv_row(out, {code, std::to_string(node.level), node.parent,
                                      std::to_string(node.population)});
    }

    // Crosswalks: provider zone -> member NUTS3 zones, population-weighted.
    files.crosswalks_csv = out_dir / "reference" / "crosswalks.csv";
    std::vector<DerivedZoning> zonings;
    zonings.reserve(spec.providers.size());
    {
        auto out = core::open_output(files.crosswalks_csv);
        core::write_csv_row(out, {"zoning_id", "zone_code", "nuts3_code", "weight"});
        for (const ProviderSpec& provider : spec.providers) {
            DerivedZoning zoning = derive_zoning(spec, provider);
            for (std::uint32_t pz = 0; pz < zoning.codes.size(); ++pz) {
                std::int64_t pop = 0;
                for (std::uint32_t b : zoning.base_members[pz]) pop += spec.zones[b].population;
                const std::size_t last = zoning.base_members[pz].size() - 1;
                double emitted = 0;
                for (std::size_t k = 0; k <= last; ++k) {
                    const std::uint32_t b = zoning.base_members[pz][k];
                    // exact unit sum: the last member takes the remainder
                    double w = k == last
                                   ? 1.0 - emitted
                                   : static_cast<double>(spec.zones[b].population) /
                                         static_cast<double>(pop);
                    emitted += w;
                    core::write_csv_row(out, {provider.profile.zoning_id, zoning.codes[pz],
                                              spec.zones[b].code, core::format_double(w)});
                }
            }
            zonings.push_back(std::move(zoning));
        }
    }

    // Geometry: unit squares for base zones, member unions for provider zones.
    files.geometry_csv = out_dir / "reference" / "geometry.csv";
    {
        auto square = [&](const SynthZone& z) {
            const double lon = 10.0 + 0.05 * z.x;
            const double lat = 47.0 + 0.05 * z.y;
            const double h = 0.02;
            char buf[256];
            std::snprintf(buf, sizeof buf, "((%g %g, %g %g, %g %g, %g %g, %g %g))", lon - h,
                          lat - h, lon + h, lat - h, lon + h, lat + h, lon - h, lat + h, lon - h,
                          lat - h);
            return std::string(buf);
        };
        auto out = core::open_output(files.geometry_csv);
        core::write_csv_row(out, {"zone_code", "wkt"});
        std::set<std::string> written;
        for (const SynthZone& z : spec.zones) {
            core::write_csv_row(out, {z.code, "POLYGON " + square(z)});
            written.insert(z.code);
        }
        for (std::size_t p = 0; p < spec.providers.size(); ++p) {
            const DerivedZoning& zoning = zonings[p];
            for (std::uint32_t pz = 0; pz < zoning.codes.size(); ++pz) {
                if (written.count(zoning.codes[pz])) continue;
                std::string wkt = "MULTIPOLYGON (";
                for (std::size_t k = 0; k < zoning.base_members[pz].size(); ++k) {
                    if (k) wkt += ", ";
                    wkt += square(spec.zones[zoning.base_members[pz][k]]);
                }
                wkt += ")";
                core::write_csv_row(out, {zoning.codes[pz], wkt});
                written.insert(zoning.codes[pz]);
            }
        }
    }

    // Ground truth: expected daily flows and the planted metro labels.
    files.truth_flows_csv = out_dir / "truth" / "daily_flows.csv";
    {
        auto out = core::open_output(files.truth_flows_csv);
        core::write_csv_row(out, {"day", "origin", "destination", "count"});
        for (int d = 0; d < spec.num_days; ++d) {
            const core::Date day = spec.start_date + d;
            for (std::size_t i = 0; i < spec.zones.size(); ++i)
                for (std::size_t j = 0; j < spec.zones.size(); ++j) {
                    const double flow = truth_flow(spec, i, j, day);
                    if (flow <= 0) continue;
                    core::write_csv_row(out, {core::format_date(day), spec.zones[i].code,
                                              spec.zones[j].code, core::format_double(flow)});
                }
        }
    }
    files.truth_metros_csv = out_dir / "truth" / "metros.csv";
    {
        auto out = core::open_output(files.truth_metros_csv);
        core::write_csv_row(out, {"zone", "metro"});
        for (const SynthZone& z : spec.zones)
            core::write_csv_row(out, {z.code, z.metro});
    }

    // Provider profiles and feeds.
    for (std::size_t p = 0; p < spec.providers.size(); ++p) {
        const ProviderSpec& provider = spec.providers[p];
        const ingest::ProviderProfile& profile = provider.profile;
        const DerivedZoning& zoning = zonings[p];

        const auto profile_path = out_dir / "profiles" / (profile.provider_id + ".json");
        {
            auto out = core::open_output(profile_path);
            out << ingest::profile_to_json(profile).dump(2) << "\n";
        }
        files.profiles.push_back(profile_path);

        const int windows = core::kMinutesPerDay / profile.window_minutes;
        const std::vector<double> weights = diurnal_weights(windows);
        const std::uint64_t provider_key =
            mix64(spec.seed ^ core::fnv1a64(profile.provider_id));
        const bool with_roamer = provider.roamer_share > 0;

        const auto feed_path = out_dir / "feeds" / (profile.provider_id + ".csv");
        auto out = core::open_output(feed_path);
        {
            std::vector<std::string> header = {profile.column_map.at("origin"),
                                               profile.column_map.at("destination"),
                                               profile.column_map.at("window_start"),
                                               profile.column_map.at("count")};
            if (with_roamer) header.push_back(profile.column_map.at("roamer"));
            core::write_csv_row(out, header);
        }

        const std::size_t nz = zoning.codes.size();
        std::vector<double> daily(nz * nz);
        std::vector<std::string> row(with_roamer ? 5 : 4);
        for (int d = 0; d < spec.num_days; ++d) {
            const core::Date day = spec.start_date + d;
            std::fill(daily.begin(), daily.end(), 0.0);
            for (std::uint32_t po = 0; po < nz; ++po)
                for (std::uint32_t b_o : zoning.base_members[po])
                    for (std::uint32_t pd = 0; pd < nz; ++pd)
                        for (std::uint32_t b_d : zoning.base_members[pd])
                            daily[po * nz + pd] += truth_flow(spec, b_o, b_d, day);

            for (int t = 0; t < windows; ++t) {
                const core::Minute start =
                    core::date_to_minute(day) + static_cast<core::Minute>(t) * profile.window_minutes;
                const std::string start_text = core::format_minute(start);
                for (std::uint32_t po = 0; po < nz; ++po)
                    for (std::uint32_t pd = 0; pd < nz; ++pd) {
                        const double base = daily[po * nz + pd] * weights[t];
                        if (base <= 0) continue;
                        const std::uint64_t key =
                            mix64(provider_key ^
                                  (static_cast<std::uint64_t>(d) << 40 ^
                                   static_cast<std::uint64_t>(po) << 24 ^
                                   static_cast<std::uint64_t>(pd) << 8 ^
                                   static_cast<std::uint64_t>(t)));
                        double v = base * provider.sim_market_share *
                                   lognormal_noise(spec.noise_sigma, key);
                        double roamer_v = 0;
                        if (with_roamer) {
                            roamer_v = v * provider.roamer_share *
                                       lognormal_noise(spec.noise_sigma, mix64(key ^ 0x726f616du));
                            v -= roamer_v;
                        }
                        if (provider.integer_counts) {
                            v = round_half_even(v);
                            roamer_v = round_half_even(roamer_v);
                        }
                        if (profile.extrapolated) {
                            v /= provider.sim_market_share;
                            roamer_v /= provider.sim_market_share;
                        }
                        if (v >= profile.threshold_k) {
                            row[0] = zoning.codes[po];
                            row[1] = zoning.codes[pd];
                            row[2] = start_text;
                            row[3] = core::format_double(v);
                            if (with_roamer) row[4].clear();
                            core::write_csv_row(out, row);
                            ++files.rows_emitted;
                        }
                        if (with_roamer && roamer_v >= profile.threshold_k) {
                            row[0] = zoning.codes[po];
                            row[1] = zoning.codes[pd];
                            row[2] = start_text;
                            row[3] = core::format_double(roamer_v);
                            row[4] = "inbound";
                            core::write_csv_row(out, row);
                            ++files.rows_emitted;
                        }
                    }
            }
        }
        files.feeds.push_back(feed_path);
    }

    files.scenario_json = out_dir / "scenario.json";
    {
        auto out = core::open_output(files.scenario_json);
        out << spec.to_json().dump(2) << "\n";
    }

    // Ready-to-run pipeline configuration.
    files.run_config_json = out_dir / "run_config.json";
    {
        nlohmann::json config;
        for (const auto& p : files.profiles) config["profiles"].push_back(p.string());
        for (const auto& f : files.feeds) config["odms"].push_back(f.string());
        config["crosswalks"] = {files.crosswalks_csv.string()};
        config["zones"] = files.zones_csv.string();
        config["geometry"] = files.geometry_csv.string();
        config["level"] = 3;
        config["k_out"] = 20;
        config["alpha"] = 0.5;
        config["output_dir"] = (out_dir / "run").string();
        auto out = core::open_output(files.run_config_json);
        out << config.dump(2) << "\n";
    }
    return files;
}

} // namespace odmforge::synth
