#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "vbw/experiment.hpp"

using namespace vbw;
namespace fs = std::filesystem;

namespace {

Config small(int d, std::int64_t n) {
    Config c;
    c.d = {d};
    c.n = {n};
    c.runs = 2;
    c.graphs = 2;
    c.threads = 2;
    return c;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("vbw_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("reference values") {
    CHECK(reference::row(4)->dem == 0.58103);
    CHECK(reference::row(10)->lb == 0.71371);
    CHECK(reference::row(7)->exper == 0.67865);
    CHECK_FALSE(reference::row(11).has_value());
    CHECK(*reference::dem_alpha(3) == doctest::Approx(2 * reference::kD3DemWidth));
    CHECK(*reference::dem_alpha(8) == 0.72031);
    CHECK(*reference::alg1_mean_1e5(4) == 0.4612);
    CHECK_FALSE(reference::alg1_mean_1e5(2).has_value());
    CHECK(reference::kD4Offsets[0].offset1 > reference::kD4Offsets[0].offset2);
}

TEST_CASE("record csv round trip") {
    RunRecord r{"alg1", 5, 1000, 42, 1, 3, 2, 0.0, 0.123456789012345678, 61, 1.5, "exhausted"};
    CHECK(parse_record(to_csv(r)) == r);
    std::stringstream ss;
    write_records(ss, {r, r});
    std::string header;
    std::getline(ss, header);
    CHECK(header == record_csv_header());
    ss.seekg(0);
    const auto back = read_records(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[1] == r);
    CHECK_THROWS_AS(parse_record("alg1,5,1000"), ValidationError);
    CHECK_THROWS_AS(parse_record("alg1,x,1000,1,0,0,2,0,0.5,1,1,"), ValidationError);
}

TEST_CASE("append writes one header") {
    const auto dir = scratch("append");
    const RunRecord r{"dem", 4, 0, 1, 0, 0, 0, 1e-5, 0.9, 0, 3.0, ""};
    append_records(dir / "r.csv", {r});
    append_records(dir / "r.csv", {r});
    std::ifstream in(dir / "r.csv");
    CHECK(read_records(in).size() == 2);
    std::ifstream again(dir / "r.csv");
    std::string text((std::istreambuf_iterator<char>(again)), {});
    CHECK(text.find("method") == text.rfind("method"));
}

TEST_CASE("config json") {
    Config c;
    c.d = {3, 5};
    c.eps = 2e-5;
    c.fallback = "per-step";
    nlohmann::json j = c;
    Config back;
    from_json(j, back);
    CHECK(back.d == c.d);
    CHECK(back.eps == c.eps);
    CHECK(back.fallback == "per-step");

    Config scalar;
    from_json(nlohmann::json{{"d", 7}, {"n", 500}}, scalar);
    CHECK(scalar.d == std::vector<int>{7});
    CHECK(scalar.n == std::vector<std::int64_t>{500});

    Config bad;
    CHECK_THROWS_AS(from_json(nlohmann::json{{"degree", 4}}, bad), ValidationError);
    CHECK_THROWS_AS(from_json(nlohmann::json{{"runs", "many"}}, bad), ValidationError);
    CHECK_THROWS_AS(from_json(nlohmann::json::array(), bad), ValidationError);
}

TEST_CASE("config validation") {
    auto expect_bad = [](auto edit) {
        Config c;
        edit(c);
        CHECK_THROWS_AS(validate(c), ValidationError);
    };
    expect_bad([](Config& c) { c.d = {2}; });
    expect_bad([](Config& c) { c.n = {1}; });
    expect_bad([](Config& c) { c.runs = -1; });
    expect_bad([](Config& c) { c.r0_offset = 0; });
    expect_bad([](Config& c) { c.stop_fraction = 0.9; });
    expect_bad([](Config& c) { c.integrator = "euler"; });
    expect_bad([](Config& c) { c.handoff = "late"; });
    expect_bad([](Config& c) { c.steps = 0; });
    CHECK_NOTHROW(validate(Config{}));
    Config rk;
    rk.integrator = "rk4";
    rk.model = "displayed";
    rk.handoff = "pre-rollover";
    const auto o = dem_options(rk, 9);
    CHECK(o.integrator == Integrator::FixedRk4);
    CHECK(o.system.model == DemModel::Displayed);
    CHECK(o.handoff == DemHandoff::PreRollover);
}

TEST_CASE("derived seeds are distinct") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 50; ++a)
        for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(1, a, b));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("alg1 command") {
    auto c = small(4, 2000);
    const auto rep = cmd_alg1(c);
    REQUIRE(rep.records.size() == 4);
    REQUIRE(rep.graphs.size() == 2);
    for (const auto& g : rep.graphs) {
        CHECK(g.min <= g.avg);
        CHECK(g.avg <= g.max);
    }
    for (const auto& r : rep.records) {
        CHECK(r.method == "alg1");
        CHECK(r.alpha == doctest::Approx(r.width / 1000.0));
        CHECK(replay(r, c) == r.alpha);
    }
    // Thread count does not change the results.
    c.threads = 1;
    const auto serial = cmd_alg1(c);
    for (std::size_t k = 0; k < rep.records.size(); ++k) CHECK(serial.records[k].alpha == rep.records[k].alpha);

    c.runs = 0;
    CHECK(cmd_alg1(c).records.empty());
    c.d.clear();
    CHECK(cmd_alg1(c).records.empty());
}

TEST_CASE("balls command") {
    Config c = small(5, 3000);
    c.n = {3000, 5000};
    const auto rows = cmd_balls(c);
    CHECK(rows.size() == 2);
    for (const auto& b : rows) {
        CHECK(b.b0 <= b.b1);
        CHECK(2 * b.b1 <= b.n);
        CHECK(2 * b.b2 > b.n);
    }
    std::ostringstream out;
    write_balls_csv(out, rows);
    CHECK(out.str().rfind("d,n,seed,x0,r_c,B0,B1,B2\n", 0) == 0);
}

TEST_CASE("dem and simulate commands") {
    Config c;
    c.d = {4};
    const auto rows = cmd_dem(c);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ref == reference::dem_alpha(4));
    const auto recs = records_of(rows);
    CHECK(recs[0].method == "dem");
    CHECK(replay(recs[0], c) == recs[0].alpha);

    Config s = small(4, 4000);
    s.runs = 2;
    const auto sims = cmd_simulate(s);
    REQUIRE(sims.size() == 1);
    REQUIRE(sims[0].runs.size() == 2);
    const auto& first = sims[0].runs[0].record;
    CHECK(first.method == "sim");
    CHECK(replay(first, s) == first.alpha);
}

TEST_CASE("report") {
    std::vector<RunRecord> recs;
    recs.push_back({"dem", 4, 0, 1, 0, 0, 0, 1e-5, 0.9, 0, 1, ""});
    for (int g = 0; g < 2; ++g)
        for (int r = 0; r < 2; ++r) recs.push_back({"alg1", 4, 100, 1, g, r, 2, 0, 0.1 + 0.1 * g + 0.01 * r, 0, 1, ""});
    recs.push_back({"alg1", 5, 100, 1, 0, 0, 2, 0, 0.5, 0, 1, ""});
    const auto rows = cmd_report(recs);
    REQUIRE(rows.size() == 2);
    CHECK(*rows[0].dem == 0.9);
    CHECK(*rows[0].exper == doctest::Approx(0.2));
    CHECK(rows[0].exper_below_lb);
    CHECK_FALSE(rows[1].exper_below_lb);
    CHECK(rows[1].missing == std::vector<std::string>{"dem"});
    std::ostringstream out;
    print_report(out, rows);
    CHECK(out.str().find("missing:dem") != std::string::npos);
    CHECK(cmd_report({}).empty());
}

TEST_CASE("manifests are numbered") {
    const auto dir = scratch("manifest");
    Config c;
    const auto a = write_manifest(dir, "alg1", c);
    const auto b = write_manifest(dir, "alg1", c, nlohmann::json{{"x", 1}});
    CHECK(a.filename() == "manifest-alg1-0.json");
    CHECK(b.filename() == "manifest-alg1-1.json");
    std::ifstream in(b);
    const auto j = nlohmann::json::parse(in);
    CHECK(j["command"] == "alg1");
    CHECK(j["version"] == kVersion);
    CHECK(j["results"]["x"] == 1);
}
