#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "vbw/dem.hpp"
#include "vbw/graph.hpp"
#include "vbw/rng.hpp"

using namespace vbw;

namespace {

DemState random_state(int d, Rng& rng) {
    DemState s{d, Vec(d + 1), Vec(d + 1)};
    double total = 0.0;
    for (int i = 0; i <= d; ++i) {
        s.r[i] = rng.uniform01();
        s.z[i] = rng.uniform01();
        total += s.r[i] + s.z[i];
    }
    for (int i = 0; i <= d; ++i) {
        s.r[i] /= total;
        s.z[i] /= total;
    }
    return s;
}

double sum(const DemState& s) {
    return std::accumulate(s.r.begin(), s.r.end(), 0.0) + std::accumulate(s.z.begin(), s.z.end(), 0.0);
}

// Frozen output of an independent DOP853 integration of the drift system
// (rtol 1e-12), default eps: d -> (alpha, nR at handoff).
struct Frozen {
    int d;
    double alpha, handoff_nr;
};
constexpr Frozen kFrozenDefault[] = {
    {3, 0.613574, 0.480729}, {4, 0.980382, 0.255644}, {5, 0.930565, 0.196234}, {6, 0.945638, 0.177420},
    {7, 0.804240, 0.428699}, {8, 0.945460, 0.178053}, {9, 0.885533, 0.373837}, {10, 0.857467, 0.485363},
};
// Same, with eps = d / 1e5.
constexpr Frozen kFrozenSeeded[] = {
    {3, 0.638744, 0.388294}, {4, 0.821033, 0.325419}, {5, 0.845937, 0.238963}, {6, 0.924778, 0.208929},
    {7, 0.791530, 0.479626}, {8, 0.937470, 0.200768}, {9, 0.896864, 0.343824}, {10, 0.981950, 0.078743},
};

}  // namespace

TEST_CASE("initial state") {
    const auto s = init_state(4, 1e-5);
    CHECK(s.r[0] == doctest::Approx(1e-5 / 3).epsilon(1e-12));
    CHECK(s.r[3] == doctest::Approx(1e-5).epsilon(1e-12));
    CHECK(s.z[4] == doctest::Approx(1 - 4e-5 / 3).epsilon(1e-12));
    CHECK(s.mass() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.pR() == doctest::Approx(3e-5));
    CHECK(default_eps(9) == 1e-4);
    CHECK(default_eps(4) == 1e-5);
    CHECK_THROWS_AS(init_state(2, 1e-5), ValidationError);
    CHECK_THROWS_AS(init_state(65, 1e-5), ValidationError);
    CHECK_THROWS_AS(init_state(4, 0.0), ValidationError);
    CHECK_THROWS_AS(init_state(4, 0.75), ValidationError);
}

TEST_CASE("rollover and second-phase start") {
    DemState s{3, {0.1, 0.1, 0.1, 0.0}, {0.05, 0.1, -5e-13, 0.55}};
    const auto r = rollover(s);
    CHECK(r.r[0] == doctest::Approx(0.15));
    CHECK(r.r[1] == doctest::Approx(0.2));
    CHECK(r.r[2] == doctest::Approx(0.1));
    CHECK(r.z[0] == 0.0);
    CHECK(r.z[2] == 0.0);
    CHECK(r.z[3] == 0.55);
    const auto p = phase2_init(r);
    CHECK(p.r[3] == 0.55);
    CHECK(p.z[3] == 0.0);
    CHECK(p.mass() == doctest::Approx(r.mass()));
}

TEST_CASE("untouched vertices drain at rate d z_d / nW") {
    // Only Z_d is populated besides some red points, so z_d' = -d z_d / nW.
    DemState s{4, {0, 0, 0, 0.2, 0}, {0, 0, 0, 0, 0.8}};
    const auto f = rhs_phase1(s);
    CHECK(f.z[4] == doctest::Approx(-4 * 0.8 / (0.6 + 3.2)));
    CHECK(f.z[3] == doctest::Approx(4 * 0.8 / (0.6 + 3.2)));
    // All points on untouched vertices of weight one: z_d' = -1.
    DemState t{3, {0, 1e-3, 0, 0}, {0, 0, 0, 1.0 / 3}};
    CHECK(rhs_phase1(t).z[3] == doctest::Approx(-1.0 / (1.0 + 1e-3)).epsilon(1e-12));
}

TEST_CASE("first-phase drift equals the expected-change table") {
    Rng rng(31);
    for (int d = 3; d <= 10; ++d) {
        for (int k = 0; k < 20; ++k) {
            auto s = random_state(d, rng);
            s.r[d] = 0.0;
            const auto f = rhs_phase1(s);
            for (int i = 0; i < d; ++i) CHECK(f.r[i] == doctest::Approx(oracle::delta_r(i, s.r, s.pR(), s.nW())));
            for (int i = 0; i <= d; ++i) CHECK(f.z[i] == doctest::Approx(oracle::delta_z(i, s.z, s.nW())));
        }
    }
}

TEST_CASE("drift systems conserve mass, the displayed ones do not") {
    Rng rng(7);
    double displayed_max = 0.0;
    for (int d = 3; d <= 10; ++d) {
        for (int k = 0; k < 200; ++k) {
            auto s = random_state(d, rng);
            CHECK(std::abs(sum(rhs_phase1(s))) <= 1e-12);
            CHECK(std::abs(sum(rhs_phase2(s, light_top(d)))) <= 1e-12);
            CHECK(std::abs(sum(rhs_phase2(s, d - 1))) <= 1e-12);
            const DemSystem shown{DemModel::Displayed, true};
            displayed_max = std::max(displayed_max, std::abs(sum(rhs_phase1(s, shown))));
        }
    }
    CHECK(displayed_max > 1e-3);
}

TEST_CASE("guards return zero derivatives") {
    DemState dry{4, {0.5, 0, 0, 0, 0}, {0, 0, 0, 0, 0.5}};
    for (double x : rhs_phase1(dry).r) CHECK(x == 0.0);
    DemState heavy{4, {0.5, 0, 0, 0.2, 0.3}, {0, 0, 0, 0, 0}};
    for (double x : rhs_phase2(heavy, 2).r) CHECK(x == 0.0);
}

TEST_CASE("pack and unpack") {
    DemState s{3, {1, 2, 3, 4}, {5, 6, 7, 8}};
    const auto y = pack(s);
    CHECK(y.size() == 8);
    CHECK(y[4] == 5);
    const auto back = unpack(3, y);
    CHECK(back.r == s.r);
    CHECK(back.z == s.z);
    CHECK(s.nR() == 6);
    CHECK(s.pL(2) == 1 * 2 + 2 * 3);
    CHECK(light_top(3) == 2);
    CHECK(light_top(4) == 2);
    CHECK(light_top(9) == 5);
}

TEST_CASE("run_dem matches the frozen independent integration") {
    for (const auto& f : kFrozenDefault) {
        const auto r = run_dem(f.d);
        CAPTURE(f.d);
        CHECK(std::abs(r.alpha - f.alpha) < 1e-4);
        CHECK(std::abs(r.handoff.nR() - f.handoff_nr) < 1e-4);
        CHECK(r.mass_drift < 1e-8);
        CHECK_FALSE(r.stuck);
        CHECK(r.events.back() == "balance");
    }
    for (const auto& f : kFrozenSeeded) {
        DemOptions o;
        o.eps = f.d / 1e5;
        const auto r = run_dem(f.d, o);
        CAPTURE(f.d);
        CHECK(std::abs(r.alpha - f.alpha) < 1e-4);
        CHECK(std::abs(r.handoff.nR() - f.handoff_nr) < 1e-4);
    }
}

TEST_CASE("fixed-step RK4 agrees with the adaptive run") {
    for (int d : {4, 7}) {
        DemOptions o;
        o.integrator = Integrator::FixedRk4;
        o.steps = 100000;
        const auto fixed = run_dem(d, o);
        const auto adaptive = run_dem(d);
        CAPTURE(d);
        CHECK(std::abs(fixed.alpha - adaptive.alpha) < 1e-3);
    }
}

TEST_CASE("pre-rollover handoff and the displayed model run") {
    DemOptions pre;
    pre.handoff = DemHandoff::PreRollover;
    const auto r = run_dem(5, pre);
    CHECK(r.handoff.pR() < 1e-6);
    CHECK(r.alpha >= 0.0);
    DemOptions shown;
    shown.system.model = DemModel::Displayed;
    const auto s = run_dem(5, shown);
    CHECK(s.mass_drift > 1e-3);
}

TEST_CASE("option validation") {
    DemOptions o;
    CHECK_THROWS_AS(validate(2, o), ValidationError);
    o.eps = -1;
    CHECK_THROWS_AS(validate(4, o), ValidationError);
    o.eps = 0;
    o.stop_fraction = 0.7;
    CHECK_THROWS_AS(validate(4, o), ValidationError);
    o.stop_fraction = 0.5;
    o.steps = 0;
    CHECK_THROWS_AS(run_dem(4, o), ValidationError);
    o.steps = 10;
    o.record_every = 0;
    CHECK_THROWS_AS(validate(4, o), ValidationError);
}

TEST_CASE("trajectory csv") {
    DemOptions o;
    o.record = true;
    o.record_every = 50;
    const auto r = run_dem(3, o);
    REQUIRE_FALSE(r.trajectory.empty());
    CHECK(r.trajectory.front().phase == 1);
    CHECK(r.trajectory.back().phase == r.rounds + 1);
    std::ostringstream out;
    write_trajectory_csv(out, 3, r.trajectory);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "phase,t,var_name,value");
    std::getline(in, line);
    CHECK(line.rfind("1,0,r0,", 0) == 0);
    const std::string text = out.str();
    const auto lines = std::count(text.begin(), text.end(), '\n');
    CHECK(lines == 1 + static_cast<long>(r.trajectory.size()) * 8);
}
