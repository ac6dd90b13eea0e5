#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "vbw/greedy.hpp"
#include "vbw/rng.hpp"

using namespace vbw;

TEST_CASE("config validation") {
    GreedyConfig c;
    c.r0_offset = 3;
    CHECK_THROWS_AS(validate(c), ValidationError);
    c.r0_offset = 1;
    c.stop_fraction = 0.0;
    CHECK_THROWS_AS(validate(c), ValidationError);
    c.stop_fraction = 0.6;
    CHECK_THROWS_AS(validate(c), ValidationError);
    c.stop_fraction = 0.5;
    c.snapshot_every = -1;
    CHECK_THROWS_AS(validate(c), ValidationError);
    c.snapshot_every = 0;
    CHECK_NOTHROW(validate(c));
    c.x0 = 100;
    CHECK_THROWS_AS(run_alg1(complete_graph(4), c), ValidationError);
}

TEST_CASE("red side has exactly the target size") {
    const auto g = gen_regular(2001 * 2, 3, 8);
    for (std::uint64_t s = 0; s < 3; ++s) {
        GreedyConfig c;
        c.seed = s;
        const auto r = run_alg1(g, c);
        CHECK(static_cast<Vertex>(r.bisection.red.size()) == g.n() / 2);
        auto red = r.bisection.red;
        std::sort(red.begin(), red.end());
        CHECK(std::adjacent_find(red.begin(), red.end()) == red.end());
        CHECK(r.bisection.alpha == doctest::Approx(alpha_of(r.bisection.boundary_red, g.n())));
    }
}

TEST_CASE("ball radii and sizes in the trace") {
    const auto g = gen_regular(20000, 4, 2);
    GreedyConfig c;
    c.seed = 4;
    const auto t = run_alg1(g, c).trace;
    CHECK(t.b0 <= t.b1);
    CHECK(2 * t.b1 <= g.n());
    CHECK(2 * t.b2 > g.n());
    CHECK(t.r0 == t.r_c - 2);
    const auto balls = ball_sizes(g, t.x0, t.r_c);
    CHECK(balls[t.r_c] == t.b2);
    CHECK(balls[t.r_c - 1] == t.b1);
    CHECK(balls[t.r_c - 2] == t.b0);
    CHECK(t.phase2_steps == t.target - t.b0);
    CHECK_FALSE(t.exhausted);
}

TEST_CASE("every second-phase step picks a minimum-exposure red vertex") {
    const auto g = gen_regular(300, 5, 6);
    GreedyConfig c;
    c.seed = 1;
    int steps = 0;
    run_alg1(g, c, [&](const GreedyStep& s) {
        ++steps;
        if (s.fallback) return;
        auto exposure = [&](Vertex v) {
            std::vector<Vertex> open;
            for (Vertex u : g.neighbors(v))
                if (!s.red[u]) open.push_back(u);
            std::sort(open.begin(), open.end());
            return static_cast<int>(std::unique(open.begin(), open.end()) - open.begin());
        };
        int best = 1 << 30;
        for (Vertex v = 0; v < g.n(); ++v)
            if (s.red[v] && exposure(v) > 0) best = std::min(best, exposure(v));
        CHECK(s.red[s.chosen]);
        CHECK(exposure(s.chosen) == best);
        CHECK(s.exposure == best);
        CHECK_FALSE(s.red[s.colored]);
        const auto nb = g.neighbors(s.chosen);
        CHECK(std::find(nb.begin(), nb.end(), s.colored) != nb.end());
    });
    CHECK(steps > 0);
}

TEST_CASE("offset 1 starts from a larger ball") {
    const auto g = gen_regular(20000, 4, 2);
    GreedyConfig a, b;
    a.seed = b.seed = 9;
    b.r0_offset = 1;
    const auto ta = run_alg1(g, a).trace;
    const auto tb = run_alg1(g, b).trace;
    CHECK(ta.x0 == tb.x0);
    CHECK(tb.r0 == ta.r0 + 1);
    CHECK(tb.phase2_steps == tb.target - tb.b1);
}

TEST_CASE("fixed seed reproduces the same bisection") {
    const auto g = gen_regular(5000, 6, 3);
    GreedyConfig c;
    c.seed = 77;
    CHECK(run_alg1(g, c).bisection.red == run_alg1(g, c).bisection.red);
}

TEST_CASE("disconnected input falls back to random uncoloured vertices") {
    const auto small = disjoint_union(complete_graph(4), disjoint_union(complete_graph(4), complete_graph(4)));
    GreedyConfig s;
    s.x0 = 0;
    const auto rs = run_alg1(small, s);
    CHECK(rs.bisection.red.size() == 6);
    CHECK(rs.trace.exhausted);
    CHECK(rs.trace.fallback_steps >= 1);
}

TEST_CASE("multigraph input") {
    GenOptions multi;
    multi.simple = false;
    const auto g = gen_regular(2000, 4, 12, multi);
    GreedyConfig c;
    const auto r = run_alg1(g, c);
    CHECK(r.bisection.red.size() == 1000);
}

TEST_CASE("greedy width is never below the optimum on small graphs") {
    Rng rng(2024);
    for (int k = 0; k < 40; ++k) {
        const int d = 3 + static_cast<int>(rng.uniform_below(2));
        int n = d + 1 + static_cast<int>(rng.uniform_below(12 - d));
        if (n * d % 2) ++n;
        const auto g = gen_regular(n, d, rng.next());
        GreedyConfig c;
        c.seed = rng.next();
        CHECK(run_alg1(g, c).bisection.boundary_red >= oracle::vbw(g));
    }
}

TEST_CASE("alpha_of") {
    CHECK(alpha_of(25, 100) == doctest::Approx(0.5));
    CHECK(alpha_of(0, 10) == 0.0);
    CHECK_THROWS_AS(alpha_of(1, 0), ValidationError);
    CHECK_THROWS_AS(alpha_of(-1, 10), ValidationError);
    CHECK_THROWS_AS(alpha_of(7, 10), ValidationError);
}
