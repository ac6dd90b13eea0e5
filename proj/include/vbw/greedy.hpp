#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vbw/graph.hpp"

namespace vbw {

struct GreedyConfig {
    int r0_offset = 2;             // r_0 = r_c - r0_offset, in {1, 2}
    std::uint64_t seed = 0;
    double stop_fraction = 0.5;    // red target is floor(n * stop_fraction)
    std::optional<Vertex> x0;      // default: uniform random vertex
    int snapshot_every = 0;        // record red class counts every k phase-2 steps (0 = off)
};

// One phase-2 coloring step, for instrumentation.
struct GreedyStep {
    Vertex chosen;        // red vertex v of minimum positive exposure
    Vertex colored;       // its uncolored neighbor w, now red
    int exposure;         // |N(v) \ R| before coloring w
    bool fallback;        // true when no red vertex had an uncolored neighbor
    std::span<const char> red;  // membership before coloring w
};

struct GreedyTrace {
    Vertex x0 = 0;
    int r_c = 0;
    int r0 = 0;
    std::int64_t b0 = 0;  // |B(x0, r_c - 2)|
    std::int64_t b1 = 0;  // |B(x0, r_c - 1)|
    std::int64_t b2 = 0;  // |B(x0, r_c)|
    std::int64_t target = 0;
    std::int64_t phase2_steps = 0;
    std::int64_t fallback_steps = 0;  // colorings of a random uncolored vertex
    bool exhausted = false;
    // Each snapshot: |R_i| for i = 0..d after some phase-2 step count.
    std::vector<std::pair<std::int64_t, std::vector<std::int64_t>>> class_counts;
};

struct GreedyResult {
    Bisection bisection;
    GreedyTrace trace;
};

void validate(const GreedyConfig& cfg);

GreedyResult run_alg1(const RegularGraph& g, const GreedyConfig& cfg,
                      const std::function<void(const GreedyStep&)>& observer = {});

// Width as a fraction of n/2.
double alpha_of(std::int64_t width, std::int64_t n);

}  // namespace vbw
