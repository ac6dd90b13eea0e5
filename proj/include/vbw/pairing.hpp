#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "vbw/graph.hpp"
#include "vbw/rng.hpp"

namespace vbw {

enum class Kind : std::uint8_t { R = 0, Z = 1 };

// A class R_i or Z_i: red / non-red vertices with exactly i unpaired points.
struct PointClass {
    Kind kind;
    int index;
    friend bool operator==(PointClass, PointClass) = default;
};

// Bit set over the 2(d+1) classes; bit (kind*(d+1) + index).
using ClassMask = std::uint64_t;

inline constexpr int kMaxPairingDegree = 30;

// Partially exposed pairing-model multigraph. Every vertex is in exactly one
// class R_i / Z_i, where i is its number of unpaired points.
class PairingState {
public:
    PairingState() = default;
    PairingState(Vertex n, int d);  // all vertices in Z_d

    Vertex n() const { return n_; }
    int d() const { return d_; }

    int unpaired(Vertex v) const { return unpaired_[v]; }
    bool is_red(Vertex v) const { return red_[v] != 0; }

    std::int64_t class_size(PointClass c) const { return static_cast<std::int64_t>(members_[slot(c)].size()); }
    const std::vector<Vertex>& members(PointClass c) const { return members_[slot(c)]; }

    std::int64_t red_count() const { return red_count_; }
    std::int64_t red_points() const { return red_points_; }     // pR
    std::int64_t nonred_points() const { return nonred_points_; }  // pZ
    std::int64_t total_points() const { return red_points_ + nonred_points_; }  // pW
    std::int64_t points_in(ClassMask mask) const;

    const std::vector<std::pair<Vertex, Vertex>>& exposed_edges() const { return exposed_; }

    ClassMask mask(Kind kind, int lo, int hi) const;  // classes kind_i for lo <= i <= hi
    ClassMask all_classes() const { return mask(Kind::R, 0, d_) | mask(Kind::Z, 0, d_); }

    // Vertex owning a uniformly random unpaired point among the classes in
    // `mask`; requires points_in(mask) > 0.
    Vertex sample_point(ClassMask mask, Rng& rng) const;

    void color_red(Vertex v);   // Z_i -> R_i
    void remove_point(Vertex v);  // class i -> i-1
    void restore_point(Vertex v);  // class i -> i+1 (undo of remove_point)
    void record_edge(Vertex u, Vertex v) { exposed_.emplace_back(u, v); }

    // Throws std::logic_error naming the first broken invariant.
    void check_invariants() const;

private:
    int slot(PointClass c) const { return static_cast<int>(c.kind) * (d_ + 1) + c.index; }
    void move(Vertex v, int from_slot, int to_slot);

    Vertex n_ = 0;
    int d_ = 0;
    std::vector<int> unpaired_;
    std::vector<char> red_;
    std::vector<std::vector<Vertex>> members_;
    std::vector<std::int32_t> pos_;
    std::int64_t red_count_ = 0;
    std::int64_t red_points_ = 0;
    std::int64_t nonred_points_ = 0;
    std::vector<std::pair<Vertex, Vertex>> exposed_;
};

struct Snapshot {
    std::int64_t step;
    int phase;
    std::vector<double> r;  // |R_i| / n, i = 0..d
    std::vector<double> z;  // |Z_i| / n, i = 0..d
};

struct SimTrace {
    std::vector<std::int64_t> phase_end_steps;   // cumulative exposed edges at each phase end
    std::vector<std::int64_t> red_after_rollover;
    std::vector<Snapshot> snapshots;
    std::optional<double> alpha;
};

Snapshot take_snapshot(const PairingState& s, std::int64_t step, int phase);

// CSV with columns step,phase,class,kind,fraction.
void write_trace_csv(std::ostream& out, const SimTrace& trace);

struct Alg2Options {
    double stop_fraction = 0.5;
    bool promote_z0 = true;     // false: roll over Z_1..Z_{d-1} only
    std::optional<Vertex> x0;
    std::int64_t snapshot_every = 0;  // 0: snapshot at phase ends only
};

struct Alg2Result {
    // Post-rollover state at the start of the last phase whose closing
    // rollover would reach the target: R = B(x0, r_c - 1), outer layer unexposed.
    PairingState handoff;
    // State after the crossing rollover (|R| >= target).
    PairingState at_stop;
    SimTrace trace;
    int phases = 0;
    bool stalled = false;  // component closed before reaching the target
};

// The pairing state right after x0's d points are exposed: R_0 = {x0},
// neighbors in Z_{d-1} (lower with multi-edges), the rest in Z_d.
PairingState init_alg2(Vertex n, int d, Vertex x0, Rng& rng);

// One inner-loop step: first point on R \ R_0, second among all unpaired
// points. Returns the exposed pair. Requires red_points() > 0.
std::pair<Vertex, Vertex> alg2_step(PairingState& s, Rng& rng);

// Z_i -> R_i for i = lo..d-1 (lo = 0 or 1). Returns how many were promoted.
std::int64_t rollover(PairingState& s, bool promote_z0);

Alg2Result run_alg2(Vertex n, int d, std::uint64_t seed, const Alg2Options& opts = {});

enum class FallbackMode {
    Permanent,  // once L runs dry, draw first points from all red points for good
    PerStep     // draw from L whenever it has points, otherwise from all red points
};

struct Alg3Options {
    double stop_fraction = 0.5;
    FallbackMode fallback = FallbackMode::Permanent;
    std::int64_t snapshot_every = 0;
};

struct Alg3Result {
    double alpha = 0.0;               // boundary / (n/2) of the balanced final split
    double alpha_accounting = 0.0;    // (|R_1| + unpaired red vertices outside R_1) / (n/2) at stop
    std::int64_t boundary = 0;
    std::int64_t red_size = 0;        // |final red side|
    std::int64_t r1_at_stop = 0;
    std::int64_t steps = 0;
    bool fallback_used = false;
    bool stuck = false;               // ran out of red points before the target
    SimTrace trace;
};

// One Algorithm-3 step with first-point classes `first`. Returns the pair.
std::pair<Vertex, Vertex> alg3_step(PairingState& s, ClassMask first, Rng& rng);

// First-point classes of Algorithm 3: L = R_1 .. R_{ceil(d/2)}.
ClassMask alg3_first_classes(const PairingState& s);

Alg3Result run_alg3(PairingState state, std::uint64_t seed, const Alg3Options& opts = {});

}  // namespace vbw
