#include "vbw/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace vbw {

PairingState::PairingState(Vertex n, int d)
    : n_(n), d_(d), unpaired_(static_cast<std::size_t>(n), d), red_(static_cast<std::size_t>(n), 0),
      members_(2 * (static_cast<std::size_t>(d) + 1)), pos_(static_cast<std::size_t>(n)) {
    if (n < 1) throw ValidationError("pairing: need at least one vertex");
    if (d < 1 || d > kMaxPairingDegree) throw ValidationError("pairing: degree out of range");
    if ((static_cast<std::int64_t>(n) * d) % 2 != 0) throw ValidationError("pairing: n*d must be even");
    auto& zd = members_[slot({Kind::Z, d})];
    zd.resize(static_cast<std::size_t>(n));
    for (Vertex v = 0; v < n; ++v) {
        zd[v] = v;
        pos_[v] = v;
    }
    nonred_points_ = static_cast<std::int64_t>(n) * d;
}

std::int64_t PairingState::points_in(ClassMask m) const {
    std::int64_t total = 0;
    for (int s = 0; s < static_cast<int>(members_.size()); ++s)
        if (m >> s & 1) total += static_cast<std::int64_t>(s % (d_ + 1)) * static_cast<std::int64_t>(members_[s].size());
    return total;
}

ClassMask PairingState::mask(Kind kind, int lo, int hi) const {
    ClassMask m = 0;
    for (int i = std::max(lo, 0); i <= std::min(hi, d_); ++i) m |= ClassMask{1} << slot({kind, i});
    return m;
}

Vertex PairingState::sample_point(ClassMask m, Rng& rng) const {
    const std::int64_t total = points_in(m);
    if (total <= 0) throw std::logic_error("pairing: no unpaired point in the requested classes");
    auto u = static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(total)));
    for (int s = 0; s < static_cast<int>(members_.size()); ++s) {
        if (!(m >> s & 1)) continue;
        const std::int64_t i = s % (d_ + 1);
        const std::int64_t w = i * static_cast<std::int64_t>(members_[s].size());
        if (u < w) return members_[s][static_cast<std::size_t>(u / i)];
        u -= w;
    }
    throw std::logic_error("pairing: sampling fell through");
}

void PairingState::move(Vertex v, int from, int to) {
    auto& src = members_[from];
    const Vertex last = src.back();
    src[pos_[v]] = last;
    pos_[last] = pos_[v];
    src.pop_back();
    auto& dst = members_[to];
    pos_[v] = static_cast<std::int32_t>(dst.size());
    dst.push_back(v);
}

void PairingState::color_red(Vertex v) {
    if (red_[v]) return;
    move(v, slot({Kind::Z, unpaired_[v]}), slot({Kind::R, unpaired_[v]}));
    red_[v] = 1;
    ++red_count_;
    red_points_ += unpaired_[v];
    nonred_points_ -= unpaired_[v];
}

void PairingState::remove_point(Vertex v) {
    if (unpaired_[v] <= 0) throw std::logic_error("pairing: vertex has no unpaired point");
    const Kind k = red_[v] ? Kind::R : Kind::Z;
    move(v, slot({k, unpaired_[v]}), slot({k, unpaired_[v] - 1}));
    --unpaired_[v];
    (red_[v] ? red_points_ : nonred_points_) -= 1;
}

void PairingState::restore_point(Vertex v) {
    if (unpaired_[v] >= d_) throw std::logic_error("pairing: vertex already has d points");
    const Kind k = red_[v] ? Kind::R : Kind::Z;
    move(v, slot({k, unpaired_[v]}), slot({k, unpaired_[v] + 1}));
    ++unpaired_[v];
    (red_[v] ? red_points_ : nonred_points_) += 1;
}

void PairingState::check_invariants() const {
    std::int64_t total = 0, pr = 0, pz = 0, reds = 0;
    for (int s = 0; s < static_cast<int>(members_.size()); ++s) {
        const bool red_class = s <= d_;
        const int i = s % (d_ + 1);
        for (std::size_t k = 0; k < members_[s].size(); ++k) {
            const Vertex v = members_[s][k];
            if (pos_[v] != static_cast<std::int32_t>(k)) throw std::logic_error("pairing: stale position index");
            if (unpaired_[v] != i) throw std::logic_error("pairing: class index differs from unpaired count");
            if ((red_[v] != 0) != red_class) throw std::logic_error("pairing: color differs from class kind");
            (red_class ? pr : pz) += i;
            if (red_class) ++reds;
        }
        total += static_cast<std::int64_t>(members_[s].size());
    }
    if (total != n_) throw std::logic_error("pairing: class sizes do not sum to n");
    if (pr != red_points_ || pz != nonred_points_ || reds != red_count_)
        throw std::logic_error("pairing: point aggregates out of sync");
    if (static_cast<std::int64_t>(exposed_.size()) * 2 + total_points() != static_cast<std::int64_t>(n_) * d_)
        throw std::logic_error("pairing: exposed edges and unpaired points do not account for n*d");
}

Snapshot take_snapshot(const PairingState& s, std::int64_t step, int phase) {
    Snapshot snap{step, phase, std::vector<double>(static_cast<std::size_t>(s.d()) + 1),
                  std::vector<double>(static_cast<std::size_t>(s.d()) + 1)};
    const double n = s.n();
    for (int i = 0; i <= s.d(); ++i) {
        snap.r[i] = static_cast<double>(s.class_size({Kind::R, i})) / n;
        snap.z[i] = static_cast<double>(s.class_size({Kind::Z, i})) / n;
    }
    return snap;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
    out << "step,phase,class,kind,fraction\n";
    for (const auto& snap : trace.snapshots) {
        for (std::size_t i = 0; i < snap.r.size(); ++i)
            out << snap.step << ',' << snap.phase << ',' << i << ",R," << snap.r[i] << '\n';
        for (std::size_t i = 0; i < snap.z.size(); ++i)
            out << snap.step << ',' << snap.phase << ',' << i << ",Z," << snap.z[i] << '\n';
    }
}

namespace {

std::int64_t target_of(Vertex n, double fraction) {
    if (!(fraction > 0.0 && fraction <= 0.5)) throw ValidationError("pairing: stop_fraction must lie in (0, 1/2]");
    return static_cast<std::int64_t>(std::floor(static_cast<double>(n) * fraction));
}

std::pair<Vertex, Vertex> expose_from(PairingState& s, ClassMask first, ClassMask second, Rng& rng) {
    const Vertex x = s.sample_point(first, rng);
    s.remove_point(x);
    const Vertex y = s.sample_point(second, rng);
    return {x, y};
}

}  // namespace

PairingState init_alg2(Vertex n, int d, Vertex x0, Rng& rng) {
    PairingState s(n, d);
    if (x0 < 0 || x0 >= n) throw ValidationError("pairing: x0 out of range");
    s.color_red(x0);
    const ClassMask all = s.all_classes();
    while (s.unpaired(x0) > 0) {
        s.remove_point(x0);
        const Vertex y = s.sample_point(all, rng);
        s.remove_point(y);
        s.record_edge(x0, y);
    }
    return s;
}

std::pair<Vertex, Vertex> alg2_step(PairingState& s, Rng& rng) {
    auto [x, y] = expose_from(s, s.mask(Kind::R, 1, s.d()), s.all_classes(), rng);
    s.remove_point(y);
    s.record_edge(x, y);
    return {x, y};
}

std::int64_t rollover(PairingState& s, bool promote_z0) {
    std::int64_t promoted = 0;
    for (int i = promote_z0 ? 0 : 1; i < s.d(); ++i) {
        const std::vector<Vertex> layer = s.members({Kind::Z, i});
        for (Vertex v : layer) s.color_red(v);
        promoted += static_cast<std::int64_t>(layer.size());
    }
    return promoted;
}

Alg2Result run_alg2(Vertex n, int d, std::uint64_t seed, const Alg2Options& opts) {
    const std::int64_t target = target_of(n, opts.stop_fraction);
    Rng rng(seed);
    const Vertex x0 = opts.x0 ? *opts.x0 : static_cast<Vertex>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    if (x0 < 0 || x0 >= n) throw ValidationError("pairing: x0 out of range");

    Alg2Result out;
    PairingState s(n, d);
    s.color_red(x0);  // phase 0 exposes x0's own d points
    std::int64_t step = 0;
    int phase = 0;
    for (;;) {
        PairingState start = s;
        while (s.red_points() > 0) {
            alg2_step(s, rng);
            ++step;
            if (opts.snapshot_every > 0 && step % opts.snapshot_every == 0)
                out.trace.snapshots.push_back(take_snapshot(s, step, phase));
        }
        out.trace.phase_end_steps.push_back(step);
        out.trace.snapshots.push_back(take_snapshot(s, step, phase));
        const std::int64_t promoted = rollover(s, opts.promote_z0);
        out.trace.red_after_rollover.push_back(s.red_count());
        ++phase;
        if (s.red_count() >= target || promoted == 0) {
            out.stalled = s.red_count() < target;
            out.handoff = out.stalled ? s : std::move(start);
            out.at_stop = std::move(s);
            break;
        }
    }
    out.phases = phase;
    return out;
}

ClassMask alg3_first_classes(const PairingState& s) { return s.mask(Kind::R, 1, (s.d() + 1) / 2); }

std::pair<Vertex, Vertex> alg3_step(PairingState& s, ClassMask first, Rng& rng) {
    // Second point from V \ R_0; R_0 holds no points, so every class qualifies.
    auto [x, y] = expose_from(s, first, s.all_classes(), rng);
    s.color_red(y);
    s.remove_point(y);
    s.record_edge(x, y);
    return {x, y};
}

Alg3Result run_alg3(PairingState s, std::uint64_t seed, const Alg3Options& opts) {
    const Vertex n = s.n();
    const int d = s.d();
    const std::int64_t target = target_of(n, opts.stop_fraction);
    Rng rng(seed);
    Alg3Result out;

    const ClassMask light = alg3_first_classes(s);
    const ClassMask any_red = s.mask(Kind::R, 1, d);
    ClassMask first = light;
    auto r1 = [&] { return s.class_size({Kind::R, 1}); };
    while (s.red_count() - r1() < target) {
        if (s.points_in(first) == 0) {
            if (s.red_points() == 0) {
                out.stuck = true;
                break;
            }
            out.fallback_used = true;
            if (opts.fallback == FallbackMode::Permanent) first = any_red;
        }
        const ClassMask use = s.points_in(first) > 0 ? first : any_red;
        alg3_step(s, use, rng);
        ++out.steps;
        if (opts.snapshot_every > 0 && out.steps % opts.snapshot_every == 0)
            out.trace.snapshots.push_back(take_snapshot(s, out.steps, 0));
    }
    out.trace.snapshots.push_back(take_snapshot(s, out.steps, 0));
    out.r1_at_stop = r1();

    // Red side: R \ R_1. Then balance to exactly `target` vertices.
    std::vector<char> side(static_cast<std::size_t>(n), 0);
    std::int64_t size = 0, unpaired_outside_r1 = 0;
    for (Vertex v = 0; v < n; ++v) {
        if (s.is_red(v) && s.unpaired(v) != 1) {
            side[v] = 1;
            ++size;
            if (s.unpaired(v) > 0) ++unpaired_outside_r1;
        }
    }
    out.alpha_accounting = static_cast<double>(out.r1_at_stop + unpaired_outside_r1) / (n / 2.0);

    if (size > target) {
        // Drop surplus vertices that already carry unpaired points.
        std::vector<Vertex> pool;
        for (Vertex v = 0; v < n; ++v)
            if (side[v] && s.unpaired(v) > 0) pool.push_back(v);
        if (static_cast<std::int64_t>(pool.size()) < size - target)
            for (Vertex v = 0; v < n; ++v)
                if (side[v] && s.unpaired(v) == 0) pool.push_back(v);
        rng.shuffle(std::span<Vertex>(pool));
        for (std::size_t k = 0; size > target; ++k, --size) side[pool[k]] = 0;
    } else if (size < target) {
        // Refill from R_1 first, then from any other vertex.
        std::vector<Vertex> pool = s.members({Kind::R, 1});
        rng.shuffle(std::span<Vertex>(pool));
        std::vector<Vertex> rest;
        for (Vertex v = 0; v < n; ++v)
            if (!side[v] && !(s.is_red(v) && s.unpaired(v) == 1)) rest.push_back(v);
        rng.shuffle(std::span<Vertex>(rest));
        pool.insert(pool.end(), rest.begin(), rest.end());
        for (std::size_t k = 0; size < target; ++k, ++size) side[pool[k]] = 1;
    }

    // A side vertex is boundary if it has an unpaired point (conservative)
    // or an exposed edge to the other side.
    std::vector<char> boundary(static_cast<std::size_t>(n), 0);
    for (Vertex v = 0; v < n; ++v)
        if (side[v] && s.unpaired(v) > 0) boundary[v] = 1;
    for (auto [u, v] : s.exposed_edges()) {
        if (side[u] && !side[v]) boundary[u] = 1;
        if (side[v] && !side[u]) boundary[v] = 1;
    }
    out.boundary = std::count(boundary.begin(), boundary.end(), 1);
    out.red_size = size;
    out.alpha = static_cast<double>(out.boundary) / (n / 2.0);
    out.trace.alpha = out.alpha;
    return out;
}

}  // namespace vbw
