#include "vbw/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vbw/rng.hpp"

namespace vbw {

namespace {

// Red vertices bucketed by exposure |N(v) \ R| in 1..d, with O(1) uniform
// pick and O(1) move between buckets.
class ExposureBuckets {
public:
    ExposureBuckets(Vertex n, int d)
        : buckets_(static_cast<std::size_t>(d) + 1), pos_(static_cast<std::size_t>(n), -1),
          key_(static_cast<std::size_t>(n), 0) {}

    void set(Vertex v, int exposure) {
        erase(v);
        key_[v] = exposure;
        if (exposure <= 0) return;
        auto& b = buckets_[exposure];
        pos_[v] = static_cast<std::int32_t>(b.size());
        b.push_back(v);
    }

    int exposure(Vertex v) const { return key_[v]; }

    // Smallest non-empty exposure, or 0 when every red vertex is interior.
    int min_key() const {
        for (std::size_t j = 1; j < buckets_.size(); ++j)
            if (!buckets_[j].empty()) return static_cast<int>(j);
        return 0;
    }

    Vertex pick(int j, Rng& rng) const {
        const auto& b = buckets_[j];
        return b[rng.uniform_below(b.size())];
    }

    std::int64_t bucket_size(int j) const { return static_cast<std::int64_t>(buckets_[j].size()); }

private:
    void erase(Vertex v) {
        if (pos_[v] < 0) return;
        auto& b = buckets_[key_[v]];
        const Vertex last = b.back();
        b[pos_[v]] = last;
        pos_[last] = pos_[v];
        b.pop_back();
        pos_[v] = -1;
    }

    std::vector<std::vector<Vertex>> buckets_;
    std::vector<std::int32_t> pos_;
    std::vector<int> key_;
};

}  // namespace

void validate(const GreedyConfig& cfg) {
    if (cfg.r0_offset != 1 && cfg.r0_offset != 2) throw ValidationError("greedy: r0_offset must be 1 or 2");
    if (!(cfg.stop_fraction > 0.0 && cfg.stop_fraction <= 0.5))
        throw ValidationError("greedy: stop_fraction must lie in (0, 1/2]");
    if (cfg.snapshot_every < 0) throw ValidationError("greedy: snapshot_every must be >= 0");
}

GreedyResult run_alg1(const RegularGraph& g, const GreedyConfig& cfg,
                      const std::function<void(const GreedyStep&)>& observer) {
    validate(cfg);
    const Vertex n = g.n();
    const int d = g.d();
    if (n < 2) throw ValidationError("greedy: graph needs at least two vertices");
    if (cfg.x0 && (*cfg.x0 < 0 || *cfg.x0 >= n)) throw ValidationError("greedy: x0 out of range");

    Rng rng(cfg.seed);
    GreedyResult result;
    GreedyTrace& tr = result.trace;
    tr.x0 = cfg.x0 ? *cfg.x0 : static_cast<Vertex>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    tr.target = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * cfg.stop_fraction));

    const auto dist = bfs_distances(g, tr.x0);
    const int ecc = *std::max_element(dist.begin(), dist.end());
    std::vector<std::int64_t> ball(static_cast<std::size_t>(ecc) + 1, 0);
    for (int dv : dist)
        if (dv >= 0) ++ball[dv];
    for (std::size_t r = 1; r < ball.size(); ++r) ball[r] += ball[r - 1];
    auto ball_at = [&](int r) -> std::int64_t {
        if (r < 0) return 0;
        return ball[std::min<std::size_t>(static_cast<std::size_t>(r), ball.size() - 1)];
    };

    tr.r_c = ecc + 1;  // component never exceeds the target
    for (int r = 0; r <= ecc; ++r) {
        if (ball[r] > tr.target) {
            tr.r_c = r;
            break;
        }
    }
    tr.r0 = std::max(0, tr.r_c - cfg.r0_offset);
    tr.b0 = ball_at(tr.r_c - 2);
    tr.b1 = ball_at(tr.r_c - 1);
    tr.b2 = ball_at(tr.r_c);

    std::vector<char> red(static_cast<std::size_t>(n), 0);
    std::vector<Vertex> uncolored(static_cast<std::size_t>(n));
    std::vector<Vertex> upos(static_cast<std::size_t>(n));
    for (Vertex v = 0; v < n; ++v) uncolored[v] = upos[v] = v;
    ExposureBuckets buckets(n, d);
    std::int64_t red_count = 0;

    std::vector<Vertex> scratch;
    scratch.reserve(static_cast<std::size_t>(d));
    auto distinct_neighbors = [&](Vertex v) -> const std::vector<Vertex>& {
        const auto nb = g.neighbors(v);
        scratch.assign(nb.begin(), nb.end());
        if (!g.simple()) {
            std::sort(scratch.begin(), scratch.end());
            scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        }
        return scratch;
    };

    auto color = [&](Vertex w) {
        red[w] = 1;
        ++red_count;
        const Vertex last = uncolored.back();
        uncolored[upos[w]] = last;
        upos[last] = upos[w];
        uncolored.pop_back();
        int exposure = 0;
        for (Vertex u : distinct_neighbors(w)) {
            if (u == w) continue;
            if (red[u]) buckets.set(u, buckets.exposure(u) - 1);
            else ++exposure;
        }
        buckets.set(w, exposure);
    };

    for (Vertex v = 0; v < n; ++v)
        if (dist[v] >= 0 && dist[v] <= tr.r0) color(v);

    auto snapshot = [&] {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(d) + 1, 0);
        std::int64_t exposed = 0;
        for (int j = 1; j <= d; ++j) exposed += counts[j] = buckets.bucket_size(j);
        counts[0] = red_count - exposed;
        tr.class_counts.emplace_back(tr.phase2_steps, std::move(counts));
    };
    if (cfg.snapshot_every > 0) snapshot();

    std::vector<Vertex> open;
    open.reserve(static_cast<std::size_t>(d));
    while (red_count < tr.target) {
        const int j = buckets.min_key();
        Vertex v = -1, w = -1;
        if (j == 0) {
            w = uncolored[rng.uniform_below(uncolored.size())];
            tr.exhausted = true;
            ++tr.fallback_steps;
        } else {
            v = buckets.pick(j, rng);
            open.clear();
            for (Vertex u : distinct_neighbors(v))
                if (!red[u]) open.push_back(u);
            w = open[rng.uniform_below(open.size())];
        }
        if (observer) observer(GreedyStep{v, w, j, j == 0, std::span<const char>(red)});
        color(w);
        ++tr.phase2_steps;
        if (cfg.snapshot_every > 0 && tr.phase2_steps % cfg.snapshot_every == 0) snapshot();
    }

    std::vector<Vertex> red_set;
    red_set.reserve(static_cast<std::size_t>(red_count));
    for (Vertex v = 0; v < n; ++v)
        if (red[v]) red_set.push_back(v);
    result.bisection = vertex_boundary(g, red_set);
    return result;
}

double alpha_of(std::int64_t width, std::int64_t n) {
    if (n <= 0) throw ValidationError("alpha_of: n must be positive");
    if (width < 0 || 2 * width > n + 1) throw ValidationError("alpha_of: width must lie in [0, n/2]");
    return static_cast<double>(width) / (static_cast<double>(n) / 2.0);
}

}  // namespace vbw
