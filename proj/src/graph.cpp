#include "vbw/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "vbw/rng.hpp"

namespace vbw {

namespace {

bool rows_are_simple(Vertex n, int d, const std::vector<Vertex>& adj) {
    std::vector<Vertex> row(static_cast<std::size_t>(d));
    for (Vertex v = 0; v < n; ++v) {
        auto first = adj.begin() + static_cast<std::ptrdiff_t>(v) * d;
        std::copy(first, first + d, row.begin());
        std::sort(row.begin(), row.end());
        if (std::adjacent_find(row.begin(), row.end()) != row.end()) return false;
        if (std::binary_search(row.begin(), row.end(), v)) return false;
    }
    return true;
}

std::vector<Vertex> rows_from_pairing(Vertex n, int d, std::span<const std::int64_t> points) {
    std::vector<Vertex> adj(static_cast<std::size_t>(n) * d);
    std::vector<int> fill(static_cast<std::size_t>(n), 0);
    for (std::size_t k = 0; k + 1 < points.size(); k += 2) {
        const auto u = static_cast<Vertex>(points[k] / d);
        const auto v = static_cast<Vertex>(points[k + 1] / d);
        adj[static_cast<std::size_t>(u) * d + fill[u]++] = v;
        adj[static_cast<std::size_t>(v) * d + fill[v]++] = u;
    }
    return adj;
}

RegularGraph gen_rejection(Vertex n, int d, Rng& rng, const GenOptions& opts) {
    std::vector<std::int64_t> points(static_cast<std::size_t>(n) * d);
    for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
        for (std::size_t p = 0; p < points.size(); ++p) points[p] = static_cast<std::int64_t>(p);
        rng.shuffle(std::span<std::int64_t>(points));
        auto adj = rows_from_pairing(n, d, points);
        if (!opts.simple || rows_are_simple(n, d, adj)) return RegularGraph(n, d, std::move(adj), opts.simple);
    }
    throw std::runtime_error("gen_regular: no simple pairing within " + std::to_string(opts.max_restarts) +
                             " restarts");
}

std::uint64_t edge_key(Vertex u, Vertex v, Vertex n) {
    if (u > v) std::swap(u, v);
    return static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(v);
}

// Pair stubs at random, keep the pairs that are neither loops nor repeats,
// and re-pair the rest until done; restart if the leftovers cannot be joined.
RegularGraph gen_repair(Vertex n, int d, Rng& rng, const GenOptions& opts) {
    for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
        std::unordered_set<std::uint64_t> present;
        present.reserve(static_cast<std::size_t>(n) * d);
        std::vector<std::pair<Vertex, Vertex>> edges;
        edges.reserve(static_cast<std::size_t>(n) * d / 2);
        std::vector<Vertex> stubs;
        stubs.reserve(static_cast<std::size_t>(n) * d);
        for (Vertex v = 0; v < n; ++v)
            for (int k = 0; k < d; ++k) stubs.push_back(v);

        bool failed = false;
        while (!stubs.empty()) {
            rng.shuffle(std::span<Vertex>(stubs));
            std::vector<Vertex> leftover;
            for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
                const Vertex u = stubs[k], v = stubs[k + 1];
                if (u != v && present.insert(edge_key(u, v, n)).second) {
                    edges.emplace_back(u, v);
                } else {
                    leftover.push_back(u);
                    leftover.push_back(v);
                }
            }
            if (leftover.empty()) break;
            // Suitable iff some pair of leftover vertices can still be joined.
            std::vector<Vertex> distinct = leftover;
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            bool suitable = false;
            for (std::size_t a = 0; a < distinct.size() && !suitable; ++a)
                for (std::size_t b = a + 1; b < distinct.size() && !suitable; ++b)
                    suitable = !present.contains(edge_key(distinct[a], distinct[b], n));
            if (!suitable) {
                failed = true;
                break;
            }
            stubs = std::move(leftover);
        }
        if (!failed) return RegularGraph::from_edges(n, d, edges, true);
    }
    throw std::runtime_error("gen_regular: repair sampler failed within " + std::to_string(opts.max_restarts) +
                             " restarts");
}

}  // namespace

RegularGraph::RegularGraph(Vertex n, int d, std::vector<Vertex> adjacency, bool simple)
    : n_(n), d_(d), simple_(simple), adjacency_(std::move(adjacency)) {
    if (n_ < 0 || d_ < 0) throw ValidationError("graph: negative size");
    if (adjacency_.size() != static_cast<std::size_t>(n_) * d_)
        throw ValidationError("graph: adjacency length must be n*d");
    if ((static_cast<std::int64_t>(n_) * d_) % 2 != 0) throw ValidationError("graph: n*d must be even");
    for (Vertex v : adjacency_)
        if (v < 0 || v >= n_) throw ValidationError("graph: neighbor id out of range");

    // Symmetry with multiplicity: the multiset of (u,v) equals that of (v,u).
    std::vector<std::pair<Vertex, Vertex>> fwd, rev;
    fwd.reserve(adjacency_.size());
    rev.reserve(adjacency_.size());
    for (Vertex u = 0; u < n_; ++u) {
        int self = 0;
        for (Vertex v : neighbors(u)) {
            fwd.emplace_back(u, v);
            rev.emplace_back(v, u);
            if (v == u) ++self;
        }
        if (self % 2 != 0) throw ValidationError("graph: loop listed an odd number of times");
    }
    std::sort(fwd.begin(), fwd.end());
    std::sort(rev.begin(), rev.end());
    if (fwd != rev) throw ValidationError("graph: adjacency is not symmetric");
    if (simple_ && !rows_are_simple(n_, d_, adjacency_))
        throw ValidationError("graph: flagged simple but has a loop or multi-edge");
}

RegularGraph RegularGraph::from_edges(Vertex n, int d, std::span<const std::pair<Vertex, Vertex>> edges,
                                      bool simple) {
    if (n < 0 || d < 0) throw ValidationError("graph: negative size");
    std::vector<Vertex> adj(static_cast<std::size_t>(n) * d);
    std::vector<int> fill(static_cast<std::size_t>(n), 0);
    auto push = [&](Vertex a, Vertex b) {
        if (a < 0 || a >= n || b < 0 || b >= n) throw ValidationError("graph: edge endpoint out of range");
        if (fill[a] >= d) throw ValidationError("graph: vertex " + std::to_string(a) + " exceeds degree");
        adj[static_cast<std::size_t>(a) * d + fill[a]++] = b;
    };
    for (auto [u, v] : edges) {
        push(u, v);
        push(v, u);
    }
    for (Vertex v = 0; v < n; ++v)
        if (fill[v] != d) throw ValidationError("graph: vertex " + std::to_string(v) + " has degree below d");
    return RegularGraph(n, d, std::move(adj), simple);
}

std::vector<std::pair<Vertex, Vertex>> RegularGraph::edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    out.reserve(adjacency_.size() / 2);
    for (Vertex u = 0; u < n_; ++u) {
        int self = 0;
        for (Vertex v : neighbors(u)) {
            if (u < v) out.emplace_back(u, v);
            else if (u == v && (self++ % 2 == 0)) out.emplace_back(u, u);
        }
    }
    return out;
}

RegularGraph gen_regular(Vertex n, int d, std::uint64_t seed, const GenOptions& opts) {
    if (d < 3) throw ValidationError("gen_regular: degree must be at least 3");
    if (n < 1) throw ValidationError("gen_regular: need at least one vertex");
    if ((static_cast<std::int64_t>(n) * d) % 2 != 0)
        throw ValidationError("gen_regular: n*d must be even (got n=" + std::to_string(n) +
                              ", d=" + std::to_string(d) + ")");
    if (opts.simple && n <= d) throw ValidationError("gen_regular: simple graph needs n > d");
    if (static_cast<std::int64_t>(n) * d > std::numeric_limits<std::int32_t>::max())
        throw ValidationError("gen_regular: n*d too large");

    Rng rng(seed);
    if (!opts.simple) return gen_rejection(n, d, rng, opts);
    SimpleStrategy strategy = opts.strategy;
    if (strategy == SimpleStrategy::Auto) strategy = d <= 4 ? SimpleStrategy::Rejection : SimpleStrategy::Repair;
    return strategy == SimpleStrategy::Rejection ? gen_rejection(n, d, rng, opts) : gen_repair(n, d, rng, opts);
}

std::vector<int> bfs_distances(const RegularGraph& g, Vertex x0) {
    if (x0 < 0 || x0 >= g.n()) throw ValidationError("bfs: vertex out of range");
    std::vector<int> dist(static_cast<std::size_t>(g.n()), -1);
    std::vector<Vertex> queue;
    queue.reserve(static_cast<std::size_t>(g.n()));
    dist[x0] = 0;
    queue.push_back(x0);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const Vertex u = queue[head];
        for (Vertex v : g.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

std::vector<std::int64_t> ball_sizes(const RegularGraph& g, Vertex x0, int r_max) {
    if (r_max < 0) throw ValidationError("ball_sizes: negative radius");
    const auto dist = bfs_distances(g, x0);
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(r_max) + 1, 0);
    for (int dv : dist)
        if (dv >= 0 && dv <= r_max) ++sizes[dv];
    for (std::size_t r = 1; r < sizes.size(); ++r) sizes[r] += sizes[r - 1];
    return sizes;
}

Bisection vertex_boundary(const RegularGraph& g, std::span<const Vertex> red) {
    std::vector<char> is_red(static_cast<std::size_t>(g.n()), 0);
    for (Vertex v : red) {
        if (v < 0 || v >= g.n()) throw ValidationError("vertex_width: vertex out of range");
        if (is_red[v]) throw ValidationError("vertex_width: repeated vertex in red set");
        is_red[v] = 1;
    }
    Bisection b;
    b.red.assign(red.begin(), red.end());
    for (Vertex u = 0; u < g.n(); ++u) {
        const auto nb = g.neighbors(u);
        const bool across = std::any_of(nb.begin(), nb.end(), [&](Vertex v) { return is_red[v] != is_red[u]; });
        if (!across) continue;
        if (is_red[u]) ++b.boundary_red;
        else ++b.boundary_complement;
    }
    b.width = std::min(b.boundary_red, b.boundary_complement);
    b.alpha = g.n() > 0 ? static_cast<double>(b.boundary_red) / (g.n() / 2.0) : 0.0;
    return b;
}

Bisection vertex_width(const RegularGraph& g, std::span<const Vertex> red) {
    if (static_cast<Vertex>(red.size()) != g.n() / 2)
        throw ValidationError("vertex_width: red side must have floor(n/2) vertices, got " +
                              std::to_string(red.size()));
    return vertex_boundary(g, red);
}

namespace {

template <class Score>
std::int64_t min_over_bisections(const RegularGraph& g, Score score) {
    if (g.n() > kBruteForceMaxVertices)
        throw ValidationError("brute force: n must be at most " + std::to_string(kBruteForceMaxVertices));
    const int n = g.n();
    if (n < 2) return 0;
    std::vector<std::uint32_t> adj_mask(static_cast<std::size_t>(n), 0);
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v : g.neighbors(u)) adj_mask[u] |= 1u << v;
    const std::uint32_t all = (n == 32) ? ~0u : ((1u << n) - 1);
    const int k = n / 2;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::uint32_t s = (1u << k) - 1;
    while (s <= all && s != 0) {
        best = std::min(best, score(s, all & ~s, adj_mask));
        const std::uint32_t c = s & (0u - s);
        const std::uint32_t r = s + c;
        if (r == 0 || r > all) break;
        s = (((r ^ s) >> 2) / c) | r;
    }
    return best;
}

}  // namespace

std::int64_t brute_force_vbw(const RegularGraph& g) {
    return min_over_bisections(g, [](std::uint32_t s, std::uint32_t t, const std::vector<std::uint32_t>& adj) {
        std::int64_t bs = 0, bt = 0;
        for (std::size_t v = 0; v < adj.size(); ++v) {
            const std::uint32_t bit = 1u << v;
            if ((s & bit) && (adj[v] & t)) ++bs;
            if ((t & bit) && (adj[v] & s)) ++bt;
        }
        return std::min(bs, bt);
    });
}

std::int64_t brute_force_bw(const RegularGraph& g) {
    return min_over_bisections(g, [&g](std::uint32_t s, std::uint32_t, const std::vector<std::uint32_t>&) {
        std::int64_t cut = 0;
        for (Vertex u = 0; u < g.n(); ++u) {
            if (!(s & (1u << u))) continue;
            for (Vertex v : g.neighbors(u))
                if (!(s & (1u << v))) ++cut;
        }
        return cut;
    });
}

RegularGraph complete_graph(Vertex n) {
    std::vector<std::pair<Vertex, Vertex>> e;
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v) e.emplace_back(u, v);
    return RegularGraph::from_edges(n, n - 1, e, true);
}

RegularGraph complete_bipartite(Vertex k) {
    std::vector<std::pair<Vertex, Vertex>> e;
    for (Vertex u = 0; u < k; ++u)
        for (Vertex v = 0; v < k; ++v) e.emplace_back(u, k + v);
    return RegularGraph::from_edges(2 * k, k, e, true);
}

RegularGraph hypercube(int dim) {
    const Vertex n = Vertex{1} << dim;
    std::vector<std::pair<Vertex, Vertex>> e;
    for (Vertex u = 0; u < n; ++u)
        for (int b = 0; b < dim; ++b)
            if (const Vertex v = u ^ (Vertex{1} << b); u < v) e.emplace_back(u, v);
    return RegularGraph::from_edges(n, dim, e, true);
}

RegularGraph disjoint_union(const RegularGraph& a, const RegularGraph& b) {
    if (a.d() != b.d()) throw ValidationError("disjoint_union: degrees differ");
    auto e = a.edges();
    for (auto [u, v] : b.edges()) e.emplace_back(u + a.n(), v + a.n());
    return RegularGraph::from_edges(a.n() + b.n(), a.d(), e, a.simple() && b.simple());
}

void write_edge_list(std::ostream& out, const RegularGraph& g) {
    out << g.n() << ' ' << g.d() << ' ' << (g.simple() ? 1 : 0) << '\n';
    for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

RegularGraph read_edge_list(std::istream& in) {
    std::string line;
    std::int64_t n = -1, d = -1, simple = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream header(line);
        if (!(header >> n >> d >> simple)) throw ValidationError("edge list: bad header '" + line + "'");
        break;
    }
    if (n < 0 || d < 0 || (simple != 0 && simple != 1)) throw ValidationError("edge list: missing or bad header");
    std::vector<std::pair<Vertex, Vertex>> edges;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::int64_t u = 0, v = 0;
        if (!(row >> u >> v)) throw ValidationError("edge list: bad edge line '" + line + "'");
        edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    }
    if (static_cast<std::int64_t>(edges.size()) * 2 != n * d)
        throw ValidationError("edge list: expected n*d/2 edges");
    return RegularGraph::from_edges(static_cast<Vertex>(n), static_cast<int>(d), edges, simple == 1);
}

}  // namespace vbw
