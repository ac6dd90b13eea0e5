#pragma once

// Slow, direct reimplementations used to check the library.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "vbw/graph.hpp"

namespace oracle {

inline std::vector<std::vector<int>> adjacency_matrix(const vbw::RegularGraph& g) {
    std::vector<std::vector<int>> a(static_cast<std::size_t>(g.n()), std::vector<int>(static_cast<std::size_t>(g.n()), 0));
    for (vbw::Vertex u = 0; u < g.n(); ++u)
        for (vbw::Vertex v : g.neighbors(u)) a[u][v] = 1;
    return a;
}

// Enumerates balanced splits with std::next_permutation over a 0/1 vector.
template <class F>
inline std::int64_t min_over_splits(const vbw::RegularGraph& g, F score) {
    const int n = g.n();
    std::vector<int> side(static_cast<std::size_t>(n), 0);
    std::fill(side.end() - n / 2, side.end(), 1);
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    do best = std::min(best, score(side));
    while (std::next_permutation(side.begin(), side.end()));
    return best;
}

inline std::int64_t vbw(const vbw::RegularGraph& g) {
    const auto a = adjacency_matrix(g);
    const int n = g.n();
    return min_over_splits(g, [&](const std::vector<int>& side) {
        std::int64_t b[2] = {0, 0};
        for (int u = 0; u < n; ++u) {
            bool across = false;
            for (int v = 0; v < n; ++v) across |= a[u][v] && side[v] != side[u];
            b[side[u]] += across;
        }
        return std::min(b[0], b[1]);
    });
}

inline std::int64_t bw(const vbw::RegularGraph& g) {
    return min_over_splits(g, [&](const std::vector<int>& side) {
        std::int64_t cut = 0;
        for (auto [u, v] : g.edges()) cut += side[u] != side[v];
        return cut;
    });
}

// Ball sizes from all-pairs shortest paths.
inline std::vector<std::int64_t> balls(const vbw::RegularGraph& g, vbw::Vertex x0) {
    const int n = g.n();
    const int inf = 1 << 20;
    std::vector<std::vector<int>> dist(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), inf));
    for (int u = 0; u < n; ++u) {
        dist[u][u] = 0;
        for (vbw::Vertex v : g.neighbors(u)) dist[u][v] = std::min(dist[u][v], 1);
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
    std::vector<std::int64_t> out(static_cast<std::size_t>(n), 0);
    for (int r = 0; r < n; ++r)
        for (int v = 0; v < n; ++v) out[r] += dist[x0][v] <= r;
    return out;
}

// Expected one-step change of r_i in the ball-growing phase, written out
// term by term from the first-point / second-point table (counts, not
// fractions). r has d+1 entries with r[d] = 0.
inline double delta_r(int i, const std::vector<double>& r, double pR, double nW) {
    const int d = static_cast<int>(r.size()) - 1;
    const double a = i * r[i];
    const double b = i + 1 <= d ? (i + 1) * r[i + 1] : 0.0;
    return -2.0 * (a / pR) * (a / nW)                 //
           - (a / pR) * ((nW - a - b) / nW)           //
           - ((pR - a - b) / pR) * (a / nW)           //
           + (b / pR) * ((nW - a - b) / nW)           //
           + ((pR - a - b) / pR) * (b / nW)           //
           + 2.0 * (b / pR) * (b / nW);
}

inline double delta_z(int i, const std::vector<double>& z, double nW) {
    const int d = static_cast<int>(z.size()) - 1;
    if (i == d) return -d * z[d] / nW;
    return (-(i * z[i]) + (i + 1) * z[i + 1]) / nW;
}

}  // namespace oracle
