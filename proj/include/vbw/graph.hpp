#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vbw {

using Vertex = std::int32_t;

// Raised for bad user-supplied parameters (CLI maps this to exit code 2).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// d-regular multigraph stored as n fixed-width adjacency rows. A loop at v
// appears twice in row v; a parallel edge appears once per copy.
class RegularGraph {
public:
    RegularGraph() = default;

    // Validates degree, symmetry and (when `simple`) absence of loops and
    // repeated neighbors.
    RegularGraph(Vertex n, int d, std::vector<Vertex> adjacency, bool simple);

    static RegularGraph from_edges(Vertex n, int d, std::span<const std::pair<Vertex, Vertex>> edges,
                                   bool simple);

    Vertex n() const { return n_; }
    int d() const { return d_; }
    bool simple() const { return simple_; }

    std::span<const Vertex> neighbors(Vertex v) const {
        return {adjacency_.data() + static_cast<std::size_t>(v) * d_, static_cast<std::size_t>(d_)};
    }

    // Each edge once, u <= v; parallel copies repeated.
    std::vector<std::pair<Vertex, Vertex>> edges() const;

    friend bool operator==(const RegularGraph&, const RegularGraph&) = default;

private:
    Vertex n_ = 0;
    int d_ = 0;
    bool simple_ = true;
    std::vector<Vertex> adjacency_;
};

enum class SimpleStrategy {
    Auto,       // Rejection for small d, Repair otherwise
    Rejection,  // restart the whole pairing until it is simple
    Repair      // keep good pairs, re-pair conflicting points, restart when stuck
};

struct GenOptions {
    bool simple = true;
    SimpleStrategy strategy = SimpleStrategy::Auto;
    int max_restarts = 100000;
};

RegularGraph gen_regular(Vertex n, int d, std::uint64_t seed, const GenOptions& opts = {});

// |B(x0, r)| for r = 0..r_max.
std::vector<std::int64_t> ball_sizes(const RegularGraph& g, Vertex x0, int r_max);

// BFS distances from x0; unreachable vertices get -1.
std::vector<int> bfs_distances(const RegularGraph& g, Vertex x0);

struct Bisection {
    std::vector<Vertex> red;
    std::int64_t boundary_red = 0;
    std::int64_t boundary_complement = 0;
    std::int64_t width = 0;
    double alpha = 0.0;  // boundary_red / (n/2)
};

// Boundary counts for an arbitrary red set; no balance requirement.
Bisection vertex_boundary(const RegularGraph& g, std::span<const Vertex> red);

// As vertex_boundary, but requires |red| = floor(n/2).
Bisection vertex_width(const RegularGraph& g, std::span<const Vertex> red);

inline constexpr Vertex kBruteForceMaxVertices = 20;

std::int64_t brute_force_vbw(const RegularGraph& g);
std::int64_t brute_force_bw(const RegularGraph& g);

// Small named graphs used by tests and examples.
RegularGraph complete_graph(Vertex n);
RegularGraph complete_bipartite(Vertex k);
RegularGraph hypercube(int dim);
RegularGraph disjoint_union(const RegularGraph& a, const RegularGraph& b);

// Edge-list text format: header `n d simple`, then one `u v` per line.
void write_edge_list(std::ostream& out, const RegularGraph& g);
RegularGraph read_edge_list(std::istream& in);

}  // namespace vbw
