#include "lobgeom/graph.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace lobgeom {

RelationalGraph::RelationalGraph(int n_vertices) : n_(n_vertices) {
    if (n_ < 1) throw DomainError("RelationalGraph: requires n_vertices >= 1");
    degree_.assign(static_cast<std::size_t>(n_), 0);
}

void RelationalGraph::add_edge(int i, int j) {
    if (i == j) throw DomainError("add_edge: self-loops are not allowed");
    if (i < 0 || j < 0 || i >= n_ || j >= n_) {
        throw DomainError("add_edge: vertex index out of range");
    }
    if (i > j) std::swap(i, j);
    edges_.emplace_back(i, j);
    ++degree_[i];
    ++degree_[j];
}

RelationalGraph init_graph(int n_vertices, Topology topology, RngSeed seed) {
    if (n_vertices < 3) throw DomainError("init_graph: requires n_vertices >= 3");
    RelationalGraph g(n_vertices);
    switch (topology) {
        case Topology::ring:
            for (int v = 0; v < n_vertices; ++v) {
                g.add_edge(v, (v + 1) % n_vertices);
            }
            break;
        case Topology::complete:
            for (int i = 0; i < n_vertices; ++i) {
                for (int j = i + 1; j < n_vertices; ++j) g.add_edge(i, j);
            }
            break;
        case Topology::random_tree: {
            // Uniform attachment: vertex v joins a uniformly chosen earlier
            // vertex, yielding a random recursive tree.
            Xoshiro256 rng(seed);
            for (int v = 1; v < n_vertices; ++v) {
                const int parent = static_cast<int>(rng.next_below(v));
                g.add_edge(v, parent);
            }
            break;
        }
    }
    return g;
}

std::pair<int, int> inflation_step(RelationalGraph& g, Xoshiro256& rng) {
    // A uniformly chosen endpoint slot of the edge multiset lands on vertex v
    // with probability degree(v) / sum(degree), which is exactly the
    // degree-proportional draw.
    const auto& edges = g.edges();
    const std::uint64_t slot = rng.next_below(2 * edges.size());
    const auto& e = edges[slot / 2];
    const int i = (slot % 2 == 0) ? e.first : e.second;

    std::uint64_t j = rng.next_below(static_cast<std::uint64_t>(g.n_vertices() - 1));
    if (static_cast<int>(j) >= i) ++j;
    const int partner = static_cast<int>(j);

    g.add_edge(i, partner);
    return {i, partner};
}

void run_inflation(RelationalGraph& g, long long n_steps, RngSeed seed) {
    if (n_steps < 0) throw DomainError("run_inflation: n_steps must be >= 0");
    Xoshiro256 rng(seed);
    for (long long s = 0; s < n_steps; ++s) inflation_step(g, rng);
}

void write_edge_list(const RelationalGraph& g, std::ostream& out) {
    auto sorted = g.edges();
    std::sort(sorted.begin(), sorted.end());
    for (auto [i, j] : sorted) out << i << ' ' << j << '\n';
}

Topology topology_from_string(const std::string& name) {
    if (name == "ring") return Topology::ring;
    if (name == "random_tree") return Topology::random_tree;
    if (name == "complete") return Topology::complete;
    throw ConfigError("simulation.topology",
                      "unknown topology '" + name +
                          "' (expected ring, random_tree, or complete)");
}

const char* to_string(Topology t) {
    switch (t) {
        case Topology::ring: return "ring";
        case Topology::random_tree: return "random_tree";
        case Topology::complete: return "complete";
    }
    return "ring";
}

}  // namespace lobgeom
