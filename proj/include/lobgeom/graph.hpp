#pragma once

// Relational substrate: a fixed vertex set with a growing undirected edge
// multiset, plus the degree-proportional inflationary update.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lobgeom/errors.hpp"
#include "lobgeom/rng.hpp"

namespace lobgeom {

enum class Topology { ring, random_tree, complete };

class RelationalGraph {
public:
    explicit RelationalGraph(int n_vertices);

    int n_vertices() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }
    long long degree(int v) const { return degree_[v]; }
    const std::vector<long long>& degrees() const { return degree_; }

    // Edges normalized to (min, max); multi-edges appear once per occurrence.
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    // Appends one undirected edge. Rejects self-loops.
    void add_edge(int i, int j);

private:
    int n_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<long long> degree_;
};

// Connected seed graph. Requires n_vertices >= 3.
RelationalGraph init_graph(int n_vertices, Topology topology, RngSeed seed);

// One inflationary update: endpoint i drawn with probability degree(i)/sum,
// partner j uniform over V \ {i}; duplicate pairs are kept as multi-edges.
// Returns the added edge as (i, j).
std::pair<int, int> inflation_step(RelationalGraph& g, Xoshiro256& rng);

void run_inflation(RelationalGraph& g, long long n_steps, RngSeed seed);

// Edge-list text export: one "i j" pair per line, 0-based indices, sorted
// lexicographically.
void write_edge_list(const RelationalGraph& g, std::ostream& out);

Topology topology_from_string(const std::string& name);
const char* to_string(Topology t);

}  // namespace lobgeom
