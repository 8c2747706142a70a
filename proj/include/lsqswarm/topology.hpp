#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <variant>
#include <vector>

#include "lsqswarm/dense.hpp"

namespace lsqswarm {

// Simple undirected graph; edges are stored canonically (u < v, sorted,
// deduplicated) and mirrored into adjacency lists.
struct Graph {
  std::size_t node_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<std::size_t>> adjacency;
};

Graph graph_from_edges(std::size_t node_count,
                       const std::vector<std::pair<std::size_t, std::size_t>>& edges);
Graph path_graph(std::size_t k);
Graph cycle_graph(std::size_t k);
Graph complete_graph(std::size_t k);

DenseMatrix laplacian(const Graph& g);
bool is_connected(const Graph& g);

// Single-layered grid: one graph per matrix row (on the n column-agents of
// that row) and one per matrix column (on the m row-agents).
struct GridNetwork {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<Graph> row_graphs;  // m graphs, n nodes each
  std::vector<Graph> col_graphs;  // n graphs, m nodes each
};

// Double-layered network: cluster-level graph plus one intra graph per cluster.
struct DoubleLayerNetwork {
  Graph cluster_graph;
  std::vector<Graph> intra_graphs;
};

// Nearest-neighbor wiring: paths along every row and every column.
GridNetwork standard_grid(std::size_t m, std::size_t n);
// Path cluster graph + path intra graphs for the given cluster sizes.
DoubleLayerNetwork path_double_layer(const std::vector<std::size_t>& cluster_sizes);

void assert_assumptions(const GridNetwork& net);
void assert_assumptions(const DoubleLayerNetwork& net);

// Text formats. A graph is "nodes k" followed by one "u v" line per edge.
// A network file is section-headed: `row_graphs:`/`col_graphs:` for a grid,
// `cluster:`/`intra:` for a double-layered network, each section holding one
// or more graph blocks.
Graph parse_graph(std::istream& in);
void format_graph(std::ostream& out, const Graph& g);

using NetworkDescription = std::variant<GridNetwork, DoubleLayerNetwork>;
NetworkDescription parse_network(std::istream& in);
NetworkDescription read_network_file(const std::filesystem::path& path);
void format_network(std::ostream& out, const GridNetwork& net);
void format_network(std::ostream& out, const DoubleLayerNetwork& net);

}  // namespace lsqswarm
