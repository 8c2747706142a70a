#include "lsqswarm/topology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "lsqswarm/errors.hpp"

namespace lsqswarm {

Graph graph_from_edges(
    std::size_t node_count,
    const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Graph g;
  g.node_count = node_count;
  std::vector<std::pair<std::size_t, std::size_t>> canon;
  for (auto [u, v] : edges) {
    if (u >= node_count || v >= node_count)
      throw GraphShapeError("edge endpoint out of range");
    if (u == v) throw GraphShapeError("self-loops are not allowed");
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
  g.edges = std::move(canon);
  g.adjacency.assign(node_count, {});
  for (auto [u, v] : g.edges) {
    g.adjacency[u].push_back(v);
    g.adjacency[v].push_back(u);
  }
  return g;
}

Graph path_graph(std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < k; ++i) edges.emplace_back(i, i + 1);
  return graph_from_edges(k, edges);
}

Graph cycle_graph(std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < k; ++i) edges.emplace_back(i, i + 1);
  if (k > 2) edges.emplace_back(k - 1, 0);
  return graph_from_edges(k, edges);
}

Graph complete_graph(std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) edges.emplace_back(i, j);
  return graph_from_edges(k, edges);
}

DenseMatrix laplacian(const Graph& g) {
  DenseMatrix l(g.node_count, g.node_count);
  for (auto [u, v] : g.edges) {
    l(u, u) += 1.0;
    l(v, v) += 1.0;
    l(u, v) -= 1.0;
    l(v, u) -= 1.0;
  }
  return l;
}

bool is_connected(const Graph& g) {
  if (g.node_count <= 1) return true;
  std::vector<char> seen(g.node_count, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : g.adjacency[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
  }
  return reached == g.node_count;
}

GridNetwork standard_grid(std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw GraphShapeError("grid needs m, n >= 1");
  GridNetwork net;
  net.m = m;
  net.n = n;
  net.row_graphs.assign(m, path_graph(n));
  net.col_graphs.assign(n, path_graph(m));
  return net;
}

DoubleLayerNetwork path_double_layer(const std::vector<std::size_t>& cluster_sizes) {
  if (cluster_sizes.empty()) throw GraphShapeError("need at least one cluster");
  DoubleLayerNetwork net;
  net.cluster_graph = path_graph(cluster_sizes.size());
  for (std::size_t ci : cluster_sizes) {
    if (ci == 0) throw GraphShapeError("cluster size must be positive");
    net.intra_graphs.push_back(path_graph(ci));
  }
  return net;
}

void assert_assumptions(const GridNetwork& net) {
  if (net.row_graphs.size() != net.m || net.col_graphs.size() != net.n)
    throw GraphShapeError("grid graph counts do not match (m, n)");
  for (std::size_t i = 0; i < net.row_graphs.size(); ++i) {
    if (net.row_graphs[i].node_count != net.n)
      throw GraphShapeError("row graph " + std::to_string(i) +
                            " must have n nodes");
    if (!is_connected(net.row_graphs[i]))
      throw AssumptionViolated("row:" + std::to_string(i));
  }
  for (std::size_t j = 0; j < net.col_graphs.size(); ++j) {
    if (net.col_graphs[j].node_count != net.m)
      throw GraphShapeError("column graph " + std::to_string(j) +
                            " must have m nodes");
    if (!is_connected(net.col_graphs[j]))
      throw AssumptionViolated("col:" + std::to_string(j));
  }
}

void assert_assumptions(const DoubleLayerNetwork& net) {
  if (net.cluster_graph.node_count != net.intra_graphs.size())
    throw GraphShapeError("need one intra graph per cluster node");
  if (!is_connected(net.cluster_graph)) throw AssumptionViolated("cluster");
  for (std::size_t i = 0; i < net.intra_graphs.size(); ++i)
    if (!is_connected(net.intra_graphs[i]))
      throw AssumptionViolated("intra:" + std::to_string(i));
}

namespace {

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;
  std::string pending;
  bool has_pending = false;

  bool next(std::string& out) {
    if (has_pending) {
      out = pending;
      has_pending = false;
      return true;
    }
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r");
      out = line.substr(first, last - first + 1);
      return true;
    }
    return false;
  }

  void push_back(const std::string& line) {
    pending = line;
    has_pending = true;
  }
};

bool is_header(const std::string& line) { return line.back() == ':'; }

// Reads one "nodes k" block plus its edge lines.
Graph parse_graph_block(LineReader& r, const std::string& first_line) {
  std::size_t header_line = r.line_no;
  std::istringstream hs(first_line);
  std::string tag;
  long long k;
  std::string tail;
  if (!(hs >> tag >> k) || tag != "nodes" || k < 0 || (hs >> tail))
    throw ParseError(header_line, "expected 'nodes k'");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::string line;
  while (r.next(line)) {
    if (is_header(line) || line.rfind("nodes", 0) == 0) {
      r.push_back(line);
      break;
    }
    std::istringstream es(line);
    long long u, v;
    if (!(es >> u >> v) || (es >> tail) || u < 0 || v < 0)
      throw ParseError(r.line_no, "expected edge 'u v'");
    edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
  }
  try {
    return graph_from_edges(static_cast<std::size_t>(k), edges);
  } catch (const GraphShapeError& e) {
    throw ParseError(header_line, e.what());
  }
}

std::vector<Graph> parse_graph_section(LineReader& r) {
  std::vector<Graph> graphs;
  std::string line;
  while (r.next(line)) {
    if (is_header(line)) {
      r.push_back(line);
      break;
    }
    graphs.push_back(parse_graph_block(r, line));
  }
  return graphs;
}

}  // namespace

Graph parse_graph(std::istream& in) {
  LineReader r{in};
  std::string line;
  if (!r.next(line)) throw ParseError(0, "missing 'nodes k' header");
  Graph g = parse_graph_block(r, line);
  if (r.next(line)) throw ParseError(r.line_no, "trailing content after graph");
  return g;
}

void format_graph(std::ostream& out, const Graph& g) {
  out << "nodes " << g.node_count << '\n';
  for (auto [u, v] : g.edges) out << u << ' ' << v << '\n';
}

NetworkDescription parse_network(std::istream& in) {
  LineReader r{in};
  std::vector<Graph> row_graphs, col_graphs, intra_graphs;
  std::vector<Graph> cluster_graphs;
  bool saw_grid_section = false, saw_cluster_section = false;
  std::string line;
  while (r.next(line)) {
    if (!is_header(line))
      throw ParseError(r.line_no, "expected a section header ending in ':'");
    const std::string header = line.substr(0, line.size() - 1);
    auto section = parse_graph_section(r);
    if (header == "row_graphs") {
      row_graphs = std::move(section);
      saw_grid_section = true;
    } else if (header == "col_graphs") {
      col_graphs = std::move(section);
      saw_grid_section = true;
    } else if (header == "cluster") {
      cluster_graphs = std::move(section);
      saw_cluster_section = true;
    } else if (header == "intra") {
      intra_graphs = std::move(section);
      saw_cluster_section = true;
    } else {
      throw ParseError(r.line_no, "unknown section '" + header + "'");
    }
  }
  if (saw_grid_section == saw_cluster_section)
    throw ParseError(r.line_no,
                     "network must declare either row_graphs/col_graphs or "
                     "cluster/intra sections");
  if (saw_grid_section) {
    if (row_graphs.empty() || col_graphs.empty())
      throw ParseError(r.line_no, "grid network needs both sections non-empty");
    GridNetwork net;
    net.m = row_graphs.size();
    net.n = col_graphs.size();
    net.row_graphs = std::move(row_graphs);
    net.col_graphs = std::move(col_graphs);
    for (const Graph& g : net.row_graphs)
      if (g.node_count != net.n)
        throw GraphShapeError("row graphs must have one node per column");
    for (const Graph& g : net.col_graphs)
      if (g.node_count != net.m)
        throw GraphShapeError("column graphs must have one node per row");
    return net;
  }
  if (cluster_graphs.size() != 1)
    throw ParseError(r.line_no, "cluster section must hold exactly one graph");
  DoubleLayerNetwork net;
  net.cluster_graph = std::move(cluster_graphs[0]);
  net.intra_graphs = std::move(intra_graphs);
  if (net.cluster_graph.node_count != net.intra_graphs.size())
    throw GraphShapeError("need one intra graph per cluster node");
  return net;
}

NetworkDescription read_network_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open '" + path.string() + "'");
  try {
    return parse_network(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line, path.string() + ": " + e.reason);
  }
}

void format_network(std::ostream& out, const GridNetwork& net) {
  out << "row_graphs:\n";
  for (const Graph& g : net.row_graphs) format_graph(out, g);
  out << "col_graphs:\n";
  for (const Graph& g : net.col_graphs) format_graph(out, g);
}

void format_network(std::ostream& out, const DoubleLayerNetwork& net) {
  out << "cluster:\n";
  format_graph(out, net.cluster_graph);
  out << "intra:\n";
  for (const Graph& g : net.intra_graphs) format_graph(out, g);
}

}  // namespace lsqswarm
