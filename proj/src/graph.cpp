#include "dipgnn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace dipgnn {

Graph::Graph(int num_nodes, std::vector<Edge> edges, GraphOptions options)
    : num_nodes_(num_nodes), options_(options) {
  if (num_nodes < 0) throw DataError("graph: negative node count");
  for (auto& e : edges) {
    if (e.src < 0 || e.src >= num_nodes || e.dst < 0 || e.dst >= num_nodes) {
      throw DataError("graph: edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                      ") has an endpoint outside [0, " + std::to_string(num_nodes) + ")");
    }
    if (e.src == e.dst && !options_.allow_self_loops) {
      throw DataError("graph: self-loop at node " + std::to_string(e.src));
    }
    if (!options_.directed && e.src > e.dst) std::swap(e.src, e.dst);
  }
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] == edges[i - 1]) {
      throw DataError("graph: duplicate edge (" + std::to_string(edges[i].src) + ", " +
                      std::to_string(edges[i].dst) + ")");
    }
  }
  edges_ = std::move(edges);

  std::vector<int> deg(static_cast<std::size_t>(num_nodes_), 0);
  for (const auto& e : edges_) {
    ++deg[e.src];
    if (e.src != e.dst) ++deg[e.dst];
  }
  adj_offsets_.assign(static_cast<std::size_t>(num_nodes_) + 1, 0);
  for (int v = 0; v < num_nodes_; ++v) adj_offsets_[v + 1] = adj_offsets_[v] + deg[v];
  adj_.assign(static_cast<std::size_t>(adj_offsets_.back()), 0);
  std::vector<int> cursor(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (const auto& e : edges_) {
    adj_[cursor[e.src]++] = e.dst;
    if (e.src != e.dst) adj_[cursor[e.dst]++] = e.src;
  }
  for (int v = 0; v < num_nodes_; ++v) {
    std::sort(adj_.begin() + adj_offsets_[v], adj_.begin() + adj_offsets_[v + 1]);
  }
}

bool Graph::has_edge(int u, int v) const {
  if (u < 0 || u >= num_nodes_ || v < 0 || v >= num_nodes_) return false;
  const auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::span<const int> Graph::neighbors(int v) const {
  if (v < 0 || v >= num_nodes_) throw DataError("graph: node id out of range");
  return {adj_.data() + adj_offsets_[v],
          static_cast<std::size_t>(adj_offsets_[v + 1] - adj_offsets_[v])};
}

int Graph::degree(int v) const {
  if (v < 0 || v >= num_nodes_) throw DataError("graph: node id out of range");
  return adj_offsets_[v + 1] - adj_offsets_[v];
}

std::span<const double> Graph::feature_row(int v) const {
  if (!has_features()) throw DataError("graph: no features attached");
  if (v < 0 || v >= num_nodes_) throw DataError("graph: node id out of range");
  return {features_.data() + static_cast<std::size_t>(v) * feature_dim_,
          static_cast<std::size_t>(feature_dim_)};
}

void Graph::set_features(std::vector<double> flat, int dim) {
  if (dim <= 0) throw DataError("graph: feature dimension must be positive");
  if (flat.size() != static_cast<std::size_t>(num_nodes_) * dim) {
    throw DataError("graph: feature matrix has " +
                    std::to_string(flat.size() / std::max(dim, 1)) + " rows, expected " +
                    std::to_string(num_nodes_));
  }
  features_ = std::move(flat);
  feature_dim_ = dim;
}

void Graph::set_labels(std::vector<int> labels) {
  if (labels.size() != static_cast<std::size_t>(num_nodes_)) {
    throw DataError("graph: label count " + std::to_string(labels.size()) + " != node count " +
                    std::to_string(num_nodes_));
  }
  labels_ = std::move(labels);
}

void Graph::set_node_types(std::vector<int> types) {
  if (types.size() != static_cast<std::size_t>(num_nodes_)) {
    throw DataError("graph: node type count mismatch");
  }
  node_types_ = std::move(types);
}

namespace {

int parse_node_id(const std::string& token, const std::string& path, int line_no) {
  int value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || value < 0) {
    throw DataError(path + ":" + std::to_string(line_no) + ": invalid node id '" + token + "'");
  }
  return value;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::vector<double>> load_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(line_no) + ": invalid number '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Graph load_graph(const std::string& edge_list_path, const std::string& feature_path,
                 const std::string& label_path, GraphOptions options) {
  std::ifstream in(edge_list_path);
  if (!in) throw DataError("cannot open '" + edge_list_path + "'");
  std::vector<Edge> edges;
  int max_node = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(edge_list_path + ":" + std::to_string(line_no) +
                      ": expected 'src<TAB>dst'");
    }
    const int src = parse_node_id(line.substr(0, tab), edge_list_path, line_no);
    const int dst = parse_node_id(line.substr(tab + 1), edge_list_path, line_no);
    edges.push_back({src, dst});
    max_node = std::max({max_node, src, dst});
  }
  int num_nodes = max_node + 1;

  std::vector<double> flat;
  int dim = 0;
  if (!feature_path.empty()) {
    auto rows = load_csv_rows(feature_path);
    if (!rows.empty()) {
      dim = static_cast<int>(rows[0].size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(rows[i].size()) != dim) {
          throw DataError(feature_path + ": row " + std::to_string(i + 1) + " has " +
                          std::to_string(rows[i].size()) + " values, expected " +
                          std::to_string(dim));
        }
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
      }
    }
    // Feature rows fix the node count; trailing isolated nodes are legal.
    if (static_cast<int>(rows.size()) < num_nodes) {
      throw DataError(feature_path + ": " + std::to_string(rows.size()) +
                      " feature rows for " + std::to_string(num_nodes) + " nodes");
    }
    num_nodes = static_cast<int>(rows.size());
  }

  Graph g(num_nodes, std::move(edges), options);
  if (!feature_path.empty() && dim > 0) g.set_features(std::move(flat), dim);

  if (!label_path.empty()) {
    auto rows = load_csv_rows(label_path);
    if (static_cast<int>(rows.size()) != num_nodes) {
      throw DataError(label_path + ": " + std::to_string(rows.size()) + " label rows for " +
                      std::to_string(num_nodes) + " nodes");
    }
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != 1 || rows[i][0] != std::floor(rows[i][0])) {
        throw DataError(label_path + ": row " + std::to_string(i + 1) +
                        " is not a single integer label");
      }
      labels.push_back(static_cast<int>(rows[i][0]));
    }
    g.set_labels(std::move(labels));
  }
  return g;
}

void save_graph(const Graph& graph, const std::string& edge_list_path,
                const std::string& feature_path, const std::string& label_path) {
  {
    std::ofstream out(edge_list_path, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + edge_list_path + "' for writing");
    for (const auto& e : graph.edges()) out << e.src << '\t' << e.dst << '\n';
  }
  if (!feature_path.empty()) {
    if (!graph.has_features()) throw DataError("save_graph: graph has no features");
    std::ofstream out(feature_path, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + feature_path + "' for writing");
    char buf[64];
    for (int v = 0; v < graph.num_nodes(); ++v) {
      const auto row = graph.feature_row(v);
      for (int j = 0; j < graph.feature_dim(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
        out << (j ? "," : "") << buf;
      }
      out << '\n';
    }
  }
  if (!label_path.empty()) {
    if (!graph.has_labels()) throw DataError("save_graph: graph has no labels");
    std::ofstream out(label_path, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + label_path + "' for writing");
    for (int v = 0; v < graph.num_nodes(); ++v) out << graph.labels()[v] << '\n';
  }
}

Graph generate_sbm(int n_nodes, int n_blocks, double p_in, double p_out, int feature_dim,
                   double noise_scale, std::uint64_t seed) {
  if (n_blocks <= 0 || n_blocks > n_nodes) {
    throw DataError("generate_sbm: need 0 < n_blocks <= n_nodes");
  }
  if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0)) {
    throw DataError("generate_sbm: need 0 <= p_out <= p_in <= 1");
  }
  if (feature_dim < n_blocks) {
    throw DataError("generate_sbm: feature_dim must be >= n_blocks for the block one-hot");
  }
  if (noise_scale < 0.0) throw DataError("generate_sbm: negative noise scale");

  Rng rng(seed);
  // Contiguous blocks, sizes differing by at most one.
  std::vector<int> block(static_cast<std::size_t>(n_nodes));
  {
    const int base = n_nodes / n_blocks;
    const int extra = n_nodes % n_blocks;
    int v = 0;
    for (int b = 0; b < n_blocks; ++b) {
      const int size = base + (b < extra ? 1 : 0);
      for (int i = 0; i < size; ++i) block[v++] = b;
    }
  }

  std::vector<Edge> edges;
  for (int u = 0; u < n_nodes; ++u) {
    for (int v = u + 1; v < n_nodes; ++v) {
      const double p = block[u] == block[v] ? p_in : p_out;
      if (p > 0.0 && rng.uniform() < p) edges.push_back({u, v});
    }
  }

  Graph g(n_nodes, std::move(edges));
  std::vector<double> features(static_cast<std::size_t>(n_nodes) * feature_dim, 0.0);
  for (int v = 0; v < n_nodes; ++v) {
    features[static_cast<std::size_t>(v) * feature_dim + block[v]] = 1.0;
    for (int j = 0; j < feature_dim; ++j) {
      features[static_cast<std::size_t>(v) * feature_dim + j] += rng.normal(0.0, noise_scale);
    }
  }
  g.set_features(std::move(features), feature_dim);
  g.set_labels(std::vector<int>(block.begin(), block.end()));
  return g;
}

SplitResult split_nodes(const Graph& graph, double pretrain_frac, std::uint64_t seed) {
  if (!(pretrain_frac > 0.0 && pretrain_frac < 1.0)) {
    throw DataError("split_nodes: pretrain_frac must be in (0, 1)");
  }
  const int n = graph.num_nodes();
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const int n_pre = static_cast<int>(std::llround(pretrain_frac * n));
  if (n_pre <= 0 || n_pre >= n) throw DataError("split_nodes: degenerate split");
  NodeSplit split;
  split.pretrain_nodes.assign(order.begin(), order.begin() + n_pre);
  const int n_rest = n - n_pre;
  const int n_train = (n_rest + 2) / 3;
  const int n_valid = (n_rest - n_train + 1) / 2;
  split.train_nodes.assign(order.begin() + n_pre, order.begin() + n_pre + n_train);
  split.valid_nodes.assign(order.begin() + n_pre + n_train,
                           order.begin() + n_pre + n_train + n_valid);
  split.test_nodes.assign(order.begin() + n_pre + n_train + n_valid, order.end());
  std::sort(split.pretrain_nodes.begin(), split.pretrain_nodes.end());
  std::sort(split.train_nodes.begin(), split.train_nodes.end());
  std::sort(split.valid_nodes.begin(), split.valid_nodes.end());
  std::sort(split.test_nodes.begin(), split.test_nodes.end());

  std::vector<char> is_pretrain(static_cast<std::size_t>(n), 0);
  for (int v : split.pretrain_nodes) is_pretrain[v] = 1;

  std::vector<Edge> pre_edges, fine_edges;
  int dropped = 0;
  for (const auto& e : graph.edges()) {
    if (is_pretrain[e.src] && is_pretrain[e.dst]) {
      pre_edges.push_back(e);
    } else if (!is_pretrain[e.src] && !is_pretrain[e.dst]) {
      fine_edges.push_back(e);
    } else {
      ++dropped;
    }
  }
  if (pre_edges.empty()) throw DataError("split_nodes: pre-training graph has zero edges");
  if (fine_edges.empty()) throw DataError("split_nodes: fine-tuning graph has zero edges");

  Graph pre(n, std::move(pre_edges), graph.options());
  Graph fine(n, std::move(fine_edges), graph.options());
  if (graph.has_features()) {
    pre.set_features(graph.features(), graph.feature_dim());
    fine.set_features(graph.features(), graph.feature_dim());
  }
  if (graph.has_labels()) {
    pre.set_labels(graph.labels());
    fine.set_labels(graph.labels());
  }
  if (graph.has_node_types()) {
    pre.set_node_types(graph.node_types());
    fine.set_node_types(graph.node_types());
  }
  return SplitResult{std::move(pre), std::move(fine), std::move(split), dropped};
}

}  // namespace dipgnn
