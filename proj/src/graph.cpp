#include "lanegraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <map>
#include <utility>

#include <json.hpp>

#include "lanegraph/error.hpp"
#include "lanegraph/io.hpp"
#include "json_util.hpp"

namespace lanegraph {

namespace {

std::string node_label(NodeId id) { return "node " + std::to_string(id); }

std::string edge_label(const LaneSegment& e) {
  return "edge " + std::to_string(e.src) + (e.directed ? "->" : "--") + std::to_string(e.dst);
}

bool valid_score(double s) { return std::isfinite(s) && s >= 0.0 && s <= 1.0; }

struct Adjacency {
  // (neighbor index, length)
  std::vector<std::vector<std::pair<std::size_t, double>>> out;
};

Adjacency make_adjacency(const LaneGraph& g, bool respect_direction) {
  Adjacency adj;
  adj.out.resize(g.nodes().size());
  for (const auto& e : g.edges()) {
    const std::size_t a = g.index_of(e.src);
    const std::size_t b = g.index_of(e.dst);
    const double len = g.edge_length(e);
    adj.out[a].emplace_back(b, len);
    if (!respect_direction || !e.directed) adj.out[b].emplace_back(a, len);
  }
  return adj;
}

std::vector<double> dijkstra(const Adjacency& adj, std::size_t source) {
  std::vector<double> dist(adj.out.size(), kUnreachable);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  dist[source] = 0.0;
  frontier.emplace(0.0, source);
  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : adj.out[u]) {
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        frontier.emplace(nd, v);
      }
    }
  }
  return dist;
}

}  // namespace

std::size_t LaneGraph::index_of(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) fail(ErrorCode::UnknownNode, node_label(id));
  return it->second;
}

std::optional<NodeId> LaneGraph::max_id() const {
  if (nodes_.empty()) return std::nullopt;
  NodeId m = 0;
  for (const auto& n : nodes_) m = std::max(m, n.id);
  return m;
}

LaneGraph build_graph(std::vector<AnchorNode> nodes, std::vector<LaneSegment> edges, Frame frame) {
  if (!std::isfinite(frame.origin_x_m) || !std::isfinite(frame.origin_y_m) || !std::isfinite(frame.width_m) ||
      !std::isfinite(frame.height_m) || frame.width_m < 0.0 || frame.height_m < 0.0) {
    fail(ErrorCode::InvalidFrame, "frame must be finite with non-negative extent");
  }

  LaneGraph g;
  g.index_.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const AnchorNode& n = nodes[i];
    if (!g.index_.emplace(n.id, i).second) fail(ErrorCode::DuplicateNodeId, node_label(n.id));
    if (!std::isfinite(n.x_m) || !std::isfinite(n.y_m)) fail(ErrorCode::NonFiniteCoordinate, node_label(n.id));
    if (!frame.contains(n.position())) {
      fail(ErrorCode::OutOfFrame, node_label(n.id) + " at (" + std::to_string(n.x_m) + ", " +
                                      std::to_string(n.y_m) + ")");
    }
    if (!valid_score(n.score)) fail(ErrorCode::InvalidScore, node_label(n.id));
  }

  // Unordered endpoint pair -> kinds seen: 1 = src<dst directed, 2 = src>dst directed, 4 = undirected.
  std::map<std::pair<NodeId, NodeId>, int> kinds;
  for (const auto& e : edges) {
    if (!g.index_.contains(e.src)) fail(ErrorCode::DanglingEdge, std::to_string(e.src) + " in " + edge_label(e));
    if (!g.index_.contains(e.dst)) fail(ErrorCode::DanglingEdge, std::to_string(e.dst) + " in " + edge_label(e));
    if (e.src == e.dst) fail(ErrorCode::SelfLoop, edge_label(e));
    if (!valid_score(e.score)) fail(ErrorCode::InvalidScore, edge_label(e));
    const auto key = std::minmax(e.src, e.dst);
    const int kind = !e.directed ? 4 : (e.src < e.dst ? 1 : 2);
    int& mask = kinds[{key.first, key.second}];
    if ((mask & 4) || (mask & kind) || (kind == 4 && mask != 0)) fail(ErrorCode::DuplicateEdge, edge_label(e));
    mask |= kind;
  }

  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  g.frame_ = frame;
  return g;
}

LaneGraph resample(const LaneGraph& g, double max_spacing_m) {
  if (!(max_spacing_m > 0.0) || !std::isfinite(max_spacing_m)) {
    fail(ErrorCode::NonPositiveSpacing, "max spacing " + std::to_string(max_spacing_m));
  }
  // Lengths within this slack of a multiple of the spacing do not trigger an
  // extra split, which keeps resampling idempotent under rounding.
  constexpr double kSlack = 1e-9;

  std::vector<AnchorNode> nodes = g.nodes();
  std::vector<LaneSegment> edges;
  edges.reserve(g.edges().size());
  NodeId next_id = g.max_id().has_value() ? *g.max_id() + 1 : 0;

  for (const auto& e : g.edges()) {
    const Point2 a = g.source_point(e);
    const Point2 b = g.target_point(e);
    const double len = distance(a, b);
    const auto parts = static_cast<std::size_t>(std::max(1.0, std::ceil((len - kSlack) / max_spacing_m)));
    if (parts == 1) {
      edges.push_back(e);
      continue;
    }
    NodeId prev = e.src;
    for (std::size_t i = 1; i < parts; ++i) {
      const Point2 p = lerp(a, b, static_cast<double>(i) / static_cast<double>(parts));
      const NodeId id = next_id++;
      nodes.push_back({id, p.x, p.y, 1.0});
      edges.push_back({prev, id, e.score, e.directed});
      prev = id;
    }
    edges.push_back({prev, e.dst, e.score, e.directed});
  }
  return build_graph(std::move(nodes), std::move(edges), g.frame());
}

std::vector<double> shortest_path_lengths(const LaneGraph& g, NodeId source, bool respect_direction) {
  const std::size_t s = g.index_of(source);
  return dijkstra(make_adjacency(g, respect_direction), s);
}

std::optional<double> shortest_path_len(const LaneGraph& g, NodeId a, NodeId b, bool respect_direction) {
  const std::size_t target = g.index_of(b);
  const double d = shortest_path_lengths(g, a, respect_direction)[target];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

std::vector<std::vector<double>> all_pairs_shortest_paths(const LaneGraph& g, bool respect_direction) {
  const Adjacency adj = make_adjacency(g, respect_direction);
  std::vector<std::vector<double>> out;
  out.reserve(g.nodes().size());
  for (std::size_t i = 0; i < g.nodes().size(); ++i) out.push_back(dijkstra(adj, i));
  return out;
}

LaneGraph reversed(const LaneGraph& g) {
  std::vector<LaneSegment> edges = g.edges();
  for (auto& e : edges) {
    if (e.directed) std::swap(e.src, e.dst);
  }
  return build_graph(g.nodes(), std::move(edges), g.frame());
}

double total_length(const LaneGraph& g) {
  double sum = 0.0;
  for (const auto& e : g.edges()) sum += g.edge_length(e);
  return sum;
}

// ---------------------------------------------------------------------------
// JSON documents

using nlohmann::json;
using namespace detail;

std::string save_graph(const LaneGraph& g) {
  json doc;
  const Frame& f = g.frame();
  doc["frame"] = {{"origin_x_m", f.origin_x_m}, {"origin_y_m", f.origin_y_m}, {"width_m", f.width_m},
                  {"height_m", f.height_m}};
  json nodes = json::array();
  for (const auto& n : g.nodes()) nodes.push_back({{"id", n.id}, {"x_m", n.x_m}, {"y_m", n.y_m}, {"score", n.score}});
  json edges = json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"score", e.score}, {"directed", e.directed}});
  }
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc.dump();
}

LaneGraph load_graph(const std::string& document) {
  const json doc = parse_json_document(document);
  if (!doc.is_object()) fail(ErrorCode::ParseError, "document root must be an object");
  const auto fit = doc.find("frame");
  if (fit == doc.end() || !fit->is_object()) fail(ErrorCode::ParseError, "missing 'frame' object");
  const Frame frame{number_field(*fit, "origin_x_m", "frame"), number_field(*fit, "origin_y_m", "frame"),
                    number_field(*fit, "width_m", "frame"), number_field(*fit, "height_m", "frame")};

  std::vector<AnchorNode> nodes;
  const json& jnodes = array_field(doc, "nodes", "document");
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const json& n = jnodes[i];
    if (!n.is_object()) fail(ErrorCode::ParseError, where + " must be an object");
    nodes.push_back({id_field(n, "id", where), number_field(n, "x_m", where), number_field(n, "y_m", where),
                     optional_number(n, "score", 1.0, where)});
  }

  std::vector<LaneSegment> edges;
  const json& jedges = array_field(doc, "edges", "document");
  for (std::size_t i = 0; i < jedges.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    const json& e = jedges[i];
    if (!e.is_object()) fail(ErrorCode::ParseError, where + " must be an object");
    bool directed = false;
    if (const auto it = e.find("directed"); it != e.end()) {
      if (!it->is_boolean()) fail(ErrorCode::ParseError, where + ": 'directed' is not a boolean");
      directed = it->get<bool>();
    }
    edges.push_back({id_field(e, "src", where), id_field(e, "dst", where), optional_number(e, "score", 1.0, where),
                     directed});
  }
  return build_graph(std::move(nodes), std::move(edges), frame);
}

LaneGraph read_graph_file(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return load_graph(bytes);
  } catch (const Error& ex) {
    throw Error(ex.code(), path + ": " + ex.what());
  }
}

void write_graph_file(const LaneGraph& g, const std::string& path) { write_file(path, save_graph(g)); }

}  // namespace lanegraph
