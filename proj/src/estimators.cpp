#include "lanegraph/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include "json_util.hpp"
#include "lanegraph/error.hpp"
#include "lanegraph/io.hpp"
#include "lanegraph/skeleton.hpp"

namespace lanegraph {

using nlohmann::json;
using namespace detail;

ScoredProposals load_predictions(const std::string& document) {
  const json doc = parse_json_document(document);
  if (!doc.is_object()) fail(ErrorCode::ParseError, "document root must be an object");
  ScoredProposals p;
  std::unordered_set<NodeId> ids;
  const json& anchors = array_field(doc, "anchors", "document");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const std::string where = "anchors[" + std::to_string(i) + "]";
    const json& a = anchors[i];
    if (!a.is_object()) fail(ErrorCode::ParseError, where + " must be an object");
    AnchorNode n{id_field(a, "id", where), number_field(a, "x_m", where), number_field(a, "y_m", where),
                 optional_number(a, "score", 1.0, where)};
    if (!ids.insert(n.id).second) fail(ErrorCode::DuplicateNodeId, where + ": id " + std::to_string(n.id));
    if (!(n.score >= 0.0 && n.score <= 1.0)) fail(ErrorCode::InvalidScore, where);
    p.anchors.push_back(n);
  }
  const json& conns = array_field(doc, "connections", "document");
  for (std::size_t i = 0; i < conns.size(); ++i) {
    const std::string where = "connections[" + std::to_string(i) + "]";
    const json& c = conns[i];
    if (!c.is_object()) fail(ErrorCode::ParseError, where + " must be an object");
    Connection k{id_field(c, "src", where), id_field(c, "dst", where), optional_number(c, "score", 1.0, where)};
    if (!ids.contains(k.src)) fail(ErrorCode::DanglingConnection, where + ": unknown anchor " + std::to_string(k.src));
    if (!ids.contains(k.dst)) fail(ErrorCode::DanglingConnection, where + ": unknown anchor " + std::to_string(k.dst));
    if (!(k.score >= 0.0 && k.score <= 1.0)) fail(ErrorCode::InvalidScore, where);
    p.connections.push_back(k);
  }
  return p;
}

std::string save_predictions(const ScoredProposals& p) {
  json anchors = json::array();
  for (const auto& a : p.anchors) anchors.push_back({{"id", a.id}, {"x_m", a.x_m}, {"y_m", a.y_m}, {"score", a.score}});
  json conns = json::array();
  for (const auto& c : p.connections) conns.push_back({{"src", c.src}, {"dst", c.dst}, {"score", c.score}});
  return json{{"anchors", std::move(anchors)}, {"connections", std::move(conns)}}.dump();
}

ScoredProposals read_predictions_file(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return load_predictions(bytes);
  } catch (const Error& ex) {
    throw Error(ex.code(), path + ": " + ex.what());
  }
}

void write_predictions_file(const ScoredProposals& p, const std::string& path) {
  write_file(path, save_predictions(p));
}

LaneGraph proposals_to_graph(const ScoredProposals& p, const Frame& frame) {
  std::vector<LaneSegment> edges;
  edges.reserve(p.connections.size());
  for (const auto& c : p.connections) edges.push_back({c.src, c.dst, c.score, false});
  return build_graph(p.anchors, std::move(edges), frame);
}

ScoredProposals graph_to_proposals(const LaneGraph& g) {
  ScoredProposals p;
  p.anchors = g.nodes();
  for (const auto& e : g.edges()) p.connections.push_back({e.src, e.dst, e.score});
  return p;
}

// ---------------------------------------------------------------------------

LaneGraph b2_knn_graph(std::span<const AnchorNode> anchors, const Frame& frame) {
  const std::size_t n = anchors.size();
  {
    std::set<std::pair<double, double>> distinct;
    for (const auto& a : anchors) distinct.emplace(a.x_m, a.y_m);
    if (distinct.size() < 2) fail(ErrorCode::TooFewAnchors, "need at least two distinct anchors");
  }
  const std::size_t k = std::min<std::size_t>(2, n - 1);

  std::set<std::pair<std::size_t, std::size_t>> linked;
  std::vector<LaneSegment> edges;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
    const Point2 p = anchors[i].position();
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = squared_distance(p, anchors[a].position());
                        const double db = squared_distance(p, anchors[b].position());
                        return da != db ? da < db : anchors[a].id < anchors[b].id;
                      });
    order.resize(n);  // keep capacity; only the first k entries matter
    for (std::size_t m = 0; m < k; ++m) {
      const std::size_t j = order[m];
      const auto key = std::minmax(i, j);
      if (!linked.insert(key).second) continue;
      edges.push_back({anchors[key.first].id, anchors[key.second].id, 1.0, false});
    }
  }
  return build_graph({anchors.begin(), anchors.end()}, std::move(edges), frame);
}

LaneGraph b2_knn_graph(std::span<const Point2> anchors) {
  std::vector<AnchorNode> nodes;
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    nodes.push_back({static_cast<NodeId>(i), anchors[i].x, anchors[i].y, 1.0});
    x0 = std::min(x0, anchors[i].x);
    y0 = std::min(y0, anchors[i].y);
    x1 = std::max(x1, anchors[i].x);
    y1 = std::max(y1, anchors[i].y);
  }
  if (anchors.empty()) fail(ErrorCode::TooFewAnchors, "need at least two distinct anchors");
  return b2_knn_graph(nodes, Frame{x0, y0, x1 - x0, y1 - y0});
}

// ---------------------------------------------------------------------------
// Skeleton graph

namespace {

constexpr std::array<int, 8> kDr{-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDc{0, 1, 1, 1, 0, -1, -1, -1};
constexpr auto kNone = std::numeric_limits<std::size_t>::max();

class SkeletonTracer {
 public:
  SkeletonTracer(const std::vector<std::uint8_t>& skel, std::size_t w, std::size_t h, double resolution,
                 const SkeletonGraphOptions& opts)
      : skel_(skel), w_(w), h_(h), resolution_(resolution), opts_(opts), degree_(skel.size(), 0),
        cluster_(skel.size(), kNone), visited_(skel.size(), false) {}

  SkeletonGraph run() {
    SkeletonGraph out;
    for (std::size_t i = 0; i < skel_.size(); ++i) {
      if (skel_[i]) degree_[i] = static_cast<int>(neighbors(i).size());
    }
    build_clusters(out);
    for (std::size_t i = 0; i < skel_.size(); ++i) {
      if (!skel_[i] || cluster_[i] == kNone) continue;
      for (const std::size_t q : neighbors(i)) {
        if (cluster_[q] == kNone && !visited_[q]) trace_from(i, q);
      }
    }
    // Closed loops without any junction or endpoint.
    for (std::size_t i = 0; i < skel_.size(); ++i) {
      if (!skel_[i] || visited_[i] || cluster_[i] != kNone) continue;
      const std::size_t node = new_node(i);
      cluster_[i] = cluster_rep_.size();
      cluster_rep_.push_back(node);
      visited_[i] = true;
      const auto nb = neighbors(i);
      if (!nb.empty() && !visited_[nb.front()]) trace_from(i, nb.front());
    }
    Frame frame{opts_.origin.x, opts_.origin.y, static_cast<double>(w_) * resolution_,
                static_cast<double>(h_) * resolution_};
    out.graph = build_graph(std::move(nodes_), std::move(edges_), frame);
    return out;
  }

 private:
  std::vector<std::size_t> neighbors(std::size_t idx) const {
    std::vector<std::size_t> out;
    const auto r = static_cast<std::ptrdiff_t>(idx / w_);
    const auto c = static_cast<std::ptrdiff_t>(idx % w_);
    for (std::size_t k = 0; k < 8; ++k) {
      const auto rr = r + kDr[k];
      const auto cc = c + kDc[k];
      if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(h_) || cc >= static_cast<std::ptrdiff_t>(w_)) continue;
      const auto j = static_cast<std::size_t>(rr) * w_ + static_cast<std::size_t>(cc);
      if (skel_[j]) out.push_back(j);
    }
    return out;
  }

  Point2 pixel_point(std::size_t idx) const {
    return {static_cast<double>(idx % w_) + 0.5, static_cast<double>(idx / w_) + 0.5};
  }

  std::size_t new_node(std::size_t pixel) {
    const Point2 p = pixel_point(pixel);
    nodes_.push_back({static_cast<NodeId>(nodes_.size()), opts_.origin.x + p.x * resolution_,
                      opts_.origin.y + p.y * resolution_, 1.0});
    return nodes_.size() - 1;
  }

  void build_clusters(SkeletonGraph& out) {
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < skel_.size(); ++i) {
      if (!skel_[i] || degree_[i] == 2 || cluster_[i] != kNone) continue;
      const std::size_t id = cluster_rep_.size();
      std::vector<std::size_t> members;
      cluster_[i] = id;
      stack.push_back(i);
      while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        members.push_back(p);
        for (const std::size_t q : neighbors(p)) {
          if (degree_[q] != 2 && cluster_[q] == kNone) {
            cluster_[q] = id;
            stack.push_back(q);
          }
        }
      }
      Point2 centroid;
      for (const std::size_t m : members) centroid = centroid + pixel_point(m);
      centroid = centroid * (1.0 / static_cast<double>(members.size()));
      std::sort(members.begin(), members.end());
      std::size_t rep = members.front();
      for (const std::size_t m : members) {
        if (squared_distance(pixel_point(m), centroid) < squared_distance(pixel_point(rep), centroid)) rep = m;
      }
      bool junction = false;
      for (const std::size_t m : members) {
        visited_[m] = true;
        junction = junction || degree_[m] > 2;
      }
      if (junction || members.size() > 1) {
        ++out.junctions;
      } else if (degree_[rep] == 1) {
        ++out.endpoints;
      }
      rep_pixel_.push_back(rep);
      cluster_rep_.push_back(new_node(rep));
    }
  }

  void trace_from(std::size_t start_pixel, std::size_t first) {
    const std::size_t start_cluster = cluster_[start_pixel];
    std::vector<std::size_t> run;
    std::size_t prev = start_pixel;
    std::size_t cur = first;
    std::size_t end_cluster = kNone;
    while (true) {
      if (cluster_[cur] != kNone) {
        end_cluster = cluster_[cur];
        break;
      }
      visited_[cur] = true;
      run.push_back(cur);
      std::size_t next = kNone;
      for (const std::size_t q : neighbors(cur)) {
        if (q == prev) continue;
        if (cluster_[q] != kNone || !visited_[q]) {
          next = q;
          break;
        }
      }
      if (next == kNone) break;  // dead end inside a run, should not happen on a clean skeleton
      prev = cur;
      cur = next;
    }
    if (end_cluster == kNone) {
      // Treat the last pixel as an endpoint.
      const std::size_t tail = run.back();
      run.pop_back();
      cluster_[tail] = cluster_rep_.size();
      cluster_rep_.push_back(new_node(tail));
      end_cluster = cluster_[tail];
    }
    add_run(start_cluster, end_cluster, run);
  }

  void add_run(std::size_t a, std::size_t b, const std::vector<std::size_t>& run) {
    const std::size_t na = cluster_rep_[a];
    const std::size_t nb = cluster_rep_[b];
    std::vector<Point2> line;
    line.push_back(node_pixel(na));
    for (const std::size_t p : run) line.push_back(pixel_point(p));
    line.push_back(node_pixel(nb));

    std::vector<std::size_t> keep;
    if (na == nb) {
      // A loop back to the same node needs at least two interior vertices.
      if (run.size() < 2) return;
      const std::size_t i1 = 1 + run.size() / 3;
      const std::size_t i2 = std::max(i1 + 1, 1 + (2 * run.size()) / 3);
      keep.push_back(0);
      for (const auto& [lo, hi] : {std::pair{std::size_t{0}, i1}, std::pair{i1, i2}, std::pair{i2, line.size() - 1}}) {
        const auto part = rdp_indices(std::span<const Point2>(line).subspan(lo, hi - lo + 1), opts_.rdp_epsilon_px);
        for (std::size_t k = 1; k < part.size(); ++k) keep.push_back(lo + part[k]);
      }
    } else {
      keep = rdp_indices(line, opts_.rdp_epsilon_px);
    }

    std::vector<std::size_t> chain{na};
    for (std::size_t k = 1; k + 1 < keep.size(); ++k) chain.push_back(new_node(run[keep[k] - 1]));
    chain.push_back(nb);
    if (chain.size() == 2 && !linked_.insert(std::minmax(na, nb)).second) return;
    for (std::size_t k = 1; k < chain.size(); ++k) {
      edges_.push_back({static_cast<NodeId>(chain[k - 1]), static_cast<NodeId>(chain[k]), 1.0, false});
    }
  }

  Point2 node_pixel(std::size_t node) const {
    return {(nodes_[node].x_m - opts_.origin.x) / resolution_, (nodes_[node].y_m - opts_.origin.y) / resolution_};
  }

  const std::vector<std::uint8_t>& skel_;
  std::size_t w_;
  std::size_t h_;
  double resolution_;
  SkeletonGraphOptions opts_;
  std::vector<int> degree_;
  std::vector<std::size_t> cluster_;
  std::vector<bool> visited_;
  std::vector<std::size_t> cluster_rep_;  // cluster -> node index
  std::vector<std::size_t> rep_pixel_;
  std::vector<AnchorNode> nodes_;
  std::vector<LaneSegment> edges_;
  std::set<std::pair<std::size_t, std::size_t>> linked_;
};

}  // namespace

SkeletonGraph skeleton_graph_from_mask(std::span<const std::uint8_t> mask, std::size_t width, std::size_t height,
                                       double resolution, const SkeletonGraphOptions& opts) {
  if (mask.size() != width * height) fail(ErrorCode::InvalidRaster, "mask size does not match dimensions");
  if (!(resolution > 0.0)) fail(ErrorCode::InvalidArgument, "resolution must be positive");
  auto skeleton = thin({mask, width, height});
  SkeletonTracer tracer(skeleton, width, height, resolution, opts);
  SkeletonGraph out = tracer.run();
  out.empty_mask = std::none_of(mask.begin(), mask.end(), [](std::uint8_t v) { return v != 0; });
  out.skeleton = std::move(skeleton);
  return out;
}

SkeletonGraph b1_skeleton_graph(std::span<const float> centerline, std::size_t width, std::size_t height,
                                double resolution, const SkeletonGraphOptions& opts) {
  if (centerline.size() != width * height) fail(ErrorCode::InvalidRaster, "plane size does not match dimensions");
  std::vector<std::uint8_t> mask(centerline.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = centerline[i] >= opts.threshold ? 1 : 0;
  return skeleton_graph_from_mask(mask, width, height, resolution, opts);
}

}  // namespace lanegraph
