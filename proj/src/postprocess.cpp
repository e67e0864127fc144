#include "lanegraph/postprocess.hpp"

#include <algorithm>
#include <unordered_set>

#include "lanegraph/error.hpp"

namespace lanegraph {

PostprocessConfig PostprocessConfig::for_frame(const Frame& f) {
  PostprocessConfig cfg;
  cfg.image_width_m = f.width_m;
  cfg.image_height_m = f.height_m;
  return cfg;
}

void PostprocessConfig::validate() const {
  const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(node_score_min)) fail(ErrorCode::InvalidArgument, "node score threshold must lie in [0, 1]");
  if (!unit(edge_score_min)) fail(ErrorCode::InvalidArgument, "edge score threshold must lie in [0, 1]");
  if (!(max_span_fraction > 0.0 && max_span_fraction <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "span fraction must lie in (0, 1]");
  }
  if (!(image_width_m > 0.0 && image_height_m > 0.0)) fail(ErrorCode::InvalidArgument, "image extent must be positive");
}

double PostprocessConfig::max_span_m() const { return max_span_fraction * std::min(image_width_m, image_height_m); }

LaneGraph filter_graph(const LaneGraph& g, const PostprocessConfig& cfg) {
  cfg.validate();
  const double max_span = cfg.max_span_m();

  std::unordered_set<NodeId> kept;
  for (const auto& n : g.nodes()) {
    if (!(n.score < cfg.node_score_min)) kept.insert(n.id);
  }

  std::vector<LaneSegment> edges;
  for (const auto& e : g.edges()) {
    if (!kept.contains(e.src) || !kept.contains(e.dst)) continue;
    if (e.score < cfg.edge_score_min) continue;
    if (g.edge_length(e) > max_span) continue;
    edges.push_back(e);
  }

  std::unordered_set<NodeId> connected;
  for (const auto& e : edges) {
    connected.insert(e.src);
    connected.insert(e.dst);
  }
  std::vector<AnchorNode> nodes;
  for (const auto& n : g.nodes()) {
    if (connected.contains(n.id)) nodes.push_back(n);
  }
  return build_graph(std::move(nodes), std::move(edges), g.frame());
}

}  // namespace lanegraph
