#include "lanegraph/adaptive_resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lanegraph/error.hpp"

namespace lanegraph {

SegmentProjection project_to_segment(Point2 p, Point2 l1, Point2 l2) {
  const Point2 dir = l2 - l1;
  const double len2 = squared_norm(dir);
  if (std::sqrt(len2) < 1e-12) fail(ErrorCode::DegenerateSegment, "segment endpoints coincide");
  const double t = std::clamp(dot(p - l1, dir) / len2, 0.0, 1.0);
  return {lerp(l1, l2, t), t};
}

ProjectionResult nearest_segment(const LaneGraph& gt, Point2 p) {
  if (gt.edges().empty()) fail(ErrorCode::EmptyGraph, "ground truth has no lane segments");
  ProjectionResult best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gt.edges().size(); ++i) {
    const auto& e = gt.edges()[i];
    const Point2 a = gt.source_point(e);
    const Point2 b = gt.target_point(e);
    if (a == b) continue;
    const auto proj = project_to_segment(p, a, b);
    const double d2 = squared_distance(p, proj.foot);
    if (d2 < best_d2) {
      best_d2 = d2;
      best.edge_index = i;
      best.l1 = a;
      best.l2 = b;
      best.foot = proj.foot;
      best.t = proj.t;
    }
  }
  if (best_d2 == std::numeric_limits<double>::infinity()) {
    fail(ErrorCode::EmptyGraph, "ground truth has only zero-length lane segments");
  }
  best.residual_m = std::sqrt(best_d2);
  return best;
}

std::vector<LaneChain> lane_chains(const LaneGraph& g) {
  const std::size_t n = g.nodes().size();
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    incident[g.index_of(g.edges()[i].src)].push_back(i);
    incident[g.index_of(g.edges()[i].dst)].push_back(i);
  }
  std::vector<bool> used(g.edges().size(), false);
  std::vector<LaneChain> chains;

  const auto walk = [&](std::size_t start_node, std::size_t first_edge) {
    LaneChain chain;
    std::size_t node = start_node;
    std::size_t edge = first_edge;
    double arc = 0.0;
    while (true) {
      used[edge] = true;
      const auto& e = g.edges()[edge];
      const bool fwd = g.index_of(e.src) == node;
      chain.edges.push_back(edge);
      chain.forward.push_back(fwd);
      chain.start_arc_m.push_back(arc);
      arc += g.edge_length(e);
      node = g.index_of(fwd ? e.dst : e.src);
      if (node == start_node) {
        chain.closed = true;
        break;
      }
      if (incident[node].size() != 2) break;
      const std::size_t next = incident[node][0] == edge ? incident[node][1] : incident[node][0];
      if (used[next]) break;
      edge = next;
    }
    for (std::size_t k = 0; k < chain.edges.size(); ++k) {
      if (g.edges()[chain.edges[k]].directed) {
        chain.directed = true;
        chain.along_walk = chain.forward[k];
        break;
      }
    }
    chains.push_back(std::move(chain));
  };

  for (std::size_t v = 0; v < n; ++v) {
    if (incident[v].size() == 2) continue;
    for (const std::size_t e : incident[v]) {
      if (!used[e]) walk(v, e);
    }
  }
  // Whatever is left lies on cycles through degree-2 nodes only.
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    if (!used[e]) walk(g.index_of(g.edges()[e].src), e);
  }
  return chains;
}

LaneGraph adapt_ground_truth(const LaneGraph& gt, std::span<const AnchorProposal> proposals) {
  if (gt.edges().empty()) fail(ErrorCode::EmptyGraph, "ground truth has no lane segments");

  const auto chains = lane_chains(gt);
  std::vector<std::pair<std::size_t, std::size_t>> edge_slot(gt.edges().size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t k = 0; k < chains[c].edges.size(); ++k) edge_slot[chains[c].edges[k]] = {c, k};
  }

  struct Placed {
    double arc;
    std::size_t proposal;
  };
  std::vector<std::vector<Placed>> per_chain(chains.size());
  std::vector<AnchorNode> nodes;
  nodes.reserve(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto proj = nearest_segment(gt, proposals[i].position);
    const auto [c, k] = edge_slot[proj.edge_index];
    const double len = distance(proj.l1, proj.l2);
    const double along = chains[c].forward[k] ? proj.t : 1.0 - proj.t;
    per_chain[c].push_back({chains[c].start_arc_m[k] + along * len, i});
    nodes.push_back({proposals[i].id, proj.foot.x, proj.foot.y, 1.0});
  }

  std::vector<LaneSegment> edges;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    auto& placed = per_chain[c];
    std::sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) {
      return a.arc != b.arc ? a.arc < b.arc : a.proposal < b.proposal;
    });
    const LaneChain& chain = chains[c];
    const auto link = [&](std::size_t from, std::size_t to) {
      NodeId src = proposals[placed[from].proposal].id;
      NodeId dst = proposals[placed[to].proposal].id;
      if (chain.directed && !chain.along_walk) std::swap(src, dst);
      edges.push_back({src, dst, 1.0, chain.directed});
    };
    for (std::size_t k = 1; k < placed.size(); ++k) link(k - 1, k);
    if (chain.closed && placed.size() >= 3) link(placed.size() - 1, 0);
  }
  return build_graph(std::move(nodes), std::move(edges), gt.frame());
}

LaneGraph adapt_ground_truth(const LaneGraph& gt, std::span<const Point2> proposals) {
  std::vector<AnchorProposal> with_ids;
  with_ids.reserve(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) with_ids.push_back({static_cast<NodeId>(i), proposals[i]});
  return adapt_ground_truth(gt, with_ids);
}

}  // namespace lanegraph
