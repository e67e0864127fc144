#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lanegraph/geometry.hpp"
#include "lanegraph/graph.hpp"

namespace lanegraph {

struct SegmentProjection {
  Point2 foot;      // closest point on the segment
  double t = 0.0;   // position along the segment in [0, 1]
};

/// Orthogonal projection of p onto the closed segment [l1, l2], clamped to its
/// endpoints. Throws DegenerateSegment when |l2 - l1| < 1e-12.
SegmentProjection project_to_segment(Point2 p, Point2 l1, Point2 l2);

struct ProjectionResult {
  std::size_t proposal_index = 0;
  std::size_t edge_index = 0;
  Point2 l1;
  Point2 l2;
  Point2 foot;
  double t = 0.0;
  double residual_m = 0.0;
};

/// Projection of p onto the closest edge of gt (smallest residual, lowest edge
/// index on ties). Throws EmptyGraph when gt has no edges.
ProjectionResult nearest_segment(const LaneGraph& gt, Point2 p);

struct AnchorProposal {
  NodeId id = 0;
  Point2 position;
};

/// A maximal run of edges whose interior nodes have degree 2, walked from one
/// end. Edge orientation along the walk is recorded per edge.
struct LaneChain {
  std::vector<std::size_t> edges;
  std::vector<bool> forward;        // edge traversed src -> dst
  std::vector<double> start_arc_m;  // arclength at the start of each edge
  bool closed = false;
  bool directed = false;            // carries a travel direction
  bool along_walk = true;           // travel direction matches the walk
};

/// Decomposes a graph into lane chains split at junctions and terminals.
/// Every edge belongs to exactly one chain.
std::vector<LaneChain> lane_chains(const LaneGraph& g);

/// Rebuilds ground truth around the proposals: every proposal is replaced by
/// its projection onto the nearest lane, projections on the same lane chain
/// are sorted by arclength and linked consecutively in the lane's direction.
/// Node ids are the proposal ids; output order follows proposal order.
LaneGraph adapt_ground_truth(const LaneGraph& gt, std::span<const AnchorProposal> proposals);

/// Same, with ids 0..n-1 in proposal order.
LaneGraph adapt_ground_truth(const LaneGraph& gt, std::span<const Point2> proposals);

}  // namespace lanegraph
