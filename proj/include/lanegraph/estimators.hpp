#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lanegraph/graph.hpp"
#include "lanegraph/raster.hpp"

namespace lanegraph {

// ---------------------------------------------------------------------------
// Scored proposals: the exchange format for externally predicted graphs.

struct Connection {
  NodeId src = 0;
  NodeId dst = 0;
  double score = 1.0;
  friend bool operator==(const Connection&, const Connection&) = default;
};

struct ScoredProposals {
  std::vector<AnchorNode> anchors;
  std::vector<Connection> connections;
  friend bool operator==(const ScoredProposals&, const ScoredProposals&) = default;
};

/// Parses a .lpred.json document. Throws ParseError, DuplicateNodeId,
/// InvalidScore or DanglingConnection.
ScoredProposals load_predictions(const std::string& document);
std::string save_predictions(const ScoredProposals& p);

ScoredProposals read_predictions_file(const std::string& path);
void write_predictions_file(const ScoredProposals& p, const std::string& path);

/// Undirected scored graph over the proposals.
LaneGraph proposals_to_graph(const ScoredProposals& p, const Frame& frame);
ScoredProposals graph_to_proposals(const LaneGraph& g);

// ---------------------------------------------------------------------------
// Baselines

/// Links every anchor to its min(2, n-1) nearest neighbors (ties: lower id)
/// and merges duplicates. Throws TooFewAnchors with fewer than two distinct
/// positions.
LaneGraph b2_knn_graph(std::span<const AnchorNode> anchors, const Frame& frame);

/// Ids 0..n-1 in input order, frame = bounding box of the points.
LaneGraph b2_knn_graph(std::span<const Point2> anchors);

inline constexpr double kDefaultRdpEpsilonPx = 2.0;

struct SkeletonGraphOptions {
  double threshold = 0.5;
  double rdp_epsilon_px = kDefaultRdpEpsilonPx;
  Point2 origin;  // world position of pixel (0, 0)'s corner
};

struct SkeletonGraph {
  LaneGraph graph;
  std::vector<std::uint8_t> skeleton;
  bool empty_mask = false;
  std::size_t junctions = 0;
  std::size_t endpoints = 0;
};

/// Skeleton baseline: binarize (value >= threshold), thin, place nodes at
/// skeleton pixels whose 8-neighbor degree is not 2 (touching ones merged),
/// trace the runs between them and simplify each run with RDP. Simplification
/// vertices become extra nodes.
SkeletonGraph b1_skeleton_graph(std::span<const float> centerline, std::size_t width, std::size_t height,
                                double resolution, const SkeletonGraphOptions& opts = {});

/// Same, starting from a binary mask (skips thresholding).
SkeletonGraph skeleton_graph_from_mask(std::span<const std::uint8_t> mask, std::size_t width, std::size_t height,
                                       double resolution, const SkeletonGraphOptions& opts = {});

}  // namespace lanegraph
