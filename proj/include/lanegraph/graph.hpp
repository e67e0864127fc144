#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lanegraph/geometry.hpp"

namespace lanegraph {

using NodeId = std::uint64_t;

struct AnchorNode {
  NodeId id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double score = 1.0;

  Point2 position() const { return {x_m, y_m}; }
  friend bool operator==(const AnchorNode&, const AnchorNode&) = default;
};

struct LaneSegment {
  NodeId src = 0;
  NodeId dst = 0;
  double score = 1.0;
  bool directed = false;

  friend bool operator==(const LaneSegment&, const LaneSegment&) = default;
};

/// Axis-aligned extent of a graph in meters. Bounds are inclusive.
struct Frame {
  double origin_x_m = 0.0;
  double origin_y_m = 0.0;
  double width_m = 0.0;
  double height_m = 0.0;

  bool contains(Point2 p) const {
    return p.x >= origin_x_m && p.x <= origin_x_m + width_m && p.y >= origin_y_m &&
           p.y <= origin_y_m + height_m;
  }
  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Validated, immutable directed spatial graph. Nodes and edges keep the
/// order they were supplied in; edge indices are stable.
class LaneGraph {
 public:
  LaneGraph() = default;

  const std::vector<AnchorNode>& nodes() const { return nodes_; }
  const std::vector<LaneSegment>& edges() const { return edges_; }
  const Frame& frame() const { return frame_; }

  bool empty() const { return nodes_.empty(); }
  bool contains(NodeId id) const { return index_.contains(id); }
  std::size_t index_of(NodeId id) const;
  const AnchorNode& node(NodeId id) const { return nodes_[index_of(id)]; }

  Point2 source_point(const LaneSegment& e) const { return node(e.src).position(); }
  Point2 target_point(const LaneSegment& e) const { return node(e.dst).position(); }
  double edge_length(const LaneSegment& e) const { return distance(source_point(e), target_point(e)); }

  /// Largest id in the graph, or nullopt when empty.
  std::optional<NodeId> max_id() const;

  friend bool operator==(const LaneGraph& a, const LaneGraph& b) {
    return a.frame_ == b.frame_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  friend LaneGraph build_graph(std::vector<AnchorNode>, std::vector<LaneSegment>, Frame);

  std::vector<AnchorNode> nodes_;
  std::vector<LaneSegment> edges_;
  Frame frame_;
  std::unordered_map<NodeId, std::size_t> index_;
};

/// Validates and assembles a graph. Throws Error with DuplicateNodeId,
/// DanglingEdge, OutOfFrame, SelfLoop, DuplicateEdge, NonFiniteCoordinate,
/// InvalidScore or InvalidFrame.
LaneGraph build_graph(std::vector<AnchorNode> nodes, std::vector<LaneSegment> edges, Frame frame);

/// Splits every edge longer than max_spacing_m into ceil(L / max_spacing_m)
/// equal collinear pieces. Inserted nodes get ids counting up from max id + 1
/// in edge order; scores and orientation are inherited.
LaneGraph resample(const LaneGraph& g, double max_spacing_m);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Single-source shortest path lengths (Euclidean edge weights), indexed like
/// g.nodes(). Unreachable nodes hold kUnreachable.
std::vector<double> shortest_path_lengths(const LaneGraph& g, NodeId source, bool respect_direction);

/// Length of the shortest path from a to b, or nullopt when b is unreachable.
std::optional<double> shortest_path_len(const LaneGraph& g, NodeId a, NodeId b, bool respect_direction);

/// Shortest path lengths between every ordered pair of nodes, indexed like
/// g.nodes().
std::vector<std::vector<double>> all_pairs_shortest_paths(const LaneGraph& g, bool respect_direction);

/// Copy of g with every directed edge flipped.
LaneGraph reversed(const LaneGraph& g);

/// Sum of edge lengths.
double total_length(const LaneGraph& g);

// .lgraph.json documents
std::string save_graph(const LaneGraph& g);
LaneGraph load_graph(const std::string& document);

LaneGraph read_graph_file(const std::string& path);
void write_graph_file(const LaneGraph& g, const std::string& path);

}  // namespace lanegraph
