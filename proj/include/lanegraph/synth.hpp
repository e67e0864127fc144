#pragma once

#include <cstdint>
#include <string>

#include "lanegraph/direction_field.hpp"
#include "lanegraph/estimators.hpp"
#include "lanegraph/graph.hpp"
#include "lanegraph/raster.hpp"

namespace lanegraph {

/// SplitMix64. Small, fully specified and portable, so scenes can be
/// regenerated bit-for-bit by other implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (cosine branch only, two draws per call).
  double normal();

 private:
  std::uint64_t state_;
};

/// Independent generator per output kind:
///   stream 0 layout geometry, 1 anchor jitter, 2 anchor drops,
///   3 false positives, 4 score noise.
/// State = seed XOR (stream + 1) * 0x9E3779B97F4A7C15, then one warm-up draw.
enum class SynthStream : std::uint64_t { Layout = 0, Jitter = 1, Drop = 2, FalsePositive = 3, Score = 4 };
SplitMix64 make_stream(std::uint64_t seed, SynthStream stream);

enum class Layout { Straight, Curve, Intersection3, Intersection4 };

std::string to_string(Layout l);
/// Throws InvalidSpec for an unknown name.
Layout parse_layout(const std::string& name);

struct NoiseSpec {
  double anchor_sigma_m = 0.0;
  double false_positive_rate = 0.0;
  double drop_rate = 0.0;
  double score_noise = 0.0;
  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct SceneSpec {
  Layout layout = Layout::Straight;
  int lanes_per_road = 2;
  double lane_spacing_m = 3.0;
  Frame frame{0.0, 0.0, 51.2, 51.2};
  std::uint64_t seed = 0;
  NoiseSpec noise;
  double resolution = kDefaultResolution;
  double lane_width_m = kDefaultLaneWidth;
  double resample_spacing_m = 2.0;

  /// Throws InvalidSpec.
  void validate() const;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

std::string save_scene_spec(const SceneSpec& s);
/// Missing keys take their defaults. Throws ParseError or InvalidSpec.
SceneSpec load_scene_spec(const std::string& document);

struct Scene {
  SceneSpec spec;
  LaneGraph gt;          // directed, resampled
  BevRaster centerline;  // f32 "distance" (px) and "centerline" in [0, 1]
  DirectionField dir_field;
  ScoredProposals proposals;
};

/// Builds the scene for a spec. Same spec, same output.
Scene gen_scene(const SceneSpec& spec);

/// Centerline likelihood of a graph: distance transform of a one-pixel-wide
/// rendering, blurred with sigma 1 px, then 1 - d / (half lane width) clamped
/// at 0. The blur keeps the on-line value a little below 1.
BevRaster centerline_raster(const LaneGraph& g, double resolution, double lane_width_m);

/// Direction bins on lane pixels (those rendered at lane_width_m), taken
/// from the nearest edge; background elsewhere. The pixel holding a node
/// carries the heading of that node's own lane.
DirectionField exact_direction_field(const LaneGraph& g, double resolution, double lane_width_m);

}  // namespace lanegraph
