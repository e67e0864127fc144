#include "lanegraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "json_util.hpp"
#include "lanegraph/error.hpp"

namespace lanegraph {

double SplitMix64::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

SplitMix64 make_stream(std::uint64_t seed, SynthStream stream) {
  SplitMix64 g(seed ^ ((static_cast<std::uint64_t>(stream) + 1) * 0x9E3779B97F4A7C15ULL));
  g.next();
  return g;
}

std::string to_string(Layout l) {
  switch (l) {
    case Layout::Straight: return "straight";
    case Layout::Curve: return "curve";
    case Layout::Intersection3: return "intersection3";
    case Layout::Intersection4: return "intersection4";
  }
  return "?";
}

Layout parse_layout(const std::string& name) {
  for (const Layout l : {Layout::Straight, Layout::Curve, Layout::Intersection3, Layout::Intersection4}) {
    if (to_string(l) == name) return l;
  }
  fail(ErrorCode::InvalidSpec, "unknown layout '" + name + "'");
}

void SceneSpec::validate() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (lanes_per_road < 1) fail(ErrorCode::InvalidSpec, "lanes_per_road must be at least 1");
  if (!(lane_spacing_m > 0.0) || !finite(lane_spacing_m)) fail(ErrorCode::InvalidSpec, "lane_spacing_m must be positive");
  if (!(frame.width_m > 0.0) || !(frame.height_m > 0.0) || !finite(frame.width_m) || !finite(frame.height_m) ||
      !finite(frame.origin_x_m) || !finite(frame.origin_y_m)) {
    fail(ErrorCode::InvalidSpec, "frame must be finite with positive extent");
  }
  if (!(noise.anchor_sigma_m >= 0.0) || !finite(noise.anchor_sigma_m)) {
    fail(ErrorCode::InvalidSpec, "anchor_sigma_m must be >= 0");
  }
  if (!(noise.score_noise >= 0.0) || !finite(noise.score_noise)) fail(ErrorCode::InvalidSpec, "score_noise must be >= 0");
  if (!(noise.false_positive_rate >= 0.0 && noise.false_positive_rate < 1.0)) {
    fail(ErrorCode::InvalidSpec, "false_positive_rate must be in [0, 1)");
  }
  if (!(noise.drop_rate >= 0.0 && noise.drop_rate < 1.0)) fail(ErrorCode::InvalidSpec, "drop_rate must be in [0, 1)");
  if (!(resolution > 0.0) || !finite(resolution)) fail(ErrorCode::InvalidSpec, "resolution must be positive");
  if (!(lane_width_m > 0.0) || !finite(lane_width_m)) fail(ErrorCode::InvalidSpec, "lane_width_m must be positive");
  if (!(resample_spacing_m > 0.0) || !finite(resample_spacing_m)) {
    fail(ErrorCode::InvalidSpec, "resample_spacing_m must be positive");
  }
}

using nlohmann::json;
using namespace detail;

std::string save_scene_spec(const SceneSpec& s) {
  const json doc{
      {"layout", to_string(s.layout)},
      {"lanes_per_road", s.lanes_per_road},
      {"lane_spacing_m", s.lane_spacing_m},
      {"frame",
       {{"origin_x_m", s.frame.origin_x_m},
        {"origin_y_m", s.frame.origin_y_m},
        {"width_m", s.frame.width_m},
        {"height_m", s.frame.height_m}}},
      {"seed", s.seed},
      {"noise",
       {{"anchor_sigma_m", s.noise.anchor_sigma_m},
        {"false_positive_rate", s.noise.false_positive_rate},
        {"drop_rate", s.noise.drop_rate},
        {"score_noise", s.noise.score_noise}}},
      {"resolution_m_per_px", s.resolution},
      {"lane_width_m", s.lane_width_m},
      {"resample_spacing_m", s.resample_spacing_m},
  };
  return doc.dump(2);
}

SceneSpec load_scene_spec(const std::string& document) {
  const json doc = parse_json_document(document);
  if (!doc.is_object()) fail(ErrorCode::ParseError, "spec root must be an object");
  SceneSpec s;
  if (const auto it = doc.find("layout"); it != doc.end()) {
    if (!it->is_string()) fail(ErrorCode::ParseError, "spec: 'layout' must be a string");
    s.layout = parse_layout(it->get<std::string>());
  }
  if (const auto it = doc.find("lanes_per_road"); it != doc.end()) {
    if (!it->is_number_integer()) fail(ErrorCode::ParseError, "spec: 'lanes_per_road' must be an integer");
    const auto v = it->get<std::int64_t>();
    if (v < 1 || v > 1000) fail(ErrorCode::InvalidSpec, "lanes_per_road out of range");
    s.lanes_per_road = static_cast<int>(v);
  }
  s.lane_spacing_m = optional_number(doc, "lane_spacing_m", s.lane_spacing_m, "spec");
  if (const auto it = doc.find("frame"); it != doc.end()) {
    if (!it->is_object()) fail(ErrorCode::ParseError, "spec: 'frame' must be an object");
    s.frame.origin_x_m = optional_number(*it, "origin_x_m", s.frame.origin_x_m, "spec.frame");
    s.frame.origin_y_m = optional_number(*it, "origin_y_m", s.frame.origin_y_m, "spec.frame");
    s.frame.width_m = optional_number(*it, "width_m", s.frame.width_m, "spec.frame");
    s.frame.height_m = optional_number(*it, "height_m", s.frame.height_m, "spec.frame");
  }
  if (doc.contains("seed")) s.seed = id_field(doc, "seed", "spec");
  if (const auto it = doc.find("noise"); it != doc.end()) {
    if (!it->is_object()) fail(ErrorCode::ParseError, "spec: 'noise' must be an object");
    s.noise.anchor_sigma_m = optional_number(*it, "anchor_sigma_m", 0.0, "spec.noise");
    s.noise.false_positive_rate = optional_number(*it, "false_positive_rate", 0.0, "spec.noise");
    s.noise.drop_rate = optional_number(*it, "drop_rate", 0.0, "spec.noise");
    s.noise.score_noise = optional_number(*it, "score_noise", 0.0, "spec.noise");
  }
  s.resolution = optional_number(doc, "resolution_m_per_px", s.resolution, "spec");
  s.lane_width_m = optional_number(doc, "lane_width_m", s.lane_width_m, "spec");
  s.resample_spacing_m = optional_number(doc, "resample_spacing_m", s.resample_spacing_m, "spec");
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Layout construction

namespace {

constexpr double kBezierCircle = 0.5522847498307936;  // quarter circle handle length
constexpr double kMaxChord = 1.9;

Point2 right_of(Point2 u) { return {-u.y, u.x}; }

struct Builder {
  Frame frame;
  std::vector<AnchorNode> nodes;
  std::vector<LaneSegment> edges;

  NodeId add(Point2 p) {
    p.x = std::clamp(p.x, frame.origin_x_m, frame.origin_x_m + frame.width_m);
    p.y = std::clamp(p.y, frame.origin_y_m, frame.origin_y_m + frame.height_m);
    const auto id = static_cast<NodeId>(nodes.size());
    nodes.push_back({id, p.x, p.y, 1.0});
    return id;
  }
  void chain(const std::vector<NodeId>& ids) {
    for (std::size_t i = 1; i < ids.size(); ++i) edges.push_back({ids[i - 1], ids[i], 1.0, true});
  }
  Point2 at(NodeId id) const { return nodes[id].position(); }
};

/// A lane of a straight road: traffic along `heading`, displaced by `offset`
/// (>= 0) to the right of the road center.
struct StraightLane {
  Point2 heading;
  double offset = 0.0;
  std::optional<NodeId> box_in;   // node at t = -h
  std::optional<NodeId> box_out;  // node at t = +h
};

/// Splits the symmetric lane offsets of a road into lanes driving along
/// `forward` (offsets >= 0 to its right) and lanes driving against it.
std::vector<StraightLane> road_lanes(Point2 forward, int n, double spacing) {
  std::vector<StraightLane> lanes;
  for (int i = 0; i < n; ++i) {
    const double o = (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * spacing;
    if (o >= 0.0) {
      lanes.push_back({forward, o, {}, {}});
    } else {
      lanes.push_back({forward * -1.0, -o, {}, {}});
    }
  }
  return lanes;
}

/// Parameter range of the line base + t * u inside the frame (u axis-aligned).
std::pair<double, double> frame_span(const Frame& f, Point2 base, Point2 u) {
  if (u.x != 0.0) {
    const double t0 = (f.origin_x_m - base.x) / u.x;
    const double t1 = (f.origin_x_m + f.width_m - base.x) / u.x;
    return {std::min(t0, t1), std::max(t0, t1)};
  }
  const double t0 = (f.origin_y_m - base.y) / u.y;
  const double t1 = (f.origin_y_m + f.height_m - base.y) / u.y;
  return {std::min(t0, t1), std::max(t0, t1)};
}

/// Adds a straight lane through the frame, optionally cut at +-h around the
/// center, and records the cut nodes. `lo`/`hi` restrict the span.
void add_straight(Builder& b, StraightLane& lane, Point2 center, std::optional<double> h, double lo, double hi) {
  const Point2 base = center + right_of(lane.heading) * lane.offset;
  const auto [t_min, t_max] = frame_span(b.frame, base, lane.heading);
  const double t0 = std::max(t_min, lo);
  const double t1 = std::min(t_max, hi);
  std::vector<double> ts{t0};
  if (h) {
    for (const double cut : {-*h, *h}) {
      if (cut > t0 && cut < t1) ts.push_back(cut);
    }
  }
  ts.push_back(t1);
  std::vector<NodeId> ids;
  for (const double t : ts) {
    ids.push_back(b.add(base + lane.heading * t));
    if (h && t == -*h) lane.box_in = ids.back();
    if (h && t == *h) lane.box_out = ids.back();
  }
  b.chain(ids);
}

Point2 bezier(Point2 p0, Point2 p1, Point2 p2, Point2 p3, double t) {
  const double s = 1.0 - t;
  return p0 * (s * s * s) + p1 * (3.0 * s * s * t) + p2 * (3.0 * s * t * t) + p3 * (t * t * t);
}

/// Quarter turn from node `from` (driving along d_in) to node `to` (driving
/// along d_out), as a cubic Bezier sampled into short chords.
void add_turn(Builder& b, NodeId from, Point2 d_in, NodeId to, Point2 d_out) {
  const Point2 e = b.at(from);
  const Point2 x = b.at(to);
  const double a = dot(x - e, d_in);
  const double c = dot(x - e, d_out);
  const Point2 p1 = e + d_in * (kBezierCircle * a);
  const Point2 p2 = x - d_out * (kBezierCircle * c);
  int n = std::max(1, static_cast<int>(std::ceil((distance(e, p1) + distance(p1, p2) + distance(p2, x)) / kMaxChord)));
  std::vector<Point2> pts;
  while (true) {
    pts.clear();
    for (int i = 0; i <= n; ++i) pts.push_back(bezier(e, p1, p2, x, static_cast<double>(i) / n));
    double worst = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) worst = std::max(worst, distance(pts[i - 1], pts[i]));
    if (worst <= kMaxChord) break;
    n *= 2;
  }
  std::vector<NodeId> ids{from};
  for (int i = 1; i < n; ++i) ids.push_back(b.add(pts[static_cast<std::size_t>(i)]));
  ids.push_back(to);
  b.chain(ids);
}

Point2 axis_direction(std::uint64_t k) {
  static constexpr Point2 kAxes[] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  return kAxes[k % 4];
}

double max_offset(int n, double spacing) { return 0.5 * static_cast<double>(n - 1) * spacing; }

void build_straight(Builder& b, const SceneSpec& s, SplitMix64& rng) {
  const Point2 forward = axis_direction(rng.next());
  const bool horizontal = forward.x != 0.0;
  const double extent = horizontal ? s.frame.height_m : s.frame.width_m;
  const double origin = horizontal ? s.frame.origin_y_m : s.frame.origin_x_m;
  const double margin = 0.5 * s.lane_width_m;
  const double span = 2.0 * max_offset(s.lanes_per_road, s.lane_spacing_m);
  // First lane on a pixel center so the rendering is symmetric about it.
  const auto k_min = static_cast<std::int64_t>(std::ceil(margin / s.resolution - 0.5));
  const auto k_max = static_cast<std::int64_t>(std::floor((extent - margin - span) / s.resolution - 0.5));
  if (k_max < k_min) fail(ErrorCode::InvalidSpec, "lanes do not fit in the frame");
  const auto k = k_min + static_cast<std::int64_t>(rng.next() % static_cast<std::uint64_t>(k_max - k_min + 1));
  const double first = origin + (static_cast<double>(k) + 0.5) * s.resolution;
  const double middle = first + 0.5 * span;
  const Point2 center = horizontal ? Point2{s.frame.origin_x_m + 0.5 * s.frame.width_m, middle}
                                   : Point2{middle, s.frame.origin_y_m + 0.5 * s.frame.height_m};
  auto lanes = road_lanes(forward, s.lanes_per_road, s.lane_spacing_m);
  const double inf = std::numeric_limits<double>::infinity();
  for (auto& lane : lanes) add_straight(b, lane, center, std::nullopt, -inf, inf);
}

void build_curve(Builder& b, const SceneSpec& s, SplitMix64& rng) {
  const std::uint64_t corner = rng.next() % 4;
  const Frame& f = s.frame;
  const Point2 corners[] = {{f.origin_x_m, f.origin_y_m},
                            {f.origin_x_m + f.width_m, f.origin_y_m},
                            {f.origin_x_m + f.width_m, f.origin_y_m + f.height_m},
                            {f.origin_x_m, f.origin_y_m + f.height_m}};
  const Point2 c = corners[corner];
  const double theta0 = static_cast<double>(corner) * 0.5 * std::numbers::pi;
  const double o_max = max_offset(s.lanes_per_road, s.lane_spacing_m);
  const double lo = o_max + 1.0;
  const double hi = std::min(f.width_m, f.height_m) - o_max - 0.5 * s.lane_width_m;
  if (hi < lo) fail(ErrorCode::InvalidSpec, "curved lanes do not fit in the frame");
  const double radius = std::clamp(rng.uniform(15.0, 40.0), lo, hi);

  for (int i = 0; i < s.lanes_per_road; ++i) {
    // Positive offsets lie to the right of travel along increasing angle,
    // which is toward the arc center.
    const double o = (static_cast<double>(i) - 0.5 * static_cast<double>(s.lanes_per_road - 1)) * s.lane_spacing_m;
    const double r = radius - o;
    const int n = std::max(1, static_cast<int>(std::ceil(r * 0.5 * std::numbers::pi / kMaxChord)));
    std::vector<NodeId> ids;
    for (int j = 0; j <= n; ++j) {
      const double theta = theta0 + 0.5 * std::numbers::pi * static_cast<double>(j) / n;
      ids.push_back(b.add(c + unit_from_angle(theta) * r));
    }
    if (o < 0.0) std::reverse(ids.begin(), ids.end());
    b.chain(ids);
  }
}

/// Center of an intersection box of half-size h, jittered while keeping
/// clear road on every side.
Point2 junction_center(const SceneSpec& s, double h, SplitMix64& rng) {
  const Frame& f = s.frame;
  const double room = 0.5 * std::min(f.width_m, f.height_m) - h - s.resample_spacing_m;
  if (room < 0.0) fail(ErrorCode::InvalidSpec, "intersection does not fit in the frame");
  const double jitter = std::min(room, 3.0);
  return {f.origin_x_m + 0.5 * f.width_m + rng.uniform(-jitter, jitter),
          f.origin_y_m + 0.5 * f.height_m + rng.uniform(-jitter, jitter)};
}

StraightLane* rightmost(std::vector<StraightLane>& lanes, Point2 heading) {
  StraightLane* best = nullptr;
  for (auto& l : lanes) {
    if (l.heading == heading && (!best || l.offset > best->offset)) best = &l;
  }
  return best;
}

void build_intersection4(Builder& b, const SceneSpec& s, SplitMix64& rng) {
  const double h = max_offset(s.lanes_per_road, s.lane_spacing_m) + s.lane_spacing_m;
  const Point2 center = junction_center(s, h, rng);
  const std::uint64_t bits = rng.next();
  const Point2 fx{(bits & 1) ? -1.0 : 1.0, 0.0};
  const Point2 fy{0.0, (bits & 2) ? -1.0 : 1.0};
  auto lanes = road_lanes(fx, s.lanes_per_road, s.lane_spacing_m);
  for (auto& l : road_lanes(fy, s.lanes_per_road, s.lane_spacing_m)) lanes.push_back(l);
  const double inf = std::numeric_limits<double>::infinity();
  for (auto& lane : lanes) add_straight(b, lane, center, h, -inf, inf);

  // Right turns from the rightmost lane of each approach.
  for (const Point2 d : {Point2{1, 0}, Point2{0, 1}, Point2{-1, 0}, Point2{0, -1}}) {
    StraightLane* from = rightmost(lanes, d);
    StraightLane* to = rightmost(lanes, right_of(d));
    if (from && to && from->box_in && to->box_out) add_turn(b, *from->box_in, d, *to->box_out, right_of(d));
  }
}

void build_intersection3(Builder& b, const SceneSpec& s, SplitMix64& rng) {
  const double h = max_offset(s.lanes_per_road, s.lane_spacing_m) + s.lane_spacing_m;
  const Point2 center = junction_center(s, h, rng);
  const std::uint64_t bits = rng.next();
  const Point2 main = axis_direction(bits);
  // With a single lane per road the stub has to sit where its lone entry
  // lane can turn right onto the main road.
  const Point2 side = (s.lanes_per_road == 1 || ((bits >> 2) & 1)) ? right_of(main) : right_of(main) * -1.0;

  const double inf = std::numeric_limits<double>::infinity();
  auto main_lanes = road_lanes(main, s.lanes_per_road, s.lane_spacing_m);
  for (auto& lane : main_lanes) add_straight(b, lane, center, h, -inf, inf);

  // Stub: entry lanes drive toward the center and end at the box edge, exit
  // lanes start there.
  const Point2 entry = side * -1.0;
  auto stub_lanes = road_lanes(entry, s.lanes_per_road, s.lane_spacing_m);
  for (auto& lane : stub_lanes) {
    if (lane.heading == entry) {
      add_straight(b, lane, center, h, -inf, -h);
    } else {
      add_straight(b, lane, center, h, h, inf);
    }
  }

  // Every entry lane turns right onto the main road, rightmost first.
  const auto by_offset = [](std::vector<StraightLane>& lanes, Point2 heading) {
    std::vector<StraightLane*> out;
    for (auto& l : lanes) {
      if (l.heading == heading) out.push_back(&l);
    }
    std::sort(out.begin(), out.end(), [](auto* a, auto* c) { return a->offset > c->offset; });
    return out;
  };
  const auto entries = by_offset(stub_lanes, entry);
  const auto exits = by_offset(main_lanes, right_of(entry));
  for (std::size_t j = 0; j < entries.size() && !exits.empty(); ++j) {
    StraightLane* to = exits[std::min(j, exits.size() - 1)];
    if (entries[j]->box_in && to->box_out) add_turn(b, *entries[j]->box_in, entry, *to->box_out, right_of(entry));
  }
  // The main-road lane with the stub on its right may turn into it.
  for (const Point2 w : {main, main * -1.0}) {
    if (!(right_of(w) == side)) continue;
    StraightLane* from = rightmost(main_lanes, w);
    StraightLane* to = rightmost(stub_lanes, side);
    if (from && to && from->box_in && to->box_out) add_turn(b, *from->box_in, w, *to->box_out, side);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

BevRaster centerline_raster(const LaneGraph& g, double resolution, double lane_width_m) {
  const BevRaster thin = rasterize_graph(g, resolution, resolution);
  const auto& mask = thin.channel("lane").u8();
  auto dist = distance_transform(mask, thin.width(), thin.height(), 1.0);
  const double half_px = 0.5 * lane_width_m / resolution;
  std::vector<float> like(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    like[i] = static_cast<float>(std::max(0.0, 1.0 - static_cast<double>(dist[i]) / half_px));
  }
  BevRaster out(thin.width(), thin.height(), resolution);
  out.add_channel({"distance", std::move(dist)});
  out.add_channel({"centerline", std::move(like)});
  return out;
}

DirectionField exact_direction_field(const LaneGraph& g, double resolution, double lane_width_m) {
  const BevRaster lanes = rasterize_graph(g, resolution, lane_width_m);
  const std::size_t w = lanes.width();
  const std::size_t h = lanes.height();
  const auto& mask = lanes.channel("lane").u8();
  const Frame& f = g.frame();
  std::vector<double> best(w * h, std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> codes(w * h, static_cast<std::uint8_t>(kBackgroundClass));
  const double radius = 0.5 * lane_width_m;

  const auto clamp_index = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n - 1)));
  };
  for (const auto& e : g.edges()) {
    const Point2 a = g.source_point(e);
    const Point2 b = g.target_point(e);
    if (a == b) continue;
    const auto code = static_cast<std::uint8_t>(angle_to_class(heading(b - a)));
    const std::size_t c0 = clamp_index(std::floor((std::min(a.x, b.x) - radius - f.origin_x_m) / resolution), w);
    const std::size_t c1 = clamp_index(std::ceil((std::max(a.x, b.x) + radius - f.origin_x_m) / resolution), w);
    const std::size_t r0 = clamp_index(std::floor((std::min(a.y, b.y) - radius - f.origin_y_m) / resolution), h);
    const std::size_t r1 = clamp_index(std::ceil((std::max(a.y, b.y) + radius - f.origin_y_m) / resolution), h);
    for (std::size_t r = r0; r <= r1; ++r) {
      for (std::size_t c = c0; c <= c1; ++c) {
        const std::size_t idx = r * w + c;
        if (!mask[idx]) continue;
        const double d2 = squared_distance_to_segment(pixel_center(f.origin_x_m, f.origin_y_m, resolution, r, c), a, b);
        if (d2 < best[idx]) {
          best[idx] = d2;
          codes[idx] = code;
        }
      }
    }
  }

  BevRaster raster(w, h, resolution);
  raster.add_channel({std::string(kDirectionChannel), std::move(codes)});
  DirectionField probe(raster, {f.origin_x_m, f.origin_y_m});

  // Anchor pixels take the heading of their own lane.
  auto& out = raster.channel(std::string(kDirectionChannel)).u8();
  for (const auto& n : g.nodes()) {
    std::optional<Point2> dir;
    for (const auto& e : g.edges()) {
      if (e.src == n.id && !dir) dir = g.target_point(e) - g.source_point(e);
    }
    for (const auto& e : g.edges()) {
      if (e.dst == n.id && !dir) dir = g.target_point(e) - g.source_point(e);
    }
    if (!dir || squared_norm(*dir) == 0.0) continue;
    const double u = std::clamp((n.x_m - f.origin_x_m) / resolution, 0.0, static_cast<double>(w));
    const double v = std::clamp((n.y_m - f.origin_y_m) / resolution, 0.0, static_cast<double>(h));
    const std::size_t col = std::min(static_cast<std::size_t>(std::floor(u)), w - 1);
    const std::size_t row = std::min(static_cast<std::size_t>(std::floor(v)), h - 1);
    out[row * w + col] = static_cast<std::uint8_t>(angle_to_class(heading(*dir)));
  }
  return DirectionField(std::move(raster), {f.origin_x_m, f.origin_y_m});
}

Scene gen_scene(const SceneSpec& spec) {
  spec.validate();

  SplitMix64 layout_rng = make_stream(spec.seed, SynthStream::Layout);
  Builder b;
  b.frame = spec.frame;
  switch (spec.layout) {
    case Layout::Straight: build_straight(b, spec, layout_rng); break;
    case Layout::Curve: build_curve(b, spec, layout_rng); break;
    case Layout::Intersection3: build_intersection3(b, spec, layout_rng); break;
    case Layout::Intersection4: build_intersection4(b, spec, layout_rng); break;
  }
  const LaneGraph coarse = build_graph(std::move(b.nodes), std::move(b.edges), spec.frame);
  LaneGraph gt = resample(coarse, spec.resample_spacing_m);
  DirectionField field = exact_direction_field(gt, spec.resolution, spec.lane_width_m);
  BevRaster centerline = centerline_raster(gt, spec.resolution, spec.lane_width_m);
  Scene scene{spec, std::move(gt), std::move(centerline), std::move(field), {}};

  // Proposals. Every stream draws the same amount regardless of the rates so
  // changing one rate never reshuffles another kind of noise.
  SplitMix64 jitter = make_stream(spec.seed, SynthStream::Jitter);
  SplitMix64 drop = make_stream(spec.seed, SynthStream::Drop);
  SplitMix64 fp = make_stream(spec.seed, SynthStream::FalsePositive);
  SplitMix64 score = make_stream(spec.seed, SynthStream::Score);
  const Frame& f = spec.frame;
  const auto clamp_to_frame = [&](Point2 p) {
    return Point2{std::clamp(p.x, f.origin_x_m, f.origin_x_m + f.width_m),
                  std::clamp(p.y, f.origin_y_m, f.origin_y_m + f.height_m)};
  };
  const auto noisy_score = [&] { return std::clamp(1.0 - std::abs(score.normal() * spec.noise.score_noise), 0.0, 1.0); };

  ScoredProposals& props = scene.proposals;
  std::vector<bool> kept;
  for (const auto& n : scene.gt.nodes()) {
    const bool keep = !(drop.uniform() < spec.noise.drop_rate);
    const double dx = jitter.normal() * spec.noise.anchor_sigma_m;
    const double dy = jitter.normal() * spec.noise.anchor_sigma_m;
    const double s = noisy_score();
    kept.push_back(keep);
    if (!keep) continue;
    const Point2 p = clamp_to_frame({n.x_m + dx, n.y_m + dy});
    props.anchors.push_back({n.id, p.x, p.y, s});
  }
  for (const auto& e : scene.gt.edges()) {
    const double s = noisy_score();
    if (kept[scene.gt.index_of(e.src)] && kept[scene.gt.index_of(e.dst)]) props.connections.push_back({e.src, e.dst, s});
  }
  NodeId next_id = scene.gt.max_id().value_or(0) + (scene.gt.empty() ? 0 : 1);
  for (std::size_t i = 0; i < scene.gt.nodes().size(); ++i) {
    const double u = fp.uniform();
    const double x = fp.uniform(f.origin_x_m, f.origin_x_m + f.width_m);
    const double y = fp.uniform(f.origin_y_m, f.origin_y_m + f.height_m);
    const double s = fp.uniform(0.0, 0.5);
    if (u < spec.noise.false_positive_rate) props.anchors.push_back({next_id++, x, y, s});
  }
  return scene;
}

}  // namespace lanegraph
