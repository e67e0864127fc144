#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "lanegraph/adaptive_resample.hpp"
#include "lanegraph/direction_field.hpp"
#include "lanegraph/error.hpp"
#include "lanegraph/estimators.hpp"
#include "lanegraph/graph.hpp"
#include "lanegraph/io.hpp"
#include "lanegraph/metrics.hpp"
#include "lanegraph/postprocess.hpp"
#include "lanegraph/raster.hpp"
#include "lanegraph/synth.hpp"

namespace lanegraph::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kGraphSuffix = ".lgraph.json";

// ---------------------------------------------------------------------------
// Small helpers

std::vector<double> parse_numbers(const std::string& text, std::size_t count, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (out.size() != count) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " needs " + std::to_string(count) + " comma-separated values");
  }
  return out;
}

Frame parse_frame(const std::string& text) {
  const auto v = parse_numbers(text, 4, "--frame");
  return {v[0], v[1], v[2], v[3]};
}

Point2 parse_point(const std::string& text, const char* what) {
  const auto v = parse_numbers(text, 2, what);
  return {v[0], v[1]};
}

json parse_json_text(const std::string& text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& ex) {
    fail(ErrorCode::ParseError, path + ": byte " + std::to_string(ex.byte) + ": " + ex.what());
  }
}

double json_number(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) fail(ErrorCode::ParseError, where + ": '" + key + "' must be a number");
  return it->get<double>();
}

void require_file(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) fail(ErrorCode::Io, "cannot read '" + path + "': no such file");
}

void write_json(const json& doc, const std::optional<std::string>& path, std::ostream& out) {
  if (path && !path->empty()) {
    write_file(*path, doc.dump(2) + "\n");
  } else {
    out << doc.dump(2) << "\n";
  }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Failures are
/// rethrown in index order once every task has finished.
template <class Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string out;
  std::string layout = "straight";
  int lanes = 2;
  double spacing = 3.0;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::string frame = "0,0,51.2,51.2";
  double resolution = kDefaultResolution;
  double lane_width = kDefaultLaneWidth;
  double resample_spacing = 2.0;
  double anchor_sigma = 0.0;
  double fp_rate = 0.0;
  double drop_rate = 0.0;
  double score_noise = 0.0;
  std::string spec_file;
  unsigned jobs = 1;
};

std::string sample_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%05zu", i);
  return buf;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SceneSpec base;
  if (!a.spec_file.empty()) {
    require_file(a.spec_file);
    base = load_scene_spec(read_file(a.spec_file));
  } else {
    base.lanes_per_road = a.lanes;
    base.lane_spacing_m = a.spacing;
    base.frame = parse_frame(a.frame);
    base.seed = a.seed;
    base.noise = {a.anchor_sigma, a.fp_rate, a.drop_rate, a.score_noise};
    base.resolution = a.resolution;
    base.lane_width_m = a.lane_width;
    base.resample_spacing_m = a.resample_spacing;
    if (a.layout != "mixed") base.layout = parse_layout(a.layout);
  }
  const bool mixed = a.spec_file.empty() && a.layout == "mixed";
  std::vector<SceneSpec> specs;
  for (std::size_t i = 0; i < a.count; ++i) {
    SceneSpec s = base;
    s.seed = base.seed + i;
    if (mixed) {
      static constexpr Layout kCycle[] = {Layout::Straight, Layout::Curve, Layout::Intersection3, Layout::Intersection4};
      s.layout = kCycle[i % 4];
    }
    s.validate();
    specs.push_back(s);
  }
  parallel_for(specs.size(), a.jobs, [&](std::size_t i) {
    const Scene scene = gen_scene(specs[i]);
    const fs::path dir = fs::path(a.out) / sample_name(i);
    write_graph_file(scene.gt, (dir / "gt.lgraph.json").string());
    write_bvr_file(scene.centerline, (dir / "centerline.bvr").string());
    write_bvr_file(scene.dir_field.raster(), (dir / "dir.bvr").string());
    write_predictions_file(scene.proposals, (dir / "proposals.lpred.json").string());
    write_file((dir / "spec.json").string(), save_scene_spec(scene.spec) + "\n");
  });
  out << json{{"samples", specs.size()}, {"out", a.out}}.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// single-graph commands

struct ResampleArgs {
  std::string graph, out;
  double spacing = 2.0;
};

int cmd_resample(const ResampleArgs& a, std::ostream& out) {
  require_file(a.graph);
  const LaneGraph g = resample(read_graph_file(a.graph), a.spacing);
  write_graph_file(g, a.out);
  out << json{{"nodes", g.nodes().size()}, {"edges", g.edges().size()}}.dump() << "\n";
  return 0;
}

/// Accepts a plain list of {"id","x_m","y_m"} or a predictions document.
std::vector<AnchorProposal> read_anchor_list(const std::string& path) {
  require_file(path);
  const json doc = parse_json_text(read_file(path), path);
  const json* list = &doc;
  if (doc.is_object()) {
    const auto it = doc.find("anchors");
    if (it == doc.end()) fail(ErrorCode::ParseError, path + ": expected a list or an object with 'anchors'");
    list = &*it;
  }
  if (!list->is_array()) fail(ErrorCode::ParseError, path + ": anchors must be a list");
  std::vector<AnchorProposal> props;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& item = (*list)[i];
    const std::string where = path + ": anchors[" + std::to_string(i) + "]";
    if (!item.is_object()) fail(ErrorCode::ParseError, where + " must be an object");
    const auto id = item.find("id");
    if (id == item.end() || !id->is_number_unsigned()) fail(ErrorCode::ParseError, where + ": 'id' must be unsigned");
    props.push_back({id->get<NodeId>(), {json_number(item, "x_m", where), json_number(item, "y_m", where)}});
  }
  return props;
}

struct ProjectArgs {
  std::string gt, proposals, out;
};

int cmd_project(const ProjectArgs& a, std::ostream& out) {
  require_file(a.gt);
  const LaneGraph gt = read_graph_file(a.gt);
  const auto props = read_anchor_list(a.proposals);
  const LaneGraph adapted = adapt_ground_truth(gt, props);
  write_graph_file(adapted, a.out);
  out << json{{"nodes", adapted.nodes().size()}, {"edges", adapted.edges().size()}}.dump() << "\n";
  return 0;
}

struct EstimateArgs {
  std::string method, input, out;
  std::string channel = "centerline";
  double threshold = 0.5;
  double rdp_epsilon = kDefaultRdpEpsilonPx;
  std::string frame = "0,0,51.2,51.2";
  std::string frame_from;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  require_file(a.input);
  Frame frame = parse_frame(a.frame);
  if (!a.frame_from.empty()) {
    require_file(a.frame_from);
    frame = read_graph_file(a.frame_from).frame();
  }
  json report{{"method", a.method}};
  LaneGraph g;
  if (a.method == "b1") {
    const BevRaster r = read_bvr_file(a.input);
    if (!r.has_channel(a.channel)) fail(ErrorCode::InvalidArgument, "raster has no channel '" + a.channel + "'");
    const Channel& c = r.channel(a.channel);
    SkeletonGraphOptions opts{a.threshold, a.rdp_epsilon, {frame.origin_x_m, frame.origin_y_m}};
    SkeletonGraph sk = c.dtype() == Dtype::F32
                           ? b1_skeleton_graph(c.f32(), r.width(), r.height(), r.resolution(), opts)
                           : skeleton_graph_from_mask(c.u8(), r.width(), r.height(), r.resolution(), opts);
    report["empty_mask"] = sk.empty_mask;
    report["junctions"] = sk.junctions;
    report["endpoints"] = sk.endpoints;
    g = std::move(sk.graph);
  } else if (a.method == "b2") {
    std::vector<AnchorNode> anchors;
    for (const auto& p : read_anchor_list(a.input)) anchors.push_back({p.id, p.position.x, p.position.y, 1.0});
    g = b2_knn_graph(anchors, frame);
  } else if (a.method == "file") {
    g = proposals_to_graph(read_predictions_file(a.input), frame);
  } else {
    fail(ErrorCode::InvalidArgument, "unknown method '" + a.method + "'");
  }
  write_graph_file(g, a.out);
  report["nodes"] = g.nodes().size();
  report["edges"] = g.edges().size();
  out << report.dump() << "\n";
  return 0;
}

struct DirectionArgs {
  std::string field, graph, out, report;
  std::string origin;
};

int cmd_direction(const DirectionArgs& a, std::ostream& out) {
  require_file(a.field);
  require_file(a.graph);
  const LaneGraph g = read_graph_file(a.graph);
  const Point2 origin = a.origin.empty() ? Point2{g.frame().origin_x_m, g.frame().origin_y_m}
                                         : parse_point(a.origin, "--origin");
  const DirectionField field(read_bvr_file(a.field), origin);
  const DirectedGraph d = direct_graph(field, g);
  write_graph_file(d.graph, a.out);
  json issues = json::array();
  for (const auto& i : d.report.issues) {
    issues.push_back({{"edge_index", i.edge_index}, {"src", i.src}, {"dst", i.dst}, {"reason", to_string(i.reason)}});
  }
  const json report{{"edges", g.edges().size()}, {"directed", d.report.directed}, {"issues", std::move(issues)}};
  write_json(report, a.report.empty() ? std::nullopt : std::optional(a.report), out);
  return 0;
}

struct PostprocessArgs {
  std::string graph, out;
  PostprocessConfig cfg;
  std::string extent;
};

int cmd_postprocess(const PostprocessArgs& a, std::ostream& out) {
  require_file(a.graph);
  const LaneGraph g = read_graph_file(a.graph);
  PostprocessConfig cfg = a.cfg;
  if (a.extent.empty()) {
    cfg.image_width_m = g.frame().width_m;
    cfg.image_height_m = g.frame().height_m;
  } else {
    const Point2 e = parse_point(a.extent, "--extent");
    cfg.image_width_m = e.x;
    cfg.image_height_m = e.y;
  }
  cfg.validate();
  const LaneGraph f = filter_graph(g, cfg);
  write_graph_file(f, a.out);
  out << json{{"nodes_in", g.nodes().size()},
              {"edges_in", g.edges().size()},
              {"nodes_out", f.nodes().size()},
              {"edges_out", f.edges().size()}}
             .dump()
      << "\n";
  return 0;
}

struct RasterizeArgs {
  std::string graph, out, vehicles;
  double resolution = kDefaultResolution;
  double lane_width = kDefaultLaneWidth;
  bool centerline = false;
  bool direction = false;
};

int cmd_rasterize(const RasterizeArgs& a, std::ostream& out) {
  require_file(a.graph);
  const LaneGraph g = read_graph_file(a.graph);
  BevRaster r = rasterize_graph(g, a.resolution, a.lane_width);
  if (a.centerline) {
    BevRaster c = centerline_raster(g, a.resolution, a.lane_width);
    for (const auto& ch : c.channels()) r.add_channel(ch);
  }
  if (a.direction) {
    const DirectionField f = exact_direction_field(g, a.resolution, a.lane_width);
    r.add_channel(f.raster().channel(std::string(kDirectionChannel)));
  }
  if (!a.vehicles.empty()) {
    require_file(a.vehicles);
    const json doc = parse_json_text(read_file(a.vehicles), a.vehicles);
    if (!doc.is_array()) fail(ErrorCode::ParseError, a.vehicles + ": expected a list of boxes");
    std::vector<VehicleBox> boxes;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const std::string where = a.vehicles + ": boxes[" + std::to_string(i) + "]";
      if (!doc[i].is_object()) fail(ErrorCode::ParseError, where + " must be an object");
      VehicleBox b{json_number(doc[i], "center_x_m", where), json_number(doc[i], "center_y_m", where),
                   json_number(doc[i], "length_m", where), json_number(doc[i], "width_m", where),
                   json_number(doc[i], "heading_rad", where)};
      if (!(b.length_m > 0.0) || !(b.width_m > 0.0)) fail(ErrorCode::InvalidArgument, where + ": sizes must be positive");
      boxes.push_back(b);
    }
    r.add_channel(encode_vehicle_layer(boxes, g.frame(), a.resolution));
  }
  write_bvr_file(r, a.out);
  out << json{{"width", r.width()}, {"height", r.height()}, {"channels", r.channels().size()}}.dump() << "\n";
  return 0;
}

struct LowzArgs {
  std::string points, out;
  double cell = 0.2;
  std::string origin = "0,0";
};

int cmd_lowz(const LowzArgs& a, std::ostream& out) {
  require_file(a.points);
  const Point2 o = parse_point(a.origin, "--origin");
  const PointCloud in = parse_point_csv(read_file(a.points));
  const PointCloud kept = accumulate_lowest_z(in, a.cell, o.x, o.y);
  write_file(a.out, format_point_csv(kept));
  out << json{{"points_in", in.points.size()}, {"points_out", kept.points.size()}}.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string gt, pred, out;
  std::string metrics = "apls,chamfer,overlap,dir";
  std::string gt_name, pred_name;
  MetricsConfig cfg;
  unsigned jobs = 1;
};

/// Graph files under root keyed by relative path without the suffix, or by
/// relative directory when a fixed file name is given.
std::map<std::string, fs::path> collect_graphs(const fs::path& root, const std::string& name) {
  std::map<std::string, fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) fail(ErrorCode::Io, "cannot read '" + root.string() + "': not a directory");
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const std::string file = entry.path().filename().string();
    std::string key;
    if (!name.empty()) {
      if (file != name) continue;
      key = fs::relative(entry.path().parent_path(), root).generic_string();
    } else {
      if (file.size() <= std::string(kGraphSuffix).size() || !file.ends_with(kGraphSuffix)) continue;
      key = fs::relative(entry.path(), root).generic_string();
      key.resize(key.size() - std::string(kGraphSuffix).size());
    }
    out.emplace(key, entry.path());
  }
  return out;
}

json report_json(const MetricReport& r) {
  return {{"apls", optional_json(r.apls)},
          {"chamfer_m2", optional_json(r.chamfer_m2)},
          {"f1", optional_json(r.f1)},
          {"iou", optional_json(r.iou)},
          {"dir_accuracy", optional_json(r.dir_accuracy)},
          {"gt_nodes", r.gt_nodes},
          {"pred_nodes", r.pred_nodes},
          {"matched_nodes", r.matched_nodes},
          {"evaluated_pairs", r.evaluated_pairs},
          {"evaluated_edges", r.evaluated_edges}};
}

int cmd_eval(EvalArgs a, std::ostream& out) {
  a.cfg.apls = a.cfg.chamfer = a.cfg.overlap = a.cfg.direction = false;
  {
    std::stringstream ss(a.metrics);
    std::string m;
    while (std::getline(ss, m, ',')) {
      if (m == "apls") {
        a.cfg.apls = true;
      } else if (m == "chamfer") {
        a.cfg.chamfer = true;
      } else if (m == "overlap") {
        a.cfg.overlap = true;
      } else if (m == "dir") {
        a.cfg.direction = true;
      } else {
        fail(ErrorCode::InvalidArgument, "unknown metric '" + m + "'");
      }
    }
  }
  if (!(a.cfg.match_radius_m >= 0.0)) fail(ErrorCode::InvalidArgument, "--match-radius must be >= 0");

  std::vector<std::pair<std::string, fs::path>> gt_files;
  std::map<std::string, fs::path> pred_files;
  std::error_code ec;
  if (fs::is_regular_file(a.gt, ec)) {
    require_file(a.pred);
    gt_files.emplace_back(fs::path(a.gt).filename().string(), a.gt);
    pred_files.emplace(gt_files.front().first, a.pred);
  } else {
    for (auto& kv : collect_graphs(a.gt, a.gt_name)) gt_files.emplace_back(kv.first, kv.second);
    pred_files = collect_graphs(a.pred, a.pred_name.empty() ? a.gt_name : a.pred_name);
    if (gt_files.empty()) fail(ErrorCode::InvalidArgument, "no ground-truth graphs under '" + a.gt + "'");
  }

  std::vector<MetricReport> reports(gt_files.size());
  std::vector<bool> missing(gt_files.size(), false);
  parallel_for(gt_files.size(), a.jobs, [&](std::size_t i) {
    const LaneGraph gt = read_graph_file(gt_files[i].second.string());
    LaneGraph pred;
    if (const auto it = pred_files.find(gt_files[i].first); it != pred_files.end()) {
      pred = read_graph_file(it->second.string());
    } else {
      missing[i] = true;
      pred = build_graph({}, {}, gt.frame());
    }
    reports[i] = evaluate_all(gt, pred, a.cfg);
  });

  json samples = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    json s = report_json(reports[i]);
    s["name"] = gt_files[i].first;
    s["missing_prediction"] = static_cast<bool>(missing[i]);
    samples.push_back(std::move(s));
  }
  const MeanReport m = mean_report(reports);
  const json mean{{"samples", m.samples},
                  {"apls", optional_json(m.apls)},
                  {"chamfer_m2", optional_json(m.chamfer_m2)},
                  {"f1", optional_json(m.f1)},
                  {"iou", optional_json(m.iou)},
                  {"dir_accuracy", optional_json(m.dir_accuracy)},
                  {"counts",
                   {{"apls", m.apls_n}, {"chamfer_m2", m.chamfer_n}, {"f1", m.f1_n}, {"iou", m.iou_n}, {"dir_accuracy", m.dir_n}}}};
  const json config{{"metrics", a.metrics},
                    {"match_radius_m", a.cfg.match_radius_m},
                    {"resolution_m_per_px", a.cfg.resolution},
                    {"lane_width_m", a.cfg.lane_width_m},
                    {"respect_direction", a.cfg.respect_direction},
                    {"symmetric_apls", a.cfg.symmetric_apls}};
  write_json({{"config", config}, {"samples", std::move(samples)}, {"mean", mean}},
             a.out.empty() ? std::nullopt : std::optional(a.out), out);
  return 0;
}

int exit_code_for(const Error& e) { return e.code() == ErrorCode::Io ? 2 : 1; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lane graph estimation and evaluation toolkit", "lanegraph"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate synthetic scenes, one directory per sample");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--layout", synth.layout, "straight | curve | intersection3 | intersection4 | mixed");
  s->add_option("--lanes", synth.lanes, "Lanes per road")->check(CLI::PositiveNumber);
  s->add_option("--spacing", synth.spacing, "Lane spacing in meters");
  s->add_option("--count", synth.count, "Number of samples");
  s->add_option("--seed", synth.seed, "Seed of the first sample; sample i uses seed + i");
  s->add_option("--frame", synth.frame, "Frame origin_x,origin_y,width,height in meters");
  s->add_option("--resolution", synth.resolution, "Raster resolution in m/px");
  s->add_option("--lane-width", synth.lane_width, "Rendered lane width in meters");
  s->add_option("--resample-spacing", synth.resample_spacing, "Maximum ground-truth edge length in meters");
  s->add_option("--anchor-sigma", synth.anchor_sigma, "Proposal position noise (std dev, meters)");
  s->add_option("--fp-rate", synth.fp_rate, "Spurious anchor rate per ground-truth anchor");
  s->add_option("--drop-rate", synth.drop_rate, "Probability of dropping each anchor");
  s->add_option("--score-noise", synth.score_noise, "Std dev of the score perturbation");
  s->add_option("--spec", synth.spec_file, "Scene spec JSON; replaces the scene flags above");
  s->add_option("--jobs", synth.jobs, "Worker threads")->check(CLI::PositiveNumber);

  ResampleArgs res;
  auto* r = app.add_subcommand("resample", "Split edges so none is longer than the spacing");
  r->add_option("--graph", res.graph, "Input .lgraph.json")->required();
  r->add_option("--out", res.out, "Output .lgraph.json")->required();
  r->add_option("--spacing", res.spacing, "Maximum edge length in meters");

  ProjectArgs proj;
  auto* p = app.add_subcommand("project", "Rebuild ground truth from projected anchor proposals");
  p->add_option("--gt", proj.gt, "Ground-truth .lgraph.json")->required();
  p->add_option("--proposals", proj.proposals, "JSON list of {id,x_m,y_m} or a .lpred.json")->required();
  p->add_option("--out", proj.out, "Output .lgraph.json")->required();

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Build a graph with a baseline or from a predictions file");
  e->add_option("--method", est.method, "b1 (skeleton) | b2 (nearest neighbors) | file")
      ->required()
      ->check(CLI::IsMember({"b1", "b2", "file"}));
  e->add_option("--input", est.input, "b1: .bvr raster; b2: anchor list or .lpred.json; file: .lpred.json")->required();
  e->add_option("--out", est.out, "Output .lgraph.json")->required();
  e->add_option("--channel", est.channel, "b1: raster channel to threshold");
  e->add_option("--threshold", est.threshold, "b1: foreground when value >= threshold");
  e->add_option("--rdp-epsilon", est.rdp_epsilon, "b1: polyline simplification tolerance in pixels");
  e->add_option("--frame", est.frame, "Output frame origin_x,origin_y,width,height (b1 uses the origin)");
  e->add_option("--frame-from", est.frame_from, "Take the frame from this .lgraph.json instead");

  DirectionArgs dir;
  auto* d = app.add_subcommand("direction", "Orient graph edges with a direction field");
  d->add_option("--field", dir.field, "BVR1 raster with a u8 'dir' channel")->required();
  d->add_option("--graph", dir.graph, "Input .lgraph.json")->required();
  d->add_option("--out", dir.out, "Output .lgraph.json")->required();
  d->add_option("--report", dir.report, "Report JSON path (standard output when empty)");
  d->add_option("--origin", dir.origin, "World x,y of the field corner (default: graph frame origin)");

  PostprocessArgs post;
  auto* pp = app.add_subcommand("postprocess", "Remove low-score and overlong elements");
  pp->add_option("--graph", post.graph, "Input .lgraph.json")->required();
  pp->add_option("--out", post.out, "Output .lgraph.json")->required();
  pp->add_option("--node-score-min", post.cfg.node_score_min, "Drop nodes scoring below this");
  pp->add_option("--edge-score-min", post.cfg.edge_score_min, "Drop edges scoring below this");
  pp->add_option("--max-span-fraction", post.cfg.max_span_fraction,
                 "Drop edges longer than this fraction of the smaller image side");
  pp->add_option("--extent", post.extent, "Image width,height in meters (default: graph frame)");

  RasterizeArgs ras;
  auto* rz = app.add_subcommand("rasterize", "Render a graph into a BVR1 raster");
  rz->add_option("--graph", ras.graph, "Input .lgraph.json")->required();
  rz->add_option("--out", ras.out, "Output .bvr")->required();
  rz->add_option("--resolution", ras.resolution, "Meters per pixel");
  rz->add_option("--lane-width", ras.lane_width, "Lane diameter in meters");
  rz->add_flag("--centerline", ras.centerline, "Add 'distance' and 'centerline' channels");
  rz->add_flag("--direction", ras.direction, "Add the 'dir' channel from edge headings");
  rz->add_option("--vehicles", ras.vehicles, "JSON list of boxes; adds the 'vehicles' channel");

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "Score predicted graphs against ground truth");
  v->add_option("--gt", ev.gt, "Ground-truth file or directory")->required();
  v->add_option("--pred", ev.pred, "Prediction file or directory")->required();
  v->add_option("--metrics", ev.metrics, "Comma-separated subset of apls,chamfer,overlap,dir");
  v->add_option("--match-radius", ev.cfg.match_radius_m, "Node and edge matching radius in meters");
  v->add_option("--resolution", ev.cfg.resolution, "Overlap raster resolution in m/px");
  v->add_option("--lane-width", ev.cfg.lane_width_m, "Overlap lane diameter in meters");
  v->add_flag("--respect-direction", ev.cfg.respect_direction, "Shortest paths follow edge direction");
  v->add_flag("--symmetric", ev.cfg.symmetric_apls, "Average APLS over both directions");
  v->add_option("--gt-name", ev.gt_name, "Only use ground-truth files with this name, keyed by directory");
  v->add_option("--pred-name", ev.pred_name, "Only use prediction files with this name (default: --gt-name)");
  v->add_option("--out", ev.out, "Report JSON path (standard output when empty)");
  v->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);

  LowzArgs lz;
  auto* l = app.add_subcommand("lowz", "Keep the lowest point per ground cell");
  l->add_option("--points", lz.points, "CSV with header x_m,y_m,z_m,intensity")->required();
  l->add_option("--out", lz.out, "Output CSV")->required();
  l->add_option("--cell", lz.cell, "Cell size in meters");
  l->add_option("--origin", lz.origin, "Grid origin x,y in meters");

  try {
    std::vector<std::string> reversed_args(args.rbegin(), args.rend());
    app.parse(reversed_args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (r->parsed()) return cmd_resample(res, out);
    if (p->parsed()) return cmd_project(proj, out);
    if (e->parsed()) return cmd_estimate(est, out);
    if (d->parsed()) return cmd_direction(dir, out);
    if (pp->parsed()) return cmd_postprocess(post, out);
    if (rz->parsed()) return cmd_rasterize(ras, out);
    if (v->parsed()) return cmd_eval(ev, out);
    if (l->parsed()) return cmd_lowz(lz, out);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace lanegraph::cli
