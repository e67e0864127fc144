#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "lanegraph/error.hpp"
#include "lanegraph/estimators.hpp"
#include "lanegraph/metrics.hpp"
#include "lanegraph/synth.hpp"
#include "oracles.hpp"

using namespace lanegraph;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

using EdgeSet = std::set<std::pair<NodeId, NodeId>>;

}  // namespace

TEST_CASE("b2 nearest-neighbor graph") {
  SUBCASE("examples") {
    CHECK(oracle::undirected_edge_set(b2_knn_graph(std::vector<Point2>{{0, 0}, {3, 1}})) == EdgeSet{{0, 1}});
    CHECK(oracle::undirected_edge_set(b2_knn_graph(std::vector<Point2>{{0, 0}, {2, 0}, {4, 0}})) ==
          EdgeSet{{0, 1}, {1, 2}, {0, 2}});
    CHECK(oracle::undirected_edge_set(b2_knn_graph(std::vector<Point2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}})) ==
          EdgeSet{{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    CHECK(code_of([] { b2_knn_graph(std::vector<Point2>{{1, 1}, {1, 1}}); }) == ErrorCode::TooFewAnchors);
    CHECK(code_of([] { b2_knn_graph(std::vector<Point2>{{1, 1}}); }) == ErrorCode::TooFewAnchors);
    for (const auto& e : b2_knn_graph(std::vector<Point2>{{0, 0}, {3, 1}}).edges()) CHECK_FALSE(e.directed);
  }
  SUBCASE("random anchors match enumeration, permutation and degree") {
    oracle::Rng rng(601);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 3 + oracle::pick(rng, 30);
      std::vector<AnchorNode> anchors;
      for (std::size_t i = 0; i < n; ++i) {
        anchors.push_back({i * 3 + 1, oracle::uniform(rng, 0, 50), oracle::uniform(rng, 0, 50), 1.0});
      }
      const Frame frame{0, 0, 50, 50};
      const LaneGraph g = b2_knn_graph(anchors, frame);
      const EdgeSet edges = oracle::undirected_edge_set(g);
      CHECK(edges == oracle::brute_knn_edges(anchors));
      CHECK(edges.size() == g.edges().size());
      std::vector<std::size_t> degree(n, 0);
      for (const auto& e : g.edges()) {
        ++degree[g.index_of(e.src)];
        ++degree[g.index_of(e.dst)];
      }
      for (auto d : degree) CHECK(d >= 2);
      std::shuffle(anchors.begin(), anchors.end(), rng);
      CHECK(oracle::undirected_edge_set(b2_knn_graph(anchors, frame)) == edges);
    }
  }
  SUBCASE("collinear equally spaced anchors score full APLS") {
    for (std::size_t n : {2u, 3u, 5u, 12u}) {
      std::vector<AnchorNode> nodes;
      std::vector<LaneSegment> chain;
      for (std::size_t i = 0; i < n; ++i) {
        nodes.push_back({i, 2.0 + 2.0 * static_cast<double>(i), 10.0, 1.0});
        if (i > 0) chain.push_back({i - 1, i, 1.0, false});
      }
      const Frame frame{0, 0, 51.2, 51.2};
      const LaneGraph gt = build_graph(nodes, chain, frame);
      CHECK(apls(gt, b2_knn_graph(nodes, frame)) == 1.0);
    }
  }
}

TEST_CASE("b1 skeleton graph") {
  SUBCASE("all-zero input") {
    const std::vector<float> zero(100, 0.0f);
    const SkeletonGraph s = b1_skeleton_graph(zero, 10, 10, 0.2);
    CHECK(s.empty_mask);
    CHECK(s.graph.nodes().empty());
  }
  SUBCASE("one pixel line") {
    std::vector<std::uint8_t> mask(30 * 7, 0);
    for (std::size_t c = 3; c < 27; ++c) mask[3 * 30 + c] = 1;
    SkeletonGraphOptions opts;
    opts.rdp_epsilon_px = 1.0;
    const SkeletonGraph s = skeleton_graph_from_mask(mask, 30, 7, 0.5, opts);
    REQUIRE(s.graph.nodes().size() == 2);
    REQUIRE(s.graph.edges().size() == 1);
    CHECK(s.endpoints == 2);
    CHECK(s.junctions == 0);
    CHECK(s.graph.nodes()[0].x_m == 3.5 * 0.5);
    CHECK(s.graph.nodes()[0].y_m == 3.5 * 0.5);
    CHECK(s.graph.nodes()[1].x_m == 26.5 * 0.5);
    CHECK(s.graph.frame().width_m == 15.0);
  }
  SUBCASE("plus sign") {
    std::vector<std::uint8_t> mask(21 * 21, 0);
    for (std::size_t i = 2; i < 19; ++i) {
      mask[10 * 21 + i] = 1;
      mask[i * 21 + 10] = 1;
    }
    const SkeletonGraph s = skeleton_graph_from_mask(mask, 21, 21, 0.2);
    CHECK(s.junctions == 1);
    CHECK(s.endpoints == 4);
    CHECK(s.graph.nodes().size() == 5);
    CHECK(s.graph.edges().size() == 4);
    std::size_t at_center = 0;
    for (const auto& n : s.graph.nodes()) {
      if (n.x_m == doctest::Approx(10.5 * 0.2) && n.y_m == doctest::Approx(10.5 * 0.2)) ++at_center;
    }
    CHECK(at_center == 1);
  }
  SUBCASE("thick plus sign thins to the same census") {
    std::vector<std::uint8_t> mask(41 * 41, 0);
    for (std::size_t i = 3; i < 38; ++i) {
      for (std::size_t k = 18; k < 23; ++k) {
        mask[k * 41 + i] = 1;
        mask[i * 41 + k] = 1;
      }
    }
    const SkeletonGraph s = skeleton_graph_from_mask(mask, 41, 41, 0.2);
    CHECK(s.junctions == 1);
    CHECK(s.endpoints == 4);
  }
  SUBCASE("ring") {
    std::vector<std::uint8_t> mask(20 * 20, 0);
    for (std::size_t i = 4; i < 16; ++i) {
      mask[4 * 20 + i] = mask[15 * 20 + i] = mask[i * 20 + 4] = mask[i * 20 + 15] = 1;
    }
    const SkeletonGraph s = skeleton_graph_from_mask(mask, 20, 20, 0.2);
    CHECK(s.graph.edges().size() >= 3);
    for (const auto& row : all_pairs_shortest_paths(s.graph, false)) {
      for (double d : row) CHECK(d != kUnreachable);
    }
  }
  SUBCASE("nodes sit on skeleton pixel centers") {
    oracle::Rng rng(603);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t w = 10 + oracle::pick(rng, 50);
      const std::size_t h = 10 + oracle::pick(rng, 50);
      std::vector<std::uint8_t> mask(w * h, 0);
      for (std::size_t k = 1 + oracle::pick(rng, 5); k > 0; --k) {
        const std::size_t r0 = oracle::pick(rng, h);
        const std::size_t c0 = oracle::pick(rng, w);
        const std::size_t r1 = std::min(h, r0 + 1 + oracle::pick(rng, 30));
        const std::size_t c1 = std::min(w, c0 + 1 + oracle::pick(rng, 4));
        for (std::size_t r = r0; r < r1; ++r) {
          for (std::size_t c = c0; c < c1; ++c) mask[r * w + c] = 1;
        }
      }
      const double res = 0.25;
      const SkeletonGraph s = skeleton_graph_from_mask(mask, w, h, res);
      for (const auto& n : s.graph.nodes()) {
        const auto col = static_cast<std::size_t>(n.x_m / res);
        const auto row = static_cast<std::size_t>(n.y_m / res);
        CHECK(n.x_m == (static_cast<double>(col) + 0.5) * res);
        CHECK(n.y_m == (static_cast<double>(row) + 0.5) * res);
        CHECK(s.skeleton[row * w + col] == 1);
      }
    }
  }
  SUBCASE("noise-free straight scene") {
    SceneSpec spec;
    spec.layout = Layout::Straight;
    spec.seed = 11;
    const Scene scene = gen_scene(spec);
    const auto& cl = scene.centerline.channel("centerline").f32();
    SkeletonGraphOptions opts;
    opts.origin = {spec.frame.origin_x_m, spec.frame.origin_y_m};
    const SkeletonGraph s = b1_skeleton_graph(cl, scene.centerline.width(), scene.centerline.height(), spec.resolution, opts);
    const auto overlap = overlap_scores(scene.gt, s.graph, spec.resolution, spec.lane_width_m);
    CHECK(overlap.f1 >= 0.95);
  }
}

TEST_CASE("prediction files") {
  const ScoredProposals p{{{0, 1.5, 2.25, 0.75}, {4, 1.0 / 3.0, 7, 1}}, {{0, 4, 0.125}}};
  const std::string doc = save_predictions(p);
  CHECK(load_predictions(doc) == p);
  CHECK(save_predictions(load_predictions(doc)) == doc);
  CHECK(code_of([] { load_predictions(R"({"anchors":[{"id":1,"x_m":0,"y_m":0,"score":1}],"connections":[{"src":1,"dst":2,"score":1}]})"); }) ==
        ErrorCode::DanglingConnection);
  CHECK(code_of([] { load_predictions(R"({"anchors":[{"id":1,"x_m":0,"y_m":0,"score":2}],"connections":[]})"); }) ==
        ErrorCode::InvalidScore);
  CHECK(code_of([] { load_predictions(R"({"anchors":[{"id":1,"x_m":0,"y_m":0},{"id":1,"x_m":1,"y_m":0}],"connections":[]})"); }) ==
        ErrorCode::DuplicateNodeId);
  CHECK(code_of([] { load_predictions("{\"anchors\":"); }) == ErrorCode::ParseError);

  oracle::Rng rng(605);
  for (int trial = 0; trial < 100; ++trial) {
    oracle::GraphOptions opts;
    opts.random_scores = true;
    opts.min_nodes = 0;
    const LaneGraph g = oracle::random_graph(rng, opts);
    const ScoredProposals props = graph_to_proposals(g);
    const std::string text = save_predictions(props);
    CHECK(save_predictions(load_predictions(text)) == text);
    CHECK(proposals_to_graph(load_predictions(text), g.frame()) == g);
  }
}
