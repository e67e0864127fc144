#include <doctest.h>

#include <cmath>

#include "lanegraph/error.hpp"
#include "lanegraph/graph.hpp"
#include "oracles.hpp"

using namespace lanegraph;

namespace {

const Frame kFrame{0.0, 0.0, 51.2, 51.2};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

LaneGraph chain(std::vector<Point2> pts, bool directed = false) {
  std::vector<AnchorNode> nodes;
  std::vector<LaneSegment> edges;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    nodes.push_back({i, pts[i].x, pts[i].y, 1.0});
    if (i > 0) edges.push_back({i - 1, i, 1.0, directed});
  }
  return build_graph(nodes, edges, kFrame);
}

}  // namespace

TEST_CASE("build_graph rejects malformed input") {
  const std::vector<AnchorNode> two{{1, 1, 1, 1}, {2, 3, 1, 1}};
  CHECK(code_of([&] { build_graph({{1, 1, 1, 1}, {1, 2, 2, 1}}, {}, kFrame); }) == ErrorCode::DuplicateNodeId);
  CHECK(code_of([&] { build_graph(two, {{1, 9, 1, false}}, kFrame); }) == ErrorCode::DanglingEdge);
  CHECK(code_of([&] { build_graph(two, {{1, 1, 1, false}}, kFrame); }) == ErrorCode::SelfLoop);
  CHECK(code_of([&] { build_graph({{1, 60, 1, 1}}, {}, kFrame); }) == ErrorCode::OutOfFrame);
  CHECK(code_of([&] { build_graph({{1, NAN, 1, 1}}, {}, kFrame); }) == ErrorCode::NonFiniteCoordinate);
  CHECK(code_of([&] { build_graph({{1, 1, 1, 1.5}}, {}, kFrame); }) == ErrorCode::InvalidScore);
  CHECK(code_of([&] { build_graph(two, {{1, 2, -0.1, false}}, kFrame); }) == ErrorCode::InvalidScore);
  CHECK(code_of([&] { build_graph({}, {}, Frame{0, 0, -1, 5}); }) == ErrorCode::InvalidFrame);
  CHECK(code_of([&] { build_graph(two, {{1, 2, 1, false}, {2, 1, 1, false}}, kFrame); }) == ErrorCode::DuplicateEdge);
  CHECK(code_of([&] { build_graph(two, {{1, 2, 1, true}, {1, 2, 1, true}}, kFrame); }) == ErrorCode::DuplicateEdge);
  CHECK(code_of([&] { build_graph(two, {{1, 2, 1, true}, {2, 1, 1, false}}, kFrame); }) == ErrorCode::DuplicateEdge);
  // Opposite directed edges form a legal two-way pair.
  CHECK(build_graph(two, {{1, 2, 1, true}, {2, 1, 1, true}}, kFrame).edges().size() == 2);
  // Frame bounds are inclusive.
  CHECK_NOTHROW(build_graph({{1, 0, 0, 1}, {2, 51.2, 51.2, 1}}, {}, kFrame));
}

TEST_CASE("lookups") {
  const LaneGraph g = chain({{0, 0}, {3, 4}});
  CHECK(g.index_of(1) == 1);
  CHECK(g.contains(0));
  CHECK_FALSE(g.contains(7));
  CHECK(code_of([&] { (void)g.index_of(7); }) == ErrorCode::UnknownNode);
  CHECK(g.edge_length(g.edges()[0]) == 5.0);
  CHECK(g.max_id() == 1);
  CHECK_FALSE(LaneGraph{}.max_id().has_value());
}

TEST_CASE("resample splits a 5 m edge into three equal parts") {
  const LaneGraph g = chain({{10, 10}, {15, 10}}, true);
  const LaneGraph r = resample(g, 2.0);
  REQUIRE(r.nodes().size() == 4);
  REQUIRE(r.edges().size() == 3);
  CHECK(r.nodes()[0] == g.nodes()[0]);
  CHECK(r.nodes()[1] == g.nodes()[1]);
  CHECK(r.nodes()[2].id == 2);
  CHECK(r.nodes()[3].id == 3);
  for (const auto& e : r.edges()) {
    CHECK(r.edge_length(e) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(e.directed);
  }
  // The path still runs from the original source to the original target.
  CHECK(shortest_path_len(r, 0, 1, true).value() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK_FALSE(shortest_path_len(r, 1, 0, true).has_value());
}

TEST_CASE("resample keeps short edges and exact multiples") {
  CHECK(resample(chain({{0, 0}, {2, 0}}), 2.0).edges().size() == 1);
  CHECK(resample(chain({{0, 0}, {4, 0}}), 2.0).edges().size() == 2);
  CHECK(resample(chain({{0, 0}, {1.5, 0}}), 2.0).nodes().size() == 2);
  CHECK(code_of([] { resample(LaneGraph{}, 0.0); }) == ErrorCode::NonPositiveSpacing);
}

TEST_CASE("resample properties on random graphs") {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    oracle::GraphOptions opts;
    opts.random_scores = true;
    opts.directed = trial % 2 == 0;
    const LaneGraph g = oracle::random_graph(rng, opts);
    const double spacing = oracle::uniform(rng, 0.5, 6.0);
    const LaneGraph r = resample(g, spacing);
    for (const auto& e : r.edges()) CHECK(r.edge_length(e) <= spacing + 1e-9);
    CHECK(std::abs(total_length(r) - total_length(g)) <= 1e-9);
    for (const auto& n : g.nodes()) CHECK(r.node(n.id) == n);
    std::size_t expected = 0;
    for (const auto& e : g.edges()) {
      expected += static_cast<std::size_t>(std::ceil((g.edge_length(e) - 1e-9) / spacing));
    }
    CHECK(r.edges().size() == expected);
    // Scores and orientation survive.
    for (const auto& e : r.edges()) {
      bool found = false;
      for (const auto& o : g.edges()) found = found || (o.score == e.score && o.directed == e.directed);
      CHECK(found);
    }
  }
}

TEST_CASE("shortest paths") {
  const LaneGraph g = build_graph({{0, 0, 0, 1}, {1, 3, 0, 1}, {2, 3, 4, 1}, {3, 40, 40, 1}},
                                  {{0, 1, 1, true}, {1, 2, 1, true}, {0, 2, 1, true}}, kFrame);
  CHECK(shortest_path_len(g, 0, 2, false).value() == 5.0);
  CHECK(shortest_path_len(g, 2, 0, false).value() == 5.0);
  CHECK_FALSE(shortest_path_len(g, 2, 0, true).has_value());
  CHECK_FALSE(shortest_path_len(g, 0, 3, false).has_value());
  CHECK(shortest_path_len(g, 3, 3, true).value() == 0.0);
  CHECK(code_of([&] { (void)shortest_path_len(g, 0, 99, false); }) == ErrorCode::UnknownNode);
}

TEST_CASE("Dijkstra agrees with Floyd-Warshall") {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    oracle::GraphOptions opts;
    opts.directed = trial % 2 == 1;
    opts.max_nodes = 20;
    const LaneGraph g = oracle::random_graph(rng, opts);
    for (const bool respect : {false, true}) {
      const auto fw = oracle::floyd_warshall(g, respect);
      const auto ap = all_pairs_shortest_paths(g, respect);
      for (std::size_t i = 0; i < fw.size(); ++i) {
        for (std::size_t j = 0; j < fw.size(); ++j) {
          if (std::isinf(fw[i][j])) {
            CHECK(ap[i][j] == kUnreachable);
          } else {
            CHECK(std::abs(ap[i][j] - fw[i][j]) <= 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("reversed flips only directed edges") {
  const LaneGraph g = build_graph({{0, 0, 0, 1}, {1, 1, 0, 1}, {2, 2, 0, 1}},
                                  {{0, 1, 0.5, true}, {1, 2, 0.7, false}}, kFrame);
  const LaneGraph r = reversed(g);
  CHECK(r.edges()[0] == LaneSegment{1, 0, 0.5, true});
  CHECK(r.edges()[1] == LaneSegment{1, 2, 0.7, false});
  CHECK(reversed(r) == g);
}

TEST_CASE("graph documents") {
  SUBCASE("defaults for missing score and directed") {
    const LaneGraph g = load_graph(
        R"({"frame":{"origin_x_m":0,"origin_y_m":0,"width_m":10,"height_m":10},)"
        R"("nodes":[{"id":3,"x_m":1,"y_m":2},{"id":4,"x_m":5,"y_m":2,"score":0.25}],)"
        R"("edges":[{"src":3,"dst":4}]})");
    CHECK(g.node(3).score == 1.0);
    CHECK(g.node(4).score == 0.25);
    CHECK(g.edges()[0].score == 1.0);
    CHECK_FALSE(g.edges()[0].directed);
  }
  SUBCASE("errors") {
    CHECK(code_of([] { load_graph("{"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { load_graph("[]"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { load_graph(R"({"frame":{"origin_x_m":0,"origin_y_m":0,"width_m":1,"height_m":1},"nodes":[{"id":-1,"x_m":0,"y_m":0}],"edges":[]})"); }) ==
          ErrorCode::ParseError);
    CHECK(code_of([] { load_graph(R"({"frame":{"origin_x_m":0,"origin_y_m":0,"width_m":1,"height_m":1},"nodes":[{"id":1,"x_m":"a","y_m":0}],"edges":[]})"); }) ==
          ErrorCode::ParseError);
    CHECK(code_of([] { load_graph(R"({"frame":{"origin_x_m":0,"origin_y_m":0,"width_m":1,"height_m":1},"nodes":[],"edges":[{"src":1,"dst":2}]})"); }) ==
          ErrorCode::DanglingEdge);
  }
  SUBCASE("bit-exact round trip") {
    oracle::Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      oracle::GraphOptions opts;
      opts.random_scores = true;
      opts.directed = trial % 3 == 0;
      opts.min_nodes = 0;
      const LaneGraph g = oracle::random_graph(rng, opts);
      const std::string doc = save_graph(g);
      const LaneGraph back = load_graph(doc);
      CHECK(back == g);
      CHECK(save_graph(back) == doc);
    }
  }
}
