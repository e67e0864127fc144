#include <doctest.h>

#include <cmath>

#include "lanegraph/error.hpp"
#include "lanegraph/metrics.hpp"
#include "oracles.hpp"

using namespace lanegraph;

namespace {

const Frame kFrame{0, 0, 51.2, 51.2};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

LaneGraph abc(bool with_bc) {
  std::vector<LaneSegment> edges{{0, 1, 1, true}};
  if (with_bc) edges.push_back({1, 2, 1, true});
  return build_graph({{0, 0, 0, 1}, {1, 2, 0, 1}, {2, 4, 0, 1}}, edges, kFrame);
}

LaneGraph flip_some(const LaneGraph& g, auto&& pred) {
  std::vector<LaneSegment> edges;
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    auto e = g.edges()[i];
    if (pred(i)) std::swap(e.src, e.dst);
    edges.push_back(e);
  }
  return build_graph(g.nodes(), edges, g.frame());
}

}  // namespace

TEST_CASE("node matching") {
  const LaneGraph gt = build_graph({{0, 0, 0, 1}, {1, 10, 0, 1}}, {}, kFrame);
  const LaneGraph pred = build_graph({{5, 0.5, 0, 1}, {6, 1, 0, 1}, {7, 30, 0, 1}}, {}, kFrame);
  const auto m = match_nodes(gt, pred, 4.0);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});

  oracle::Rng rng(401);
  for (int trial = 0; trial < 100; ++trial) {
    oracle::GraphOptions opts;
    opts.extent = 20;
    const LaneGraph a = oracle::random_graph(rng, opts);
    const LaneGraph b = oracle::perturbed_graph(rng, a, 3.0, 20);
    const double radius = oracle::uniform(rng, 0.5, 5.0);
    const auto ref = oracle::brute_matching(a, b, radius);
    const auto got = match_nodes(a, b, radius);
    std::vector<std::ptrdiff_t> partner(a.nodes().size(), -1);
    std::vector<int> used(b.nodes().size(), 0);
    for (auto [g, p] : got.pairs) {
      partner[g] = static_cast<std::ptrdiff_t>(p);
      ++used[p];
      CHECK(distance(a.nodes()[g].position(), b.nodes()[p].position()) <= radius);
    }
    for (int u : used) CHECK(u <= 1);
    CHECK(partner == ref);
  }
}

TEST_CASE("apls") {
  CHECK(apls(abc(true), abc(false)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(apls(abc(true), abc(true)) == 1.0);
  CHECK(apls(abc(true), build_graph({}, {}, kFrame)) == 0.0);
  CHECK(code_of([] { apls(build_graph({}, {}, kFrame), abc(true)); }) == ErrorCode::EmptyGroundTruth);
  const LaneGraph lonely = build_graph({{0, 1, 1, 1}}, {}, kFrame);
  CHECK(apls_detail(lonely, lonely).evaluated_pairs == 0);
  CHECK(apls(lonely, lonely) == 1.0);

  SUBCASE("brute-force reference on random pairs") {
    oracle::Rng rng(403);
    for (int trial = 0; trial < 200; ++trial) {
      oracle::GraphOptions opts;
      opts.directed = trial % 2 == 0;
      opts.extent = 30.0;
      const LaneGraph gt = oracle::random_graph(rng, opts);
      const LaneGraph pred = trial % 5 == 0 ? oracle::random_graph(rng, opts) : oracle::perturbed_graph(rng, gt, 2.0, 30.0);
      for (const bool respect : {false, true}) {
        const double got = apls(gt, pred, 4.0, respect);
        CHECK(std::abs(got - oracle::brute_apls(gt, pred, 4.0, respect)) <= 1e-9);
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
      }
      const double sym = apls_symmetric(gt, pred);
      CHECK(std::abs(sym - 0.5 * (oracle::brute_apls(gt, pred, 4.0, false) + oracle::brute_apls(pred, gt, 4.0, false))) <=
            1e-9);
    }
  }
  SUBCASE("identity and edge deletion") {
    oracle::Rng rng(405);
    for (int trial = 0; trial < 100; ++trial) {
      oracle::GraphOptions opts;
      opts.min_nodes = 2;
      const LaneGraph g = oracle::random_graph(rng, opts);
      CHECK(apls(g, g) == 1.0);
      if (g.edges().empty()) continue;
      std::vector<LaneSegment> fewer = g.edges();
      fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(oracle::pick(rng, fewer.size())));
      CHECK(apls(g, build_graph(g.nodes(), fewer, g.frame())) <= 1.0);
    }
  }
}

TEST_CASE("chamfer") {
  const std::vector<Point2> x{{0, 0}};
  const std::vector<Point2> y{{3, 4}};
  CHECK(chamfer(x, y) == 50.0);
  CHECK(code_of([&] { chamfer(x, {}); }) == ErrorCode::EmptySet);
  oracle::Rng rng(407);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point2> a(1 + oracle::pick(rng, 200));
    std::vector<Point2> b(1 + oracle::pick(rng, 200));
    for (auto& p : a) p = {oracle::uniform(rng, 0, 50), oracle::uniform(rng, 0, 50)};
    for (auto& p : b) p = {oracle::uniform(rng, 0, 50), oracle::uniform(rng, 0, 50)};
    const double ref = oracle::brute_chamfer(a, b);
    const double got = chamfer(a, b);
    CHECK(std::abs(got - ref) <= 1e-9 * std::max(1.0, ref));
    CHECK(chamfer(b, a) == doctest::Approx(got).epsilon(1e-12));
    CHECK(chamfer(a, a) == 0.0);
    std::vector<Point2> a2;
    std::vector<Point2> b2;
    for (auto p : a) a2.push_back(p * 2.0);
    for (auto p : b) b2.push_back(p * 2.0);
    CHECK(chamfer(a2, b2) == doctest::Approx(4.0 * got).epsilon(1e-12));
  }
}

TEST_CASE("overlap scores") {
  const LaneGraph g = abc(true);
  const auto same = overlap_scores(g, g);
  CHECK(same.f1 == 1.0);
  CHECK(same.iou == 1.0);
  const LaneGraph far = build_graph({{0, 40, 40, 1}, {1, 45, 40, 1}}, {{0, 1, 1, false}}, kFrame);
  const auto apart = overlap_scores(g, far);
  CHECK(apart.f1 == 0.0);
  CHECK(apart.iou == 0.0);
  const LaneGraph empty = build_graph({}, {}, kFrame);
  CHECK(overlap_scores(empty, empty).f1 == 1.0);
  CHECK(overlap_scores(empty, empty).iou == 1.0);
  CHECK(overlap_scores(g, empty).iou == 0.0);
  CHECK(code_of([&] { overlap_scores(g, build_graph({}, {}, Frame{0, 0, 20, 20})); }) == ErrorCode::FrameMismatch);

  oracle::Rng rng(409);
  for (int trial = 0; trial < 30; ++trial) {
    oracle::GraphOptions opts;
    opts.extent = 20.0;
    const LaneGraph a = oracle::random_graph(rng, opts);
    const LaneGraph b = oracle::perturbed_graph(rng, a, 1.5, 20.0);
    const auto s = overlap_scores(a, b, 0.2, 1.8);
    const std::size_t w = 100;
    const auto ma = oracle::brute_lane_mask(a, 0.2, 1.8, w, w);
    const auto mb = oracle::brute_lane_mask(b, 0.2, 1.8, w, w);
    std::size_t na = 0, nb = 0, both = 0;
    for (std::size_t i = 0; i < ma.size(); ++i) {
      na += ma[i];
      nb += mb[i];
      both += ma[i] & mb[i];
    }
    CHECK(s.gt_pixels == na);
    CHECK(s.pred_pixels == nb);
    CHECK(s.intersection == both);
    if (na + nb > 0) {
      CHECK(s.f1 == 2.0 * static_cast<double>(both) / static_cast<double>(na + nb));
      CHECK(s.iou == static_cast<double>(both) / static_cast<double>(na + nb - both));
      CHECK(std::abs(s.f1 - 2.0 * s.iou / (1.0 + s.iou)) <= 1e-12);
      CHECK(s.iou <= s.f1);
    }
  }
}

TEST_CASE("direction accuracy") {
  oracle::Rng rng(411);
  for (int trial = 0; trial < 50; ++trial) {
    oracle::GraphOptions opts;
    opts.directed = true;
    opts.min_nodes = 2;
    const LaneGraph g = oracle::random_graph(rng, opts);
    if (g.edges().empty()) continue;
    CHECK(direction_accuracy(g, g) == 1.0);
    CHECK(direction_accuracy(g, reversed(g)) == 0.0);
  }
  // Two parallel lanes, far apart, one flipped.
  const LaneGraph gt = build_graph({{0, 5, 5, 1}, {1, 9, 5, 1}, {2, 5, 30, 1}, {3, 9, 30, 1}},
                                   {{0, 1, 1, true}, {2, 3, 1, true}}, kFrame);
  CHECK(direction_accuracy(gt, flip_some(gt, [](std::size_t i) { return i == 1; })) == 0.5);
  const LaneGraph undirected =
      build_graph(gt.nodes(), {{0, 1, 1, false}, {2, 3, 1, true}}, kFrame);
  const auto d = direction_accuracy_detail(gt, undirected);
  CHECK(d.value == 0.5);
  CHECK(d.evaluated_edges == 2);
  CHECK(direction_accuracy(gt, build_graph({}, {}, kFrame)) == 0.0);
  const LaneGraph elsewhere = build_graph({{0, 40, 40, 1}, {1, 44, 40, 1}}, {{0, 1, 1, true}}, kFrame);
  CHECK(direction_accuracy(gt, elsewhere) == 0.0);
}

TEST_CASE("evaluate_all and mean_report") {
  oracle::Rng rng(413);
  oracle::GraphOptions opts;
  opts.directed = true;
  opts.min_nodes = 5;
  LaneGraph g = oracle::random_graph(rng, opts);
  while (g.edges().empty()) g = oracle::random_graph(rng, opts);
  const MetricReport self = evaluate_all(g, g);
  CHECK(self.apls == 1.0);
  CHECK(self.chamfer_m2 == 0.0);
  CHECK(self.f1 == 1.0);
  CHECK(self.iou == 1.0);
  CHECK(self.dir_accuracy == 1.0);
  const MetricReport none = evaluate_all(g, build_graph({}, {}, g.frame()));
  CHECK(none.apls == 0.0);
  CHECK_FALSE(none.chamfer_m2.has_value());
  CHECK(none.f1 == 0.0);
  CHECK(none.iou == 0.0);
  CHECK(none.dir_accuracy == 0.0);
  MetricsConfig only;
  only.chamfer = only.overlap = only.direction = false;
  const MetricReport partial = evaluate_all(g, g, only);
  CHECK(partial.apls.has_value());
  CHECK_FALSE(partial.f1.has_value());

  const std::vector<MetricReport> reports{self, none};
  const MeanReport mean = mean_report(reports);
  CHECK(mean.samples == 2);
  CHECK(mean.apls == 0.5);
  CHECK(mean.chamfer_m2 == 0.0);
  CHECK(mean.chamfer_n == 1);
  CHECK(mean.f1 == 0.5);
  CHECK(mean.dir_n == 2);
  CHECK_FALSE(mean_report({}).apls.has_value());
}
