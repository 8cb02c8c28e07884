#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "stepnet/analysis.hpp"
#include "stepnet/construct.hpp"
#include "stepnet/geometry.hpp"
#include "stepnet/scenarios.hpp"
#include "support/test_oracles.hpp"

using namespace stepnet;

TEST_CASE("transition classification on an open two-plane chain") {
  auto hs = wedge_fixture();
  const double eps = 0.1;
  auto at = [&](double x, double y) {
    return classify_transition(Vec2{x, y}, hs, eps, ChainTopology::Open);
  };

  CHECK(at(0.5, 0.5).kind == TransitionKind::OmegaHat1);
  CHECK(at(0.6, 0.5).kind == TransitionKind::OmegaHat1);  // boundary: not positive
  CHECK_FALSE(at(0.5, 0.5).in_strip());

  auto u1 = at(0.65, 0.55);
  CHECK(u1.kind == TransitionKind::Upsilon1);
  CHECK(u1.index == 1);
  CHECK(u1.in_strip());
  auto u1b = at(0.55, 0.65);
  CHECK(u1b.kind == TransitionKind::Upsilon1);
  CHECK(u1b.index == 2);

  auto u2 = at(0.62, 0.63);
  CHECK(u2.kind == TransitionKind::Upsilon2);
  CHECK(u2.index == 1);

  CHECK(at(0.65, 0.65).kind == TransitionKind::OmegaHat3);  // positives sum past eps
  CHECK(at(0.8, 0.5).kind == TransitionKind::OmegaHat3);    // one big overshoot

  CHECK_THROWS_AS(classify_transition(Vec2{0, 0}, {}, eps), std::invalid_argument);
  CHECK_THROWS_AS(classify_transition(Vec2{0, 0}, hs, 0.0), std::invalid_argument);
}

TEST_CASE("closed chains pair the last face with the first") {
  // Equilateral triangle; vertex 0 joins edge 2 (coming in) and edge 0
  // (going out).
  const double pi = std::numbers::pi;
  std::vector<Vec2> verts;
  for (int k = 0; k < 3; ++k) {
    const double a = pi / 2 + 2 * pi * k / 3;
    verts.push_back({std::cos(a), std::sin(a)});
  }
  auto tri = SimplePolygon::from_vertices(verts);
  auto faces = tri.edge_hyperplanes();
  REQUIRE(faces.size() == 3);

  const double eps = 0.2;
  // Just outside vertex 0, in the quadrant where faces 2 and 0 are both
  // barely positive.
  Vec2 probe = 1.05 * verts[0];
  CHECK(faces[0].signed_eval(probe) > 0.0);
  CHECK(faces[2].signed_eval(probe) > 0.0);

  auto closed = classify_transition(probe, faces, eps, ChainTopology::Closed);
  CHECK(closed.kind == TransitionKind::Upsilon2);
  CHECK(closed.index == 3);  // the cyclic pair (3, 1), reported as 3

  // An open chain has no (3, 1) adjacency: the same point is unclassifiable.
  auto open = classify_transition(probe, faces, eps, ChainTopology::Open);
  CHECK(open.kind == TransitionKind::Unknown);
}

TEST_CASE("non-adjacent positives are flagged as unknown") {
  std::vector<Hyperplane> chain{Hyperplane({1.0, 0.0}, 0.2),
                                Hyperplane({0.0, 1.0}, 0.6),
                                Hyperplane({1.0, 0.0}, 0.8)};
  // At (0.85, 0.5): s = (0.65, -0.1, 0.05); with a large eps both positives
  // stay under the cap but planes 1 and 3 are not neighbours.
  auto label = classify_transition(Vec2{0.85, 0.5}, chain, 2.0, ChainTopology::Open);
  CHECK(label.kind == TransitionKind::Unknown);
  CHECK_THROWS_AS(
      predicted_residual(Vec2{0.85, 0.5}, chain, 2.0,
                         RegionSpec::outside_hyperplanes(chain, Box::unit(2)),
                         ChainTopology::Open),
      std::runtime_error);
}

TEST_CASE("the predicted residual matches the built network everywhere") {
  Box box = Box::unit(2);

  // Open wedge.
  {
    auto hs = wedge_fixture();
    const double eps = 0.1;
    auto net = convex_indicator(hs, eps);
    auto chi = RegionSpec::outside_hyperplanes(hs, box);
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::size_t strip_hits = 0;
    for (int i = 0; i < 40000; ++i) {
      Vec2 p{unif(rng), unif(rng)};
      const double want = predicted_residual(p, hs, eps, chi, ChainTopology::Open);
      double x[] = {p.x, p.y};
      const double actual = (chi.inside(x) ? 1.0 : 0.0) - net.eval2(p);
      CHECK(std::fabs(want - actual) < 1e-12);
      if (classify_transition(p, hs, eps).in_strip()) ++strip_hits;
    }
    CHECK(strip_hits > 2000);  // the strip was actually exercised
  }

  // Closed hexagon.
  {
    auto faces = polygonalize_circle_inscribed({0.5, 0.5}, 0.25, 6);
    const double eps = 0.04;
    auto net = convex_indicator(faces, eps);
    auto chi = RegionSpec::outside_hyperplanes(faces, box);
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> unif(0.1, 0.9);
    for (int i = 0; i < 40000; ++i) {
      Vec2 p{unif(rng), unif(rng)};
      const double want =
          predicted_residual(p, faces, eps, chi, ChainTopology::Closed);
      double x[] = {p.x, p.y};
      const double actual = (chi.inside(x) ? 1.0 : 0.0) - net.eval2(p);
      CHECK(std::fabs(want - actual) < 1e-12);
    }
  }
}

TEST_CASE("Monte Carlo norms converge to known values") {
  Box box = Box::unit(2);
  ScalarField half = [](std::span<const double> x) {
    return x[0] < 0.5 ? 1.0 : 0.0;
  };
  ScalarField zero = [](std::span<const double>) { return 0.0; };

  auto same = lp_error_mc(half, half, 1.0, box, 10000);
  CHECK(same.estimate == 0.0);
  CHECK(same.half_width_95 == 0.0);
  CHECK(same.method == ErrorMethod::Mc);
  CHECK(same.samples_or_resolution == 10000);

  auto l1 = lp_error_mc(half, zero, 1.0, box, 400000);
  CHECK(std::fabs(l1.estimate - 0.5) < 3.0 * l1.half_width_95);
  CHECK(l1.half_width_95 > 0.0);
  CHECK(l1.half_width_95 < 0.005);

  auto l2 = lp_error_mc(half, zero, 2.0, box, 400000);
  CHECK(std::fabs(l2.estimate - std::sqrt(0.5)) < 3.0 * l2.half_width_95);

  // Same target through the independent sampler.
  auto ref = oracle::mc_lp([&](std::span<const double> x) { return half(x); },
                           [&](std::span<const double> x) { return zero(x); },
                           1.0, box.lo, box.hi, 400000, 5);
  CHECK(std::fabs(ref.estimate - 0.5) < 4.0 * ref.sigma);

  CHECK_THROWS_AS(lp_error_mc(half, zero, 0.5, box, 100), std::invalid_argument);
  CHECK_THROWS_AS(lp_error_mc(half, zero, 1.0, box, 0), std::invalid_argument);
}

TEST_CASE("grid quadrature is exact for polynomials it can resolve") {
  Box line({0.0}, {1.0});
  ScalarField ident = [](std::span<const double> x) { return x[0]; };
  ScalarField zero = [](std::span<const double>) { return 0.0; };

  auto l1 = lp_error_grid(ident, zero, 1.0, line, 1000);
  CHECK(l1.estimate == doctest::Approx(0.5).epsilon(1e-12));  // midpoint exact on linear
  CHECK(l1.method == ErrorMethod::Grid);
  CHECK(l1.half_width_95 == 0.0);

  auto l2 = lp_error_grid(ident, zero, 2.0, line, 2000);
  CHECK(l2.estimate == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));

  Box square = Box::unit(2);
  ScalarField sum2 = [](std::span<const double> x) { return x[0] + x[1]; };
  auto flat = lp_error_grid(sum2, zero, 1.0, square, 400);
  CHECK(flat.estimate == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(lp_error_grid(ident, zero, 1.0, Box::unit(4), 8),
                  std::invalid_argument);
  CHECK_THROWS_AS(lp_error_grid(ident, zero, 1.0, line, 1), std::invalid_argument);
}

TEST_CASE("half-space closed form equals independent quadrature") {
  for (double eps : {0.1, 0.01}) {
    for (double p : {1.0, 2.0, 3.0}) {
      for (double section : {1.0, 2.5}) {
        auto exact = halfspace_lp_error_exact(eps, p, section);
        CHECK(exact.method == ErrorMethod::Exact2d);
        // The residual of the ramp is 1 - s/eps across the strip; integrate
        // |residual|^p with Simpson and rescale.
        const double integral =
            section * oracle::simpson(
                          [&](double s) { return std::pow(1.0 - s / eps, p); },
                          0.0, eps, 4000);
        CHECK(exact.estimate ==
              doctest::Approx(std::pow(integral, 1.0 / p)).epsilon(1e-9));
      }
    }
  }

  // And the formula matches a measured network, not just itself.
  const double eps = 0.05;
  auto net = halfspace_ramp(Hyperplane({1.0, 0.0}, 0.5), eps);
  ScalarField nf = [&](std::span<const double> x) { return net.eval(x); };
  ScalarField step = [](std::span<const double> x) {
    return x[0] > 0.5 ? 1.0 : 0.0;
  };
  for (double p : {1.0, 2.0}) {
    auto grid = lp_error_grid(nf, step, p, Box::unit(2), 600);
    auto exact = halfspace_lp_error_exact(eps, p);
    CHECK(std::fabs(grid.estimate - exact.estimate) < 2e-4);
  }

  CHECK_THROWS_AS(halfspace_lp_error_exact(-0.1, 1.0), std::invalid_argument);
}

TEST_CASE("strip measures match hand-computed areas") {
  // Wedge: two 0.6 x 0.1 rectangles plus the eps^2/2 corner triangle.
  auto wedge = wedge_fixture();
  auto wm = strip_measure_2d(wedge, 0.1, Box::unit(2), ChainTopology::Open, 2'000'000);
  CHECK(std::fabs(wm.estimate - 0.125) < 4.0 * wm.half_width_95 / 1.96);
  CHECK(wm.half_width_95 < 1e-3);

  // Hexagon: each edge band stops cot(60)*t short of the vertices, and the
  // corner cells give the area back: eps^2/sqrt(3) each way, so the total is
  // exactly perimeter * eps.
  const double eps = 0.04;
  auto faces = polygonalize_circle_inscribed({0.5, 0.5}, 0.25, 6);
  const double exact = 6.0 * 0.25 * eps;
  auto hm = strip_measure_2d(faces, eps, Box::unit(2), ChainTopology::Closed, 2'000'000);
  CHECK(std::fabs(hm.estimate - exact) < 4.0 * hm.half_width_95 / 1.96);

  CHECK_THROWS_AS(strip_measure_2d(wedge, 0.1, Box::unit(3)), std::invalid_argument);
  CHECK_THROWS_AS(strip_measure_2d(wedge, 0.1, Box::unit(2), ChainTopology::Open, 0),
                  std::invalid_argument);
}

TEST_CASE("the bound chain accepts true errors and rejects fabricated ones") {
  auto wedge = wedge_fixture();
  const double eps = 0.1;
  auto net = convex_indicator(wedge, eps);
  auto chi = RegionSpec::outside_hyperplanes(wedge, Box::unit(2));
  ScalarField nf = [&](std::span<const double> x) { return net.eval(x); };
  ScalarField cf = [&](std::span<const double> x) {
    return chi.inside(x) ? 1.0 : 0.0;
  };

  auto strip = strip_measure_2d(wedge, eps, Box::unit(2), ChainTopology::Open,
                                1'000'000);
  for (double p : {1.0, 2.0}) {
    auto report = lp_error_grid(nf, cf, p, Box::unit(2), 800);
    auto check = verify_bound(report, strip);
    CHECK(check.pass);
    CHECK(check.lhs == doctest::Approx(std::pow(report.estimate, p)));
    CHECK(check.margin > 0.0);
    CHECK(check.rhs >= strip.estimate);
  }

  ErrorReport fake;
  fake.p = 1.0;
  fake.estimate = 0.5;  // impossible: f - g never exceeds 1 on a 0.125 strip
  fake.half_width_95 = 0.0;
  auto bad = verify_bound(fake, strip);
  CHECK_FALSE(bad.pass);
  CHECK(bad.margin < 0.0);
}

TEST_CASE("scaling fits recover known slopes") {
  std::vector<double> eps{1e-1, 1e-2, 1e-3};
  for (double p : {1.0, 2.0, 4.0}) {
    auto fit = scaling_study(
        [&](double e) { return 2.0 * std::pow(e, 1.0 / p); }, eps);
    CHECK(fit.slope == doctest::Approx(1.0 / p).epsilon(1e-12));
    CHECK(fit.errors.size() == 3);
  }
  auto fit = scaling_study([](double e) { return 3.0 * e; }, eps);
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));

  std::vector<double> trivial{0.1, 0.09, 0.08};
  CHECK_THROWS_AS(scaling_study([](double e) { return e; }, trivial),
                  std::invalid_argument);
  std::vector<double> two{0.1, 0.001};
  CHECK_THROWS_AS(scaling_study([](double e) { return e; }, two),
                  std::invalid_argument);
  CHECK_THROWS_AS(scaling_study([](double) { return 0.0; }, eps),
                  std::runtime_error);
}
