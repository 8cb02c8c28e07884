#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "stepnet/geometry.hpp"
#include "support/test_oracles.hpp"

using namespace stepnet;

namespace {

// The H-shaped region used across the suite: two vertical legs joined by a
// central crossbar, traced counterclockwise from the lower-left corner.
std::vector<Vec2> h_vertices() {
  return {{-1.5, -1.5}, {-0.5, -1.5}, {-0.5, -0.5}, {0.5, -0.5},
          {0.5, -1.5},  {1.5, -1.5},  {1.5, 1.5},   {0.5, 1.5},
          {0.5, 0.5},   {-0.5, 0.5},  {-0.5, 1.5},  {-1.5, 1.5}};
}

std::vector<std::pair<double, double>> as_pairs(const std::vector<Vec2>& v) {
  std::vector<std::pair<double, double>> out;
  out.reserve(v.size());
  for (const auto& p : v) out.emplace_back(p.x, p.y);
  return out;
}

}  // namespace

TEST_CASE("box basics") {
  Box b = Box::cube(3, -1.0, 2.0);
  CHECK(b.dim() == 3);
  CHECK(b.volume() == doctest::Approx(27.0));
  double inside[] = {0.0, 0.0, 0.0};
  double outside[] = {0.0, 0.0, 2.5};
  double edge[] = {0.0, 0.0, 2.0};
  CHECK(b.contains(inside));
  CHECK_FALSE(b.contains(outside));
  CHECK_FALSE(b.contains(edge));  // membership is strict
  CHECK(Box::unit(2).same_as(Box({0.0, 0.0}, {1.0, 1.0})));
  CHECK_FALSE(Box::unit(2).same_as(Box::unit(3)));
  CHECK_THROWS_AS(Box({0.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Box({1.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Box({}, {}), std::invalid_argument);
}

TEST_CASE("hyperplane normalisation keeps the zero set") {
  Hyperplane h({3.0, 4.0}, 10.0);  // same set as {0.6, 0.8} . x = 2
  CHECK(norm(Vec2{h.normal()[0], h.normal()[1]}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(h.signed_eval(Vec2{2.0, 1.0 / 1.25 - 0.0}) ==
        doctest::Approx((3.0 * 2.0 + 4.0 * (1.0 / 1.25) - 10.0) / 5.0).epsilon(1e-14));
  // A point on the original plane stays on the rescaled one.
  Vec2 on{2.0, 1.0};  // 3*2 + 4*1 = 10
  CHECK(std::fabs(h.signed_eval(on)) < 1e-15);

  // Already-unit input is preserved exactly.
  Hyperplane u({0.0, 1.0}, 0.25);
  CHECK(u.normal()[0] == 0.0);
  CHECK(u.normal()[1] == 1.0);
  CHECK(u.offset() == 0.25);

  Hyperplane t = u.translated(0.5);
  CHECK(t.offset() == doctest::Approx(0.75));
  CHECK(t.signed_eval(Vec2{0.0, 0.75}) == doctest::Approx(0.0));

  Hyperplane f = u.flipped();
  CHECK(f.normal()[1] == -1.0);
  CHECK(f.signed_eval(Vec2{0.0, 0.0}) == doctest::Approx(0.25));

  CHECK_THROWS_AS(Hyperplane({0.0, 0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Hyperplane({}, 0.0), std::invalid_argument);
}

TEST_CASE("polygon area matches shoelace and orientation is fixed") {
  auto poly = SimplePolygon::from_vertices(h_vertices());
  CHECK(poly.size() == 12);
  CHECK(poly.area() == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(poly.area() == doctest::Approx(oracle::shoelace_area(as_pairs(poly.vertices()))));

  // Clockwise input is reversed, not rejected.
  auto cw = h_vertices();
  std::reverse(cw.begin(), cw.end());
  auto poly2 = SimplePolygon::from_vertices(cw);
  CHECK(poly2.area() == doctest::Approx(7.0));
  CHECK(oracle::shoelace_area(as_pairs(poly2.vertices())) > 0.0);

  // Duplicate and collinear vertices are dropped.
  auto square = SimplePolygon::from_vertices(
      {{0, 0}, {0.5, 0.0}, {1, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(square.size() == 4);
  CHECK(square.area() == doctest::Approx(1.0));

  CHECK_THROWS_AS(SimplePolygon::from_vertices({{0, 0}, {1, 1}, {1, 0}, {0, 1}}),
                  std::invalid_argument);  // bowtie
  CHECK_THROWS_AS(SimplePolygon::from_vertices({{0, 0}, {1, 0}, {2, 0}}),
                  std::invalid_argument);  // zero area
}

TEST_CASE("polygon membership agrees with an independent crossing test") {
  auto poly = SimplePolygon::from_vertices(h_vertices());
  auto verts = as_pairs(poly.vertices());
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::size_t checked = 0;
  for (int i = 0; i < 20000; ++i) {
    Vec2 p{unif(rng), unif(rng)};
    // Keep clear of edges, where the two conventions may differ.
    bool near_edge = false;
    for (double c : {-1.5, -0.5, 0.5, 1.5}) {
      if (std::fabs(p.x - c) < 1e-7 || std::fabs(p.y - c) < 1e-7) near_edge = true;
    }
    if (near_edge) continue;
    CHECK(poly.contains(p) == oracle::point_in_polygon(p.x, p.y, verts));
    ++checked;
  }
  CHECK(checked > 19000);
}

TEST_CASE("edge hyperplanes face outward and pass through their edges") {
  auto poly = SimplePolygon::from_vertices({{0, 0}, {2, 0}, {2, 1}, {0, 1}});
  auto faces = poly.edge_hyperplanes();
  REQUIRE(faces.size() == 4);
  Vec2 centroid{1.0, 0.5};
  for (std::size_t i = 0; i < faces.size(); ++i) {
    CHECK(faces[i].signed_eval(centroid) < 0.0);
    // Both endpoints of edge i are on face i.
    Vec2 a = poly.vertices()[i];
    Vec2 b = poly.vertices()[(i + 1) % poly.size()];
    CHECK(std::fabs(faces[i].signed_eval(a)) < 1e-12);
    CHECK(std::fabs(faces[i].signed_eval(b)) < 1e-12);
  }
  // Outside points get a positive value on some face.
  CHECK(faces[0].signed_eval(Vec2{1.0, -0.3}) == doctest::Approx(0.3));
}

TEST_CASE("inscribed polygonalization of a circle") {
  const Vec2 c{0.5, 0.5};
  const double r = 0.25;
  const std::size_t n = 6;
  auto faces = polygonalize_circle_inscribed(c, r, n);
  REQUIRE(faces.size() == n);

  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    // Face i joins the inscribed-hexagon vertices at angles 2*pi*i/n and
    // 2*pi*(i+1)/n, both on the circle itself.
    Vec2 vi{c.x + r * std::cos(2 * pi * i / n), c.y + r * std::sin(2 * pi * i / n)};
    Vec2 vj{c.x + r * std::cos(2 * pi * (i + 1) / n),
            c.y + r * std::sin(2 * pi * (i + 1) / n)};
    CHECK(std::fabs(faces[i].signed_eval(vi)) < 1e-14);
    CHECK(std::fabs(faces[i].signed_eval(vj)) < 1e-14);
    // The centre sits one apothem inside.
    CHECK(faces[i].signed_eval(c) == doctest::Approx(-r * std::cos(pi / n)).epsilon(1e-14));
  }

  CHECK_THROWS_AS(polygonalize_circle_inscribed(c, -1.0, 6), std::invalid_argument);
  CHECK_THROWS_AS(polygonalize_circle_inscribed(c, r, 2), std::invalid_argument);
}

TEST_CASE("tangent polygonalization needs on-surface samples") {
  ImplicitSurface circle;
  circle.value = [](std::span<const double> x) {
    return x[0] * x[0] + x[1] * x[1] - 1.0;
  };
  circle.gradient = [](std::span<const double> x) {
    return std::vector<double>{2.0 * x[0], 2.0 * x[1]};
  };
  auto faces = polygonalize_convex_tangent(circle, {{1.0, 0.0}, {0.0, 1.0}});
  REQUIRE(faces.size() == 2);
  CHECK(faces[0].normal()[0] == doctest::Approx(1.0));
  CHECK(faces[0].offset() == doctest::Approx(1.0));
  CHECK(faces[1].normal()[1] == doctest::Approx(1.0));

  CHECK_THROWS_AS(polygonalize_convex_tangent(circle, {{2.0, 0.0}}),
                  std::invalid_argument);  // not on the surface
}

TEST_CASE("convex hull drops interior and collinear points") {
  std::vector<Vec2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5, 0.0}};
  auto hull = convex_hull_2d(pts);
  CHECK(hull.size() == 4);
  CHECK(hull.area() == doctest::Approx(1.0));

  auto hhull = convex_hull_2d(h_vertices());
  CHECK(hhull.size() == 4);
  CHECK(hhull.area() == doctest::Approx(9.0));

  CHECK_THROWS_AS(convex_hull_2d({{0, 0}, {1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(convex_hull_2d({{0, 0}, {1, 1}, {2, 2}}), std::invalid_argument);
}

TEST_CASE("hull pockets of the H-shape are its two notches") {
  auto poly = SimplePolygon::from_vertices(h_vertices());
  auto hp = hull_pockets(poly);
  CHECK(hp.hull.area() == doctest::Approx(9.0));
  REQUIRE(hp.pockets.size() == 2);
  for (const auto& pocket : hp.pockets) {
    CHECK(pocket.area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pocket.is_convex());
  }
  // Pocket areas account exactly for hull minus region.
  double total = hp.pockets[0].area() + hp.pockets[1].area();
  CHECK(hp.hull.area() - poly.area() == doctest::Approx(total));

  auto convex = SimplePolygon::from_vertices({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(hull_pockets(convex).pockets.empty());
}

TEST_CASE("convex decomposition tiles the region") {
  // L-shaped test region of area 3.
  auto lshape = SimplePolygon::from_vertices(
      {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  auto pieces = convex_decomposition_2d(lshape);
  CHECK(pieces.size() == 2);

  double total = 0.0;
  for (const auto& piece : pieces) {
    REQUIRE_FALSE(piece.vertices2d.empty());
    auto sub = SimplePolygon::from_vertices(piece.vertices2d);
    CHECK(sub.is_convex());
    total += sub.area();
  }
  CHECK(total == doctest::Approx(3.0).epsilon(1e-12));

  // Pieces are interior-disjoint and cover: random interior points away from
  // any piece face land in exactly one piece.
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  std::size_t checked = 0;
  for (int i = 0; i < 20000; ++i) {
    Vec2 p{unif(rng), unif(rng)};
    if (!lshape.contains(p)) continue;
    bool near_face = false;
    for (const auto& piece : pieces) {
      for (const auto& f : piece.faces) {
        if (std::fabs(f.signed_eval(p)) < 1e-9) near_face = true;
      }
    }
    if (near_face) continue;
    int owners = 0;
    for (const auto& piece : pieces) owners += piece.contains(p) ? 1 : 0;
    CHECK(owners == 1);
    ++checked;
  }
  CHECK(checked > 5000);

  // The H decomposes too, with the full area preserved.
  auto hpieces = convex_decomposition_2d(SimplePolygon::from_vertices(h_vertices()));
  double harea = 0.0;
  for (const auto& piece : hpieces) {
    auto sub = SimplePolygon::from_vertices(piece.vertices2d);
    CHECK(sub.is_convex());
    harea += sub.area();
  }
  CHECK(harea == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("polytope construction validates feasibility") {
  Box box = Box::unit(2);
  std::vector<Hyperplane> square{
      {{-1.0, 0.0}, -0.2}, {{1.0, 0.0}, 0.8}, {{0.0, -1.0}, -0.2}, {{0.0, 1.0}, 0.8}};
  auto poly2d = ConvexPolytope::from_faces(square, box, "sq");
  CHECK(poly2d.label == "sq");
  CHECK(poly2d.contains(Vec2{0.5, 0.5}));
  CHECK_FALSE(poly2d.contains(Vec2{0.9, 0.5}));
  CHECK_FALSE(poly2d.contains(Vec2{0.8, 0.5}));  // boundary excluded

  // x < 0.2 and x > 0.8 cannot both hold.
  std::vector<Hyperplane> empty{{{1.0, 0.0}, 0.2}, {{-1.0, 0.0}, -0.8}};
  CHECK_THROWS_AS(ConvexPolytope::from_faces(empty, box), std::invalid_argument);

  std::vector<Hyperplane> dup{{{1.0, 0.0}, 0.8}, {{1.0, 0.0}, 0.8}};
  CHECK_THROWS_AS(ConvexPolytope::from_faces(dup, box), std::invalid_argument);

  auto tri = SimplePolygon::from_vertices({{0, 0}, {1, 0}, {0, 1}});
  auto pt = ConvexPolytope::from_polygon(tri, "tri");
  CHECK(pt.vertices2d.size() == 3);
  CHECK(pt.contains(Vec2{0.25, 0.25}));
  auto bent = SimplePolygon::from_vertices({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  CHECK_THROWS_AS(ConvexPolytope::from_polygon(bent), std::invalid_argument);
}

TEST_CASE("region specs stay valid after copies") {
  RegionSpec copy;
  {
    auto poly = SimplePolygon::from_vertices({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    RegionSpec original = RegionSpec::from_polygon(poly, Box::cube(2, -1.0, 2.0));
    copy = original;  // `original` dies with the scope
  }
  double in[] = {0.5, 0.5};
  double out[] = {1.5, 0.5};
  CHECK(copy.inside(in));
  CHECK_FALSE(copy.inside(out));

  RegionSpec moved = std::move(copy);
  CHECK(moved.inside(in));

  auto comp = RegionSpec::complement(moved);
  CHECK_FALSE(comp.inside(in));
  CHECK(comp.inside(out));

  auto ball = RegionSpec::from_ball({0.0, 0.0, 0.0}, 0.7, Box::cube(3, -1.0, 1.0));
  double origin[] = {0.0, 0.0, 0.0};
  double far_pt[] = {0.9, 0.9, 0.9};
  CHECK(ball.inside(origin));
  CHECK_FALSE(ball.inside(far_pt));

  auto outer = RegionSpec::outside_hyperplanes(
      {Hyperplane({1.0, 0.0}, 0.6), Hyperplane({0.0, 1.0}, 0.6)}, Box::unit(2));
  double corner[] = {0.9, 0.9};
  double inner[] = {0.5, 0.5};
  CHECK(outer.inside(corner));
  CHECK_FALSE(outer.inside(inner));
}

TEST_CASE("symmetric difference measure against closed form") {
  Box box = Box::unit(2);
  auto a = RegionSpec::from_polygon(
      SimplePolygon::from_vertices({{0.0, 0.0}, {0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}}), box);
  auto b = RegionSpec::from_polygon(
      SimplePolygon::from_vertices({{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}}),
      box);
  // Overlap is the square [0.25,0.5]^2 of area 1/16: symm diff = 2*(1/4 - 1/16).
  const double exact = 2.0 * (0.25 - 0.0625);
  auto est = symm_diff_measure(a, b, 400000, 42);
  CHECK(std::fabs(est.estimate - exact) < 4.0 * est.half_width_95 / 1.96 + 1e-9);

  // Cross-check with the independent sampler as well.
  auto ref = oracle::mc_measure(
      [&](std::span<const double> x) { return a.inside(x) != b.inside(x); },
      box.lo, box.hi, 400000, 99);
  CHECK(std::fabs(ref.estimate - exact) < 4.0 * ref.sigma + 1e-9);

  auto self = symm_diff_measure(a, a, 50000, 7);
  CHECK(self.estimate == 0.0);

  CHECK_THROWS_AS(symm_diff_measure(a, b, 0, 1), std::invalid_argument);
}
