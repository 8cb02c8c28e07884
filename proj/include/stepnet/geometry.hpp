#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stepnet {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);

/// Axis-aligned box with strictly positive extent in every coordinate.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lo_, std::vector<double> hi_);
  static Box cube(std::size_t dim, double lo, double hi);
  static Box unit(std::size_t dim) { return cube(dim, 0.0, 1.0); }

  std::size_t dim() const { return lo.size(); }
  double volume() const;
  bool contains(std::span<const double> x) const;
  bool same_as(const Box& other, double tol = 1e-12) const;
};

/// Whether a hyperplane list is an open chain (only consecutive planes are
/// adjacent) or a closed loop whose last plane neighbors the first, as for
/// polygon faces.
enum class ChainTopology { Open, Closed };

/// Oriented hyperplane {x : n.x = c} stored with a unit normal. Construction
/// rescales (n, c) jointly, so the zero set is preserved; an input that is
/// already unit-norm to 1e-12 is kept bit-for-bit.
class Hyperplane {
 public:
  Hyperplane(std::vector<double> normal, double offset);

  const std::vector<double>& normal() const { return normal_; }
  double offset() const { return offset_; }
  std::size_t dim() const { return normal_.size(); }

  // n.x - c: negative on the inner side, positive on the outer side.
  double signed_eval(std::span<const double> x) const;
  double signed_eval(Vec2 p) const;

  // Same normal, zero set translated by delta along the normal direction.
  Hyperplane translated(double delta) const;
  Hyperplane flipped() const;

 private:
  std::vector<double> normal_;
  double offset_;
};

double signed_eval(const Hyperplane& h, std::span<const double> x);

/// Simple polygon with counterclockwise orientation (signed area > 0).
/// Construction removes duplicate and collinear vertices, reverses clockwise
/// input, and rejects self-intersecting or degenerate chains.
class SimplePolygon {
 public:
  static SimplePolygon from_vertices(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  double area() const;           // positive (shoelace)
  bool contains(Vec2 p) const;   // strict interior, boundary excluded
  bool is_convex() const;
  // One face per edge, outward unit normal, offsets n.v on the edge.
  std::vector<Hyperplane> edge_hyperplanes() const;

 private:
  SimplePolygon() = default;
  std::vector<Vec2> vertices_;
};

/// Intersection of half-spaces {x : n_i.x - c_i < 0}. `vertices2d` carries the
/// source polygon when the polytope was built from one (used for adjacency
/// detection and exact extents in 2-d).
struct ConvexPolytope {
  std::vector<Hyperplane> faces;
  std::string label;
  std::vector<Vec2> vertices2d;

  // Checks for duplicate faces and verifies a strictly interior point exists
  // inside `box` (relaxation-projection feasibility search).
  static ConvexPolytope from_faces(std::vector<Hyperplane> faces, const Box& box,
                                   std::string label = {});
  static ConvexPolytope from_polygon(const SimplePolygon& poly,
                                     std::string label = {});

  bool contains(std::span<const double> x) const;  // strict interior
  bool contains(Vec2 p) const;
};

/// Membership oracle (strict inequalities) together with the ambient box the
/// region lives in. Geometry handles are kept when known.
struct RegionSpec {
  std::function<bool(std::span<const double>)> inside;
  Box box;
  std::optional<SimplePolygon> polygon;
  std::optional<ConvexPolytope> polytope;

  static RegionSpec from_polygon(SimplePolygon poly, Box box);
  static RegionSpec from_polytope(ConvexPolytope poly, Box box);
  static RegionSpec from_ball(std::vector<double> center, double radius, Box box);
  // Points where at least one plane evaluates positive (the outer region of a
  // hyperplane-bounded set).
  static RegionSpec outside_hyperplanes(std::vector<Hyperplane> planes, Box box);
  static RegionSpec complement(const RegionSpec& r);
};

/// Level-set description of a smooth convex surface: value and gradient of a
/// defining function, zero on the surface, gradient pointing outward.
struct ImplicitSurface {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

struct MeasureEstimate {
  double estimate = 0.0;
  double half_width_95 = 0.0;
};

/// Faces of the regular n-gon inscribed in the given circle, first vertex at
/// angle 0, outward normals, in counterclockwise edge order.
std::vector<Hyperplane> polygonalize_circle_inscribed(Vec2 center, double radius,
                                                      std::size_t n);

/// Tangent hyperplane at each sample point of a smooth convex surface. Every
/// sample must lie on the surface to 1e-9; the normal is the normalized
/// gradient and the offset puts the plane through the sample.
std::vector<Hyperplane> polygonalize_convex_tangent(
    const ImplicitSurface& surface,
    const std::vector<std::vector<double>>& sample_points);

/// Monotone-chain convex hull; counterclockwise, collinear points dropped.
SimplePolygon convex_hull_2d(std::vector<Vec2> points);

struct HullPockets {
  SimplePolygon hull;
  std::vector<SimplePolygon> pockets;
};

/// Convex hull of a simple polygon together with the pocket polygons that sit
/// between each hull edge and the boundary chain it spans.
HullPockets hull_pockets(const SimplePolygon& region);

/// Ear-clipping triangulation followed by greedy merging of adjacent pieces
/// whose union stays convex. Deterministic for a fixed vertex order.
std::vector<ConvexPolytope> convex_decomposition_2d(const SimplePolygon& region);

/// Monte Carlo measure of the symmetric difference of two regions sharing an
/// ambient box. Binomial 95% half-width.
MeasureEstimate symm_diff_measure(const RegionSpec& a, const RegionSpec& b,
                                  std::uint64_t samples, std::uint64_t seed);

}  // namespace stepnet
