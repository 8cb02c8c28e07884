#include "stepnet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>

#include "stepnet/rng.hpp"

namespace stepnet {

namespace {

constexpr double kTol = 1e-12;

bool finite(double v) { return std::isfinite(v); }

double max_abs_coord(const std::vector<Vec2>& vs) {
  double m = 1.0;
  for (const Vec2& v : vs) m = std::max({m, std::abs(v.x), std::abs(v.y)});
  return m;
}

// Angle-free collinearity test: |cross| relative to the edge lengths.
bool collinear(Vec2 a, Vec2 b, Vec2 c, double scale) {
  return std::abs(cross(b - a, c - b)) <= kTol * scale * scale;
}

bool segments_properly_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// ---------------------------------------------------------------------------
// Box

Box::Box(std::vector<double> lo_, std::vector<double> hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.empty() || lo.size() != hi.size())
    throw std::invalid_argument("Box: lo/hi must be non-empty and equal-sized");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!finite(lo[i]) || !finite(hi[i]) || !(hi[i] > lo[i]))
      throw std::invalid_argument("Box: needs finite hi > lo in every axis");
  }
}

Box Box::cube(std::size_t dim, double lo, double hi) {
  return Box(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
  return true;
}

bool Box::same_as(const Box& other, double tol) const {
  if (other.dim() != dim()) return false;
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (std::abs(lo[i] - other.lo[i]) > tol || std::abs(hi[i] - other.hi[i]) > tol)
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// Hyperplane

Hyperplane::Hyperplane(std::vector<double> normal, double offset)
    : normal_(std::move(normal)), offset_(offset) {
  if (normal_.empty()) throw std::invalid_argument("Hyperplane: empty normal");
  double sq = 0.0;
  for (double v : normal_) {
    if (!finite(v)) throw std::invalid_argument("Hyperplane: non-finite normal");
    sq += v * v;
  }
  if (!finite(offset_)) throw std::invalid_argument("Hyperplane: non-finite offset");
  const double n = std::sqrt(sq);
  if (n < 1e-300) throw std::invalid_argument("Hyperplane: zero normal");
  // Keep exact inputs exact: only rescale when the norm actually deviates.
  if (std::abs(n - 1.0) > kTol) {
    for (double& v : normal_) v /= n;
    offset_ /= n;
  }
}

double Hyperplane::signed_eval(std::span<const double> x) const {
  if (x.size() != normal_.size())
    throw std::invalid_argument("Hyperplane::signed_eval: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < normal_.size(); ++i) s += normal_[i] * x[i];
  return s - offset_;
}

double Hyperplane::signed_eval(Vec2 p) const {
  const double xy[2] = {p.x, p.y};
  return signed_eval(std::span<const double>(xy, 2));
}

Hyperplane Hyperplane::translated(double delta) const {
  Hyperplane h = *this;
  h.offset_ += delta;
  return h;
}

Hyperplane Hyperplane::flipped() const {
  std::vector<double> n = normal_;
  for (double& v : n) v = -v;
  return Hyperplane(std::move(n), -offset_);
}

double signed_eval(const Hyperplane& h, std::span<const double> x) {
  return h.signed_eval(x);
}

// ---------------------------------------------------------------------------
// SimplePolygon

namespace {

double shoelace(const std::vector<Vec2>& vs) {
  double a2 = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const Vec2& p = vs[i];
    const Vec2& q = vs[(i + 1) % vs.size()];
    a2 += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a2;
}

// Drop duplicate and collinear vertices until stable.
std::vector<Vec2> simplify_chain(std::vector<Vec2> vs) {
  const double scale = max_abs_coord(vs);
  bool changed = true;
  while (changed && vs.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < vs.size() && vs.size() >= 3; ++i) {
      const Vec2 prev = vs[(i + vs.size() - 1) % vs.size()];
      const Vec2 cur = vs[i];
      const Vec2 next = vs[(i + 1) % vs.size()];
      if (norm(cur - prev) <= kTol * scale || collinear(prev, cur, next, scale)) {
        vs.erase(vs.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return vs;
}

}  // namespace

SimplePolygon SimplePolygon::from_vertices(std::vector<Vec2> vertices) {
  for (const Vec2& v : vertices)
    if (!finite(v.x) || !finite(v.y))
      throw std::invalid_argument("SimplePolygon: non-finite vertex");
  std::vector<Vec2> vs = simplify_chain(std::move(vertices));
  if (vs.size() < 3)
    throw std::invalid_argument("SimplePolygon: fewer than 3 vertices after simplification");

  const double scale = max_abs_coord(vs);
  const double a = shoelace(vs);
  if (std::abs(a) <= kTol * scale * scale)
    throw std::invalid_argument("SimplePolygon: degenerate (zero area)");
  if (a < 0.0) std::reverse(vs.begin(), vs.end());

  // Reject self-intersection between non-adjacent edges.
  const std::size_t n = vs.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_properly_intersect(vs[i], vs[(i + 1) % n], vs[j], vs[(j + 1) % n]))
        throw std::invalid_argument("SimplePolygon: self-intersecting boundary");
    }
  }

  SimplePolygon p;
  p.vertices_ = std::move(vs);
  return p;
}

double SimplePolygon::area() const { return shoelace(vertices_); }

bool SimplePolygon::contains(Vec2 p) const {
  // Ray crossing toward +x; boundary points are not interior.
  bool in = false;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = vertices_[j];
    const Vec2& b = vertices_[i];
    if ((b.y > p.y) != (a.y > p.y)) {
      const double xint = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < xint) in = !in;
    }
  }
  return in;
}

bool SimplePolygon::is_convex() const {
  const double scale = max_abs_coord(vertices_);
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices_[i];
    const Vec2 b = vertices_[(i + 1) % n];
    const Vec2 c = vertices_[(i + 2) % n];
    if (cross(b - a, c - b) < -kTol * scale * scale) return false;
  }
  return true;
}

std::vector<Hyperplane> SimplePolygon::edge_hyperplanes() const {
  std::vector<Hyperplane> faces;
  faces.reserve(vertices_.size());
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices_[i];
    const Vec2 b = vertices_[(i + 1) % n];
    const Vec2 d = b - a;
    // Outward normal of a counterclockwise edge.
    std::vector<double> nrm = {d.y, -d.x};
    const double c = nrm[0] * a.x + nrm[1] * a.y;
    faces.emplace_back(std::move(nrm), c);
  }
  return faces;
}

// ---------------------------------------------------------------------------
// ConvexPolytope

ConvexPolytope ConvexPolytope::from_faces(std::vector<Hyperplane> faces,
                                          const Box& box, std::string label) {
  if (faces.empty()) throw std::invalid_argument("ConvexPolytope: no faces");
  const std::size_t d = faces.front().dim();
  if (d != box.dim())
    throw std::invalid_argument("ConvexPolytope: face/box dimension mismatch");
  for (const Hyperplane& f : faces)
    if (f.dim() != d) throw std::invalid_argument("ConvexPolytope: mixed dimensions");

  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (std::size_t j = i + 1; j < faces.size(); ++j) {
      double dp = 0.0;
      for (std::size_t k = 0; k < d; ++k) dp += faces[i].normal()[k] * faces[j].normal()[k];
      if (dp > 1.0 - kTol && std::abs(faces[i].offset() - faces[j].offset()) < kTol)
        throw std::invalid_argument("ConvexPolytope: duplicate face");
    }
  }

  // Relaxation projection (Agmon-Motzkin) from the box center; succeeds iff a
  // strictly interior point within the box can be reached.
  std::vector<double> x(d);
  for (std::size_t k = 0; k < d; ++k) x[k] = 0.5 * (box.lo[k] + box.hi[k]);
  double margin = 0.0;
  for (std::size_t k = 0; k < d; ++k) margin = std::max(margin, box.hi[k] - box.lo[k]);
  margin *= 1e-7;

  bool feasible = false;
  for (int iter = 0; iter < 5000; ++iter) {
    double worst = 0.0;
    std::size_t worst_i = faces.size();
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const double s = faces[i].signed_eval(x) + margin;
      if (s > worst) {
        worst = s;
        worst_i = i;
      }
    }
    if (worst_i == faces.size()) {
      feasible = true;
      break;
    }
    const auto& nrm = faces[worst_i].normal();
    for (std::size_t k = 0; k < d; ++k) {
      x[k] -= 1.5 * worst * nrm[k];
      x[k] = std::clamp(x[k], box.lo[k], box.hi[k]);
    }
  }
  if (!feasible)
    throw std::invalid_argument("ConvexPolytope: empty or degenerate interior in box");

  ConvexPolytope p;
  p.faces = std::move(faces);
  p.label = std::move(label);
  return p;
}

ConvexPolytope ConvexPolytope::from_polygon(const SimplePolygon& poly,
                                            std::string label) {
  if (!poly.is_convex())
    throw std::invalid_argument("ConvexPolytope: polygon is not convex");
  ConvexPolytope p;
  p.faces = poly.edge_hyperplanes();
  p.label = std::move(label);
  p.vertices2d = poly.vertices();
  return p;
}

bool ConvexPolytope::contains(std::span<const double> x) const {
  for (const Hyperplane& f : faces)
    if (f.signed_eval(x) >= 0.0) return false;
  return true;
}

bool ConvexPolytope::contains(Vec2 p) const {
  const double xy[2] = {p.x, p.y};
  return contains(std::span<const double>(xy, 2));
}

// ---------------------------------------------------------------------------
// RegionSpec

RegionSpec RegionSpec::from_polygon(SimplePolygon poly, Box box) {
  if (box.dim() != 2) throw std::invalid_argument("RegionSpec: polygon needs a 2-d box");
  RegionSpec r;
  r.polygon = poly;
  r.box = std::move(box);
  // The lambda owns its own copy so the struct stays safely copyable.
  r.inside = [poly = std::move(poly)](std::span<const double> x) {
    return poly.contains(Vec2{x[0], x[1]});
  };
  return r;
}

RegionSpec RegionSpec::from_polytope(ConvexPolytope poly, Box box) {
  RegionSpec r;
  r.polytope = poly;
  r.box = std::move(box);
  r.inside = [poly = std::move(poly)](std::span<const double> x) {
    return poly.contains(x);
  };
  return r;
}

RegionSpec RegionSpec::from_ball(std::vector<double> center, double radius, Box box) {
  if (center.size() != box.dim())
    throw std::invalid_argument("RegionSpec: center/box dimension mismatch");
  if (!(radius > 0.0)) throw std::invalid_argument("RegionSpec: radius must be positive");
  RegionSpec r;
  r.box = std::move(box);
  r.inside = [c = std::move(center), r2 = radius * radius](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
    return s < r2;
  };
  return r;
}

RegionSpec RegionSpec::outside_hyperplanes(std::vector<Hyperplane> planes, Box box) {
  if (planes.empty())
    throw std::invalid_argument("RegionSpec: empty hyperplane list");
  RegionSpec r;
  r.box = std::move(box);
  r.inside = [ps = std::move(planes)](std::span<const double> x) {
    for (const Hyperplane& h : ps)
      if (h.signed_eval(x) > 0.0) return true;
    return false;
  };
  return r;
}

RegionSpec RegionSpec::complement(const RegionSpec& src) {
  RegionSpec r;
  r.box = src.box;
  r.inside = [f = src.inside](std::span<const double> x) { return !f(x); };
  return r;
}

// ---------------------------------------------------------------------------
// Polygonalization

std::vector<Hyperplane> polygonalize_circle_inscribed(Vec2 center, double radius,
                                                      std::size_t n) {
  if (!(radius > 0.0))
    throw std::invalid_argument("polygonalize_circle_inscribed: radius must be positive");
  if (n < 3)
    throw std::invalid_argument("polygonalize_circle_inscribed: need n >= 3");
  const double pi = std::acos(-1.0);
  const double apothem = radius * std::cos(pi / static_cast<double>(n));
  std::vector<Hyperplane> faces;
  faces.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Edge i joins vertices at angles 2*pi*i/n and 2*pi*(i+1)/n; its outward
    // normal bisects them and the plane sits at the apothem.
    const double theta = 2.0 * pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    std::vector<double> nrm = {std::cos(theta), std::sin(theta)};
    const double c = nrm[0] * center.x + nrm[1] * center.y + apothem;
    faces.emplace_back(std::move(nrm), c);
  }
  return faces;
}

std::vector<Hyperplane> polygonalize_convex_tangent(
    const ImplicitSurface& surface,
    const std::vector<std::vector<double>>& sample_points) {
  if (!surface.value || !surface.gradient)
    throw std::invalid_argument("polygonalize_convex_tangent: incomplete surface oracle");
  if (sample_points.empty())
    throw std::invalid_argument("polygonalize_convex_tangent: no sample points");
  std::vector<Hyperplane> faces;
  faces.reserve(sample_points.size());
  for (const auto& p : sample_points) {
    const double v = surface.value(p);
    if (std::abs(v) > 1e-9)
      throw std::invalid_argument(
          "polygonalize_convex_tangent: sample point off the surface");
    std::vector<double> g = surface.gradient(p);
    if (g.size() != p.size())
      throw std::invalid_argument("polygonalize_convex_tangent: gradient dimension mismatch");
    double sq = 0.0;
    for (double gi : g) sq += gi * gi;
    const double gn = std::sqrt(sq);
    if (gn < 1e-12)
      throw std::invalid_argument("polygonalize_convex_tangent: vanishing gradient");
    for (double& gi : g) gi /= gn;
    double c = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) c += g[i] * p[i];
    faces.emplace_back(std::move(g), c);
  }
  return faces;
}

// ---------------------------------------------------------------------------
// Convex hull (monotone chain)

SimplePolygon convex_hull_2d(std::vector<Vec2> points) {
  const double scale = max_abs_coord(points);
  const double tol = kTol * scale * scale;

  std::sort(points.begin(), points.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [&](Vec2 a, Vec2 b) { return norm(a - b) <= kTol * scale; }),
               points.end());
  if (points.size() < 3)
    throw std::invalid_argument("convex_hull_2d: fewer than 3 distinct points");

  std::vector<Vec2> hull(2 * points.size());
  std::size_t k = 0;
  for (const Vec2& p : points) {  // lower chain
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 1]) <= tol) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = points.rbegin() + 1; it != points.rend(); ++it) {  // upper chain
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], *it - hull[k - 1]) <= tol) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  if (hull.size() < 3)
    throw std::invalid_argument("convex_hull_2d: input points are collinear");
  return SimplePolygon::from_vertices(std::move(hull));
}

// ---------------------------------------------------------------------------
// Hull pockets

HullPockets hull_pockets(const SimplePolygon& region) {
  HullPockets out{convex_hull_2d(region.vertices()), {}};
  const std::vector<Vec2>& poly = region.vertices();
  const std::vector<Vec2>& hull = out.hull.vertices();
  const std::size_t n = poly.size();
  const double scale = max_abs_coord(poly);

  // Hull vertices are region vertices; map each to its boundary index.
  std::vector<std::size_t> idx;
  idx.reserve(hull.size());
  for (const Vec2& h : hull) {
    std::size_t found = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (norm(poly[i] - h) <= kTol * scale) {
        found = i;
        break;
      }
    }
    if (found == n)
      throw std::runtime_error("hull_pockets: hull vertex missing from polygon");
    idx.push_back(found);
  }

  const double area_tol = 1e-9 * scale * scale;
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const std::size_t i = idx[k];
    const std::size_t j = idx[(k + 1) % hull.size()];
    if ((i + 1) % n == j) continue;  // hull edge coincides with a boundary edge
    // Boundary chain from hull vertex i to hull vertex j, closed by the hull
    // edge. Traversed along the polygon it comes out clockwise; reverse it.
    std::vector<Vec2> chain;
    for (std::size_t t = i;; t = (t + 1) % n) {
      chain.push_back(poly[t]);
      if (t == j) break;
    }
    std::reverse(chain.begin(), chain.end());
    if (std::abs(shoelace(chain)) <= area_tol) continue;  // chain rides the hull edge
    out.pockets.push_back(SimplePolygon::from_vertices(std::move(chain)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convex decomposition: ear clipping + greedy convex merging

namespace {

bool point_in_triangle_strict(Vec2 p, Vec2 a, Vec2 b, Vec2 c, double tol) {
  const double d1 = cross(b - a, p - a);
  const double d2 = cross(c - b, p - b);
  const double d3 = cross(a - c, p - c);
  return d1 > tol && d2 > tol && d3 > tol;
}

struct EarClipper {
  std::vector<Vec2> v;
  double tol;

  bool reflex(std::size_t i, const std::vector<std::size_t>& ring) const {
    const Vec2 a = v[ring[(i + ring.size() - 1) % ring.size()]];
    const Vec2 b = v[ring[i]];
    const Vec2 c = v[ring[(i + 1) % ring.size()]];
    return cross(b - a, c - b) < -tol;
  }

  bool is_ear(std::size_t i, const std::vector<std::size_t>& ring) const {
    if (reflex(i, ring)) return false;
    const std::size_t m = ring.size();
    const Vec2 a = v[ring[(i + m - 1) % m]];
    const Vec2 b = v[ring[i]];
    const Vec2 c = v[ring[(i + 1) % m]];
    if (cross(b - a, c - b) <= tol) return false;  // degenerate sliver
    for (std::size_t t = 0; t < m; ++t) {
      if (t == i || t == (i + m - 1) % m || t == (i + 1) % m) continue;
      if (!reflex(t, ring)) continue;
      if (point_in_triangle_strict(v[ring[t]], a, b, c, -tol)) return false;
    }
    return true;
  }
};

// Exact edge identity: merged pieces only reuse input vertices, so bitwise
// comparison is the right notion of "same edge".
bool same_point(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

std::vector<Vec2> simplify_collinear_exact(std::vector<Vec2> vs, double tol) {
  bool changed = true;
  while (changed && vs.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const Vec2 a = vs[(i + vs.size() - 1) % vs.size()];
      const Vec2 b = vs[i];
      const Vec2 c = vs[(i + 1) % vs.size()];
      if (std::abs(cross(b - a, c - b)) <= tol) {
        vs.erase(vs.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return vs;
}

bool convex_ring(const std::vector<Vec2>& vs, double tol) {
  const std::size_t m = vs.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 a = vs[i];
    const Vec2 b = vs[(i + 1) % m];
    const Vec2 c = vs[(i + 2) % m];
    if (cross(b - a, c - b) < -tol) return false;
  }
  return true;
}

// Splice q into p along the shared edge (p[i] -> p[i+1]) == (q[j+1] -> q[j]).
std::vector<Vec2> splice_union(const std::vector<Vec2>& p, std::size_t i,
                               const std::vector<Vec2>& q, std::size_t j) {
  std::vector<Vec2> out;
  out.reserve(p.size() + q.size() - 2);
  const std::size_t np = p.size(), nq = q.size();
  for (std::size_t t = 0; t <= i; ++t) out.push_back(p[t]);
  // Walk q from the vertex after the shared edge start, all the way around.
  for (std::size_t t = (j + 2) % nq; t != j; t = (t + 1) % nq) out.push_back(q[t]);
  for (std::size_t t = i + 1; t < np; ++t) out.push_back(p[t]);
  return out;
}

}  // namespace

std::vector<ConvexPolytope> convex_decomposition_2d(const SimplePolygon& region) {
  const double scale = max_abs_coord(region.vertices());
  const double tol = kTol * scale * scale;

  // --- ear clipping, preferring the shortest diagonal at every step ---
  EarClipper clip{region.vertices(), tol};
  std::vector<std::size_t> ring(clip.v.size());
  for (std::size_t i = 0; i < ring.size(); ++i) ring[i] = i;

  std::vector<std::vector<Vec2>> pieces;  // triangles first
  while (ring.size() > 3) {
    std::size_t best = ring.size();
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ring.size(); ++i) {
      if (!clip.is_ear(i, ring)) continue;
      const Vec2 a = clip.v[ring[(i + ring.size() - 1) % ring.size()]];
      const Vec2 c = clip.v[ring[(i + 1) % ring.size()]];
      const double d2 = dot(c - a, c - a);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    if (best == ring.size())
      throw std::runtime_error("convex_decomposition_2d: no ear found (degenerate input)");
    const std::size_t m = ring.size();
    pieces.push_back({clip.v[ring[(best + m - 1) % m]], clip.v[ring[best]],
                      clip.v[ring[(best + 1) % m]]});
    ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(best));
  }
  pieces.push_back({clip.v[ring[0]], clip.v[ring[1]], clip.v[ring[2]]});

  // --- greedy merging while any adjacent union stays convex ---
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t a = 0; a < pieces.size() && !merged; ++a) {
      for (std::size_t b = a + 1; b < pieces.size() && !merged; ++b) {
        const auto& P = pieces[a];
        const auto& Q = pieces[b];
        for (std::size_t i = 0; i < P.size() && !merged; ++i) {
          const Vec2 u = P[i];
          const Vec2 w = P[(i + 1) % P.size()];
          for (std::size_t j = 0; j < Q.size(); ++j) {
            if (!(same_point(Q[j], w) && same_point(Q[(j + 1) % Q.size()], u))) continue;
            std::vector<Vec2> uni =
                simplify_collinear_exact(splice_union(P, i, Q, j), tol);
            if (!convex_ring(uni, tol)) break;
            pieces[a] = std::move(uni);
            pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(b));
            merged = true;
            break;
          }
        }
      }
    }
  }

  std::vector<ConvexPolytope> out;
  out.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    out.push_back(ConvexPolytope::from_polygon(
        SimplePolygon::from_vertices(pieces[i]), "piece-" + std::to_string(i)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo symmetric difference

MeasureEstimate symm_diff_measure(const RegionSpec& a, const RegionSpec& b,
                                  std::uint64_t samples, std::uint64_t seed) {
  if (!a.inside || !b.inside)
    throw std::invalid_argument("symm_diff_measure: missing membership oracle");
  if (!a.box.same_as(b.box))
    throw std::invalid_argument("symm_diff_measure: regions use different ambient boxes");
  if (samples == 0) throw std::invalid_argument("symm_diff_measure: samples must be > 0");

  const Box& box = a.box;
  const std::size_t d = box.dim();
  CounterRng rng(seed);
  std::vector<double> x(d);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double u = rng.uniform01(i * d + j);
      x[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * u;
    }
    if (a.inside(x) != b.inside(x)) ++hits;
  }
  const double vol = box.volume();
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  MeasureEstimate out;
  out.estimate = vol * p;
  out.half_width_95 =
      1.96 * vol * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return out;
}

}  // namespace stepnet
