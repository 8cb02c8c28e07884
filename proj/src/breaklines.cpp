#include "stepnet/breaklines.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace stepnet {

namespace {

constexpr double kOnLine = 1e-12;

Vec2 centroid(const std::vector<Vec2>& poly) {
  // Area-weighted centroid; falls back to the vertex mean for slivers.
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    const double w = p.x * q.y - q.x * p.y;
    a2 += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  if (std::abs(a2) < 1e-300) {
    Vec2 m{0.0, 0.0};
    for (const Vec2& p : poly) m = m + p;
    return (1.0 / static_cast<double>(poly.size())) * m;
  }
  return Vec2{cx / (3.0 * a2), cy / (3.0 * a2)};
}

// Splits a convex CCW polygon by the line h; returns {negative side,
// positive side}; either may be empty when the line misses the polygon.
std::pair<std::vector<Vec2>, std::vector<Vec2>> split_convex(const std::vector<Vec2>& poly,
                                                             const Hyperplane& h,
                                                             double scale) {
  std::vector<Vec2> neg, pos;
  const double tol = kOnLine * scale;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % n];
    const double sp = h.signed_eval(p);
    const double sq = h.signed_eval(q);
    if (sp <= tol) neg.push_back(p);
    if (sp >= -tol) pos.push_back(p);
    if ((sp > tol && sq < -tol) || (sp < -tol && sq > tol)) {
      const double t = sp / (sp - sq);
      const Vec2 cut = p + t * (q - p);
      neg.push_back(cut);
      pos.push_back(cut);
    }
  }
  return {std::move(neg), std::move(pos)};
}

double polygon_area(const std::vector<Vec2>& poly) {
  double a2 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a2 += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a2;
}

}  // namespace

std::vector<ArrangementCell> arrangement_cells_2d(const std::vector<Hyperplane>& lines,
                                                  const Box& box) {
  if (box.dim() != 2)
    throw std::invalid_argument("arrangement_cells_2d: box must be two-dimensional");
  for (const Hyperplane& h : lines)
    if (h.dim() != 2)
      throw std::invalid_argument("arrangement_cells_2d: lines must be two-dimensional");

  double scale = 1.0;
  for (double v : {box.lo[0], box.lo[1], box.hi[0], box.hi[1]})
    scale = std::max(scale, std::abs(v));
  const double min_area = 1e-18 * scale * scale;

  std::vector<std::vector<Vec2>> cells{{Vec2{box.lo[0], box.lo[1]},
                                        Vec2{box.hi[0], box.lo[1]},
                                        Vec2{box.hi[0], box.hi[1]},
                                        Vec2{box.lo[0], box.hi[1]}}};
  for (const Hyperplane& h : lines) {
    std::vector<std::vector<Vec2>> next;
    next.reserve(cells.size() + 4);
    for (std::vector<Vec2>& cell : cells) {
      auto [neg, pos] = split_convex(cell, h, scale);
      const bool neg_ok = neg.size() >= 3 && std::abs(polygon_area(neg)) > min_area;
      const bool pos_ok = pos.size() >= 3 && std::abs(polygon_area(pos)) > min_area;
      if (neg_ok && pos_ok) {
        next.push_back(std::move(neg));
        next.push_back(std::move(pos));
      } else {
        next.push_back(std::move(cell));  // line misses this cell
      }
    }
    cells = std::move(next);
  }

  std::vector<ArrangementCell> out;
  out.reserve(cells.size());
  for (std::vector<Vec2>& poly : cells) {
    const Vec2 inner = centroid(poly);
    out.push_back({std::move(poly), inner});
  }
  return out;
}

SecondLayerBreaklines second_layer_breaklines_2d(const ReluNetwork& net, const Box& box) {
  if (net.input_dim() != 2)
    throw std::invalid_argument("second_layer_breaklines_2d: network must be planar");

  SecondLayerBreaklines out;
  out.cells = arrangement_cells_2d(first_layer_breaklines(net), box);
  out.per_neuron.resize(net.width2());

  const AffineLayer& l1 = net.layer1();
  const AffineLayer& l2 = net.layer2();
  const std::size_t n1 = net.width1();

  double scale = 1.0;
  for (double v : {box.lo[0], box.lo[1], box.hi[0], box.hi[1]})
    scale = std::max(scale, std::abs(v));

  std::vector<std::vector<double>> rows1(n1);
  for (std::size_t r = 0; r < n1; ++r) rows1[r] = l1.row_dense(r);

  for (std::size_t ci = 0; ci < out.cells.size(); ++ci) {
    const ArrangementCell& cell = out.cells[ci];
    // Active set is constant on the open cell; freeze it at the interior point.
    std::vector<char> active(n1, 0);
    for (std::size_t r = 0; r < n1; ++r) {
      const double s = rows1[r][0] * cell.interior.x + rows1[r][1] * cell.interior.y -
                       l1.bias()[r];
      active[r] = s > 0.0;
    }
    for (std::size_t i = 0; i < net.width2(); ++i) {
      const std::vector<double> w2 = l2.row_dense(i);
      double ux = 0.0, uy = 0.0, c = -l2.bias()[i];
      for (std::size_t r = 0; r < n1; ++r) {
        if (!active[r] || w2[r] == 0.0) continue;
        ux += w2[r] * rows1[r][0];
        uy += w2[r] * rows1[r][1];
        c -= w2[r] * l1.bias()[r];
      }
      const double un = std::hypot(ux, uy);
      if (un <= 1e-14) {
        if (std::abs(c) <= 1e-12)
          out.degenerate.emplace_back(i, ci);
        continue;  // constant pre-activation: no zero line in this cell
      }
      // Clip {u.x + c = 0} to the cell.
      const Hyperplane zero({ux, uy}, -c);
      std::vector<Vec2> hits;
      const std::size_t n = cell.polygon.size();
      for (std::size_t e = 0; e < n; ++e) {
        const Vec2 p = cell.polygon[e];
        const Vec2 q = cell.polygon[(e + 1) % n];
        const double sp = zero.signed_eval(p);
        const double sq = zero.signed_eval(q);
        if ((sp > 0.0) == (sq > 0.0)) continue;
        const double t = sp / (sp - sq);
        hits.push_back(p + t * (q - p));
      }
      // Merge duplicates produced when the line passes through a vertex.
      std::vector<Vec2> uniq;
      for (const Vec2& hpt : hits) {
        bool dup = false;
        for (const Vec2& u : uniq)
          if (norm(hpt - u) <= 1e-12 * scale) dup = true;
        if (!dup) uniq.push_back(hpt);
      }
      if (uniq.size() == 2)
        out.per_neuron[i].push_back({uniq[0], uniq[1], ci});
    }
  }
  return out;
}

}  // namespace stepnet
