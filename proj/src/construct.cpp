#include "stepnet/construct.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "stepnet/rng.hpp"

namespace stepnet {

namespace {

void require_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("construction requires eps > 0");
}

// Shared core of the indicator/bump forms. Layer 1 holds one row per
// hyperplane; layer 2 is the single unit 1 - (1/eps) * sum; layer 3 selects
// h (bump) or 1 - h (indicator).
ReluNetwork ramp_core(const std::vector<Hyperplane>& hs, double eps, bool indicator) {
  require_eps(eps);
  if (hs.empty()) throw std::invalid_argument("construction requires at least one hyperplane");
  const std::size_t d = hs.front().dim();
  const std::size_t n = hs.size();
  std::vector<double> w1(n * d), b1(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (hs[r].dim() != d)
      throw std::invalid_argument("construction: mixed hyperplane dimensions");
    std::copy(hs[r].normal().begin(), hs[r].normal().end(), w1.begin() + static_cast<std::ptrdiff_t>(r * d));
    b1[r] = hs[r].offset();
  }
  const double recip = 1.0 / eps;
  std::vector<double> w2(n, -recip);
  AffineLayer l1 = AffineLayer::auto_storage(n, d, std::move(w1), std::move(b1));
  AffineLayer l2 = AffineLayer::dense(1, n, std::move(w2), {-1.0});
  AffineLayer l3 = indicator ? AffineLayer::dense(1, 1, {-1.0}, {-1.0})
                             : AffineLayer::dense(1, 1, {1.0}, {0.0});
  return ReluNetwork(std::move(l1), std::move(l2), std::move(l3));
}

std::string polytope_label(const ConvexPolytope& p, std::size_t fallback_index) {
  if (!p.label.empty()) return p.label;
  return "piece-" + std::to_string(fallback_index);
}

}  // namespace

ReluNetwork halfspace_ramp(const Hyperplane& h, double eps) {
  return ramp_core({h}, eps, /*indicator=*/true);
}

ReluNetwork convex_indicator(const std::vector<Hyperplane>& hs, double eps) {
  return ramp_core(hs, eps, /*indicator=*/true);
}

ReluNetwork convex_bump(const std::vector<Hyperplane>& hs, double eps) {
  return ramp_core(hs, eps, /*indicator=*/false);
}

ReluNetwork convex_indicator_axes(std::size_t dim, const std::vector<double>& offsets,
                                  double eps) {
  require_eps(eps);
  if (dim == 0 || offsets.size() != dim)
    throw std::invalid_argument("convex_indicator_axes: need one offset per axis");
  std::vector<std::size_t> offs(dim + 1), cols(dim);
  std::vector<double> vals(dim, 1.0);
  for (std::size_t i = 0; i < dim; ++i) {
    offs[i + 1] = i + 1;
    cols[i] = i;
  }
  AffineLayer l1 = AffineLayer::sparse(dim, dim, std::move(offs), std::move(cols),
                                       std::move(vals), std::vector<double>(offsets));
  AffineLayer l2 = AffineLayer::dense(1, dim, std::vector<double>(dim, -1.0 / eps), {-1.0});
  AffineLayer l3 = AffineLayer::dense(1, 1, {-1.0}, {-1.0});
  return ReluNetwork(std::move(l1), std::move(l2), std::move(l3));
}

// ---------------------------------------------------------------------------
// hull_composite

namespace {

struct CompositeAccum {
  std::vector<std::unique_ptr<ReluNetwork>> owned;
  std::vector<std::pair<double, const ReluNetwork*>> terms;
  double constant = 0.0;
  std::vector<ConstructionPart> parts;
  std::vector<GapSlab> slabs;

  void add(double coeff, ReluNetwork net, ConstructionPart part) {
    owned.push_back(std::make_unique<ReluNetwork>(std::move(net)));
    terms.emplace_back(coeff, owned.back().get());
    part.coeff = coeff;
    parts.push_back(std::move(part));
  }
};

// Approximant of the complement indicator (1 outside `region`), accumulated
// as signed convex terms. `sign` tracks the parity of the recursion.
void accumulate_hull(const SimplePolygon& region, double eps, double sign,
                     std::size_t depth, std::size_t max_recursion,
                     const std::string& tag, CompositeAccum& acc) {
  const HullPockets hp = hull_pockets(region);
  const std::vector<Hyperplane> hull_faces = hp.hull.edge_hyperplanes();
  acc.add(sign, convex_indicator(hull_faces, eps),
          {tag + "hull-complement", hull_faces, ChainTopology::Closed, sign});

  for (std::size_t i = 0; i < hp.pockets.size(); ++i) {
    const SimplePolygon& pocket = hp.pockets[i];
    const std::string pocket_tag = tag + "pocket-" + std::to_string(i);
    if (pocket.is_convex()) {
      const std::vector<Hyperplane> faces = pocket.edge_hyperplanes();
      acc.add(sign, convex_bump(faces, eps),
              {pocket_tag, faces, ChainTopology::Closed, sign});
      // A pocket edge riding on a hull face marks an eps slab just outside
      // the hull on which the ramp pair cancels exactly.
      if (depth == 0) {
        const std::vector<Vec2>& pv = pocket.vertices();
        for (std::size_t e = 0; e < pv.size(); ++e) {
          const Vec2 pa = pv[e];
          const Vec2 pb = pv[(e + 1) % pv.size()];
          for (const Hyperplane& hf : hull_faces) {
            // Both endpoints on the face line means the whole edge rides it.
            if (std::abs(hf.signed_eval(pa)) < 1e-9 && std::abs(hf.signed_eval(pb)) < 1e-9) {
              acc.slabs.push_back({hf, pa, pb, "hull|" + pocket_tag});
              break;
            }
          }
        }
      }
    } else {
      if (depth + 1 > max_recursion)
        throw std::runtime_error("hull_composite: pocket recursion limit exceeded");
      // Indicator of the pocket = 1 - (complement approximant of the pocket).
      acc.constant += sign;
      accumulate_hull(pocket, eps, -sign, depth + 1, max_recursion,
                      pocket_tag + "/", acc);
    }
  }
}

}  // namespace

ConstructionReport hull_composite(const SimplePolygon& region, double eps,
                                  std::size_t max_recursion) {
  require_eps(eps);
  CompositeAccum acc;
  accumulate_hull(region, eps, 1.0, 0, max_recursion, "", acc);
  ReluNetwork net = affine_combine(acc.terms, acc.constant);
  std::string shape = net.shape_string();
  return ConstructionReport{std::move(net), eps,          "hull-composite",
                            std::move(shape), std::move(acc.parts), std::move(acc.slabs)};
}

// ---------------------------------------------------------------------------
// decomposition_composite

std::vector<SharedFace> detect_shared_faces_2d(const std::vector<ConvexPolytope>& pieces) {
  for (const ConvexPolytope& p : pieces)
    if (p.vertices2d.empty())
      throw std::invalid_argument("detect_shared_faces_2d: pieces need 2D vertices");

  double scale = 1.0;
  for (const ConvexPolytope& p : pieces)
    for (const Vec2& v : p.vertices2d)
      scale = std::max({scale, std::abs(v.x), std::abs(v.y)});
  const double tol = 1e-9 * scale;

  std::vector<SharedFace> shared;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      for (std::size_t ei = 0; ei < pieces[i].faces.size(); ++ei) {
        for (std::size_t ej = 0; ej < pieces[j].faces.size(); ++ej) {
          const Hyperplane& fi = pieces[i].faces[ei];
          const Hyperplane& fj = pieces[j].faces[ej];
          const double dp = fi.normal()[0] * fj.normal()[0] + fi.normal()[1] * fj.normal()[1];
          if (dp > -(1.0 - 1e-9)) continue;          // must be anti-parallel
          if (std::abs(fi.offset() + fj.offset()) > tol) continue;  // same line

          // Overlap of the two facet segments along the common tangent.
          const Vec2 t{-fi.normal()[1], fi.normal()[0]};
          auto facet_interval = [&](const ConvexPolytope& p, std::size_t e) {
            const Vec2 a = p.vertices2d[e];
            const Vec2 b = p.vertices2d[(e + 1) % p.vertices2d.size()];
            return std::pair<double, double>{std::min(dot(t, a), dot(t, b)),
                                             std::max(dot(t, a), dot(t, b))};
          };
          const auto [ai, bi] = facet_interval(pieces[i], ei);
          const auto [aj, bj] = facet_interval(pieces[j], ej);
          const double lo = std::max(ai, aj);
          const double hi = std::min(bi, bj);
          if (hi - lo <= tol) continue;

          const Vec2 base{fi.normal()[0] * fi.offset(), fi.normal()[1] * fi.offset()};
          shared.push_back({i, j, ei, ej, base + lo * t, base + hi * t});
        }
      }
    }
  }
  return shared;
}

ConstructionReport decomposition_composite(std::vector<ConvexPolytope> pieces,
                                           const std::vector<SharedFace>& shared,
                                           double eps) {
  require_eps(eps);
  if (pieces.empty())
    throw std::invalid_argument("decomposition_composite: no pieces");

  // Record slabs against the *original* geometry, then shrink later pieces.
  CompositeAccum acc;
  for (const SharedFace& sf : shared) {
    if (sf.earlier >= pieces.size() || sf.later >= pieces.size() || sf.earlier >= sf.later)
      throw std::invalid_argument("decomposition_composite: bad shared-face indices");
    acc.slabs.push_back({pieces[sf.earlier].faces[sf.face_earlier], sf.seg_p, sf.seg_q,
                         polytope_label(pieces[sf.earlier], sf.earlier) + "|" +
                             polytope_label(pieces[sf.later], sf.later)});
  }
  for (const SharedFace& sf : shared) {
    Hyperplane& face = pieces[sf.later].faces[sf.face_later];
    face = face.translated(-eps);
  }

  acc.constant = 1.0;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    acc.add(-1.0, convex_bump(pieces[j].faces, eps),
            {polytope_label(pieces[j], j), pieces[j].faces, ChainTopology::Closed, -1.0});
  }

  ReluNetwork net = affine_combine(acc.terms, acc.constant);
  std::string shape = net.shape_string();
  return ConstructionReport{std::move(net),   eps,
                            "decomposition-composite", std::move(shape),
                            std::move(acc.parts),      std::move(acc.slabs)};
}

ConstructionReport decomposition_composite(std::vector<ConvexPolytope> pieces, double eps) {
  const std::vector<SharedFace> shared = detect_shared_faces_2d(pieces);
  return decomposition_composite(std::move(pieces), shared, eps);
}

// ---------------------------------------------------------------------------
// piecewise_composite

ReluNetwork piecewise_composite(const PiecewiseConstantSpec& spec,
                                const std::vector<ReluNetwork>& per_region_nets) {
  if (spec.terms.empty())
    throw std::invalid_argument("piecewise_composite: no terms");
  if (spec.terms.size() != per_region_nets.size())
    throw std::invalid_argument("piecewise_composite: one network per term required");

  // Spot-check pairwise disjointness of the regions.
  const Box& box = spec.ambient_box;
  const std::size_t d = box.dim();
  CounterRng rng(kDefaultSeed ^ 0x9D15C0DEull);
  std::vector<double> x(d);
  for (std::uint64_t s = 0; s < 4096; ++s) {
    for (std::size_t k = 0; k < d; ++k)
      x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * rng.uniform01(s * d + k);
    std::size_t inside = 0;
    for (const auto& [alpha, region] : spec.terms)
      if (region.inside && region.inside(x)) ++inside;
    if (inside > 1)
      throw std::invalid_argument("piecewise_composite: regions overlap at a sampled point");
  }

  std::vector<std::pair<double, const ReluNetwork*>> terms;
  terms.reserve(per_region_nets.size());
  for (std::size_t i = 0; i < per_region_nets.size(); ++i)
    terms.emplace_back(spec.terms[i].first, &per_region_nets[i]);
  return affine_combine(terms, 0.0);
}

}  // namespace stepnet
