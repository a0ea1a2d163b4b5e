#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "aniso/geometry.hpp"
#include "aniso/seminorm.hpp"

namespace aniso {

struct SlicingResult {
  double lambda = 0.0;
  double torsion = 0.0;
  int breakpoints_used = 0;
};

namespace detail {

// Exact integral of l(t)^3 over [t0, t1] for l affine with end values a, b.
inline double cube_integral(double t0, double t1, double a, double b) {
  return (t1 - t0) * (a * a * a + a * a * b + a * b * b + b * b * b) / 4.0;
}

inline double torsion_unit_rank1(const std::vector<Slab>& slabs) {
  double sum = 0.0;
  for (const auto& slab : slabs)
    for (const auto& c : slab.chords) sum += cube_integral(slab.t_lo, slab.t_hi, c.length_lo, c.length_hi);
  return sum / 12.0;
}

inline Direction chord_direction(const Rank1Seminorm& h) {
  if (h.dim() != 2) throw std::invalid_argument("slicing solver needs a planar seminorm");
  return Direction(h.eta());
}

}  // namespace detail

/// pi^2 |eta|^2 / L_eta(poly)^2.
inline double lambda_rank1_polygon(const Polygon2D& poly, const Rank1Seminorm& h, double tol = kGeomTol) {
  const double width = directional_width(poly, detail::chord_direction(h), tol);
  if (!(width > tol)) throw std::runtime_error("lambda_rank1_polygon: zero directional width");
  const double s = h.eta().norm();
  return s * s * std::numbers::pi * std::numbers::pi / (width * width);
}

/// Integral over slice offsets of sum |I|^3 / 12, divided by |eta|^2.
inline double torsion_rank1_polygon(const Polygon2D& poly, const Rank1Seminorm& h, double tol = kGeomTol) {
  const auto slabs = slab_decomposition(poly, detail::chord_direction(h), tol);
  const double s = h.eta().norm();
  return detail::torsion_unit_rank1(slabs) / (s * s);
}

inline SlicingResult solve_rank1_polygon(const Polygon2D& poly, const Rank1Seminorm& h, double tol = kGeomTol) {
  const Direction omega = detail::chord_direction(h);
  const auto slabs = slab_decomposition(poly, omega, tol);
  double width = 0.0;
  for (const auto& slab : slabs)
    for (const auto& c : slab.chords) width = std::max({width, c.length_lo, c.length_hi});
  if (!(width > tol)) throw std::runtime_error("lambda_rank1_polygon: zero directional width");
  const double s2 = h.eta().squaredNorm();
  SlicingResult out;
  out.lambda = s2 * std::numbers::pi * std::numbers::pi / (width * width);
  out.torsion = detail::torsion_unit_rank1(slabs) / s2;
  out.breakpoints_used = static_cast<int>(slabs.size()) + 1;
  return out;
}

}  // namespace aniso
