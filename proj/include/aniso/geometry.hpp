#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "aniso/special_functions.hpp"

namespace aniso {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Default absolute tolerance for geometric predicates.
inline constexpr double kGeomTol = 1e-12;

namespace detail {

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

inline bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double tol) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm() <= tol;
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (a + s * ab - p).norm() <= tol;
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double tol) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > tol && o2 < -tol) || (o1 < -tol && o2 > tol)) &&
      ((o3 > tol && o4 < -tol) || (o3 < -tol && o4 > tol)))
    return true;
  return on_segment(c, a, b, tol) || on_segment(d, a, b, tol) || on_segment(a, c, d, tol) ||
         on_segment(b, c, d, tol);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Open polygon given by its closed vertex loop. Stored counter-clockwise.
class Polygon2D {
 public:
  explicit Polygon2D(std::vector<Vec2> vertices, double tol = kGeomTol) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
    if (signed_area_of(vertices_) < 0.0) std::reverse(vertices_.begin(), vertices_.end());
    if (signed_area_of(vertices_) <= tol) throw std::invalid_argument("polygon has non-positive area");
    check_simple(tol);
    convex_ = true;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (detail::orient(vertices_[i], vertices_[(i + 1) % n], vertices_[(i + 2) % n]) < -tol) {
        convex_ = false;
        break;
      }
    }
  }

  [[nodiscard]] const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] std::size_t size() const noexcept { return vertices_.size(); }
  [[nodiscard]] const Vec2& operator[](std::size_t i) const { return vertices_[i]; }
  [[nodiscard]] bool is_convex() const noexcept { return convex_; }
  [[nodiscard]] double signed_area() const { return signed_area_of(vertices_); }

  /// Strict interior membership: inside and farther than tol from the boundary.
  [[nodiscard]] bool contains(const Vec2& p, double tol = kGeomTol) const {
    const std::size_t n = vertices_.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Vec2& a = vertices_[i];
      const Vec2& b = vertices_[j];
      if (detail::on_segment(p, a, b, tol)) return false;
      if ((a.y() > p.y()) != (b.y() > p.y())) {
        const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
        if (p.x() < x) inside = !inside;
      }
    }
    return inside;
  }

  static double signed_area_of(const std::vector<Vec2>& v) {
    double s = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) s += detail::cross(v[i], v[(i + 1) % n]);
    return 0.5 * s;
  }

 private:
  void check_simple(double tol) const {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = vertices_[i];
      const Vec2& b = vertices_[(i + 1) % n];
      if ((b - a).norm() <= tol) throw std::invalid_argument("polygon has a repeated vertex");
      // adjacent edge folding back onto this one
      const Vec2& c = vertices_[(i + 2) % n];
      if (std::abs(detail::orient(a, b, c)) <= tol && (c - b).dot(a - b) > 0.0)
        throw std::invalid_argument("polygon is self-intersecting");
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (detail::segments_intersect(a, b, vertices_[j], vertices_[(j + 1) % n], tol))
          throw std::invalid_argument("polygon is self-intersecting");
      }
    }
  }

  std::vector<Vec2> vertices_;
  bool convex_ = false;
};

/// Axis-aligned box prod (a_i, b_i).
class BoxD {
 public:
  explicit BoxD(std::vector<std::pair<double, double>> intervals) : intervals_(std::move(intervals)) {
    if (intervals_.empty()) throw std::invalid_argument("box needs at least one interval");
    for (const auto& [a, b] : intervals_)
      if (!(a < b)) throw std::invalid_argument("box interval must satisfy a < b");
  }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(intervals_.size()); }
  [[nodiscard]] const std::vector<std::pair<double, double>>& intervals() const noexcept { return intervals_; }
  [[nodiscard]] double length(int i) const { return intervals_[i].second - intervals_[i].first; }

 private:
  std::vector<std::pair<double, double>> intervals_;
};

/// Ellipsoid { rotation * diag(semi_axes) * y : |y| < 1 }.
class EllipsoidD {
 public:
  explicit EllipsoidD(Eigen::VectorXd semi_axes)
      : EllipsoidD(semi_axes, Eigen::MatrixXd::Identity(semi_axes.size(), semi_axes.size())) {}

  EllipsoidD(Eigen::VectorXd semi_axes, Eigen::MatrixXd rotation, double tol = kGeomTol)
      : semi_axes_(std::move(semi_axes)), rotation_(std::move(rotation)) {
    const auto d = semi_axes_.size();
    if (d < 1) throw std::invalid_argument("ellipsoid needs at least one axis");
    if (rotation_.rows() != d || rotation_.cols() != d)
      throw std::invalid_argument("ellipsoid rotation has wrong shape");
    if ((semi_axes_.array() <= 0.0).any()) throw std::invalid_argument("ellipsoid semi-axes must be positive");
    const Eigen::MatrixXd gram = rotation_.transpose() * rotation_;
    if ((gram - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("ellipsoid rotation is not orthogonal");
  }

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(semi_axes_.size()); }
  [[nodiscard]] const Eigen::VectorXd& semi_axes() const noexcept { return semi_axes_; }
  [[nodiscard]] const Eigen::MatrixXd& rotation() const noexcept { return rotation_; }

 private:
  Eigen::VectorXd semi_axes_;
  Eigen::MatrixXd rotation_;
};

using Domain = std::variant<Polygon2D, BoxD, EllipsoidD>;

/// Unit vector; the constructor normalizes.
class Direction {
 public:
  explicit Direction(Eigen::VectorXd v) : v_(std::move(v)) {
    const double n = v_.norm();
    if (!(n > 0.0)) throw std::invalid_argument("direction must be nonzero");
    v_ /= n;
  }
  Direction(double x, double y) : Direction(Eigen::Vector2d(x, y)) {}
  static Direction from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

  [[nodiscard]] const Eigen::VectorXd& vector() const noexcept { return v_; }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(v_.size()); }
  [[nodiscard]] Vec2 as2d() const {
    if (v_.size() != 2) throw std::invalid_argument("expected a planar direction");
    return {v_[0], v_[1]};
  }

 private:
  Eigen::VectorXd v_;
};

struct SliceSet {
  double offset = 0.0;
  std::vector<std::pair<double, double>> intervals;

  [[nodiscard]] double total_length() const {
    double s = 0.0;
    for (const auto& [a, b] : intervals) s += b - a;
    return s;
  }
  [[nodiscard]] double longest() const {
    double s = 0.0;
    for (const auto& [a, b] : intervals) s = std::max(s, b - a);
    return s;
  }
};

// ---------------------------------------------------------------------------
// Measure
// ---------------------------------------------------------------------------

inline double measure(const Polygon2D& p) { return p.signed_area(); }

inline double measure(const BoxD& b) {
  double m = 1.0;
  for (int i = 0; i < b.dim(); ++i) m *= b.length(i);
  return m;
}

inline double measure(const EllipsoidD& e) { return unit_ball_volume(e.dim()) * e.semi_axes().prod(); }

inline double measure(const Domain& d) {
  return std::visit([](const auto& x) { return measure(x); }, d);
}

// ---------------------------------------------------------------------------
// Slicing frame: rotate so that the chord direction omega becomes the second
// axis. A point p maps to (t, s) with t = <p, omega_perp> the slice offset and
// s = <p, omega> the position along the chord.
// ---------------------------------------------------------------------------

struct SliceFrame {
  Vec2 omega;
  [[nodiscard]] double offset(const Vec2& p) const { return omega.y() * p.x() - omega.x() * p.y(); }
  [[nodiscard]] double along(const Vec2& p) const { return omega.dot(p); }
  [[nodiscard]] Vec2 to_local(const Vec2& p) const { return {offset(p), along(p)}; }
  [[nodiscard]] Vec2 from_local(const Vec2& q) const {
    return {omega.y() * q.x() + omega.x() * q.y(), -omega.x() * q.x() + omega.y() * q.y()};
  }
};

inline std::vector<double> slab_breakpoints(const Polygon2D& poly, const Direction& omega, double tol = kGeomTol) {
  const SliceFrame frame{omega.as2d()};
  std::vector<double> ts;
  ts.reserve(poly.size());
  for (const auto& v : poly.vertices()) ts.push_back(frame.offset(v));
  std::sort(ts.begin(), ts.end());
  std::vector<double> out;
  for (double t : ts)
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  return out;
}

/// The open intervals of { s : (t, s) in R Omega }.
inline SliceSet slice(const Polygon2D& poly, const Direction& omega, double t, double tol = kGeomTol) {
  const SliceFrame frame{omega.as2d()};
  const std::size_t n = poly.size();
  std::vector<Vec2> local(n);
  for (std::size_t i = 0; i < n; ++i) local[i] = frame.to_local(poly[i]);

  std::vector<double> cand;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = local[i];
    const Vec2& b = local[(i + 1) % n];
    const double lo = std::min(a.x(), b.x()), hi = std::max(a.x(), b.x());
    if (t < lo - tol || t > hi + tol) continue;
    if (hi - lo <= tol) {
      cand.push_back(a.y());
      cand.push_back(b.y());
    } else {
      const double u = std::clamp((t - a.x()) / (b.x() - a.x()), 0.0, 1.0);
      cand.push_back(a.y() + u * (b.y() - a.y()));
    }
  }
  std::sort(cand.begin(), cand.end());

  SliceSet out;
  out.offset = t;
  for (std::size_t k = 0; k + 1 < cand.size(); ++k) {
    const double lo = cand[k], hi = cand[k + 1];
    if (hi - lo <= tol) continue;
    const Vec2 mid = frame.from_local({t, 0.5 * (lo + hi)});
    if (poly.contains(mid, tol)) out.intervals.emplace_back(lo, hi);
  }
  return out;
}

/// A connected chord inside one open slab; its length is affine in the offset.
struct SlabChord {
  double length_lo;  // limit at the lower slab end
  double length_hi;  // limit at the upper slab end
};

struct Slab {
  double t_lo;
  double t_hi;
  std::vector<SlabChord> chords;
};

/// Decomposes the polygon into open slabs between consecutive breakpoints.
/// Inside a slab the set of crossing edges is fixed, so each chord length is
/// affine in t and is described exactly by its two end limits.
inline std::vector<Slab> slab_decomposition(const Polygon2D& poly, const Direction& omega, double tol = kGeomTol) {
  const SliceFrame frame{omega.as2d()};
  const std::size_t n = poly.size();
  std::vector<Vec2> local(n);
  for (std::size_t i = 0; i < n; ++i) local[i] = frame.to_local(poly[i]);
  const auto bps = slab_breakpoints(poly, omega, tol);

  auto edge_at = [&](std::size_t e, double t) {
    const Vec2& a = local[e];
    const Vec2& b = local[(e + 1) % n];
    return a.y() + (t - a.x()) * (b.y() - a.y()) / (b.x() - a.x());
  };

  // Each edge spans a contiguous run of slabs.
  std::vector<std::vector<std::size_t>> spanning(bps.empty() ? 0 : bps.size() - 1);
  for (std::size_t e = 0; e < n; ++e) {
    const double lo = std::min(local[e].x(), local[(e + 1) % n].x());
    const double hi = std::max(local[e].x(), local[(e + 1) % n].x());
    if (hi - lo <= tol) continue;
    const auto i0 = std::lower_bound(bps.begin(), bps.end(), lo - tol) - bps.begin();
    const auto i1 = std::lower_bound(bps.begin(), bps.end(), hi - tol) - bps.begin();
    for (auto k = i0; k < i1; ++k) spanning[k].push_back(e);
  }

  std::vector<Slab> slabs;
  std::vector<std::pair<double, std::size_t>> hits;
  for (std::size_t k = 0; k + 1 < bps.size(); ++k) {
    const double t0 = bps[k], t1 = bps[k + 1];
    const double tm = 0.5 * (t0 + t1);
    hits.clear();
    for (std::size_t e : spanning[k]) {
      const Vec2& a = local[e];
      const Vec2& b = local[(e + 1) % n];
      if ((a.x() < tm) != (b.x() < tm)) hits.emplace_back(edge_at(e, tm), e);
    }
    std::sort(hits.begin(), hits.end());
    Slab slab{t0, t1, {}};
    for (std::size_t h = 0; h + 1 < hits.size(); h += 2) {
      const std::size_t lo = hits[h].second, hi = hits[h + 1].second;
      slab.chords.push_back({std::max(0.0, edge_at(hi, t0) - edge_at(lo, t0)),
                             std::max(0.0, edge_at(hi, t1) - edge_at(lo, t1))});
    }
    slabs.push_back(std::move(slab));
  }
  return slabs;
}

/// Longest connected segment inside the polygon parallel to omega.
inline double directional_width(const Polygon2D& poly, const Direction& omega, double tol = kGeomTol) {
  double best = 0.0;
  for (const auto& slab : slab_decomposition(poly, omega, tol))
    for (const auto& c : slab.chords) best = std::max({best, c.length_lo, c.length_hi});
  return best;
}

inline double diameter(const Polygon2D& poly) {
  double best = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) best = std::max(best, (poly[i] - poly[j]).norm());
  return best;
}

inline bool is_centrally_symmetric(const Polygon2D& poly, double tol = 1e-9) {
  const std::size_t n = poly.size();
  if (n % 2 != 0) return false;
  const Vec2 c = 0.5 * (poly[0] + poly[n / 2]);
  for (std::size_t i = 0; i < n / 2; ++i)
    if ((poly[i] + poly[i + n / 2] - 2.0 * c).norm() > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Linear images
// ---------------------------------------------------------------------------

inline Polygon2D linear_image(const Polygon2D& poly, const Mat2& a, double tol = kGeomTol) {
  if (std::abs(a.determinant()) <= tol) throw std::invalid_argument("non-invertible map");
  std::vector<Vec2> v;
  v.reserve(poly.size());
  for (const auto& p : poly.vertices()) v.push_back(a * p);
  return Polygon2D(std::move(v));  // the constructor restores CCW order when det < 0
}

namespace detail {

// Sign convention for orthonormal columns: largest-magnitude entry positive.
inline void fix_column_signs(Eigen::MatrixXd& u) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index imax = 0;
    u.col(j).cwiseAbs().maxCoeff(&imax);
    if (u(imax, j) < 0.0) u.col(j) *= -1.0;
  }
}

// Re-picks the basis of every group of (numerically) equal values: the
// standard axes are projected onto the group's subspace in lexicographic order
// and orthonormalized.
inline void canonicalize_tied_groups(const Eigen::VectorXd& values, Eigen::MatrixXd& basis, double rel_tol = 1e-12) {
  const Eigen::Index d = values.size();
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index end = start + 1;
    const double scale = std::max(std::abs(values[start]), 1.0);
    while (end < d && std::abs(values[end] - values[start]) <= rel_tol * scale) ++end;
    const Eigen::Index g = end - start;
    if (g > 1) {
      const Eigen::MatrixXd group = basis.middleCols(start, g);
      const Eigen::MatrixXd proj = group * group.transpose();
      Eigen::MatrixXd picked(d, g);
      Eigen::Index found = 0;
      for (Eigen::Index i = 0; i < d && found < g; ++i) {
        Eigen::VectorXd v = proj.col(i);
        for (Eigen::Index k = 0; k < found; ++k) v -= picked.col(k).dot(v) * picked.col(k);
        if (v.norm() > 1e-8) picked.col(found++) = v.normalized();
      }
      if (found == g) basis.middleCols(start, g) = picked;
    }
    start = end;
  }
}

}  // namespace detail

/// A * E, returned with semi-axes descending and canonical axis directions.
inline EllipsoidD linear_image(const EllipsoidD& e, const Eigen::MatrixXd& a, double tol = kGeomTol) {
  if (a.rows() != e.dim() || a.cols() != e.dim()) throw std::invalid_argument("map has wrong dimension");
  if (std::abs(a.determinant()) <= tol) throw std::invalid_argument("non-invertible map");
  const Eigen::MatrixXd m = a * e.rotation() * e.semi_axes().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
  Eigen::VectorXd sigma = svd.singularValues();
  Eigen::MatrixXd u = svd.matrixU();
  detail::canonicalize_tied_groups(sigma, u);
  detail::fix_column_signs(u);
  return EllipsoidD(sigma, u, 1e-10);
}

inline Polygon2D polygonize(const EllipsoidD& e, int vertices) {
  if (e.dim() != 2) throw std::invalid_argument("polygonize: ellipse must be planar");
  if (vertices < 3) throw std::invalid_argument("polygonize: need at least 3 vertices");
  const Mat2 r = e.rotation();
  std::vector<Vec2> v;
  v.reserve(vertices);
  for (int k = 0; k < vertices; ++k) {
    const double t = 2.0 * std::numbers::pi * k / vertices;
    v.push_back(r * Vec2(e.semi_axes()[0] * std::cos(t), e.semi_axes()[1] * std::sin(t)));
  }
  return Polygon2D(std::move(v));
}

inline Polygon2D to_polygon(const BoxD& b) {
  if (b.dim() != 2) throw std::invalid_argument("only planar boxes convert to polygons");
  const auto& iv = b.intervals();
  return Polygon2D({{iv[0].first, iv[1].first},
                    {iv[0].second, iv[1].first},
                    {iv[0].second, iv[1].second},
                    {iv[0].first, iv[1].second}});
}

inline Mat2 rotation2d(double theta) {
  Mat2 r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

}  // namespace aniso
