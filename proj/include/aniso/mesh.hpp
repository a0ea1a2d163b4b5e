#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "aniso/geometry.hpp"

namespace aniso {

/// Conforming P1 triangulation. Triangles are counter-clockwise.
struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<char> on_boundary;  // per node
  double h = 0.0;

  [[nodiscard]] std::vector<int> boundary_nodes() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
      if (on_boundary[i]) out.push_back(i);
    return out;
  }

  [[nodiscard]] double triangle_area(std::size_t t) const {
    const auto& tr = triangles[t];
    return 0.5 * detail::orient(nodes[tr[0]], nodes[tr[1]], nodes[tr[2]]);
  }

  [[nodiscard]] double area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) s += triangle_area(t);
    return s;
  }

  [[nodiscard]] double max_edge() const {
    double m = 0.0;
    for (const auto& tr : triangles)
      for (int k = 0; k < 3; ++k) m = std::max(m, (nodes[tr[k]] - nodes[tr[(k + 1) % 3]]).norm());
    return m;
  }

  /// Smallest interior angle over all triangles, in degrees.
  [[nodiscard]] double min_angle() const {
    double m = 180.0;
    for (const auto& tr : triangles) {
      for (int k = 0; k < 3; ++k) {
        const Vec2 u = nodes[tr[(k + 1) % 3]] - nodes[tr[k]];
        const Vec2 v = nodes[tr[(k + 2) % 3]] - nodes[tr[k]];
        m = std::min(m, std::atan2(std::abs(detail::cross(u, v)), u.dot(v)) * 180.0 / std::numbers::pi);
      }
    }
    return m;
  }
};

namespace detail {

// > 0 when d lies inside the circumcircle of the counter-clockwise triangle abc.
inline double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const Vec2 ad = a - d, bd = b - d, cd = c - d;
  return ad.squaredNorm() * cross(bd, cd) - bd.squaredNorm() * cross(ad, cd) + cd.squaredNorm() * cross(ad, bd);
}

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

inline std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& pts, double tol) {
  std::vector<int> ring(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) ring[i] = static_cast<int>(i);
  std::vector<std::array<int, 3>> tris;

  auto is_ear = [&](std::size_t k) {
    const std::size_t n = ring.size();
    const int a = ring[(k + n - 1) % n], b = ring[k], c = ring[(k + 1) % n];
    if (orient(pts[a], pts[b], pts[c]) <= tol) return false;
    for (std::size_t j = 0; j < n; ++j) {
      const int p = ring[j];
      if (p == a || p == b || p == c) continue;
      if (orient(pts[a], pts[b], pts[p]) >= -tol && orient(pts[b], pts[c], pts[p]) >= -tol &&
          orient(pts[c], pts[a], pts[p]) >= -tol)
        return false;
    }
    return true;
  };
  auto ear_quality = [&](std::size_t k) {
    const std::size_t n = ring.size();
    const Vec2& a = pts[ring[(k + n - 1) % n]];
    const Vec2& b = pts[ring[k]];
    const Vec2& c = pts[ring[(k + 1) % n]];
    const double l2 = (a - b).squaredNorm() + (b - c).squaredNorm() + (c - a).squaredNorm();
    return orient(a, b, c) / l2;
  };

  while (ring.size() > 3) {
    std::size_t best = ring.size();
    double best_q = -1.0;
    for (std::size_t k = 0; k < ring.size(); ++k) {
      if (!is_ear(k)) continue;
      const double q = ear_quality(k);
      if (q > best_q) {
        best_q = q;
        best = k;
      }
    }
    if (best == ring.size()) throw std::invalid_argument("mesh_polygon: no ear found (degenerate polygon)");
    const std::size_t n = ring.size();
    tris.push_back({ring[(best + n - 1) % n], ring[best], ring[(best + 1) % n]});
    ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(best));
  }
  tris.push_back({ring[0], ring[1], ring[2]});
  return tris;
}

// Triangulation with neighbour links, edited in place by edge bisection and
// Lawson flips. Polygon edges are constrained simply by having no neighbour.
class MeshBuilder {
 public:
  MeshBuilder(const Polygon2D& poly, double tol) : tol_(tol) {
    nodes_ = poly.vertices();
    on_boundary_.assign(nodes_.size(), 1);
    tris_ = ear_clip(nodes_, tol);
    link_neighbours();
    legalize_all();
  }

  void refine(double target_h) {
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry> heap;
    const double target2 = target_h * target_h;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) heap.emplace(longest2(t), t);
    std::vector<int> touched;
    while (!heap.empty()) {
      const auto [len2, t] = heap.top();
      heap.pop();
      if (len2 != longest2(t)) continue;  // stale
      if (len2 <= target2) break;
      touched.clear();
      bisect(t, longest_edge(t), touched);
      for (int s : touched) heap.emplace(longest2(s), s);
    }
  }

  [[nodiscard]] TriMesh finish() const {
    TriMesh m;
    m.nodes = nodes_;
    m.triangles = tris_;
    m.on_boundary = on_boundary_;
    m.h = m.max_edge();
    return m;
  }

 private:
  [[nodiscard]] double edge2(int t, int k) const {
    const auto& v = tris_[t];
    return (nodes_[v[(k + 1) % 3]] - nodes_[v[(k + 2) % 3]]).squaredNorm();
  }
  [[nodiscard]] int longest_edge(int t) const {
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (edge2(t, k) > edge2(t, best)) best = k;
    return best;
  }
  [[nodiscard]] double longest2(int t) const { return edge2(t, longest_edge(t)); }

  void link_neighbours() {
    nbr_.assign(tris_.size(), {-1, -1, -1});
    std::unordered_map<std::uint64_t, std::pair<int, int>> seen;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      for (int k = 0; k < 3; ++k) {
        const auto key = edge_key(tris_[t][(k + 1) % 3], tris_[t][(k + 2) % 3]);
        auto it = seen.find(key);
        if (it == seen.end()) {
          seen.emplace(key, std::make_pair(t, k));
        } else {
          nbr_[t][k] = it->second.first;
          nbr_[it->second.first][it->second.second] = t;
        }
      }
    }
  }

  void replace_nbr(int t, int from, int to) {
    if (t < 0) return;
    for (int k = 0; k < 3; ++k)
      if (nbr_[t][k] == from) {
        nbr_[t][k] = to;
        return;
      }
  }

  [[nodiscard]] int index_of(int t, int v) const {
    for (int k = 0; k < 3; ++k)
      if (tris_[t][k] == v) return k;
    return -1;
  }

  // Flips the edge opposite local vertex i of t if it is not locally Delaunay.
  bool try_flip(int t, int i) {
    const int u = nbr_[t][i];
    if (u < 0) return false;
    const int p = tris_[t][i], a = tris_[t][(i + 1) % 3], b = tris_[t][(i + 2) % 3];
    int j = -1;
    for (int k = 0; k < 3; ++k)
      if (nbr_[u][k] == t) j = k;
    const int q = tris_[u][j];
    const Vec2 &P = nodes_[p], &A = nodes_[a], &B = nodes_[b], &Q = nodes_[q];
    const double scale = std::max({(A - P).squaredNorm(), (B - P).squaredNorm(), (Q - P).squaredNorm()});
    if (incircle(P, A, B, Q) <= 1e-10 * scale * scale) return false;
    if (orient(P, A, Q) <= tol_ || orient(P, Q, B) <= tol_) return false;

    const int n_bp = nbr_[t][(i + 1) % 3];
    const int n_pa = nbr_[t][(i + 2) % 3];
    const int n_aq = nbr_[u][(j + 1) % 3];
    const int n_qb = nbr_[u][(j + 2) % 3];
    tris_[t] = {p, a, q};
    nbr_[t] = {n_aq, u, n_pa};
    tris_[u] = {p, q, b};
    nbr_[u] = {n_qb, n_bp, t};
    replace_nbr(n_aq, u, t);
    replace_nbr(n_bp, t, u);
    return true;
  }

  void legalize_around(int m, std::vector<int>& stack, std::vector<int>& touched) {
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      const int i = index_of(t, m);
      if (i < 0) continue;
      const int u = nbr_[t][i];
      if (try_flip(t, i)) {
        touched.push_back(t);
        touched.push_back(u);
        stack.push_back(t);
        stack.push_back(u);
      }
    }
  }

  void legalize_all() {
    for (int pass = 0; pass < 1000; ++pass) {
      bool flipped = false;
      for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
        for (int k = 0; k < 3; ++k) flipped |= try_flip(t, k);
      if (!flipped) return;
    }
  }

  // Splits the edge opposite local vertex i of t at its midpoint, together
  // with the neighbour across it, then restores the Delaunay property.
  void bisect(int t, int i, std::vector<int>& touched) {
    const int a = tris_[t][i], b = tris_[t][(i + 1) % 3], c = tris_[t][(i + 2) % 3];
    const int u = nbr_[t][i];
    const int nb_ab = nbr_[t][(i + 2) % 3];
    const int nb_ca = nbr_[t][(i + 1) % 3];

    const int m = static_cast<int>(nodes_.size());
    nodes_.push_back(0.5 * (nodes_[b] + nodes_[c]));
    on_boundary_.push_back(u < 0 ? 1 : 0);

    const int t2 = static_cast<int>(tris_.size());
    tris_.push_back({a, m, c});
    nbr_.push_back({-1, nb_ca, t});
    tris_[t] = {a, b, m};
    nbr_[t] = {-1, t2, nb_ab};
    replace_nbr(nb_ca, t, t2);
    touched.insert(touched.end(), {t, t2});

    if (u >= 0) {
      int j = -1;
      for (int k = 0; k < 3; ++k)
        if (nbr_[u][k] == t) j = k;
      // u is (w, c, b) up to rotation
      const int w = tris_[u][j];
      const int nb_bw = nbr_[u][(j + 1) % 3];
      const int nb_wc = nbr_[u][(j + 2) % 3];
      const int u2 = static_cast<int>(tris_.size());
      tris_.push_back({w, m, b});
      nbr_.push_back({t, nb_bw, u});
      tris_[u] = {w, c, m};
      nbr_[u] = {t2, u2, nb_wc};
      replace_nbr(nb_bw, u, u2);
      nbr_[t][0] = u2;
      nbr_[t2][0] = u;
      touched.insert(touched.end(), {u, u2});
    }

    std::vector<int> stack(touched.begin(), touched.end());
    legalize_around(m, stack, touched);
  }

  double tol_;
  std::vector<Vec2> nodes_;
  std::vector<char> on_boundary_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<std::array<int, 3>> nbr_;
};

}  // namespace detail

/// Ear clipping, constrained Delaunay flips, then longest-edge bisection until
/// every edge is at most target_h.
inline TriMesh mesh_polygon(const Polygon2D& poly, double target_h, double tol = kGeomTol) {
  if (!(target_h > 0.0)) throw std::invalid_argument("mesh_polygon: target_h must be positive");
  detail::MeshBuilder builder(poly, tol);
  builder.refine(target_h);
  return builder.finish();
}

/// Red refinement: every triangle split into four similar ones. Halves h and
/// nests the P1 spaces.
inline TriMesh refine_uniform(const TriMesh& mesh) {
  TriMesh out;
  out.nodes = mesh.nodes;
  out.on_boundary = mesh.on_boundary;
  std::unordered_map<std::uint64_t, int> count;
  for (const auto& tr : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++count[detail::edge_key(tr[k], tr[(k + 1) % 3])];

  std::unordered_map<std::uint64_t, int> mid;
  auto midpoint = [&](int a, int b) {
    const auto key = detail::edge_key(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
    out.on_boundary.push_back(count[key] == 1 ? 1 : 0);
    mid.emplace(key, id);
    return id;
  };

  out.triangles.reserve(4 * mesh.triangles.size());
  for (const auto& tr : mesh.triangles) {
    const int a = tr[0], b = tr[1], c = tr[2];
    const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({ab, b, bc});
    out.triangles.push_back({ca, bc, c});
    out.triangles.push_back({ab, bc, ca});
  }
  out.h = out.max_edge();
  return out;
}

/// The mesh of A * Omega obtained by moving the nodes.
inline TriMesh map_mesh(const TriMesh& mesh, const Mat2& a) {
  const double det = a.determinant();
  if (std::abs(det) <= kGeomTol) throw std::invalid_argument("non-invertible map");
  TriMesh out = mesh;
  for (auto& p : out.nodes) p = a * p;
  if (det < 0.0)
    for (auto& tr : out.triangles) std::swap(tr[1], tr[2]);
  out.h = out.max_edge();
  return out;
}

/// Plain-text dump: "x y" per node, "i j k" per triangle, then one line of
/// boundary node indices.
inline void write_mesh(std::ostream& os, const TriMesh& mesh) {
  const auto old = os.precision(17);
  for (const auto& p : mesh.nodes) os << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  const auto b = mesh.boundary_nodes();
  for (std::size_t i = 0; i < b.size(); ++i) os << (i ? " " : "") << b[i];
  os << '\n';
  os.precision(old);
}

}  // namespace aniso
