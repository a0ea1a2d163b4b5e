#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aniso/geometry.hpp"
#include "aniso/mesh.hpp"
#include "aniso/seminorm.hpp"
#include "aniso/slicing.hpp"

namespace aniso {

enum class Provenance { closed_form, slicing, fem, fem_richardson };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::closed_form: return "closed_form";
    case Provenance::slicing: return "slicing";
    case Provenance::fem: return "fem";
    case Provenance::fem_richardson: return "fem_richardson";
  }
  return "unknown";
}

enum class LinearSolver { direct, pcg };

struct SolverConfig {
  double target_h = 0.1;
  double linear_tol = 1e-10;  // relative residual (pcg)
  double eig_tol = 1e-8;      // relative change of successive Rayleigh quotients
  int max_iters = 20000;
  bool richardson = false;
  LinearSolver linear_solver = LinearSolver::direct;
  int ellipse_vertices = 256;  // polygonal approximation of planar ellipses for FEM

  void validate() const {
    if (!(target_h > 0.0)) throw std::invalid_argument("target_h must be positive");
    if (!(linear_tol > 0.0) || !(eig_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    if (ellipse_vertices < 8) throw std::invalid_argument("ellipse_vertices must be at least 8");
  }
};

/// lambda and torsion of one (domain, seminorm) pair. error_estimate is the
/// largest relative change between the h and h/2 solves and is only
/// populated for fem_richardson; exact paths report 0. A zero seminorm gives
/// degenerate = true with lambda = 0 and torsion = +inf.
struct SpectralResult {
  double lambda = 0.0;
  double torsion = 0.0;
  double h_used = 0.0;
  double error_estimate = 0.0;
  Provenance provenance = Provenance::fem;
  bool degenerate = false;
};

inline SpectralResult degenerate_result() {
  SpectralResult r;
  r.torsion = std::numeric_limits<double>::infinity();
  r.provenance = Provenance::closed_form;
  r.degenerate = true;
  return r;
}

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// P1 assembly on interior nodes
// ---------------------------------------------------------------------------

using SparseMatrix = Eigen::SparseMatrix<double>;

struct P1System {
  SparseMatrix stiffness;
  SparseMatrix mass;
  Eigen::VectorXd load;
};

inline P1System assemble_p1(const TriMesh& mesh) {
  const int n = static_cast<int>(mesh.nodes.size());
  std::vector<int> dof(n, -1);
  int ndof = 0;
  for (int i = 0; i < n; ++i)
    if (!mesh.on_boundary[i]) dof[i] = ndof++;
  if (ndof == 0) throw SolverError("mesh has no interior nodes; decrease target_h");

  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(9 * mesh.triangles.size());
  mt.reserve(9 * mesh.triangles.size());
  Eigen::VectorXd load = Eigen::VectorXd::Zero(ndof);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tr = mesh.triangles[t];
    const double area = mesh.triangle_area(t);
    if (!(area > 0.0)) throw SolverError("mesh has a non-positive triangle");
    double b[3], c[3];
    for (int i = 0; i < 3; ++i) {
      const Vec2& p1 = mesh.nodes[tr[(i + 1) % 3]];
      const Vec2& p2 = mesh.nodes[tr[(i + 2) % 3]];
      b[i] = p1.y() - p2.y();
      c[i] = p2.x() - p1.x();
    }
    for (int i = 0; i < 3; ++i) {
      const int di = dof[tr[i]];
      if (di < 0) continue;
      load[di] += area / 3.0;
      for (int j = 0; j < 3; ++j) {
        const int dj = dof[tr[j]];
        if (dj < 0) continue;
        kt.emplace_back(di, dj, (b[i] * b[j] + c[i] * c[j]) / (4.0 * area));
        mt.emplace_back(di, dj, area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }
  P1System sys;
  sys.stiffness.resize(ndof, ndof);
  sys.mass.resize(ndof, ndof);
  sys.stiffness.setFromTriplets(kt.begin(), kt.end());
  sys.mass.setFromTriplets(mt.begin(), mt.end());
  sys.load = std::move(load);
  return sys;
}

// Symmetric positive definite solve, either sparse Cholesky or CG with a
// Jacobi preconditioner.
class SpdSolver {
 public:
  SpdSolver(const SparseMatrix& a, const SolverConfig& cfg) : kind_(cfg.linear_solver) {
    if (kind_ == LinearSolver::direct) {
      ldlt_.compute(a);
      if (ldlt_.info() != Eigen::Success) throw SolverError("sparse factorization failed");
    } else {
      cg_.setTolerance(cfg.linear_tol);
      cg_.setMaxIterations(cfg.max_iters);
      cg_.compute(a);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) {
    if (kind_ == LinearSolver::direct) return ldlt_.solve(rhs);
    Eigen::VectorXd x = cg_.solve(rhs);
    if (cg_.info() != Eigen::Success)
      throw SolverError("conjugate gradient did not converge: residual " + std::to_string(cg_.error()) + " after " +
                        std::to_string(cg_.iterations()) + " iterations");
    return x;
  }

 private:
  LinearSolver kind_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg_;
};

/// T_h = F^T u with K u = F.
inline double discrete_torsion(const P1System& sys, const SolverConfig& cfg) {
  SpdSolver solver(sys.stiffness, cfg);
  const Eigen::VectorXd u = solver.solve(sys.load);
  return sys.load.dot(u);
}

/// Smallest eigenvalue of K x = lambda M x by inverse iteration on K - shift M.
/// shift must be a lower bound for the first eigenvalue.
inline double discrete_eigenvalue(const P1System& sys, double shift, const SolverConfig& cfg) {
  const SparseMatrix a = sys.stiffness - shift * sys.mass;
  SpdSolver solver(a, cfg);
  Eigen::VectorXd x = sys.load;
  x /= std::sqrt(x.dot(sys.mass * x));
  double rho = x.dot(sys.stiffness * x);
  for (int it = 0; it < cfg.max_iters; ++it) {
    Eigen::VectorXd y = solver.solve(sys.mass * x);
    y /= std::sqrt(y.dot(sys.mass * y));
    const double next = y.dot(sys.stiffness * y);
    x = std::move(y);
    if (std::abs(next - rho) < cfg.eig_tol * std::abs(next)) {
      if (next < shift) throw SolverError("inverse iteration converged below the spectral shift");
      return next;
    }
    rho = next;
  }
  throw SolverError("inverse iteration did not converge in " + std::to_string(cfg.max_iters) +
                    " iterations (last Rayleigh quotient " + std::to_string(rho) + ")");
}

/// Lower bound for lambda_H(poly) from rank-1 minorants: for a quadratic form
/// G and any unit u, H(xi) >= |<xi, G u>| / sqrt(u^T G u).
inline double rank1_eigen_lower_bound(const Polygon2D& poly, const Mat2& gram) {
  std::vector<Vec2> dirs;
  Eigen::SelfAdjointEigenSolver<Mat2> eig(gram);
  dirs.push_back(eig.eigenvectors().col(0));
  dirs.push_back(eig.eigenvectors().col(1));
  for (int k = 0; k < 12; ++k) dirs.push_back(Direction::from_angle(std::numbers::pi * k / 12.0).as2d());
  double best = 0.0;
  for (const auto& u : dirs) {
    const double guu = u.dot(gram * u);
    if (!(guu > 0.0)) continue;
    const Vec2 w = gram * u / std::sqrt(guu);
    best = std::max(best, lambda_rank1_polygon(poly, Rank1Seminorm(Eigen::VectorXd(w))));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Cached discretization of one polygon
// ---------------------------------------------------------------------------

/// Meshes a polygon once (and its red refinement when Richardson is on) and
/// solves on linear images of those meshes. For a quadratic seminorm
/// H(xi) = |diag(alpha) R^T xi| with alpha > 0 and L = diag(alpha)^-1 R^T,
/// u(x) = v(L x) gives H(grad u) = |grad v|, so
///   lambda_H(Omega) = lambda(L Omega),   T_H(Omega) = alpha_1 alpha_2 T(L Omega).
class FemDiscretization {
 public:
  FemDiscretization(Polygon2D poly, SolverConfig cfg) : poly_(std::move(poly)), cfg_(cfg) {
    cfg_.validate();
    coarse_ = mesh_polygon(poly_, cfg_.target_h);
    if (cfg_.richardson) fine_ = refine_uniform(coarse_);
  }

  [[nodiscard]] const Polygon2D& domain() const noexcept { return poly_; }
  [[nodiscard]] const SolverConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const TriMesh& coarse_mesh() const noexcept { return coarse_; }
  [[nodiscard]] const std::optional<TriMesh>& fine_mesh() const noexcept { return fine_; }

  [[nodiscard]] SpectralResult euclidean(bool want_lambda = true, bool want_torsion = true) const {
    return run(Mat2::Identity(), 1.0, Mat2::Identity(), want_lambda, want_torsion);
  }

  /// Planar quadratic seminorm with both coefficients positive.
  [[nodiscard]] SpectralResult quadratic(const QuadraticSeminorm& h, bool want_lambda = true,
                                         bool want_torsion = true) const {
    if (h.dim() != 2) throw std::invalid_argument("FEM path needs a planar seminorm");
    const Eigen::Vector2d alpha = h.alphas();
    if (!(alpha.minCoeff() > 0.0)) throw std::invalid_argument("FEM path needs both coefficients positive");
    const Mat2 r = h.rotation();
    const Mat2 l = alpha.cwiseInverse().asDiagonal() * r.transpose();
    return run(l, alpha.prod(), Mat2(h.gram()), want_lambda, want_torsion);
  }

 private:
  struct Level {
    double lambda = 0.0;
    double torsion = 0.0;
  };

  Level solve_level(const TriMesh& base, const Mat2& l, double det_factor, double shift, bool want_lambda,
                    bool want_torsion) const {
    const P1System sys = assemble_p1(map_mesh(base, l));
    Level out;
    if (want_torsion) out.torsion = det_factor * discrete_torsion(sys, cfg_);
    if (want_lambda) out.lambda = discrete_eigenvalue(sys, shift, cfg_);
    return out;
  }

  SpectralResult run(const Mat2& l, double det_factor, const Mat2& gram, bool want_lambda, bool want_torsion) const {
    const double shift = want_lambda ? (1.0 - 1e-6) * rank1_eigen_lower_bound(poly_, gram) : 0.0;
    SpectralResult res;
    const Level c = solve_level(coarse_, l, det_factor, shift, want_lambda, want_torsion);
    if (!fine_) {
      res.lambda = c.lambda;
      res.torsion = c.torsion;
      res.h_used = coarse_.h;
      res.provenance = Provenance::fem;
      return res;
    }
    const Level f = solve_level(*fine_, l, det_factor, shift, want_lambda, want_torsion);
    res.lambda = (4.0 * f.lambda - c.lambda) / 3.0;
    res.torsion = (4.0 * f.torsion - c.torsion) / 3.0;
    res.h_used = fine_->h;
    res.provenance = Provenance::fem_richardson;
    double err = 0.0;
    if (want_lambda) err = std::max(err, std::abs(f.lambda - c.lambda) / res.lambda);
    if (want_torsion) err = std::max(err, std::abs(f.torsion - c.torsion) / res.torsion);
    res.error_estimate = err;
    return res;
  }

  Polygon2D poly_;
  SolverConfig cfg_;
  TriMesh coarse_;
  std::optional<TriMesh> fine_;
};

inline SpectralResult torsion_euclid_fem(const Polygon2D& poly, const SolverConfig& cfg) {
  return FemDiscretization(poly, cfg).euclidean(false, true);
}

inline SpectralResult lambda_euclid_fem(const Polygon2D& poly, const SolverConfig& cfg) {
  return FemDiscretization(poly, cfg).euclidean(true, false);
}

/// Quadratic seminorm on a polygon: FEM on the transformed domain when both
/// coefficients are positive, exact slicing when exactly one is.
inline SpectralResult solve_quadratic(const Polygon2D& poly, const QuadraticSeminorm& h, const SolverConfig& cfg) {
  if (h.dim() != 2) throw std::invalid_argument("solve_quadratic: planar seminorm required");
  switch (kernel_codim(h)) {
    case 0: return degenerate_result();
    case 1: {
      const auto s = solve_rank1_polygon(poly, rank1_reduction(h));
      SpectralResult r;
      r.lambda = s.lambda;
      r.torsion = s.torsion;
      r.provenance = Provenance::slicing;
      return r;
    }
    default: return FemDiscretization(poly, cfg).quadratic(h);
  }
}

}  // namespace aniso
