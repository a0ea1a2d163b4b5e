#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "aniso/closed_form.hpp"
#include "aniso/fem.hpp"
#include "oracles.hpp"

using namespace aniso;

namespace {

const double kPi = std::numbers::pi;
const double kPi2 = kPi * kPi;

Polygon2D unit_square() { return Polygon2D({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }
Polygon2D disc256() { return Polygon2D(oracle::regular_polygon(256)); }

SolverConfig accurate() {
  SolverConfig cfg;
  cfg.target_h = 0.05;
  cfg.richardson = true;
  return cfg;
}

SolverConfig coarse(double h = 0.2) {
  SolverConfig cfg;
  cfg.target_h = h;
  return cfg;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Discrete {
  double lambda;
  double torsion;
};

Discrete discrete(const TriMesh& m) {
  const P1System sys = assemble_p1(m);
  const SolverConfig cfg;
  return {discrete_eigenvalue(sys, 0.0, cfg), discrete_torsion(sys, cfg)};
}

}  // namespace

TEST(TorsionFem, Examples) {
  const auto disc = torsion_euclid_fem(disc256(), accurate());
  EXPECT_LT(rel(disc.torsion, kPi / 8.0), 5e-3);
  EXPECT_EQ(disc.provenance, Provenance::fem_richardson);
  EXPECT_GT(disc.error_estimate, 0.0);
  EXPECT_NEAR(disc.h_used, 0.5 * mesh_polygon(disc256(), 0.05).h, 1e-12);

  EXPECT_LT(rel(torsion_euclid_fem(unit_square(), accurate()).torsion, oracle::square_torsion()), 5e-3);
  EXPECT_NEAR(oracle::square_torsion(), 0.0351443, 1e-7);

  const Polygon2D ell(oracle::regular_polygon(256, 2.0, 1.0));
  EXPECT_LT(rel(torsion_euclid_fem(ell, accurate()).torsion, 2.0 * kPi / 5.0), 5e-3);
}

TEST(LambdaFem, Examples) {
  EXPECT_LT(rel(lambda_euclid_fem(unit_square(), accurate()).lambda, oracle::rectangle_eigenvalue(1, 1)), 5e-3);
  EXPECT_LT(rel(lambda_euclid_fem(disc256(), accurate()).lambda, oracle::disc_eigenvalue()), 5e-3);
  const Polygon2D box = to_polygon(BoxD({{0, 1}, {0, 2}}));
  EXPECT_LT(rel(lambda_euclid_fem(box, accurate()).lambda, kPi2 * 1.25), 5e-3);
}

TEST(LambdaFem, WithoutRichardsonIsUpperBound) {
  // conforming P1 eigenvalues sit above the exact value
  const auto r = lambda_euclid_fem(unit_square(), coarse(0.1));
  EXPECT_EQ(r.provenance, Provenance::fem);
  EXPECT_EQ(r.error_estimate, 0.0);
  EXPECT_GT(r.lambda, 2.0 * kPi2);
  EXPECT_LT(rel(r.lambda, 2.0 * kPi2), 3e-2);
}

TEST(SolveQuadratic, Examples) {
  const auto a = solve_quadratic(disc256(), QuadraticSeminorm(Eigen::Vector2d(1, 1)), accurate());
  EXPECT_LT(rel(a.lambda, oracle::disc_eigenvalue()), 5e-3);
  EXPECT_LT(rel(a.torsion, kPi / 8.0), 5e-3);

  const auto b = solve_quadratic(disc256(), QuadraticSeminorm(Eigen::Vector2d(0.5, 1)), accurate());
  EXPECT_LT(rel(b.torsion, kPi / 5.0), 5e-3);

  const auto c = solve_quadratic(unit_square(), QuadraticSeminorm(Eigen::Vector2d(0, 1)), accurate());
  EXPECT_EQ(c.provenance, Provenance::slicing);
  EXPECT_NEAR(c.lambda, kPi2, 1e-12);
  EXPECT_NEAR(c.torsion, 1.0 / 12.0, 1e-14);

  const auto d = solve_quadratic(unit_square(), QuadraticSeminorm(Eigen::Vector2d(0, 0)), accurate());
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.lambda, 0.0);
  EXPECT_TRUE(std::isinf(d.torsion));
}

TEST(SolveQuadratic, ConventionPinnedOnEllipses) {
  // E = R_theta diag(alpha, 1) B and H(R_theta xi) = |(alpha xi_1, xi_2)|:
  // the change of variables maps E onto the unit disc.
  for (const auto& [theta, alpha] : {std::pair{0.0, 0.5}, std::pair{0.4, 0.3}, std::pair{1.2, 0.7}}) {
    const EllipsoidD e(Eigen::Vector2d(alpha, 1.0), Eigen::MatrixXd(rotation2d(theta)));
    const Polygon2D poly = polygonize(e, 256);
    const auto r = solve_quadratic(poly, QuadraticSeminorm::planar(theta, alpha), accurate());
    EXPECT_LT(rel(r.lambda, oracle::disc_eigenvalue()), 5e-3) << theta << " " << alpha;
    EXPECT_LT(rel(r.torsion, alpha * kPi / 8.0), 5e-3) << theta << " " << alpha;
  }
  // general ellipse: T_H(E) from the closed form of the image ellipse
  const EllipsoidD e(Eigen::Vector2d(2.0, 1.0), Eigen::MatrixXd(rotation2d(0.3)));
  const QuadraticSeminorm h = QuadraticSeminorm::planar(1.0, 0.6);
  const Eigen::MatrixXd l = h.alphas().cwiseInverse().asDiagonal() * h.rotation().transpose();
  const double expect = h.alphas().prod() * closed_form::torsion_euclid_ellipsoid(linear_image(e, l).semi_axes()).value;
  const auto r = solve_quadratic(polygonize(e, 256), h, accurate());
  EXPECT_LT(rel(r.torsion, expect), 5e-3);
}

TEST(SolveQuadratic, ApproachesRank1Limit) {
  const Polygon2D hex(oracle::regular_polygon(6));
  const auto exact = solve_rank1_polygon(hex, Rank1Seminorm(0, 1));
  double prev_l = 0.0, prev_t = 0.0;
  for (double eps : {1e-1, 3e-2, 1e-2}) {
    const auto r = solve_quadratic(hex, QuadraticSeminorm(Eigen::Vector2d(eps, 1)), accurate());
    const double gl = rel(r.lambda, exact.lambda), gt = rel(r.torsion, exact.torsion);
    if (prev_l > 0.0) {
      EXPECT_LT(gl, prev_l);
      EXPECT_LT(gt, prev_t);
    }
    prev_l = gl;
    prev_t = gt;
  }
  EXPECT_LT(prev_l, 5e-2);
  EXPECT_LT(prev_t, 5e-2);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  c.target_h = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.linear_tol = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.eig_tol = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(LinearSolver, PcgAgreesWithDirect) {
  SolverConfig pcg = coarse(0.08);
  pcg.linear_solver = LinearSolver::pcg;
  const Polygon2D l({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  const auto a = FemDiscretization(l, coarse(0.08)).euclidean();
  const auto b = FemDiscretization(l, pcg).euclidean();
  EXPECT_LT(rel(b.lambda, a.lambda), 1e-7);
  EXPECT_LT(rel(b.torsion, a.torsion), 1e-8);
}

TEST(LinearSolver, NonConvergenceIsReported) {
  SolverConfig cfg = coarse(0.05);
  cfg.linear_solver = LinearSolver::pcg;
  cfg.max_iters = 2;
  try {
    torsion_euclid_fem(unit_square(), cfg);
    FAIL() << "expected a solver error";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(FemProperty, NestedRefinementMonotone) {
  for (const auto& p : {unit_square(), Polygon2D(oracle::regular_polygon(64))}) {
    TriMesh m = mesh_polygon(p, 0.25);
    Discrete prev = discrete(m);
    for (int level = 0; level < 3; ++level) {
      m = refine_uniform(m);
      const Discrete next = discrete(m);
      EXPECT_LE(next.lambda, prev.lambda * (1 + 1e-10));
      EXPECT_GE(next.torsion, prev.torsion * (1 - 1e-10));
      prev = next;
    }
  }
}

TEST(FemProperty, NestedRefinementMonotoneOnRandomPolygons) {
  oracle::Gen gen(61);
  for (int i = 0; i < 100; ++i) {
    const Polygon2D p(i % 2 ? gen.convex_polygon() : gen.star_polygon());
    const TriMesh m = mesh_polygon(p, 0.25 * std::sqrt(measure(p)));
    const Discrete a = discrete(m);
    const Discrete b = discrete(refine_uniform(m));
    EXPECT_LE(b.lambda, a.lambda * (1 + 1e-10));
    EXPECT_GE(b.torsion, a.torsion * (1 - 1e-10));
  }
}

TEST(FemProperty, DomainMonotonicity) {
  // inscribed and circumscribed 32-gons around the unit circle
  const Polygon2D inner(oracle::regular_polygon(32));
  const double r = 1.0 / std::cos(kPi / 32);
  const Polygon2D outer(oracle::regular_polygon(32, r, r));
  const auto a = FemDiscretization(inner, accurate()).euclidean();
  const auto b = FemDiscretization(outer, accurate()).euclidean();
  const double tol = a.error_estimate + b.error_estimate;
  EXPECT_GE(a.lambda, b.lambda * (1 - tol));
  EXPECT_LE(a.torsion, b.torsion * (1 + tol));
  EXPECT_LE(b.lambda, oracle::disc_eigenvalue() * (1 + tol));
  EXPECT_GE(a.lambda, oracle::disc_eigenvalue() * (1 - tol));
}

TEST(FemProperty, SeminormMonotonicity) {
  const Polygon2D p({{0, 0}, {2, 0}, {2.5, 1}, {0.5, 1.5}});
  const FemDiscretization fem(p, coarse(0.1));
  oracle::Gen gen(62);
  for (int i = 0; i < 10; ++i) {
    const Mat2 r = gen.rotation();
    const double a1 = gen.uniform(0.2, 1.0), b1 = gen.uniform(0.2, 1.0);
    const double a2 = a1 + gen.uniform(0.05, 0.5), b2 = b1 + gen.uniform(0.0, 0.5);
    const auto lo = fem.quadratic(QuadraticSeminorm(Eigen::Vector2d(a1, b1), Eigen::MatrixXd(r)));
    const auto hi = fem.quadratic(QuadraticSeminorm(Eigen::Vector2d(a2, b2), Eigen::MatrixXd(r)));
    EXPECT_LE(lo.lambda, hi.lambda);
    EXPECT_GE(lo.torsion, hi.torsion);
  }
}

TEST(FemProperty, RotationConsistency) {
  oracle::Gen gen(63);
  SolverConfig cfg = coarse(0.15);
  cfg.richardson = true;
  for (int i = 0; i < 20; ++i) {
    const Polygon2D p(gen.convex_polygon(3, 7));
    const QuadraticSeminorm h = QuadraticSeminorm::planar(gen.uniform(0, kPi), gen.uniform(0.3, 1.0));
    const Mat2 r = gen.rotation();
    const auto hr = std::get<QuadraticSeminorm>(compose(h, Eigen::MatrixXd(r.transpose())));
    const auto a = solve_quadratic(p, h, cfg);
    const auto b = solve_quadratic(linear_image(p, r), hr, cfg);
    const double tol = 2.0 * std::max(a.error_estimate, b.error_estimate);
    EXPECT_LE(rel(b.lambda, a.lambda), tol);
    EXPECT_LE(rel(b.torsion, a.torsion), tol);
  }
}

TEST(FemProperty, ProductBoundedByMeasure) {
  oracle::Gen gen(64);
  for (int i = 0; i < 100; ++i) {
    const Polygon2D p(gen.convex_polygon(3, 8));
    const QuadraticSeminorm h = QuadraticSeminorm::planar(gen.uniform(0, kPi), gen.uniform(0.2, 1.0));
    const auto r = solve_quadratic(p, h, coarse(0.2 * std::sqrt(measure(p))));
    EXPECT_LE(r.lambda * r.torsion, measure(p) * (1 + 1e-3)) << i;
  }
}
