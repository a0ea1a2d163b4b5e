// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "aniso/aniso.hpp"

using namespace aniso;
namespace cf = aniso::closed_form;

namespace {

const double kPi = std::numbers::pi;
const double kPi2 = kPi * kPi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Polygon2D right_triangle() { return Polygon2D({{0, 0}, {1, 0}, {0, 1}}); }
Polygon2D unit_square() { return Polygon2D({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

// ---------------------------------------------------------------------------

void triangle_example(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const double s = 1.0 / std::sqrt(2.0);
  const double t1 = torsion_rank1_polygon(right_triangle(), Rank1Seminorm(0, 1));
  const double t2 = torsion_rank1_polygon(right_triangle(), Rank1Seminorm(s, s));
  const double ms = 1e3 * seconds_since(t0);
  o.detail << "T(0,1)=" << t1 << " T(diag)=" << t2 << " in " << ms << " ms";
  o.require(std::abs(t1 - 1.0 / 48.0) <= 1e-10, "1/48");
  o.require(std::abs(t2 - 1.0 / 96.0) <= 1e-10, "1/96");
  o.require(ms < 10.0, "runtime < 10 ms");
}

void box_corollary(Outcome& o) {
  const auto closed = cf::rank1_box(BoxD({{0, 1}, {0, 1}}));
  const auto sliced = solve_rank1_polygon(unit_square(), Rank1Seminorm(0, 1));
  o.detail << "closed (" << closed.lambda << ", " << closed.torsion << ") slicing (" << sliced.lambda << ", "
           << sliced.torsion << ")";
  for (const auto& [lam, tor] : {std::pair{closed.lambda, closed.torsion}, std::pair{sliced.lambda, sliced.torsion}}) {
    o.require(std::abs(lam - kPi2) <= 1e-10, "lambda = pi^2");
    o.require(std::abs(tor - 1.0 / 12.0) <= 1e-10, "T = 1/12");
  }
}

void ellipsoid_closed_forms(Outcome& o) {
  const Eigen::Vector2d a(2, 1);
  const double l1 = cf::lambda_rank1_ellipsoid(a, Direction(1, 0)).value;
  const double t1 = cf::torsion_rank1_ellipsoid(a, Direction(1, 0)).value;
  const double l2 = cf::lambda_rank1_ellipsoid(a, Direction(0, 1)).value;
  const double t2 = cf::torsion_rank1_ellipsoid(a, Direction(0, 1)).value;
  const double tmax = cf::t_max_ellipsoid(a).value;
  o.detail << "e1 (" << l1 << ", " << t1 << ") e2 (" << l2 << ", " << t2 << ") Tmax " << tmax;
  o.require(std::abs(l1 - kPi2 / 16.0) <= 1e-12, "pi^2/16");
  o.require(std::abs(t1 - 2.0 * kPi) <= 1e-12, "2 pi");
  o.require(std::abs(l2 - kPi2 / 4.0) <= 1e-12, "pi^2/4");
  o.require(std::abs(t2 - kPi / 2.0) <= 1e-12, "pi/2");
  o.require(std::abs(tmax - 2.0 * kPi) <= 1e-12, "Tmax = 2 pi");
}

void fem_accuracy(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  SolverConfig cfg;
  cfg.target_h = 0.05;
  cfg.richardson = true;
  const auto disc = FemDiscretization(Polygon2D(oracle::regular_polygon(256)), cfg).euclidean();
  const auto square = FemDiscretization(unit_square(), cfg).euclidean();
  const double secs = seconds_since(t0);
  const double disc_l = rel(disc.lambda, oracle::disc_eigenvalue()), disc_t = rel(disc.torsion, kPi / 8.0);
  const double sq_l = rel(square.lambda, 2.0 * kPi2), sq_t = rel(square.torsion, oracle::square_torsion());
  o.detail << "disc rel err lambda " << disc_l << " T " << disc_t << "; square lambda " << sq_l << " T " << sq_t
           << "; " << secs << " s";
  o.require(disc_l <= 5e-3 && disc_t <= 5e-3, "disc within 0.5%");
  o.require(sq_l <= 5e-3 && sq_t <= 5e-3, "square within 0.5%");
  o.require(secs < 60.0, "runtime < 60 s");
}

void quadratic_minimum_disc(Outcome& o) {
  const Evaluator ev(EllipsoidD(Eigen::Vector2d(1, 1)), SolverConfig{});
  SpectralCache cache(ev);
  for (double q : {0.5, 1.0}) {
    const auto r = optimize_quadratic(cache, q, Mode::min);
    const double expect = kPi2 * std::pow(kPi, q) / (4.0 * std::pow(4.0, q));
    o.detail << "q=" << q << " alpha*=" << r.alpha << " value " << r.best.value << " (expect " << expect << "); ";
    o.require(r.boundary_flag, "boundary flag at q=" + std::to_string(q));
    o.require(rel(r.best.value, expect) <= 1e-2, "value within 1% at q=" + std::to_string(q));
  }
  oracle::Gen gen(2024);
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < 8; ++i) {
    const Vec2 w = gen.direction();
    const double f = eval_F(ev, Rank1Seminorm(w.x(), w.y()), 1.0).value;
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  o.detail << "rank-1 spread at q=1: " << hi - lo;
  o.require(hi - lo <= 1e-10, "flat rank-1 landscape at q=1");
}

void quadratic_maximum_disc(Outcome& o) {
  const Evaluator ev(EllipsoidD(Eigen::Vector2d(1, 1)), SolverConfig{});
  SpectralCache cache(ev);
  for (double q : {0.5, 1.0}) {
    const auto r = optimize_quadratic(cache, q, Mode::max);
    const double expect = oracle::disc_eigenvalue() * std::pow(kPi / 8.0, q);
    o.detail << "q=" << q << " alpha*=" << r.alpha << " value " << r.best.value << " (expect " << expect << "); ";
    o.require(r.alpha >= 0.99, "alpha* >= 0.99 at q=" + std::to_string(q));
    o.require(rel(r.best.value, expect) <= 1e-2, "value within 1% at q=" + std::to_string(q));
  }
}

void ellipse_threshold(Outcome& o) {
  const Evaluator ev(Polygon2D(oracle::regular_polygon(256, 2.0, 1.0)), SolverConfig{});
  SpectralCache cache(ev);
  const auto rank1 = optimize_rank1(ev, 5.0, Mode::min);
  const auto quad = optimize_quadratic(cache, 5.0, Mode::min);
  const auto half = optimize_quadratic(cache, 0.5, Mode::min);
  const double q_disc = cf::q_threshold_ellipsoid(Eigen::Vector2d(1, 1)).value;
  o.detail << "q=5 rank-1 " << rank1.best.value << " quadratic " << quad.best.value << " (alpha*=" << quad.alpha
           << ", ratio " << quad.best.value / rank1.best.value << "); q=0.5 alpha*=" << half.alpha
           << "; q_E(disc)=" << q_disc;
  o.require(!quad.boundary_flag && quad.best.value <= 0.99 * rank1.best.value, "quadratic beats rank-1 by 1% at q=5");
  o.require(half.boundary_flag, "rank-1 boundary at q=0.5");
  o.require(q_disc == 2.0, "q_E(1,1) = 2");
}

void kohler_jobin(Outcome& o) {
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {1, 10, 100}) {
    const double v = cf::kj_sequence_value(2, 1, 0.5, n).value;
    const double expect = kPi2 / (4.0 * std::sqrt(3.0)) / n;
    o.detail << "n=" << n << ": " << v << " ";
    o.require(std::abs(v - expect) <= 1e-12, "value at n=" + std::to_string(n));
    o.require(v < prev, "decreasing at n=" + std::to_string(n));
    prev = v;
  }
  const double far = cf::kj_sequence_value(2, 1, 0.5, 1000000).value;
  o.require(far < 1e-5, "tends to 0");
}

void property_suites(Outcome& o) {
  constexpr int kCases = 100;
  oracle::Gen gen(9);
  int homog = 0, tri = 0, affine = 0, scaling = 0, bounds = 0, refine = 0;

  for (int i = 0; i < kCases; ++i) {
    const Seminorm h = i % 2 ? Seminorm(Rank1Seminorm(Eigen::VectorXd(2.0 * gen.vec())))
                             : Seminorm(QuadraticSeminorm(Eigen::Vector2d(gen.uniform(0, 2), gen.uniform(0, 2)),
                                                          Eigen::MatrixXd(gen.rotation())));
    const Eigen::VectorXd x = 3.0 * gen.vec(), y = 3.0 * gen.vec();
    const double t = gen.uniform(-4, 4);
    if (std::abs(evaluate(h, t * x) - std::abs(t) * evaluate(h, x)) <= 1e-12 * std::max(1.0, std::abs(t))) ++homog;
    if (evaluate(h, x + y) <= evaluate(h, x) + evaluate(h, y) + 1e-12) ++tri;
  }

  for (int i = 0; i < kCases; ++i) {
    const Polygon2D p(i % 2 ? gen.convex_polygon() : gen.star_polygon());
    const Vec2 w = gen.direction();
    const Rank1Seminorm h(w.x(), w.y());
    const Mat2 r = gen.rotation();
    const auto hr = std::get<Rank1Seminorm>(normalize(compose(h, Eigen::MatrixXd(r.transpose()))));
    const auto a = solve_rank1_polygon(p, h);
    const auto b = solve_rank1_polygon(linear_image(p, r), hr);
    if (rel(b.lambda, a.lambda) <= 1e-10 && rel(b.torsion, a.torsion) <= 1e-10) ++affine;

    const double s = gen.uniform(0.1, 3.0);
    const auto c = solve_rank1_polygon(p, Rank1Seminorm(s * w.x(), s * w.y()));
    if (rel(c.lambda, s * s * a.lambda) <= 1e-10 && rel(c.torsion, a.torsion / (s * s)) <= 1e-10) ++scaling;
  }

  for (int i = 0; i < kCases; ++i) {
    const Polygon2D p(gen.convex_polygon(3, 8));
    SolverConfig cfg;
    cfg.target_h = 0.2 * std::sqrt(measure(p));
    const QuadraticSeminorm q = QuadraticSeminorm::planar(gen.uniform(0, kPi), gen.uniform(0.2, 1.0));
    const auto fem = solve_quadratic(p, q, cfg);
    const Vec2 w = gen.direction();
    const auto r1 = solve_rank1_polygon(p, Rank1Seminorm(w.x(), w.y()));
    const bool ok = fem.lambda * fem.torsion <= measure(p) * (1 + 1e-3) &&
                    r1.lambda * r1.torsion <= measure(p) * (1 + 1e-12) &&
                    r1.lambda * r1.torsion <= kPi2 * measure(p) / 12.0 * (1 + 1e-12);
    if (ok) ++bounds;
  }

  const SolverConfig eig_cfg;
  for (int i = 0; i < kCases; ++i) {
    const Polygon2D p(i % 2 ? gen.convex_polygon() : gen.star_polygon());
    const TriMesh m = mesh_polygon(p, 0.25 * std::sqrt(measure(p)));
    const P1System a = assemble_p1(m);
    const P1System b = assemble_p1(refine_uniform(m));
    const bool ok = discrete_eigenvalue(b, 0.0, eig_cfg) <= discrete_eigenvalue(a, 0.0, eig_cfg) * (1 + 1e-10) &&
                    discrete_torsion(b, eig_cfg) >= discrete_torsion(a, eig_cfg) * (1 - 1e-10);
    if (ok) ++refine;
  }

  o.detail << "homogeneity " << homog << "/" << kCases << ", triangle " << tri << "/" << kCases << ", rotation "
           << affine << "/" << kCases << ", scaling " << scaling << "/" << kCases << ", product bounds " << bounds
           << "/" << kCases << ", refinement " << refine << "/" << kCases;
  for (int n : {homog, tri, affine, scaling, bounds, refine}) o.require(n == kCases, "all cases pass");
}

void continuity_probe(Outcome& o) {
  const Polygon2D hex(oracle::regular_polygon(6));
  const auto exact = solve_rank1_polygon(hex, Rank1Seminorm(0, 1));
  SolverConfig cfg;
  cfg.target_h = 0.05;
  cfg.richardson = true;
  const FemDiscretization fem(hex, cfg);
  double prev_l = std::numeric_limits<double>::infinity(), prev_t = prev_l;
  for (double eps : {1e-1, 3e-2, 1e-2}) {
    const auto r = fem.quadratic(QuadraticSeminorm(Eigen::Vector2d(eps, 1)));
    const double gl = rel(r.lambda, exact.lambda), gt = rel(r.torsion, exact.torsion);
    o.detail << "eps=" << eps << " gap lambda " << gl << " T " << gt << "; ";
    o.require(gl < prev_l && gt < prev_t, "monotone approach at eps=" + std::to_string(eps));
    prev_l = gl;
    prev_t = gt;
  }
  o.require(prev_l <= 5e-2 && prev_t <= 5e-2, "final gap <= 5%");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"1 triangle slicing torsion", triangle_example},
      {"2 box values, closed form and slicing", box_corollary},
      {"3 ellipse rank-1 closed forms and T_max", ellipsoid_closed_forms},
      {"4 FEM accuracy on disc and square", fem_accuracy},
      {"5 quadratic minimum on the disc", quadratic_minimum_disc},
      {"6 quadratic maximum on the disc", quadratic_maximum_disc},
      {"7 ellipse past the q threshold", ellipse_threshold},
      {"8 degenerate Kohler-Jobin sequence", kohler_jobin},
      {"9 randomized property suites", property_suites},
      {"10 continuity toward the rank-1 limit", continuity_probe},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s criterion %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), seconds_since(t0),
                o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
