#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "aniso/geometry.hpp"
#include "aniso/seminorm.hpp"
#include "aniso/solve.hpp"

namespace aniso {

enum class Mode { min, max };
enum class SearchClass { rank1, quadratic };

inline const char* to_string(Mode m) { return m == Mode::min ? "min" : "max"; }
inline const char* to_string(SearchClass c) { return c == SearchClass::rank1 ? "rank1" : "quadratic"; }

/// lambda * torsion^q for one seminorm. For q = +inf the objective is the
/// torsion alone (the large-q limit of F^(1/q)).
struct FunctionalValue {
  double q = 0.0;
  double lambda = 0.0;
  double torsion = 0.0;
  double value = 0.0;
  Seminorm seminorm = Rank1Seminorm(1.0, 0.0);
  Provenance lambda_provenance = Provenance::closed_form;
  Provenance torsion_provenance = Provenance::closed_form;
  double error_estimate = 0.0;
  bool degenerate = false;
};

inline double combine(double lambda, double torsion, double q) {
  if (std::isinf(q)) return torsion;
  return lambda * std::pow(torsion, q);
}

inline FunctionalValue make_value(const Seminorm& h, const Evaluation& e, double q) {
  FunctionalValue f;
  f.q = q;
  f.seminorm = h;
  f.lambda = e.spectral.lambda;
  f.torsion = e.spectral.torsion;
  f.lambda_provenance = e.lambda_provenance;
  f.torsion_provenance = e.torsion_provenance;
  f.error_estimate = e.spectral.error_estimate;
  f.degenerate = e.spectral.degenerate;
  f.value = f.degenerate ? 0.0 : combine(f.lambda, f.torsion, q);
  return f;
}

/// F_q(H) for a seminorm of operator norm 1; the zero seminorm yields a
/// degenerate value.
inline FunctionalValue eval_F(const Evaluator& ev, const Seminorm& h, double q) {
  if (std::isnan(q)) throw std::invalid_argument("q must be a number");
  if (kernel_codim(h) == 0) return make_value(h, ev(h), q);
  if (std::abs(operator_norm(h) - 1.0) > 1e-9) throw std::invalid_argument("seminorm must have operator norm 1");
  return make_value(h, ev(h), q);
}

inline FunctionalValue eval_F(const Domain& domain, const Seminorm& h, double q, const SolverConfig& cfg = {}) {
  return eval_F(Evaluator(domain, cfg), h, q);
}

// ---------------------------------------------------------------------------
// Parallel evaluation with index-ordered results
// ---------------------------------------------------------------------------

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline double wrap_angle(double theta) {
  double t = std::fmod(theta, std::numbers::pi);
  if (t < 0.0) t += std::numbers::pi;
  if (t >= std::numbers::pi) t -= std::numbers::pi;
  return t;
}

// Golden-section search on [lo, hi] that also samples both endpoints and
// returns the best point seen.
template <class Obj>
std::pair<double, double> golden_search(Obj&& f, double lo, double hi, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double best_x = lo, best_f = f(lo);
  auto consider = [&](double x, double fx) {
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  };
  consider(hi, f(hi));
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  consider(c, fc);
  consider(d, fd);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
  }
  return {best_x, best_f};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Optimization over the planar rank-1 and quadratic classes
// ---------------------------------------------------------------------------

struct TraceEntry {
  double theta = 0.0;
  double alpha = 0.0;
  double value = 0.0;
};

struct OptimizationReport {
  Mode mode = Mode::min;
  SearchClass search_class = SearchClass::rank1;
  double q = 0.0;
  double theta = 0.0;
  double alpha = 0.0;  // 0 for the rank-1 class
  FunctionalValue best;
  std::vector<TraceEntry> trace;
  bool boundary_flag = true;
};

/// Seminorm with parameters (theta, alpha): H(R_theta xi) = sqrt(alpha^2 xi_1^2 + xi_2^2).
/// alpha = 0 is the rank-1 seminorm |<xi, (-sin theta, cos theta)>|.
inline Seminorm planar_seminorm(double theta, double alpha) {
  if (alpha <= 0.0) return Rank1Seminorm(-std::sin(theta), std::cos(theta));
  return QuadraticSeminorm::planar(theta, alpha);
}

/// Memoizes (lambda, torsion) per parameter pair; shared across q values.
class SpectralCache {
 public:
  explicit SpectralCache(Evaluator ev) : ev_(std::move(ev)) {}

  [[nodiscard]] const Evaluator& evaluator() const noexcept { return ev_; }

  static std::pair<double, double> key(double theta, double alpha) {
    if (alpha >= 1.0) return {0.0, 1.0};
    return {detail::wrap_angle(theta), std::max(alpha, 0.0)};
  }

  Evaluation get(double theta, double alpha) {
    const auto k = key(theta, alpha);
    {
      std::lock_guard lock(mu_);
      auto it = table_.find(k);
      if (it != table_.end()) return it->second;
    }
    Evaluation e = ev_(planar_seminorm(k.first, k.second));
    std::lock_guard lock(mu_);
    return table_.emplace(k, e).first->second;
  }

  /// Fills the cache for many parameter pairs concurrently.
  void prefetch(const std::vector<std::pair<double, double>>& params) {
    std::vector<std::pair<double, double>> todo;
    {
      std::lock_guard lock(mu_);
      for (const auto& [t, a] : params) {
        const auto k = key(t, a);
        if (!table_.count(k) && std::find(todo.begin(), todo.end(), k) == todo.end()) todo.push_back(k);
      }
    }
    std::vector<Evaluation> out(todo.size());
    detail::parallel_for(todo.size(), [&](std::size_t i) { out[i] = ev_(planar_seminorm(todo[i].first, todo[i].second)); });
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < todo.size(); ++i) table_.emplace(todo[i], out[i]);
  }

  [[nodiscard]] std::size_t size() const {
    std::lock_guard lock(mu_);
    return table_.size();
  }

 private:
  Evaluator ev_;
  mutable std::mutex mu_;
  std::map<std::pair<double, double>, Evaluation> table_;
};

namespace detail {

// Candidate angles for rank-1 search: a uniform grid plus, for polygons,
// edge normals and (for at most 64 vertices) vertex-pair directions. Angles
// are for the seminorm direction eta = (cos theta, sin theta).
inline std::vector<double> rank1_candidates(const Domain& domain) {
  std::vector<double> thetas;
  for (int k = 0; k < 180; ++k) thetas.push_back(std::numbers::pi * k / 180.0);
  auto add_dir = [&](const Vec2& v) {
    if (v.norm() > 0.0) thetas.push_back(wrap_angle(std::atan2(v.y(), v.x())));
  };
  if (const auto* poly = std::get_if<Polygon2D>(&domain)) {
    const std::size_t n = poly->size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e = (*poly)[(i + 1) % n] - (*poly)[i];
      add_dir(Vec2(-e.y(), e.x()));
    }
    if (n <= 64)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) add_dir((*poly)[j] - (*poly)[i]);
  } else if (const auto* e = std::get_if<EllipsoidD>(&domain)) {
    for (int c = 0; c < 2; ++c) add_dir(Vec2(e->rotation()(0, c), e->rotation()(1, c)));
  }
  std::sort(thetas.begin(), thetas.end());
  std::vector<double> out;
  for (double t : thetas)
    if (out.empty() || t - out.back() > 1e-9) out.push_back(t);
  if (out.size() > 1 && out.front() + std::numbers::pi - out.back() <= 1e-9) out.pop_back();
  return out;
}

inline bool better(double candidate, double incumbent) {
  if (std::isinf(incumbent)) return candidate < incumbent;
  return candidate < incumbent - 1e-12 * std::max(std::abs(incumbent), 1e-300);
}

}  // namespace detail

/// Rank-1 class: H = |<xi, (cos theta, sin theta)>|.
inline OptimizationReport optimize_rank1(const Evaluator& ev, double q, Mode mode) {
  if (ev.dim() != 2) throw std::invalid_argument("optimize_rank1: planar domain required");
  const double sign = mode == Mode::min ? 1.0 : -1.0;
  OptimizationReport rep;
  rep.mode = mode;
  rep.search_class = SearchClass::rank1;
  rep.q = q;

  auto seminorm_at = [](double theta) { return Seminorm(Rank1Seminorm(std::cos(theta), std::sin(theta))); };
  auto objective = [&](double theta) {
    const double t = detail::wrap_angle(theta);
    const double v = eval_F(ev, seminorm_at(t), q).value;
    rep.trace.push_back({t, 0.0, v});
    return sign * v;
  };

  const auto cand = detail::rank1_candidates(ev.domain());
  std::vector<double> vals(cand.size());
  detail::parallel_for(cand.size(), [&](std::size_t i) { vals[i] = eval_F(ev, seminorm_at(cand[i]), q).value; });
  std::size_t best = 0;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    rep.trace.push_back({cand[i], 0.0, vals[i]});
    if (detail::better(sign * vals[i], sign * vals[best])) best = i;
  }

  double best_theta = cand[best], best_obj = sign * vals[best];
  if (cand.size() > 1) {
    const std::size_t n = cand.size();
    double lo = best == 0 ? cand[n - 1] - std::numbers::pi : cand[best - 1];
    double hi = best + 1 == n ? cand[0] + std::numbers::pi : cand[best + 1];
    const auto [x, fx] = detail::golden_search(objective, lo, hi, 1e-6);
    if (detail::better(fx, best_obj)) {
      best_theta = detail::wrap_angle(x);
      best_obj = fx;
    }
  }
  rep.theta = best_theta;
  rep.alpha = 0.0;
  rep.best = eval_F(ev, seminorm_at(best_theta), q);
  rep.boundary_flag = true;
  return rep;
}

inline OptimizationReport optimize_rank1(const Domain& domain, double q, Mode mode, const SolverConfig& cfg = {}) {
  return optimize_rank1(Evaluator(domain, cfg), q, mode);
}

/// Planar quadratic class H(R_theta xi) = sqrt(alpha^2 xi_1^2 + xi_2^2),
/// theta in [0, pi), alpha in [0, 1]: 36 x 21 grid, then alternating golden
/// refinement in theta (+-5 deg) and alpha (+-0.05) until both move by less
/// than 1e-4. The result is the best of every evaluated point.
inline OptimizationReport optimize_quadratic(SpectralCache& cache, double q, Mode mode) {
  if (cache.evaluator().dim() != 2) throw std::invalid_argument("optimize_quadratic: planar domain required");
  const double sign = mode == Mode::min ? 1.0 : -1.0;
  OptimizationReport rep;
  rep.mode = mode;
  rep.search_class = SearchClass::quadratic;
  rep.q = q;

  auto value_at = [&](double theta, double alpha) {
    const auto e = cache.get(theta, alpha);
    return make_value(planar_seminorm(theta, alpha), e, q).value;
  };

  std::vector<std::pair<double, double>> grid;
  for (int i = 0; i < 36; ++i)
    for (int j = 0; j <= 20; ++j) grid.emplace_back(std::numbers::pi * i / 36.0, j / 20.0);
  cache.prefetch(grid);

  double best_t = grid[0].first, best_a = grid[0].second;
  double best_obj = std::numeric_limits<double>::infinity();
  for (const auto& [t, a] : grid) {
    const double v = value_at(t, a);
    rep.trace.push_back({t, a, v});
    if (detail::better(sign * v, best_obj)) {
      best_obj = sign * v;
      best_t = t;
      best_a = a;
    }
  }

  const double dtheta = 5.0 * std::numbers::pi / 180.0;
  for (int round = 0; round < 50; ++round) {
    const double prev_t = best_t, prev_a = best_a;
    if (best_a < 1.0) {
      const double a_fixed = best_a;
      auto ft = [&](double t) {
        const double v = value_at(t, a_fixed);
        rep.trace.push_back({detail::wrap_angle(t), a_fixed, v});
        return sign * v;
      };
      const auto [t, f] = detail::golden_search(ft, best_t - dtheta, best_t + dtheta, 1e-5);
      if (detail::better(f, best_obj)) {
        best_obj = f;
        best_t = detail::wrap_angle(t);
      }
    }
    const double t_fixed = best_t;
    auto fa = [&](double a) {
      const double v = value_at(t_fixed, a);
      rep.trace.push_back({t_fixed, a, v});
      return sign * v;
    };
    const auto [a, f] = detail::golden_search(fa, std::max(0.0, best_a - 0.05), std::min(1.0, best_a + 0.05), 1e-5);
    if (detail::better(f, best_obj)) {
      best_obj = f;
      best_a = a;
    }
    const double dt = std::abs(best_t - prev_t);
    if (std::min(dt, std::numbers::pi - dt) < 1e-4 && std::abs(best_a - prev_a) < 1e-4) break;
  }

  const auto k = SpectralCache::key(best_t, best_a);
  rep.theta = k.first;
  rep.alpha = k.second;
  rep.best = make_value(planar_seminorm(k.first, k.second), cache.get(k.first, k.second), q);
  rep.boundary_flag = rep.alpha < 1e-3;
  return rep;
}

inline OptimizationReport optimize_quadratic(const Domain& domain, double q, Mode mode, const SolverConfig& cfg = {}) {
  SpectralCache cache(Evaluator(domain, cfg));
  return optimize_quadratic(cache, q, mode);
}

// ---------------------------------------------------------------------------
// q sweeps
// ---------------------------------------------------------------------------

struct QSweep {
  std::vector<double> q_grid;
  std::vector<OptimizationReport> reports;
  Mode mode = Mode::min;
  SearchClass search_class = SearchClass::quadratic;
  /// First consecutive pair (q_{i-1}, q_i] where boundary_flag goes true -> false.
  std::optional<std::pair<double, double>> threshold;
};

inline QSweep q_sweep(const Evaluator& ev, const std::vector<double>& q_list, Mode mode,
                      SearchClass cls = SearchClass::quadratic) {
  for (std::size_t i = 1; i < q_list.size(); ++i)
    if (!(q_list[i] > q_list[i - 1])) throw std::invalid_argument("q grid must be strictly increasing");
  QSweep out;
  out.q_grid = q_list;
  out.mode = mode;
  out.search_class = cls;
  SpectralCache cache(ev);
  for (double q : q_list)
    out.reports.push_back(cls == SearchClass::quadratic ? optimize_quadratic(cache, q, mode) : optimize_rank1(ev, q, mode));
  for (std::size_t i = 1; i < out.reports.size(); ++i) {
    if (out.reports[i - 1].boundary_flag && !out.reports[i].boundary_flag) {
      out.threshold = std::make_pair(q_list[i - 1], q_list[i]);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bounds on lambda_H T_H
// ---------------------------------------------------------------------------

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  bool skipped = false;
  std::string note;
};

struct BoundReport {
  double lambda = 0.0;
  double torsion = 0.0;
  double product = 0.0;
  double measure = 0.0;
  int kernel_codim = 0;
  bool convex = false;
  bool centrally_symmetric = false;
  std::vector<BoundCheck> checks;
};

namespace detail {

inline bool domain_convex(const Domain& d) {
  if (const auto* p = std::get_if<Polygon2D>(&d)) return p->is_convex();
  return true;
}

inline bool domain_symmetric(const Domain& d) {
  if (const auto* p = std::get_if<Polygon2D>(&d)) return is_centrally_symmetric(*p);
  return true;
}

}  // namespace detail

/// lambda T <= |Omega|; for k = 1 on convex domains lambda T <= pi^2 |Omega| / 12;
/// on convex domains lambda T >= pi^2 |Omega| / (4 k d^{s(d+2)} (d+2)) with
/// s = 1/2 for centrally symmetric domains and s = 1 otherwise.
inline BoundReport verify_bounds(const Evaluator& ev, const Seminorm& h) {
  BoundReport rep;
  const Evaluation e = ev(h);
  rep.kernel_codim = kernel_codim(h);
  rep.measure = measure(ev.domain());
  rep.convex = detail::domain_convex(ev.domain());
  rep.centrally_symmetric = detail::domain_symmetric(ev.domain());
  if (e.spectral.degenerate) {
    rep.checks.push_back({"product_le_measure", 0.0, rep.measure, true, true, "zero seminorm: lambda = 0, T = inf"});
    return rep;
  }
  rep.lambda = e.spectral.lambda;
  rep.torsion = e.spectral.torsion;
  rep.product = rep.lambda * rep.torsion;

  const bool numeric = e.lambda_provenance == Provenance::fem || e.lambda_provenance == Provenance::fem_richardson ||
                       e.torsion_provenance == Provenance::fem || e.torsion_provenance == Provenance::fem_richardson;
  const double slack = numeric ? std::max(5.0 * e.spectral.error_estimate, 1e-3) : 1e-9;
  auto le = [&](double a, double b) { return a <= b * (1.0 + slack); };

  rep.checks.push_back({"product_le_measure", rep.product, rep.measure, le(rep.product, rep.measure), false, ""});

  const double pi2 = std::numbers::pi * std::numbers::pi;
  BoundCheck upper{"rank1_convex_upper", rep.product, pi2 * rep.measure / 12.0, false, false, ""};
  if (rep.kernel_codim != 1) {
    upper.skipped = true;
    upper.note = "only for kernel codimension 1";
  } else if (!rep.convex) {
    upper.skipped = true;
    upper.note = "domain not convex: slices need not be intervals";
  } else {
    upper.holds = le(upper.lhs, upper.rhs);
  }
  rep.checks.push_back(upper);

  const int d = ev.dim();
  const double s = rep.centrally_symmetric ? 0.5 : 1.0;
  const double k = rep.kernel_codim;
  BoundCheck lower{"convex_lower", pi2 * rep.measure / (4.0 * k * std::pow(d, s * (d + 2)) * (d + 2)), rep.product,
                   false, false, ""};
  if (!rep.convex) {
    lower.skipped = true;
    lower.note = "domain not convex";
  } else {
    lower.holds = le(lower.lhs, lower.rhs);
  }
  rep.checks.push_back(lower);
  return rep;
}

}  // namespace aniso
