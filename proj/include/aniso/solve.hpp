#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <variant>

#include "aniso/closed_form.hpp"
#include "aniso/fem.hpp"
#include "aniso/geometry.hpp"
#include "aniso/seminorm.hpp"
#include "aniso/slicing.hpp"

namespace aniso {

/// SpectralResult plus the provenance of each factor.
struct Evaluation {
  SpectralResult spectral;
  Provenance lambda_provenance = Provenance::closed_form;
  Provenance torsion_provenance = Provenance::closed_form;
};

namespace detail {

inline Evaluation exact(double lambda, double torsion, Provenance p) {
  Evaluation e;
  e.spectral.lambda = lambda;
  e.spectral.torsion = torsion;
  e.spectral.provenance = p;
  e.lambda_provenance = e.torsion_provenance = p;
  return e;
}

inline Evaluation from_fem(const SpectralResult& r) {
  Evaluation e;
  e.spectral = r;
  e.lambda_provenance = e.torsion_provenance = r.provenance;
  return e;
}

// Index of the only nonzero entry of v, or -1.
inline int single_axis(const Eigen::VectorXd& v, double tol) {
  int axis = -1;
  const double scale = v.cwiseAbs().maxCoeff();
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tol * scale) {
      if (axis >= 0) return -1;
      axis = i;
    }
  }
  return axis;
}

}  // namespace detail

/// Picks the most exact available path for (domain, seminorm): closed forms on
/// ellipsoids and boxes, slicing for rank-1 seminorms on polygons, FEM for
/// planar quadratic norms. The polygon used by FEM is meshed once per
/// evaluator, so repeated calls with different seminorms share the mesh.
class Evaluator {
 public:
  Evaluator(Domain domain, SolverConfig cfg) : state_(std::make_shared<State>(std::move(domain), cfg)) {
    cfg.validate();
  }

  [[nodiscard]] const Domain& domain() const noexcept { return state_->domain; }
  [[nodiscard]] const SolverConfig& config() const noexcept { return state_->cfg; }
  [[nodiscard]] int dim() const {
    return std::visit(
        [](const auto& d) -> int {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Polygon2D>)
            return 2;
          else
            return d.dim();
        },
        state_->domain);
  }

  [[nodiscard]] Evaluation operator()(const Seminorm& h) const {
    if (aniso::dim(h) != dim()) throw std::invalid_argument("seminorm and domain dimensions differ");
    if (const auto* r1 = std::get_if<Rank1Seminorm>(&h)) return rank1(*r1);
    const auto& q = std::get<QuadraticSeminorm>(h);
    const int codim = kernel_codim(q);
    if (codim == 0) {
      Evaluation e;
      e.spectral = degenerate_result();
      return e;
    }
    if (codim == 1) return rank1(rank1_reduction(q));
    return quadratic(q);
  }

 private:
  struct State {
    State(Domain d, SolverConfig c) : domain(std::move(d)), cfg(c) {}
    Domain domain;
    SolverConfig cfg;
    std::once_flag fem_once;
    std::unique_ptr<FemDiscretization> fem;
  };

  const FemDiscretization& fem() const {
    std::call_once(state_->fem_once, [this] {
      const SolverConfig& cfg = state_->cfg;
      std::visit(
          [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Polygon2D>)
              state_->fem = std::make_unique<FemDiscretization>(d, cfg);
            else if constexpr (std::is_same_v<T, BoxD>)
              state_->fem = std::make_unique<FemDiscretization>(to_polygon(d), cfg);
            else
              state_->fem = std::make_unique<FemDiscretization>(polygonize(d, cfg.ellipse_vertices), cfg);
          },
          state_->domain);
    });
    return *state_->fem;
  }

  Evaluation rank1(const Rank1Seminorm& h) const {
    const double s = h.eta().norm();
    const double s2 = s * s;
    return std::visit(
        [&](const auto& d) -> Evaluation {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Polygon2D>) {
            const auto r = solve_rank1_polygon(d, h);
            return detail::exact(r.lambda, r.torsion, Provenance::slicing);
          } else if constexpr (std::is_same_v<T, EllipsoidD>) {
            const Direction v(d.rotation().transpose() * h.eta());
            const double lam = closed_form::lambda_rank1_ellipsoid(d.semi_axes(), v).value;
            const double tor = closed_form::torsion_rank1_ellipsoid(d.semi_axes(), v).value;
            return detail::exact(s2 * lam, tor / s2, Provenance::closed_form);
          } else {
            const int axis = detail::single_axis(h.eta(), 1e-14);
            if (axis >= 0) {
              const double len = d.length(axis);
              double cross = 1.0;
              for (int i = 0; i < d.dim(); ++i)
                if (i != axis) cross *= d.length(i);
              const double lam = std::numbers::pi * std::numbers::pi / (len * len);
              const double tor = len * len * len / 12.0 * cross;
              return detail::exact(s2 * lam, tor / s2, Provenance::closed_form);
            }
            if (d.dim() != 2) throw std::invalid_argument("oblique rank-1 seminorms on boxes need d = 2");
            const auto r = solve_rank1_polygon(to_polygon(d), h);
            return detail::exact(r.lambda, r.torsion, Provenance::slicing);
          }
        },
        state_->domain);
  }

  Evaluation quadratic(const QuadraticSeminorm& q) const {
    const int d = q.dim();
    if (const auto* e = std::get_if<EllipsoidD>(&state_->domain)) {
      if (kernel_codim(q) != d)
        throw std::invalid_argument("quadratic seminorms with a nontrivial kernel of dimension >= 2 are unsupported");
      const Eigen::MatrixXd l = q.alphas().cwiseInverse().asDiagonal() * q.rotation().transpose();
      const EllipsoidD image = linear_image(*e, l);
      Evaluation out;
      out.spectral.torsion = q.alphas().prod() * closed_form::torsion_euclid_ellipsoid(image.semi_axes()).value;
      out.torsion_provenance = Provenance::closed_form;
      const auto& a = image.semi_axes();
      if (d == 2 && std::abs(a[0] - a[1]) <= 1e-12 * a[0]) {
        out.spectral.lambda = closed_form::lambda_unit_ball(2) / (a[0] * a[0]);
        out.lambda_provenance = Provenance::closed_form;
        out.spectral.provenance = Provenance::closed_form;
        return out;
      }
      if (d != 2) throw std::invalid_argument("eigenvalues of quadratic norms are only computed for d = 2");
      const SpectralResult r = fem().quadratic(q, true, false);
      out.spectral.lambda = r.lambda;
      out.spectral.h_used = r.h_used;
      out.spectral.error_estimate = r.error_estimate;
      out.spectral.provenance = out.lambda_provenance = r.provenance;
      return out;
    }
    if (d != 2) throw std::invalid_argument("FEM is only available for planar domains");
    return detail::from_fem(fem().quadratic(q));
  }

  std::shared_ptr<State> state_;
};

inline Evaluation solve(const Domain& domain, const Seminorm& h, const SolverConfig& cfg) {
  return Evaluator(domain, cfg)(h);
}

}  // namespace aniso
