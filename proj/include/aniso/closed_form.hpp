#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "aniso/geometry.hpp"
#include "aniso/special_functions.hpp"

namespace aniso::closed_form {

struct ClosedFormResult {
  double value = 0.0;
  std::string formula_id;
};

namespace detail {

inline void require_positive_axes(const Eigen::VectorXd& a, const char* where) {
  if (a.size() < 1) throw std::invalid_argument(std::string(where) + ": empty axis list");
  if ((a.array() <= 0.0).any()) throw std::invalid_argument(std::string(where) + ": semi-axes must be positive");
}

inline double directional_sum(const Eigen::VectorXd& a, const Direction& v) {
  if (v.dim() != a.size()) throw std::invalid_argument("direction dimension does not match ellipsoid");
  return (v.vector().array().square() / a.array().square()).sum();
}

}  // namespace detail

/// omega_d/(d+2) * prod(a) * (sum a_i^-2)^-1: Euclidean torsion of E_d(a).
inline ClosedFormResult torsion_euclid_ellipsoid(const Eigen::VectorXd& a) {
  detail::require_positive_axes(a, "torsion_euclid_ellipsoid");
  const int d = static_cast<int>(a.size());
  const double v = unit_ball_volume(d) / (d + 2) * a.prod() / a.array().square().inverse().sum();
  return {v, "ellipsoid_euclidean_torsion"};
}

/// (pi^2/4) sum v_i^2 / a_i^2.
inline ClosedFormResult lambda_rank1_ellipsoid(const Eigen::VectorXd& a, const Direction& v) {
  detail::require_positive_axes(a, "lambda_rank1_ellipsoid");
  return {std::numbers::pi * std::numbers::pi / 4.0 * detail::directional_sum(a, v), "ellipsoid_rank1_eigenvalue"};
}

/// omega_d/(d+2) * prod(a) * (sum v_i^2 / a_i^2)^-1.
inline ClosedFormResult torsion_rank1_ellipsoid(const Eigen::VectorXd& a, const Direction& v) {
  detail::require_positive_axes(a, "torsion_rank1_ellipsoid");
  const int d = static_cast<int>(a.size());
  return {unit_ball_volume(d) / (d + 2) * a.prod() / detail::directional_sum(a, v), "ellipsoid_rank1_torsion"};
}

struct BoxValues {
  double lambda = 0.0;
  double torsion = 0.0;
  std::string formula_id;
};

/// Box with H = |xi_d| (last coordinate).
inline BoxValues rank1_box(const BoxD& box) {
  const int d = box.dim();
  const double len = box.length(d - 1);
  double cross = 1.0;
  for (int i = 0; i + 1 < d; ++i) cross *= box.length(i);
  return {std::numbers::pi * std::numbers::pi / (len * len), len * len * len / 12.0 * cross, "box_rank1"};
}

/// Torsion of the unit ball for H(xi) = sqrt(sum alpha_i^2 xi_i^2).
inline ClosedFormResult torsion_quadratic_ball(const Eigen::VectorXd& alphas) {
  const double s = alphas.squaredNorm();
  if (!(s > 0.0)) throw std::invalid_argument("torsion_quadratic_ball: coefficients must not all vanish");
  const int d = static_cast<int>(alphas.size());
  return {unit_ball_volume(d) / (d + 2) / s, "quadratic_ball_torsion"};
}

/// Dirichlet eigenvalue of the unit ball B^k for the dimensions we can
/// evaluate without a PDE solve.
inline double lambda_unit_ball(int k) {
  if (k == 1) return std::numbers::pi * std::numbers::pi / 4.0;
  if (k == 2) return disc_dirichlet_eigenvalue();
  throw std::invalid_argument("ball eigenvalue only available for k = 1, 2");
}

/// Upper bound (d^-1 sum alpha_i^2) * lambda(B^d) for lambda_H(B^d).
inline ClosedFormResult lambda_quadratic_ball_bound(const Eigen::VectorXd& alphas,
                                                    std::optional<double> ball_eigenvalue = std::nullopt) {
  const int d = static_cast<int>(alphas.size());
  const double lb = ball_eigenvalue ? *ball_eigenvalue : lambda_unit_ball(d);
  return {alphas.squaredNorm() / d * lb, "quadratic_ball_eigenvalue_bound"};
}

struct QuadraticMinimum {
  double value = 0.0;
  Eigen::VectorXd direction;  // longest semi-axis
  std::string formula_id;
};

/// Minimum of lambda_H T_H^q over normalized quadratic seminorms on E_d(a), q <= 1.
inline QuadraticMinimum m_tilde_q_ellipsoid(const Eigen::VectorXd& a, double q) {
  detail::require_positive_axes(a, "m_tilde_q_ellipsoid");
  if (q > 1.0) throw std::invalid_argument("formula valid only for q <= 1");
  const int d = static_cast<int>(a.size());
  Eigen::Index imax = 0;
  const double amax = a.maxCoeff(&imax);
  const double vol = unit_ball_volume(d) * a.prod();
  const double v =
      std::numbers::pi * std::numbers::pi * std::pow(vol, q) / (4.0 * std::pow(d + 2.0, q)) * std::pow(amax, 2.0 * (q - 1.0));
  return {v, Eigen::VectorXd::Unit(d, imax), "ellipsoid_quadratic_minimum"};
}

/// Largest rank-1 torsion of E_d(a): omega_d/(d+2) prod(a) max(a)^2.
inline ClosedFormResult t_max_ellipsoid(const Eigen::VectorXd& a) {
  detail::require_positive_axes(a, "t_max_ellipsoid");
  const int d = static_cast<int>(a.size());
  const double amax = a.maxCoeff();
  return {unit_ball_volume(d) / (d + 2) * a.prod() * amax * amax, "ellipsoid_max_torsion"};
}

/// q_E = 1 + log 2 / log(1 + a_d^2 / a_{d-1}^2) for a sorted descending.
inline ClosedFormResult q_threshold_ellipsoid(const Eigen::VectorXd& a) {
  detail::require_positive_axes(a, "q_threshold_ellipsoid");
  if (a.size() < 2) throw std::invalid_argument("q_threshold_ellipsoid: need d >= 2");
  for (Eigen::Index i = 0; i + 1 < a.size(); ++i)
    if (a[i] < a[i + 1]) throw std::invalid_argument("q_threshold_ellipsoid: semi-axes must be sorted descending");
  const double ad = a[a.size() - 1], ad1 = a[a.size() - 2];
  return {1.0 + std::log(2.0) / std::log1p(ad * ad / (ad1 * ad1)), "ellipsoid_rank1_threshold"};
}

struct KohlerJobinTerm {
  double lambda = 0.0;
  double torsion = 0.0;
  double value = 0.0;
};

/// Domains (0,1)^{d-k-1} x (0, omega_k^-1 n^-k) x (n B^k) of unit volume with
/// the seminorm sqrt(sum of the last k squared coordinates).
inline KohlerJobinTerm kj_sequence_value(int d, int k, double q, int n) {
  if (q >= 1.0) throw std::invalid_argument("branch out of scope");
  if (d < 2 || k < 1 || k > d - 1) throw std::invalid_argument("kj_sequence_value: need 1 <= k <= d-1");
  if (n < 1) throw std::invalid_argument("kj_sequence_value: n must be positive");
  const double nn = static_cast<double>(n);
  KohlerJobinTerm out;
  out.lambda = lambda_unit_ball(k) / (nn * nn);
  out.torsion = nn * nn / (k * (k + 2.0));
  out.value = out.lambda * std::pow(out.torsion, q);
  return out;
}

}  // namespace aniso::closed_form
