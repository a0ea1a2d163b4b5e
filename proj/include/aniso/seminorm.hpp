#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include "aniso/geometry.hpp"

namespace aniso {

/// H(xi) = |<xi, eta>|.
class Rank1Seminorm {
 public:
  explicit Rank1Seminorm(Eigen::VectorXd eta) : eta_(std::move(eta)) {
    if (eta_.size() < 1 || !(eta_.norm() > 0.0)) throw std::invalid_argument("rank-1 seminorm needs eta != 0");
    Eigen::Index imax = 0;
    eta_.cwiseAbs().maxCoeff(&imax);
    if (eta_[imax] < 0.0) eta_ = -eta_;
  }
  Rank1Seminorm(double x, double y) : Rank1Seminorm(Eigen::Vector2d(x, y)) {}

  [[nodiscard]] const Eigen::VectorXd& eta() const noexcept { return eta_; }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(eta_.size()); }

 private:
  Eigen::VectorXd eta_;
};

/// H(R xi) = sqrt(sum alpha_i^2 xi_i^2), i.e. H(xi) = |diag(alpha) R^T xi|.
///
/// Kept in canonical form: alphas sorted descending (ties in input order) and
/// each column of R has its largest-magnitude entry positive. Zero alphas mark
/// kernel directions.
class QuadraticSeminorm {
 public:
  explicit QuadraticSeminorm(Eigen::VectorXd alphas)
      : QuadraticSeminorm(alphas, Eigen::MatrixXd::Identity(alphas.size(), alphas.size())) {}

  QuadraticSeminorm(Eigen::VectorXd alphas, Eigen::MatrixXd rotation, double tol = kGeomTol) {
    const auto d = alphas.size();
    if (d < 1) throw std::invalid_argument("quadratic seminorm needs at least one coefficient");
    if (rotation.rows() != d || rotation.cols() != d)
      throw std::invalid_argument("quadratic seminorm rotation has wrong shape");
    if ((alphas.array() < 0.0).any()) throw std::invalid_argument("quadratic seminorm coefficients must be >= 0");
    if ((rotation.transpose() * rotation - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("quadratic seminorm rotation is not orthogonal");

    std::vector<Eigen::Index> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return alphas[i] > alphas[j]; });
    alphas_.resize(d);
    rotation_.resize(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
      alphas_[k] = alphas[order[k]];
      rotation_.col(k) = rotation.col(order[k]);
    }
    detail::fix_column_signs(rotation_);
  }

  static QuadraticSeminorm euclidean(int d) { return QuadraticSeminorm(Eigen::VectorXd::Ones(d)); }

  /// The planar family H(R_theta xi) = sqrt(alpha^2 xi_1^2 + xi_2^2).
  static QuadraticSeminorm planar(double theta, double alpha) {
    return QuadraticSeminorm(Eigen::Vector2d(alpha, 1.0), Eigen::MatrixXd(rotation2d(theta)));
  }

  [[nodiscard]] const Eigen::VectorXd& alphas() const noexcept { return alphas_; }
  [[nodiscard]] const Eigen::MatrixXd& rotation() const noexcept { return rotation_; }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(alphas_.size()); }

  /// Gram matrix R diag(alpha^2) R^T.
  [[nodiscard]] Eigen::MatrixXd gram() const {
    return rotation_ * alphas_.array().square().matrix().asDiagonal() * rotation_.transpose();
  }

 private:
  Eigen::VectorXd alphas_;
  Eigen::MatrixXd rotation_;
};

using Seminorm = std::variant<Rank1Seminorm, QuadraticSeminorm>;

struct SeminormMeta {
  double operator_norm = 0.0;
  int kernel_codim = 0;
};

inline int dim(const Seminorm& h) {
  return std::visit([](const auto& s) { return s.dim(); }, h);
}

inline double evaluate(const Rank1Seminorm& h, const Eigen::VectorXd& xi) { return std::abs(xi.dot(h.eta())); }

inline double evaluate(const QuadraticSeminorm& h, const Eigen::VectorXd& xi) {
  return (h.alphas().asDiagonal() * (h.rotation().transpose() * xi)).norm();
}

inline double evaluate(const Seminorm& h, const Eigen::VectorXd& xi) {
  if (xi.size() != dim(h)) throw std::invalid_argument("evaluate: dimension mismatch");
  return std::visit([&](const auto& s) { return evaluate(s, xi); }, h);
}

inline double operator_norm(const Seminorm& h) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rank1Seminorm>)
          return s.eta().norm();
        else
          return s.alphas().maxCoeff();
      },
      h);
}

inline int kernel_codim(const Seminorm& h) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rank1Seminorm>)
          return 1;
        else
          return static_cast<int>((s.alphas().array() > 0.0).count());
      },
      h);
}

inline SeminormMeta meta(const Seminorm& h) { return {operator_norm(h), kernel_codim(h)}; }

/// xi -> H(A xi).
inline Seminorm compose(const Seminorm& h, const Eigen::MatrixXd& a, double tol = kGeomTol) {
  const int d = dim(h);
  if (a.rows() != d || a.cols() != d) throw std::invalid_argument("compose: dimension mismatch");
  if (std::abs(a.determinant()) <= tol) throw std::invalid_argument("non-invertible map");
  if (const auto* r1 = std::get_if<Rank1Seminorm>(&h)) return Rank1Seminorm(a.transpose() * r1->eta());

  const auto& q = std::get<QuadraticSeminorm>(h);
  const Eigen::MatrixXd g = a.transpose() * q.gram() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (g + g.transpose()));
  const Eigen::VectorXd mu = eig.eigenvalues();
  const double top = std::max(mu.cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd alphas(d);
  for (int i = 0; i < d; ++i) alphas[i] = mu[i] <= 1e-14 * top ? 0.0 : std::sqrt(mu[i]);
  return QuadraticSeminorm(alphas, eig.eigenvectors(), 1e-10);
}

/// H / ||H||.
inline Seminorm normalize(const Seminorm& h) {
  const double n = operator_norm(h);
  if (!(n > 0.0)) throw std::invalid_argument("cannot normalize zero");
  if (const auto* r1 = std::get_if<Rank1Seminorm>(&h)) return Rank1Seminorm(r1->eta() / n);
  const auto& q = std::get<QuadraticSeminorm>(h);
  return QuadraticSeminorm(q.alphas() / n, q.rotation(), 1e-10);
}

/// Multiplies the seminorm by t > 0.
inline Seminorm scale(const Seminorm& h, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("scale factor must be positive");
  if (const auto* r1 = std::get_if<Rank1Seminorm>(&h)) return Rank1Seminorm(r1->eta() * t);
  const auto& q = std::get<QuadraticSeminorm>(h);
  return QuadraticSeminorm(q.alphas() * t, q.rotation(), 1e-10);
}

/// A quadratic seminorm with exactly one positive coefficient is rank-1:
/// H(xi) = |<xi, alpha_1 R e_1>|.
inline Rank1Seminorm rank1_reduction(const QuadraticSeminorm& q) {
  if ((q.alphas().array() > 0.0).count() != 1)
    throw std::invalid_argument("rank-1 reduction needs exactly one positive coefficient");
  return Rank1Seminorm(q.alphas()[0] * q.rotation().col(0));
}

}  // namespace aniso
