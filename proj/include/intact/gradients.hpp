#pragma once

// Analytic gradients of the per-block subproblems that the alternating
// descent minimizes, each with the hinge indicators held fixed:
//
//   g(z_i)  = sum_j log(1 + ||x_i^j - W_j z_i||^2 / c^2)
//             + alpha beta_i (1 - y_i <omega, z_i>) + gamma ||z_i||^2
//   f(W_j)  = sum_i log(1 + ||x_i^j - W_j z_i||^2 / c^2) + gamma ||W_j||_F^2
//   h(omega) = alpha sum_i beta_i (1 - y_i <omega, z_i>) + gamma ||omega||^2
//
// The reconstruction gradient carries a leading minus sign and the
// regularizer contributes 2 gamma v. Both follow from differentiating the
// objectives above and are checked against central differences.

#include <functional>
#include <string>

#include "intact/losses.hpp"
#include "intact/model.hpp"

namespace intact {

namespace detail {

// Test-only mutation: compile with this defined to reproduce the
// sign-flipped reconstruction gradient and confirm the oracle catches it.
#ifdef INTACT_INJECT_GRADIENT_SIGN_FLIP
inline constexpr double kReconSign = 1.0;
#else
inline constexpr double kReconSign = -1.0;
#endif

inline void check_index(Index k, Index limit, const char* what) {
  if (k < 0 || k >= limit)
    throw InvalidArgument(std::string(what) + " index " + std::to_string(k) +
                          " out of range [0, " + std::to_string(limit) + ")");
}

}  // namespace detail

/// Gradient in z of sum_j log(1 + ||x^j - W_j z||^2 / c^2) + gamma ||z||^2,
/// where x_of(j) yields the view-j features of the point.
template <typename PointOf, typename DZ>
Vector intact_gradient(PointOf&& x_of, const std::vector<Matrix>& W,
                       const Eigen::MatrixBase<DZ>& z, double c,
                       double gamma) {
  const double c2 = c * c;
  Vector g = 2.0 * gamma * z;
  for (std::size_t j = 0; j < W.size(); ++j) {
    const Vector r = x_of(static_cast<Index>(j)) - W[j] * z;
    g.noalias() += (detail::kReconSign * 2.0 / (c2 + r.squaredNorm())) *
                   (W[j].transpose() * r);
  }
  return g;
}

/// Gradient of g(z_i) at the state's z_i, using state.beta[i].
inline Vector grad_z(Index i, const MultiviewDataset& ds, const ModelState& s,
                     const Hyperparams& hp) {
  detail::check_index(i, ds.n, "grad_z: point");
  detail::check_state_shapes(ds, s);
  Vector g = intact_gradient([&](Index j) { return ds.point(j, i); }, s.W,
                             s.Z.row(i).transpose(), hp.c, hp.gamma);
  if (s.beta[i]) g -= (hp.alpha * ds.labels[i]) * s.omega;
  return g;
}

/// Gradient of f(W_j) at the state's W_j.
inline Matrix grad_W(Index j, const MultiviewDataset& ds, const ModelState& s,
                     const Hyperparams& hp) {
  detail::check_index(j, ds.m(), "grad_W: view");
  detail::check_state_shapes(ds, s);
  const double c2 = hp.c * hp.c;
  Matrix g = 2.0 * hp.gamma * s.W[j];
  for (Index i = 0; i < ds.n; ++i) {
    const auto z = s.Z.row(i).transpose();
    const Vector r = ds.point(j, i) - s.W[j] * z;
    g.noalias() += (detail::kReconSign * 2.0 / (c2 + r.squaredNorm())) *
                   (r * z.transpose());
  }
  return g;
}

/// Gradient of h(omega) at the state's omega, using state.beta.
inline Vector grad_omega(const MultiviewDataset& ds, const ModelState& s,
                         const Hyperparams& hp) {
  detail::check_state_shapes(ds, s);
  Vector g = 2.0 * hp.gamma * s.omega;
  for (Index i = 0; i < ds.n; ++i) {
    if (s.beta[i])
      g.noalias() -= (hp.alpha * ds.labels[i]) * s.Z.row(i).transpose();
  }
  return g;
}

/// Central-difference gradient of f at point with step h.
template <typename F>
Vector finite_diff(F&& f, const Vector& point, double h) {
  if (!(h > 0)) throw InvalidArgument("finite_diff: h must be positive");
  Vector grad(point.size());
  Vector probe = point;
  for (Index k = 0; k < point.size(); ++k) {
    probe[k] = point[k] + h;
    const double up = f(static_cast<const Vector&>(probe));
    probe[k] = point[k] - h;
    const double down = f(static_cast<const Vector&>(probe));
    probe[k] = point[k];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("finite_diff: non-finite function value at component " +
                         std::to_string(k));
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

// Block subproblem objectives (beta frozen from the state).

inline double subproblem_z(Index i, const MultiviewDataset& ds,
                           const ModelState& s, const Hyperparams& hp,
                           const Vector& z) {
  double v = hp.gamma * z.squaredNorm();
  for (Index j = 0; j < ds.m(); ++j)
    v += cauchy_error(ds.point(j, i), s.W[j], z, hp.c);
  if (s.beta[i]) v += hp.alpha * (1.0 - margin(ds.labels[i], s.omega, z));
  return v;
}

inline double subproblem_W(Index j, const MultiviewDataset& ds,
                           const ModelState& s, const Hyperparams& hp,
                           const Matrix& W) {
  double v = hp.gamma * W.squaredNorm();
  for (Index i = 0; i < ds.n; ++i)
    v += cauchy_error(ds.point(j, i), W, s.Z.row(i).transpose(), hp.c);
  return v;
}

inline double subproblem_omega(const MultiviewDataset& ds, const ModelState& s,
                               const Hyperparams& hp, const Vector& omega) {
  double v = hp.gamma * omega.squaredNorm();
  for (Index i = 0; i < ds.n; ++i) {
    if (s.beta[i])
      v += hp.alpha * (1.0 - margin(ds.labels[i], omega, s.Z.row(i).transpose()));
  }
  return v;
}

}  // namespace intact
