#pragma once

#include <cmath>
#include <string>

#include "intact/model.hpp"

namespace intact {

namespace detail {

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

/// Shapes of state against dataset: Z is n x d, W[j] is d_j x d, omega d.
inline void check_state_shapes(const MultiviewDataset& ds,
                               const ModelState& s) {
  const Index d = s.omega.size();
  require_shape(s.Z.rows() == ds.n && s.Z.cols() == d,
                "state Z is " + std::to_string(s.Z.rows()) + "x" +
                    std::to_string(s.Z.cols()) + ", expected " +
                    std::to_string(ds.n) + "x" + std::to_string(d));
  require_shape(s.m() == ds.m(), "state has " + std::to_string(s.m()) +
                                     " view transforms, dataset has " +
                                     std::to_string(ds.m()) + " views");
  for (Index j = 0; j < ds.m(); ++j) {
    require_shape(s.W[j].rows() == ds.view_dims[j] && s.W[j].cols() == d,
                  "state W[" + std::to_string(j) + "] is " +
                      std::to_string(s.W[j].rows()) + "x" +
                      std::to_string(s.W[j].cols()) + ", expected " +
                      std::to_string(ds.view_dims[j]) + "x" +
                      std::to_string(d));
  }
  require_shape(static_cast<Index>(s.beta.size()) == ds.n,
                "state beta has " + std::to_string(s.beta.size()) +
                    " entries, expected " + std::to_string(ds.n));
  require_shape(static_cast<Index>(ds.labels.size()) == ds.n,
                "dataset has " + std::to_string(ds.labels.size()) +
                    " labels, expected " + std::to_string(ds.n));
}

}  // namespace detail

/// Cauchy reconstruction error log(1 + ||x - W z||^2 / c^2).
template <typename DX, typename DW, typename DZ>
double cauchy_error(const Eigen::MatrixBase<DX>& x,
                    const Eigen::MatrixBase<DW>& W,
                    const Eigen::MatrixBase<DZ>& z, double c) {
  detail::require_shape(W.rows() == x.size(),
                        "cauchy_error: x has length " +
                            std::to_string(x.size()) + " but W has " +
                            std::to_string(W.rows()) + " rows");
  detail::require_shape(W.cols() == z.size(),
                        "cauchy_error: z has length " +
                            std::to_string(z.size()) + " but W has " +
                            std::to_string(W.cols()) + " columns");
  if (!(c > 0)) throw InvalidArgument("cauchy_error: c must be positive");
  const double r2 = (x - W * z).squaredNorm();
  return std::log1p(r2 / (c * c));
}

/// Signed margin y <omega, z>.
template <typename DO, typename DZ>
double margin(int y, const Eigen::MatrixBase<DO>& omega,
              const Eigen::MatrixBase<DZ>& z) {
  detail::require_shape(omega.size() == z.size(),
                        "margin: omega has length " +
                            std::to_string(omega.size()) + ", z has " +
                            std::to_string(z.size()));
  return y * omega.dot(z);
}

/// max(0, 1 - y <omega, z>).
template <typename DO, typename DZ>
double hinge_loss(int y, const Eigen::MatrixBase<DO>& omega,
                  const Eigen::MatrixBase<DZ>& z) {
  return std::max(0.0, 1.0 - margin(y, omega, z));
}

/// 1 when the hinge is active (1 - y <omega, z> > 0, strictly), else 0.
template <typename DO, typename DZ>
std::uint8_t hinge_indicator(int y, const Eigen::MatrixBase<DO>& omega,
                             const Eigen::MatrixBase<DZ>& z) {
  return (1.0 - margin(y, omega, z) > 0.0) ? 1 : 0;
}

/// Sum of squared entries of Z, every W_j and omega.
inline double regularizer(const ModelState& s) {
  double sum = s.Z.squaredNorm();
  for (const Matrix& w : s.W) sum += w.squaredNorm();
  return sum + s.omega.squaredNorm();
}

/// The joint objective split into its three weighted terms. The
/// classification term is the true hinge, not the beta-frozen surrogate.
inline ObjectiveTerms objective(const MultiviewDataset& ds,
                                const ModelState& s, const Hyperparams& hp) {
  detail::check_state_shapes(ds, s);
  ObjectiveTerms t;
  for (Index i = 0; i < ds.n; ++i) {
    const auto z = s.Z.row(i).transpose();
    for (Index j = 0; j < ds.m(); ++j)
      t.reconstruction += cauchy_error(ds.point(j, i), s.W[j], z, hp.c);
  }
  double hinge = 0.0;
  for (Index i = 0; i < ds.n; ++i)
    hinge += hinge_loss(ds.labels[i], s.omega, s.Z.row(i).transpose());
  t.classification = hp.alpha * hinge;
  t.regularization = hp.gamma * regularizer(s);
  t.total = t.reconstruction + t.classification + t.regularization;
  return t;
}

}  // namespace intact
