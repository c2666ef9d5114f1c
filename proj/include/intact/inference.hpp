#pragma once

// Test-time intact vectors and classification.
//
// An unlabeled point gets its intact vector by minimizing the label-free
// part of the per-point training subproblem,
//
//   q(z) = sum_j log(1 + ||x^j - W_j z||^2 / c^2) + gamma ||z||^2,
//
// with t_inf plain gradient steps under the learned W_j. The iterate with the
// lowest q seen (the start included) is returned, so q never increases.

#include <random>
#include <string>
#include <vector>

#include "intact/gradients.hpp"
#include "intact/model.hpp"
#include "intact/trainer.hpp"

namespace intact {

struct InferenceConfig {
  enum class Init { zero, gaussian };
  int t_inf = 200;
  StepSchedule schedule{};
  Init init = Init::zero;

  void check() const {
    if (t_inf < 1) throw InvalidArgument("inference: t_inf must be >= 1");
    schedule.check();
  }
};

/// Views of a single point: x_views[j] has length d_j.
using PointViews = std::vector<Vector>;

struct InferenceResult {
  Vector z;
  double q_initial = 0.0;
  double q_final = 0.0;
};

namespace detail {

inline void check_point(const PointViews& x, const ModelBundle& b) {
  if (static_cast<Index>(x.size()) != b.m())
    throw ShapeError("point has " + std::to_string(x.size()) +
                     " views but the model expects " + std::to_string(b.m()));
  for (Index j = 0; j < b.m(); ++j) {
    if (x[j].size() != b.W[j].rows())
      throw ShapeError("view " + std::to_string(j) + ": point has " +
                       std::to_string(x[j].size()) +
                       " features but the model expects " +
                       std::to_string(b.W[j].rows()));
  }
}

}  // namespace detail

/// q(z) for one point under a bundle.
inline double intact_objective(const PointViews& x, const ModelBundle& b,
                               const Vector& z) {
  double q = b.hyperparams.gamma * z.squaredNorm();
  for (Index j = 0; j < b.m(); ++j)
    q += cauchy_error(x[j], b.W[j], z, b.hyperparams.c);
  return q;
}

/// Starting point for inference: zeros, or N(0, init_scale^2) seeded by the
/// bundle's seed.
inline Vector inference_start(const ModelBundle& b, const InferenceConfig& cfg) {
  Vector z = Vector::Zero(b.d());
  if (cfg.init == InferenceConfig::Init::gaussian) {
    std::mt19937_64 rng(b.hyperparams.seed);
    std::normal_distribution<double> normal(0.0, b.hyperparams.init_scale);
    for (Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
  }
  return z;
}

inline InferenceResult infer_intact_from(const PointViews& x,
                                         const ModelBundle& b,
                                         const InferenceConfig& cfg,
                                         Vector start) {
  cfg.check();
  detail::check_point(x, b);
  if (start.size() != b.d())
    throw ShapeError("inference start has length " +
                     std::to_string(start.size()) + ", expected " +
                     std::to_string(b.d()));
  const auto& hp = b.hyperparams;
  const auto view = [&x](Index j) -> const Vector& { return x[j]; };

  InferenceResult out;
  out.z = start;
  out.q_initial = intact_objective(x, b, start);
  out.q_final = out.q_initial;
  if (!std::isfinite(out.q_initial))
    throw NumericError("inference: objective is non-finite at the start point");

  Vector z = std::move(start);
  for (int t = 1; t <= cfg.t_inf; ++t) {
    z -= cfg.schedule.step(t) * intact_gradient(view, b.W, z, hp.c, hp.gamma);
    if (!z.allFinite())
      throw NumericError("inference: non-finite iterate at step " +
                         std::to_string(t) + "; try a smaller step base");
    const double q = intact_objective(x, b, z);
    if (q > kDivergenceFactor * out.q_initial && out.q_initial > 0)
      throw DivergenceError("inference diverged at step " + std::to_string(t) +
                            "; reduce the step base");
    if (q < out.q_final) {
      out.q_final = q;
      out.z = z;
    }
  }
  return out;
}

inline InferenceResult infer_intact_detail(const PointViews& x,
                                           const ModelBundle& b,
                                           const InferenceConfig& cfg = {}) {
  return infer_intact_from(x, b, cfg, inference_start(b, cfg));
}

inline Vector infer_intact(const PointViews& x, const ModelBundle& b,
                           const InferenceConfig& cfg = {}) {
  return infer_intact_detail(x, b, cfg).z;
}

inline double decision_value(const PointViews& x, const ModelBundle& b,
                             const InferenceConfig& cfg = {}) {
  return b.omega.dot(infer_intact(x, b, cfg));
}

/// Sign of a decision value; 0 maps to +1.
inline int sign_label(double value) { return value >= 0.0 ? 1 : -1; }

inline int classify_binary(const PointViews& x, const ModelBundle& b,
                           const InferenceConfig& cfg = {}) {
  return sign_label(decision_value(x, b, cfg));
}

struct MulticlassDecision {
  int label = 0;
  std::vector<double> values;  ///< One per bundle, in bundle order.
};

/// Index of the winning bundle: largest value, ties to the lowest class tag.
inline std::size_t argmax_decision(const std::vector<ModelBundle>& bundles,
                                   const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < bundles.size(); ++k) {
    if (values[k] > values[best] ||
        (values[k] == values[best] &&
         bundles[k].class_tag < bundles[best].class_tag))
      best = k;
  }
  return best;
}

inline MulticlassDecision decide_multiclass(
    const PointViews& x, const std::vector<ModelBundle>& bundles,
    const InferenceConfig& cfg = {}) {
  if (bundles.empty()) throw InvalidArgument("classify: no model bundles");
  MulticlassDecision out;
  out.values.reserve(bundles.size());
  for (const auto& b : bundles) out.values.push_back(decision_value(x, b, cfg));
  out.label = bundles[argmax_decision(bundles, out.values)].class_tag;
  return out;
}

inline int classify_multiclass(const PointViews& x,
                               const std::vector<ModelBundle>& bundles,
                               const InferenceConfig& cfg = {}) {
  return decide_multiclass(x, bundles, cfg).label;
}

/// Views of point i of a dataset.
inline PointViews point_views(const MultiviewDataset& ds, Index i) {
  PointViews x;
  x.reserve(ds.views.size());
  for (Index j = 0; j < ds.m(); ++j) x.emplace_back(ds.point(j, i));
  return x;
}

}  // namespace intact
