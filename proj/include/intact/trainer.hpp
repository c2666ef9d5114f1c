#pragma once

// Alternating gradient descent over (Z, W, omega).
//
// Epoch t, with step mu_t:
//   for each i: beta_i <- indicator(y_i, omega^{t-1}, z_i^{t-1})
//               z_i    <- z_i - mu_t grad_z   (W^{t-1}, omega^{t-1}, beta_i^t)
//   for each j: W_j    <- W_j - mu_t grad_W   (z^t)
//   omega <- omega - mu_t grad_omega          (beta^t, z^t)

#include <chrono>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "intact/gradients.hpp"
#include "intact/losses.hpp"
#include "intact/model.hpp"

namespace intact {

struct StepSchedule {
  enum class Kind { inverse_t, constant };
  Kind kind = Kind::inverse_t;
  double base = 1.0;

  /// Step size for iteration t >= 1.
  double step(int t) const {
    return kind == Kind::inverse_t ? base / static_cast<double>(t) : base;
  }

  void check() const {
    if (!(base > 0)) throw InvalidArgument("step schedule: base must be positive");
  }
};

/// Objective growth factor (relative to the post-initialization value) that
/// aborts training.
inline constexpr double kDivergenceFactor = 1e3;

struct TrainResult {
  ModelState state;
  ModelBundle bundle;
  TrainReport report;
};

namespace detail {

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

[[noreturn]] inline void non_finite(const char* block, Index index, int t) {
  std::ostringstream os;
  os << "non-finite value in " << block;
  if (index >= 0) os << "[" << index << "]";
  os << " at iteration " << t
     << "; the step schedule is too aggressive, try a smaller step base";
  throw NumericError(os.str());
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seed used for the one-vs-all run of class `class_tag`.
inline std::uint64_t class_seed(std::uint64_t seed, int class_tag) {
  return detail::splitmix64(
      seed ^ detail::splitmix64(static_cast<std::uint64_t>(
                 static_cast<std::int64_t>(class_tag))));
}

/// Gaussian N(0, init_scale^2) entries for Z, each W_j, then omega, drawn in
/// that order (row-major within each matrix) from a generator seeded by
/// hp.seed. beta is set from the initial values.
inline ModelState initialize(const MultiviewDataset& ds, const Hyperparams& hp) {
  require_valid(hp);
  const Index d = resolve_dim(hp, ds);
  std::mt19937_64 rng(hp.seed);
  std::normal_distribution<double> normal(0.0, hp.init_scale);
  auto fill = [&](Matrix& mat) {
    for (Index r = 0; r < mat.rows(); ++r)
      for (Index c = 0; c < mat.cols(); ++c) mat(r, c) = normal(rng);
  };

  ModelState s;
  s.Z.resize(ds.n, d);
  fill(s.Z);
  for (Index j = 0; j < ds.m(); ++j) {
    Matrix w(ds.view_dims[j], d);
    fill(w);
    s.W.push_back(std::move(w));
  }
  Matrix omega(d, 1);
  fill(omega);
  s.omega = omega.col(0);
  s.beta.resize(ds.n);
  for (Index i = 0; i < ds.n; ++i)
    s.beta[i] = ds.labeled()
                    ? hinge_indicator(ds.labels[i], s.omega, s.Z.row(i).transpose())
                    : 0;
  return s;
}

/// One epoch of the alternating update. The input state is not modified.
inline ModelState train_epoch(int t, const MultiviewDataset& ds,
                              const ModelState& prev, const Hyperparams& hp,
                              const StepSchedule& schedule) {
  if (t < 1) throw InvalidArgument("train_epoch: t must be >= 1");
  schedule.check();
  detail::check_state_shapes(ds, prev);
  const double mu = schedule.step(t);

  ModelState next = prev;

  // z_i and beta_i read only previous-iteration values, so grad_z on `prev`
  // with the refreshed beta_i is exactly the required update.
  ModelState frozen = prev;
  for (Index i = 0; i < ds.n; ++i) {
    const auto z_old = prev.Z.row(i).transpose();
    const std::uint8_t b = hinge_indicator(ds.labels[i], prev.omega, z_old);
    next.beta[i] = b;
    frozen.beta[i] = b;
    const Vector z_new = z_old - mu * grad_z(i, ds, frozen, hp);
    if (!z_new.allFinite()) detail::non_finite("z", i, t);
    next.Z.row(i) = z_new.transpose();
  }

  // W_j^t uses z^t and W_j^{t-1}.
  ModelState mid = next;
  for (Index j = 0; j < ds.m(); ++j) {
    next.W[j] = prev.W[j] - mu * grad_W(j, ds, mid, hp);
    if (!next.W[j].allFinite()) detail::non_finite("W", j, t);
  }

  // omega^t uses beta^t, z^t and omega^{t-1}.
  next.omega = prev.omega - mu * grad_omega(ds, mid, hp);
  if (!next.omega.allFinite()) detail::non_finite("omega", -1, t);
  return next;
}

/// Initialize, then run hp.T epochs, tracing the objective after
/// initialization and after every epoch. Labels must be +1 / -1.
inline TrainResult train(const MultiviewDataset& ds, const Hyperparams& hp,
                         const StepSchedule& schedule = {}) {
  require_valid(ds, {.binary_labels = true});
  require_valid(hp);
  schedule.check();
  const auto start = std::chrono::steady_clock::now();

  TrainResult out;
  out.state = initialize(ds, hp);
  out.report.objective_trace.reserve(static_cast<std::size_t>(hp.T) + 1);
  out.report.objective_trace.push_back(objective(ds, out.state, hp));
  const double initial = out.report.objective_trace.front().total;

  for (int t = 1; t <= hp.T; ++t) {
    try {
      out.state = train_epoch(t, ds, out.state, hp, schedule);
    } catch (const NumericError& e) {
      throw NumericError(std::string("training failed: ") + e.what());
    }
    const ObjectiveTerms terms = objective(ds, out.state, hp);
    if (!std::isfinite(terms.total) ||
        (initial > 0 && terms.total > kDivergenceFactor * initial)) {
      std::ostringstream os;
      os << "training diverged at iteration " << t << ": objective "
         << terms.total << " exceeds " << kDivergenceFactor
         << " x initial value " << initial
         << "; reduce the step base (--step-base)";
      throw DivergenceError(os.str());
    }
    out.report.objective_trace.push_back(terms);
  }

  Hyperparams stored = hp;
  stored.d = out.state.d();
  out.bundle = ModelBundle{out.state.W, out.state.omega, stored, 1};
  out.report.final_beta_active_count = 0;
  for (auto b : out.state.beta) out.report.final_beta_active_count += b;
  out.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

struct OneVsAllResult {
  std::vector<ModelBundle> bundles;
  std::vector<TrainReport> reports;
};

/// One binary model per entry of `classes` (positive = that class). Each run
/// is seeded with class_seed(hp.seed, class).
inline OneVsAllResult train_one_vs_all(const MultiviewDataset& ds,
                                       const std::vector<int>& classes,
                                       const Hyperparams& hp,
                                       const StepSchedule& schedule = {}) {
  require_valid(ds);
  if (classes.size() < 2)
    throw InvalidArgument("one-vs-all needs at least 2 distinct classes, got " +
                          std::to_string(classes.size()));
  OneVsAllResult out;
  for (int k : classes) {
    const auto members = std::count(ds.labels.begin(), ds.labels.end(), k);
    if (members == 0)
      throw InvalidArgument("class " + std::to_string(k) +
                            " has no members in the training data");
    Hyperparams hk = hp;
    hk.seed = class_seed(hp.seed, k);
    TrainResult r;
    try {
      r = train(binary_projection(ds, k), hk, schedule);
    } catch (const DivergenceError& e) {
      throw DivergenceError("class " + std::to_string(k) + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError("class " + std::to_string(k) + ": " + e.what());
    }
    r.bundle.class_tag = k;
    out.bundles.push_back(std::move(r.bundle));
    out.reports.push_back(std::move(r.report));
  }
  return out;
}

/// One-vs-all over the distinct labels present in ds.
inline OneVsAllResult train_one_vs_all(const MultiviewDataset& ds,
                                       const Hyperparams& hp,
                                       const StepSchedule& schedule = {}) {
  require_valid(ds);
  return train_one_vs_all(ds, distinct_labels(ds.labels), hp, schedule);
}

}  // namespace intact
