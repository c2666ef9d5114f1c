#pragma once

// Randomized comparison of the analytic block gradients against central
// differences of the block objectives. The z block differentiates the
// per-point objective with the true hinge max(0, .); configurations with
// any margin within kBoundaryExclusion of the hinge kink are redrawn.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>

#include "intact/gradients.hpp"
#include "intact/losses.hpp"
#include "intact/model.hpp"
#include "intact/trainer.hpp"

namespace intact {

struct GradcheckOptions {
  int trials = 20;
  std::uint64_t seed = 0;
  double h = 1e-6;
  double tolerance = 1e-5;
  Index max_n = 5, max_m = 3, max_d = 4, max_view_dim = 6;
};

inline constexpr double kBoundaryExclusion = 1e-4;

struct BlockResult {
  double max_rel_err = 0.0;
  /// Instance seed of the worst trial.
  std::uint64_t worst_seed = 0;
  int checks = 0;
};

struct GradcheckReport {
  BlockResult z, W, omega;
  bool passed(double tol) const {
    return z.max_rel_err < tol && W.max_rel_err < tol && omega.max_rel_err < tol;
  }
};

struct GradcheckInstance {
  MultiviewDataset dataset;
  ModelState state;
  Hyperparams hp;
};

/// ||a - b|| / max(1, ||a||).
inline double relative_error(const Vector& analytic, const Vector& numeric) {
  return (analytic - numeric).norm() / std::max(1.0, analytic.norm());
}

/// Random small configuration, redrawn until every margin is at least
/// kBoundaryExclusion away from the hinge kink.
inline GradcheckInstance random_instance(std::uint64_t seed,
                                         const GradcheckOptions& o = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto count = [&](Index hi) {
    return std::uniform_int_distribution<Index>(1, hi)(rng);
  };
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto gaussian = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index k = 0; k < c; ++k) m(i, k) = normal(rng);
    return m;
  };

  GradcheckInstance inst;
  auto& ds = inst.dataset;
  auto& s = inst.state;
  ds.n = count(o.max_n);
  const Index m = count(o.max_m);
  const Index d = count(o.max_d);
  for (Index j = 0; j < m; ++j) {
    ds.view_dims.push_back(count(o.max_view_dim));
    ds.views.push_back(gaussian(ds.n, ds.view_dims.back()));
  }
  for (Index i = 0; i < ds.n; ++i)
    ds.labels.push_back(std::bernoulli_distribution(0.5)(rng) ? 1 : -1);
  inst.hp.alpha = uniform(0.1, 2.0);
  inst.hp.gamma = uniform(0.0, 1.0);
  inst.hp.c = uniform(0.5, 2.0);
  inst.hp.d = d;

  for (Index j = 0; j < m; ++j) s.W.push_back(gaussian(ds.view_dims[j], d));
  while (true) {
    s.Z = gaussian(ds.n, d);
    s.omega = gaussian(d, 1).col(0);
    bool clear = true;
    for (Index i = 0; i < ds.n; ++i) {
      const double gap = 1.0 - margin(ds.labels[i], s.omega, s.Z.row(i).transpose());
      if (std::abs(gap) < kBoundaryExclusion) clear = false;
    }
    if (clear) break;
  }
  s.beta.resize(ds.n);
  for (Index i = 0; i < ds.n; ++i)
    s.beta[i] = hinge_indicator(ds.labels[i], s.omega, s.Z.row(i).transpose());
  return inst;
}

inline GradcheckReport run_gradcheck(const GradcheckOptions& o = {}) {
  GradcheckReport rep;
  auto record = [](BlockResult& b, double err, std::uint64_t seed) {
    if (++b.checks == 1 || err > b.max_rel_err) {
      b.max_rel_err = err;
      b.worst_seed = seed;
    }
  };

  for (int trial = 0; trial < o.trials; ++trial) {
    const std::uint64_t seed =
        detail::splitmix64(o.seed + static_cast<std::uint64_t>(trial));
    const auto inst = random_instance(seed, o);
    const auto& ds = inst.dataset;
    const auto& s = inst.state;
    const auto& hp = inst.hp;

    for (Index i = 0; i < ds.n; ++i) {
      auto g = [&](const Vector& z) {
        double v = hp.gamma * z.squaredNorm() +
                   hp.alpha * hinge_loss(ds.labels[i], s.omega, z);
        for (Index j = 0; j < ds.m(); ++j)
          v += cauchy_error(ds.point(j, i), s.W[j], z, hp.c);
        return v;
      };
      const Vector numeric = finite_diff(g, s.Z.row(i).transpose(), o.h);
      record(rep.z, relative_error(grad_z(i, ds, s, hp), numeric), seed);
    }

    for (Index j = 0; j < ds.m(); ++j) {
      const Index rows = s.W[j].rows(), cols = s.W[j].cols();
      auto f = [&](const Vector& flat) {
        const Matrix W = Eigen::Map<const Matrix>(flat.data(), rows, cols);
        return subproblem_W(j, ds, s, hp, W);
      };
      const Vector at = Eigen::Map<const Vector>(s.W[j].data(), s.W[j].size());
      const Vector numeric = finite_diff(f, at, o.h);
      const Matrix analytic = grad_W(j, ds, s, hp);
      record(rep.W,
             relative_error(Eigen::Map<const Vector>(analytic.data(), analytic.size()),
                            numeric),
             seed);
    }

    auto h = [&](const Vector& omega) {
      return subproblem_omega(ds, s, hp, omega);
    };
    record(rep.omega,
           relative_error(grad_omega(ds, s, hp), finite_diff(h, s.omega, o.h)),
           seed);
  }
  return rep;
}

}  // namespace intact
