#pragma once

// Domain types shared by every module: the multiview dataset, the
// hyperparameters consumed by training, the training-time state and the
// deployable bundle.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "intact/error.hpp"

namespace intact {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n points observed through m views. views[j] is n x view_dims[j]; row i is
/// the feature vector of point i in view j.
struct MultiviewDataset {
  Index n = 0;
  std::vector<Index> view_dims;
  std::vector<Matrix> views;
  /// Empty for unlabeled data (prediction inputs).
  std::vector<int> labels;

  Index m() const { return static_cast<Index>(view_dims.size()); }
  bool labeled() const { return !labels.empty(); }

  /// Feature vector of point i in view j.
  auto point(Index j, Index i) const { return views[j].row(i).transpose(); }
};

struct Hyperparams {
  double alpha = 1.0;
  double gamma = 0.01;
  double c = 1.0;
  /// Intact dimension; 0 means "use the smallest view dimension".
  Index d = 0;
  int T = 100;
  int t_inf = 200;
  std::uint64_t seed = 0;
  double init_scale = 0.01;
};

/// Training-time variables. Z is n x d (rows are intact vectors), W[j] is
/// view_dims[j] x d, beta holds the frozen hinge indicators.
struct ModelState {
  Matrix Z;
  std::vector<Matrix> W;
  Vector omega;
  std::vector<std::uint8_t> beta;

  Index d() const { return omega.size(); }
  Index n() const { return Z.rows(); }
  Index m() const { return static_cast<Index>(W.size()); }

  friend bool operator==(const ModelState& a, const ModelState& b) {
    if (a.W.size() != b.W.size() || a.beta != b.beta) return false;
    for (std::size_t j = 0; j < a.W.size(); ++j) {
      if (a.W[j].rows() != b.W[j].rows() || a.W[j].cols() != b.W[j].cols() ||
          a.W[j] != b.W[j])
        return false;
    }
    return a.Z.rows() == b.Z.rows() && a.Z.cols() == b.Z.cols() &&
           a.Z == b.Z && a.omega.size() == b.omega.size() &&
           a.omega == b.omega;
  }
};

/// What prediction needs: the view transforms and the classifier. Z stays
/// behind with the training run.
struct ModelBundle {
  std::vector<Matrix> W;
  Vector omega;
  Hyperparams hyperparams;
  int class_tag = 1;

  Index d() const { return omega.size(); }
  Index m() const { return static_cast<Index>(W.size()); }
  std::vector<Index> view_dims() const {
    std::vector<Index> dims;
    for (const auto& w : W) dims.push_back(w.rows());
    return dims;
  }
};

struct ObjectiveTerms {
  double reconstruction = 0.0;
  double classification = 0.0;
  double regularization = 0.0;
  double total = 0.0;
};

struct TrainReport {
  /// Entry 0 is evaluated right after initialization, entry t after epoch t.
  std::vector<ObjectiveTerms> objective_trace;
  double wall_time = 0.0;
  Index final_beta_active_count = 0;
};

struct ValidationOptions {
  /// Every label must be +1 or -1.
  bool binary_labels = false;
  /// Accept a dataset with no labels at all.
  bool allow_unlabeled = false;
};

/// Returns one human-readable message per violated dataset invariant; empty
/// when the dataset is well formed.
inline std::vector<std::string> validate(const MultiviewDataset& ds,
                                         ValidationOptions opts = {}) {
  std::vector<std::string> out;
  auto say = [&out](auto&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    out.push_back(os.str());
  };

  if (ds.n < 0) say("n is negative (", ds.n, ")");
  if (ds.views.size() != ds.view_dims.size())
    say("dataset declares ", ds.view_dims.size(), " views but holds ",
        ds.views.size(), " matrices");

  const std::size_t m = std::min(ds.views.size(), ds.view_dims.size());
  for (std::size_t j = 0; j < m; ++j) {
    const Matrix& x = ds.views[j];
    if (ds.view_dims[j] < 1)
      say("view ", j, ": declared dimension ", ds.view_dims[j],
          " is not positive");
    if (x.rows() != ds.n)
      say("view ", j, ": has ", x.rows(), " rows, expected n = ", ds.n);
    if (x.cols() != ds.view_dims[j])
      say("view ", j, ": has ", x.cols(), " columns, expected ",
          ds.view_dims[j]);
    bool reported = false;
    for (Index r = 0; r < x.rows() && !reported; ++r) {
      for (Index col = 0; col < x.cols(); ++col) {
        if (!std::isfinite(x(r, col))) {
          say("view ", j, ": non-finite entry at row ", r, ", column ", col);
          reported = true;
          break;
        }
      }
    }
  }

  if (ds.labels.empty() && opts.allow_unlabeled) return out;
  if (static_cast<Index>(ds.labels.size()) != ds.n) {
    say("labels: has ", ds.labels.size(), " entries, expected n = ", ds.n);
  }
  if (opts.binary_labels) {
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      if (ds.labels[i] != 1 && ds.labels[i] != -1) {
        say("labels: entry ", i, " is ", ds.labels[i],
            ", binary mode requires +1 or -1");
        break;
      }
    }
  }
  return out;
}

/// Throws InvalidArgument listing every violation, if any.
inline void require_valid(const MultiviewDataset& ds,
                          ValidationOptions opts = {}) {
  const auto violations = validate(ds, opts);
  if (violations.empty()) return;
  std::string msg = "invalid dataset:";
  for (const auto& v : violations) msg += "\n  " + v;
  throw InvalidArgument(msg);
}

inline void require_valid(const Hyperparams& hp) {
  if (!(hp.c > 0)) throw InvalidArgument("hyperparams: c must be positive");
  if (hp.d < 0) throw InvalidArgument("hyperparams: d must be >= 1");
  if (hp.T < 1) throw InvalidArgument("hyperparams: T must be >= 1");
  if (hp.t_inf < 1) throw InvalidArgument("hyperparams: t_inf must be >= 1");
  if (!(hp.alpha >= 0)) throw InvalidArgument("hyperparams: alpha must be >= 0");
  if (!(hp.gamma >= 0)) throw InvalidArgument("hyperparams: gamma must be >= 0");
  if (!(hp.init_scale > 0))
    throw InvalidArgument("hyperparams: init_scale must be positive");
}

/// Intact dimension actually used for a dataset: hp.d, or min_j d_j if unset.
inline Index resolve_dim(const Hyperparams& hp, const MultiviewDataset& ds) {
  if (hp.d > 0) return hp.d;
  if (ds.view_dims.empty()) throw InvalidArgument("dataset has no views");
  return *std::min_element(ds.view_dims.begin(), ds.view_dims.end());
}

/// Sorted distinct labels.
inline std::vector<int> distinct_labels(const std::vector<int>& labels) {
  std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

/// Copy of ds with labels replaced by +1 for `positive`, -1 otherwise.
inline MultiviewDataset binary_projection(const MultiviewDataset& ds,
                                          int positive) {
  MultiviewDataset out = ds;
  for (int& y : out.labels) y = (y == positive) ? 1 : -1;
  return out;
}

/// Rows `indices` of every view (and label), in the given order.
inline MultiviewDataset subset(const MultiviewDataset& ds,
                               const std::vector<Index>& indices) {
  MultiviewDataset out;
  out.n = static_cast<Index>(indices.size());
  out.view_dims = ds.view_dims;
  out.views.reserve(ds.views.size());
  for (const Matrix& x : ds.views) {
    Matrix rows(out.n, x.cols());
    for (Index r = 0; r < out.n; ++r) rows.row(r) = x.row(indices[r]);
    out.views.push_back(std::move(rows));
  }
  if (ds.labeled()) {
    out.labels.reserve(indices.size());
    for (Index i : indices) out.labels.push_back(ds.labels[i]);
  }
  return out;
}

}  // namespace intact
