#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "intact/inference.hpp"
#include "intact/model.hpp"
#include "intact/text.hpp"
#include "intact/trainer.hpp"

namespace intact {

/// Fraction of positions where predicted equals actual.
inline double accuracy(const std::vector<int>& predicted,
                       const std::vector<int>& actual) {
  if (predicted.size() != actual.size())
    throw ShapeError("accuracy: " + std::to_string(predicted.size()) +
                     " predictions vs " + std::to_string(actual.size()) +
                     " labels");
  if (predicted.empty()) throw InvalidArgument("accuracy: empty label lists");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    correct += predicted[i] == actual[i];
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

struct CvConfig {
  int k = 10;
  std::uint64_t seed = 0;
  bool stratified = true;
};

using Fold = std::vector<Index>;

/// Partition {0..n-1} into k folds whose sizes differ by at most one.
///
/// Indices are shuffled (per class when stratified), the classes are laid
/// end to end, and the sequence is dealt round-robin. Each class therefore
/// lands in every fold within one of its proportional share.
inline std::vector<Fold> kfold_split(Index n, const CvConfig& cfg,
                                     const std::vector<int>& labels = {}) {
  if (cfg.k < 2) throw InvalidArgument("kfold_split: k must be >= 2");
  if (cfg.k > n)
    throw InvalidArgument("kfold_split: k = " + std::to_string(cfg.k) +
                          " exceeds n = " + std::to_string(n));
  if (cfg.stratified && static_cast<Index>(labels.size()) != n)
    throw ShapeError("kfold_split: stratified split needs n labels");

  std::mt19937_64 rng(cfg.seed);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  if (cfg.stratified) {
    std::map<int, std::vector<Index>> by_class;
    for (Index i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    for (auto& [label, members] : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
      order.insert(order.end(), members.begin(), members.end());
    }
  } else {
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
  }

  std::vector<Fold> folds(static_cast<std::size_t>(cfg.k));
  for (std::size_t p = 0; p < order.size(); ++p)
    folds[p % folds.size()].push_back(order[p]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

/// Complement of a fold, ascending.
inline std::vector<Index> training_indices(Index n, const Fold& test) {
  std::vector<bool> held(static_cast<std::size_t>(n), false);
  for (Index i : test) held[static_cast<std::size_t>(i)] = true;
  std::vector<Index> train;
  for (Index i = 0; i < n; ++i)
    if (!held[static_cast<std::size_t>(i)]) train.push_back(i);
  return train;
}

struct Prediction {
  std::vector<int> labels;
  /// values[i][k]: decision value of point i under bundle k.
  std::vector<std::vector<double>> values;
};

/// One-vs-all prediction for every point of ds.
inline Prediction predict(const MultiviewDataset& ds,
                          const std::vector<ModelBundle>& bundles,
                          const InferenceConfig& cfg = {}) {
  Prediction out;
  out.labels.reserve(static_cast<std::size_t>(ds.n));
  for (Index i = 0; i < ds.n; ++i) {
    auto d = decide_multiclass(point_views(ds, i), bundles, cfg);
    out.labels.push_back(d.label);
    out.values.push_back(std::move(d.values));
  }
  return out;
}

struct CvResult {
  std::vector<double> per_fold_accuracy;
  double mean = 0.0;
  double std = 0.0;  ///< Population standard deviation over folds.
};

/// Called with (fold, training indices, test indices) before each fold runs.
using FoldObserver =
    std::function<void(int, const std::vector<Index>&, const Fold&)>;

inline CvResult cross_validate(const MultiviewDataset& ds,
                               const Hyperparams& hp,
                               const StepSchedule& schedule,
                               const CvConfig& cv,
                               const InferenceConfig& inf,
                               const FoldObserver& observer = {}) {
  require_valid(ds);
  const auto classes = distinct_labels(ds.labels);
  if (classes.size() < 2)
    throw InvalidArgument(
        "cross_validate: one-vs-all needs at least 2 distinct labels");

  const auto folds = kfold_split(ds.n, cv, ds.labels);
  CvResult out;
  for (int f = 0; f < cv.k; ++f) {
    const Fold& test = folds[static_cast<std::size_t>(f)];
    const auto train_idx = training_indices(ds.n, test);
    for (Index i : test) {
      if (std::binary_search(train_idx.begin(), train_idx.end(), i))
        throw Error("cross_validate: fold " + std::to_string(f) +
                    " trains on test index " + std::to_string(i));
    }
    if (observer) observer(f, train_idx, test);

    try {
      const auto model =
          train_one_vs_all(subset(ds, train_idx), classes, hp, schedule);
      const auto test_ds = subset(ds, test);
      const auto pred = predict(test_ds, model.bundles, inf);
      out.per_fold_accuracy.push_back(accuracy(pred.labels, test_ds.labels));
    } catch (const Error& e) {
      throw Error("fold " + std::to_string(f) + ": " + e.what());
    }
  }

  const double k = static_cast<double>(out.per_fold_accuracy.size());
  out.mean = std::accumulate(out.per_fold_accuracy.begin(),
                             out.per_fold_accuracy.end(), 0.0) /
             k;
  double ss = 0.0;
  for (double a : out.per_fold_accuracy) ss += (a - out.mean) * (a - out.mean);
  out.std = std::sqrt(ss / k);
  return out;
}

struct SweepConfig {
  enum class Param { alpha, gamma };
  Param param = Param::alpha;
  std::vector<double> values{0.1, 1.0, 10.0, 100.0, 1000.0};
  Hyperparams base_hp{};
};

inline const char* param_name(SweepConfig::Param p) {
  return p == SweepConfig::Param::alpha ? "alpha" : "gamma";
}

struct SweepRow {
  double value = 0.0;
  double mean_accuracy = 0.0;
  double std = 0.0;
};

/// cross_validate once per value of the swept parameter, rows in input order.
inline std::vector<SweepRow> sensitivity_sweep(const MultiviewDataset& ds,
                                               const SweepConfig& sweep,
                                               const StepSchedule& schedule,
                                               const CvConfig& cv,
                                               const InferenceConfig& inf) {
  if (sweep.values.empty())
    throw InvalidArgument("sweep: no parameter values given");
  for (double v : sweep.values)
    if (!(v > 0)) throw InvalidArgument("sweep: values must be positive");

  std::vector<SweepRow> rows;
  for (double v : sweep.values) {
    Hyperparams hp = sweep.base_hp;
    (sweep.param == SweepConfig::Param::alpha ? hp.alpha : hp.gamma) = v;
    try {
      const CvResult r = cross_validate(ds, hp, schedule, cv, inf);
      rows.push_back({v, r.mean, r.std});
    } catch (const Error& e) {
      throw Error(std::string(param_name(sweep.param)) + " = " +
                  text::format(v) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace intact
