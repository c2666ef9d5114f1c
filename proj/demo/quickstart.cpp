// Generate a small two-view problem, train, and classify held-out points.

#include <iostream>

#include "intact/intact.hpp"

int main() {
  using namespace intact;

  SyntheticSpec spec;
  spec.n = 120;
  spec.view_dims = {6, 10};
  const auto ds = generate_synthetic(spec).dataset;

  std::vector<Index> train_idx, test_idx;
  for (Index i = 0; i < ds.n; ++i) (i % 5 ? train_idx : test_idx).push_back(i);
  const auto train_ds = subset(ds, train_idx);
  const auto test_ds = subset(ds, test_idx);

  Hyperparams hp;
  hp.d = spec.d;
  const auto result = train(train_ds, hp, {StepSchedule::Kind::inverse_t, 0.1});
  std::cout << "objective: " << result.report.objective_trace.front().total << " -> "
            << result.report.objective_trace.back().total << "\n";

  InferenceConfig inf;
  inf.schedule.base = 0.05;
  std::vector<int> predicted;
  for (Index i = 0; i < test_ds.n; ++i)
    predicted.push_back(classify_binary(point_views(test_ds, i), result.bundle, inf));
  std::cout << "held-out accuracy: " << accuracy(predicted, test_ds.labels) << "\n";
}
