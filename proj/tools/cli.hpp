#pragma once

// Batch command-line front end. Exit codes: 0 success, 1 runtime or numeric
// error, 2 usage error. Lines meant for scripts are key=value.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "intact/intact.hpp"

namespace intact::cli {

namespace fs = std::filesystem;

/// Raised for flag combinations CLI11 cannot reject on its own.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct TrainFlags {
  Hyperparams hp{};
  double step_base = 1.0;
  std::string schedule = "inverse_t";
  double inf_step_base = 1.0;
};

inline void add_hyper_flags(CLI::App& cmd, TrainFlags& f) {
  cmd.add_option("--alpha", f.hp.alpha, "classification tradeoff")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd.add_option("--gamma", f.hp.gamma, "regularization tradeoff")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd.add_option("--c", f.hp.c, "Cauchy scale")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--dim", f.hp.d, "intact dimension (0: smallest view dim)")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd.add_option("--iters", f.hp.T, "training iterations T")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--seed", f.hp.seed, "random seed")->capture_default_str();
  cmd.add_option("--init-scale", f.hp.init_scale, "initialization std dev")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--step-base", f.step_base, "training step base")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--schedule", f.schedule, "training step schedule")
      ->check(CLI::IsMember({"inverse_t", "constant"}))->capture_default_str();
}

inline void add_inference_flags(CLI::App& cmd, TrainFlags& f) {
  cmd.add_option("--t-inf", f.hp.t_inf, "inference iterations")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--inf-step-base", f.inf_step_base, "inference step base")
      ->check(CLI::PositiveNumber)->capture_default_str();
}

inline StepSchedule schedule_of(const TrainFlags& f) {
  StepSchedule s;
  s.kind = f.schedule == "constant" ? StepSchedule::Kind::constant
                                    : StepSchedule::Kind::inverse_t;
  s.base = f.step_base;
  return s;
}

inline InferenceConfig inference_of(const TrainFlags& f) {
  InferenceConfig cfg;
  cfg.t_inf = f.hp.t_inf;
  cfg.schedule.base = f.inf_step_base;
  return cfg;
}

inline std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  for (const auto& c : cells) {
    if (!row.empty()) row += ',';
    row += c;
  }
  return row + '\n';
}

inline void cmd_train(const fs::path& data, const fs::path& out_dir,
                      const TrainFlags& f, std::ostream& out) {
  const auto ds = load_dataset(data);
  if (!ds.labeled()) throw UsageError("train: dataset has no labels");
  const auto result = train_one_vs_all(ds, f.hp, schedule_of(f));
  fs::create_directories(out_dir);
  save_bundles(result.bundles, out_dir);

  std::string trace = "class_tag,iteration,reconstruction,classification,regularization,total\n";
  for (std::size_t k = 0; k < result.bundles.size(); ++k) {
    const auto tag = std::to_string(result.bundles[k].class_tag);
    const auto& tr = result.reports[k].objective_trace;
    for (std::size_t t = 0; t < tr.size(); ++t)
      trace += csv_row({tag, std::to_string(t), text::format(tr[t].reconstruction),
                        text::format(tr[t].classification),
                        text::format(tr[t].regularization), text::format(tr[t].total)});
  }
  text::write_file(out_dir / "trace.csv", trace);
  out << "classes=" << result.bundles.size() << "\n";
  for (std::size_t k = 0; k < result.bundles.size(); ++k)
    out << "final_objective_" << result.bundles[k].class_tag << "="
        << text::format(result.reports[k].objective_trace.back().total) << "\n";
}

inline void cmd_predict(const fs::path& data, const fs::path& model_dir,
                        const fs::path& out_dir, const TrainFlags& f,
                        bool t_inf_given, std::ostream& out) {
  const auto ds = load_dataset(data);
  auto bundles = load_bundles(model_dir);
  for (const auto& b : bundles) {
    if (b.m() != ds.m())
      throw ShapeError("model class " + std::to_string(b.class_tag) + " has " +
                       std::to_string(b.m()) + " views, data has " +
                       std::to_string(ds.m()));
    for (Index j = 0; j < ds.m(); ++j)
      if (b.W[j].rows() != ds.view_dims[j])
        throw ShapeError("view " + std::to_string(j + 1) + ": model expects " +
                         std::to_string(b.W[j].rows()) + " features, data has " +
                         std::to_string(ds.view_dims[j]));
  }
  InferenceConfig cfg = inference_of(f);
  if (!t_inf_given) cfg.t_inf = bundles.front().hyperparams.t_inf;

  std::vector<int> labels;
  std::string csv = "index,predicted_label";
  for (const auto& b : bundles) csv += ",score_" + std::to_string(b.class_tag);
  csv += '\n';
  for (Index i = 0; i < ds.n; ++i) {
    const auto x = point_views(ds, i);
    std::vector<double> values;
    int label = 0;
    if (bundles.size() == 1) {
      values.push_back(decision_value(x, bundles.front(), cfg));
      label = sign_label(values.front());
    } else {
      auto dec = decide_multiclass(x, bundles, cfg);
      values = std::move(dec.values);
      label = dec.label;
    }
    labels.push_back(label);
    csv += std::to_string(i) + "," + std::to_string(label);
    for (double v : values) csv += "," + text::format(v);
    csv += '\n';
  }
  fs::create_directories(out_dir);
  text::write_file(out_dir / "predictions.csv", csv);
  out << "predictions=" << ds.n << "\n";
  if (ds.labeled()) out << "accuracy=" << text::format(accuracy(labels, ds.labels)) << "\n";
}

inline void cmd_cv(const fs::path& data, const fs::path& out_dir, const CvConfig& cv,
                   const TrainFlags& f, std::ostream& out) {
  const auto ds = load_dataset(data);
  if (!ds.labeled()) throw UsageError("cv: dataset has no labels");
  const auto r = cross_validate(ds, f.hp, schedule_of(f), cv, inference_of(f));
  std::string csv = "fold,accuracy\n";
  for (std::size_t k = 0; k < r.per_fold_accuracy.size(); ++k)
    csv += csv_row({std::to_string(k), text::format(r.per_fold_accuracy[k])});
  fs::create_directories(out_dir);
  text::write_file(out_dir / "cv.csv", csv);
  out << "mean_accuracy=" << text::format(r.mean) << "\n"
      << "std=" << text::format(r.std) << "\n";
}

inline void cmd_sweep(const fs::path& data, const fs::path& out_dir,
                      const std::string& param, const std::vector<double>& values,
                      const CvConfig& cv, const TrainFlags& f, std::ostream& out) {
  const auto ds = load_dataset(data);
  if (!ds.labeled()) throw UsageError("sweep: dataset has no labels");
  SweepConfig sweep;
  sweep.param = param == "alpha" ? SweepConfig::Param::alpha : SweepConfig::Param::gamma;
  sweep.values = values;
  sweep.base_hp = f.hp;
  const auto rows = sensitivity_sweep(ds, sweep, schedule_of(f), cv, inference_of(f));
  std::string csv = "value,mean_accuracy,std\n";
  for (const auto& r : rows)
    csv += csv_row({text::format(r.value), text::format(r.mean_accuracy), text::format(r.std)});
  fs::create_directories(out_dir);
  text::write_file(out_dir / ("sweep_" + param + ".csv"), csv);
  for (const auto& r : rows)
    out << param << "=" << text::format(r.value)
        << " mean_accuracy=" << text::format(r.mean_accuracy)
        << " std=" << text::format(r.std) << "\n";
}

inline void cmd_synth(SyntheticSpec spec, Index views, const fs::path& out_dir,
                      std::ostream& out) {
  if (spec.view_dims.empty())
    spec.view_dims.assign(static_cast<std::size_t>(views), 8);
  if (static_cast<Index>(spec.view_dims.size()) != views)
    throw UsageError("synth: --view-dims lists " +
                     std::to_string(spec.view_dims.size()) + " entries but --views is " +
                     std::to_string(views));
  SyntheticData syn;
  try {
    syn = generate_synthetic(spec);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  save_dataset(syn.dataset, out_dir);
  save_ground_truth(syn.truth, out_dir / "ground_truth");
  out << "n=" << spec.n << "\n"
      << "checksum=" << std::hex << dataset_checksum(syn.dataset) << std::dec << "\n";
}

/// Returns 0 iff every block's worst relative error is below tolerance.
inline int cmd_gradcheck(const GradcheckOptions& opts, std::ostream& out,
                         std::ostream& err) {
  const auto rep = run_gradcheck(opts);
  const std::pair<const char*, const BlockResult*> blocks[] = {
      {"grad_z", &rep.z}, {"grad_W", &rep.W}, {"grad_omega", &rep.omega}};
  int status = 0;
  for (const auto& [name, b] : blocks) {
    out << name << " max_rel_err=" << text::format(b->max_rel_err) << "\n";
    if (!(b->max_rel_err < opts.tolerance)) {
      err << "gradcheck failed: " << name << " relative error "
          << text::format(b->max_rel_err) << " on instance seed " << b->worst_seed
          << "\n";
      status = 1;
    }
  }
  return status;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Multiview intact-space learning with a hinge-loss classifier"};
  app.require_subcommand(1);
  app.name("intact");

  std::string data, out_dir = ".", model, param;
  TrainFlags tf;
  CvConfig cv;
  bool no_stratify = false;
  std::vector<double> values{0.1, 1, 10, 100, 1000};

  auto* train_cmd = app.add_subcommand("train", "train one-vs-all models");
  train_cmd->add_option("--data", data, "dataset manifest")->required();
  train_cmd->add_option("--out", out_dir, "output directory for bundles")->required();
  add_hyper_flags(*train_cmd, tf);

  auto* predict_cmd = app.add_subcommand("predict", "classify a dataset");
  predict_cmd->add_option("--data", data, "dataset manifest")->required();
  predict_cmd->add_option("--model", model, "bundle directory")->required();
  predict_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  add_inference_flags(*predict_cmd, tf);

  auto add_cv_flags = [&](CLI::App* cmd) {
    cmd->add_option("--data", data, "dataset manifest")->required();
    cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    cmd->add_option("--folds", cv.k, "number of folds")->capture_default_str();
    cmd->add_option("--cv-seed", cv.seed, "fold assignment seed")->capture_default_str();
    cmd->add_flag("--no-stratify", no_stratify, "plain (unstratified) folds");
    add_hyper_flags(*cmd, tf);
    add_inference_flags(*cmd, tf);
  };
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation");
  add_cv_flags(cv_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sensitivity sweep");
  add_cv_flags(sweep_cmd);
  sweep_cmd->add_option("--param", param, "parameter to sweep")
      ->required()->check(CLI::IsMember({"alpha", "gamma"}));
  sweep_cmd->add_option("--values", values, "comma-separated values")
      ->delimiter(',')->check(CLI::PositiveNumber);

  SyntheticSpec spec;
  spec.view_dims.clear();
  Index views = 3;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--out", out_dir, "output directory")->required();
  synth_cmd->add_option("--n", spec.n, "points")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--views", views, "view count")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--dim", spec.d, "intact dimension")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--view-dims", spec.view_dims, "comma-separated view dims (default 8 each)")
      ->delimiter(',')->check(CLI::PositiveNumber);
  synth_cmd->add_option("--classes", spec.n_classes, "class count")->capture_default_str();
  synth_cmd->add_option("--noise", spec.noise_sigma, "noise std dev")->capture_default_str();
  synth_cmd->add_option("--margin", spec.margin, "binary margin")->capture_default_str();
  synth_cmd->add_option("--seed", spec.seed, "seed")->capture_default_str();

  GradcheckOptions gopts;
  auto* grad_cmd = app.add_subcommand("gradcheck", "check analytic gradients");
  grad_cmd->add_option("--trials", gopts.trials, "random instances")
      ->check(CLI::PositiveNumber)->capture_default_str();
  grad_cmd->add_option("--seed", gopts.seed, "seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return 2;
  }

  cv.stratified = !no_stratify;
  try {
    if (train_cmd->parsed()) {
      cmd_train(data, out_dir, tf, out);
    } else if (predict_cmd->parsed()) {
      cmd_predict(data, model, out_dir, tf, predict_cmd->count("--t-inf") > 0, out);
    } else if (cv_cmd->parsed()) {
      cmd_cv(data, out_dir, cv, tf, out);
    } else if (sweep_cmd->parsed()) {
      cmd_sweep(data, out_dir, param, values, cv, tf, out);
    } else if (synth_cmd->parsed()) {
      cmd_synth(spec, views, out_dir, out);
    } else if (grad_cmd->parsed()) {
      return cmd_gradcheck(gopts, out, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace intact::cli
