#pragma once

// Dataset and model persistence, and the synthetic generator.
//
// Dataset manifest (key = value lines, '#' comments):
//   n         = 200
//   m         = 3
//   view_dims = 8,8,8
//   views     = view_1.csv,view_2.csv,view_3.csv   (relative to the manifest)
//   labels    = labels.csv                         (optional)
// View CSVs hold n rows of d_j comma-separated numbers, no header. The labels
// CSV holds n integers, one per row.
//
// Bundle directory: `manifest` (m, view_dims, d, hyperparameters, class_tag),
// W_1.csv .. W_m.csv (d_j x d) and omega.csv (d x 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "intact/model.hpp"
#include "intact/text.hpp"

namespace intact {

namespace fs = std::filesystem;

namespace detail {

inline std::string join_dims(const std::vector<Index>& dims) {
  std::string s;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    if (j) s += ',';
    s += std::to_string(dims[j]);
  }
  return s;
}

inline std::vector<Index> parse_dims(const std::string& s,
                                     const std::string& where) {
  std::vector<Index> dims;
  for (auto cell : text::split(s, ',')) dims.push_back(text::parse<Index>(cell, where));
  return dims;
}

inline fs::path manifest_path(const fs::path& p) {
  return fs::is_directory(p) ? p / "manifest" : p;
}

}  // namespace detail

/// Loads a dataset from its manifest (or a directory holding `manifest`) and
/// validates it. Labels are optional.
inline MultiviewDataset load_dataset(const fs::path& manifest) {
  const fs::path path = detail::manifest_path(manifest);
  if (!fs::exists(path)) throw IoError(path.string() + ": no such file");
  const auto kv = text::read_keyvalue(path);
  const fs::path base = path.parent_path();
  const std::string where = path.string();

  MultiviewDataset ds;
  ds.n = text::parse<Index>(text::require_key(kv, "n", path), where + ": n");
  const auto m = text::parse<Index>(text::require_key(kv, "m", path), where + ": m");
  ds.view_dims = detail::parse_dims(text::require_key(kv, "view_dims", path),
                                    where + ": view_dims");
  if (static_cast<Index>(ds.view_dims.size()) != m)
    throw IoError(where + ": view_dims lists " +
                  std::to_string(ds.view_dims.size()) + " entries but m = " +
                  std::to_string(m));
  const auto files = text::split(text::require_key(kv, "views", path), ',');
  if (static_cast<Index>(files.size()) != m)
    throw IoError(where + ": views lists " + std::to_string(files.size()) +
                  " files but m = " + std::to_string(m));

  for (Index j = 0; j < m; ++j) {
    const fs::path f = base / std::string(files[static_cast<std::size_t>(j)]);
    if (!fs::exists(f))
      throw IoError("view " + std::to_string(j + 1) + ": missing file " +
                    f.string());
    ds.views.push_back(text::read_matrix_csv(f, ds.n, ds.view_dims[j],
                                             "view " + std::to_string(j + 1)));
  }

  if (auto it = kv.find("labels"); it != kv.end()) {
    const fs::path f = base / it->second;
    if (!fs::exists(f)) throw IoError("labels: missing file " + f.string());
    const std::string content = text::read_file(f);
    const auto rows = text::lines(content);
    if (static_cast<Index>(rows.size()) != ds.n)
      throw ShapeError("labels (" + f.string() + "): has " +
                       std::to_string(rows.size()) + " rows, expected " +
                       std::to_string(ds.n));
    for (auto [no, line] : rows)
      ds.labels.push_back(
          text::parse<int>(line, f.string() + ":" + std::to_string(no)));
  }

  require_valid(ds, {.allow_unlabeled = true});
  return ds;
}

/// Writes manifest, view_<j>.csv and (if labeled) labels.csv into dir.
inline void save_dataset(const MultiviewDataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  std::string views;
  for (Index j = 0; j < ds.m(); ++j) {
    const std::string name = "view_" + std::to_string(j + 1) + ".csv";
    if (j) views += ',';
    views += name;
    text::write_file(dir / name, text::matrix_csv(ds.views[j]));
  }
  std::string manifest = "n = " + std::to_string(ds.n) + "\n" +
                         "m = " + std::to_string(ds.m()) + "\n" +
                         "view_dims = " + detail::join_dims(ds.view_dims) +
                         "\n" + "views = " + views + "\n";
  if (ds.labeled()) {
    std::string labels;
    for (int y : ds.labels) labels += std::to_string(y) + "\n";
    text::write_file(dir / "labels.csv", labels);
    manifest += "labels = labels.csv\n";
  }
  text::write_file(dir / "manifest", manifest);
}

inline void save_bundle(const ModelBundle& b, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& hp = b.hyperparams;
  std::string manifest;
  manifest += "m = " + std::to_string(b.m()) + "\n";
  manifest += "view_dims = " + detail::join_dims(b.view_dims()) + "\n";
  manifest += "d = " + std::to_string(b.d()) + "\n";
  manifest += "alpha = " + text::format(hp.alpha) + "\n";
  manifest += "gamma = " + text::format(hp.gamma) + "\n";
  manifest += "c = " + text::format(hp.c) + "\n";
  manifest += "T = " + std::to_string(hp.T) + "\n";
  manifest += "t_inf = " + std::to_string(hp.t_inf) + "\n";
  manifest += "seed = " + std::to_string(hp.seed) + "\n";
  manifest += "init_scale = " + text::format(hp.init_scale) + "\n";
  manifest += "class_tag = " + std::to_string(b.class_tag) + "\n";
  for (Index j = 0; j < b.m(); ++j)
    text::write_file(dir / ("W_" + std::to_string(j + 1) + ".csv"),
                     text::matrix_csv(b.W[j]));
  text::write_file(dir / "omega.csv", text::matrix_csv(b.omega));
  text::write_file(dir / "manifest", manifest);
}

inline ModelBundle load_bundle(const fs::path& dir) {
  const fs::path path = dir / "manifest";
  if (!fs::exists(path))
    throw IoError(dir.string() + ": not a model bundle (no manifest)");
  const auto kv = text::read_keyvalue(path);
  const std::string where = path.string();
  auto get = [&](const char* key) { return text::require_key(kv, key, path); };

  ModelBundle b;
  auto& hp = b.hyperparams;
  const auto m = text::parse<Index>(get("m"), where + ": m");
  const auto dims = detail::parse_dims(get("view_dims"), where + ": view_dims");
  const auto d = text::parse<Index>(get("d"), where + ": d");
  if (m < 1 || static_cast<Index>(dims.size()) != m)
    throw IoError(where + ": view_dims lists " + std::to_string(dims.size()) +
                  " entries but m = " + std::to_string(m));
  if (d < 1) throw IoError(where + ": d must be positive");
  hp.alpha = text::parse<double>(get("alpha"), where + ": alpha");
  hp.gamma = text::parse<double>(get("gamma"), where + ": gamma");
  hp.c = text::parse<double>(get("c"), where + ": c");
  hp.T = text::parse<int>(get("T"), where + ": T");
  hp.t_inf = text::parse<int>(get("t_inf"), where + ": t_inf");
  hp.seed = text::parse<std::uint64_t>(get("seed"), where + ": seed");
  hp.init_scale = text::parse<double>(get("init_scale"), where + ": init_scale");
  hp.d = d;
  b.class_tag = text::parse<int>(get("class_tag"), where + ": class_tag");

  for (Index j = 0; j < m; ++j) {
    const fs::path f = dir / ("W_" + std::to_string(j + 1) + ".csv");
    if (!fs::exists(f)) throw IoError(dir.string() + ": missing " + f.filename().string());
    b.W.push_back(text::read_matrix_csv(f, dims[static_cast<std::size_t>(j)], d,
                                        "W_" + std::to_string(j + 1)));
  }
  const fs::path f = dir / "omega.csv";
  if (!fs::exists(f)) throw IoError(dir.string() + ": missing omega.csv");
  b.omega = text::read_matrix_csv(f, d, 1, "omega").col(0);

  for (const auto& w : b.W)
    if (!w.allFinite()) throw IoError(where + ": non-finite entry in W");
  if (!b.omega.allFinite()) throw IoError(where + ": non-finite entry in omega");
  require_valid(hp);
  return b;
}

/// One bundle per class under dir/class_<tag>.
inline void save_bundles(const std::vector<ModelBundle>& bundles,
                         const fs::path& dir) {
  for (const auto& b : bundles)
    save_bundle(b, dir / ("class_" + std::to_string(b.class_tag)));
}

/// Either a single bundle directory or a directory of class_<tag> bundles,
/// returned sorted by class tag.
inline std::vector<ModelBundle> load_bundles(const fs::path& dir) {
  if (fs::exists(dir / "manifest")) return {load_bundle(dir)};
  if (!fs::is_directory(dir))
    throw IoError(dir.string() + ": model directory not found");
  std::vector<ModelBundle> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() &&
        entry.path().filename().string().rfind("class_", 0) == 0)
      out.push_back(load_bundle(entry.path()));
  }
  if (out.empty())
    throw IoError(dir.string() + ": contains no model bundles");
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.class_tag < b.class_tag; });
  return out;
}

struct SyntheticSpec {
  Index n = 200;
  Index d = 5;
  std::vector<Index> view_dims{8, 8, 8};
  int n_classes = 2;
  double noise_sigma = 0.01;
  double margin = 0.5;
  std::uint64_t seed = 7;

  Index m() const { return static_cast<Index>(view_dims.size()); }
};

struct GroundTruth {
  Matrix Z;
  std::vector<Matrix> W;
  /// Unit-norm classifier (binary mode); empty otherwise.
  Vector omega;
  /// n_classes x d prototypes (multiclass mode); empty otherwise.
  Matrix prototypes;
};

struct SyntheticData {
  MultiviewDataset dataset;
  GroundTruth truth;
};

/// Multiclass mode: prototype spread and per-point jitter.
inline constexpr double kPrototypeScale = 2.0;
inline constexpr double kPrototypeJitter = 1.0;
/// Rejection sampling gives up after this many draws for one point.
inline constexpr long kMaxRejectionDraws = 1'000'000;

/// Draws from a linear multiview model: x_i^j = W*_j z*_i + noise.
///
/// Binary mode (n_classes == 2): z*_i ~ N(0, I) rejected until
/// |<omega*, z*_i>| >= margin, label = sign(<omega*, z*_i>).
/// Multiclass mode: z*_i = a random prototype + N(0, I) jitter, label = index
/// of the nearest prototype (0-based).
/// W*_j has Gaussian entries with columns rescaled to unit norm.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.d < 1 || spec.view_dims.empty())
    throw InvalidArgument("synthetic spec: n, d and the view count must be positive");
  for (Index dj : spec.view_dims)
    if (dj < 1) throw InvalidArgument("synthetic spec: view dimensions must be positive");
  if (spec.n_classes < 2)
    throw InvalidArgument("synthetic spec: need at least 2 classes");
  if (!(spec.noise_sigma >= 0))
    throw InvalidArgument("synthetic spec: noise_sigma must be >= 0");
  if (spec.n_classes == 2 && !(spec.margin > 0))
    throw InvalidArgument("synthetic spec: margin must be positive");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
    return m;
  };

  SyntheticData out;
  GroundTruth& gt = out.truth;
  MultiviewDataset& ds = out.dataset;

  for (Index dj : spec.view_dims) {
    Matrix w = gaussian(dj, spec.d);
    for (Index c = 0; c < w.cols(); ++c) w.col(c).normalize();
    gt.W.push_back(std::move(w));
  }

  gt.Z.resize(spec.n, spec.d);
  ds.labels.resize(static_cast<std::size_t>(spec.n));
  if (spec.n_classes == 2) {
    gt.omega = gaussian(spec.d, 1).col(0).normalized();
    for (Index i = 0; i < spec.n; ++i) {
      long draws = 0;
      Vector z;
      double score = 0.0;
      do {
        if (++draws > kMaxRejectionDraws)
          throw InvalidArgument("synthetic: rejection sampling exceeded " +
                                std::to_string(kMaxRejectionDraws) +
                                " draws for point " + std::to_string(i) +
                                "; margin too large");
        z = gaussian(spec.d, 1).col(0);
        score = gt.omega.dot(z);
      } while (std::abs(score) < spec.margin);
      gt.Z.row(i) = z.transpose();
      ds.labels[static_cast<std::size_t>(i)] = score > 0 ? 1 : -1;
    }
  } else {
    gt.prototypes = kPrototypeScale * gaussian(spec.n_classes, spec.d);
    std::uniform_int_distribution<int> pick(0, spec.n_classes - 1);
    for (Index i = 0; i < spec.n; ++i) {
      const int k = pick(rng);
      const Vector z = gt.prototypes.row(k).transpose() +
                       kPrototypeJitter * gaussian(spec.d, 1).col(0);
      gt.Z.row(i) = z.transpose();
      Index nearest = 0;
      (gt.prototypes.rowwise() - z.transpose()).rowwise().squaredNorm().minCoeff(&nearest);
      ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(nearest);
    }
  }

  ds.n = spec.n;
  ds.view_dims = spec.view_dims;
  for (Index j = 0; j < spec.m(); ++j) {
    // Per-row products match the evaluation path of cauchy_error, so the
    // noise-free residual is exactly zero.
    Matrix x(spec.n, spec.view_dims[static_cast<std::size_t>(j)]);
    for (Index i = 0; i < spec.n; ++i)
      x.row(i) = (gt.W[j] * gt.Z.row(i).transpose()).transpose();
    if (spec.noise_sigma > 0) x += spec.noise_sigma * gaussian(x.rows(), x.cols());
    ds.views.push_back(std::move(x));
  }
  return out;
}

/// Writes Z.csv, W_<j>.csv and omega.csv or prototypes.csv into dir.
inline void save_ground_truth(const GroundTruth& gt, const fs::path& dir) {
  fs::create_directories(dir);
  text::write_file(dir / "Z.csv", text::matrix_csv(gt.Z));
  for (std::size_t j = 0; j < gt.W.size(); ++j)
    text::write_file(dir / ("W_" + std::to_string(j + 1) + ".csv"),
                     text::matrix_csv(gt.W[j]));
  if (gt.omega.size() > 0)
    text::write_file(dir / "omega.csv", text::matrix_csv(gt.omega));
  if (gt.prototypes.size() > 0)
    text::write_file(dir / "prototypes.csv", text::matrix_csv(gt.prototypes));
}

/// FNV-1a over the serialized views and labels; stable across runs.
inline std::uint64_t dataset_checksum(const MultiviewDataset& ds) {
  std::string bytes;
  for (const auto& v : ds.views) bytes += text::matrix_csv(v) + "|";
  for (int y : ds.labels) bytes += std::to_string(y) + "\n";
  return text::fnv1a(bytes);
}

}  // namespace intact
