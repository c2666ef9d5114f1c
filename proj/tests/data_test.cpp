#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "intact/data.hpp"
#include "intact/losses.hpp"
#include "test_util.hpp"

namespace intact {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

void write(const fs::path& p, const std::string& s) { text::write_file(p, s); }

void write_two_view_fixture(const fs::path& dir) {
  write(dir / "manifest",
        "# two-view fixture\n"
        "n = 3\nm = 2\nview_dims = 2,4\n"
        "views = a.csv, b.csv\nlabels = y.csv\n");
  write(dir / "a.csv", "1,2\n3,4\n5,6\n");
  write(dir / "b.csv", "0.5,1e-3,-2,7\n0,0,0,0\n1,1,1,1\n");
  write(dir / "y.csv", "1\n-1\n1\n");
}

TEST(LoadDataset, WellFormedFixture) {
  TempDir dir("load");
  write_two_view_fixture(dir.path());
  const auto ds = load_dataset(dir / "manifest");
  EXPECT_EQ(ds.n, 3);
  EXPECT_EQ(ds.view_dims, (std::vector<Index>{2, 4}));
  EXPECT_EQ(ds.views[1](0, 1), 1e-3);
  EXPECT_EQ(ds.labels, (std::vector<int>{1, -1, 1}));
  EXPECT_EQ(load_dataset(dir.path()).views[0], ds.views[0]);
}

TEST(LoadDataset, ColumnMismatchNamesView) {
  TempDir dir("cols");
  write_two_view_fixture(dir.path());
  write(dir / "manifest", "n = 3\nm = 2\nview_dims = 2,4\nviews = b.csv,b.csv\n");
  try {
    load_dataset(dir / "manifest");
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("view 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("4 columns, expected 2"), std::string::npos) << msg;
  }
}

TEST(LoadDataset, ShortLabelsFile) {
  TempDir dir("labels");
  write_two_view_fixture(dir.path());
  write(dir / "y.csv", "1\n-1\n");
  EXPECT_THROW(load_dataset(dir / "manifest"), ShapeError);
}

TEST(LoadDataset, BadCellAndMissingFileHaveContext) {
  TempDir dir("bad");
  write_two_view_fixture(dir.path());
  write(dir / "a.csv", "1,2\n3,x4\n5,6\n");
  try {
    load_dataset(dir / "manifest");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("a.csv:2"), std::string::npos) << e.what();
  }
  fs::remove(dir / "a.csv");
  EXPECT_THROW(load_dataset(dir / "manifest"), IoError);
  EXPECT_THROW(load_dataset(dir / "nope"), IoError);
}

TEST(LoadDataset, LabelsOptional) {
  TempDir dir("unlabeled");
  write_two_view_fixture(dir.path());
  write(dir / "manifest", "n = 3\nm = 2\nview_dims = 2,4\nviews = a.csv,b.csv\n");
  EXPECT_FALSE(load_dataset(dir / "manifest").labeled());
}

TEST(Dataset, SaveLoadRoundTripIsExact) {
  TempDir dir("ds_roundtrip");
  SyntheticSpec spec;
  spec.n = 25;
  spec.n_classes = 4;
  const auto ds = generate_synthetic(spec).dataset;
  save_dataset(ds, dir.path());
  const auto back = load_dataset(dir.path());
  EXPECT_EQ(back.view_dims, ds.view_dims);
  EXPECT_EQ(back.labels, ds.labels);
  for (Index j = 0; j < ds.m(); ++j) EXPECT_EQ(back.views[j], ds.views[j]);
}

ModelBundle random_bundle(std::uint64_t seed, Index m) {
  std::mt19937_64 rng(seed);
  ModelBundle b;
  for (Index j = 0; j < m; ++j) b.W.push_back(testing::gaussian_matrix(rng, 2 + j, 3, 1e-3));
  b.omega = testing::gaussian_matrix(rng, 3, 1, 1e5).col(0);
  b.hyperparams.alpha = 0.1 + 1e-17;
  b.hyperparams.gamma = 1.0 / 3.0;
  b.hyperparams.c = 2.5;
  b.hyperparams.d = 3;
  b.hyperparams.T = 17;
  b.hyperparams.t_inf = 33;
  b.hyperparams.seed = 18446744073709551557ULL;
  b.hyperparams.init_scale = 0.02;
  b.class_tag = -4;
  return b;
}

TEST(Bundle, RoundTripIsExact) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    TempDir dir("bundle");
    const auto b = random_bundle(s, 1 + s % 3);
    save_bundle(b, dir.path());
    const auto back = load_bundle(dir.path());
    ASSERT_EQ(back.W.size(), b.W.size());
    for (std::size_t j = 0; j < b.W.size(); ++j) EXPECT_EQ(back.W[j], b.W[j]);
    EXPECT_EQ(back.omega, b.omega);
    EXPECT_EQ(back.class_tag, b.class_tag);
    const auto& h = back.hyperparams;
    EXPECT_EQ(h.alpha, b.hyperparams.alpha);
    EXPECT_EQ(h.gamma, b.hyperparams.gamma);
    EXPECT_EQ(h.c, b.hyperparams.c);
    EXPECT_EQ(h.d, b.hyperparams.d);
    EXPECT_EQ(h.T, b.hyperparams.T);
    EXPECT_EQ(h.t_inf, b.hyperparams.t_inf);
    EXPECT_EQ(h.seed, b.hyperparams.seed);
    EXPECT_EQ(h.init_scale, b.hyperparams.init_scale);
  }
}

TEST(Bundle, ThreeViewsGiveThreeWeightFiles) {
  TempDir dir("files");
  save_bundle(random_bundle(1, 3), dir.path());
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir.path()))
    names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"W_1.csv", "W_2.csv", "W_3.csv", "manifest",
                                             "omega.csv"}));
}

TEST(Bundle, TamperedOrIncompleteIsRejected) {
  TempDir dir("tamper");
  save_bundle(random_bundle(2, 2), dir.path());
  auto manifest = text::read_file(dir / "manifest");
  const auto pos = manifest.find("d = 3");
  ASSERT_NE(pos, std::string::npos);
  write(dir / "manifest", manifest.substr(0, pos) + "d = 4" + manifest.substr(pos + 5));
  EXPECT_THROW(load_bundle(dir.path()), ShapeError);

  write(dir / "manifest", manifest);
  EXPECT_NO_THROW(load_bundle(dir.path()));
  fs::remove(dir / "W_2.csv");
  EXPECT_THROW(load_bundle(dir.path()), IoError);
  fs::remove(dir / "manifest");
  EXPECT_THROW(load_bundle(dir.path()), IoError);
}

TEST(Bundle, DirectoryOfClassBundles) {
  TempDir dir("classes");
  auto a = random_bundle(1, 2), b = random_bundle(2, 2);
  a.class_tag = 7;
  b.class_tag = -2;
  save_bundles({a, b}, dir.path());
  const auto back = load_bundles(dir.path());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].class_tag, -2);
  EXPECT_EQ(back[1].class_tag, 7);
  EXPECT_THROW(load_bundles(dir / "missing"), IoError);
}

TEST(Synthetic, ZeroNoiseIsExactAndReconstructsPerfectly) {
  SyntheticSpec spec;
  spec.noise_sigma = 0;
  spec.margin = 1.0;
  const auto syn = generate_synthetic(spec);
  ModelState s;
  s.Z = syn.truth.Z;
  s.W = syn.truth.W;
  s.omega = syn.truth.omega;
  s.beta.assign(static_cast<std::size_t>(spec.n), 0);
  for (Index j = 0; j < spec.m(); ++j)
    for (Index i = 0; i < spec.n; ++i) {
      const Vector wz = syn.truth.W[j] * syn.truth.Z.row(i).transpose();
      EXPECT_EQ(syn.dataset.point(j, i), wz);
      EXPECT_EQ(cauchy_error(syn.dataset.point(j, i), s.W[j], s.Z.row(i).transpose(), 1.0), 0.0);
    }
  Hyperparams hp;
  const auto t = objective(syn.dataset, s, hp);
  EXPECT_EQ(t.reconstruction, 0.0);
  EXPECT_EQ(t.classification, 0.0);
}

TEST(Synthetic, BinaryLabelsFollowMargin) {
  SyntheticSpec spec;
  spec.margin = 0.8;
  const auto syn = generate_synthetic(spec);
  EXPECT_NEAR(syn.truth.omega.norm(), 1.0, 1e-12);
  for (Index i = 0; i < spec.n; ++i) {
    const double score = syn.truth.omega.dot(syn.truth.Z.row(i).transpose());
    EXPECT_GE(std::abs(score), spec.margin);
    EXPECT_EQ(syn.dataset.labels[i], score > 0 ? 1 : -1);
  }
  for (const auto& w : syn.truth.W)
    for (Index c = 0; c < w.cols(); ++c) EXPECT_NEAR(w.col(c).norm(), 1.0, 1e-12);
}

TEST(Synthetic, MulticlassLabelsAreNearestPrototype) {
  SyntheticSpec spec;
  spec.n = 100;
  spec.n_classes = 3;
  const auto syn = generate_synthetic(spec);
  EXPECT_EQ(distinct_labels(syn.dataset.labels), (std::vector<int>{0, 1, 2}));
  for (Index i = 0; i < spec.n; ++i) {
    Index best = 0;
    (syn.truth.prototypes.rowwise() - syn.truth.Z.row(i)).rowwise().squaredNorm().minCoeff(&best);
    EXPECT_EQ(syn.dataset.labels[i], best);
  }
}

TEST(Synthetic, DeterministicBytesOnDisk) {
  TempDir a("syn_a"), b("syn_b");
  const auto s1 = generate_synthetic({});
  const auto s2 = generate_synthetic({});
  save_dataset(s1.dataset, a.path());
  save_dataset(s2.dataset, b.path());
  for (const char* f : {"manifest", "view_1.csv", "view_2.csv", "view_3.csv", "labels.csv"})
    EXPECT_EQ(text::read_file(a / f), text::read_file(b / f)) << f;
}

// Checksum of the default benchmark dataset (n=200, m=3, d=5, 8/8/8,
// sigma 0.01, margin 0.5, seed 7), recorded on first generation.
TEST(Synthetic, GoldenBenchmarkChecksum) {
  const auto syn = generate_synthetic({});
  EXPECT_EQ(dataset_checksum(syn.dataset), 0x9f00b8ec71c06a08ULL);
}

TEST(Synthetic, Errors) {
  SyntheticSpec spec;
  spec.margin = 50;  // unreachable with unit-variance scores
  spec.n = 1;
  EXPECT_THROW(generate_synthetic(spec), InvalidArgument);
  spec = {};
  spec.noise_sigma = -1;
  EXPECT_THROW(generate_synthetic(spec), InvalidArgument);
  spec = {};
  spec.view_dims = {4, 0};
  EXPECT_THROW(generate_synthetic(spec), InvalidArgument);
}

}  // namespace
}  // namespace intact
