#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "intact/gradcheck.hpp"
#include "intact/gradients.hpp"
#include "test_util.hpp"

namespace intact {
namespace {

// Scalar-loop block objectives, written against the raw formulas. The z and
// omega versions use the true hinge max(0, .); away from the kink it agrees
// with the beta-frozen form.

double naive_recon(const MultiviewDataset& ds, Index i, Index j, const Matrix& W,
                   const Vector& z, double c) {
  double r2 = 0;
  for (Index row = 0; row < W.rows(); ++row) {
    double wz = 0;
    for (Index k = 0; k < W.cols(); ++k) wz += W(row, k) * z[k];
    const double r = ds.views[j](i, row) - wz;
    r2 += r * r;
  }
  return std::log(1.0 + r2 / (c * c));
}

double naive_g(const testing::RandomProblem& p, Index i, const Vector& z) {
  double v = 0, score = 0, sq = 0;
  for (Index j = 0; j < p.ds.m(); ++j) v += naive_recon(p.ds, i, j, p.state.W[j], z, p.hp.c);
  for (Index k = 0; k < z.size(); ++k) {
    score += p.state.omega[k] * z[k];
    sq += z[k] * z[k];
  }
  return v + p.hp.alpha * std::max(0.0, 1.0 - p.ds.labels[i] * score) + p.hp.gamma * sq;
}

double naive_f(const testing::RandomProblem& p, Index j, const Matrix& W) {
  double v = 0, sq = 0;
  for (Index i = 0; i < p.ds.n; ++i)
    v += naive_recon(p.ds, i, j, W, p.state.Z.row(i).transpose(), p.hp.c);
  for (Index r = 0; r < W.rows(); ++r)
    for (Index c = 0; c < W.cols(); ++c) sq += W(r, c) * W(r, c);
  return v + p.hp.gamma * sq;
}

double naive_h(const testing::RandomProblem& p, const Vector& omega) {
  double v = 0, sq = 0;
  for (Index i = 0; i < p.ds.n; ++i) {
    double score = 0;
    for (Index k = 0; k < omega.size(); ++k) score += omega[k] * p.state.Z(i, k);
    v += p.hp.alpha * std::max(0.0, 1.0 - p.ds.labels[i] * score);
  }
  for (Index k = 0; k < omega.size(); ++k) sq += omega[k] * omega[k];
  return v + p.hp.gamma * sq;
}

template <typename F>
Vector central_difference(F f, Vector x, double h = 1e-6) {
  Vector g(x.size());
  for (Index k = 0; k < x.size(); ++k) {
    const double x0 = x[k];
    x[k] = x0 + h;
    const double up = f(x);
    x[k] = x0 - h;
    const double down = f(x);
    x[k] = x0;
    g[k] = (up - down) / (2 * h);
  }
  return g;
}

double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, a.norm());
}

bool near_kink(const testing::RandomProblem& p) {
  for (Index i = 0; i < p.ds.n; ++i) {
    const double gap =
        1.0 - p.ds.labels[i] * p.state.omega.dot(p.state.Z.row(i).transpose());
    if (std::abs(gap) < 1e-4) return true;
  }
  return false;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

testing::RandomProblem scalar_problem() {
  testing::RandomProblem p;
  p.ds.n = 1;
  p.ds.view_dims = {1};
  p.ds.views = {scalar(0.0)};
  p.ds.labels = {1};
  p.state.Z = scalar(1.0);
  p.state.W = {scalar(1.0)};
  p.state.omega = Vector::Constant(1, 0.0);
  p.state.beta = {0};
  p.hp.alpha = 0;
  p.hp.gamma = 0;
  p.hp.c = 1;
  return p;
}

TEST(GradZ, ScalarAnalytic) {
  const auto p = scalar_problem();
  EXPECT_DOUBLE_EQ(grad_z(0, p.ds, p.state, p.hp)[0], 1.0);
}

TEST(GradW, ScalarAnalytic) {
  const auto p = scalar_problem();
  EXPECT_DOUBLE_EQ(grad_W(0, p.ds, p.state, p.hp)(0, 0), 1.0);
}

TEST(GradOmega, SinglePointAnalytic) {
  testing::RandomProblem p;
  p.ds.n = 1;
  p.ds.view_dims = {1};
  p.ds.views = {scalar(0.0)};
  p.ds.labels = {1};
  p.state.Z.resize(1, 2);
  p.state.Z << 1, 2;
  p.state.W = {Matrix::Zero(1, 2)};
  p.state.omega = Vector::Zero(2);
  p.state.beta = {1};
  p.hp.alpha = 1;
  p.hp.gamma = 0;
  const Vector g = grad_omega(p.ds, p.state, p.hp);
  EXPECT_EQ(g[0], -1.0);
  EXPECT_EQ(g[1], -2.0);
}

TEST(Gradients, ZeroAtExactReconstruction) {
  auto p = testing::random_problem(9, 5, 3, {4, 6});
  for (Index j = 0; j < p.ds.m(); ++j)
    for (Index i = 0; i < p.ds.n; ++i)
      p.ds.views[j].row(i) = (p.state.W[j] * p.state.Z.row(i).transpose()).transpose();
  std::fill(p.state.beta.begin(), p.state.beta.end(), 0);
  p.hp.gamma = 0;
  for (Index i = 0; i < p.ds.n; ++i)
    EXPECT_EQ(grad_z(i, p.ds, p.state, p.hp).norm(), 0.0);
  for (Index j = 0; j < p.ds.m(); ++j)
    EXPECT_EQ(grad_W(j, p.ds, p.state, p.hp).norm(), 0.0);
  EXPECT_EQ(grad_omega(p.ds, p.state, p.hp).norm(), 0.0);
}

TEST(Gradients, IndexErrors) {
  const auto p = testing::random_problem(1, 3, 2, {2});
  EXPECT_THROW(grad_z(3, p.ds, p.state, p.hp), InvalidArgument);
  EXPECT_THROW(grad_z(-1, p.ds, p.state, p.hp), InvalidArgument);
  EXPECT_THROW(grad_W(1, p.ds, p.state, p.hp), InvalidArgument);
  auto bad = p;
  bad.state.omega = Vector::Zero(3);
  EXPECT_THROW(grad_omega(bad.ds, bad.state, bad.hp), ShapeError);
}

// Every block against central differences of the scalar-loop objectives,
// over random configurations within the documented size limits.
TEST(Gradients, MatchFiniteDifferencesOfBlockObjectives) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 60; ++seed) {
    std::uniform_int_distribution<Index> n_of(1, 5), m_of(1, 3), d_of(1, 4), dj_of(1, 6);
    const Index n = n_of(rng), m = m_of(rng), d = d_of(rng);
    std::vector<Index> dims;
    for (Index j = 0; j < m; ++j) dims.push_back(dj_of(rng));
    auto p = testing::random_problem(seed, n, d, dims);
    p.hp.gamma = std::uniform_real_distribution<double>(0, 1)(rng);
    p.hp.alpha = std::uniform_real_distribution<double>(0.1, 2)(rng);
    if (near_kink(p)) continue;
    ++checked;

    for (Index i = 0; i < n; ++i) {
      const Vector fd = central_difference(
          [&](const Vector& z) { return naive_g(p, i, z); }, p.state.Z.row(i).transpose());
      EXPECT_LT(rel_err(grad_z(i, p.ds, p.state, p.hp), fd), 1e-5) << "seed " << seed;
    }
    for (Index j = 0; j < m; ++j) {
      const Matrix& W = p.state.W[j];
      const Vector flat = Eigen::Map<const Vector>(W.data(), W.size());
      const Vector fd = central_difference(
          [&](const Vector& v) {
            return naive_f(p, j, Eigen::Map<const Matrix>(v.data(), W.rows(), W.cols()));
          },
          flat);
      const Matrix g = grad_W(j, p.ds, p.state, p.hp);
      EXPECT_LT(rel_err(Eigen::Map<const Vector>(g.data(), g.size()), fd), 1e-5)
          << "seed " << seed;
    }
    const Vector fd = central_difference([&](const Vector& o) { return naive_h(p, o); },
                                         p.state.omega);
    EXPECT_LT(rel_err(grad_omega(p.ds, p.state, p.hp), fd), 1e-5) << "seed " << seed;
  }
}

TEST(Gradients, PrintedSignWouldFailTheOracle) {
  // The gradient with the reconstruction sign flipped is far from the
  // numerical gradient on generic data.
  auto p = testing::random_problem(77, 3, 2, {3});
  p.hp.alpha = 0;
  p.hp.gamma = 0;
  const Vector fd = central_difference([&](const Vector& z) { return naive_g(p, 0, z); },
                                       p.state.Z.row(0).transpose());
  const Vector analytic = grad_z(0, p.ds, p.state, p.hp);
  EXPECT_LT(rel_err(analytic, fd), 1e-5);
  EXPECT_GT(rel_err(-analytic, fd), 1e-2);
}

TEST(Gradients, BlocksAreSeparable) {
  auto p = testing::random_problem(31, 4, 3, {2, 5, 3});
  const Vector gz = grad_z(1, p.ds, p.state, p.hp);
  const Matrix gw = grad_W(2, p.ds, p.state, p.hp);
  auto q = p;
  q.state.Z.row(0).setConstant(5.0);
  q.state.Z.row(3).setConstant(-2.0);
  EXPECT_EQ(grad_z(1, q.ds, q.state, q.hp), gz) << "grad_z must ignore other z_k";

  auto r = p;
  r.state.W[0].setConstant(3.0);
  r.state.W[1].setConstant(3.0);
  EXPECT_EQ(grad_W(2, r.ds, r.state, r.hp), gw) << "grad_W must ignore other W_k";
}

TEST(FiniteDiff, QuadraticIsExactToTolerance) {
  Vector x(2);
  x << 1, 2;
  const Vector g = finite_diff([](const Vector& v) { return v.squaredNorm(); }, x, 1e-6);
  EXPECT_NEAR(g[0], 2.0, 1e-6);
  EXPECT_NEAR(g[1], 4.0, 1e-6);
}

TEST(FiniteDiff, ConstantGivesZero) {
  const Vector g = finite_diff([](const Vector&) { return 3.25; }, Vector::Ones(4), 1e-3);
  EXPECT_EQ(g, Vector::Zero(4));
}

TEST(FiniteDiff, RejectsBadInput) {
  EXPECT_THROW(finite_diff([](const Vector&) { return 1.0; }, Vector::Ones(1), 0.0),
               InvalidArgument);
  EXPECT_THROW(finite_diff([](const Vector& v) { return std::log(v[0]); },
                           Vector::Constant(1, 0.0), 1e-3),
               NumericError);
}

TEST(FiniteDiff, SelfConsistencyOnJointObjective) {
  // Joint objective restricted to z_1 against grad_z, through the library's
  // own finite_diff.
  auto p = testing::random_problem(5, 3, 3, {4, 2});
  ASSERT_FALSE(near_kink(p));
  auto f = [&](const Vector& z) {
    ModelState s = p.state;
    s.Z.row(0) = z.transpose();
    return objective(p.ds, s, p.hp).total;
  };
  const Vector fd = finite_diff(f, p.state.Z.row(0).transpose(), 1e-6);
  EXPECT_LT(rel_err(grad_z(0, p.ds, p.state, p.hp), fd), 1e-5);
}

TEST(Gradcheck, DefaultSuitePasses) {
  const auto rep = run_gradcheck({});
  EXPECT_TRUE(rep.passed(1e-5)) << rep.z.max_rel_err << " " << rep.W.max_rel_err << " "
                                << rep.omega.max_rel_err;
  EXPECT_GE(rep.z.checks, 20);
  EXPECT_GE(rep.W.checks, 20);
  EXPECT_EQ(rep.omega.checks, 20);
}

TEST(Gradcheck, InstancesRespectLimitsAndKinkExclusion) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto inst = random_instance(s);
    EXPECT_LE(inst.dataset.n, 5);
    EXPECT_LE(inst.dataset.m(), 3);
    EXPECT_LE(inst.state.d(), 4);
    for (Index dj : inst.dataset.view_dims) EXPECT_LE(dj, 6);
    EXPECT_TRUE(validate(inst.dataset, {.binary_labels = true}).empty());
    for (Index i = 0; i < inst.dataset.n; ++i) {
      const double gap = 1.0 - margin(inst.dataset.labels[i], inst.state.omega,
                                      inst.state.Z.row(i).transpose());
      EXPECT_GE(std::abs(gap), kBoundaryExclusion);
    }
  }
}

}  // namespace
}  // namespace intact
