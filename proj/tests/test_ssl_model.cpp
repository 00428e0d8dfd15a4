#include <random>

#include <gtest/gtest.h>

#include "hplap/hplap.hpp"
#include "oracles.hpp"

using namespace hplap;

namespace {

struct Instance {
  Eigen::MatrixXd x;
  Eigen::MatrixXd k;
  Eigen::MatrixXd l;
  std::vector<Eigen::Index> labeled;
  std::vector<double> y;
};

Instance random_instance(std::mt19937_64& rng, int n, int l) {
  Instance in;
  in.x = Eigen::MatrixXd::Random(n, 3);
  in.k = gram_matrix(in.x, KernelSpec::rbf(1.0));
  in.l = oracle::degree_minus_weights(oracle::random_weights(rng, n));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  in.labeled.assign(idx.begin(), idx.begin() + l);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < l; ++i) in.y.push_back(coin(rng) ? 1.0 : -1.0);
  return in;
}

/// 1-D cluster at -5 and at +5, three points each, chained within clusters.
struct Clusters {
  Eigen::MatrixXd x;
  Eigen::MatrixXd l;
};

Clusters two_clusters() {
  Clusters c;
  c.x.resize(6, 1);
  c.x << -5.2, -5.0, -4.8, 4.8, 5.0, 5.2;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) w(i, j) = w(3 + i, 3 + j) = 1.0;
  c.l = oracle::degree_minus_weights(w);
  return c;
}

}  // namespace

TEST(Kernel, Examples) {
  Eigen::RowVector2d a(1, 0), b(0, 1);
  const auto rbf = KernelSpec::rbf(1.0);
  EXPECT_EQ(rbf(a, a), 1.0);
  EXPECT_EQ(KernelSpec::linear()(a, b), 0.0);
  Eigen::RowVector2d c(0, 0), d(1, 0);
  EXPECT_NEAR(rbf(c, d), 0.36788, 1e-5);
  EXPECT_DOUBLE_EQ(rbf(c, d), std::exp(-1.0));
}

TEST(Kernel, GramAndCrossGramAgree) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(7, 2);
  const auto spec = KernelSpec::rbf_auto(x);
  const auto g = gram_matrix(x, spec);
  EXPECT_EQ(g, g.transpose());
  EXPECT_LT((cross_gram(x, x, spec) - g).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Objective, ZeroAlphaIsLogTwo) {
  std::mt19937_64 rng(1);
  auto in = random_instance(rng, 6, 3);
  const SSLProblem prob(make_regularized_kernel(in.k, in.l), in.labeled, in.y, 0.3, 0.7);
  EXPECT_DOUBLE_EQ(objective(Eigen::VectorXd::Zero(6), prob), std::log(2.0));
}

TEST(Objective, MatchesTermByTermOracle) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    auto in = random_instance(rng, 6, 3);
    const SSLProblem prob(make_regularized_kernel(in.k, in.l), in.labeled, in.y, 0.01 * t, 0.5 * t);
    const Eigen::VectorXd a = Eigen::VectorXd::Random(6);
    const double ref = oracle::ssl_objective(a, in.k, in.l, in.labeled, in.y, 0.01 * t, 0.5 * t);
    EXPECT_NEAR(objective(a, prob), ref, 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Objective, NoRegularizationIsPlainLogisticLoss) {
  std::mt19937_64 rng(3);
  auto in = random_instance(rng, 8, 4);
  const SSLProblem prob(make_regularized_kernel(in.k, in.l), in.labeled, in.y, 0.0, 0.0);
  const Eigen::VectorXd a = Eigen::VectorXd::Random(8);
  double loss = 0.0;
  for (std::size_t i = 0; i < in.labeled.size(); ++i)
    loss += std::log1p(std::exp(-in.y[i] * (in.k * a)(in.labeled[i])));
  EXPECT_NEAR(objective(a, prob), loss / 4.0, 1e-12);
}

TEST(Gradient, SingleLabeledPointAtZero) {
  std::mt19937_64 rng(4);
  auto in = random_instance(rng, 5, 1);
  in.y = {1.0};
  const SSLProblem prob(make_regularized_kernel(in.k, in.l), in.labeled, in.y, 0.2, 0.4);
  const Eigen::VectorXd expect = -0.5 * in.k.col(in.labeled[0]);
  EXPECT_LT((gradient(Eigen::VectorXd::Zero(5), prob) - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    auto in = random_instance(rng, 4 + t % 16, 1 + t % 4);
    const double ga = 1e-3 * (t % 5), gi = 0.1 * (t % 7);
    const SSLProblem prob(make_regularized_kernel(in.k, in.l), in.labeled, in.y, ga, gi);
    const Eigen::VectorXd a = Eigen::VectorXd::Random(in.k.rows());
    const auto fd = oracle::central_difference(
        [&](const Eigen::MatrixXd& v) {
          return oracle::ssl_objective(v.col(0), in.k, in.l, in.labeled, in.y, ga, gi);
        },
        a, 1e-5);
    EXPECT_LT(oracle::rel_max_diff(gradient(a, prob), fd.col(0)), 1e-6);
  }
}

TEST(Train, SeparatesTwoPoints) {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, -1.0;
  const auto k = gram_matrix(x, KernelSpec::linear());
  const SSLProblem prob(make_regularized_kernel(k, Eigen::MatrixXd::Zero(2, 2)), {0, 1}, {1.0, -1.0}, 1e-3, 0.0);
  const auto sol = train(prob);
  const Eigen::VectorXd f = k * sol.alpha;
  EXPECT_GT(f(0), 0.0);
  EXPECT_LT(f(1), 0.0);
  EXPECT_TRUE(sol.report.converged);
}

TEST(Train, StrongManifoldTermPropagatesClusterLabels) {
  const auto c = two_clusters();
  const auto k = gram_matrix(c.x, KernelSpec::rbf(20.0));
  const SSLProblem prob(make_regularized_kernel(k, c.l), {0, 5}, {1.0, -1.0}, 1e-6, 1e3);
  const auto sol = train(prob);
  const Eigen::VectorXd f = k * sol.alpha;
  for (int i = 0; i < 3; ++i) EXPECT_GT(f(i), 0.0) << i;
  for (int i = 3; i < 6; ++i) EXPECT_LT(f(i), 0.0) << i;

  // independent plain gradient descent on the oracle objective reaches the same signs
  Eigen::VectorXd a = Eigen::VectorXd::Zero(6);
  for (int it = 0; it < 20000; ++it) {
    const auto g = oracle::central_difference(
        [&](const Eigen::MatrixXd& v) { return oracle::ssl_objective(v.col(0), k, c.l, {0, 5}, {1.0, -1.0}, 1e-6, 1e3); },
        a, 1e-6);
    a -= 0.05 * g.col(0);
  }
  const Eigen::VectorXd fo = k * a;
  for (int i = 0; i < 6; ++i) EXPECT_EQ(fo(i) > 0, f(i) > 0) << i;
  EXPECT_LE(objective(sol.alpha, prob),
            oracle::ssl_objective(a, k, c.l, {0, 5}, {1.0, -1.0}, 1e-6, 1e3) + 1e-6);
}

TEST(Train, ObjectiveNonincreasingAndStopRuleHonored) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    auto in = random_instance(rng, 15, 5);
    const SSLProblem prob(make_regularized_kernel(in.k, in.l), in.labeled, in.y, 1e-3, 1.0);
    TrainOptions opts;
    const auto sol = train(prob, opts);
    const auto& h = sol.report.objective_history;
    EXPECT_DOUBLE_EQ(h.front(), std::log(2.0));
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1]);
    EXPECT_LE(sol.report.final_objective, sol.report.initial_objective);
    ASSERT_TRUE(sol.report.converged);
    ASSERT_GE(h.size(), 2u);
    EXPECT_LE(std::abs(h[h.size() - 1] - h[h.size() - 2]), opts.epsilon);
    for (std::size_t i = 1; i + 1 < h.size(); ++i) EXPECT_GT(std::abs(h[i] - h[i - 1]), opts.epsilon);
  }
}

TEST(Train, MaxItersCapsRun) {
  std::mt19937_64 rng(7);
  auto in = random_instance(rng, 15, 5);
  const SSLProblem prob(make_regularized_kernel(in.k, in.l), in.labeled, in.y, 1e-6, 1.0);
  TrainOptions opts;
  opts.max_iters = 2;
  const auto sol = train(prob, opts);
  EXPECT_LE(sol.report.iterations, 2);
}

TEST(Predict, Examples) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 2);
  TrainedModel m{Eigen::VectorXd::Zero(5), KernelSpec::rbf(1.0), x, {}, {}};
  EXPECT_EQ(predict(m, Eigen::VectorXd(Eigen::Vector2d(0.3, 0.1))), 0.0);
  m.alpha = Eigen::VectorXd::Unit(5, 0);
  const Eigen::Vector2d q(0.4, -0.2);
  EXPECT_DOUBLE_EQ(predict(m, Eigen::VectorXd(q)), m.kernel(x.row(0), q.transpose()));
  m.alpha = Eigen::VectorXd::Random(5);
  const Eigen::VectorXd on_train = gram_matrix(x, m.kernel) * m.alpha;
  for (Eigen::Index i = 0; i < 5; ++i)
    EXPECT_NEAR(predict(m, Eigen::VectorXd(x.row(i).transpose())), on_train(i), 1e-12);
  EXPECT_THROW(predict(m, Eigen::VectorXd(Eigen::Vector3d(1, 2, 3))), Error);
}

TEST(OneVsRest, TwoClassScoresAreNegatives) {
  // mirror-symmetric data: class 0 at x<0, class 1 at x>0
  Eigen::MatrixXd x(8, 1);
  x << -4, -3, -2, -1, 1, 2, 3, 4;
  std::vector<std::optional<int>> labels{0, 0, 0, 0, 1, 1, 1, 1};
  const auto spec = KernelSpec::rbf(3.0);
  const auto m = make_regularized_kernel(gram_matrix(x, spec), Eigen::MatrixXd::Zero(8, 8));
  Hyperparams hp{"supervised", 1e-4, 0.0, 2.0, 0, 0};
  TrainOptions opts;
  opts.epsilon = 1e-14;
  const auto model = train_one_vs_rest(x, labels, {0, 1, 6, 7}, m, spec, hp, {0, 1}, opts);
  ASSERT_EQ(model.models.size(), 2u);
  const auto s = model.training_scores(m->gram);
  EXPECT_LT((s.col(0) + s.col(1)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(OneVsRest, BalancedBlobsAccurate) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticSpec s;
    s.classes = 3;
    s.groups = 1;
    s.points_per_class = 30;
    s.noise = 0.3;
    s.dims = 2;
    s.class_spread = 3.0;
    s.elongation = 1.0;
    s.seed = seed;
    const auto t = make_synthetic(s);
    const auto split = split_labels(t, {0.3, seed, 1}).front();
    const auto spec = KernelSpec::rbf_auto(t.features);
    const auto reg = hypergraph_laplacian(build_knn_hypergraph(t, 5)).matrix;
    const auto m = make_regularized_kernel(gram_matrix(t.features, spec), reg);
    Hyperparams hp{"hlapr", 1e-4, 1e-2, 2.0, 5, 0};
    const auto model = train_one_vs_rest(t.features, t.class_labels, split.labeled, m, spec, hp, t.classes());
    const auto sc = model.training_scores(m->gram);
    int correct = 0;
    for (auto i : split.unlabeled) {
      Eigen::Index best;
      sc.row(i).maxCoeff(&best);
      correct += model.classes[static_cast<std::size_t>(best)] == *t.class_labels[static_cast<std::size_t>(i)];
    }
    EXPECT_GE(static_cast<double>(correct) / static_cast<double>(split.unlabeled.size()), 0.9) << seed;
  }
}

TEST(OneVsRest, ClassWithoutLabelsIsSkipped) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(9, 2);
  std::vector<std::optional<int>> labels{0, 0, 0, 1, 1, 1, 2, 2, 2};
  const auto spec = KernelSpec::rbf(1.0);
  const auto m = make_regularized_kernel(gram_matrix(x, spec), Eigen::MatrixXd::Zero(9, 9));
  Hyperparams hp{"supervised", 1e-3, 0.0, 2.0, 0, 0};
  const auto all = train_one_vs_rest(x, labels, {0, 3, 4}, m, spec, hp, {0, 1});
  const auto with_gap = train_one_vs_rest(x, labels, {0, 3, 4}, m, spec, hp, {0, 1, 2});
  ASSERT_EQ(with_gap.models.size(), 2u);
  EXPECT_EQ(with_gap.warnings.size(), 1u);
  EXPECT_EQ(with_gap.classes, (std::vector<int>{0, 1}));
  EXPECT_EQ(with_gap.models[0].alpha, all.models[0].alpha);
  EXPECT_THROW(train_one_vs_rest(x, labels, {0, 1}, m, spec, hp, {0, 1}), Error);
}

TEST(SSLProblemTest, RejectsInvalidInput) {
  const auto m = make_regularized_kernel(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(3, 3));
  EXPECT_THROW(SSLProblem(m, {}, {}, 0, 0), Error);
  EXPECT_THROW(SSLProblem(m, {0}, {0.5}, 0, 0), Error);
  EXPECT_THROW(SSLProblem(m, {0, 0}, {1, 1}, 0, 0), Error);
  EXPECT_THROW(SSLProblem(m, {3}, {1}, 0, 0), Error);
  EXPECT_THROW(SSLProblem(m, {0}, {1}, -1, 0), Error);
  EXPECT_THROW(make_regularized_kernel(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(2, 2)), Error);
}
