#include "aic/svr.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

using namespace aic;

namespace {

Eigen::MatrixXd random_samples(std::mt19937_64& rng, Index n, Index d) {
  std::uniform_real_distribution<double> u(-2, 2);
  Eigen::MatrixXd x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = u(rng);
  return x;
}

}  // namespace

TEST_CASE("RBF kernel") {
  Eigen::Vector3d x(1, -2, 0.5);
  CHECK(rbf_kernel(x, x, 0.3) == 1);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(1000);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(1000);
  CHECK(rbf_kernel(a, b, 0.001) == doctest::Approx(0.36787944117144233).epsilon(1e-12));
  CHECK_THROWS_AS(rbf_kernel(a, x, 0.1), InvalidArgument);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_samples(rng, 8, 3);
    const auto k = rbf_gram(s, 0.7);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
  }
}

TEST_CASE("SVR dual matches the dense QP reference") {
  Eigen::MatrixXd x(3, 2);
  x << 0, 0, 1, 0.5, 2, -0.5;
  Eigen::VectorXd y(3);
  y << 0.3, 1.1, 0.2;
  SvrParams p;
  p.gamma = 0.5;
  p.c = 10;
  p.epsilon = 0.1;
  p.tolerance = 1e-10;
  SvrTrainReport report;
  train_svr(x, y, p, &report);
  // cvxopt solve, tests/oracles/qp_oracle.py
  CHECK(report.objective == doctest::Approx(-0.3230012522403404).epsilon(1e-9));
  CHECK(report.coefficients[0] == doctest::Approx(-0.5381012942610405).epsilon(1e-6));
  CHECK(report.coefficients[1] == doctest::Approx(0.9997323341525592).epsilon(1e-6));
  CHECK(report.coefficients[2] == doctest::Approx(-0.46163103989151866).epsilon(1e-6));
  CHECK(report.coefficients.sum() == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("epsilon tube absorbs an exact line") {
  Eigen::MatrixXd x(12, 1);
  Eigen::VectorXd y(12);
  for (Index i = 0; i < 12; ++i) {
    x(i, 0) = -1 + 2.0 * static_cast<double>(i) / 11;
    y[i] = 0.4 * x(i, 0) + 0.1;
  }
  SvrParams p;
  p.gamma = 0.5;
  p.c = 100;
  p.epsilon = 0.2;
  const auto model = train_svr(x, y, p);
  for (Index i = 0; i < 12; ++i) CHECK(std::abs(model.predict(x.row(i).transpose()) - y[i]) <= 0.2 + 1e-6);
}

TEST_CASE("objective never increases across iterations") {
  std::mt19937_64 rng(9);
  const auto x = random_samples(rng, 30, 2);
  Eigen::VectorXd y = x.col(0).array().sin() + 0.3 * x.col(1).array();
  SvrParams p;
  p.gamma = 0.5;
  p.c = 10;
  p.record_objective = true;
  SvrTrainReport report;
  train_svr(x, y, p, &report);
  REQUIRE(report.objective_history.size() > 2);
  for (std::size_t k = 1; k < report.objective_history.size(); ++k) {
    CHECK(report.objective_history[k] <= report.objective_history[k - 1] + 1e-12);
  }
}

TEST_CASE("prediction is invariant under sample permutation") {
  std::mt19937_64 rng(21);
  const auto x = random_samples(rng, 25, 3);
  Eigen::VectorXd y = (x.col(0) - x.col(2)).array().tanh();
  SvrParams p;
  p.gamma = 0.3;
  p.c = 50;
  p.tolerance = 1e-9;
  const auto a = train_svr(x, y, p);

  std::vector<Index> order(25);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd xp(25, 3);
  Eigen::VectorXd yp(25);
  for (Index i = 0; i < 25; ++i) {
    xp.row(i) = x.row(order[static_cast<std::size_t>(i)]);
    yp[i] = y[order[static_cast<std::size_t>(i)]];
  }
  const auto b = train_svr(xp, yp, p);
  const auto probe = random_samples(rng, 10, 3);
  for (Index i = 0; i < 10; ++i) {
    CHECK(a.predict(probe.row(i).transpose()) == doctest::Approx(b.predict(probe.row(i).transpose())).epsilon(1e-6));
  }
}

TEST_CASE("training error shrinks as C grows on a noiseless target") {
  std::mt19937_64 rng(4);
  const auto x = random_samples(rng, 40, 1);
  Eigen::VectorXd y = x.col(0).array().sin();
  const auto test = random_samples(rng, 40, 1);
  Eigen::VectorXd truth = test.col(0).array().sin();
  double previous = 1e9;
  for (double c : {0.1, 10.0, 1000.0}) {
    SvrParams p;
    p.gamma = 1;
    p.c = c;
    p.epsilon = 0.01;
    const auto model = train_svr(x, y, p);
    double mae = 0;
    for (Index i = 0; i < 40; ++i) mae += std::abs(model.predict(test.row(i).transpose()) - truth[i]) / 40;
    CHECK(mae <= previous + 1e-9);
    previous = mae;
  }
  CHECK(previous < 0.05);
}

TEST_CASE("model text round trip") {
  std::mt19937_64 rng(2);
  const auto x = random_samples(rng, 15, 2);
  Eigen::VectorXd y = x.rowwise().sum();
  const auto model = train_svr(x, y, {});
  std::stringstream buf;
  save_model(buf, model);
  CHECK(buf.str().rfind("aic-svr 1", 0) == 0);
  const auto loaded = load_model(buf);
  for (Index i = 0; i < 15; ++i) CHECK(loaded.predict(x.row(i).transpose()) == model.predict(x.row(i).transpose()));

  std::stringstream bad("not-a-model\n");
  CHECK_THROWS_AS(load_model(bad), ParseError);
}

TEST_CASE("invalid training input") {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 2;
  CHECK_THROWS_AS(train_svr(x, Eigen::VectorXd::Zero(2), {}), InvalidArgument);
  SvrParams p;
  p.c = -1;
  CHECK_THROWS_AS(train_svr(x, Eigen::VectorXd::Zero(3), p), InvalidArgument);
}
