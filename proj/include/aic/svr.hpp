#pragma once

// Epsilon-support vector regression with an RBF kernel, trained by
// sequential minimal optimization on the dual.

#include "aic/error.hpp"
#include "aic/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <iosfwd>
#include <vector>

namespace aic {

inline constexpr double kDefaultSvrC = 1000.0;
inline constexpr double kDefaultSvrGamma = 0.001;
inline constexpr double kDefaultSvrEpsilon = 0.1;

/// k(x, y) = exp(-gamma ||x - y||^2)
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar rbf_kernel(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                                     typename DerivedX::Scalar gamma) {
  if (x.size() != y.size()) throw InvalidArgument("kernel arguments differ in dimension");
  if (!(gamma > 0)) throw InvalidArgument("RBF gamma must be positive");
  using std::exp;
  return exp(-gamma * (x - y).squaredNorm());
}

/// Gram matrix of the rows of `samples`.
Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& samples, double gamma);

struct SvrParams {
  double c = kDefaultSvrC;
  double gamma = kDefaultSvrGamma;
  double epsilon = kDefaultSvrEpsilon;
  /// Stop once the maximal KKT violation of the working pair drops below this.
  double tolerance = 1e-6;
  long max_iterations = 1'000'000;
  bool record_objective = false;
};

struct SvrModel {
  /// One support vector per row.
  Eigen::MatrixXd support_vectors;
  Eigen::VectorXd dual_coefficients;
  double bias = 0;
  double gamma = kDefaultSvrGamma;
  double c = kDefaultSvrC;
  double epsilon = kDefaultSvrEpsilon;

  Index dimension() const { return support_vectors.cols(); }

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct SvrTrainReport {
  long iterations = 0;
  /// Final maximal violating-pair gap.
  double kkt_gap = 0;
  /// 0.5 b'Kb + eps sum|b| - y'b at the returned solution.
  double objective = 0;
  /// Full coefficient vector b = alpha - alpha*, one entry per training sample.
  Eigen::VectorXd coefficients;
  std::vector<double> objective_history;
};

/// Trains on the rows of `samples` against `targets`. Deterministic for a
/// fixed sample order. Throws ConvergenceError at the iteration cap.
SvrModel train_svr(const Eigen::MatrixXd& samples, const Eigen::VectorXd& targets, const SvrParams& params = {},
                   SvrTrainReport* report = nullptr);

/// Same, with a precomputed Gram matrix of the samples.
SvrModel train_svr(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets,
                   const SvrParams& params, SvrTrainReport* report = nullptr);

/// Dual objective in coefficient form: 0.5 b'Kb + eps sum|b_i| - y'b.
double svr_dual_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets,
                          const Eigen::VectorXd& coefficients, double epsilon);

/// Text model format, first line "aic-svr 1".
void save_model(std::ostream& out, const SvrModel& model);
SvrModel load_model(std::istream& in);

}  // namespace aic
