#pragma once

// Mean-variance weight suggestion:
//
//   minimize (1/mu) w'Sw - w'r   subject to  w >= 0, 1'w = 1
//
// solved by projected-gradient warm start plus a primal active-set finish on
// the simplex, followed by a KKT certificate. Sweeping mu traces the frontier.

#include "aic/error.hpp"
#include "aic/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace aic {

inline constexpr Index kDefaultCovarianceWindow = 100;

template <typename Scalar>
struct CovarianceEstimate {
  Matrix<Scalar> matrix;
  Vector<Scalar> mean_returns;
  Index window = kDefaultCovarianceWindow;
};

template <typename Scalar>
Matrix<Scalar> repair_psd(const Matrix<Scalar>& s, Scalar floor = Scalar(1e-9)) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(s);
  const auto& values = eig.eigenvalues();
  if (values.size() == 0 || values.minCoeff() >= 0) return s;
  if (values.minCoeff() < -floor) {
    throw DataIntegrityError("covariance matrix is not positive semi-definite (eigenvalue " +
                             std::to_string(static_cast<double>(values.minCoeff())) + ")");
  }
  const Vector<Scalar> clipped = values.cwiseMax(Scalar(0));
  Matrix<Scalar> out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return Scalar(0.5) * (out + out.transpose());
}

/// Population covariance of the rows [end_day - window + 1, end_day] of
/// `returns` (one column per asset).
template <typename Derived>
CovarianceEstimate<typename Derived::Scalar> estimate_covariance(const Eigen::MatrixBase<Derived>& returns,
                                                                 Index window = kDefaultCovarianceWindow,
                                                                 Index end_day = -1) {
  using Scalar = typename Derived::Scalar;
  if (end_day < 0) end_day = returns.rows() - 1;
  if (window < 1) throw InvalidArgument("covariance window must be >= 1");
  if (end_day >= returns.rows() || end_day - window + 1 < 0) {
    throw InsufficientHistory("covariance window " + std::to_string(window) + " ending at row " +
                              std::to_string(end_day) + " exceeds available history");
  }
  const auto block = returns.middleRows(end_day - window + 1, window);
  if (!block.allFinite()) throw DataIntegrityError("non-finite returns inside covariance window");
  CovarianceEstimate<Scalar> est;
  est.window = window;
  est.mean_returns = block.colwise().mean().transpose();
  const Matrix<Scalar> centered = block.rowwise() - est.mean_returns.transpose();
  Matrix<Scalar> cov = (centered.transpose() * centered) / static_cast<Scalar>(window);
  cov = Scalar(0.5) * (cov + cov.transpose());
  est.matrix = repair_psd<Scalar>(cov);
  return est;
}

/// Euclidean projection onto the probability simplex (sort-based).
template <typename Derived>
Vector<typename Derived::Scalar> project_to_simplex(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.size();
  std::vector<Scalar> u(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = v[i];
  std::sort(u.begin(), u.end(), std::greater<Scalar>());
  Scalar cumulative = 0;
  Scalar theta = 0;
  for (Index j = 0; j < n; ++j) {
    cumulative += u[static_cast<std::size_t>(j)];
    const Scalar candidate = (cumulative - Scalar(1)) / static_cast<Scalar>(j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(Scalar(0)).matrix();
}

template <typename Scalar>
struct KktReport {
  Scalar stationarity = 0;
  Scalar primal = 0;
  Scalar complementarity = 0;
  Scalar dual_feasibility = 0;

  Scalar worst() const { return std::max({stationarity, primal, complementarity, dual_feasibility}); }
};

template <typename Scalar>
struct SolverOptions {
  Scalar tolerance = Scalar(1e-8);
  int max_iterations = 10'000;
  int warm_start_iterations = 200;
  Scalar psd_floor = Scalar(1e-9);
};

template <typename Scalar>
struct MarkowitzSolution {
  Vector<Scalar> weights;
  Scalar objective = 0;
  KktReport<Scalar> kkt;
  int iterations = 0;
};

template <typename Scalar>
Scalar markowitz_objective(const Matrix<Scalar>& s, const Vector<Scalar>& r, Scalar mu, const Vector<Scalar>& w) {
  return w.dot(s * w) / mu - w.dot(r);
}

/// KKT residuals of w for the simplex-constrained problem with gradient
/// g = (2/mu) S w - r. The equality multiplier is fitted on the support.
template <typename Scalar>
KktReport<Scalar> markowitz_kkt(const Matrix<Scalar>& s, const Vector<Scalar>& r, Scalar mu, const Vector<Scalar>& w) {
  const Vector<Scalar> g = (Scalar(2) / mu) * (s * w) - r;
  const Index n = w.size();
  Scalar sum = 0;
  Index support = 0;
  for (Index i = 0; i < n; ++i) {
    if (w[i] > 0) {
      sum += g[i];
      ++support;
    }
  }
  const Scalar nu = support > 0 ? -sum / static_cast<Scalar>(support) : -g.minCoeff();
  KktReport<Scalar> k;
  using std::abs;
  k.primal = abs(w.sum() - Scalar(1));
  for (Index i = 0; i < n; ++i) {
    const Scalar reduced = g[i] + nu;
    const Scalar z = std::max(reduced, Scalar(0));
    k.primal = std::max(k.primal, std::max(-w[i], Scalar(0)));
    k.stationarity = std::max(k.stationarity, w[i] > 0 ? abs(reduced) : Scalar(0));
    k.dual_feasibility = std::max(k.dual_feasibility, std::max(-reduced, Scalar(0)));
    k.complementarity = std::max(k.complementarity, abs(w[i] * z));
  }
  return k;
}

namespace detail {

template <typename Scalar>
Scalar check_psd_and_lipschitz(const Matrix<Scalar>& s, Scalar floor) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(s, Eigen::EigenvaluesOnly);
  const auto& values = eig.eigenvalues();
  if (values.minCoeff() < -floor) {
    throw DataIntegrityError("covariance matrix is not positive semi-definite (eigenvalue " +
                             std::to_string(static_cast<double>(values.minCoeff())) + ")");
  }
  return std::max(values.maxCoeff(), Scalar(0));
}

template <typename Scalar>
MarkowitzSolution<Scalar> solve_markowitz_checked(const Matrix<Scalar>& s, const Vector<Scalar>& r, Scalar mu,
                                                  Scalar lambda_max, const SolverOptions<Scalar>& options) {
  const Index n = r.size();
  MarkowitzSolution<Scalar> sol;
  if (n == 1) {
    sol.weights = Vector<Scalar>::Ones(1);
    sol.objective = markowitz_objective(s, r, mu, sol.weights);
    sol.kkt = markowitz_kkt(s, r, mu, sol.weights);
    return sol;
  }
  const Matrix<Scalar> h = (Scalar(2) / mu) * s;
  const Scalar lipschitz = (Scalar(2) / mu) * lambda_max;

  // Accelerated projected gradient from the barycenter.
  Vector<Scalar> w = Vector<Scalar>::Constant(n, Scalar(1) / static_cast<Scalar>(n));
  if (lipschitz > 0) {
    Vector<Scalar> y = w;
    Scalar t = 1;
    for (int k = 0; k < options.warm_start_iterations; ++k) {
      const Vector<Scalar> next = project_to_simplex((y - (h * y - r) / lipschitz).eval());
      const Scalar t_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t * t)) / Scalar(2);
      y = next + ((t - Scalar(1)) / t_next) * (next - w);
      w = next;
      t = t_next;
    }
    for (Index i = 0; i < n; ++i) {
      if (w[i] < Scalar(1e-10)) w[i] = 0;
    }
    w /= w.sum();
  }

  std::vector<bool> free(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) free[static_cast<std::size_t>(i)] = w[i] > 0;
  const Scalar dual_slack = options.tolerance * Scalar(1e-2);
  const Scalar scale = std::max<Scalar>(Scalar(1), h.cwiseAbs().maxCoeff() + r.cwiseAbs().maxCoeff());

  int iter = 0;
  bool done = false;
  for (; iter < options.max_iterations && !done; ++iter) {
    const Vector<Scalar> g = h * w - r;
    std::vector<Index> f;
    for (Index i = 0; i < n; ++i) {
      if (free[static_cast<std::size_t>(i)]) f.push_back(i);
    }
    const Index k = static_cast<Index>(f.size());

    Vector<Scalar> step = Vector<Scalar>::Zero(n);
    bool ray = false;
    if (k > 1) {
      // Orthonormal basis of {d : 1'd = 0} on the free coordinates.
      Eigen::HouseholderQR<Matrix<Scalar>> qr(Matrix<Scalar>::Ones(k, 1));
      const Matrix<Scalar> q = qr.householderQ();
      const Matrix<Scalar> z = q.rightCols(k - 1);
      Matrix<Scalar> h_ff(k, k);
      Vector<Scalar> g_f(k);
      for (Index a = 0; a < k; ++a) {
        g_f[a] = g[f[a]];
        for (Index b = 0; b < k; ++b) h_ff(a, b) = h(f[a], f[b]);
      }
      const Matrix<Scalar> reduced = z.transpose() * h_ff * z;
      const Vector<Scalar> reduced_g = z.transpose() * g_f;
      Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(reduced);
      const Scalar threshold = Scalar(1e-11) * std::max<Scalar>(Scalar(1), eig.eigenvalues().cwiseAbs().maxCoeff());
      Vector<Scalar> newton = Vector<Scalar>::Zero(k - 1);
      Vector<Scalar> flat = Vector<Scalar>::Zero(k - 1);
      for (Index m = 0; m < k - 1; ++m) {
        const Vector<Scalar> v = eig.eigenvectors().col(m);
        const Scalar proj = v.dot(reduced_g);
        if (eig.eigenvalues()[m] > threshold) {
          newton -= (proj / eig.eigenvalues()[m]) * v;
        } else {
          flat += proj * v;
        }
      }
      Vector<Scalar> d_f;
      if (flat.norm() > Scalar(1e-13) * scale) {
        d_f = -(z * flat);
        ray = true;
      } else {
        d_f = z * newton;
      }
      for (Index a = 0; a < k; ++a) step[f[a]] = d_f[a];
    }

    if (!ray && step.cwiseAbs().maxCoeff() <= Scalar(1e-12)) {
      // Stationary on the current face: check multipliers of the bounds.
      Scalar sum = 0;
      for (Index i : f) sum += g[i];
      const Scalar nu = -sum / static_cast<Scalar>(k);
      Index release = -1;
      Scalar most_negative = -dual_slack;
      for (Index i = 0; i < n; ++i) {
        if (free[static_cast<std::size_t>(i)]) continue;
        const Scalar z = g[i] + nu;
        if (z < most_negative) {
          most_negative = z;
          release = i;
        }
      }
      if (release < 0) {
        done = true;
      } else {
        free[static_cast<std::size_t>(release)] = true;
      }
      continue;
    }

    Scalar alpha = ray ? std::numeric_limits<Scalar>::infinity() : Scalar(1);
    Index blocking = -1;
    for (Index i : f) {
      if (step[i] < 0) {
        const Scalar limit = -w[i] / step[i];
        if (limit < alpha) {
          alpha = limit;
          blocking = i;
        }
      }
    }
    if (!std::isfinite(static_cast<double>(alpha))) {
      throw ConvergenceError("Markowitz active-set step is unbounded", static_cast<double>(step.norm()));
    }
    w += alpha * step;
    if (blocking >= 0) {
      w[blocking] = 0;
      free[static_cast<std::size_t>(blocking)] = false;
    }
    for (Index i = 0; i < n; ++i) {
      if (w[i] < 0) w[i] = 0;
    }
    w /= w.sum();
  }

  sol.weights = w;
  sol.iterations = iter;
  sol.objective = markowitz_objective(s, r, mu, w);
  sol.kkt = markowitz_kkt(s, r, mu, w);
  if (!done && sol.kkt.worst() > options.tolerance) {
    throw ConvergenceError("Markowitz solver reached its iteration cap", static_cast<double>(sol.kkt.worst()));
  }
  return sol;
}

}  // namespace detail

template <typename Scalar>
MarkowitzSolution<Scalar> solve_markowitz(const Matrix<Scalar>& s, const Vector<Scalar>& r, Scalar mu,
                                          const SolverOptions<Scalar>& options = {}) {
  if (!(mu > 0)) throw InvalidArgument("mu must be positive");
  if (s.rows() != s.cols() || s.rows() != r.size() || r.size() == 0) {
    throw InvalidArgument("covariance and return dimensions disagree");
  }
  const Scalar lambda_max = detail::check_psd_and_lipschitz(s, options.psd_floor);
  return detail::solve_markowitz_checked(s, r, mu, lambda_max, options);
}

template <typename Scalar>
struct FrontierPoint {
  Scalar mu = 0;
  Scalar risk = 0;
  Scalar expected_return = 0;
  Vector<Scalar> weights;
};

template <typename Scalar>
struct Frontier {
  std::vector<FrontierPoint<Scalar>> points;
  Scalar risk_min = 0;
  Scalar risk_max = 0;
};

/// mu_k = mu0 * ratio^k for k < max_points.
template <typename Scalar>
struct GeometricSchedule {
  Scalar mu0 = Scalar(1e-6);
  Scalar ratio = Scalar(1.25);
  Index max_points = 1'000'000;
};

namespace detail {

template <typename Scalar, typename Next>
Frontier<Scalar> sweep(const Matrix<Scalar>& s, const Vector<Scalar>& r, Next&& next_mu,
                       const SolverOptions<Scalar>& options) {
  if (s.rows() != s.cols() || s.rows() != r.size() || r.size() == 0) {
    throw InvalidArgument("covariance and return dimensions disagree");
  }
  const Scalar lambda_max = check_psd_and_lipschitz(s, options.psd_floor);
  const Scalar max_variance = s.diagonal().maxCoeff();
  const Scalar r_max = r.maxCoeff();
  using std::abs;
  const Scalar tie = Scalar(1e-15) * std::max(Scalar(1), abs(r_max));

  Frontier<Scalar> frontier;
  Scalar mu = 0;
  Scalar previous_mu = 0;
  while (next_mu(mu)) {
    if (!(mu > previous_mu)) throw InvalidArgument("mu schedule must be positive and strictly increasing");
    previous_mu = mu;
    auto sol = solve_markowitz_checked(s, r, mu, lambda_max, options);
    const Scalar variance = std::max(sol.weights.dot(s * sol.weights), Scalar(0));
    using std::sqrt;
    frontier.points.push_back({mu, sqrt(variance), sol.weights.dot(r), std::move(sol.weights)});
    // Maximum-variance stop, inclusive.
    if (variance >= max_variance * (Scalar(1) - Scalar(1e-9))) break;
    // Once the support sits on the max-return assets larger mu cannot move it.
    const auto& w = frontier.points.back().weights;
    bool limit = true;
    for (Index i = 0; i < w.size(); ++i) {
      if (w[i] > 0 && r[i] < r_max - tie) limit = false;
    }
    if (limit) break;
  }
  if (frontier.points.empty()) throw InvalidArgument("empty mu schedule");
  frontier.risk_min = frontier.points.front().risk;
  frontier.risk_max = frontier.points.front().risk;
  for (const auto& p : frontier.points) {
    frontier.risk_min = std::min(frontier.risk_min, p.risk);
    frontier.risk_max = std::max(frontier.risk_max, p.risk);
  }
  return frontier;
}

}  // namespace detail

template <typename Scalar>
Frontier<Scalar> sweep_frontier(const Matrix<Scalar>& s, const Vector<Scalar>& r, const std::vector<Scalar>& schedule,
                                const SolverOptions<Scalar>& options = {}) {
  std::size_t k = 0;
  return detail::sweep(
      s, r,
      [&](Scalar& mu) {
        if (k >= schedule.size()) return false;
        mu = schedule[k++];
        return true;
      },
      options);
}

template <typename Scalar>
Frontier<Scalar> sweep_frontier(const Matrix<Scalar>& s, const Vector<Scalar>& r,
                                const GeometricSchedule<Scalar>& schedule = {},
                                const SolverOptions<Scalar>& options = {}) {
  if (!(schedule.mu0 > 0) || !(schedule.ratio > 1)) throw InvalidArgument("geometric schedule needs mu0 > 0, ratio > 1");
  Index k = 0;
  Scalar current = schedule.mu0;
  return detail::sweep(
      s, r,
      [&](Scalar& mu) {
        if (k >= schedule.max_points) return false;
        mu = current;
        current *= schedule.ratio;
        ++k;
        return true;
      },
      options);
}

/// Highest expected return among points whose risk does not exceed
/// risk_min + eta (risk_max - risk_min). Ties keep the earlier point.
template <typename Scalar>
const FrontierPoint<Scalar>& select_by_risk_tolerance(const Frontier<Scalar>& frontier, Scalar eta) {
  if (frontier.points.empty()) throw InvalidArgument("empty frontier");
  if (!(eta >= 0 && eta <= 1)) throw InvalidArgument("risk tolerance must lie in [0, 1]");
  const Scalar cap = frontier.risk_min + eta * (frontier.risk_max - frontier.risk_min);
  using std::abs;
  const Scalar slack = Scalar(1e-12) * std::max(Scalar(1), abs(cap));
  const FrontierPoint<Scalar>* best = nullptr;
  for (const auto& p : frontier.points) {
    if (p.risk > cap + slack) continue;
    if (best == nullptr || p.expected_return > best->expected_return) best = &p;
  }
  if (best == nullptr) {
    // Only reachable through rounding: fall back to the minimum-risk point.
    best = &*std::min_element(frontier.points.begin(), frontier.points.end(),
                              [](const auto& a, const auto& b) { return a.risk < b.risk; });
  }
  return *best;
}

}  // namespace aic
