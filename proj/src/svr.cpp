#include "aic/svr.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace aic {

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& samples, double gamma) {
  if (!(gamma > 0)) throw InvalidArgument("RBF gamma must be positive");
  const Index n = samples.rows();
  const Eigen::VectorXd norms = samples.rowwise().squaredNorm();
  Eigen::MatrixXd gram = samples * samples.transpose();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double d2 = std::max(0.0, norms[i] + norms[j] - 2.0 * gram(i, j));
      gram(i, j) = std::exp(-gamma * d2);
    }
  }
  for (Index i = 0; i < n; ++i) gram(i, i) = 1.0;
  return gram;
}

double SvrModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension()) {
    throw InvalidArgument("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                          std::to_string(dimension()));
  }
  double sum = bias;
  for (Index k = 0; k < support_vectors.rows(); ++k) {
    sum += dual_coefficients[k] * std::exp(-gamma * (support_vectors.row(k).transpose() - x).squaredNorm());
  }
  return sum;
}

double svr_dual_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets,
                          const Eigen::VectorXd& coefficients, double epsilon) {
  return 0.5 * coefficients.dot(gram * coefficients) + epsilon * coefficients.cwiseAbs().sum() -
         targets.dot(coefficients);
}

namespace {

// Dual over 2l variables a = [alpha; alpha*] with labels s = [+1; -1]:
//   min 0.5 a'Qa + p'a  s.t.  s'a = 0, 0 <= a <= C
// where Q_ij = s_i s_j K(i mod l, j mod l) and p = [eps - y; eps + y].
class SmoSolver {
 public:
  SmoSolver(const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets, const SvrParams& params)
      : gram_(gram), l_(targets.size()), c_(params.c), params_(params) {
    const Index m = 2 * l_;
    alpha_ = Eigen::VectorXd::Zero(m);
    sign_.resize(m);
    p_.resize(m);
    for (Index i = 0; i < l_; ++i) {
      sign_[i] = 1;
      sign_[i + l_] = -1;
      p_[i] = params.epsilon - targets[i];
      p_[i + l_] = params.epsilon + targets[i];
    }
    grad_ = p_;
  }

  void solve(SvrTrainReport& report) {
    long iter = 0;
    double gap = std::numeric_limits<double>::infinity();
    while (true) {
      Index i = -1, j = -1;
      gap = select_working_set(i, j);
      if (gap < params_.tolerance || j < 0) break;
      if (iter >= params_.max_iterations) {
        throw ConvergenceError("SVR dual did not converge within " + std::to_string(params_.max_iterations) +
                                   " pair updates",
                               gap);
      }
      update_pair(i, j);
      ++iter;
      if (params_.record_objective) report.objective_history.push_back(objective());
    }
    if (!std::isfinite(gap)) gap = 0;
    report.iterations = iter;
    report.kkt_gap = gap;
    report.objective = objective();
  }

  Eigen::VectorXd coefficients() const { return alpha_.head(l_) - alpha_.tail(l_); }

  double bias() const {
    // b = -rho, rho averaged over free variables.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum = 0;
    long free = 0;
    for (Index t = 0; t < 2 * l_; ++t) {
      const double yg = sign_[t] * grad_[t];
      if (at_upper(t)) {
        if (sign_[t] == 1) lb = std::max(lb, yg); else ub = std::min(ub, yg);
      } else if (at_lower(t)) {
        if (sign_[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        sum += yg;
        ++free;
      }
    }
    const double rho = free > 0 ? sum / static_cast<double>(free) : 0.5 * (ub + lb);
    return -rho;
  }

 private:
  double kernel(Index a, Index b) const { return gram_(a % l_, b % l_); }
  double q(Index a, Index b) const { return sign_[a] * sign_[b] * kernel(a, b); }
  bool at_upper(Index t) const { return alpha_[t] >= c_; }
  bool at_lower(Index t) const { return alpha_[t] <= 0; }

  double objective() const { return 0.5 * alpha_.dot(grad_ + p_); }

  // Second-order working set selection (maximal violating i, then j
  // minimizing the predicted objective decrease).
  double select_working_set(Index& out_i, Index& out_j) const {
    constexpr double kTau = 1e-12;
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    Index i = -1;
    for (Index t = 0; t < 2 * l_; ++t) {
      if (sign_[t] == 1) {
        if (!at_upper(t) && -grad_[t] >= gmax) {
          gmax = -grad_[t];
          i = t;
        }
      } else if (!at_lower(t) && grad_[t] >= gmax) {
        gmax = grad_[t];
        i = t;
      }
    }
    Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    const double qii = i >= 0 ? kernel(i, i) : 0.0;
    for (Index t = 0; t < 2 * l_ && i >= 0; ++t) {
      if (sign_[t] == 1) {
        if (at_lower(t)) continue;
        const double diff = gmax + grad_[t];
        gmax2 = std::max(gmax2, grad_[t]);
        if (diff > 0) {
          double quad = qii + kernel(t, t) - 2.0 * sign_[i] * q(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) {
            best = obj;
            j = t;
          }
        }
      } else {
        if (at_upper(t)) continue;
        const double diff = gmax - grad_[t];
        gmax2 = std::max(gmax2, -grad_[t]);
        if (diff > 0) {
          double quad = qii + kernel(t, t) + 2.0 * sign_[i] * q(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) {
            best = obj;
            j = t;
          }
        }
      }
    }
    out_i = i;
    out_j = j;
    if (i < 0) return 0;
    return gmax + gmax2;
  }

  void update_pair(Index i, Index j) {
    constexpr double kTau = 1e-12;
    const double old_i = alpha_[i];
    const double old_j = alpha_[j];
    const double qij = q(i, j);
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (sign_[i] != sign_[j]) {
      double quad = kernel(i, i) + kernel(j, j) + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > 0) {
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else if (aj > c_) {
        aj = c_;
        ai = c_ + diff;
      }
    } else {
      double quad = kernel(i, i) + kernel(j, j) - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > c_) {
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }
    const double di = ai - old_i;
    const double dj = aj - old_j;
    const Index ri = i % l_, rj = j % l_;
    for (Index t = 0; t < l_; ++t) {
      // Q(k, i) = s_k s_i K; rows t (s=+1) and t + l (s=-1) differ only in sign.
      const double g = sign_[i] * gram_(t, ri) * di + sign_[j] * gram_(t, rj) * dj;
      grad_[t] += g;
      grad_[t + l_] -= g;
    }
  }

  const Eigen::MatrixXd& gram_;
  Index l_;
  double c_;
  SvrParams params_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd grad_;
  Eigen::VectorXd p_;
  Eigen::VectorXi sign_;
};

}  // namespace

SvrModel train_svr(const Eigen::MatrixXd& samples, const Eigen::VectorXd& targets, const SvrParams& params,
                   SvrTrainReport* report) {
  return train_svr(samples, rbf_gram(samples, params.gamma), targets, params, report);
}

SvrModel train_svr(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets,
                   const SvrParams& params, SvrTrainReport* report) {
  if (samples.rows() < 2) throw InvalidArgument("SVR training needs at least 2 samples");
  if (targets.size() != samples.rows()) throw InvalidArgument("SVR targets do not match sample count");
  if (gram.rows() != samples.rows() || gram.cols() != samples.rows()) {
    throw InvalidArgument("Gram matrix does not match sample count");
  }
  if (!(params.c > 0) || !(params.gamma > 0) || !(params.epsilon >= 0)) {
    throw InvalidArgument("SVR requires C > 0, gamma > 0, epsilon >= 0");
  }
  if (!samples.allFinite() || !targets.allFinite()) throw InvalidArgument("SVR training data must be finite");

  SvrTrainReport local;
  SvrTrainReport& rep = report ? *report : local;
  rep.objective_history.clear();
  SmoSolver solver(gram, targets, params);
  solver.solve(rep);
  rep.coefficients = solver.coefficients();

  SvrModel model;
  model.gamma = params.gamma;
  model.c = params.c;
  model.epsilon = params.epsilon;
  model.bias = solver.bias();
  std::vector<Index> support;
  for (Index k = 0; k < rep.coefficients.size(); ++k) {
    if (rep.coefficients[k] != 0) support.push_back(k);
  }
  model.support_vectors.resize(static_cast<Index>(support.size()), samples.cols());
  model.dual_coefficients.resize(static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    model.support_vectors.row(static_cast<Index>(k)) = samples.row(support[k]);
    model.dual_coefficients[static_cast<Index>(k)] = rep.coefficients[support[k]];
  }
  return model;
}

void save_model(std::ostream& out, const SvrModel& model) {
  out << "aic-svr 1\n" << std::setprecision(17);
  out << "kernel rbf\n";
  out << "gamma " << model.gamma << "\n";
  out << "c " << model.c << "\n";
  out << "epsilon " << model.epsilon << "\n";
  out << "bias " << model.bias << "\n";
  out << "dimension " << model.dimension() << "\n";
  out << "support_vectors " << model.support_vectors.rows() << "\n";
  for (Index k = 0; k < model.support_vectors.rows(); ++k) {
    out << model.dual_coefficients[k];
    for (Index d = 0; d < model.support_vectors.cols(); ++d) out << ' ' << model.support_vectors(k, d);
    out << '\n';
  }
}

SvrModel load_model(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "unexpected end of model file");
    ++line_no;
    return std::istringstream(line);
  };
  auto keyed = [&](const char* key) {
    auto ss = next_line();
    std::string name;
    std::string value;
    ss >> name >> value;
    if (name != key || value.empty()) throw ParseError(line_no, std::string("expected '") + key + "'");
    return value;
  };
  auto number = [&](const char* key) {
    const std::string value = keyed(key);
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw ParseError(line_no, std::string("bad value for ") + key);
    }
  };

  {
    auto ss = next_line();
    std::string tag;
    int version = 0;
    ss >> tag >> version;
    if (tag != "aic-svr" || version != 1) throw ParseError(line_no, "not an aic-svr version 1 model");
  }
  if (keyed("kernel") != "rbf") throw ParseError(line_no, "unsupported kernel");
  SvrModel model;
  model.gamma = number("gamma");
  model.c = number("c");
  model.epsilon = number("epsilon");
  model.bias = number("bias");
  const auto dim = static_cast<Index>(number("dimension"));
  const auto count = static_cast<Index>(number("support_vectors"));
  if (dim < 0 || count < 0) throw ParseError(line_no, "negative size");
  model.support_vectors.resize(count, dim);
  model.dual_coefficients.resize(count);
  for (Index k = 0; k < count; ++k) {
    auto ss = next_line();
    if (!(ss >> model.dual_coefficients[k])) throw ParseError(line_no, "bad coefficient");
    for (Index d = 0; d < dim; ++d) {
      if (!(ss >> model.support_vectors(k, d))) throw ParseError(line_no, "bad support vector entry");
    }
  }
  return model;
}

}  // namespace aic
