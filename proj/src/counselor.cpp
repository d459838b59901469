#include "aic/counselor.hpp"

#include "aic/csv.hpp"

#include <algorithm>
#include <cmath>

namespace aic {

namespace {

const fuzzy::RuleBase& system_named(const std::map<std::string, fuzzy::RuleBase>& systems, const std::string& name) {
  const auto it = systems.find(name);
  if (it == systems.end()) throw InvalidArgument("rulebase file lacks system '" + name + "'");
  return it->second;
}

void require_inputs(const fuzzy::RuleBase& rb, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (rb.input_index(name) < 0) throw InvalidArgument("system '" + rb.name() + "' lacks input '" + name + "'");
  }
}

double defuzzify(const fuzzy::RuleBase& rb, const fuzzy::Inputs& inputs) {
  return fuzzy::defuzzify_centroid(fuzzy::infer(rb, inputs));
}

}  // namespace

CounselorRulebases CounselorRulebases::from(const std::map<std::string, fuzzy::RuleBase>& systems) {
  CounselorRulebases out{system_named(systems, "self_stock"), system_named(systems, "pairwise"),
                         system_named(systems, "fundamental")};
  require_inputs(out.self_stock, {"E", "sigma", "eta"});
  require_inputs(out.pairwise, {"E_other", "sigma_other", "rho", "eta"});
  require_inputs(out.fundamental, {"f", "c"});
  return out;
}

CounselorRulebases CounselorRulebases::load(const std::filesystem::path& path) {
  return from(fuzzy::load_rulebases(path));
}

Eigen::MatrixXd correlation_from_covariance(const Eigen::MatrixXd& covariance) {
  const Index n = covariance.rows();
  const Eigen::VectorXd sigma = covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (sigma[i] > 0 && sigma[j] > 0) rho(i, j) = std::clamp(covariance(i, j) / (sigma[i] * sigma[j]), -1.0, 1.0);
    }
  }
  return rho;
}

TechnicalInputs technical_inputs(const Eigen::VectorXd& expected_returns, const Eigen::MatrixXd& covariance,
                                 double eta) {
  if (covariance.rows() != expected_returns.size() || covariance.cols() != expected_returns.size()) {
    throw InvalidArgument("covariance and expected returns are not aligned");
  }
  return {expected_returns, covariance.diagonal().cwiseMax(0.0).cwiseSqrt(), correlation_from_covariance(covariance),
          eta};
}

NormalizedTechnical normalize_technical(const Eigen::VectorXd& expected_returns, const Eigen::VectorXd& sigmas,
                                        double eta) {
  if (expected_returns.size() != sigmas.size()) throw InvalidArgument("expected returns and sigmas differ in length");
  if (!(eta >= 0 && eta <= 1)) throw InvalidArgument("eta must lie in [0, 1]");
  if ((sigmas.array() < 0).any()) throw InvalidArgument("negative standard deviation");
  NormalizedTechnical out;
  out.expected_returns = expected_returns / (0.001 + expected_returns.cwiseAbs().sum());
  const double max_sigma = sigmas.size() ? sigmas.maxCoeff() : 0.0;
  out.sigma_scaling = eta + (1 - eta) * max_sigma;
  const double denom = sigmas.sum() * (0.0001 + out.sigma_scaling);
  out.sigmas = denom > 0 ? Eigen::VectorXd(sigmas / denom) : Eigen::VectorXd::Zero(sigmas.size());
  return out;
}

Eigen::VectorXd self_stock_weights(const NormalizedTechnical& normalized, double eta, const fuzzy::RuleBase& rulebase) {
  const Index n = normalized.expected_returns.size();
  Eigen::VectorXd w(n);
  for (Index i = 0; i < n; ++i) {
    try {
      w[i] = defuzzify(rulebase, {{"E", normalized.expected_returns[i]}, {"sigma", normalized.sigmas[i]}, {"eta", eta}});
    } catch (const NoRuleFired& e) {
      throw NoRuleFired("self-stock system, stock " + std::to_string(i) + ": " + e.what());
    }
  }
  return w;
}

PairwiseWeights pairwise_weights(const NormalizedTechnical& normalized, const Eigen::MatrixXd& correlations,
                                 double eta, const fuzzy::RuleBase& rulebase) {
  const Index n = normalized.expected_returns.size();
  if (correlations.rows() != n || correlations.cols() != n) throw InvalidArgument("correlation matrix is not n x n");
  PairwiseWeights out{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  if (n < 2) return out;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      try {
        out.pair(i, j) = defuzzify(rulebase, {{"E_other", normalized.expected_returns[j]},
                                              {"sigma_other", normalized.sigmas[j]},
                                              {"rho", correlations(i, j)},
                                              {"eta", eta}});
      } catch (const NoRuleFired& e) {
        throw NoRuleFired("pairwise system, stocks " + std::to_string(i) + "/" + std::to_string(j) + ": " + e.what());
      }
      out.fused[i] += correlations(i, j) * out.pair(i, j);
    }
  }
  return out;
}

FusedTechnical fuse_technical(const Eigen::VectorXd& self, const Eigen::VectorXd& pairwise, double eta) {
  if (self.size() != pairwise.size()) throw InvalidArgument("self-stock and pairwise weights differ in length");
  FusedTechnical out;
  out.raw = eta * pairwise + self;
  const Eigen::VectorXd clamped = out.raw.cwiseMax(0.0);
  const double sum = clamped.sum();
  if (sum > 0) {
    out.weights = clamped / sum;
  } else {
    out.weights = Eigen::VectorXd::Constant(self.size(), 1.0 / static_cast<double>(self.size()));
    out.uniform_fallback = true;
  }
  return out;
}

Eigen::MatrixXd normalize_fundamentals(const Eigen::MatrixXd& features) {
  if (!features.allFinite()) throw InvalidArgument("fundamental features must be finite");
  Eigen::MatrixXd out(features.rows(), features.cols());
  for (Index i = 0; i < features.rows(); ++i) {
    out.row(i) = features.row(i) / (0.001 + features.row(i).cwiseAbs().sum());
  }
  return out;
}

FundamentalWeights fundamental_weights(const Eigen::MatrixXd& normalized_features,
                                       const Eigen::VectorXd& coefficients, const fuzzy::RuleBase& rulebase) {
  const Index n = normalized_features.rows();
  const Index nf = normalized_features.cols();
  if (coefficients.size() != nf) throw InvalidArgument("fundamental coefficients do not match the feature count");
  const int f_idx = rulebase.input_index("f");
  const int c_idx = rulebase.input_index("c");
  FundamentalWeights out;
  out.raw.resize(n);
  std::vector<double> crisp(rulebase.inputs().size(), 0.0);
  for (Index i = 0; i < n; ++i) {
    std::vector<fuzzy::Firing> firings;
    for (Index k = 0; k < nf; ++k) {
      crisp[static_cast<std::size_t>(f_idx)] = normalized_features(i, k);
      crisp[static_cast<std::size_t>(c_idx)] = coefficients[k];
      const auto fk = fuzzy::fire(rulebase, crisp);
      firings.insert(firings.end(), fk.begin(), fk.end());
    }
    try {
      out.raw[i] = fuzzy::defuzzify_centroid(fuzzy::aggregate(rulebase.output(), firings));
    } catch (const NoRuleFired& e) {
      throw NoRuleFired("fundamental system, stock " + std::to_string(i) + ": " + e.what());
    }
  }
  const double sum = out.raw.sum();
  out.weights = sum > 0 ? Eigen::VectorXd(out.raw / sum)
                        : Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(std::max<Index>(n, 1)));
  return out;
}

Eigen::VectorXd fundamental_alpha(const Eigen::MatrixXd& normalized_features, const Eigen::VectorXd& coefficients) {
  const Index nf = normalized_features.cols();
  if (nf == 0) return Eigen::VectorXd::Zero(normalized_features.rows());
  Eigen::VectorXd alpha = ((normalized_features * coefficients).array() + double(nf)) / (2.0 * double(nf));
  for (Index i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] >= -1e-12 && alpha[i] <= 1 + 1e-12)) {
      throw InvalidArgument("alpha " + std::to_string(alpha[i]) + " outside [0, 1]; coefficients must lie in [-1, 1]");
    }
    alpha[i] = std::clamp(alpha[i], 0.0, 1.0);
  }
  return alpha;
}

void combine(CounselorOutput& out) {
  const Index n = out.technical.weights.size();
  if (out.normalized_fundamentals.cols() == 0) {
    out.alpha = Eigen::VectorXd::Zero(n);
    out.combined = out.technical.weights;
  } else {
    out.combined = out.alpha.cwiseProduct(out.fundamental.weights) + out.technical.weights;
  }
  out.weights = out.combined / out.combined.sum();
}

Eigen::VectorXd default_fundamental_coefficients() {
  return Eigen::Map<const Eigen::VectorXd>(kDefaultFundamentalCoefficients.data(), 5);
}

CounselorOutput run_counselor(const TechnicalInputs& inputs, const Eigen::MatrixXd& fundamentals,
                              const Eigen::VectorXd& coefficients, const CounselorRulebases& rulebases) {
  const Index n = inputs.expected_returns.size();
  if (n == 0) throw InvalidArgument("empty universe");
  if (fundamentals.cols() > 0 && fundamentals.rows() != n) {
    throw InvalidArgument("fundamentals have " + std::to_string(fundamentals.rows()) + " rows for " +
                          std::to_string(n) + " stocks");
  }
  CounselorOutput out;
  out.normalized = normalize_technical(inputs.expected_returns, inputs.sigmas, inputs.eta);
  out.self_stock = self_stock_weights(out.normalized, inputs.eta, rulebases.self_stock);
  out.pairwise = pairwise_weights(out.normalized, inputs.correlations, inputs.eta, rulebases.pairwise);
  out.technical = fuse_technical(out.self_stock, out.pairwise.fused, inputs.eta);
  if (fundamentals.cols() > 0) {
    out.normalized_fundamentals = normalize_fundamentals(fundamentals);
    out.fundamental = fundamental_weights(out.normalized_fundamentals, coefficients, rulebases.fundamental);
    out.alpha = fundamental_alpha(out.normalized_fundamentals, coefficients);
  } else {
    out.normalized_fundamentals.resize(n, 0);
    out.fundamental.raw = Eigen::VectorXd::Zero(n);
    out.fundamental.weights = Eigen::VectorXd::Zero(n);
  }
  combine(out);
  return out;
}

void write_audit_csv(std::ostream& out, const std::vector<std::string>& symbols, const CounselorOutput& o) {
  out << "symbol,e_norm,sigma_norm,sigma_scaling,w_ts,w_tp,w_t_raw,w_t,w_f_raw,w_f,alpha,w\n";
  out.precision(17);
  for (Index i = 0; i < o.weights.size(); ++i) {
    const std::string sym = i < static_cast<Index>(symbols.size()) ? symbols[static_cast<std::size_t>(i)] : std::to_string(i);
    out << csv::escape(sym) << ',' << o.normalized.expected_returns[i] << ',' << o.normalized.sigmas[i] << ','
        << o.normalized.sigma_scaling << ',' << o.self_stock[i] << ',' << o.pairwise.fused[i] << ','
        << o.technical.raw[i] << ',' << o.technical.weights[i] << ',' << o.fundamental.raw[i] << ','
        << o.fundamental.weights[i] << ',' << o.alpha[i] << ',' << o.weights[i] << '\n';
  }
}

}  // namespace aic
