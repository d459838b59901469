#pragma once

// Fuzzy investment counselor: self-stock and pairwise technical systems,
// the fundamental system, and the normalizations that feed and fuse them.

#include "aic/fuzzy.hpp"
#include "aic/types.hpp"

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace aic {

inline const std::array<double, 5> kDefaultFundamentalCoefficients{0.3, 0.15, -0.4, -0.5, -0.9};

/// The three rulebases by system name: self_stock, pairwise, fundamental.
struct CounselorRulebases {
  fuzzy::RuleBase self_stock;
  fuzzy::RuleBase pairwise;
  fuzzy::RuleBase fundamental;

  static CounselorRulebases load(const std::filesystem::path& path);
  static CounselorRulebases from(const std::map<std::string, fuzzy::RuleBase>& systems);
};

struct TechnicalInputs {
  Eigen::VectorXd expected_returns;
  Eigen::VectorXd sigmas;
  Eigen::MatrixXd correlations;
  double eta = 0.3;
};

/// rho(i, j) = S(i, j) / (sigma_i sigma_j), 0 where a sigma vanishes, clamped to [-1, 1].
Eigen::MatrixXd correlation_from_covariance(const Eigen::MatrixXd& covariance);

/// Builds technical inputs from expected returns and a covariance matrix.
TechnicalInputs technical_inputs(const Eigen::VectorXd& expected_returns, const Eigen::MatrixXd& covariance, double eta);

struct NormalizedTechnical {
  Eigen::VectorXd expected_returns;
  Eigen::VectorXd sigmas;
  double sigma_scaling = 0;
};

NormalizedTechnical normalize_technical(const Eigen::VectorXd& expected_returns, const Eigen::VectorXd& sigmas,
                                        double eta);

/// w^{t,s}: one defuzzified weight per stock over (E', sigma', eta).
Eigen::VectorXd self_stock_weights(const NormalizedTechnical& normalized, double eta, const fuzzy::RuleBase& rulebase);

struct PairwiseWeights {
  /// pair(i, j) = w^{t,p}_{i,j} for j != i; the diagonal is 0.
  Eigen::MatrixXd pair;
  /// w^{t,p}_i = sum over j != i of rho(i, j) pair(i, j).
  Eigen::VectorXd fused;
};

/// With fewer than two stocks the pairwise stage is skipped (all zeros).
PairwiseWeights pairwise_weights(const NormalizedTechnical& normalized, const Eigen::MatrixXd& correlations,
                                 double eta, const fuzzy::RuleBase& rulebase);

struct FusedTechnical {
  /// eta * w^{t,p} + w^{t,s} before clamping.
  Eigen::VectorXd raw;
  Eigen::VectorXd weights;
  bool uniform_fallback = false;
};

/// Negative entries are clamped to 0 before normalizing; an all-zero vector
/// falls back to uniform weights.
FusedTechnical fuse_technical(const Eigen::VectorXd& self, const Eigen::VectorXd& pairwise, double eta);

/// f'_{i,k} = f_{i,k} / (0.001 + sum_k |f_{i,k}|), row by row.
Eigen::MatrixXd normalize_fundamentals(const Eigen::MatrixXd& features);

struct FundamentalWeights {
  Eigen::VectorXd raw;
  Eigen::VectorXd weights;
};

/// Per stock, the rulebase fires once per feature over (f', c_k); all firings
/// are aggregated and defuzzified once.
FundamentalWeights fundamental_weights(const Eigen::MatrixXd& normalized_features,
                                       const Eigen::VectorXd& coefficients, const fuzzy::RuleBase& rulebase);

/// alpha_i = (n_f + c_f . f'_i) / (2 n_f).
Eigen::VectorXd fundamental_alpha(const Eigen::MatrixXd& normalized_features, const Eigen::VectorXd& coefficients);

struct CounselorOutput {
  NormalizedTechnical normalized;
  Eigen::VectorXd self_stock;
  PairwiseWeights pairwise;
  FusedTechnical technical;
  Eigen::MatrixXd normalized_fundamentals;
  FundamentalWeights fundamental;
  Eigen::VectorXd alpha;
  /// alpha * w^f + w^t before the final normalization.
  Eigen::VectorXd combined;
  Eigen::VectorXd weights;
};

/// w = normalize(alpha * w^f + w^t). Fills alpha, combined and weights.
void combine(CounselorOutput& out);

Eigen::VectorXd default_fundamental_coefficients();

/// Full pipeline. A fundamentals matrix with no columns runs the technical
/// part alone (alpha = 0).
CounselorOutput run_counselor(const TechnicalInputs& inputs, const Eigen::MatrixXd& fundamentals,
                              const Eigen::VectorXd& coefficients, const CounselorRulebases& rulebases);

/// One row per stock with every intermediate.
void write_audit_csv(std::ostream& out, const std::vector<std::string>& symbols, const CounselorOutput& output);

}  // namespace aic
