#pragma once

// Run configuration: JSON file, COUNSELOR_* environment overrides and a
// fingerprint that changes whenever any setting does.

#include "aic/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace aic {

struct RunConfig {
  /// Reference defaults, the 25-stock universe and the bundled rulebase.
  RunConfig();

  /// Directory holding prices-split-adjusted.csv (or prices.csv) and fundamentals.csv.
  std::filesystem::path data_dir;
  /// Explicit file paths; empty means derive from data_dir.
  std::filesystem::path prices;
  std::filesystem::path fundamentals;
  std::filesystem::path rulebase;

  std::vector<std::string> universe;
  std::vector<int> fundamental_years{2013, 2014, 2015};

  Index dma = 50;
  Index dp = 5;
  Index dc = 100;
  Index tau = 14;
  double c = 1000;
  double gamma = 0.001;
  double epsilon = 0.1;
  double split = 0.8;
  double validation = 0.2;

  double mu0 = 1e-6;
  double mu_ratio = 1.25;
  Index mu_points = 1'000'000;

  double eta = 0.3;
  std::uint64_t seed = 42;
  /// "smoothed" or "raw": which highs the realized returns come from.
  std::string return_basis = "smoothed";

  Index backtest_start = 1537;
  Index backtest_days = 30;
  double budget = 1000;

  double request_timeout = 10;  // seconds
  unsigned threads = 0;

  std::filesystem::path prices_path() const;
  std::filesystem::path fundamentals_path() const;

  /// Throws InvalidArgument on out-of-range settings.
  void validate() const;

  nlohmann::json to_json() const;
  /// Unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);

  /// FNV-1a over the canonical JSON, as 16 hex digits.
  std::string fingerprint() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// COUNSELOR_<KEY> (upper case) overrides `key`; lists are comma separated.
void apply_env_overrides(RunConfig& config, const EnvLookup& lookup);
EnvLookup process_env();

/// Defaults, then the optional JSON file, then environment overrides.
RunConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& lookup = process_env());

}  // namespace aic
