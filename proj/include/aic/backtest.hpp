#pragma once

// Forecast metrics, budget simulation with the exit rule, and the
// per-stock report next to published reference figures.

#include "aic/counselor.hpp"
#include "aic/forecast.hpp"
#include "aic/portfolio.hpp"
#include "aic/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace aic {

/// Percent of days where sign(predicted) == sign(actual); sign(0) only
/// matches sign(0). NaN when every actual return is exactly 0.
double hit_rate(const Eigen::VectorXd& predicted_returns, const Eigen::VectorXd& actual_returns);

enum class SmoothingMode { kNsp, kSp };
std::string_view to_string(SmoothingMode mode);

struct MetricReport {
  std::string symbol;
  SmoothingMode mode = SmoothingMode::kSp;
  double hr = 0;
  double mae = 0;
  double rmse = 0;
  /// Percent over days with a non-zero actual value.
  double mape = 0;
  Index mape_skipped = 0;
  Index days = 0;
};

/// Fills mae, rmse, mape, mape_skipped and days.
MetricReport error_metrics(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);

MetricReport metric_report(const ForecastResult& forecast, SmoothingMode mode);

/// Published per-stock reference row. NaN marks a missing entry.
struct ReferenceRow {
  std::string_view symbol;
  double nsp_hr, nsp_mae, nsp_rmse, nsp_mape, sp_hr, tp_hr;
};

const std::vector<ReferenceRow>& reference_table();
const ReferenceRow* find_reference(std::string_view symbol);

/// The 25-stock default universe.
std::vector<std::string> default_universe();

/// Table-shaped CSV: one row per (symbol, mode) with our metrics and the
/// reference figures.
void write_table_report(std::ostream& out, const std::vector<MetricReport>& reports);

/// Aligned returns for the backtest universe. Row d holds returns into day d.
struct MarketPanel {
  std::vector<std::string> symbols;
  std::vector<Date> calendar;
  /// Realized returns, days x n (NaN where undefined).
  Eigen::MatrixXd realized;
  /// Forecast returns, days x n (NaN where no forecast exists).
  Eigen::MatrixXd expected;
  /// n x n_f raw fundamentals; zero columns disables the fundamental part.
  Eigen::MatrixXd fundamentals;

  Index stocks() const { return static_cast<Index>(symbols.size()); }
  Index days() const { return static_cast<Index>(calendar.size()); }
  /// Index of `date` in the calendar; throws NotFound.
  Index day_index(Date date) const;
};

enum class Strategy { kPortfolio, kFic, kRandom };
std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view text);

struct BacktestOptions {
  Strategy strategy = Strategy::kPortfolio;
  Index start_day = 0;
  Index horizon = 30;
  double eta = 0.3;
  double initial_budget = 1000;
  Index covariance_window = kDefaultCovarianceWindow;
  std::uint64_t seed = 42;
  GeometricSchedule<double> schedule{};
  const CounselorRulebases* rulebases = nullptr;
  Eigen::VectorXd coefficients = default_fundamental_coefficients();
};

struct BacktestLedger {
  Strategy strategy = Strategy::kPortfolio;
  std::vector<Date> days;
  std::vector<Eigen::VectorXd> weights;
  std::vector<double> expected_return;
  std::vector<double> realized_return;
  std::vector<bool> invested;
  /// budget[k] is the budget after day k; size horizon + 1 with the initial budget first.
  std::vector<double> budget;

  double final_budget() const { return budget.back(); }
};

/// Uniform draw from the probability simplex (sorted uniform spacings).
Eigen::VectorXd random_simplex_point(Index n, std::mt19937_64& rng);

/// Weights recommended on `day` from returns known before it.
Eigen::VectorXd portfolio_weights(const MarketPanel& panel, Index day, double eta, Index covariance_window,
                                  const GeometricSchedule<double>& schedule);
CounselorOutput fic_weights(const MarketPanel& panel, Index day, double eta, Index covariance_window,
                            const CounselorRulebases& rulebases, const Eigen::VectorXd& coefficients);

BacktestLedger run_backtest(const MarketPanel& panel, const BacktestOptions& options);

/// Columns: date, w_<symbol>..., expected_r, realized_r, invested, budget.
void write_ledger_csv(std::ostream& out, const BacktestLedger& ledger, const std::vector<std::string>& symbols);

/// Final budgets reported for the 30-day, eta = 0.3, $1000 run.
struct ReferenceBudgets {
  double portfolio = 1078.88;
  double fic = 1072.26;
  double random = 1059.98;
};

}  // namespace aic
