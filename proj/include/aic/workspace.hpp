#pragma once

// Loaded dataset plus every precomputed artifact the request path needs:
// indicators, walk-forward forecasts and the aligned return panel.

#include "aic/backtest.hpp"
#include "aic/config.hpp"
#include "aic/counselor.hpp"
#include "aic/forecast.hpp"
#include "aic/indicators.hpp"
#include "aic/market_data.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aic {

struct StockArtifacts {
  PriceSeries prices;
  IndicatorSeries indicators;
  std::optional<ForecastResult> forecast;
  /// Why the forecast is missing, if it is.
  std::string forecast_error;
};

class Workspace {
 public:
  /// Ingests the configured files; with `forecasts` also trains one model
  /// per stock (in parallel) and builds the return panel.
  explicit Workspace(RunConfig config, bool forecasts = true);

  const RunConfig& config() const { return config_; }
  const std::string& fingerprint() const { return fingerprint_; }
  const std::vector<Date>& calendar() const { return calendar_; }
  const std::vector<std::string>& not_found() const { return not_found_; }
  const std::set<std::string>& incomplete() const { return incomplete_; }
  const FundamentalIngest& fundamentals() const { return fundamentals_; }
  const CounselorRulebases& rulebases() const { return rulebases_; }
  bool has_forecasts() const { return with_forecasts_; }

  /// Universe symbols present in the price file, in universe order.
  const std::vector<std::string>& symbols() const { return symbols_; }
  /// Throws NotFound for symbols outside the loaded universe.
  const StockArtifacts& stock(const std::string& symbol) const;

  /// Symbols used for weight suggestion, with the reason for every exclusion.
  const std::vector<std::string>& investable() const { return investable_; }
  const std::map<std::string, std::string>& excluded() const { return excluded_; }

  /// Returns panel over the investable symbols; fundamentals are the most
  /// recent record with year <= the year of `as_of`.
  MarketPanel panel(Date as_of) const;

  ForecastParams forecast_params(Index dma) const;
  /// Per-stock metrics; SP reuses the cached forecasts, NSP retrains without smoothing.
  std::vector<MetricReport> table(SmoothingMode mode) const;

  /// Calendar day index for `date`; throws NotFound.
  Index day_index(Date date) const;
  /// Latest day with forecasts for every investable stock and enough history
  /// for the covariance window.
  Index latest_decision_day() const;

 private:
  RunConfig config_;
  std::string fingerprint_;
  bool with_forecasts_ = false;
  std::vector<Date> calendar_;
  std::vector<std::string> not_found_;
  std::set<std::string> incomplete_;
  FundamentalIngest fundamentals_;
  CounselorRulebases rulebases_;
  std::vector<std::string> symbols_;
  std::map<std::string, StockArtifacts> stocks_;
  std::vector<std::string> investable_;
  std::map<std::string, std::string> excluded_;
  MarketPanel base_panel_;
};

}  // namespace aic
