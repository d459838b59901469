#pragma once

// Next-day highest-price forecasting: windowed feature construction, SVR
// training, walk-forward evaluation and grid search over (dp, C, gamma).

#include "aic/indicators.hpp"
#include "aic/market_data.hpp"
#include "aic/svr.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace aic {

inline constexpr Index kChannelCount = 7;
inline constexpr Index kDefaultMovingAverage = 50;
inline constexpr Index kDefaultPredictionWindow = 5;

/// Channel order inside a feature window; each channel contributes dp
/// consecutive days, oldest first.
enum class Channel : int { kOpen, kClose, kHigh, kLow, kVolume, kAdx, kSar };

struct ForecastParams {
  Index dp = kDefaultPredictionWindow;
  Index dma = kDefaultMovingAverage;
  Index tau = kDefaultTau;
  SvrParams svr{};
};

struct FeatureWindow {
  Eigen::VectorXd values;
  Index target_day = 0;
};

/// One sample per usable day t: features from the dp days ending at t, target
/// is the smoothed high of day t + 1 normalized with the statistics of the
/// high channel's window ending at t (known when the forecast is made).
struct TrainingSet {
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;
  std::vector<Index> target_days;
  std::vector<NormalizationState<double>> target_states;
  /// Smoothed high over the whole series (NaN before dma - 1).
  Eigen::VectorXd smoothed_high;
  Index dp = 0;

  Index size() const { return features.rows(); }
  FeatureWindow window(Index k) const { return {features.row(k).transpose(), target_days[static_cast<std::size_t>(k)]}; }
};

/// First day index usable as the last input day of a feature window.
Index first_window_end(Index dp, Index dma, Index tau);

TrainingSet build_training_set(const PriceSeries& prices, const IndicatorSeries& indicators, Index dp, Index dma,
                               Index tau = kDefaultTau);

struct Prediction {
  double normalized = 0;
  double price = 0;
};

Prediction predict(const SvrModel& model, const FeatureWindow& window, const NormalizationState<double>& state);

struct ForecastResult {
  std::string symbol;
  std::vector<Index> target_days;
  std::vector<Date> dates;
  /// Smoothed high actually observed on each target day.
  Eigen::VectorXd actual;
  Eigen::VectorXd predictions;
  Eigen::VectorXd normalized_predictions;
  std::vector<NormalizationState<double>> states;
  /// Predicted return into each target day from consecutive predictions.
  Eigen::VectorXd expected_return;
  /// Realized return into each target day.
  Eigen::VectorXd actual_return;
  Index training_samples = 0;
  SvrTrainReport training;
};

/// Trains on the first `split` fraction of samples and predicts every
/// remaining sample from its trailing window. The prediction for the sample
/// preceding the first test target anchors the first expected return.
ForecastResult walk_forward_forecast(const PriceSeries& prices, const IndicatorSeries& indicators, double split,
                                     const ForecastParams& params, SvrModel* model_out = nullptr);

/// Same as above on a prebuilt training set.
ForecastResult walk_forward_forecast(const TrainingSet& set, const std::string& symbol,
                                     const std::vector<Date>& days, double split, const SvrParams& svr,
                                     SvrModel* model_out = nullptr);

struct TuningGrid {
  std::vector<Index> dp{5, 10, 15, 20, 25, 30, 35, 40};
  std::vector<double> c{0.1, 10, 100, 1000};
  std::vector<double> gamma{0.1, 0.01, 0.001, 0.0001};
};

struct TuningCell {
  Index dp = 0;
  double c = 0;
  double gamma = 0;
  double mean_hit_rate = 0;
  std::vector<double> hit_rates;
  /// Stocks skipped for this cell (training failed or too short).
  std::vector<std::string> failures;
};

struct TuningResult {
  TuningCell best;
  std::vector<TuningCell> cells;
};

struct TuningStock {
  const PriceSeries* prices = nullptr;
  const IndicatorSeries* indicators = nullptr;
};

/// Validation protocol: the last `validation_fraction` of the training split
/// is held out. Winner maximizes mean validation hit rate; ties prefer the
/// smallest dp, then the largest C, then the smallest gamma.
TuningResult tune_hyperparameters(const TuningGrid& grid, const std::vector<TuningStock>& stocks,
                                  const ForecastParams& base, double split = 0.8, double validation_fraction = 0.2,
                                  unsigned threads = 0);

}  // namespace aic
