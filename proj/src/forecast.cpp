#include "aic/forecast.hpp"

#include "aic/backtest.hpp"
#include "aic/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>

namespace aic {

Index first_window_end(Index dp, Index dma, Index tau) {
  return std::max(dma - 1, 2 * tau + 1) + 2 * dp - 1;
}

TrainingSet build_training_set(const PriceSeries& prices, const IndicatorSeries& indicators, Index dp, Index dma,
                               Index tau) {
  if (dp < 1) throw InvalidArgument("prediction window must be >= 1");
  if (dma < 1) throw InvalidArgument("moving average window must be >= 1");
  const Index n = prices.size();
  const Index t0 = first_window_end(dp, dma, tau);
  if (n < t0 + 2) {
    throw InsufficientHistory(prices.symbol + " has " + std::to_string(n) + " days, needs " +
                              std::to_string(t0 + 2) + " (short by " + std::to_string(t0 + 2 - n) + ")");
  }
  if (indicators.adx.size() != n || indicators.sar.size() != n) {
    throw InvalidArgument("indicator series not aligned with prices");
  }

  const std::array<const Eigen::VectorXd*, 5> technical{&prices.open, &prices.close, &prices.high, &prices.low,
                                                        &prices.volume};
  std::array<NormalizedSeries<double>, kChannelCount> channels;
  Eigen::VectorXd smoothed_high;
  for (std::size_t c = 0; c < technical.size(); ++c) {
    const auto smoothed = moving_average(*technical[c], dma);
    channels[c] = zscore_normalize(smoothed.values, dp, smoothed.source_offset);
    if (c == static_cast<std::size_t>(Channel::kHigh)) smoothed_high = smoothed.values;
  }
  channels[static_cast<std::size_t>(Channel::kAdx)] = zscore_normalize(indicators.adx, dp, indicators.valid_from);
  channels[static_cast<std::size_t>(Channel::kSar)] = zscore_normalize(indicators.sar, dp, indicators.valid_from);

  const auto& high = channels[static_cast<std::size_t>(Channel::kHigh)];
  const Index count = n - 1 - t0;
  TrainingSet set;
  set.dp = dp;
  set.smoothed_high = smoothed_high;
  set.features.resize(count, kChannelCount * dp);
  set.targets.resize(count);
  set.target_days.reserve(static_cast<std::size_t>(count));
  set.target_states.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) {
    const Index t = t0 + k;
    for (Index c = 0; c < kChannelCount; ++c) {
      set.features.row(k).segment(c * dp, dp) =
          channels[static_cast<std::size_t>(c)].values.segment(t - dp + 1, dp).transpose();
    }
    const auto& state = high.states[static_cast<std::size_t>(t)];
    set.targets[k] = normalize(smoothed_high[t + 1], state);
    set.target_days.push_back(t + 1);
    set.target_states.push_back(state);
  }
  if (!set.features.allFinite() || !set.targets.allFinite()) {
    throw DataIntegrityError(prices.symbol + ": non-finite feature values");
  }
  return set;
}

Prediction predict(const SvrModel& model, const FeatureWindow& window, const NormalizationState<double>& state) {
  const double normalized = model.predict(window.values);
  return {normalized, denormalize(normalized, state)};
}

namespace {

Index training_count(Index samples, double split) {
  if (!(split > 0 && split < 1)) throw InvalidArgument("split must lie in (0, 1)");
  const auto n = static_cast<Index>(std::floor(split * static_cast<double>(samples) + 1e-9));
  if (n < 2 || n >= samples) {
    throw InsufficientHistory("split " + std::to_string(split) + " of " + std::to_string(samples) +
                              " samples leaves no usable train/test partition");
  }
  return n;
}

// Predicts rows [first - 1, last) so every row in [first, last) has a
// preceding prediction for its expected return.
ForecastResult predict_rows(const TrainingSet& set, const SvrModel& model, Index first, Index last,
                            const std::string& symbol, const std::vector<Date>& days) {
  ForecastResult out;
  out.symbol = symbol;
  const Index m = last - first;
  out.actual.resize(m);
  out.predictions.resize(m);
  out.normalized_predictions.resize(m);
  out.expected_return.resize(m);
  out.actual_return.resize(m);
  double previous = predict(model, set.window(first - 1), set.target_states[static_cast<std::size_t>(first - 1)]).price;
  for (Index k = 0; k < m; ++k) {
    const Index row = first + k;
    const Index day = set.target_days[static_cast<std::size_t>(row)];
    const auto p = predict(model, set.window(row), set.target_states[static_cast<std::size_t>(row)]);
    out.target_days.push_back(day);
    if (!days.empty()) out.dates.push_back(days[static_cast<std::size_t>(day)]);
    out.states.push_back(set.target_states[static_cast<std::size_t>(row)]);
    out.actual[k] = set.smoothed_high[day];
    out.predictions[k] = p.price;
    out.normalized_predictions[k] = p.normalized;
    out.expected_return[k] = (p.price - previous) / previous;
    out.actual_return[k] = (set.smoothed_high[day] - set.smoothed_high[day - 1]) / set.smoothed_high[day - 1];
    previous = p.price;
  }
  return out;
}

}  // namespace

ForecastResult walk_forward_forecast(const TrainingSet& set, const std::string& symbol,
                                     const std::vector<Date>& days, double split, const SvrParams& svr,
                                     SvrModel* model_out) {
  const Index n_train = training_count(set.size(), split);
  SvrTrainReport report;
  const SvrModel model =
      train_svr(set.features.topRows(n_train), set.targets.head(n_train), svr, &report);
  auto out = predict_rows(set, model, n_train, set.size(), symbol, days);
  out.training_samples = n_train;
  out.training = std::move(report);
  if (model_out) *model_out = model;
  return out;
}

ForecastResult walk_forward_forecast(const PriceSeries& prices, const IndicatorSeries& indicators, double split,
                                     const ForecastParams& params, SvrModel* model_out) {
  const auto set = build_training_set(prices, indicators, params.dp, params.dma, params.tau);
  return walk_forward_forecast(set, prices.symbol, prices.days, split, params.svr, model_out);
}

namespace {

bool better_cell(const TuningCell& a, const TuningCell& b) {
  if (a.mean_hit_rate != b.mean_hit_rate) return a.mean_hit_rate > b.mean_hit_rate;
  if (a.dp != b.dp) return a.dp < b.dp;
  if (a.c != b.c) return a.c > b.c;
  return a.gamma < b.gamma;
}

}  // namespace

TuningResult tune_hyperparameters(const TuningGrid& grid, const std::vector<TuningStock>& stocks,
                                  const ForecastParams& base, double split, double validation_fraction,
                                  unsigned threads) {
  if (grid.dp.empty() || grid.c.empty() || grid.gamma.empty()) throw InvalidArgument("empty tuning grid");
  const std::size_t n_c = grid.c.size();
  const std::size_t n_g = grid.gamma.size();
  const std::size_t cells = grid.dp.size() * n_c * n_g;

  TuningResult result;
  result.cells.resize(cells);
  for (std::size_t a = 0; a < grid.dp.size(); ++a) {
    for (std::size_t b = 0; b < n_c; ++b) {
      for (std::size_t g = 0; g < n_g; ++g) {
        auto& cell = result.cells[(a * n_c + b) * n_g + g];
        cell.dp = grid.dp[a];
        cell.c = grid.c[b];
        cell.gamma = grid.gamma[g];
        cell.hit_rates.assign(stocks.size(), std::nan(""));
      }
    }
  }

  std::mutex failures_mutex;
  auto evaluate_stock = [&](std::size_t s) {
    const auto& stock = stocks[s];
    for (std::size_t a = 0; a < grid.dp.size(); ++a) {
      auto fail_all = [&](const std::string& why) {
        std::lock_guard lock(failures_mutex);
        for (std::size_t k = 0; k < n_c * n_g; ++k) {
          result.cells[a * n_c * n_g + k].failures.push_back(stock.prices->symbol + ": " + why);
        }
      };
      TrainingSet set;
      Index n_fit = 0, n_train = 0;
      try {
        set = build_training_set(*stock.prices, *stock.indicators, grid.dp[a], base.dma, base.tau);
        n_train = training_count(set.size(), split);
        n_fit = training_count(n_train, 1.0 - validation_fraction);
      } catch (const Error& e) {
        fail_all(e.what());
        continue;
      }
      const Eigen::MatrixXd fit_x = set.features.topRows(n_fit);
      const Eigen::VectorXd fit_y = set.targets.head(n_fit);
      for (std::size_t g = 0; g < n_g; ++g) {
        const Eigen::MatrixXd gram = rbf_gram(fit_x, grid.gamma[g]);
        for (std::size_t b = 0; b < n_c; ++b) {
          auto& cell = result.cells[(a * n_c + b) * n_g + g];
          SvrParams svr = base.svr;
          svr.c = grid.c[b];
          svr.gamma = grid.gamma[g];
          try {
            const SvrModel model = train_svr(fit_x, gram, fit_y, svr);
            const auto val = predict_rows(set, model, n_fit, n_train, stock.prices->symbol, {});
            cell.hit_rates[s] = hit_rate(val.expected_return, val.actual_return);
          } catch (const Error& e) {
            std::lock_guard lock(failures_mutex);
            cell.failures.push_back(stock.prices->symbol + ": " + e.what());
          }
        }
      }
    }
  };

  parallel_for(stocks.size(), threads, evaluate_stock);

  bool have_best = false;
  for (auto& cell : result.cells) {
    double sum = 0;
    int count = 0;
    for (double hr : cell.hit_rates) {
      if (std::isfinite(hr)) {
        sum += hr;
        ++count;
      }
    }
    cell.mean_hit_rate = count > 0 ? sum / count : -1.0;
    if (!have_best || better_cell(cell, result.best)) {
      result.best = cell;
      have_best = true;
    }
  }
  return result;
}

}  // namespace aic
