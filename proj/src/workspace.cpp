#include "aic/workspace.hpp"

#include "aic/log.hpp"
#include "aic/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aic {

namespace {

constexpr double kNa = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd returns_into_day(const Eigen::VectorXd& prices) {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(prices.size(), kNa);
  for (Index d = 1; d < prices.size(); ++d) {
    if (std::isfinite(prices[d - 1]) && prices[d - 1] > 0) out[d] = (prices[d] - prices[d - 1]) / prices[d - 1];
  }
  return out;
}

}  // namespace

Workspace::Workspace(RunConfig config, bool forecasts) : config_(std::move(config)), with_forecasts_(forecasts) {
  config_.validate();
  fingerprint_ = config_.fingerprint();
  rulebases_ = CounselorRulebases::load(config_.rulebase);

  auto prices = ingest_prices(config_.prices_path(), config_.universe);
  calendar_ = prices.calendar;
  not_found_ = prices.not_found;
  incomplete_ = prices.incomplete;
  for (const auto& s : not_found_) log::warn("symbol_not_found", {{"symbol", s}});

  if (std::filesystem::exists(config_.fundamentals_path())) {
    fundamentals_ = ingest_fundamentals(config_.fundamentals_path(), config_.universe, config_.fundamental_years);
  } else {
    log::warn("fundamentals_missing", {{"path", config_.fundamentals_path().string()}});
    for (const auto& s : config_.universe) fundamentals_.flagged[s] = "no fundamentals file";
  }

  for (const auto& s : config_.universe) {
    auto it = prices.series.find(s);
    if (it == prices.series.end()) continue;
    symbols_.push_back(s);
    StockArtifacts a;
    a.prices = std::move(it->second);
    a.indicators = indicator_pipeline(a.prices, config_.tau);
    stocks_.emplace(s, std::move(a));
  }

  if (with_forecasts_) {
    const ForecastParams params = forecast_params(config_.dma);
    std::vector<StockArtifacts*> work;
    for (const auto& s : symbols_) work.push_back(&stocks_.at(s));
    parallel_for(work.size(), config_.threads, [&](std::size_t i) {
      StockArtifacts& a = *work[i];
      try {
        a.forecast = walk_forward_forecast(a.prices, a.indicators, config_.split, params);
      } catch (const std::exception& e) {
        a.forecast_error = e.what();
      }
    });
    for (const auto& s : symbols_) {
      const auto& a = stocks_.at(s);
      if (a.forecast) {
        log::info("forecast_ready", {{"symbol", s},
                                     {"test_days", a.forecast->predictions.size()},
                                     {"svr_iterations", a.forecast->training.iterations}});
      } else {
        log::warn("forecast_failed", {{"symbol", s}, {"error", a.forecast_error}});
      }
    }
  }

  for (const auto& s : config_.universe) {
    if (std::find(not_found_.begin(), not_found_.end(), s) != not_found_.end()) {
      excluded_[s] = "not in price file";
    } else if (incomplete_.contains(s)) {
      excluded_[s] = "incomplete time series";
    } else if (auto f = fundamentals_.flagged.find(s); f != fundamentals_.flagged.end()) {
      excluded_[s] = f->second;
    } else if (with_forecasts_ && !stocks_.at(s).forecast) {
      excluded_[s] = "no forecast: " + stocks_.at(s).forecast_error;
    } else {
      investable_.push_back(s);
    }
  }

  const Index days = static_cast<Index>(calendar_.size());
  const Index n = static_cast<Index>(investable_.size());
  base_panel_.symbols = investable_;
  base_panel_.calendar = calendar_;
  base_panel_.realized = Eigen::MatrixXd::Constant(days, n, kNa);
  base_panel_.expected = Eigen::MatrixXd::Constant(days, n, kNa);
  for (Index i = 0; i < n; ++i) {
    const auto& a = stocks_.at(investable_[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd basis = config_.return_basis == "raw"
                                      ? a.prices.high
                                      : moving_average(a.prices.high, config_.dma).values;
    base_panel_.realized.col(i) = returns_into_day(basis);
    if (a.forecast) {
      for (std::size_t k = 0; k < a.forecast->target_days.size(); ++k) {
        base_panel_.expected(a.forecast->target_days[k], i) = a.forecast->expected_return[static_cast<Index>(k)];
      }
    }
  }
}

const StockArtifacts& Workspace::stock(const std::string& symbol) const {
  const auto it = stocks_.find(symbol);
  if (it == stocks_.end()) throw NotFound("symbol " + symbol);
  return it->second;
}

MarketPanel Workspace::panel(Date as_of) const {
  MarketPanel p = base_panel_;
  const Index n = p.stocks();
  p.fundamentals.resize(n, kFundamentalCount);
  for (Index i = 0; i < n; ++i) {
    const auto& sym = investable_[static_cast<std::size_t>(i)];
    const auto it = fundamentals_.records.find(sym);
    const FundamentalRecord* rec = it == fundamentals_.records.end() ? nullptr : latest_fundamentals(it->second, as_of.year());
    if (rec == nullptr) {
      throw DataIntegrityError(sym + ": no fundamentals for " + std::to_string(as_of.year()) + " or earlier");
    }
    for (int k = 0; k < kFundamentalCount; ++k) p.fundamentals(i, k) = rec->features[static_cast<std::size_t>(k)];
  }
  return p;
}

ForecastParams Workspace::forecast_params(Index dma) const {
  ForecastParams p;
  p.dp = config_.dp;
  p.dma = dma;
  p.tau = config_.tau;
  p.svr.c = config_.c;
  p.svr.gamma = config_.gamma;
  p.svr.epsilon = config_.epsilon;
  return p;
}

std::vector<MetricReport> Workspace::table(SmoothingMode mode) const {
  std::vector<std::optional<MetricReport>> slots(symbols_.size());
  const ForecastParams nsp = forecast_params(1);
  parallel_for(symbols_.size(), config_.threads, [&](std::size_t i) {
    const auto& a = stocks_.at(symbols_[i]);
    try {
      if (mode == SmoothingMode::kSp) {
        if (a.forecast) slots[i] = metric_report(*a.forecast, mode);
      } else {
        slots[i] = metric_report(walk_forward_forecast(a.prices, a.indicators, config_.split, nsp), mode);
      }
    } catch (const std::exception& e) {
      log::warn("report_failed", {{"symbol", symbols_[i]}, {"mode", to_string(mode)}, {"error", e.what()}});
    }
  });
  std::vector<MetricReport> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

Index Workspace::day_index(Date date) const {
  const auto it = std::lower_bound(calendar_.begin(), calendar_.end(), date);
  if (it == calendar_.end() || *it != date) throw NotFound("trading day " + to_string(date));
  return static_cast<Index>(it - calendar_.begin());
}

Index Workspace::latest_decision_day() const {
  for (Index d = base_panel_.days() - 1; d >= config_.dc; --d) {
    if (base_panel_.stocks() > 0 && base_panel_.expected.row(d).allFinite()) return d;
  }
  throw InsufficientHistory("no day has forecasts for every investable stock");
}

}  // namespace aic
