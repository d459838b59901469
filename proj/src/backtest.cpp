#include "aic/backtest.hpp"

#include "aic/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aic {

namespace {

int sign(double x) { return (x > 0) - (x < 0); }

constexpr double kNa = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double hit_rate(const Eigen::VectorXd& predicted_returns, const Eigen::VectorXd& actual_returns) {
  if (predicted_returns.size() != actual_returns.size()) throw InvalidArgument("hit rate inputs differ in length");
  if (predicted_returns.size() == 0) throw InvalidArgument("hit rate of an empty series");
  if ((actual_returns.array() == 0).all()) return kNa;
  Index hits = 0;
  for (Index t = 0; t < actual_returns.size(); ++t) hits += sign(predicted_returns[t]) == sign(actual_returns[t]);
  return 100.0 * static_cast<double>(hits) / static_cast<double>(actual_returns.size());
}

std::string_view to_string(SmoothingMode mode) { return mode == SmoothingMode::kNsp ? "NSP" : "SP"; }

MetricReport error_metrics(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
  if (actual.size() != predicted.size()) throw InvalidArgument("metric inputs differ in length");
  if (actual.size() == 0) throw InvalidArgument("metrics of an empty series");
  MetricReport r;
  r.days = actual.size();
  const Eigen::ArrayXd diff = (actual - predicted).array();
  r.mae = diff.abs().mean();
  r.rmse = std::sqrt(diff.square().mean());
  double sum = 0;
  Index used = 0;
  for (Index t = 0; t < actual.size(); ++t) {
    if (actual[t] == 0) {
      ++r.mape_skipped;
      continue;
    }
    sum += std::abs(diff[t] / actual[t]);
    ++used;
  }
  r.mape = used > 0 ? 100.0 * sum / static_cast<double>(used) : kNa;
  return r;
}

MetricReport metric_report(const ForecastResult& forecast, SmoothingMode mode) {
  MetricReport r = error_metrics(forecast.actual, forecast.predictions);
  r.symbol = forecast.symbol;
  r.mode = mode;
  r.hr = hit_rate(forecast.expected_return, forecast.actual_return);
  return r;
}

const std::vector<ReferenceRow>& reference_table() {
  // Published NSP/SP figures; tp_hr is the external trend-prediction baseline.
  static const std::vector<ReferenceRow> rows{
      {"AAPL", 61.16, 1.058, 1.483, 0.99, 91.59, 57.58}, {"AIG", 55.36, 0.410, 0.710, 0.84, 92.17, 58.79},
      {"AMZN", 57.68, 7.973, 11.085, 1.23, 93.33, 56.21}, {"BA", 60.00, 1.310, 1.748, 0.97, 85.50, 60.15},
      {"CAT", 60.29, 0.848, 1.150, 1.12, 88.69, kNa},     {"COF", 58.26, 0.757, 1.018, 1.04, 95.65, 57.12},
      {"EBAY", 56.81, 0.291, 0.474, 1.07, 89.56, 59.70},  {"F", 61.45, 0.131, 0.190, 1.00, 86.08, kNa},
      {"FDX", 58.26, 1.517, 2.227, 0.97, 93.04, 59.55},   {"GE", 53.33, 0.228, 0.320, 0.78, 92.17, 61.21},
      {"GM", 61.46, 0.332, 0.455, 1.04, 83.76, kNa},      {"GOOG", 57.97, 6.676, 9.707, 0.92, 89.70, 58.33},
      {"HD", 56.52, 1.086, 1.478, 0.85, 92.75, 59.70},    {"IBM", 55.94, 1.178, 1.681, 0.80, 92.46, kNa},
      {"JNJ", 52.75, 0.613, 0.889, 0.56, 93.04, 56.52},   {"JPM", 56.23, 0.598, 0.879, 0.92, 94.49, 61.67},
      {"KO", 54.49, 0.236, 0.333, 0.55, 90.14, 59.24},    {"MSFT", 53.62, 0.461, 0.708, 0.87, 89.27, 59.09},
      {"NKE", 60.00, 0.598, 0.834, 1.02, 90.14, 60.61},   {"ORCL", 58.26, 0.286, 0.408, 0.74, 93.91, 58.94},
      {"PEP", 57.68, 0.579, 0.802, 0.57, 88.98, 59.39},   {"T", 57.68, 0.229, 0.313, 0.61, 93.91, 58.64},
      {"WMT", 56.52, 0.502, 0.799, 0.75, 94.49, 60.91},   {"XOM", 54.49, 0.669, 0.885, 0.80, 93.62, 60.45},
      {"XRX", 60.00, 0.110, 0.160, 1.10, 85.50, kNa},
  };
  return rows;
}

const ReferenceRow* find_reference(std::string_view symbol) {
  for (const auto& row : reference_table()) {
    if (row.symbol == symbol) return &row;
  }
  return nullptr;
}

std::vector<std::string> default_universe() {
  std::vector<std::string> out;
  for (const auto& row : reference_table()) out.emplace_back(row.symbol);
  return out;
}

namespace {

void write_number(std::ostream& out, double v) {
  if (std::isfinite(v)) out << v;
}

}  // namespace

void write_table_report(std::ostream& out, const std::vector<MetricReport>& reports) {
  out << "symbol,mode,days,hr,mae,rmse,mape,mape_skipped,ref_hr,ref_mae,ref_rmse,ref_mape,ref_tp_hr\n";
  out.precision(10);
  for (const auto& r : reports) {
    out << csv::escape(r.symbol) << ',' << to_string(r.mode) << ',' << r.days << ',';
    write_number(out, r.hr);
    out << ',' << r.mae << ',' << r.rmse << ',';
    write_number(out, r.mape);
    out << ',' << r.mape_skipped;
    const ReferenceRow* ref = find_reference(r.symbol);
    const bool nsp = r.mode == SmoothingMode::kNsp;
    const double hr = ref ? (nsp ? ref->nsp_hr : ref->sp_hr) : kNa;
    const double mae = ref && nsp ? ref->nsp_mae : kNa;
    const double rmse = ref && nsp ? ref->nsp_rmse : kNa;
    const double mape = ref && nsp ? ref->nsp_mape : kNa;
    const double tp = ref ? ref->tp_hr : kNa;
    for (double v : {hr, mae, rmse, mape, tp}) {
      out << ',';
      write_number(out, v);
    }
    out << '\n';
  }
}

Index MarketPanel::day_index(Date date) const {
  const auto it = std::lower_bound(calendar.begin(), calendar.end(), date);
  if (it == calendar.end() || *it != date) throw NotFound("date " + to_string(date));
  return static_cast<Index>(it - calendar.begin());
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kPortfolio: return "portfolio";
    case Strategy::kFic: return "fic";
    case Strategy::kRandom: return "random";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "portfolio") return Strategy::kPortfolio;
  if (text == "fic") return Strategy::kFic;
  if (text == "random") return Strategy::kRandom;
  throw InvalidArgument("unknown method '" + std::string(text) + "' (portfolio, fic or random)");
}

Eigen::VectorXd random_simplex_point(Index n, std::mt19937_64& rng) {
  if (n < 1) throw InvalidArgument("simplex dimension must be >= 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> cuts(static_cast<std::size_t>(n - 1));
  for (double& c : cuts) c = unit(rng);
  std::sort(cuts.begin(), cuts.end());
  Eigen::VectorXd w(n);
  double previous = 0;
  for (Index i = 0; i + 1 < n; ++i) {
    w[i] = cuts[static_cast<std::size_t>(i)] - previous;
    previous = cuts[static_cast<std::size_t>(i)];
  }
  w[n - 1] = 1.0 - previous;
  return w / w.sum();
}

namespace {

void check_day(const MarketPanel& panel, Index day) {
  if (day < 0 || day >= panel.days()) {
    throw NotFound("day " + std::to_string(day) + " outside the " + std::to_string(panel.days()) + "-day calendar");
  }
}

Eigen::VectorXd expected_row(const MarketPanel& panel, Index day) {
  check_day(panel, day);
  const Eigen::VectorXd e = panel.expected.row(day).transpose();
  if (!e.allFinite()) {
    throw DataIntegrityError("no forecast for every stock on " + to_string(panel.calendar[static_cast<std::size_t>(day)]));
  }
  return e;
}

Eigen::MatrixXd covariance_before(const MarketPanel& panel, Index day, Index window) {
  check_day(panel, day);
  if (day - window < 0) {
    throw InsufficientHistory(to_string(panel.calendar[static_cast<std::size_t>(day)]) + " has " +
                              std::to_string(day) + " earlier days, covariance window needs " + std::to_string(window));
  }
  try {
    return estimate_covariance(panel.realized, window, day - 1).matrix;
  } catch (const DataIntegrityError& e) {
    throw DataIntegrityError(to_string(panel.calendar[static_cast<std::size_t>(day)]) + ": " + e.what());
  }
}

}  // namespace

Eigen::VectorXd portfolio_weights(const MarketPanel& panel, Index day, double eta, Index covariance_window,
                                  const GeometricSchedule<double>& schedule) {
  const Eigen::VectorXd e = expected_row(panel, day);
  const Eigen::MatrixXd s = covariance_before(panel, day, covariance_window);
  const auto frontier = sweep_frontier<double>(s, e, schedule);
  return select_by_risk_tolerance(frontier, eta).weights;
}

CounselorOutput fic_weights(const MarketPanel& panel, Index day, double eta, Index covariance_window,
                            const CounselorRulebases& rulebases, const Eigen::VectorXd& coefficients) {
  const Eigen::VectorXd e = expected_row(panel, day);
  const Eigen::MatrixXd s = covariance_before(panel, day, covariance_window);
  return run_counselor(technical_inputs(e, s, eta), panel.fundamentals, coefficients, rulebases);
}

BacktestLedger run_backtest(const MarketPanel& panel, const BacktestOptions& options) {
  if (options.horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (!(options.eta >= 0 && options.eta <= 1)) throw InvalidArgument("eta must lie in [0, 1]");
  if (options.strategy == Strategy::kFic && options.rulebases == nullptr) {
    throw InvalidArgument("fic strategy needs rulebases");
  }
  check_day(panel, options.start_day);
  check_day(panel, options.start_day + options.horizon - 1);

  BacktestLedger ledger;
  ledger.strategy = options.strategy;
  ledger.budget.push_back(options.initial_budget);
  std::mt19937_64 rng(options.seed);
  for (Index k = 0; k < options.horizon; ++k) {
    const Index day = options.start_day + k;
    const Date date = panel.calendar[static_cast<std::size_t>(day)];
    const Eigen::VectorXd e = expected_row(panel, day);
    const Eigen::VectorXd realized = panel.realized.row(day).transpose();
    if (!realized.allFinite()) throw DataIntegrityError("missing realized return on " + to_string(date));

    Eigen::VectorXd w;
    switch (options.strategy) {
      case Strategy::kPortfolio:
        w = portfolio_weights(panel, day, options.eta, options.covariance_window, options.schedule);
        break;
      case Strategy::kFic:
        w = fic_weights(panel, day, options.eta, options.covariance_window, *options.rulebases, options.coefficients)
                .weights;
        break;
      case Strategy::kRandom:
        w = random_simplex_point(panel.stocks(), rng);
        break;
    }
    const double expected = w.dot(e);
    const double r = w.dot(realized);
    const bool invest = !(expected < 0);
    const double b = ledger.budget.back();
    ledger.days.push_back(date);
    ledger.weights.push_back(w);
    ledger.expected_return.push_back(expected);
    ledger.realized_return.push_back(r);
    ledger.invested.push_back(invest);
    ledger.budget.push_back(invest ? b * (1 + r) : b);
  }
  return ledger;
}

void write_ledger_csv(std::ostream& out, const BacktestLedger& ledger, const std::vector<std::string>& symbols) {
  out << "date";
  for (const auto& s : symbols) out << ",w_" << csv::escape(s);
  out << ",expected_r,realized_r,invested,budget\n";
  out.precision(17);
  for (std::size_t k = 0; k < ledger.days.size(); ++k) {
    out << to_string(ledger.days[k]);
    for (Index i = 0; i < ledger.weights[k].size(); ++i) out << ',' << ledger.weights[k][i];
    out << ',' << ledger.expected_return[k] << ',' << ledger.realized_return[k] << ','
        << (ledger.invested[k] ? 1 : 0) << ',' << ledger.budget[k + 1] << '\n';
  }
}

}  // namespace aic
