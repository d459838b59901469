#include "aic/api.hpp"

#include "aic/portfolio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>

namespace aic {

namespace {

using json = nlohmann::json;

void allow_only(const Query& q, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : q) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) {
      std::string list;
      for (const char* key : keys) list += (list.empty() ? "" : ", ") + std::string(key);
      throw InvalidArgument("unknown parameter '" + k + "' (accepted: " + (list.empty() ? "none" : list) + ")");
    }
  }
}

std::optional<std::string> param(const Query& q, const char* key) {
  const auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

double number_param(const Query& q, const char* key, double fallback) {
  const auto v = param(q, key);
  if (!v) return fallback;
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size() || !std::isfinite(out)) {
    throw InvalidArgument("parameter '" + std::string(key) + "' must be a number, got '" + *v + "'");
  }
  return out;
}

long long integer_param(const Query& q, const char* key, long long fallback) {
  const auto v = param(q, key);
  if (!v) return fallback;
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw InvalidArgument("parameter '" + std::string(key) + "' must be an integer, got '" + *v + "'");
  }
  return out;
}

std::optional<Date> date_param(const Query& q, const char* key) {
  const auto v = param(q, key);
  if (!v) return std::nullopt;
  try {
    return parse_date(*v);
  } catch (const InvalidArgument&) {
    throw InvalidArgument("parameter '" + std::string(key) + "' must be a YYYY-MM-DD date, got '" + *v + "'");
  }
}

double eta_param(const Query& q, double fallback) {
  const double eta = number_param(q, "eta", fallback);
  if (!(eta >= 0 && eta <= 1)) throw InvalidArgument("eta must lie in [0, 1]");
  return eta;
}

json weights_json(const std::vector<std::string>& symbols, const Eigen::VectorXd& w) {
  json out = json::array();
  for (Index i = 0; i < w.size(); ++i) out.push_back({{"symbol", symbols[static_cast<std::size_t>(i)]}, {"weight", w[i]}});
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

CounselorApi::CounselorApi(std::shared_ptr<const Workspace> workspace) : workspace_(std::move(workspace)) {
  if (!workspace_) throw InvalidArgument("api needs a workspace");
}

json CounselorApi::handle(const std::string& endpoint, const Query& query) const {
  if (endpoint == "stocks") return stocks(query);
  if (endpoint == "forecast") return forecast(query);
  if (endpoint == "frontier") return frontier(query);
  if (endpoint == "recommend") return recommend(query);
  if (endpoint == "backtest") return backtest(query);
  throw NotFound("endpoint " + endpoint);
}

json CounselorApi::stocks(const Query& query) const {
  allow_only(query, {});
  const Workspace& ws = *workspace_;
  json list = json::array();
  for (const auto& s : ws.symbols()) {
    const auto& a = ws.stock(s);
    json row{{"symbol", s},
             {"days", a.prices.size()},
             {"first", to_string(a.prices.days.front())},
             {"last", to_string(a.prices.days.back())},
             {"incomplete", ws.incomplete().contains(s)},
             {"forecast", a.forecast.has_value()}};
    const auto flag = ws.fundamentals().flagged.find(s);
    row["fundamentals"] = flag == ws.fundamentals().flagged.end() ? json("ok") : json(flag->second);
    const auto ex = ws.excluded().find(s);
    row["investable"] = ex == ws.excluded().end();
    if (ex != ws.excluded().end()) row["excluded"] = ex->second;
    list.push_back(row);
  }
  return {{"fingerprint", ws.fingerprint()},
          {"universe", ws.config().universe},
          {"investable", ws.investable()},
          {"not_found", ws.not_found()},
          {"stocks", list}};
}

json CounselorApi::forecast(const Query& query) const {
  allow_only(query, {"symbol", "from", "to"});
  const auto symbol = param(query, "symbol");
  if (!symbol) throw InvalidArgument("parameter 'symbol' is required");
  const auto from = date_param(query, "from");
  const auto to = date_param(query, "to");
  const Workspace& ws = *workspace_;
  const auto& a = ws.stock(*symbol);
  if (!a.forecast) throw InsufficientHistory(*symbol + " has no forecast: " + a.forecast_error);
  const auto& f = *a.forecast;
  json rows = json::array();
  for (std::size_t k = 0; k < f.dates.size(); ++k) {
    if (from && f.dates[k] < *from) continue;
    if (to && *to < f.dates[k]) continue;
    const Index i = static_cast<Index>(k);
    rows.push_back({{"date", to_string(f.dates[k])},
                    {"actual", f.actual[i]},
                    {"predicted", f.predictions[i]},
                    {"expected_return", f.expected_return[i]},
                    {"actual_return", f.actual_return[i]}});
  }
  const MetricReport m = metric_report(f, SmoothingMode::kSp);
  return {{"fingerprint", ws.fingerprint()},
          {"symbol", *symbol},
          {"dma", ws.config().dma},
          {"dp", ws.config().dp},
          {"training_samples", f.training_samples},
          {"metrics", {{"hr", m.hr}, {"mae", m.mae}, {"rmse", m.rmse}, {"mape", m.mape}, {"days", m.days}}},
          {"rows", rows}};
}

namespace {

Index decision_day(const Workspace& ws, const std::optional<Date>& date) {
  if (!ws.has_forecasts()) throw InsufficientHistory("workspace was loaded without forecasts");
  return date ? ws.day_index(*date) : ws.latest_decision_day();
}

GeometricSchedule<double> schedule_of(const RunConfig& c) { return {c.mu0, c.mu_ratio, c.mu_points}; }

Eigen::MatrixXd covariance_at(const MarketPanel& panel, Index day, Index window) {
  if (day - window < 0) {
    throw InsufficientHistory(to_string(panel.calendar[static_cast<std::size_t>(day)]) +
                              " lacks a full covariance window");
  }
  return estimate_covariance(panel.realized, window, day - 1).matrix;
}

Eigen::VectorXd expected_at(const MarketPanel& panel, Index day) {
  const Eigen::VectorXd e = panel.expected.row(day).transpose();
  if (!e.allFinite()) {
    throw InsufficientHistory("no forecast for every stock on " + to_string(panel.calendar[static_cast<std::size_t>(day)]));
  }
  return e;
}

}  // namespace

json CounselorApi::frontier(const Query& query) const {
  allow_only(query, {"date"});
  const Workspace& ws = *workspace_;
  const Index day = decision_day(ws, date_param(query, "date"));
  const Date date = ws.calendar()[static_cast<std::size_t>(day)];
  const MarketPanel panel = ws.panel(date);
  const Eigen::VectorXd e = expected_at(panel, day);
  const Eigen::MatrixXd s = covariance_at(panel, day, ws.config().dc);
  const auto f = sweep_frontier<double>(s, e, schedule_of(ws.config()));
  json points = json::array();
  for (const auto& p : f.points) {
    points.push_back({{"mu", p.mu}, {"risk", p.risk}, {"expected_return", p.expected_return}, {"weights", vector_json(p.weights)}});
  }
  return {{"fingerprint", ws.fingerprint()}, {"date", to_string(date)}, {"symbols", panel.symbols},
          {"risk_min", f.risk_min},          {"risk_max", f.risk_max},  {"points", points}};
}

json CounselorApi::recommend(const Query& query) const {
  allow_only(query, {"date", "eta", "method"});
  const Workspace& ws = *workspace_;
  const double eta = eta_param(query, ws.config().eta);
  const Strategy method = parse_strategy(param(query, "method").value_or("portfolio"));
  if (method == Strategy::kRandom) throw InvalidArgument("recommend supports method portfolio or fic");
  const Index day = decision_day(ws, date_param(query, "date"));
  const Date date = ws.calendar()[static_cast<std::size_t>(day)];
  const MarketPanel panel = ws.panel(date);
  const Eigen::VectorXd e = expected_at(panel, day);
  const Eigen::MatrixXd s = covariance_at(panel, day, ws.config().dc);

  json out{{"fingerprint", ws.fingerprint()}, {"date", to_string(date)}, {"method", to_string(method)}, {"eta", eta}};
  Eigen::VectorXd w;
  if (method == Strategy::kPortfolio) {
    const auto f = sweep_frontier<double>(s, e, schedule_of(ws.config()));
    const auto& p = select_by_risk_tolerance(f, eta);
    w = p.weights;
    out["frontier"] = {{"risk_min", f.risk_min},
                       {"risk_max", f.risk_max},
                       {"risk_cap", f.risk_min + eta * (f.risk_max - f.risk_min)},
                       {"mu", p.mu},
                       {"points", f.points.size()}};
  } else {
    const auto c = run_counselor(technical_inputs(e, s, eta), panel.fundamentals, default_fundamental_coefficients(),
                                 ws.rulebases());
    w = c.weights;
    json audit = json::array();
    for (Index i = 0; i < w.size(); ++i) {
      audit.push_back({{"symbol", panel.symbols[static_cast<std::size_t>(i)]},
                       {"w_ts", c.self_stock[i]},
                       {"w_tp", c.pairwise.fused[i]},
                       {"w_t", c.technical.weights[i]},
                       {"w_f", c.fundamental.weights[i]},
                       {"alpha", c.alpha[i]}});
    }
    out["audit"] = audit;
    out["technical_uniform_fallback"] = c.technical.uniform_fallback;
  }
  out["weights"] = weights_json(panel.symbols, w);
  out["expected_return"] = w.dot(e);
  out["risk"] = std::sqrt(std::max(0.0, w.dot(s * w)));
  return out;
}

json CounselorApi::backtest(const Query& query) const {
  allow_only(query, {"start", "days", "eta", "method", "seed", "budget"});
  const Workspace& ws = *workspace_;
  if (!ws.has_forecasts()) throw InsufficientHistory("workspace was loaded without forecasts");
  const RunConfig& cfg = ws.config();

  Index start = cfg.backtest_start;
  if (const auto v = param(query, "start")) {
    if (v->find('-') != std::string::npos) {
      start = ws.day_index(*date_param(query, "start"));
    } else {
      start = integer_param(query, "start", start);
    }
  }
  const Index days = integer_param(query, "days", cfg.backtest_days);
  if (days < 1) throw InvalidArgument("days must be >= 1");
  const double eta = eta_param(query, cfg.eta);
  const auto seed = static_cast<std::uint64_t>(integer_param(query, "seed", static_cast<long long>(cfg.seed)));
  const double budget = number_param(query, "budget", cfg.budget);
  if (!(budget > 0)) throw InvalidArgument("budget must be positive");
  if (start < 0 || start + days > static_cast<Index>(ws.calendar().size())) {
    throw NotFound("backtest window [" + std::to_string(start) + ", " + std::to_string(start + days) +
                   ") outside the calendar");
  }
  std::vector<Strategy> methods;
  const std::string m = param(query, "method").value_or("all");
  if (m == "all") {
    methods = {Strategy::kPortfolio, Strategy::kFic, Strategy::kRandom};
  } else {
    methods = {parse_strategy(m)};
  }

  const MarketPanel panel = ws.panel(ws.calendar()[static_cast<std::size_t>(start)]);
  json ledgers = json::array();
  for (Strategy method : methods) {
    BacktestOptions opt;
    opt.strategy = method;
    opt.start_day = start;
    opt.horizon = days;
    opt.eta = eta;
    opt.initial_budget = budget;
    opt.covariance_window = cfg.dc;
    opt.seed = seed;
    opt.schedule = schedule_of(cfg);
    opt.rulebases = &ws.rulebases();
    const BacktestLedger ledger = run_backtest(panel, opt);
    json rows = json::array();
    for (std::size_t k = 0; k < ledger.days.size(); ++k) {
      rows.push_back({{"date", to_string(ledger.days[k])},
                      {"weights", vector_json(ledger.weights[k])},
                      {"expected_r", ledger.expected_return[k]},
                      {"realized_r", ledger.realized_return[k]},
                      {"invested", static_cast<bool>(ledger.invested[k])},
                      {"budget", ledger.budget[k + 1]}});
    }
    ledgers.push_back({{"method", to_string(method)}, {"final_budget", ledger.final_budget()}, {"rows", rows}});
  }
  const ReferenceBudgets ref;
  return {{"fingerprint", ws.fingerprint()},
          {"start", to_string(ws.calendar()[static_cast<std::size_t>(start)])},
          {"start_index", start},
          {"days", days},
          {"eta", eta},
          {"seed", seed},
          {"budget", budget},
          {"symbols", panel.symbols},
          {"ledgers", ledgers},
          {"reference_final_budgets", {{"portfolio", ref.portfolio}, {"fic", ref.fic}, {"random", ref.random}}}};
}

}  // namespace aic
