#include "aic/cli.hpp"

#include "aic/api.hpp"
#include "aic/csv.hpp"
#include "aic/log.hpp"
#include "aic/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>

namespace aic {

namespace {

using json = nlohmann::json;

struct Globals {
  std::string config_file;
  std::string data_dir;
  std::string rulebase;
  std::string log_level = "warn";
  std::vector<std::string> universe;
  std::optional<Index> dma, dp, dc, tau;
  std::optional<double> c, gamma, epsilon;
  std::optional<unsigned> threads;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig cfg = load_config(g.config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(g.config_file));
  if (!g.data_dir.empty()) cfg.data_dir = g.data_dir;
  if (!g.rulebase.empty()) cfg.rulebase = g.rulebase;
  if (!g.universe.empty()) cfg.universe = g.universe;
  if (g.dma) cfg.dma = *g.dma;
  if (g.dp) cfg.dp = *g.dp;
  if (g.dc) cfg.dc = *g.dc;
  if (g.tau) cfg.tau = *g.tau;
  if (g.c) cfg.c = *g.c;
  if (g.gamma) cfg.gamma = *g.gamma;
  if (g.epsilon) cfg.epsilon = *g.epsilon;
  if (g.threads) cfg.threads = *g.threads;
  cfg.validate();
  return cfg;
}

/// Writes to --out when given, else to stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw NotFound("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

void put(Query& q, const char* key, const std::string& value) {
  if (!value.empty()) q[key] = value;
}

// Shortest text that round-trips.
std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_float()) return number(v.get<double>());
  if (v.is_string()) return csv::escape(v.get<std::string>());
  return v.dump();
}

void write_forecast_csv(std::ostream& out, const json& j) {
  out << "date,actual,predicted,expected_return,actual_return\n";
  for (const auto& r : j["rows"]) {
    out << cell(r["date"]) << ',' << cell(r["actual"]) << ',' << cell(r["predicted"]) << ','
        << cell(r["expected_return"]) << ',' << cell(r["actual_return"]) << '\n';
  }
}

void write_frontier_csv(std::ostream& out, const json& j) {
  out << "mu,risk,expected_return";
  for (const auto& s : j["symbols"]) out << ",w_" << s.get<std::string>();
  out << '\n';
  for (const auto& p : j["points"]) {
    out << cell(p["mu"]) << ',' << cell(p["risk"]) << ',' << cell(p["expected_return"]);
    for (const auto& w : p["weights"]) out << ',' << cell(w);
    out << '\n';
  }
}

void write_weights_csv(std::ostream& out, const json& j) {
  out << "symbol,weight\n";
  for (const auto& w : j["weights"]) out << cell(w["symbol"]) << ',' << cell(w["weight"]) << '\n';
}

void write_ledger_json_csv(std::ostream& out, const json& ledger, const json& symbols) {
  out << "date";
  for (const auto& s : symbols) out << ",w_" << s.get<std::string>();
  out << ",expected_r,realized_r,invested,budget\n";
  for (const auto& r : ledger["rows"]) {
    out << cell(r["date"]);
    for (const auto& w : r["weights"]) out << ',' << cell(w);
    out << ',' << cell(r["expected_r"]) << ',' << cell(r["realized_r"]) << ',' << cell(r["invested"]) << ','
        << cell(r["budget"]) << '\n';
  }
}

std::shared_ptr<CounselorApi> make_api(const Globals& g, bool forecasts) {
  return std::make_shared<CounselorApi>(std::make_shared<const Workspace>(resolve_config(g), forecasts));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Investment counselor: forecasting, portfolio and fuzzy weight suggestion", "counselor"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_file, "JSON configuration file")->envname("COUNSELOR_CONFIG");
  app.add_option("--data-dir", g.data_dir, "Directory with the price and fundamentals CSV files");
  app.add_option("--rulebase", g.rulebase, "Fuzzy rulebase file");
  app.add_option("--log-level", g.log_level, "debug, info, warn, error or off")->envname("COUNSELOR_LOG_LEVEL");
  app.add_option("--universe", g.universe, "Ticker symbols (comma separated)")->delimiter(',');
  app.add_option("--dma", g.dma, "Moving-average window");
  app.add_option("--dp", g.dp, "Prediction window");
  app.add_option("--dc", g.dc, "Covariance window");
  app.add_option("--tau", g.tau, "ADX smoothing period");
  app.add_option("--C", g.c, "SVR penalty");
  app.add_option("--gamma", g.gamma, "RBF kernel width");
  app.add_option("--epsilon", g.epsilon, "SVR insensitive-tube width");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");

  std::function<void()> action;

  auto* ingest = app.add_subcommand("ingest", "Load prices and fundamentals and summarize them");
  std::string ingest_out;
  ingest->add_option("--out", ingest_out, "CSV summary file");
  ingest->callback([&] {
    action = [&] {
      auto api = make_api(g, false);
      const json j = api->handle("stocks", {});
      out << j.dump(2) << '\n';
      if (!ingest_out.empty()) {
        Sink sink(ingest_out, out);
        auto& s = sink.stream();
        s << "symbol,days,first,last,incomplete,fundamentals,investable\n";
        for (const auto& r : j["stocks"]) {
          s << cell(r["symbol"]) << ',' << cell(r["days"]) << ',' << cell(r["first"]) << ',' << cell(r["last"]) << ','
            << cell(r["incomplete"]) << ',' << cell(r["fundamentals"]) << ',' << cell(r["investable"]) << '\n';
        }
      }
    };
  });

  auto* indicators = app.add_subcommand("indicators", "ADX, SPDI, SMDI and SAR for one stock as CSV");
  std::string ind_symbol, ind_out;
  indicators->add_option("--symbol", ind_symbol, "Ticker")->required();
  indicators->add_option("--out", ind_out, "CSV output file");
  indicators->callback([&] {
    action = [&] {
      auto api = make_api(g, false);
      const auto& a = api->workspace().stock(ind_symbol);
      Sink sink(ind_out, out);
      auto& s = sink.stream();
      s << "date,high,low,close,adx,spdi,smdi,sar\n";
      auto v = [](double x) { return std::isfinite(x) ? number(x) : std::string(); };
      for (Index t = 0; t < a.prices.size(); ++t) {
        s << to_string(a.prices.days[static_cast<std::size_t>(t)]) << ',' << v(a.prices.high[t]) << ','
          << v(a.prices.low[t]) << ',' << v(a.prices.close[t]) << ',' << v(a.indicators.adx[t]) << ','
          << v(a.indicators.spdi[t]) << ',' << v(a.indicators.smdi[t]) << ',' << v(a.indicators.sar[t]) << '\n';
      }
    };
  });

  auto* tune = app.add_subcommand("tune", "Grid search over (dp, C, gamma) on the validation split");
  TuningGrid grid;
  std::string tune_out;
  tune->add_option("--dp-grid", grid.dp, "Prediction windows")->delimiter(',');
  tune->add_option("--c-grid", grid.c, "Penalties")->delimiter(',');
  tune->add_option("--gamma-grid", grid.gamma, "Kernel widths")->delimiter(',');
  tune->add_option("--out", tune_out, "CSV file for the full grid table");
  tune->callback([&] {
    action = [&] {
      auto api = make_api(g, false);
      const Workspace& ws = api->workspace();
      std::vector<TuningStock> stocks;
      for (const auto& s : ws.symbols()) stocks.push_back({&ws.stock(s).prices, &ws.stock(s).indicators});
      const auto result = tune_hyperparameters(grid, stocks, ws.forecast_params(ws.config().dma), ws.config().split,
                                               ws.config().validation, ws.config().threads);
      json cells = json::array();
      for (const auto& c : result.cells) {
        cells.push_back({{"dp", c.dp}, {"C", c.c}, {"gamma", c.gamma}, {"mean_hit_rate", c.mean_hit_rate}, {"failures", c.failures.size()}});
      }
      const auto& b = result.best;
      out << json{{"fingerprint", ws.fingerprint()},
                  {"winner", {{"dp", b.dp}, {"C", b.c}, {"gamma", b.gamma}, {"mean_hit_rate", b.mean_hit_rate}}},
                  {"reference_winner", {{"dp", 5}, {"C", 1000.0}, {"gamma", 0.001}}},
                  {"stocks", ws.symbols()},
                  {"cells", cells}}
                 .dump(2)
          << '\n';
      if (!tune_out.empty()) {
        Sink sink(tune_out, out);
        sink.stream() << "dp,C,gamma,mean_hit_rate,failures\n";
        for (const auto& c : result.cells) {
          sink.stream() << c.dp << ',' << number(c.c) << ',' << number(c.gamma) << ',' << number(c.mean_hit_rate) << ','
                        << c.failures.size() << '\n';
        }
      }
    };
  });

  auto* forecast = app.add_subcommand("forecast", "Walk-forward forecast of the smoothed high for one stock");
  std::string fc_symbol, fc_from, fc_to, fc_out, fc_model;
  forecast->add_option("--symbol", fc_symbol, "Ticker")->required();
  forecast->add_option("--from", fc_from, "First date (YYYY-MM-DD)");
  forecast->add_option("--to", fc_to, "Last date (YYYY-MM-DD)");
  forecast->add_option("--out", fc_out, "CSV output file");
  forecast->add_option("--save-model", fc_model, "Write the trained SVR model to this file");
  forecast->callback([&] {
    action = [&] {
      auto api = make_api(g, true);
      Query q{{"symbol", fc_symbol}};
      put(q, "from", fc_from);
      put(q, "to", fc_to);
      const json j = api->handle("forecast", q);
      out << j.dump(2) << '\n';
      if (!fc_out.empty()) {
        Sink sink(fc_out, out);
        write_forecast_csv(sink.stream(), j);
      }
      if (!fc_model.empty()) {
        const Workspace& ws = api->workspace();
        const auto& a = ws.stock(fc_symbol);
        SvrModel model;
        walk_forward_forecast(a.prices, a.indicators, ws.config().split, ws.forecast_params(ws.config().dma), &model);
        std::ofstream f(fc_model);
        if (!f) throw NotFound("cannot open model file " + fc_model);
        save_model(f, model);
      }
    };
  });

  auto* frontier = app.add_subcommand("frontier", "Efficient frontier on a decision day");
  std::string fr_date, fr_out;
  frontier->add_option("--date", fr_date, "Decision date (default: latest)");
  frontier->add_option("--out", fr_out, "CSV output file");
  frontier->callback([&] {
    action = [&] {
      auto api = make_api(g, true);
      Query q;
      put(q, "date", fr_date);
      const json j = api->handle("frontier", q);
      out << j.dump(2) << '\n';
      if (!fr_out.empty()) {
        Sink sink(fr_out, out);
        write_frontier_csv(sink.stream(), j);
      }
    };
  });

  auto* recommend = app.add_subcommand("recommend", "Suggested weights for a decision day");
  std::string rc_method = "portfolio", rc_date, rc_eta, rc_out;
  recommend->add_option("--method", rc_method, "portfolio or fic");
  recommend->add_option("--eta", rc_eta, "Risk tolerance in [0, 1]");
  recommend->add_option("--date", rc_date, "Decision date (default: latest)");
  recommend->add_option("--out", rc_out, "CSV file for the weight table");
  recommend->callback([&] {
    action = [&] {
      auto api = make_api(g, true);
      Query q{{"method", rc_method}};
      put(q, "eta", rc_eta);
      put(q, "date", rc_date);
      const json j = api->handle("recommend", q);
      out << j.dump(2) << '\n';
      if (!rc_out.empty()) {
        Sink sink(rc_out, out);
        write_weights_csv(sink.stream(), j);
      }
    };
  });

  auto* backtest = app.add_subcommand("backtest", "Budget simulation with the exit rule");
  std::string bt_method = "all", bt_start, bt_days, bt_eta, bt_budget, bt_seed, bt_out_dir;
  backtest->add_option("--method", bt_method, "portfolio, fic, random or all");
  backtest->add_option("--start", bt_start, "First day (date or calendar index)");
  backtest->add_option("--days", bt_days, "Horizon in trading days");
  backtest->add_option("--eta", bt_eta, "Risk tolerance in [0, 1]");
  backtest->add_option("--budget", bt_budget, "Initial budget");
  backtest->add_option("--seed", bt_seed, "Seed of the random strategy");
  backtest->add_option("--out-dir", bt_out_dir, "Directory for ledger_<method>.csv files");
  backtest->callback([&] {
    action = [&] {
      auto api = make_api(g, true);
      Query q{{"method", bt_method}};
      put(q, "start", bt_start);
      put(q, "days", bt_days);
      put(q, "eta", bt_eta);
      put(q, "budget", bt_budget);
      put(q, "seed", bt_seed);
      const json j = api->handle("backtest", q);
      out << j.dump(2) << '\n';
      if (!bt_out_dir.empty()) {
        std::filesystem::create_directories(bt_out_dir);
        for (const auto& ledger : j["ledgers"]) {
          const auto path = std::filesystem::path(bt_out_dir) / ("ledger_" + ledger["method"].get<std::string>() + ".csv");
          Sink sink(path.string(), out);
          write_ledger_json_csv(sink.stream(), ledger, j["symbols"]);
        }
      }
    };
  });

  auto* report = app.add_subcommand("report", "Per-stock HR/MAE/RMSE/MAPE next to the reference figures");
  std::string rp_mode = "both", rp_out;
  report->add_option("--mode", rp_mode, "sp, nsp or both")->check(CLI::IsMember({"sp", "nsp", "both"}));
  report->add_option("--out", rp_out, "CSV output file");
  report->callback([&] {
    action = [&] {
      auto api = make_api(g, rp_mode != "nsp");
      std::vector<MetricReport> rows;
      if (rp_mode != "sp") {
        auto nsp = api->workspace().table(SmoothingMode::kNsp);
        rows.insert(rows.end(), nsp.begin(), nsp.end());
      }
      if (rp_mode != "nsp") {
        auto sp = api->workspace().table(SmoothingMode::kSp);
        rows.insert(rows.end(), sp.begin(), sp.end());
      }
      Sink sink(rp_out, out);
      write_table_report(sink.stream(), rows);
    };
  });

  auto* serve = app.add_subcommand("serve", "HTTP service under /v1");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<double> timeout;
  serve->add_option("--host", host, "Bind address")->envname("COUNSELOR_HOST");
  serve->add_option("--port", port, "Port")->envname("COUNSELOR_PORT");
  serve->add_option("--timeout", timeout, "Per-request timeout in seconds");
  serve->callback([&] {
    action = [&] {
      auto api = make_api(g, true);
      httplib::Server server;
      install_routes(server, api, {timeout.value_or(api->workspace().config().request_timeout)});
      log::event(log::Level::kWarn, "listening", {{"host", host}, {"port", port}, {"fingerprint", api->workspace().fingerprint()}});
      if (!server.listen(host, port)) throw InvalidArgument("cannot bind " + host + ":" + std::to_string(port));
    };
  });

  std::vector<const char*> argv{"counselor"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (app.exit(e, out, err) == 0) return 0;
    err << '\n' << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 2;
  }

  try {
    log::set_level(log::parse_level(g.log_level));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    err << json{{"error", e.what()}, {"kind", kind_name(e.kind())}, {"http_status", http_status(e.kind())}}.dump()
        << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << json{{"error", e.what()}}.dump() << '\n';
    return 1;
  }
}

}  // namespace aic
