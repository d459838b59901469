#include "aic/config.hpp"

#include "aic/backtest.hpp"
#include "aic/error.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef AIC_DEFAULT_RULES
#define AIC_DEFAULT_RULES "config/counselor_rules.fz"
#endif

namespace aic {

namespace {

using json = nlohmann::json;

// Key table shared by JSON and environment handling.
struct Field {
  const char* key;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
  /// Converts an environment string into the JSON value `set` expects.
  std::function<json(const std::string&)> parse_env;
};

json env_string(const std::string& s) { return s; }
json env_int(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}
json env_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}
json env_list(const std::string& s) {
  json out = json::array();
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}
json env_int_list(const std::string& s) {
  json out = json::array();
  for (const auto& item : env_list(s)) out.push_back(env_int(item.get<std::string>()));
  return out;
}

#define AIC_FIELD(name, parse)                                                      \
  Field {                                                                           \
    #name, [](const RunConfig& c) { return json(c.name); },                         \
        [](RunConfig& c, const json& j) { c.name = j.get<decltype(c.name)>(); }, parse \
  }
#define AIC_PATH_FIELD(name)                                                                   \
  Field {                                                                                      \
    #name, [](const RunConfig& c) { return json(c.name.string()); },                           \
        [](RunConfig& c, const json& j) { c.name = j.get<std::string>(); }, env_string         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      AIC_PATH_FIELD(data_dir),
      AIC_PATH_FIELD(prices),
      AIC_PATH_FIELD(fundamentals),
      AIC_PATH_FIELD(rulebase),
      AIC_FIELD(universe, env_list),
      AIC_FIELD(fundamental_years, env_int_list),
      AIC_FIELD(dma, env_int),
      AIC_FIELD(dp, env_int),
      AIC_FIELD(dc, env_int),
      AIC_FIELD(tau, env_int),
      AIC_FIELD(c, env_double),
      AIC_FIELD(gamma, env_double),
      AIC_FIELD(epsilon, env_double),
      AIC_FIELD(split, env_double),
      AIC_FIELD(validation, env_double),
      AIC_FIELD(mu0, env_double),
      AIC_FIELD(mu_ratio, env_double),
      AIC_FIELD(mu_points, env_int),
      AIC_FIELD(eta, env_double),
      AIC_FIELD(seed, env_int),
      AIC_FIELD(return_basis, env_string),
      AIC_FIELD(backtest_start, env_int),
      AIC_FIELD(backtest_days, env_int),
      AIC_FIELD(budget, env_double),
      AIC_FIELD(request_timeout, env_double),
      AIC_FIELD(threads, env_int),
  };
  return table;
}

#undef AIC_FIELD
#undef AIC_PATH_FIELD

std::string upper(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace

RunConfig::RunConfig() : rulebase(AIC_DEFAULT_RULES), universe(default_universe()) {}

std::filesystem::path RunConfig::prices_path() const {
  if (!prices.empty()) return prices;
  const auto adjusted = data_dir / "prices-split-adjusted.csv";
  if (std::filesystem::exists(adjusted)) return adjusted;
  return data_dir / "prices.csv";
}

std::filesystem::path RunConfig::fundamentals_path() const {
  if (!fundamentals.empty()) return fundamentals;
  return data_dir / "fundamentals.csv";
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("config: " + what);
  };
  require(dma >= 1 && dp >= 1 && dc >= 1 && tau >= 1, "windows dma, dp, dc and tau must be >= 1");
  require(c > 0 && gamma > 0, "C and gamma must be positive");
  require(epsilon >= 0, "epsilon must be >= 0");
  require(split > 0 && split < 1, "split must lie in (0, 1)");
  require(validation > 0 && validation < 1, "validation must lie in (0, 1)");
  require(mu0 > 0 && mu_ratio > 1 && mu_points >= 1, "mu schedule needs mu0 > 0, mu_ratio > 1, mu_points >= 1");
  require(eta >= 0 && eta <= 1, "eta must lie in [0, 1]");
  require(return_basis == "smoothed" || return_basis == "raw", "return_basis must be 'smoothed' or 'raw'");
  require(backtest_start >= 0 && backtest_days >= 1, "backtest window must be non-negative with >= 1 day");
  require(budget > 0, "budget must be positive");
  require(request_timeout > 0, "request_timeout must be positive");
  require(!universe.empty(), "universe must not be empty");
}

nlohmann::json RunConfig::to_json() const {
  json j = json::object();
  for (const auto& f : fields()) j[f.key] = f.get(*this);
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  RunConfig config;
  for (const auto& [key, value] : j.items()) {
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (key == f.key) field = &f;
    }
    if (!field) throw InvalidArgument("config: unknown key '" + key + "'");
    try {
      field->set(config, value);
    } catch (const json::exception& e) {
      throw InvalidArgument("config: bad value for '" + key + "': " + e.what());
    }
  }
  return config;
}

std::string RunConfig::fingerprint() const {
  const std::string canonical = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void apply_env_overrides(RunConfig& config, const EnvLookup& lookup) {
  for (const auto& f : fields()) {
    const std::string name = "COUNSELOR_" + upper(f.key);
    const auto value = lookup(name);
    if (!value) continue;
    try {
      f.set(config, f.parse_env(*value));
    } catch (const std::exception&) {
      throw InvalidArgument("environment: bad value '" + *value + "' for " + name);
    }
  }
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

RunConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& lookup) {
  json j = json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw NotFound("config file " + file->string());
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError(0, "config file " + file->string() + ": " + e.what());
    }
  }
  RunConfig config = RunConfig::from_json(j);
  apply_env_overrides(config, lookup);
  config.validate();
  return config;
}

}  // namespace aic
