#include "aic/config.hpp"
#include "aic/error.hpp"

#include "temp_dir.hpp"

#include <doctest.h>

#include <map>

using namespace aic;
using aic::testing::TempDir;

namespace {

EnvLookup env(std::map<std::string, std::string> values) {
  return [values = std::move(values)](const std::string& name) -> std::optional<std::string> {
    const auto it = values.find(name);
    if (it == values.end()) return std::nullopt;
    return it->second;
  };
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.dma == 50);
  CHECK(c.dp == 5);
  CHECK(c.dc == 100);
  CHECK(c.tau == 14);
  CHECK(c.c == 1000);
  CHECK(c.gamma == 0.001);
  CHECK(c.eta == 0.3);
  CHECK(c.budget == 1000);
  CHECK(c.backtest_days == 30);
  CHECK(c.universe.size() == 25);
  CHECK(c.fundamental_years == std::vector<int>{2013, 2014, 2015});
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("JSON round trip and unknown keys") {
  RunConfig c;
  c.dma = 20;
  c.universe = {"AAA", "BBB"};
  const auto back = RunConfig::from_json(c.to_json());
  CHECK(back.dma == 20);
  CHECK(back.universe == c.universe);
  CHECK(back.fingerprint() == c.fingerprint());

  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json{{"dmaa", 3}}), InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json{{"dma", "many"}}), InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::array()), InvalidArgument);
}

TEST_CASE("validation") {
  RunConfig c;
  c.eta = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = RunConfig{};
  c.split = 1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = RunConfig{};
  c.return_basis = "log";
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = RunConfig{};
  c.dp = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("fingerprint follows every setting") {
  const RunConfig base;
  CHECK(base.fingerprint().size() == 16);
  CHECK(base.fingerprint() == RunConfig{}.fingerprint());
  RunConfig changed;
  changed.epsilon = 0.2;
  CHECK(changed.fingerprint() != base.fingerprint());
  changed = RunConfig{};
  changed.universe.pop_back();
  CHECK(changed.fingerprint() != base.fingerprint());
}

TEST_CASE("file then environment") {
  TempDir dir;
  const auto file = dir.write("run.json", R"({"dma": 30, "eta": 0.5, "universe": ["AAA"]})");
  const auto c = load_config(file, env({{"COUNSELOR_ETA", "0.7"}, {"COUNSELOR_UNIVERSE", "X,Y,Z"},
                                        {"COUNSELOR_FUNDAMENTAL_YEARS", "2014,2015"}}));
  CHECK(c.dma == 30);
  CHECK(c.eta == 0.7);
  CHECK(c.universe == std::vector<std::string>{"X", "Y", "Z"});
  CHECK(c.fundamental_years == std::vector<int>{2014, 2015});

  CHECK_THROWS_AS(load_config(file, env({{"COUNSELOR_DMA", "ten"}})), InvalidArgument);
  CHECK_THROWS_AS(load_config(dir / "missing.json", env({})), NotFound);
  const auto broken = dir.write("broken.json", "{ not json");
  CHECK_THROWS_AS(load_config(broken, env({})), ParseError);
}

TEST_CASE("price file resolution") {
  TempDir dir;
  RunConfig c;
  c.data_dir = dir.path();
  CHECK(c.prices_path().filename() == "prices.csv");
  dir.write("prices-split-adjusted.csv", "");
  CHECK(c.prices_path().filename() == "prices-split-adjusted.csv");
  c.prices = dir / "other.csv";
  CHECK(c.prices_path() == dir / "other.csv");
  CHECK(c.fundamentals_path() == dir / "fundamentals.csv");
}
