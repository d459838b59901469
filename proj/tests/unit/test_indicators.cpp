#include "aic/indicators.hpp"

#include <doctest.h>

#include <cmath>

using namespace aic;

namespace {

// Same bars as tests/oracles/indicators_oracle.py.
struct Bars {
  Eigen::VectorXd high, low, close;
};

Bars oracle_bars() {
  constexpr Index n = 40;
  Bars b{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Index t = 0; t < n; ++t) {
    const double td = static_cast<double>(t);
    b.high[t] = 100 + 5 * std::sin(0.3 * td) + 0.1 * td + 1;
    b.low[t] = b.high[t] - 2 - std::cos(td) * std::cos(td);
    b.close[t] = (b.high[t] + b.low[t]) / 2 + 0.5 * std::sin(1.7 * td);
  }
  return b;
}

}  // namespace

TEST_CASE("true range") {
  CHECK(true_range(10.0, 8.0, 9.0) == 2);
  CHECK(true_range(10.0, 8.0, 12.0) == 4);
  CHECK(true_range(5.0, 5.0, 5.0) == 0);
  CHECK_THROWS_AS(true_range(8.0, 10.0, 9.0), InvalidArgument);
}

TEST_CASE("Wilder smoothing") {
  Eigen::VectorXd raw = Eigen::VectorXd::Constant(30, 3.0);
  const auto flat = wilder_smooth(raw, 14);
  CHECK(std::isnan(flat[13]));
  for (Index t = 14; t < 30; ++t) CHECK(flat[t] == doctest::Approx(3.0));

  Eigen::VectorXd ramp = Eigen::VectorXd::Constant(20, 100.0);
  for (Index t = 1; t <= 14; ++t) ramp[t] = static_cast<double>(t);
  const auto seeded = wilder_smooth(ramp, 14, 1);
  CHECK(seeded[15] == doctest::Approx(7.5));
  CHECK(seeded[16] == doctest::Approx((13 * 7.5 + 100) / 14));

  CHECK_THROWS_AS(wilder_smooth(Eigen::VectorXd::Ones(14), 14), InsufficientHistory);
}

TEST_CASE("directional movement") {
  Eigen::VectorXd h(3), l(3);
  h << 3, 5, 4;
  l << 3, 5, 4;
  const auto dm = directional_movements(h, l);
  CHECK(dm.pdm[1] == 2);
  CHECK(dm.mdm[1] == 0);
  CHECK(dm.pdm[2] == 0);
  CHECK(dm.mdm[2] == 1);
  CHECK_THROWS_AS(directional_movements(h.head(1), l.head(1)), InsufficientHistory);
}

TEST_CASE("ADX chain against the recurrence oracle") {
  const auto b = oracle_bars();
  const auto adx = compute_adx(b.high, b.low, b.close, 14);
  CHECK(adx.spdi[15] == doctest::Approx(14.870714960463118).epsilon(1e-12));
  CHECK(adx.smdi[15] == doctest::Approx(22.718997096167715).epsilon(1e-12));
  CHECK(adx.dx[20] == doctest::Approx(10.69821393031496).epsilon(1e-12));
  CHECK(adx.spdi[35] == doctest::Approx(14.390868799573722).epsilon(1e-12));
  CHECK(adx.dx[39] == doctest::Approx(15.944204030451324).epsilon(1e-12));
  CHECK(std::isnan(adx.adx[28]));
  CHECK(adx.adx[29] == doctest::Approx(26.938929750921336).epsilon(1e-12));
  CHECK(adx.adx[35] == doctest::Approx(22.847229769312243).epsilon(1e-12));
  CHECK(adx.adx[39] == doctest::Approx(23.117649763377337).epsilon(1e-12));
}

TEST_CASE("ADX edge cases") {
  SUBCASE("steady uptrend") {
    Eigen::VectorXd h = Eigen::VectorXd::LinSpaced(40, 10, 49);
    Eigen::VectorXd l = h.array() - 1;
    Eigen::VectorXd c = h.array() - 0.5;
    const auto adx = compute_adx(h, l, c, 14);
    for (Index t = 15; t < 40; ++t) {
      CHECK(adx.smdi[t] == 0);
      CHECK(adx.dx[t] == doctest::Approx(100));
    }
  }
  SUBCASE("flat bars give zero everywhere") {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(40, 5);
    const auto adx = compute_adx(v, v, v, 14);
    for (Index t = 29; t < 40; ++t) {
      CHECK(adx.spdi[t] == 0);
      CHECK(adx.dx[t] == 0);
      CHECK(adx.adx[t] == 0);
    }
  }
  SUBCASE("too short") {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(29, 5);
    CHECK_THROWS_AS(compute_adx(v, v, v, 14), InsufficientHistory);
  }
}

TEST_CASE("parabolic SAR") {
  SUBCASE("against the recurrence oracle") {
    const auto b = oracle_bars();
    const auto sar = compute_sar(b.high, b.low, b.close);
    CHECK(std::isnan(sar.sar[3]));
    CHECK(sar.sar[4] == doctest::Approx(100.28567445158026).epsilon(1e-12));
    CHECK(sar.sar[5] == doctest::Approx(100.40116487114538).epsilon(1e-12));
    CHECK(sar.sar[10] == doctest::Approx(106.38186025530081).epsilon(1e-12));
    CHECK(sar.sar[20] == doctest::Approx(94.81095541579641).epsilon(1e-12));
    CHECK(sar.sar[30] == doctest::Approx(108.59271672687302).epsilon(1e-12));
    CHECK(sar.sar[39] == doctest::Approx(102.38874072674695).epsilon(1e-12));
  }
  SUBCASE("seed is the four-day low in an uptrend") {
    Eigen::VectorXd l(6), h(6), c(6);
    l << 9, 5, 4, 6, 7, 8;
    h = l.array() + 2;
    c = l.array() + 1;
    const auto sar = compute_sar(h, l, c, {InitialTrendRule::kUp, true});
    CHECK(sar.sar[4] == 4);
  }
  SUBCASE("AF steps with each new extreme and saturates") {
    Eigen::VectorXd h = Eigen::VectorXd::LinSpaced(20, 10, 29);
    Eigen::VectorXd l = h.array() - 1;
    Eigen::VectorXd c = h.array() - 0.5;
    const auto sar = compute_sar(h, l, c);
    CHECK(af_value<double>(sar.af_steps[4]) == doctest::Approx(0.02));
    CHECK(af_value<double>(sar.af_steps[5]) == doctest::Approx(0.04));
    CHECK(af_value<double>(sar.af_steps[6]) == doctest::Approx(0.06));
    CHECK(af_value<double>(sar.af_steps[7]) == doctest::Approx(0.08));
    CHECK(af_value<double>(sar.af_steps[15]) == doctest::Approx(0.2));
    CHECK(af_value<double>(sar.af_steps[19]) == doctest::Approx(0.2));
  }
  SUBCASE("flat bars keep AF at its floor") {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(30, 5);
    const auto sar = compute_sar(v, v, v);
    for (Index t = 4; t < 30; ++t) {
      CHECK(sar.sar[t] == 5);
      CHECK(sar.af_steps[static_cast<std::size_t>(t)] == 1);
    }
  }
}

TEST_CASE("indicator pipeline validity") {
  PriceSeries s;
  const Index n = 300;
  s.days.resize(n);
  s.high = Eigen::VectorXd::LinSpaced(n, 10, 40).array() + 1;
  s.low = s.high.array() - 1.5;
  s.close = s.high.array() - 0.5;
  s.open = s.close;
  s.volume = Eigen::VectorXd::Constant(n, 100);
  const auto ind = indicator_pipeline(s, 14);
  CHECK(ind.valid_from == 29);
  CHECK(std::isfinite(ind.adx[29]));
  CHECK(std::isnan(ind.adx[28]));
  CHECK_THROWS_AS(indicator_pipeline(s.slice(0, 20), 14), InsufficientHistory);
}
