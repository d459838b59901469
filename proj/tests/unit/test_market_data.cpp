#include "aic/market_data.hpp"

#include "synthetic.hpp"
#include "temp_dir.hpp"

#include <doctest.h>

#include <random>

using namespace aic;
using aic::testing::TempDir;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

const char* kHeader = "date,symbol,open,close,low,high,volume\n";

}  // namespace

TEST_CASE("dates parse with or without a time part") {
  CHECK(parse_date("2016-01-05") == Date{20160105});
  CHECK(parse_date("2016-01-05 00:00:00") == Date{20160105});
  CHECK(to_string(Date{20160105}) == "2016-01-05");
  CHECK_THROWS_AS(parse_date("2016-13-05"), InvalidArgument);
  CHECK_THROWS_AS(parse_date("05/01/2016"), InvalidArgument);
}

TEST_CASE("price ingestion") {
  TempDir dir;
  const auto path = dir.write("prices.csv", std::string(kHeader) +
                                                "2016-01-06,AAPL,10,11,9.5,11.5,1000\n"
                                                "2016-01-05,AAPL,9,10,8.5,10.5,900\n"
                                                "2016-01-07,AAPL,11,12,10.5,12.5,1100\n"
                                                "2016-01-05,GM,30,31,29,32,500\n"
                                                "2016-01-07,GM,31,32,30,33,500\n");

  SUBCASE("three rows in ascending order") {
    const auto ingest = ingest_prices(path, {"AAPL"});
    const auto& s = ingest.series.at("AAPL");
    REQUIRE(s.size() == 3);
    CHECK(s.days[0] == Date{20160105});
    CHECK(s.days[2] == Date{20160107});
    CHECK(s.high[1] == 11.5);
    CHECK(ingest.incomplete.empty());
  }
  SUBCASE("gap-ridden series is flagged incomplete") {
    const auto ingest = ingest_prices(path, {"AAPL", "GM"});
    CHECK(ingest.incomplete.contains("GM"));
    CHECK_FALSE(ingest.incomplete.contains("AAPL"));
  }
  SUBCASE("unknown ticker is reported, others succeed") {
    const auto ingest = ingest_prices(path, {"AAPL", "ZZZZ"});
    REQUIRE(ingest.not_found.size() == 1);
    CHECK(ingest.not_found[0] == "ZZZZ");
    CHECK(ingest.series.contains("AAPL"));
  }
  SUBCASE("malformed row names its line") {
    const auto bad = dir.write("bad.csv", std::string(kHeader) + "2016-01-05,AAPL,9,10,8.5,10.5,900\n"
                                                                 "2016-01-06,AAPL,ten,11,9.5,11.5,1000\n");
    try {
      ingest_prices(bad, {"AAPL"});
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("duplicate dates break integrity") {
    const auto dup = dir.write("dup.csv", std::string(kHeader) + "2016-01-05,AAPL,9,10,8.5,10.5,900\n"
                                                                 "2016-01-05,AAPL,9,10,8.5,10.5,900\n");
    CHECK_THROWS_AS(ingest_prices(dup, {"AAPL"}), DataIntegrityError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(ingest_prices(dir / "nope.csv", {"AAPL"}), NotFound); }
}

TEST_CASE("fundamentals ingestion") {
  TempDir dir;
  synthetic::Options opt;
  opt.no_fundamentals = {"BBB"};
  opt.missing_cell = {"CCC"};
  synthetic::write_dataset(dir.path(), opt);

  const auto f = ingest_fundamentals(dir / "fundamentals.csv", {"AAA", "BBB", "CCC"}, {2013, 2014, 2015});
  REQUIRE(f.records.contains("AAA"));
  CHECK(f.records.at("AAA").size() == 3);
  CHECK(f.flagged.contains("BBB"));
  CHECK(f.flagged.contains("CCC"));
  CHECK_FALSE(f.flagged.contains("AAA"));

  const auto empty = ingest_fundamentals(dir / "fundamentals.csv", {"AAA"}, {});
  CHECK(empty.records.empty());

  const auto& recs = f.records.at("AAA");
  CHECK(latest_fundamentals(recs, 2014)->year == 2014);
  CHECK(latest_fundamentals(recs, 2020)->year == 2015);
  CHECK(latest_fundamentals(recs, 2012) == nullptr);
}

TEST_CASE("moving average") {
  const auto ma = moving_average(vec({1, 2, 3, 4}), 3);
  CHECK(ma.source_offset == 2);
  CHECK(std::isnan(ma.values[1]));
  CHECK(ma.values[2] == doctest::Approx(2));
  CHECK(ma.values[3] == doctest::Approx(3));

  const auto flat = moving_average(Eigen::VectorXd::Constant(20, 7.5), 6);
  for (Index t = 5; t < 20; ++t) CHECK(flat.values[t] == doctest::Approx(7.5));

  const auto long_ma = moving_average(Eigen::VectorXd::LinSpaced(300, 1, 300), 50);
  CHECK(long_ma.valid_size() == 251);

  CHECK_THROWS_AS(moving_average(vec({1, 2}), 3), InsufficientHistory);
  CHECK_THROWS_AS(moving_average(vec({1, 2}), 0), InvalidArgument);
}

TEST_CASE("z-score with the endpoint inside the window") {
  const auto z = zscore_normalize(vec({1, 2, 3, 1}), 2, 1);
  // position 3 uses [2, 3, 1]
  CHECK(z.first_valid == 3);
  CHECK(z.values[3] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(z.states[3].std == doctest::Approx(0.816496580927726).epsilon(1e-12));

  const auto flat = zscore_normalize(Eigen::VectorXd::Constant(10, 4.0), 3);
  CHECK(flat.values[5] == 0);
  CHECK(flat.states[5].std == 0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(50, 10);
  Eigen::VectorXd x(200);
  for (auto& v : x) v = noise(rng);
  const auto zz = zscore_normalize(x, 20);
  const auto back = denormalize(zz);
  for (Index t = zz.first_valid; t < x.size(); ++t) CHECK(back[t] == doctest::Approx(x[t]).epsilon(1e-12));

  CHECK_THROWS_AS(zscore_normalize(vec({1, 2, 3}), 3), InsufficientHistory);
}

TEST_CASE("profit rates") {
  auto wrap = [](Eigen::VectorXd v) {
    SmoothedSeries<double> s;
    s.values = std::move(v);
    return s;
  };
  const auto r = to_returns(wrap(vec({100, 110, 99})));
  REQUIRE(r.values.size() == 2);
  CHECK(r.values[0] == doctest::Approx(0.10));
  CHECK(r.values[1] == doctest::Approx(-0.10));
  CHECK(to_returns(wrap(Eigen::VectorXd::Constant(5, 3.0))).values.isZero());
  CHECK_THROWS_AS(to_returns(wrap(vec({100, 0, 3}))), InvalidPrice);
}

TEST_CASE("synthetic random walk keeps bars consistent") {
  const auto s = synthetic::random_walk("AAA", 300, 11);
  CHECK_NOTHROW(s.validate());
  CHECK((s.high.array() >= s.low.array()).all());
  CHECK((s.high.array() >= s.close.array()).all());
  CHECK((s.low.array() <= s.open.array()).all());
}
