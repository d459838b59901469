#include "aic/fuzzy.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace aic;
using namespace aic::fuzzy;

namespace {

FuzzyVariable unit_variable(const std::string& name) {
  return {name,
          0,
          1,
          {MembershipFunction("LOW", {{0, 1}, {0.5, 0}}), MembershipFunction("MEDIUM", {{0, 0}, {0.5, 1}, {1, 0}}),
           MembershipFunction("HIGH", {{0.5, 0}, {1, 1}})}};
}

const char* kTwoInput = R"(fuzzy-rulebase 1
# two inputs, one output
system demo
input a [0, 1]
  term LOW    (0, 1) (0.5, 0)
  term MEDIUM (0, 0) (0.5, 1) (1, 0)
  term HIGH   (0.5, 0) (1, 1)
input b [0, 1]
  term LOW    (0, 1) (1, 0)
  term HIGH   (0, 0) (1, 1)
output w [0, 1]
  term LOW    (0, 1) (0.5, 0)
  term MEDIUM (0, 0) (0.5, 1) (1, 0)
  term HIGH   (0.5, 0) (1, 1)
rule IF a is LOW THEN w is LOW
rule IF a is MEDIUM AND b is LOW THEN w is MEDIUM
rule IF a is MEDIUM AND b is HIGH THEN w is HIGH
rule IF (a is HIGH) THEN w is HIGH
end
)";

RuleBase demo() {
  std::istringstream in(kTwoInput);
  return parse_rulebases(in).at("demo");
}

double trapezoid_centroid(const OutputProfile& p, double step) {
  double mass = 0, moment = 0;
  const auto n = static_cast<long>((p.hi - p.lo) / step + 0.5);
  for (long k = 0; k < n; ++k) {
    const double x0 = p.lo + step * static_cast<double>(k);
    const double x1 = k + 1 == n ? p.hi : x0 + step;
    const double f0 = p(x0), f1 = p(x1);
    mass += 0.5 * (f0 + f1) * (x1 - x0);
    moment += 0.5 * (x0 * f0 + x1 * f1) * (x1 - x0);
  }
  return moment / mass;
}

std::string parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_rulebases(in);
  } catch (const ParseError& e) {
    return std::to_string(e.line());
  }
  return "no error";
}

}  // namespace

TEST_CASE("membership functions") {
  const MembershipFunction tri("T", {{0, 0}, {0.5, 1}, {1, 0}});
  CHECK(tri(0.5) == 1);
  CHECK(tri(0.25) == doctest::Approx(0.5));
  CHECK(tri(-3) == 0);
  CHECK(tri.peak() == 0.5);
  const MembershipFunction shoulder("S", {{0.5, 0}, {1, 1}});
  CHECK(shoulder(2) == 1);
  CHECK_THROWS_AS(MembershipFunction("X", {{0, 0}, {0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(MembershipFunction("X", {{0, 1.5}}), InvalidArgument);
}

TEST_CASE("fuzzification") {
  const auto v = unit_variable("x");
  auto degree = [&](double x, const std::string& term) {
    for (const auto& d : fuzzify(v, x))
      if (d.term == term) return d.degree;
    return -1.0;
  };
  CHECK(degree(0.5, "MEDIUM") == 1);
  CHECK(degree(0.25, "LOW") == doctest::Approx(degree(0.25, "MEDIUM")));
  CHECK(degree(7.0, "HIGH") == 1);
  CHECK(degree(-7.0, "LOW") == 1);
  CHECK_NOTHROW(v.check_coverage());

  FuzzyVariable gap{"g", 0, 1, {MembershipFunction("A", {{0, 1}, {0.3, 0}}), MembershipFunction("B", {{0.6, 0}, {1, 1}})}};
  CHECK_THROWS_AS(gap.check_coverage(), InvalidArgument);
}

TEST_CASE("inference") {
  const auto rb = demo();
  SUBCASE("single full-strength rule reproduces its consequent") {
    const auto p = infer(rb, {{"a", 0}, {"b", 0.3}});
    for (double x = 0; x <= 1; x += 0.01) CHECK(p(x) == doctest::Approx(rb.output().terms[0](x)));
  }
  SUBCASE("missing input is named") {
    CHECK_THROWS_WITH_AS(infer(rb, {{"a", 0.2}}), doctest::Contains("'b'"), InvalidArgument);
  }
  SUBCASE("rule order does not matter") {
    auto rules = rb.rules();
    std::reverse(rules.begin(), rules.end());
    const RuleBase reversed("rev", rb.inputs(), rb.output(), rules);
    for (double a : {0.1, 0.4, 0.7}) {
      for (double b : {0.2, 0.9}) {
        CHECK(defuzzify_centroid(infer(rb, {{"a", a}, {"b", b}})) ==
              defuzzify_centroid(infer(reversed, {{"a", a}, {"b", b}})));
      }
    }
  }
  SUBCASE("no rule fires") {
    const auto p = aggregate(rb.output(), std::vector<Firing>{{0, 0.0}});
    CHECK(p.mass() == 0);
    CHECK_THROWS_AS(defuzzify_centroid(p), NoRuleFired);
  }
}

TEST_CASE("two-rule clipped profile") {
  const auto out = unit_variable("w");
  const std::vector<Firing> firings{{0, 0.3}, {1, 0.7}};
  const auto p = aggregate(out, firings);
  for (int k = 0; k <= 1000; ++k) {
    const double x = k / 1000.0;
    const double expected = std::max(std::min(0.3, std::max(0.0, 1 - 2 * x)),
                                     std::min(0.7, x <= 0.5 ? 2 * x : 2 - 2 * x));
    CHECK(p(x) == doctest::Approx(expected).epsilon(1e-12));
  }
  // tests/oracles/counselor_oracle.py
  CHECK(defuzzify_centroid(p) == doctest::Approx(0.4787958115183245).epsilon(1e-12));
}

TEST_CASE("centroid") {
  const auto out = unit_variable("w");
  SUBCASE("symmetric triangle") {
    CHECK(defuzzify_centroid(aggregate(out, std::vector<Firing>{{1, 1.0}})) == doctest::Approx(0.5));
    CHECK(defuzzify_centroid(aggregate(out, std::vector<Firing>{{1, 0.37}})) == doctest::Approx(0.5));
    CHECK(defuzzify_centroid(aggregate(out, std::vector<Firing>{{0, 0.4}, {2, 0.4}})) == doctest::Approx(0.5));
  }
  SUBCASE("closed form matches numeric integration") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 50; ++k) {
      std::vector<Firing> f{{0, u(rng)}, {1, u(rng)}, {2, u(rng)}};
      const auto p = aggregate(out, f);
      const double c = defuzzify_centroid(p);
      CHECK(c == doctest::Approx(trapezoid_centroid(p, 1e-4)).epsilon(1e-6));
      CHECK(c >= 0);
      CHECK(c <= 1);
    }
  }
}

TEST_CASE("rulebase completeness") {
  CHECK_NOTHROW(demo().check_completeness());
  auto rules = demo().rules();
  rules.pop_back();
  const RuleBase partial("partial", demo().inputs(), demo().output(), rules);
  CHECK_THROWS_AS(partial.check_completeness(), InvalidArgument);
}

TEST_CASE("rulebase parser errors carry line numbers") {
  const std::string text(kTwoInput);
  CHECK(parse_error_line("") == "1");
  CHECK(parse_error_line("fuzzy-rulebase 2\n") == "1");
  std::string bad_rule = text;
  bad_rule.replace(bad_rule.find("rule IF a is LOW"), 16, "rule IF a is TINY");
  CHECK(parse_error_line(bad_rule) == "15");
  std::string bad_number = text;
  bad_number.replace(bad_number.find("(0, 1) (1, 0)"), 13, "(0, one) (1, 0)");
  CHECK(parse_error_line(bad_number) == "9");
  std::string unclosed = text.substr(0, text.rfind("end"));
  CHECK(parse_error_line(unclosed) == "19");
  CHECK(parse_error_line("fuzzy-rulebase 1\nterm X (0, 1)\n") == "2");
}

TEST_CASE("bundled rulebase file loads and is complete") {
  const auto systems = load_rulebases(AIC_DEFAULT_RULES);
  REQUIRE(systems.size() == 3);
  for (const auto& [name, rb] : systems) {
    CHECK_NOTHROW(rb.check_completeness());
    for (const auto& v : rb.inputs()) CHECK_NOTHROW(v.check_coverage());
  }
  CHECK_THROWS_AS(load_rulebases("/nonexistent/rules.fz"), NotFound);
}

TEST_CASE("self-stock rulebase is monotone in expected return") {
  const auto rb = load_rulebases(AIC_DEFAULT_RULES).at("self_stock");
  auto w = [&](double e, double sigma, double eta) {
    return defuzzify_centroid(infer(rb, {{"E", e}, {"sigma", sigma}, {"eta", eta}}));
  };
  SUBCASE("exact where one risk row fires") {
    for (double sigma : {0.0, 0.5, 1.0}) {
      for (double eta : {0.0, 0.5, 1.0}) {
        double previous = -1;
        for (int k = 0; k <= 400; ++k) {
          const double v = w(-1 + k / 200.0, sigma, eta);
          CHECK(v >= previous - 1e-12);
          previous = v;
        }
      }
    }
  }
  SUBCASE("blended risk rows dip by at most the clipping artifact") {
    // Max-min clipping of two different three-level rows cannot be exactly
    // monotone; the measured worst dip of the bundled table is 1.2e-3.
    double worst = 0;
    for (int a = 0; a <= 20; ++a) {
      for (int b = 0; b <= 10; ++b) {
        double previous = -1;
        for (int k = 0; k <= 80; ++k) {
          const double v = w(-1 + k / 40.0, a / 20.0, b / 10.0);
          worst = std::max(worst, previous - v);
          previous = v;
        }
      }
    }
    CHECK(worst < 1.5e-3);
  }
}
