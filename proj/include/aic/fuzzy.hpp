#pragma once

// Mamdani inference: singleton fuzzification, min conjunction, clipped
// consequents, max aggregation and closed-form centroid defuzzification on
// piecewise-linear membership functions.

#include "aic/error.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aic::fuzzy {

struct Point {
  double x = 0;
  double y = 0;
};

/// Piecewise-linear membership; outside its breakpoints it holds the end
/// degree (a shoulder when that degree is non-zero).
class MembershipFunction {
 public:
  MembershipFunction() = default;
  MembershipFunction(std::string label, std::vector<Point> points);

  const std::string& label() const { return label_; }
  const std::vector<Point>& points() const { return points_; }

  double operator()(double x) const;
  /// Smallest x reaching the maximal degree.
  double peak() const;

 private:
  std::string label_;
  std::vector<Point> points_;
};

struct FuzzyVariable {
  std::string name;
  double lo = 0;
  double hi = 1;
  std::vector<MembershipFunction> terms;

  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
  /// Index of `label`, or -1.
  int term_index(std::string_view label) const;
  /// Throws InvalidArgument when some point of the universe has no positive degree.
  void check_coverage() const;
};

struct TermDegree {
  std::string term;
  double degree = 0;
};

/// Degrees of every term at the (clamped) crisp value.
std::vector<TermDegree> fuzzify(const FuzzyVariable& variable, double crisp);

struct Clause {
  int variable = 0;  // index into RuleBase::inputs
  int term = 0;
};

struct Rule {
  std::vector<Clause> antecedent;
  int consequent = 0;  // term index of the output variable
};

class RuleBase {
 public:
  RuleBase() = default;
  RuleBase(std::string name, std::vector<FuzzyVariable> inputs, FuzzyVariable output, std::vector<Rule> rules);

  const std::string& name() const { return name_; }
  const std::vector<FuzzyVariable>& inputs() const { return inputs_; }
  const FuzzyVariable& output() const { return output_; }
  const std::vector<Rule>& rules() const { return rules_; }

  /// Index of input `name`, or -1.
  int input_index(std::string_view name) const;

  /// Throws InvalidArgument if some combination of term peaks fires no rule.
  void check_completeness() const;

 private:
  std::string name_;
  std::vector<FuzzyVariable> inputs_;
  FuzzyVariable output_;
  std::vector<Rule> rules_;
};

/// Firing strength of an output term.
struct Firing {
  int term = 0;
  double strength = 0;
};

using Inputs = std::vector<std::pair<std::string, double>>;

/// Strength of every rule (min over antecedent degrees), by rule order.
std::vector<Firing> fire(const RuleBase& rulebase, std::span<const double> crisp_by_input);
std::vector<Firing> fire(const RuleBase& rulebase, const Inputs& inputs);

/// Aggregated output membership as an exact piecewise-linear profile.
struct OutputProfile {
  double lo = 0;
  double hi = 1;
  std::vector<Point> points;

  double operator()(double x) const;
  double mass() const;
};

/// max over firings of min(strength, term(x)) on the output universe.
OutputProfile aggregate(const FuzzyVariable& output, std::span<const Firing> firings);

OutputProfile infer(const RuleBase& rulebase, const Inputs& inputs);

/// Centroid of the profile, integrated exactly segment by segment.
double defuzzify_centroid(const OutputProfile& profile);

/// Parses one or more `system` blocks. Errors carry the offending line number.
std::map<std::string, RuleBase> parse_rulebases(std::istream& in);
std::map<std::string, RuleBase> load_rulebases(const std::filesystem::path& path);

}  // namespace aic::fuzzy
