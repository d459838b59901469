#include "aic/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <cctype>
#include <limits>
#include <optional>
#include <sstream>

namespace aic::fuzzy {

namespace {

double interpolate(const std::vector<Point>& points, double x) {
  if (points.empty()) return 0;
  if (x <= points.front().x) return points.front().y;
  if (x >= points.back().x) return points.back().y;
  const auto it = std::upper_bound(points.begin(), points.end(), x, [](double v, const Point& p) { return v < p.x; });
  const Point& b = *it;
  const Point& a = *(it - 1);
  if (b.x == a.x) return std::max(a.y, b.y);
  return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

}  // namespace

MembershipFunction::MembershipFunction(std::string label, std::vector<Point> points)
    : label_(std::move(label)), points_(std::move(points)) {
  if (points_.empty()) throw InvalidArgument("membership function '" + label_ + "' has no breakpoints");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].y >= 0 && points_[i].y <= 1)) {
      throw InvalidArgument("membership function '" + label_ + "' has a degree outside [0, 1]");
    }
    if (i > 0 && !(points_[i - 1].x < points_[i].x)) {
      throw InvalidArgument("membership function '" + label_ + "' breakpoints must be strictly increasing");
    }
  }
}

double MembershipFunction::operator()(double x) const { return interpolate(points_, x); }

double MembershipFunction::peak() const {
  const auto it = std::max_element(points_.begin(), points_.end(),
                                   [](const Point& a, const Point& b) { return a.y < b.y; });
  return it->x;
}

int FuzzyVariable::term_index(std::string_view label) const {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].label() == label) return static_cast<int>(i);
  }
  return -1;
}

void FuzzyVariable::check_coverage() const {
  std::vector<double> xs{lo, hi};
  for (const auto& t : terms) {
    for (const auto& p : t.points()) {
      if (p.x >= lo && p.x <= hi) xs.push_back(p.x);
    }
  }
  std::sort(xs.begin(), xs.end());
  // Check breakpoints and midpoints; a linear piece that is positive at both
  // ends and the middle is positive throughout.
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<double> probes{xs[i]};
    if (i + 1 < xs.size()) probes.push_back(0.5 * (xs[i] + xs[i + 1]));
    for (double x : probes) {
      bool covered = false;
      for (const auto& t : terms) covered = covered || t(x) > 0;
      if (!covered) throw InvalidArgument("variable '" + name + "' has no term covering " + std::to_string(x));
    }
  }
}

std::vector<TermDegree> fuzzify(const FuzzyVariable& variable, double crisp) {
  const double x = variable.clamp(crisp);
  std::vector<TermDegree> out;
  out.reserve(variable.terms.size());
  for (const auto& t : variable.terms) out.push_back({t.label(), t(x)});
  return out;
}

RuleBase::RuleBase(std::string name, std::vector<FuzzyVariable> inputs, FuzzyVariable output, std::vector<Rule> rules)
    : name_(std::move(name)), inputs_(std::move(inputs)), output_(std::move(output)), rules_(std::move(rules)) {
  if (output_.terms.empty()) throw InvalidArgument("rulebase '" + name_ + "' output has no terms");
  for (const auto& v : inputs_) {
    if (v.terms.empty()) throw InvalidArgument("rulebase '" + name_ + "' input '" + v.name + "' has no terms");
  }
  for (const auto& r : rules_) {
    if (r.antecedent.empty()) throw InvalidArgument("rulebase '" + name_ + "' has a rule without antecedent");
    for (const auto& c : r.antecedent) {
      if (c.variable < 0 || c.variable >= static_cast<int>(inputs_.size()) || c.term < 0 ||
          c.term >= static_cast<int>(inputs_[static_cast<std::size_t>(c.variable)].terms.size())) {
        throw InvalidArgument("rulebase '" + name_ + "' rule references an unknown variable or term");
      }
    }
    if (r.consequent < 0 || r.consequent >= static_cast<int>(output_.terms.size())) {
      throw InvalidArgument("rulebase '" + name_ + "' rule references an unknown output term");
    }
  }
}

int RuleBase::input_index(std::string_view name) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    if (inputs_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

void RuleBase::check_completeness() const {
  const std::size_t n = inputs_.size();
  std::vector<std::size_t> choice(n, 0);
  std::vector<double> crisp(n);
  while (true) {
    for (std::size_t v = 0; v < n; ++v) crisp[v] = inputs_[v].terms[choice[v]].peak();
    const auto firings = fire(*this, crisp);
    const bool any = std::any_of(firings.begin(), firings.end(), [](const Firing& f) { return f.strength > 0; });
    if (!any) {
      std::string combo;
      for (std::size_t v = 0; v < n; ++v) {
        combo += (v ? ", " : "") + inputs_[v].name + "=" + inputs_[v].terms[choice[v]].label();
      }
      throw InvalidArgument("rulebase '" + name_ + "' is incomplete: nothing fires for " + combo);
    }
    std::size_t v = 0;
    while (v < n && ++choice[v] == inputs_[v].terms.size()) choice[v++] = 0;
    if (v == n) break;
  }
}

std::vector<Firing> fire(const RuleBase& rulebase, std::span<const double> crisp_by_input) {
  const auto& inputs = rulebase.inputs();
  if (crisp_by_input.size() != inputs.size()) throw InvalidArgument("wrong number of crisp inputs");
  std::vector<std::vector<double>> degree(inputs.size());
  for (std::size_t v = 0; v < inputs.size(); ++v) {
    const double x = inputs[v].clamp(crisp_by_input[v]);
    for (const auto& t : inputs[v].terms) degree[v].push_back(t(x));
  }
  std::vector<Firing> out;
  out.reserve(rulebase.rules().size());
  for (const auto& rule : rulebase.rules()) {
    double strength = 1;
    for (const auto& c : rule.antecedent) {
      strength = std::min(strength, degree[static_cast<std::size_t>(c.variable)][static_cast<std::size_t>(c.term)]);
    }
    out.push_back({rule.consequent, strength});
  }
  return out;
}

std::vector<Firing> fire(const RuleBase& rulebase, const Inputs& inputs) {
  std::vector<double> crisp(rulebase.inputs().size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [name, value] : inputs) {
    const int idx = rulebase.input_index(name);
    if (idx >= 0) crisp[static_cast<std::size_t>(idx)] = value;
  }
  for (std::size_t v = 0; v < crisp.size(); ++v) {
    if (std::isnan(crisp[v])) {
      throw InvalidArgument("rulebase '" + rulebase.name() + "' is missing input '" + rulebase.inputs()[v].name + "'");
    }
  }
  return fire(rulebase, crisp);
}

double OutputProfile::operator()(double x) const {
  if (x < lo || x > hi) return 0;
  return interpolate(points, x);
}

double OutputProfile::mass() const {
  double m = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    m += 0.5 * (points[i].x - points[i - 1].x) * (points[i].y + points[i - 1].y);
  }
  return m;
}

OutputProfile aggregate(const FuzzyVariable& output, std::span<const Firing> firings) {
  const double lo = output.lo;
  const double hi = output.hi;
  // Max aggregation only needs the strongest firing per term.
  std::vector<double> strength(output.terms.size(), 0.0);
  for (const auto& f : firings) {
    auto& s = strength[static_cast<std::size_t>(f.term)];
    s = std::max(s, std::min(f.strength, 1.0));
  }
  struct Active {
    const MembershipFunction* term;
    double level;
    double operator()(double x) const { return std::min(level, (*term)(x)); }
  };
  std::vector<Active> active;
  for (std::size_t t = 0; t < strength.size(); ++t) {
    if (strength[t] > 0) active.push_back({&output.terms[t], strength[t]});
  }

  OutputProfile profile{lo, hi, {}};
  if (active.empty()) {
    profile.points = {{lo, 0}, {hi, 0}};
    return profile;
  }

  std::vector<double> xs{lo, hi};
  for (const auto& a : active) {
    const auto& pts = a.term->points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].x > lo && pts[i].x < hi) xs.push_back(pts[i].x);
      if (i + 1 < pts.size()) {
        const Point& p = pts[i];
        const Point& q = pts[i + 1];
        if ((p.y - a.level) * (q.y - a.level) < 0) {
          const double x = p.x + (q.x - p.x) * (a.level - p.y) / (q.y - p.y);
          if (x > lo && x < hi) xs.push_back(x);
        }
      }
    }
  }
  auto sort_unique = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  sort_unique(xs);

  // Each clipped term is linear between consecutive xs; add crossings
  // between different clipped terms so the maximum is linear too.
  std::vector<double> crossings;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = xs[i];
    const double b = xs[i + 1];
    for (std::size_t k = 0; k < active.size(); ++k) {
      for (std::size_t m = k + 1; m < active.size(); ++m) {
        const double da = active[k](a) - active[m](a);
        const double db = active[k](b) - active[m](b);
        if (da * db < 0) crossings.push_back(a + (b - a) * da / (da - db));
      }
    }
  }
  xs.insert(xs.end(), crossings.begin(), crossings.end());
  sort_unique(xs);

  profile.points.reserve(xs.size());
  for (double x : xs) {
    double y = 0;
    for (const auto& a : active) y = std::max(y, a(x));
    profile.points.push_back({x, y});
  }
  return profile;
}

OutputProfile infer(const RuleBase& rulebase, const Inputs& inputs) {
  const auto firings = fire(rulebase, inputs);
  return aggregate(rulebase.output(), firings);
}

double defuzzify_centroid(const OutputProfile& profile) {
  double area = 0;
  double moment = 0;
  for (std::size_t i = 1; i < profile.points.size(); ++i) {
    const auto& [a, ya] = profile.points[i - 1];
    const auto& [b, yb] = profile.points[i];
    const double w = b - a;
    area += 0.5 * w * (ya + yb);
    moment += w / 6.0 * (ya * (2 * a + b) + yb * (a + 2 * b));
  }
  if (!(area > 1e-15)) throw NoRuleFired("aggregated output has zero mass");
  return moment / area;
}

// ---------------------------------------------------------------------------
// Config format

namespace {

std::vector<std::string> tokenize(std::string line) {
  if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  for (char& c : line) {
    if (c == '(' || c == ')' || c == ',' || c == '[' || c == ']' || c == '\t' || c == '\r') c = ' ';
  }
  std::istringstream ss(line);
  std::vector<std::string> tokens;
  for (std::string t; ss >> t;) tokens.push_back(t);
  return tokens;
}

double to_number(const std::string& token, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number, got '" + token + "'");
  }
}

struct SystemDraft {
  std::string name;
  std::size_t line = 0;
  std::vector<FuzzyVariable> inputs;
  FuzzyVariable output;
  bool has_output = false;
  FuzzyVariable* current = nullptr;
  std::vector<Rule> rules;
};

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

Rule parse_rule(const std::vector<std::string>& tok, const SystemDraft& draft, std::size_t line) {
  // rule IF a is X AND b is Y THEN w is Z
  if (tok.size() < 8 || upper(tok[1]) != "IF") throw ParseError(line, "rule must read 'rule IF <var> is <term> ... THEN ...'");
  Rule rule;
  std::size_t i = 2;
  while (true) {
    if (i + 2 >= tok.size()) throw ParseError(line, "truncated rule");
    const std::string& var = tok[i];
    if (upper(tok[i + 1]) != "IS") throw ParseError(line, "expected 'is' after '" + var + "'");
    const std::string& term = tok[i + 2];
    int v = -1;
    for (std::size_t k = 0; k < draft.inputs.size(); ++k) {
      if (draft.inputs[k].name == var) v = static_cast<int>(k);
    }
    if (v < 0) throw ParseError(line, "unknown input variable '" + var + "'");
    const int t = draft.inputs[static_cast<std::size_t>(v)].term_index(term);
    if (t < 0) throw ParseError(line, "unknown term '" + term + "' for '" + var + "'");
    rule.antecedent.push_back({v, t});
    i += 3;
    if (i >= tok.size()) throw ParseError(line, "rule has no THEN part");
    const std::string joiner = upper(tok[i]);
    if (joiner == "AND") {
      ++i;
      continue;
    }
    if (joiner != "THEN") throw ParseError(line, "expected AND or THEN, got '" + tok[i] + "'");
    ++i;
    break;
  }
  if (i + 3 != tok.size() || upper(tok[i + 1]) != "IS") throw ParseError(line, "malformed THEN clause");
  if (!draft.has_output || tok[i] != draft.output.name) throw ParseError(line, "THEN must name the output variable");
  rule.consequent = draft.output.term_index(tok[i + 2]);
  if (rule.consequent < 0) throw ParseError(line, "unknown output term '" + tok[i + 2] + "'");
  return rule;
}

}  // namespace

std::map<std::string, RuleBase> parse_rulebases(std::istream& in) {
  std::map<std::string, RuleBase> out;
  std::string raw;
  std::size_t line = 0;
  bool header = false;
  std::optional<SystemDraft> draft;

  while (std::getline(in, raw)) {
    ++line;
    const auto tok = tokenize(raw);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];
    if (!header) {
      if (kw != "fuzzy-rulebase" || tok.size() != 2) throw ParseError(line, "expected header 'fuzzy-rulebase 1'");
      if (tok[1] != "1") throw ParseError(line, "unsupported rulebase format version " + tok[1]);
      header = true;
      continue;
    }
    if (kw == "system") {
      if (draft) throw ParseError(line, "nested system; close '" + draft->name + "' with 'end'");
      if (tok.size() != 2) throw ParseError(line, "expected 'system <name>'");
      if (out.contains(tok[1])) throw ParseError(line, "duplicate system '" + tok[1] + "'");
      draft.emplace();
      draft->name = tok[1];
      draft->line = line;
      continue;
    }
    if (!draft) throw ParseError(line, "'" + kw + "' outside a system block");
    if (kw == "input" || kw == "output") {
      if (tok.size() != 4) throw ParseError(line, "expected '" + kw + " <name> [lo, hi]'");
      if (!draft->rules.empty()) throw ParseError(line, "variables must precede rules");
      FuzzyVariable v;
      v.name = tok[1];
      v.lo = to_number(tok[2], line);
      v.hi = to_number(tok[3], line);
      if (!(v.lo < v.hi)) throw ParseError(line, "empty universe for '" + v.name + "'");
      if (kw == "input") {
        for (const auto& existing : draft->inputs) {
          if (existing.name == v.name) throw ParseError(line, "duplicate input '" + v.name + "'");
        }
        draft->inputs.push_back(std::move(v));
        draft->current = &draft->inputs.back();
      } else {
        if (draft->has_output) throw ParseError(line, "system has more than one output");
        draft->output = std::move(v);
        draft->has_output = true;
        draft->current = &draft->output;
      }
      continue;
    }
    if (kw == "term") {
      if (!draft->current) throw ParseError(line, "term before any variable");
      if (tok.size() < 4 || (tok.size() - 2) % 2 != 0) throw ParseError(line, "expected 'term <label> (x, y) ...'");
      if (draft->current->term_index(tok[1]) >= 0) throw ParseError(line, "duplicate term '" + tok[1] + "'");
      std::vector<Point> pts;
      for (std::size_t k = 2; k + 1 < tok.size(); k += 2) pts.push_back({to_number(tok[k], line), to_number(tok[k + 1], line)});
      try {
        draft->current->terms.emplace_back(tok[1], std::move(pts));
      } catch (const InvalidArgument& e) {
        throw ParseError(line, e.what());
      }
      continue;
    }
    if (kw == "rule") {
      draft->rules.push_back(parse_rule(tok, *draft, line));
      continue;
    }
    if (kw == "end") {
      if (!draft->has_output) throw ParseError(line, "system '" + draft->name + "' has no output");
      if (draft->inputs.empty()) throw ParseError(line, "system '" + draft->name + "' has no inputs");
      try {
        for (const auto& v : draft->inputs) v.check_coverage();
        draft->output.check_coverage();
        RuleBase rb(draft->name, std::move(draft->inputs), std::move(draft->output), std::move(draft->rules));
        rb.check_completeness();
        out.emplace(rb.name(), std::move(rb));
      } catch (const InvalidArgument& e) {
        throw ParseError(line, e.what());
      }
      draft.reset();
      continue;
    }
    throw ParseError(line, "unknown keyword '" + kw + "'");
  }
  if (!header) throw ParseError(line + 1, "missing header 'fuzzy-rulebase 1'");
  if (draft) throw ParseError(line + 1, "system '" + draft->name + "' is not closed with 'end'");
  return out;
}

std::map<std::string, RuleBase> load_rulebases(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("rulebase file " + path.string());
  return parse_rulebases(in);
}

}  // namespace aic::fuzzy
