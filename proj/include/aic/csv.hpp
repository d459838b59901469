#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace aic::csv {

/// Reads RFC-4180 style comma-separated records (quoted fields may contain
/// commas, doubled quotes and newlines). Tracks the 1-based line number of
/// the record most recently returned.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// False at end of input.
  bool next(std::vector<std::string>& fields);

  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Quotes a field when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

double parse_double(std::string_view text, std::size_t line, std::string_view column);

}  // namespace aic::csv
