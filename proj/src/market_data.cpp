#include "aic/market_data.hpp"

#include "aic/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_map>

namespace aic {

Date parse_date(std::string_view text) {
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
    throw InvalidArgument("malformed date '" + std::string(text) + "'");
  }
  auto field = [&](std::size_t pos, std::size_t len) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
    if (ec != std::errc() || ptr != text.data() + pos + len) {
      throw InvalidArgument("malformed date '" + std::string(text) + "'");
    }
    return value;
  };
  const int y = field(0, 4);
  const int m = field(5, 2);
  const int d = field(8, 2);
  if (m < 1 || m > 12 || d < 1 || d > 31) throw InvalidArgument("malformed date '" + std::string(text) + "'");
  return Date{y * 10000 + m * 100 + d};
}

std::string to_string(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", date.year(), date.month(), date.day());
  return buf;
}

void PriceSeries::validate() const {
  const Index n = size();
  if (open.size() != n || close.size() != n || low.size() != n || high.size() != n || volume.size() != n) {
    throw DataIntegrityError(symbol + ": series lengths differ from day count");
  }
  for (Index t = 0; t < n; ++t) {
    if (!(open[t] > 0 && close[t] > 0 && low[t] > 0 && high[t] > 0)) {
      throw DataIntegrityError(symbol + ": non-positive price on " + to_string(days[t]));
    }
    if (!(volume[t] >= 0)) throw DataIntegrityError(symbol + ": negative volume on " + to_string(days[t]));
    if (t > 0 && !(days[t - 1] < days[t])) {
      throw DataIntegrityError(symbol + ": dates not strictly increasing at " + to_string(days[t]));
    }
  }
}

PriceSeries PriceSeries::slice(Index first, Index count) const {
  PriceSeries out;
  out.symbol = symbol;
  out.days.assign(days.begin() + first, days.begin() + first + count);
  out.open = open.segment(first, count);
  out.close = close.segment(first, count);
  out.low = low.segment(first, count);
  out.high = high.segment(first, count);
  out.volume = volume.segment(first, count);
  return out;
}

namespace {

using ColumnMap = std::unordered_map<std::string, std::size_t>;

ColumnMap header_columns(const std::vector<std::string>& header) {
  ColumnMap map;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name = header[i];
    // Tolerate a UTF-8 byte-order mark on the first column.
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
    map.emplace(std::move(name), i);
  }
  return map;
}

std::size_t require_column(const ColumnMap& map, const std::string& name) {
  const auto it = map.find(name);
  if (it == map.end()) throw ParseError(1, "missing column '" + name + "'");
  return it->second;
}

std::ifstream open_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("file " + path.string());
  return in;
}

struct PriceRow {
  Date date;
  double open, close, low, high, volume;
};

}  // namespace

PriceIngest ingest_prices(const std::filesystem::path& path, const std::vector<std::string>& symbols) {
  auto in = open_file(path);
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError(1, "empty prices file");
  const auto columns = header_columns(fields);
  const std::size_t c_date = require_column(columns, "date");
  const std::size_t c_symbol = require_column(columns, "symbol");
  const std::size_t c_open = require_column(columns, "open");
  const std::size_t c_close = require_column(columns, "close");
  const std::size_t c_low = require_column(columns, "low");
  const std::size_t c_high = require_column(columns, "high");
  const std::size_t c_volume = require_column(columns, "volume");
  const std::size_t width = fields.size();

  const std::set<std::string> wanted(symbols.begin(), symbols.end());
  std::map<std::string, std::vector<PriceRow>> rows;
  std::set<Date> calendar;

  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != width) {
      throw ParseError(reader.line(), "expected " + std::to_string(width) + " fields, got " +
                                          std::to_string(fields.size()));
    }
    Date date;
    try {
      date = parse_date(fields[c_date]);
    } catch (const InvalidArgument& e) {
      throw ParseError(reader.line(), e.what());
    }
    calendar.insert(date);
    if (!wanted.contains(fields[c_symbol])) continue;
    const auto line = reader.line();
    rows[fields[c_symbol]].push_back({date, csv::parse_double(fields[c_open], line, "open"),
                                      csv::parse_double(fields[c_close], line, "close"),
                                      csv::parse_double(fields[c_low], line, "low"),
                                      csv::parse_double(fields[c_high], line, "high"),
                                      csv::parse_double(fields[c_volume], line, "volume")});
  }

  PriceIngest out;
  out.calendar.assign(calendar.begin(), calendar.end());
  for (const auto& symbol : symbols) {
    auto it = rows.find(symbol);
    if (it == rows.end()) {
      out.not_found.push_back(symbol);
      continue;
    }
    auto& list = it->second;
    std::stable_sort(list.begin(), list.end(), [](const PriceRow& a, const PriceRow& b) { return a.date < b.date; });
    for (std::size_t k = 1; k < list.size(); ++k) {
      if (!(list[k - 1].date < list[k].date)) {
        throw DataIntegrityError(symbol + ": duplicate rows for " + to_string(list[k].date));
      }
    }
    PriceSeries series;
    series.symbol = symbol;
    const Index n = static_cast<Index>(list.size());
    series.open.resize(n);
    series.close.resize(n);
    series.low.resize(n);
    series.high.resize(n);
    series.volume.resize(n);
    for (Index t = 0; t < n; ++t) {
      const auto& row = list[static_cast<std::size_t>(t)];
      series.days.push_back(row.date);
      series.open[t] = row.open;
      series.close[t] = row.close;
      series.low[t] = row.low;
      series.high[t] = row.high;
      series.volume[t] = row.volume;
    }
    series.validate();
    if (series.days != out.calendar) out.incomplete.insert(symbol);
    out.series.emplace(symbol, std::move(series));
  }
  return out;
}

FundamentalIngest ingest_fundamentals(const std::filesystem::path& path, const std::vector<std::string>& symbols,
                                      const std::vector<int>& years) {
  FundamentalIngest out;
  if (years.empty()) return out;

  auto in = open_file(path);
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError(1, "empty fundamentals file");
  const auto columns = header_columns(fields);
  const std::size_t c_symbol = require_column(columns, "Ticker Symbol");
  const std::size_t c_period = require_column(columns, "Period Ending");
  const std::array<std::pair<const char*, std::size_t>, kFundamentalCount> feature_columns{{
      {"Accounts Receivable", require_column(columns, "Accounts Receivable")},
      {"Capital Expenditures", require_column(columns, "Capital Expenditures")},
      {"Inventory", require_column(columns, "Inventory")},
      {"Gross Margin", require_column(columns, "Gross Margin")},
      {"Income Tax", require_column(columns, "Income Tax")},
  }};
  const auto for_year = columns.find("For Year");
  const std::size_t width = fields.size();

  const std::set<std::string> wanted(symbols.begin(), symbols.end());
  const std::set<int> wanted_years(years.begin(), years.end());

  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != width) {
      throw ParseError(reader.line(), "expected " + std::to_string(width) + " fields, got " +
                                          std::to_string(fields.size()));
    }
    const std::string& symbol = fields[c_symbol];
    if (!wanted.contains(symbol)) continue;

    int year = 0;
    if (for_year != columns.end() && !fields[for_year->second].empty()) {
      year = static_cast<int>(csv::parse_double(fields[for_year->second], reader.line(), "For Year"));
    } else {
      try {
        year = parse_date(fields[c_period]).year();
      } catch (const InvalidArgument& e) {
        throw ParseError(reader.line(), e.what());
      }
    }
    if (!wanted_years.contains(year)) continue;

    FundamentalRecord record;
    record.symbol = symbol;
    record.year = year;
    bool complete = true;
    for (int k = 0; k < kFundamentalCount; ++k) {
      const auto& [name, column] = feature_columns[static_cast<std::size_t>(k)];
      const std::string& cell = fields[column];
      if (cell.empty()) {
        complete = false;
        continue;
      }
      record.features[static_cast<std::size_t>(k)] = csv::parse_double(cell, reader.line(), name);
    }
    if (!complete) {
      out.flagged.emplace(symbol, "missing fundamental features for " + std::to_string(year));
      continue;
    }
    auto& list = out.records[symbol];
    const bool seen = std::any_of(list.begin(), list.end(), [&](const auto& r) { return r.year == year; });
    if (!seen) list.push_back(record);
  }

  for (const auto& symbol : symbols) {
    auto it = out.records.find(symbol);
    if (it == out.records.end()) {
      out.flagged.emplace(symbol, "lacks fundamental features");
      continue;
    }
    std::sort(it->second.begin(), it->second.end(),
              [](const FundamentalRecord& a, const FundamentalRecord& b) { return a.year < b.year; });
  }
  return out;
}

const FundamentalRecord* latest_fundamentals(const std::vector<FundamentalRecord>& records, int year) {
  const FundamentalRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.year <= year && (best == nullptr || r.year > best->year)) best = &r;
  }
  return best;
}

}  // namespace aic
