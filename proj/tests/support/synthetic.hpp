#pragma once

// Synthetic OHLCV and fundamentals in the Kaggle NYSE file layout.

#include "aic/market_data.hpp"

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace aic::synthetic {

struct Options {
  std::vector<std::string> symbols{"AAA", "BBB", "CCC", "DDD"};
  Index days = 400;
  std::uint64_t seed = 7;
  Date start{20140102};
  double drift = 0.0003;
  double volatility = 0.015;
  /// Symbols missing one mid-series day (incomplete time series).
  std::set<std::string> incomplete;
  /// Symbols without any fundamentals row.
  std::set<std::string> no_fundamentals;
  /// Symbols whose latest fundamentals row has an empty cell.
  std::set<std::string> missing_cell;
  std::vector<int> fundamental_years{2012, 2013, 2014, 2015};
};

/// Consecutive weekdays starting at `start`.
std::vector<Date> business_days(Date start, Index count);

/// Geometric random walk with consistent open/high/low/close and volume.
PriceSeries random_walk(const std::string& symbol, Index days, std::uint64_t seed, double drift = 0.0003,
                        double volatility = 0.015, Date start = Date{20100104});

/// Writes prices.csv and fundamentals.csv into `dir` (created if needed).
void write_dataset(const std::filesystem::path& dir, const Options& options);

}  // namespace aic::synthetic
