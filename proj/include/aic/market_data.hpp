#pragma once

// Price/fundamentals ingestion for the Kaggle NYSE layout and the
// preprocessing chain applied before forecasting: moving average, windowed
// z-score and conversion to profit rates.

#include "aic/error.hpp"
#include "aic/types.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace aic {

struct PriceSeries {
  std::string symbol;
  std::vector<Date> days;
  Eigen::VectorXd open;
  Eigen::VectorXd close;
  Eigen::VectorXd low;
  Eigen::VectorXd high;
  Eigen::VectorXd volume;

  Index size() const { return static_cast<Index>(days.size()); }

  /// Throws DataIntegrityError when lengths, positivity or date order break.
  void validate() const;

  /// Copy of rows [first, first + count).
  PriceSeries slice(Index first, Index count) const;
};

/// Smoothed values aligned to the source index; entries before
/// `source_offset` are NaN.
template <typename Scalar>
struct SmoothedSeries {
  Vector<Scalar> values;
  Index window = 1;
  Index source_offset = 0;

  Index size() const { return values.size(); }
  Index valid_size() const { return values.size() - source_offset; }
  bool valid(Index t) const { return t >= source_offset && t < values.size(); }
};

template <typename Scalar>
struct NormalizationState {
  Index window = 0;
  Scalar mean = 0;
  /// Zero marks a degenerate window; the normalized value is then 0.
  Scalar std = 0;
};

template <typename Scalar>
struct NormalizedSeries {
  Vector<Scalar> values;
  std::vector<NormalizationState<Scalar>> states;
  Index first_valid = 0;

  bool valid(Index t) const { return t >= first_valid && t < values.size(); }
};

/// Profit rates; `values[k]` is the return from day `offset + k` to the next.
template <typename Scalar>
struct ReturnSeries {
  Vector<Scalar> values;
  Index offset = 0;
};

inline constexpr int kFundamentalCount = 5;

struct FundamentalRecord {
  std::string symbol;
  int year = 0;
  /// accounts receivable, capital expenditure, inventory, gross margin, income tax
  std::array<double, kFundamentalCount> features{};
};

struct PriceIngest {
  std::map<std::string, PriceSeries> series;
  std::vector<std::string> not_found;
  /// Symbols whose rows do not cover every trading day of the file's calendar.
  std::set<std::string> incomplete;
  std::vector<Date> calendar;
};

struct FundamentalIngest {
  std::map<std::string, std::vector<FundamentalRecord>> records;
  /// symbol -> reason it lacks usable fundamentals
  std::map<std::string, std::string> flagged;
};

PriceIngest ingest_prices(const std::filesystem::path& path, const std::vector<std::string>& symbols);

FundamentalIngest ingest_fundamentals(const std::filesystem::path& path,
                                      const std::vector<std::string>& symbols,
                                      const std::vector<int>& years);

/// Most recent record with year <= `year`, or nullptr.
const FundamentalRecord* latest_fundamentals(const std::vector<FundamentalRecord>& records, int year);

// ---------------------------------------------------------------------------
// Preprocessing

template <typename Derived>
SmoothedSeries<typename Derived::Scalar> moving_average(const Eigen::MatrixBase<Derived>& series, Index window) {
  using Scalar = typename Derived::Scalar;
  if (window < 1) throw InvalidArgument("moving average window must be >= 1");
  const Index n = series.size();
  if (window > n) {
    throw InsufficientHistory("moving average window " + std::to_string(window) + " exceeds series length " +
                              std::to_string(n));
  }
  SmoothedSeries<Scalar> out;
  out.window = window;
  out.source_offset = window - 1;
  out.values = Vector<Scalar>::Constant(n, invalid<Scalar>());
  // Each window is summed directly so the value at t depends only on its own
  // window (no running-sum drift on long series).
  for (Index t = window - 1; t < n; ++t) {
    out.values[t] = series.segment(t - window + 1, window).sum() / static_cast<Scalar>(window);
  }
  return out;
}

/// Population mean/std of `window` plus one trailing points.
template <typename Derived>
NormalizationState<typename Derived::Scalar> window_statistics(const Eigen::MatrixBase<Derived>& points,
                                                               Index window) {
  using Scalar = typename Derived::Scalar;
  const Scalar mean = points.mean();
  const Scalar var = (points.array() - mean).square().mean();
  Scalar std = std::sqrt(var);
  using std::abs;
  if (!(std > Scalar(1e-12) * std::max(Scalar(1), abs(mean)))) std = 0;
  return {window, mean, std};
}

template <typename Scalar>
Scalar normalize(Scalar value, const NormalizationState<Scalar>& state) {
  if (state.std == Scalar(0)) return Scalar(0);
  return (value - state.mean) / state.std;
}

template <typename Scalar>
Scalar denormalize(Scalar normalized, const NormalizationState<Scalar>& state) {
  return normalized * state.std + state.mean;
}

/// Normalizes position t with the statistics of [t - window, t] (window + 1
/// points, endpoint included). Inputs before `first` are treated as invalid.
template <typename Derived>
NormalizedSeries<typename Derived::Scalar> zscore_normalize(const Eigen::MatrixBase<Derived>& series, Index window,
                                                            Index first = 0) {
  using Scalar = typename Derived::Scalar;
  if (window < 1) throw InvalidArgument("normalization window must be >= 1");
  const Index n = series.size();
  if (first + window >= n) {
    throw InsufficientHistory("z-score window " + std::to_string(window) + " needs " + std::to_string(window + 1) +
                              " valid points, have " + std::to_string(std::max<Index>(0, n - first)));
  }
  NormalizedSeries<Scalar> out;
  out.first_valid = first + window;
  out.values = Vector<Scalar>::Constant(n, invalid<Scalar>());
  out.states.resize(static_cast<std::size_t>(n));
  for (Index t = out.first_valid; t < n; ++t) {
    const auto state = window_statistics(series.segment(t - window, window + 1), window);
    out.states[static_cast<std::size_t>(t)] = state;
    out.values[t] = normalize(series[t], state);
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> denormalize(const NormalizedSeries<Scalar>& normalized) {
  Vector<Scalar> out = Vector<Scalar>::Constant(normalized.values.size(), invalid<Scalar>());
  for (Index t = normalized.first_valid; t < normalized.values.size(); ++t) {
    out[t] = denormalize(normalized.values[t], normalized.states[static_cast<std::size_t>(t)]);
  }
  return out;
}

template <typename Scalar>
ReturnSeries<Scalar> to_returns(const SmoothedSeries<Scalar>& series) {
  ReturnSeries<Scalar> out;
  out.offset = series.source_offset;
  const Index count = series.valid_size();
  if (count < 1) return out;
  for (Index t = series.source_offset; t < series.size(); ++t) {
    if (!(series.values[t] > Scalar(0))) {
      throw InvalidPrice("non-positive value at index " + std::to_string(t));
    }
  }
  out.values.resize(count - 1);
  for (Index k = 0; k + 1 < count; ++k) {
    const Index t = series.source_offset + k;
    out.values[k] = (series.values[t + 1] - series.values[t]) / series.values[t];
  }
  return out;
}

}  // namespace aic
