#pragma once

// ADX family and parabolic SAR.
//
// Day index t doubles as the recurrence index: day 0 only supplies the
// previous close/high/low for t = 1, so the raw TR/PDM/MDM series are valid
// from t = 1, the smoothed ones from t = tau + 1 and ADX from t = 2 tau + 1.
// Invalid entries are NaN.

#include "aic/error.hpp"
#include "aic/market_data.hpp"
#include "aic/types.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace aic {

inline constexpr Index kDefaultTau = 14;

template <typename Scalar>
Scalar true_range(Scalar h, Scalar l, Scalar c_prev) {
  if (h < l) throw InvalidArgument("inverted bar: high below low");
  using std::abs;
  return std::max({h - l, abs(h - c_prev), abs(l - c_prev)});
}

/// Wilder smoothing of `raw`, whose values are meaningful from index `first`.
/// Invalid before first + tau; seeded there with the mean of the tau raw
/// values starting at `first`; afterwards S(t) = ((tau - 1) S(t - 1) + raw(t)) / tau.
/// The raw value at the seed index itself is not used.
template <typename Derived>
Vector<typename Derived::Scalar> wilder_smooth(const Eigen::MatrixBase<Derived>& raw, Index tau, Index first = 0) {
  using Scalar = typename Derived::Scalar;
  if (tau < 1) throw InvalidArgument("smoothing period must be >= 1");
  const Index n = raw.size();
  const Index seed = first + tau;
  if (n <= seed) {
    throw InsufficientHistory("smoothing needs more than " + std::to_string(seed) + " points, have " +
                              std::to_string(n));
  }
  Vector<Scalar> out = Vector<Scalar>::Constant(n, invalid<Scalar>());
  out[seed] = raw.segment(first, tau).sum() / static_cast<Scalar>(tau);
  for (Index t = seed + 1; t < n; ++t) {
    out[t] = (static_cast<Scalar>(tau - 1) * out[t - 1] + raw[t]) / static_cast<Scalar>(tau);
  }
  return out;
}

template <typename Scalar>
struct DirectionalMovement {
  Vector<Scalar> pdm;
  Vector<Scalar> mdm;
};

/// PDM = max(H(t) - H(t-1), 0), MDM = max(L(t-1) - L(t), 0); index 0 is NaN.
template <typename DerivedH, typename DerivedL>
DirectionalMovement<typename DerivedH::Scalar> directional_movements(const Eigen::MatrixBase<DerivedH>& high,
                                                                     const Eigen::MatrixBase<DerivedL>& low) {
  using Scalar = typename DerivedH::Scalar;
  const Index n = high.size();
  if (low.size() != n) throw InvalidArgument("high/low length mismatch");
  if (n < 2) throw InsufficientHistory("directional movement needs at least 2 points");
  DirectionalMovement<Scalar> dm{Vector<Scalar>::Constant(n, invalid<Scalar>()),
                                 Vector<Scalar>::Constant(n, invalid<Scalar>())};
  for (Index t = 1; t < n; ++t) {
    dm.pdm[t] = std::max(high[t] - high[t - 1], Scalar(0));
    dm.mdm[t] = std::max(low[t - 1] - low[t], Scalar(0));
  }
  return dm;
}

template <typename Scalar>
struct AdxSeries {
  Vector<Scalar> tr, str, spdm, smdm, spdi, smdi, dx, adx;
  Index tau = kDefaultTau;

  Index di_valid_from() const { return tau + 1; }
  Index adx_valid_from() const { return 2 * tau + 1; }
};

/// ADX chain. SPDI/SMDI are 0 when STR is 0 and DX is 0 when SPDI + SMDI is 0.
/// ADX reuses the smoothing recurrence over DX starting at its first valid
/// day, which puts the seed at 2 tau + 1.
template <typename DerivedH, typename DerivedL, typename DerivedC>
AdxSeries<typename DerivedH::Scalar> compute_adx(const Eigen::MatrixBase<DerivedH>& high,
                                                 const Eigen::MatrixBase<DerivedL>& low,
                                                 const Eigen::MatrixBase<DerivedC>& close, Index tau = kDefaultTau) {
  using Scalar = typename DerivedH::Scalar;
  const Index n = high.size();
  if (low.size() != n || close.size() != n) throw InvalidArgument("price series length mismatch");
  if (tau < 1) throw InvalidArgument("smoothing period must be >= 1");
  if (n <= 2 * tau + 1) {
    throw InsufficientHistory("ADX with tau " + std::to_string(tau) + " needs more than " +
                              std::to_string(2 * tau + 1) + " days, have " + std::to_string(n));
  }

  AdxSeries<Scalar> s;
  s.tau = tau;
  s.tr = Vector<Scalar>::Constant(n, invalid<Scalar>());
  for (Index t = 1; t < n; ++t) s.tr[t] = true_range(high[t], low[t], close[t - 1]);
  const auto dm = directional_movements(high, low);

  s.str = wilder_smooth(s.tr, tau, 1);
  s.spdm = wilder_smooth(dm.pdm, tau, 1);
  s.smdm = wilder_smooth(dm.mdm, tau, 1);

  s.spdi = Vector<Scalar>::Constant(n, invalid<Scalar>());
  s.smdi = Vector<Scalar>::Constant(n, invalid<Scalar>());
  s.dx = Vector<Scalar>::Constant(n, invalid<Scalar>());
  for (Index t = tau + 1; t < n; ++t) {
    const Scalar str = s.str[t];
    s.spdi[t] = str > Scalar(0) ? Scalar(100) * s.spdm[t] / str : Scalar(0);
    s.smdi[t] = str > Scalar(0) ? Scalar(100) * s.smdm[t] / str : Scalar(0);
    const Scalar sum = s.spdi[t] + s.smdi[t];
    using std::abs;
    s.dx[t] = sum > Scalar(0) ? Scalar(100) * abs(s.spdi[t] - s.smdi[t]) / sum : Scalar(0);
  }
  s.adx = wilder_smooth(s.dx, tau, tau + 1);
  return s;
}

template <typename Scalar>
AdxSeries<Scalar> compute_adx(const PriceSeries& series, Index tau = kDefaultTau) {
  return compute_adx(series.high.cast<Scalar>(), series.low.cast<Scalar>(), series.close.cast<Scalar>(), tau);
}

enum class Trend { kUp, kDown };

enum class InitialTrendRule {
  /// Up when close(3) >= close(0), down otherwise.
  kCloseComparison,
  kUp,
  kDown,
};

struct SarOptions {
  InitialTrendRule initial_trend = InitialTrendRule::kCloseComparison;
  /// Flip when the bar crosses SAR (UT: low below SAR, DT: high above SAR).
  bool reverse_on_cross = true;
};

inline constexpr Index kSarStart = 4;
inline constexpr int kAfMaxSteps = 10;

/// AF is stored as an integer number of 0.02 steps so its value is exact.
template <typename Scalar>
constexpr Scalar af_value(int steps) {
  return Scalar(0.02) * static_cast<Scalar>(steps);
}

template <typename Scalar>
struct SarSeries {
  Vector<Scalar> sar;
  Vector<Scalar> ep;
  std::vector<int> af_steps;
  std::vector<Trend> trend;
};

/// Parabolic SAR. At t = 4 SAR is the four-day low (UT) or high (DT);
/// afterwards SAR(t) = SAR(t-1) + AF(t-1) (EP(t-1) - SAR(t-1)). EP is the
/// four-day extreme in the trend direction; AF starts at 0.02, steps by 0.02
/// whenever EP changes, saturates at 0.2 and resets on a trend flip. On a
/// flip SAR jumps to the previous EP.
template <typename DerivedH, typename DerivedL, typename DerivedC>
SarSeries<typename DerivedH::Scalar> compute_sar(const Eigen::MatrixBase<DerivedH>& high,
                                                 const Eigen::MatrixBase<DerivedL>& low,
                                                 const Eigen::MatrixBase<DerivedC>& close,
                                                 const SarOptions& options = {}) {
  using Scalar = typename DerivedH::Scalar;
  const Index n = high.size();
  if (low.size() != n || close.size() != n) throw InvalidArgument("price series length mismatch");
  if (n < kSarStart + 1) throw InsufficientHistory("SAR needs at least 5 days, have " + std::to_string(n));

  SarSeries<Scalar> s;
  s.sar = Vector<Scalar>::Constant(n, invalid<Scalar>());
  s.ep = Vector<Scalar>::Constant(n, invalid<Scalar>());
  s.af_steps.assign(static_cast<std::size_t>(n), 0);
  s.trend.assign(static_cast<std::size_t>(n), Trend::kUp);

  auto window_high = [&](Index t) { return high.segment(t - 3, 4).maxCoeff(); };
  auto window_low = [&](Index t) { return low.segment(t - 3, 4).minCoeff(); };

  Trend trend = Trend::kUp;
  switch (options.initial_trend) {
    case InitialTrendRule::kCloseComparison: trend = close[3] >= close[0] ? Trend::kUp : Trend::kDown; break;
    case InitialTrendRule::kUp: trend = Trend::kUp; break;
    case InitialTrendRule::kDown: trend = Trend::kDown; break;
  }

  Index t = kSarStart;
  s.sar[t] = trend == Trend::kUp ? window_low(t) : window_high(t);
  s.ep[t] = trend == Trend::kUp ? window_high(t) : window_low(t);
  int steps = 1;
  s.af_steps[t] = steps;
  s.trend[t] = trend;

  for (t = kSarStart + 1; t < n; ++t) {
    Scalar sar = s.sar[t - 1] + af_value<Scalar>(steps) * (s.ep[t - 1] - s.sar[t - 1]);
    const bool flip = options.reverse_on_cross &&
                      (trend == Trend::kUp ? low[t] < sar : high[t] > sar);
    Scalar ep;
    if (flip) {
      trend = trend == Trend::kUp ? Trend::kDown : Trend::kUp;
      sar = s.ep[t - 1];
      ep = trend == Trend::kUp ? window_high(t) : window_low(t);
      steps = 1;
    } else {
      ep = trend == Trend::kUp ? window_high(t) : window_low(t);
      if (ep != s.ep[t - 1]) steps = std::min(steps + 1, kAfMaxSteps);
    }
    s.sar[t] = sar;
    s.ep[t] = ep;
    s.af_steps[static_cast<std::size_t>(t)] = steps;
    s.trend[static_cast<std::size_t>(t)] = trend;
  }
  return s;
}

template <typename Scalar>
SarSeries<Scalar> compute_sar(const PriceSeries& series, const SarOptions& options = {}) {
  return compute_sar(series.high.cast<Scalar>(), series.low.cast<Scalar>(), series.close.cast<Scalar>(), options);
}

struct IndicatorSeries {
  Eigen::VectorXd adx;
  Eigen::VectorXd sar;
  Eigen::VectorXd spdi;
  Eigen::VectorXd smdi;
  /// First index at which all four series are valid (2 tau + 1).
  Index valid_from = 0;
};

inline IndicatorSeries indicator_pipeline(const PriceSeries& series, Index tau = kDefaultTau,
                                          const SarOptions& sar_options = {}) {
  const auto adx = compute_adx<double>(series, tau);
  const auto sar = compute_sar<double>(series, sar_options);
  return {adx.adx, sar.sar, adx.spdi, adx.smdi, std::max(adx.adx_valid_from(), kSarStart)};
}

}  // namespace aic
