#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace aic {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

template <typename Scalar = double>
constexpr Scalar invalid() {
  return std::numeric_limits<Scalar>::quiet_NaN();
}

/// Calendar date stored as yyyymmdd. Ordering matches chronological order.
struct Date {
  std::int32_t ymd = 0;

  constexpr int year() const { return ymd / 10000; }
  constexpr int month() const { return (ymd / 100) % 100; }
  constexpr int day() const { return ymd % 100; }

  friend constexpr auto operator<=>(Date, Date) = default;
};

/// Accepts "YYYY-MM-DD" optionally followed by a time part ("2016-01-05 00:00:00").
Date parse_date(std::string_view text);
std::string to_string(Date date);

}  // namespace aic
