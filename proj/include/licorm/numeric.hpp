#ifndef LICORM_NUMERIC_HPP
#define LICORM_NUMERIC_HPP

#include <cmath>
#include <cstdio>
#include <string>

#include "licorm/error.hpp"

namespace licorm {

/// Neumaier-compensated running sum.
class CompensatedSum
{
public:
  CompensatedSum& operator+=(double v) noexcept
  {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
    return *this;
  }

  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Order of a moment or Lebesgue norm: a finite real >= 1, or infinity.
///
/// Infinity is a distinguished state, never a large floating value.
class MomentOrder
{
public:
  static MomentOrder finite(double p)
  {
    if (!std::isfinite(p) || !(p >= 1.0))
      detail::fail(ErrorCode::InvalidOrder, "moment order must be a finite real >= 1 or inf");
    return MomentOrder(p, false);
  }

  static MomentOrder infinity() noexcept { return MomentOrder(0.0, true); }

  /// Hölder conjugate exponent p/(p-1), with 1 <-> inf.
  MomentOrder conjugate() const
  {
    if (infinite_) return finite(1.0);
    if (p_ == 1.0) return infinity();
    return finite(p_ / (p_ - 1.0));
  }

  bool is_infinite() const noexcept { return infinite_; }
  double value() const noexcept { return p_; }

  std::string to_string() const
  {
    if (infinite_) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p_);
    return buf;
  }

  friend bool operator==(const MomentOrder&, const MomentOrder&) = default;

private:
  MomentOrder(double p, bool inf) : p_(p), infinite_(inf) {}

  double p_;
  bool infinite_;
};

} // namespace licorm

#endif // LICORM_NUMERIC_HPP
