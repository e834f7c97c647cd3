#pragma once

#include <cmath>
#include <limits>

namespace c4proc {

/// Signed real stored as sign * exp(big + small).
///
/// `big` holds exponents that may be astronomically large (W(t^3 + t) with
/// W ~ 1e36); `small` holds ordinary logarithms. Keeping them apart lets two
/// terms that share the exact same big exponent be added and compared at full
/// precision, which a single double log would lose entirely.
class LogReal {
 public:
  constexpr LogReal() = default;

  [[nodiscard]] static LogReal from(double v) {
    if (v == 0.0) return {};
    return LogReal(v > 0 ? 1 : -1, 0.0, std::log(std::fabs(v)));
  }
  /// exp(x), with x kept exact in the big exponent.
  [[nodiscard]] static LogReal exp(double x) { return LogReal(1, x, 0.0); }
  /// sign * exp(big + small).
  [[nodiscard]] static LogReal from_parts(int sign, double big, double small) {
    return sign == 0 ? LogReal{} : LogReal(sign > 0 ? 1 : -1, big, small);
  }

  [[nodiscard]] int sign() const { return sign_; }
  [[nodiscard]] bool is_zero() const { return sign_ == 0; }
  [[nodiscard]] double big() const { return big_; }
  [[nodiscard]] double small() const { return small_; }
  /// log|v|; -inf for zero.
  [[nodiscard]] double log_abs() const {
    return sign_ == 0 ? -std::numeric_limits<double>::infinity() : big_ + small_;
  }
  /// May overflow to +-inf or underflow to 0.
  [[nodiscard]] double to_double() const { return sign_ == 0 ? 0.0 : sign_ * std::exp(big_ + small_); }

  [[nodiscard]] LogReal abs() const { return LogReal(sign_ == 0 ? 0 : 1, big_, small_); }
  [[nodiscard]] LogReal operator-() const { return LogReal(-sign_, big_, small_); }

  friend LogReal operator*(const LogReal& a, const LogReal& b) {
    if (a.sign_ == 0 || b.sign_ == 0) return {};
    return LogReal(a.sign_ * b.sign_, a.big_ + b.big_, a.small_ + b.small_);
  }
  friend LogReal operator/(const LogReal& a, const LogReal& b) {
    if (a.sign_ == 0) return {};
    return LogReal(a.sign_ * b.sign_, a.big_ - b.big_, a.small_ - b.small_);
  }
  friend LogReal operator+(const LogReal& a, const LogReal& b) {
    if (a.sign_ == 0) return b;
    if (b.sign_ == 0) return a;
    const double d = magnitude_gap(a, b);
    const LogReal& hi = d >= 0 ? a : b;
    const LogReal& lo = d >= 0 ? b : a;
    const double gap = std::fabs(d);
    if (gap > kNegligibleGap) return hi;
    const double r = std::exp(-gap);
    if (hi.sign_ == lo.sign_) return LogReal(hi.sign_, hi.big_, hi.small_ + std::log1p(r));
    if (gap == 0.0) return {};
    return LogReal(hi.sign_, hi.big_, hi.small_ + std::log1p(-r));
  }
  friend LogReal operator-(const LogReal& a, const LogReal& b) { return a + (-b); }

  LogReal& operator+=(const LogReal& o) { return *this = *this + o; }
  LogReal& operator*=(const LogReal& o) { return *this = *this * o; }

  /// -1, 0 or 1 as a < b, a == b, a > b.
  friend int compare(const LogReal& a, const LogReal& b) {
    if (a.sign_ != b.sign_) return a.sign_ < b.sign_ ? -1 : 1;
    if (a.sign_ == 0) return 0;
    const double d = magnitude_gap(a, b);
    const int mag = d > 0 ? 1 : (d < 0 ? -1 : 0);
    return a.sign_ > 0 ? mag : -mag;
  }
  friend bool operator<(const LogReal& a, const LogReal& b) { return compare(a, b) < 0; }
  friend bool operator<=(const LogReal& a, const LogReal& b) { return compare(a, b) <= 0; }
  friend bool operator>(const LogReal& a, const LogReal& b) { return compare(a, b) > 0; }
  friend bool operator>=(const LogReal& a, const LogReal& b) { return compare(a, b) >= 0; }

 private:
  // exp(-800) is below the smallest subnormal double.
  static constexpr double kNegligibleGap = 800.0;

  LogReal(int sign, double big, double small) : sign_(sign), big_(big), small_(small) {}

  // log|a| - log|b|, exact in `small` when the big parts coincide.
  static double magnitude_gap(const LogReal& a, const LogReal& b) {
    if (a.big_ == b.big_) return a.small_ - b.small_;
    return (a.big_ - b.big_) + (a.small_ - b.small_);
  }

  int sign_ = 0;
  double big_ = 0.0;
  double small_ = 0.0;
};

}  // namespace c4proc
