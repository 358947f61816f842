#pragma once

// Deformed integer arithmetic at q = exp(2*pi*i/(p+1)).

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace paracalc {

using Complex = std::complex<double>;

/// Largest supported nilpotency order.
inline constexpr int kMaxOrder = 64;

/// Default absolute tolerance for all tolerance-based equalities.
inline constexpr double kDefaultTolerance = 1e-9;

/// Immutable context for one nilpotency order p (theta^(p+1) = 0).
///
/// Holds q and the q-integers / q-factorials [0]_q ... [p]_q. Cheap to copy,
/// safe to share between threads.
class QContext {
public:
  explicit QContext(int p) : p_(p) {
    if (p < 1)
      throw std::invalid_argument("nilpotency order p must be >= 1 (got " + std::to_string(p) + ")");
    if (p > kMaxOrder)
      throw std::invalid_argument("nilpotency order p must be <= " + std::to_string(kMaxOrder) + " (got " +
                                  std::to_string(p) + ")");
    q_ = std::polar(1.0, 2.0 * std::numbers::pi / (p + 1));
    qint_.resize(p + 1);
    qfact_.resize(p + 1);
    for (int n = 0; n <= p; ++n)
      qint_[n] = sum_of_powers(n);
    qfact_[0] = Complex(1.0, 0.0);
    for (int n = 1; n <= p; ++n)
      qfact_[n] = qfact_[n - 1] * qint_[n];
  }

  [[nodiscard]] int p() const noexcept { return p_; }
  [[nodiscard]] Complex q() const noexcept { return q_; }

  /// [n]_q = 1 + q + ... + q^(n-1); any n >= 0 (n > p allowed).
  [[nodiscard]] Complex q_int(int n) const {
    if (n < 0)
      throw std::invalid_argument("q_int: n must be nonnegative");
    if (n <= p_)
      return qint_[n];
    return sum_of_powers(n);
  }

  /// [n]_q! for 0 <= n <= p. Factorials beyond p vanish and are rejected.
  [[nodiscard]] Complex q_factorial(int n) const {
    if (n < 0 || n > p_)
      throw std::out_of_range("q_factorial: n=" + std::to_string(n) + " outside 0.." + std::to_string(p_));
    return qfact_[n];
  }

  /// [a]_q! / [b]_q! for 0 <= a, b <= p.
  [[nodiscard]] Complex q_factorial_ratio(int a, int b) const { return q_factorial(a) / q_factorial(b); }

  friend bool operator==(const QContext& a, const QContext& b) noexcept { return a.p_ == b.p_; }

private:
  // Powers come from std::polar on the reduced exponent, so q^(p+1) is exactly 1.
  [[nodiscard]] Complex sum_of_powers(int n) const {
    Complex acc(0.0, 0.0);
    for (int j = 0; j < n; ++j)
      acc += power_of_q(j);
    return acc;
  }

  [[nodiscard]] Complex power_of_q(int j) const {
    const int r = j % (p_ + 1);
    if (r == 0)
      return Complex(1.0, 0.0);
    return std::polar(1.0, 2.0 * std::numbers::pi * r / (p_ + 1));
  }

  int p_;
  Complex q_;
  std::vector<Complex> qint_;
  std::vector<Complex> qfact_;
};

inline QContext make_context(int p) { return QContext(p); }

inline Complex q_int(const QContext& ctx, int n) { return ctx.q_int(n); }

inline Complex q_factorial(const QContext& ctx, int n) { return ctx.q_factorial(n); }

/// Integer power of a complex number by repeated multiplication (0^0 = 1).
inline Complex ipow(Complex z, int k) {
  Complex r(1.0, 0.0);
  Complex base = z;
  unsigned e = static_cast<unsigned>(k < 0 ? -k : k);
  while (e != 0U) {
    if ((e & 1U) != 0U)
      r *= base;
    base *= base;
    e >>= 1U;
  }
  return k < 0 ? Complex(1.0, 0.0) / r : r;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n)
    return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return std::round(r);
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i)
    r *= i;
  return r;
}

} // namespace paracalc
