#pragma once

// Parasuperfunctions f(x, theta) = sum_k f_k(x) theta^k and the covariant calculus
// D = d/dtheta + theta^p / [p]_q! * d/dx.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "paracalc/exppoly.hpp"
#include "paracalc/qcore.hpp"

namespace paracalc {

class ParaFunction {
public:
  explicit ParaFunction(QContext ctx) : ctx_(std::move(ctx)), components_(static_cast<std::size_t>(ctx_.p()) + 1) {}

  ParaFunction(QContext ctx, std::vector<ExpPoly> components) : ctx_(std::move(ctx)), components_(std::move(components)) {
    if (static_cast<int>(components_.size()) != ctx_.p() + 1)
      throw std::invalid_argument("ParaFunction: expected " + std::to_string(ctx_.p() + 1) + " components, got " +
                                  std::to_string(components_.size()));
  }

  /// c * theta^k
  static ParaFunction theta_power(const QContext& ctx, int k, Complex c = Complex(1.0, 0.0)) {
    ParaFunction f(ctx);
    f.component(k) = ExpPoly::constant(c);
    return f;
  }

  static ParaFunction constant(const QContext& ctx, Complex c) { return theta_power(ctx, 0, c); }

  [[nodiscard]] const QContext& context() const noexcept { return ctx_; }
  [[nodiscard]] int p() const noexcept { return ctx_.p(); }
  [[nodiscard]] const std::vector<ExpPoly>& components() const noexcept { return components_; }

  [[nodiscard]] const ExpPoly& component(int k) const { return components_.at(static_cast<std::size_t>(k)); }
  ExpPoly& component(int k) { return components_.at(static_cast<std::size_t>(k)); }

  [[nodiscard]] bool is_zero() const noexcept {
    for (const auto& c : components_)
      if (!c.empty())
        return false;
    return true;
  }

  /// Maximum coefficient modulus over all components.
  [[nodiscard]] double max_abs_coeff() const noexcept {
    double m = 0.0;
    for (const auto& c : components_)
      m = std::max(m, c.max_abs_coeff());
    return m;
  }

  ParaFunction& operator+=(const ParaFunction& g) {
    require_same_order(g);
    for (std::size_t k = 0; k < components_.size(); ++k)
      components_[k] += g.components_[k];
    return *this;
  }

  ParaFunction& operator-=(const ParaFunction& g) {
    require_same_order(g);
    for (std::size_t k = 0; k < components_.size(); ++k)
      components_[k] -= g.components_[k];
    return *this;
  }

  ParaFunction& operator*=(Complex s) {
    for (auto& c : components_)
      c *= s;
    return *this;
  }

  friend ParaFunction operator+(ParaFunction f, const ParaFunction& g) { return f += g; }
  friend ParaFunction operator-(ParaFunction f, const ParaFunction& g) { return f -= g; }
  friend ParaFunction operator*(Complex s, ParaFunction f) { return f *= s; }
  friend ParaFunction operator*(ParaFunction f, Complex s) { return f *= s; }

  void require_same_order(const ParaFunction& g) const {
    if (g.p() != p())
      throw std::invalid_argument("ParaFunction: mismatched nilpotency orders p=" + std::to_string(p()) +
                                  " and p=" + std::to_string(g.p()));
  }

private:
  QContext ctx_;
  std::vector<ExpPoly> components_;
};

/// D f. Component k-1 receives [k]_q f_k; component p receives f_0' / [p]_q!.
inline ParaFunction covariant_derivative(const ParaFunction& f) {
  const QContext& ctx = f.context();
  const int p = ctx.p();
  ParaFunction r(ctx);
  for (int k = 1; k <= p; ++k)
    r.component(k - 1) = ctx.q_int(k) * f.component(k);
  r.component(p) = (Complex(1.0, 0.0) / ctx.q_factorial(p)) * ep_derivative(f.component(0));
  return r;
}

/// D^s f evaluated directly from the split s = s'(p+1) + s''.
inline ParaFunction covariant_power(const ParaFunction& f, int s) {
  if (s < 0)
    throw std::invalid_argument("covariant_power: s must be nonnegative (use antiderivative_power)");
  const QContext& ctx = f.context();
  const int p = ctx.p();
  const int outer = s / (p + 1);
  const int inner = s % (p + 1);
  ParaFunction r(ctx);
  // Components that wrap around through d/dx.
  for (int k = 0; k < inner; ++k) {
    const int target = p - (inner - 1) + k;
    r.component(target) += ctx.q_factorial_ratio(k, target) * ep_derivative(f.component(k), outer + 1);
  }
  for (int k = inner; k <= p; ++k)
    r.component(k - inner) += ctx.q_factorial_ratio(k, k - inner) * ep_derivative(f.component(k), outer);
  return r;
}

/// D^{-1} f with the integration constant fixed by a zero value at x = 0.
///
/// D(antiderivative(f)) == f always; antiderivative(D f) == f when f_0(0) = 0.
inline ParaFunction antiderivative(const ParaFunction& f) {
  const QContext& ctx = f.context();
  const int p = ctx.p();
  ParaFunction r(ctx);
  r.component(0) = ctx.q_factorial(p) * ep_antiderivative(f.component(p));
  for (int k = 1; k <= p; ++k)
    r.component(k) = (Complex(1.0, 0.0) / ctx.q_int(k)) * f.component(k - 1);
  return r;
}

/// D^{-s} f as s-fold antiderivative.
inline ParaFunction antiderivative_power(const ParaFunction& f, int s) {
  if (s < 0)
    throw std::invalid_argument("antiderivative_power: s must be nonnegative");
  ParaFunction r = f;
  for (int i = 0; i < s; ++i)
    r = antiderivative(r);
  return r;
}

/// e_q(beta^(p+1) x; beta theta): component k is beta^k exp(beta^(p+1) x) / [k]_q!.
inline ParaFunction exp_eq(const QContext& ctx, Complex beta) {
  const int p = ctx.p();
  const Complex freq = ipow(beta, p + 1);
  ParaFunction r(ctx);
  for (int k = 0; k <= p; ++k)
    r.component(k) = ExpPoly::exponential(freq, ipow(beta, k) / ctx.q_factorial(k));
  return r;
}

/// Pointwise product truncated at theta^p.
inline ParaFunction multiply(const ParaFunction& f, const ParaFunction& g) {
  f.require_same_order(g);
  const int p = f.p();
  ParaFunction r(f.context());
  for (int i = 0; i <= p; ++i) {
    if (f.component(i).empty())
      continue;
    for (int j = 0; i + j <= p; ++j) {
      if (g.component(j).empty())
        continue;
      r.component(i + j) += ep_multiply(f.component(i), g.component(j));
    }
  }
  return r;
}

/// Coefficients of theta^0 .. theta^p at the point x.
inline std::vector<Complex> evaluate(const ParaFunction& f, Complex x) {
  std::vector<Complex> out;
  out.reserve(f.components().size());
  for (const auto& c : f.components())
    out.push_back(ep_eval(c, x));
  return out;
}

/// Componentwise d/dx.
inline ParaFunction x_derivative(const ParaFunction& f, int order = 1) {
  ParaFunction r(f.context());
  for (int k = 0; k <= f.p(); ++k)
    r.component(k) = ep_derivative(f.component(k), order);
  return r;
}

/// Renders f_0(x) + f_1(x)*theta + ... ; zero components are omitted.
inline std::string to_string(const ParaFunction& f, int digits = 10) {
  std::string out;
  for (int k = 0; k <= f.p(); ++k) {
    const ExpPoly& c = f.component(k);
    if (c.empty())
      continue;
    std::string body = to_string(c, digits);
    std::string piece;
    if (k == 0)
      piece = body;
    else {
      const std::string th = k == 1 ? "theta" : "theta^" + std::to_string(k);
      if (body == "1")
        piece = th;
      else if (body.find(' ') == std::string::npos)
        piece = body + "*" + th;
      else
        piece = "(" + body + ")*" + th;
    }
    if (!out.empty())
      out += " + ";
    out += piece;
  }
  return out.empty() ? "0" : out;
}

} // namespace paracalc
