#pragma once

// Exponential polynomials sum_j exp(lambda_j x) * P_j(x) with complex data.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "paracalc/qcore.hpp"

namespace paracalc {

/// One frequency block exp(lambda x) * (a_0 + a_1 x + ... + a_d x^d).
struct ExpTerm {
  Complex lambda;
  std::vector<Complex> coeffs;
};

/// Canonical exponential polynomial.
///
/// Terms are kept sorted by (re lambda, im lambda); frequencies closer than
/// kMergeTolerance are merged into one block; trailing zero coefficients and
/// empty blocks are dropped, so the zero function has no terms.
class ExpPoly {
public:
  static constexpr double kMergeTolerance = 1e-9;
  static constexpr int kMaxDegree = 128;

  ExpPoly() = default;

  static ExpPoly constant(Complex c) { return exponential(Complex(0.0, 0.0), c); }

  /// c * exp(lambda x)
  static ExpPoly exponential(Complex lambda, Complex c = Complex(1.0, 0.0)) {
    return monomial(c, 0, lambda);
  }

  /// c * x^power * exp(lambda x)
  static ExpPoly monomial(Complex c, int power, Complex lambda = Complex(0.0, 0.0)) {
    std::vector<Complex> coeffs(static_cast<std::size_t>(power) + 1, Complex(0.0, 0.0));
    coeffs.back() = c;
    ExpPoly r;
    r.add_block(lambda, coeffs, Complex(1.0, 0.0));
    return r;
  }

  /// exp(lambda x) * sum_s coeffs[s] x^s
  static ExpPoly block(Complex lambda, std::span<const Complex> coeffs) {
    ExpPoly r;
    r.add_block(lambda, coeffs, Complex(1.0, 0.0));
    return r;
  }

  [[nodiscard]] const std::vector<ExpTerm>& terms() const noexcept { return terms_; }
  [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }

  [[nodiscard]] int degree() const noexcept {
    int d = -1;
    for (const auto& t : terms_)
      d = std::max(d, static_cast<int>(t.coeffs.size()) - 1);
    return d;
  }

  [[nodiscard]] double max_abs_coeff() const noexcept {
    double m = 0.0;
    for (const auto& t : terms_)
      for (const auto& c : t.coeffs)
        m = std::max(m, std::abs(c));
    return m;
  }

  /// Adds scale * exp(lambda x) * sum coeffs[s] x^s, merging near-equal frequencies.
  void add_block(Complex lambda, std::span<const Complex> coeffs, Complex scale) {
    if (static_cast<int>(coeffs.size()) - 1 > kMaxDegree)
      throw std::length_error("ExpPoly: polynomial degree exceeds " + std::to_string(kMaxDegree));
    if (scale == Complex(0.0, 0.0) || coeffs.empty())
      return;
    auto it = std::find_if(terms_.begin(), terms_.end(), [&](const ExpTerm& t) {
      return std::abs(t.lambda - lambda) < kMergeTolerance;
    });
    if (it == terms_.end()) {
      ExpTerm t{lambda, {}};
      t.coeffs.reserve(coeffs.size());
      for (const auto& c : coeffs)
        t.coeffs.push_back(scale * c);
      auto pos = std::lower_bound(terms_.begin(), terms_.end(), lambda, [](const ExpTerm& a, Complex l) {
        return a.lambda.real() < l.real() || (a.lambda.real() == l.real() && a.lambda.imag() < l.imag());
      });
      it = terms_.insert(pos, std::move(t));
    } else {
      if (it->coeffs.size() < coeffs.size())
        it->coeffs.resize(coeffs.size(), Complex(0.0, 0.0));
      for (std::size_t s = 0; s < coeffs.size(); ++s)
        it->coeffs[s] += scale * coeffs[s];
    }
    strip(*it);
    if (it->coeffs.empty())
      terms_.erase(it);
  }

  ExpPoly& operator+=(const ExpPoly& g) {
    for (const auto& t : g.terms_)
      add_block(t.lambda, t.coeffs, Complex(1.0, 0.0));
    return *this;
  }

  ExpPoly& operator-=(const ExpPoly& g) {
    for (const auto& t : g.terms_)
      add_block(t.lambda, t.coeffs, Complex(-1.0, 0.0));
    return *this;
  }

  ExpPoly& operator*=(Complex s) {
    if (s == Complex(0.0, 0.0)) {
      terms_.clear();
      return *this;
    }
    for (auto& t : terms_)
      for (auto& c : t.coeffs)
        c *= s;
    return *this;
  }

  friend ExpPoly operator+(ExpPoly f, const ExpPoly& g) { return f += g; }
  friend ExpPoly operator-(ExpPoly f, const ExpPoly& g) { return f -= g; }
  friend ExpPoly operator*(Complex s, ExpPoly f) { return f *= s; }
  friend ExpPoly operator*(ExpPoly f, Complex s) { return f *= s; }
  friend ExpPoly operator-(ExpPoly f) { return f *= Complex(-1.0, 0.0); }

private:
  static void strip(ExpTerm& t) {
    while (!t.coeffs.empty() && t.coeffs.back() == Complex(0.0, 0.0))
      t.coeffs.pop_back();
  }

  std::vector<ExpTerm> terms_;
};

/// alpha f + beta g
inline ExpPoly ep_combine(Complex alpha, const ExpPoly& f, Complex beta, const ExpPoly& g) {
  ExpPoly r;
  for (const auto& t : f.terms())
    r.add_block(t.lambda, t.coeffs, alpha);
  for (const auto& t : g.terms())
    r.add_block(t.lambda, t.coeffs, beta);
  return r;
}

inline ExpPoly ep_derivative(const ExpPoly& f) {
  ExpPoly r;
  for (const auto& t : f.terms()) {
    const std::size_t d = t.coeffs.size();
    std::vector<Complex> out(d, Complex(0.0, 0.0));
    for (std::size_t s = 0; s < d; ++s) {
      out[s] += t.lambda * t.coeffs[s];
      if (s + 1 < d)
        out[s] += static_cast<double>(s + 1) * t.coeffs[s + 1];
    }
    r.add_block(t.lambda, out, Complex(1.0, 0.0));
  }
  return r;
}

inline ExpPoly ep_derivative(const ExpPoly& f, int order) {
  ExpPoly r = f;
  for (int i = 0; i < order; ++i)
    r = ep_derivative(r);
  return r;
}

/// Antiderivative F with F' = f and F(0) = 0.
inline ExpPoly ep_antiderivative(const ExpPoly& f) {
  ExpPoly r;
  Complex constant(0.0, 0.0);
  for (const auto& t : f.terms()) {
    const std::size_t d = t.coeffs.size();
    if (std::abs(t.lambda) < ExpPoly::kMergeTolerance) {
      std::vector<Complex> out(d + 1, Complex(0.0, 0.0));
      for (std::size_t s = 0; s < d; ++s)
        out[s + 1] = t.coeffs[s] / static_cast<double>(s + 1);
      r.add_block(t.lambda, out, Complex(1.0, 0.0));
      continue;
    }
    // Q' + lambda Q = P, solved from the top coefficient down.
    std::vector<Complex> out(d, Complex(0.0, 0.0));
    for (std::size_t s = d; s-- > 0;) {
      Complex v = t.coeffs[s];
      if (s + 1 < d)
        v -= static_cast<double>(s + 1) * out[s + 1];
      out[s] = v / t.lambda;
    }
    constant -= out[0];
    r.add_block(t.lambda, out, Complex(1.0, 0.0));
  }
  r.add_block(Complex(0.0, 0.0), std::span<const Complex>(&constant, 1), Complex(1.0, 0.0));
  return r;
}

inline Complex ep_eval(const ExpPoly& f, Complex x) {
  Complex acc(0.0, 0.0);
  for (const auto& t : f.terms()) {
    Complex h(0.0, 0.0);
    for (std::size_t s = t.coeffs.size(); s-- > 0;)
      h = h * x + t.coeffs[s];
    acc += std::exp(t.lambda * x) * h;
  }
  return acc;
}

/// True iff every stored coefficient has modulus below tol.
inline bool ep_is_zero(const ExpPoly& f, double tol = kDefaultTolerance) {
  if (!(tol > 0.0))
    throw std::invalid_argument("ep_is_zero: tolerance must be positive");
  return f.max_abs_coeff() < tol;
}

/// Pointwise product.
inline ExpPoly ep_multiply(const ExpPoly& f, const ExpPoly& g) {
  ExpPoly r;
  for (const auto& a : f.terms()) {
    for (const auto& b : g.terms()) {
      std::vector<Complex> prod(a.coeffs.size() + b.coeffs.size() - 1, Complex(0.0, 0.0));
      for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs.size(); ++j)
          prod[i + j] += a.coeffs[i] * b.coeffs[j];
      r.add_block(a.lambda + b.lambda, prod, Complex(1.0, 0.0));
    }
  }
  return r;
}

/// exp(mu x) * f
inline ExpPoly ep_shift(const ExpPoly& f, Complex mu) {
  ExpPoly r;
  for (const auto& t : f.terms())
    r.add_block(t.lambda + mu, t.coeffs, Complex(1.0, 0.0));
  return r;
}

/// Compact human-readable number: "2", "-0.5", "1.5i", "(1+2i)".
inline std::string format_complex(Complex z, int digits = 10) {
  auto num = [digits](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v == 0.0 ? 0.0 : v);
    return std::string(buf);
  };
  const double floor = 1e-15 * std::abs(z);
  const double re = std::abs(z.real()) < floor ? 0.0 : z.real();
  const double im = std::abs(z.imag()) < floor ? 0.0 : z.imag();
  if (im == 0.0)
    return num(re);
  if (re == 0.0)
    return num(im) + "i";
  std::string s = "(" + num(re);
  s += im < 0.0 ? "-" : "+";
  s += num(std::abs(im)) + "i)";
  return s;
}

inline std::string to_string(const ExpPoly& f, int digits = 10) {
  if (f.empty())
    return "0";
  std::string out;
  for (const auto& t : f.terms()) {
    std::string poly;
    for (std::size_t s = 0; s < t.coeffs.size(); ++s) {
      if (t.coeffs[s] == Complex(0.0, 0.0))
        continue;
      std::string piece = format_complex(t.coeffs[s], digits);
      if (s >= 1) {
        if (piece == "1")
          piece.clear();
        else if (piece == "-1")
          piece = "-";
        else
          piece += "*";
        piece += s == 1 ? "x" : "x^" + std::to_string(s);
      }
      if (!poly.empty())
        poly += piece.front() == '-' ? " - " + piece.substr(1) : " + " + piece;
      else
        poly = piece;
    }
    std::string block;
    if (t.lambda == Complex(0.0, 0.0))
      block = poly;
    else {
      const bool single = poly.find(' ') == std::string::npos;
      std::string e = "exp(" + format_complex(t.lambda, digits) + "*x)";
      if (poly == "1")
        block = e;
      else if (single)
        block = poly + "*" + e;
      else
        block = "(" + poly + ")*" + e;
    }
    if (!out.empty())
      out += " + ";
    out += block;
  }
  return out;
}

} // namespace paracalc
