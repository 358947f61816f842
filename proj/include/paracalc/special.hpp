#pragma once

// First-order equations with a theta-dependent coefficient, (D - c(theta)) f = 0,
// and the nonlinear family (D^m f)^n = 0.

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "paracalc/exppoly.hpp"
#include "paracalc/psf.hpp"
#include "paracalc/qcore.hpp"
#include "paracalc/solver.hpp"

namespace paracalc {

/// c(theta) = c_0 + c_1 theta + ... + c_p theta^p
struct ThetaPoly {
  QContext ctx;
  std::vector<Complex> coeffs;

  ThetaPoly(QContext context, std::vector<Complex> c) : ctx(std::move(context)), coeffs(std::move(c)) {
    if (static_cast<int>(coeffs.size()) != ctx.p() + 1)
      throw std::invalid_argument("ThetaPoly: expected " + std::to_string(ctx.p() + 1) + " coefficients, got " +
                                  std::to_string(coeffs.size()));
  }

  [[nodiscard]] ParaFunction as_function() const {
    ParaFunction f(ctx);
    for (int l = 0; l <= ctx.p(); ++l)
      f.component(l) = ExpPoly::constant(coeffs[static_cast<std::size_t>(l)]);
    return f;
  }
};

struct ThetaCoefficientSolution {
  Complex growth_rate;
  std::vector<Complex> multipliers; // C_0 .. C_p
  SolutionBasis basis;
};

/// Solves (D - c(theta)) f = 0 with the ansatz f = e^{r x} sum_k C_k theta^k:
/// C_0 = 1, [k+1]_q C_{k+1} = sum_{l<=k} c_{k-l} C_l, r = [p]_q! sum_l c_{p-l} C_l.
inline ThetaCoefficientSolution solve_theta_coefficient(const ThetaPoly& c) {
  const QContext& ctx = c.ctx;
  const int p = ctx.p();
  auto conv = [&](const std::vector<Complex>& mult, int k) {
    Complex s(0.0, 0.0);
    for (int l = 0; l <= k; ++l)
      s += c.coeffs[static_cast<std::size_t>(k - l)] * mult[static_cast<std::size_t>(l)];
    return s;
  };
  std::vector<Complex> mult{Complex(1.0, 0.0)};
  for (int k = 0; k < p; ++k)
    mult.push_back(conv(mult, k) / ctx.q_int(k + 1));
  const Complex rate = ctx.q_factorial(p) * conv(mult, p);

  ParaFunction f(ctx);
  for (int k = 0; k <= p; ++k)
    f.component(k) = ExpPoly::exponential(rate, mult[static_cast<std::size_t>(k)]);
  SolutionBasis basis{ctx, {}};
  basis.elements.push_back({std::move(f), std::nullopt, 1});
  return {rate, std::move(mult), std::move(basis)};
}

/// D f - c(theta) f
inline ParaFunction theta_coefficient_residual(const ThetaPoly& c, const ParaFunction& f) {
  return covariant_derivative(f) - multiply(c.as_function(), f);
}

/// Index sets describing the general solution of (D^m f)^n = 0.
struct NonlinearStructure {
  std::vector<int> free_functions;
  std::vector<int> free_constants;
  std::vector<int> forced_zero;
};

/// m = m'(p+1) + m'': D^m f = D^{m''} h with h = d^{m'}/dx^{m'} f.
struct NonlinearReduction {
  int derivative_order = 0; // m'
  int covariant_order = 0;  // m''
};

inline NonlinearReduction nonlinear_reduction(const QContext& ctx, int m) {
  if (m < 1)
    throw std::invalid_argument("nonlinear_reduction: m must be >= 1");
  return {m / (ctx.p() + 1), m % (ctx.p() + 1)};
}

/// Which components of f are arbitrary functions, arbitrary constants, or zero.
inline NonlinearStructure nonlinear_structure(const QContext& ctx, int m, int n) {
  const int p = ctx.p();
  if (n < 1)
    throw std::invalid_argument("nonlinear_structure: n must be >= 1");
  if (m < 1)
    throw std::invalid_argument("nonlinear_structure: m must be >= 1");
  if (m > p) {
    const auto r = nonlinear_reduction(ctx, m);
    throw std::out_of_range("nonlinear_structure: m > p reduces to D^" + std::to_string(r.covariant_order) +
                            " applied to the x-derivative of order " + std::to_string(r.derivative_order) +
                            "; not solved");
  }
  const int fl = p / n;
  const int bound = p - fl;
  NonlinearStructure s;
  std::vector<int> kind(static_cast<std::size_t>(p) + 1, 0); // 0 zero, 1 function, 2 constant
  if (m <= bound) {
    for (int k = 0; k < m; ++k)
      kind[static_cast<std::size_t>(k)] = 1;
    for (int k = m + fl + 1; k <= p; ++k)
      kind[static_cast<std::size_t>(k)] = 1;
  } else {
    for (int k = 0; k < m - bound; ++k)
      kind[static_cast<std::size_t>(k)] = 2;
    for (int k = m - bound; k < m; ++k)
      kind[static_cast<std::size_t>(k)] = 1;
  }
  for (int k = 0; k <= p; ++k) {
    switch (kind[static_cast<std::size_t>(k)]) {
    case 1:
      s.free_functions.push_back(k);
      break;
    case 2:
      s.free_constants.push_back(k);
      break;
    default:
      s.forced_zero.push_back(k);
    }
  }
  return s;
}

/// A function conforming to the structure: free slots are filled by the callbacks.
inline ParaFunction sample_conforming(const QContext& ctx, const NonlinearStructure& s,
                                      const std::function<ExpPoly(int)>& function_fill,
                                      const std::function<Complex(int)>& constant_fill) {
  ParaFunction f(ctx);
  for (int k : s.free_functions)
    f.component(k) = function_fill(k);
  for (int k : s.free_constants)
    f.component(k) = ExpPoly::constant(constant_fill(k));
  return f;
}

enum class NonlinearPath { full_power, low_components };

/// Whether (D^m f)^n vanishes, to 1e-10 per coefficient.
///
/// full_power forms the n-fold product; low_components only checks that
/// components 0..floor(p/n) of D^m f vanish.
inline bool nonlinear_check(const ParaFunction& f, int m, int n, NonlinearPath path = NonlinearPath::full_power) {
  constexpr double tol = 1e-10;
  if (m < 0 || n < 1)
    throw std::invalid_argument("nonlinear_check: need m >= 0 and n >= 1");
  const ParaFunction g = covariant_power(f, m);
  if (path == NonlinearPath::low_components) {
    for (int l = 0; l <= f.p() / n; ++l)
      if (!ep_is_zero(g.component(l), tol))
        return false;
    return true;
  }
  ParaFunction acc = g;
  for (int i = 1; i < n; ++i)
    acc = multiply(acc, g);
  for (const auto& c : acc.components())
    if (!ep_is_zero(c, tol))
      return false;
  return true;
}

} // namespace paracalc
