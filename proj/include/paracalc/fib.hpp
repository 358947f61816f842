#pragma once

// Transfer matrices of the theta-component recursion and their generalized
// Fibonacci / Binet descriptions.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "paracalc/qcore.hpp"

namespace paracalc {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Sequence with f_{k+n} = -c_1 f_{k+n-1} - ... - c_n f_k.
struct GenFibSeq {
  std::vector<Complex> rec_coeffs;
  std::vector<Complex> init;

  [[nodiscard]] int order() const noexcept { return static_cast<int>(rec_coeffs.size()); }
};

/// Identifies T_{k+1} for a recursion of order n = rec_coeffs.size().
struct TransferFrame {
  QContext ctx;
  std::vector<Complex> rec_coeffs;
  int k = 0;

  [[nodiscard]] int order() const noexcept { return static_cast<int>(rec_coeffs.size()); }
};

class DegenerateDiscriminant : public std::domain_error {
public:
  DegenerateDiscriminant() : std::domain_error("characteristic roots coincide (c1^2 = 4 c2)") {}
};

/// First L terms of the sequence by direct recursion.
inline std::vector<Complex> fib_next(const GenFibSeq& seq, int length) {
  const int n = seq.order();
  if (n < 1 || static_cast<int>(seq.init.size()) != n)
    throw std::invalid_argument("fib_next: need n >= 1 coefficients and n initial values");
  if (length < n)
    throw std::invalid_argument("fib_next: length must be at least the order");
  std::vector<Complex> out(seq.init.begin(), seq.init.end());
  out.reserve(static_cast<std::size_t>(length));
  while (static_cast<int>(out.size()) < length) {
    const std::size_t m = out.size();
    Complex next(0.0, 0.0);
    for (int i = 1; i <= n; ++i)
      next -= seq.rec_coeffs[static_cast<std::size_t>(i - 1)] * out[m - static_cast<std::size_t>(i)];
    out.push_back(next);
  }
  return out;
}

/// T_{k+1}: ones on the superdiagonal, bottom row (gamma_n(k), ..., gamma_1(k))
/// with gamma_i(k) = -c_i [k+n-i]_q! / [k+n]_q!.
inline ComplexMatrix transfer_matrix(const TransferFrame& frame) {
  const int n = frame.order();
  const int p = frame.ctx.p();
  if (n < 1 || frame.k < 0)
    throw std::invalid_argument("transfer_matrix: need n >= 1 and k >= 0");
  if (frame.k + n > p)
    throw std::out_of_range("transfer_matrix: k+n=" + std::to_string(frame.k + n) + " exceeds p=" + std::to_string(p));
  ComplexMatrix t = ComplexMatrix::Zero(n, n);
  for (int r = 0; r + 1 < n; ++r)
    t(r, r + 1) = 1.0;
  for (int i = 1; i <= n; ++i)
    t(n - 1, n - i) = -frame.rec_coeffs[static_cast<std::size_t>(i - 1)] *
                      frame.ctx.q_factorial_ratio(frame.k + n - i, frame.k + n);
  return t;
}

/// F_k = T_k ... T_1 (identity for k = 0). Maps (f_0..f_{n-1}) to (f_k..f_{k+n-1}).
inline ComplexMatrix accumulated_matrix(const QContext& ctx, const std::vector<Complex>& rec_coeffs, int k) {
  const int n = static_cast<int>(rec_coeffs.size());
  if (n < 1 || k < 0)
    throw std::invalid_argument("accumulated_matrix: need n >= 1 and k >= 0");
  if (k + n - 1 > ctx.p())
    throw std::out_of_range("accumulated_matrix: k+n-1=" + std::to_string(k + n - 1) + " exceeds p=" +
                            std::to_string(ctx.p()));
  ComplexMatrix f = ComplexMatrix::Identity(n, n);
  for (int step = 1; step <= k; ++step)
    f = transfer_matrix({ctx, rec_coeffs, step - 1}) * f;
  return f;
}

/// Entries of F_k with the q-factorial normalization removed.
///
/// Row i (0-based) of F_k describes component f_{k+i}; multiplying by
/// [k+i]_q! yields the generalized Fibonacci value f^{(j)}_{k+i-1}, which
/// obeys the plain recursion in the row index.
inline ComplexMatrix normalized_entries(const QContext& ctx, const std::vector<Complex>& rec_coeffs, int k) {
  ComplexMatrix f = accumulated_matrix(ctx, rec_coeffs, k);
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    f.row(i) *= ctx.q_factorial(k + static_cast<int>(i));
  return f;
}

/// The Fibonacci sequences f^{(j)} seeded by the columns of T_1, first `length` terms.
inline std::vector<std::vector<Complex>> seeded_sequences(const QContext& ctx, const std::vector<Complex>& rec_coeffs,
                                                          int length) {
  const ComplexMatrix seed = normalized_entries(ctx, rec_coeffs, 1);
  std::vector<std::vector<Complex>> out;
  for (Eigen::Index j = 0; j < seed.cols(); ++j) {
    GenFibSeq seq{rec_coeffs, {}};
    for (Eigen::Index i = 0; i < seed.rows(); ++i)
      seq.init.push_back(seed(i, j));
    out.push_back(fib_next(seq, std::max(length, seq.order())));
  }
  return out;
}

/// |c1^2 - 4 c2| < 1e-10 * max(1, |c1|^2)
inline bool discriminant_is_degenerate(Complex c1, Complex c2) {
  return std::abs(c1 * c1 - 4.0 * c2) < 1e-10 * std::max(1.0, std::norm(c1));
}

struct QuadraticRoots {
  Complex plus;
  Complex minus;
  Complex gamma; // plus - minus
};

/// lambda_{+-} = -c1/2 +- sqrt(c1^2 - 4 c2)/2 with the principal square root.
inline QuadraticRoots quadratic_roots(Complex c1, Complex c2) {
  const Complex gamma = std::sqrt(c1 * c1 - 4.0 * c2);
  return {(-c1 + gamma) / 2.0, (-c1 - gamma) / 2.0, gamma};
}

/// mu_k = lambda_-^k - lambda_+^k, nu_k = lambda_+^k + lambda_-^k.
inline std::pair<Complex, Complex> binet_mu_nu(Complex c1, Complex c2, int k) {
  if (discriminant_is_degenerate(c1, c2))
    throw DegenerateDiscriminant();
  const auto r = quadratic_roots(c1, c2);
  const Complex a = ipow(r.plus, k);
  const Complex b = ipow(r.minus, k);
  return {b - a, a + b};
}

/// Closed forms of the two second-order sequences: f^{(1)} seeded (0, -c2)
/// and f^{(2)} seeded (1, -c1).
inline std::pair<Complex, Complex> binet_sequences(Complex c1, Complex c2, int k) {
  const auto [mu, nu] = binet_mu_nu(c1, c2, k);
  const Complex gamma = quadratic_roots(c1, c2).gamma;
  return {c2 / gamma * mu, 0.5 * nu + c1 / (2.0 * gamma) * mu};
}

/// Closed form of F_k for c1 = -2 alpha, c2 = alpha^2 (double root alpha).
inline ComplexMatrix degenerate_accumulated_matrix(const QContext& ctx, Complex alpha, int k) {
  if (k < 0 || k + 1 > ctx.p())
    throw std::out_of_range("degenerate_accumulated_matrix: need 0 <= k <= p-1");
  const double kk = k;
  ComplexMatrix f(2, 2);
  const Complex fk = ctx.q_factorial(k);
  const Complex fk1 = ctx.q_factorial(k + 1);
  f(0, 0) = -(kk - 1.0) * ipow(alpha, k) / fk;
  f(0, 1) = k == 0 ? Complex(0.0, 0.0) : kk * ipow(alpha, k - 1) / fk;
  f(1, 0) = -kk * ipow(alpha, k + 1) / fk1;
  f(1, 1) = (kk + 1.0) * ipow(alpha, k) / fk1;
  return f;
}

} // namespace paracalc
