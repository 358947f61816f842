#pragma once

// Checks on candidate solutions: operator residuals, independence rank, a
// recursion-based oracle that never applies D, and least-squares span fits.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "paracalc/exppoly.hpp"
#include "paracalc/psf.hpp"
#include "paracalc/qcore.hpp"
#include "paracalc/solver.hpp"
#include "paracalc/systems.hpp"

namespace paracalc {

inline constexpr double kRankThreshold = 1e-8;

/// sum_s c_{n-s} D^s f with c_0 = 1.
inline ParaFunction apply_operator(const LinearOperator& op, const ParaFunction& f) {
  if (f.p() != op.context().p())
    throw std::invalid_argument("apply_operator: function has p=" + std::to_string(f.p()) + ", operator has p=" +
                                std::to_string(op.context().p()));
  const int n = op.order();
  ParaFunction acc(f.context());
  for (int s = 0; s <= n; ++s) {
    const Complex c = op.coeff(n - s);
    if (c == Complex(0.0, 0.0))
      continue;
    acc += c * covariant_power(f, s);
  }
  return acc;
}

struct Residual {
  ParaFunction f;
  double max_coeff = 0.0;
};

inline Residual residual(const LinearOperator& op, const ParaFunction& f) {
  ParaFunction r = apply_operator(op, f);
  const double m = r.max_abs_coeff();
  return {std::move(r), m};
}

inline double residual_norm(const LinearOperator& op, const ParaFunction& f) { return residual(op, f).max_coeff; }

namespace verify_detail {
inline int numerical_rank(const ComplexMatrix& m) {
  if (m.size() == 0)
    return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0)
    return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankThreshold * sv(0))
      ++rank;
  return rank;
}
} // namespace verify_detail

/// Numerical rank of the initial data (D^j b)(x=0), j < dim, over all components.
inline int independence_rank(const std::vector<ParaFunction>& basis) {
  if (basis.empty())
    throw std::invalid_argument("independence_rank: empty basis");
  const int dim = static_cast<int>(basis.size());
  const int p = basis.front().p();
  for (const auto& b : basis)
    if (b.p() != p)
      throw std::invalid_argument("independence_rank: basis elements have different p");
  ComplexMatrix m(dim, dim * (p + 1));
  for (int r = 0; r < dim; ++r) {
    ParaFunction d = basis[static_cast<std::size_t>(r)];
    for (int j = 0; j < dim; ++j) {
      if (j > 0)
        d = covariant_derivative(d);
      const auto v = evaluate(d, Complex(0.0, 0.0));
      for (int k = 0; k <= p; ++k)
        m(r, j * (p + 1) + k) = v[static_cast<std::size_t>(k)];
    }
  }
  return verify_detail::numerical_rank(m);
}

inline int independence_rank(const SolutionBasis& basis) { return independence_rank(basis.functions()); }

/// Rank of vector-valued solutions w (each a list of n functions) by their values at x = 0.
inline int independence_rank(const std::vector<std::vector<ParaFunction>>& solutions) {
  if (solutions.empty())
    throw std::invalid_argument("independence_rank: empty solution list");
  std::vector<std::vector<Complex>> rows;
  for (const auto& w : solutions) {
    std::vector<Complex> row;
    for (const auto& f : w) {
      const auto v = evaluate(f, Complex(0.0, 0.0));
      row.insert(row.end(), v.begin(), v.end());
    }
    rows.push_back(std::move(row));
  }
  const std::size_t width = rows.front().size();
  ComplexMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw std::invalid_argument("independence_rank: solutions have different shapes");
    for (std::size_t c = 0; c < width; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return verify_detail::numerical_rank(m);
}

/// Checks the component relations of op f = 0 for n <= p directly:
///   f_{k+n} = -sum_i c_i [k+n-i]_q!/[k+n]_q! f_{k+n-i}   for 0 <= k <= p-n,
/// and for p-n < l <= p the first-order relations
///   sum_{s<=p-l} c_{n-s} [l+s]_q! f_{l+s} + sum_{s>p-l} c_{n-s} [l+s-p-1]_q! f'_{l+s-p-1} = 0.
/// Every identity is tested coefficient-wise in ExpPoly form.
inline bool brute_force_check(const LinearOperator& op, const ParaFunction& f, double tol = kDefaultTolerance) {
  const QContext& ctx = op.context();
  const int p = ctx.p();
  const int n = op.order();
  if (n > p)
    throw std::invalid_argument("brute_force_check: requires n <= p (n=" + std::to_string(n) +
                                ", p=" + std::to_string(p) + ")");
  if (f.p() != p)
    throw std::invalid_argument("brute_force_check: function and operator have different p");
  for (int k = 0; k + n <= p; ++k) {
    ExpPoly rhs;
    for (int i = 1; i <= n; ++i)
      rhs -= (op.coeff(i) * ctx.q_factorial_ratio(k + n - i, k + n)) * f.component(k + n - i);
    if (!ep_is_zero(f.component(k + n) - rhs, tol))
      return false;
  }
  for (int l = p - n + 1; l <= p; ++l) {
    ExpPoly acc;
    for (int s = 0; s <= n; ++s) {
      const Complex c = op.coeff(n - s);
      if (l + s <= p)
        acc += (c * ctx.q_factorial(l + s)) * f.component(l + s);
      else
        acc += (c * ctx.q_factorial(l + s - p - 1)) * ep_derivative(f.component(l + s - p - 1));
    }
    if (!ep_is_zero(acc, tol))
      return false;
  }
  return true;
}

struct SpanFit {
  std::vector<Complex> coefficients;
  double residual = 0.0;
};

/// Least-squares coefficients a with target ~ sum a_i basis_i, comparing
/// coefficients of x^s e^{lambda x} theta^k; residual is the largest
/// coefficient of target - sum a_i basis_i.
inline SpanFit fit_in_span(const std::vector<ParaFunction>& basis, const ParaFunction& target) {
  if (basis.empty())
    throw std::invalid_argument("fit_in_span: empty basis");
  const int p = target.p();
  struct Key {
    int component;
    Complex lambda;
    std::size_t power;
  };
  std::vector<Key> keys;
  auto key_index = [&](int k, Complex lambda, std::size_t s) {
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i].component == k && keys[i].power == s &&
          std::abs(keys[i].lambda - lambda) < ExpPoly::kMergeTolerance)
        return i;
    keys.push_back({k, lambda, s});
    return keys.size() - 1;
  };
  struct Entry {
    std::size_t row;
    Complex value;
  };
  auto flatten = [&](const ParaFunction& f) {
    if (f.p() != p)
      throw std::invalid_argument("fit_in_span: mismatched p");
    std::vector<Entry> out;
    for (int k = 0; k <= p; ++k)
      for (const auto& t : f.component(k).terms())
        for (std::size_t s = 0; s < t.coeffs.size(); ++s)
          out.push_back({key_index(k, t.lambda, s), t.coeffs[s]});
    return out;
  };
  std::vector<std::vector<Entry>> cols;
  for (const auto& b : basis)
    cols.push_back(flatten(b));
  const auto rhs_entries = flatten(target);

  ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(keys.size()), static_cast<Eigen::Index>(basis.size()));
  ComplexVector rhs = ComplexVector::Zero(static_cast<Eigen::Index>(keys.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (const auto& e : cols[j])
      a(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(j)) += e.value;
  for (const auto& e : rhs_entries)
    rhs(static_cast<Eigen::Index>(e.row)) += e.value;

  const ComplexVector sol = a.completeOrthogonalDecomposition().solve(rhs);
  SpanFit fit;
  ParaFunction diff = target;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const Complex c = sol(static_cast<Eigen::Index>(j));
    fit.coefficients.push_back(c);
    diff -= c * basis[j];
  }
  fit.residual = diff.max_abs_coeff();
  return fit;
}

/// Summary of a basis check; brute_force is empty when n > p.
///
/// passed() compares the residual against tol times the coefficient scale of
/// the candidates (at least 1), since the residual inherits their magnitude.
struct VerificationReport {
  double residual = 0.0;
  int rank = 0;
  std::optional<bool> brute_force;
  int expected_rank = 0;
  double scale = 1.0;

  [[nodiscard]] bool passed(double tol = kDefaultTolerance) const {
    return residual <= tol * scale && rank == expected_rank && brute_force.value_or(true);
  }
};

/// Residual, rank and (for n <= p) the recursion oracle over a set of
/// candidates, which are expected to be independent.
inline VerificationReport verify_basis(const LinearOperator& op, const std::vector<ParaFunction>& basis,
                                       double tol = kDefaultTolerance) {
  VerificationReport report;
  report.expected_rank = static_cast<int>(basis.size());
  for (const auto& f : basis) {
    report.residual = std::max(report.residual, residual_norm(op, f));
    report.scale = std::max(report.scale, f.max_abs_coeff());
  }
  report.rank = basis.empty() ? 0 : independence_rank(basis);
  if (op.order() <= op.context().p()) {
    bool ok = true;
    for (const auto& f : basis)
      ok = ok && brute_force_check(op, f, tol * report.scale);
    report.brute_force = ok;
  }
  return report;
}

} // namespace paracalc
