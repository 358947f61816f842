#pragma once

// Closed-form solution spaces of constant-coefficient equations in D:
// D^s f = 0, D^s f = g, D^s f = lambda f, (D - lambda)^n f = 0 and
// (D^n + c_1 D^{n-1} + ... + c_n) f = 0, plus the theta-component system
// such an equation is equivalent to.

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "paracalc/exppoly.hpp"
#include "paracalc/fib.hpp"
#include "paracalc/psf.hpp"
#include "paracalc/qcore.hpp"
#include "paracalc/roots.hpp"
#include "paracalc/systems.hpp"

namespace paracalc {

/// Monic operator D^n + c_1 D^{n-1} + ... + c_n.
class LinearOperator {
public:
  LinearOperator(QContext ctx, std::vector<Complex> coeffs) : ctx_(std::move(ctx)), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty())
      throw std::invalid_argument("LinearOperator: coefficient list is empty");
  }

  /// D^s
  static LinearOperator power(const QContext& ctx, int s) {
    if (s < 1)
      throw std::invalid_argument("LinearOperator::power: s must be >= 1");
    return {ctx, std::vector<Complex>(static_cast<std::size_t>(s), Complex(0.0, 0.0))};
  }

  /// D^s - lambda
  static LinearOperator eigen(const QContext& ctx, int s, Complex lambda) {
    auto op = power(ctx, s);
    op.coeffs_.back() = -lambda;
    return op;
  }

  /// (D - lambda)^n
  static LinearOperator shifted_power(const QContext& ctx, Complex lambda, int n) {
    const RootCluster rc{lambda, n};
    return {ctx, polynomial_from_roots(std::span<const RootCluster>(&rc, 1))};
  }

  [[nodiscard]] const QContext& context() const noexcept { return ctx_; }
  [[nodiscard]] int order() const noexcept { return static_cast<int>(coeffs_.size()); }
  [[nodiscard]] const std::vector<Complex>& coeffs() const noexcept { return coeffs_; }

  /// c_i with c_0 = 1.
  [[nodiscard]] Complex coeff(int i) const {
    if (i == 0)
      return {1.0, 0.0};
    return coeffs_.at(static_cast<std::size_t>(i - 1));
  }

private:
  QContext ctx_;
  std::vector<Complex> coeffs_;
};

struct SolutionElement {
  ParaFunction function;
  std::optional<Complex> root;
  int multiplicity_index = 1;
};

/// Ordered basis of a solution space.
struct SolutionBasis {
  QContext ctx;
  std::vector<SolutionElement> elements;

  [[nodiscard]] std::size_t size() const noexcept { return elements.size(); }

  [[nodiscard]] std::vector<ParaFunction> functions() const {
    std::vector<ParaFunction> out;
    out.reserve(elements.size());
    for (const auto& e : elements)
      out.push_back(e.function);
    return out;
  }

  void append(const SolutionBasis& other) { elements.insert(elements.end(), other.elements.begin(), other.elements.end()); }
};

/// Signals lambda = 0, whose solutions come from kernel_basis instead.
class RedirectToKernel : public std::domain_error {
public:
  RedirectToKernel() : std::domain_error("lambda = 0: use kernel_basis") {}
};

/// (m_0, m_1, ..., m_s) with m_0 >= 0 and m_i >= 1.
struct MultiIndex {
  std::vector<int> entries;

  [[nodiscard]] int s() const noexcept { return static_cast<int>(entries.size()) - 1; }
  [[nodiscard]] int length() const noexcept {
    int l = 0;
    for (int e : entries)
      l += e;
    return l;
  }
};

/// Every multi-index m_s with |m_s| <= max_length, in lexicographic order.
inline std::vector<MultiIndex> enumerate_multi_indices(int s, int max_length) {
  std::vector<MultiIndex> out;
  if (s < 0 || max_length < s)
    return out;
  MultiIndex cur;
  cur.entries.assign(static_cast<std::size_t>(s) + 1, 1);
  auto rec = [&](auto&& self, int pos, int used) -> void {
    if (pos > s) {
      out.push_back(cur);
      return;
    }
    const int lo = pos == 0 ? 0 : 1;
    const int reserve = s - pos; // each later entry needs at least 1
    for (int v = lo; used + v + reserve <= max_length; ++v) {
      cur.entries[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, used + v);
    }
  };
  rec(rec, 0, 0);
  return out;
}

/// Basis of ker D^s: monomials x^r theta^k with r <= s' for k < s'' and
/// r <= s'-1 otherwise (s = s'(p+1) + s''), ordered by (r, k).
inline SolutionBasis kernel_basis(const QContext& ctx, int s) {
  if (s < 1)
    throw std::invalid_argument("kernel_basis: s must be >= 1");
  const int p = ctx.p();
  const int outer = s / (p + 1);
  const int inner = s % (p + 1);
  SolutionBasis basis{ctx, {}};
  for (int r = 0; r <= outer; ++r)
    for (int k = 0; k <= p; ++k) {
      const int max_r = k < inner ? outer : outer - 1;
      if (r > max_r)
        continue;
      ParaFunction f(ctx);
      f.component(k) = ExpPoly::monomial(Complex(1.0, 0.0), r);
      basis.elements.push_back({std::move(f), Complex(0.0, 0.0), static_cast<int>(basis.size()) + 1});
    }
  return basis;
}

/// Particular solution D^{-s} g of D^s f = g.
inline ParaFunction solve_ds_inhomogeneous(const QContext& ctx, int s, const ParaFunction& g) {
  if (s < 1)
    throw std::invalid_argument("solve_ds_inhomogeneous: s must be >= 1");
  if (!(g.context() == ctx))
    throw std::invalid_argument("solve_ds_inhomogeneous: right-hand side has a different order p");
  return antiderivative_power(g, s);
}

/// Basis of D^s f = lambda f: e_q at the s-th roots mu^k lambda^{1/s}, with the
/// principal root first and mu = exp(2 pi i / s).
inline SolutionBasis root_eigenbasis(const QContext& ctx, int s, Complex lambda) {
  if (s < 1)
    throw std::invalid_argument("root_eigenbasis: s must be >= 1");
  if (lambda == Complex(0.0, 0.0))
    throw RedirectToKernel();
  const Complex principal = s == 1 ? lambda : std::pow(lambda, 1.0 / s);
  SolutionBasis basis{ctx, {}};
  for (int k = 0; k < s; ++k) {
    const Complex root = principal * std::polar(1.0, 2.0 * std::numbers::pi * k / s);
    basis.elements.push_back({exp_eq(ctx, root), root, k + 1});
  }
  return basis;
}

/// Basis of (D - lambda)^n f = 0 for 1 <= n <= p.
///
/// Element i (1-based) keeps only the constant C_{n+1-i} of the multi-index
/// component formula, so element 1 is e_q(lambda^{p+1} x; lambda theta) and
/// element 2 is the second solution of the degenerate second-order case.
inline SolutionBasis degenerate_basis(const QContext& ctx, Complex lambda, int n) {
  const int p = ctx.p();
  if (n < 1 || n > p)
    throw std::out_of_range("degenerate_basis: need 1 <= n <= p (n=" + std::to_string(n) + ", p=" + std::to_string(p) +
                            ")");
  if (lambda == Complex(0.0, 0.0))
    throw RedirectToKernel();

  // weight[s][t] = sum over (m_1..m_s), m_i >= 1, sum t, of prod binom(p+1, m_i).
  std::vector<std::vector<double>> weight(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  weight[0][0] = 1.0;
  for (int s = 1; s < n; ++s)
    for (int t = s; t < n; ++t)
      for (int m = 1; m <= t - (s - 1); ++m)
        weight[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] +=
            binomial(p + 1, m) * weight[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(t - m)];

  const Complex freq = ipow(lambda, p + 1);
  const Complex lambda_p = ipow(lambda, p);
  SolutionBasis basis{ctx, {}};
  for (int i = 1; i <= n; ++i) {
    const int len = i - 1; // |m_s| selecting C_{n+1-i}
    ParaFunction f(ctx);
    for (int k = 0; k <= p; ++k) {
      const Complex prefactor = ipow(lambda, k) / ctx.q_factorial(k);
      std::vector<Complex> poly(static_cast<std::size_t>(len) + 1, Complex(0.0, 0.0));
      for (int s = 0; s <= len; ++s) {
        double inner = 0.0;
        for (int m0 = 0; m0 <= len - s; ++m0)
          inner += binomial(k, m0) * weight[static_cast<std::size_t>(s)][static_cast<std::size_t>(len - m0)];
        poly[static_cast<std::size_t>(s)] = prefactor * inner * ipow(lambda, s - len) * ipow(lambda_p, s) / factorial(s);
      }
      f.component(k) = ExpPoly::block(freq, poly);
    }
    basis.elements.push_back({std::move(f), lambda, i});
  }
  return basis;
}

/// Companion matrix of x^n + c_1 x^{n-1} + ... + c_n acting on (f, Df, ..., D^{n-1} f).
inline ComplexMatrix companion_matrix(const LinearOperator& op) {
  const int n = op.order();
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i)
    a(i, i + 1) = 1.0;
  for (int j = 0; j < n; ++j)
    a(n - 1, j) = -op.coeff(n - j);
  return a;
}

/// Basis of the solution space of op f = 0 (dimension n).
///
/// For n <= p the characteristic roots are clustered and each cluster
/// contributes degenerate_basis (kernel_basis for a root at zero). For n > p
/// the basis is the first row of E_q for the companion system.
inline SolutionBasis solve_constant(const LinearOperator& op) {
  const QContext& ctx = op.context();
  const int n = op.order();
  const auto clusters = characteristic_roots(op.coeffs());
  if (n <= ctx.p()) {
    SolutionBasis basis{ctx, {}};
    for (const auto& rc : clusters) {
      if (std::abs(rc.value) < kClusterTolerance)
        basis.append(kernel_basis(ctx, rc.multiplicity));
      else
        basis.append(degenerate_basis(ctx, rc.value, rc.multiplicity));
    }
    return basis;
  }
  const SystemMatrix sys{ctx, companion_matrix(op)};
  const ComplexMatrix power = matrix_power(sys.a, ctx.p() + 1);
  std::vector<Complex> values;
  for (const auto& rc : clusters)
    for (int k = 0; k < rc.multiplicity; ++k)
      values.push_back(ipow(rc.value, ctx.p() + 1));
  const auto blocks = matrix_eq(sys, cluster_eigenvalues(power, values));
  SolutionBasis basis{ctx, {}};
  for (int j = 0; j < n; ++j)
    basis.elements.push_back({matrix_eq_entry(ctx, blocks, 0, j), std::nullopt, j + 1});
  return basis;
}

/// coeff * (d/dx)^derivative f_component
struct ComponentTerm {
  Complex coeff;
  int derivative = 0;
  int component = 0;
};

/// sum of terms = 0, obtained from the theta^l coefficient (scaled by [l]_q!).
struct ComponentRelation {
  int theta_index = 0;
  int order = 0;
  std::vector<ComponentTerm> terms;
};

/// The system of component equations equivalent to op f = 0.
class ComponentSystem {
public:
  ComponentSystem(QContext ctx, std::vector<ComponentRelation> relations)
      : ctx_(std::move(ctx)), relations_(std::move(relations)) {}

  [[nodiscard]] const QContext& context() const noexcept { return ctx_; }
  [[nodiscard]] const std::vector<ComponentRelation>& relations() const noexcept { return relations_; }

  [[nodiscard]] int count_of_order(int order) const {
    return static_cast<int>(std::count_if(relations_.begin(), relations_.end(),
                                          [order](const ComponentRelation& r) { return r.order == order; }));
  }

  /// Left-hand sides evaluated on f, one per relation.
  [[nodiscard]] std::vector<ExpPoly> residuals(const ParaFunction& f) const {
    std::vector<ExpPoly> out;
    for (const auto& rel : relations_) {
      ExpPoly acc;
      for (const auto& t : rel.terms)
        acc += t.coeff * ep_derivative(f.component(t.component), t.derivative);
      out.push_back(std::move(acc));
    }
    return out;
  }

  [[nodiscard]] bool is_satisfied(const ParaFunction& f, double tol = kDefaultTolerance) const {
    for (const auto& r : residuals(f))
      if (!ep_is_zero(r, tol))
        return false;
    return true;
  }

  /// Matrix M with (f_0..f_{d-1})' = M (f_0..f_{d-1}) for first-order systems.
  ///
  /// Order-0 relations eliminate the higher components; the d order-1
  /// relations must involve derivatives of f_0..f_{d-1} only.
  [[nodiscard]] ComplexMatrix derivative_matrix() const {
    const int p = ctx_.p();
    int d = 0;
    for (const auto& rel : relations_) {
      if (rel.order > 1)
        throw std::domain_error("derivative_matrix: relation of order " + std::to_string(rel.order));
      for (const auto& t : rel.terms)
        if (t.derivative == 1)
          d = std::max(d, t.component + 1);
    }
    if (count_of_order(1) != d)
      throw std::domain_error("derivative_matrix: system is not a closed first-order system");
    // expr[m] = row vector expressing f_m through f_0..f_{d-1}
    std::vector<std::optional<Eigen::RowVectorXcd>> expr(static_cast<std::size_t>(p) + 1);
    for (int m = 0; m < d; ++m) {
      Eigen::RowVectorXcd e = Eigen::RowVectorXcd::Zero(d);
      e(m) = 1.0;
      expr[static_cast<std::size_t>(m)] = e;
    }
    std::vector<const ComponentRelation*> zero_order;
    for (const auto& rel : relations_)
      if (rel.order == 0)
        zero_order.push_back(&rel);
    auto top = [](const ComponentRelation* r) {
      int h = -1;
      for (const auto& t : r->terms)
        h = std::max(h, t.component);
      return h;
    };
    std::sort(zero_order.begin(), zero_order.end(), [&](auto* a, auto* b) { return top(a) < top(b); });
    for (const auto* rel : zero_order) {
      const int h = top(rel);
      Complex lead(0.0, 0.0);
      Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(d);
      for (const auto& t : rel->terms) {
        if (t.component == h) {
          lead += t.coeff;
          continue;
        }
        if (!expr[static_cast<std::size_t>(t.component)])
          throw std::domain_error("derivative_matrix: recursion references an unresolved component");
        acc += t.coeff * *expr[static_cast<std::size_t>(t.component)];
      }
      if (h < d || expr[static_cast<std::size_t>(h)])
        throw std::domain_error("derivative_matrix: recursion does not determine a new component");
      expr[static_cast<std::size_t>(h)] = -acc / lead;
    }
    for (const auto& e : expr)
      if (!e)
        throw std::domain_error("derivative_matrix: some component is left undetermined");
    ComplexMatrix lhs = ComplexMatrix::Zero(d, d);
    ComplexMatrix rhs = ComplexMatrix::Zero(d, d);
    int row = 0;
    for (const auto& rel : relations_) {
      if (rel.order != 1)
        continue;
      for (const auto& t : rel.terms) {
        if (t.derivative == 1)
          lhs(row, t.component) += t.coeff;
        else
          rhs.row(row) += t.coeff * *expr[static_cast<std::size_t>(t.component)];
      }
      ++row;
    }
    return -lhs.fullPivLu().solve(rhs);
  }

private:
  QContext ctx_;
  std::vector<ComponentRelation> relations_;
};

/// Component system of op f = 0 for any order n = n'(p+1) + n''.
///
/// With c_0 = 1 and the shift l+nu -> l+nu-(p+1) for wrapped indices:
///   l = 0:               order n'   (one relation)
///   1 <= l <= p - n'':   order n'
///   p - n'' < l <= p:    order n'+1
/// Wrapped terms carry one extra x-derivative relative to the unwrapped
/// term with the same coefficient.
inline ComponentSystem reduce_components(const LinearOperator& op) {
  const QContext& ctx = op.context();
  const int p = ctx.p();
  const int n = op.order();
  const int outer = n / (p + 1);
  const int inner = n % (p + 1);
  auto fact = [&](int k) { return ctx.q_factorial(k); };

  std::vector<ComponentRelation> relations;
  for (int l = 0; l <= p; ++l) {
    std::map<std::pair<int, int>, Complex> acc; // (component, derivative)
    auto add = [&](Complex c, int derivative, int component) {
      if (c == Complex(0.0, 0.0))
        return;
      acc[{component, derivative}] += c;
    };
    const bool high = l > p - inner;
    // Leading terms of the top power block.
    const int nu_hi = high ? p - l : inner;
    for (int nu = 0; nu <= nu_hi; ++nu)
      add(op.coeff(inner - nu) * fact(l + nu), outer, l + nu);
    if (high)
      for (int nu = p + 1 - l; nu <= inner; ++nu)
        add(op.coeff(inner - nu) * fact(l + nu - (p + 1)), outer + 1, l + nu - (p + 1));
    // Lower power blocks.
    for (int mu = 0; mu < outer; ++mu) {
      for (int nu = 0; nu <= p - l; ++nu)
        add(op.coeff((outer - mu) * (p + 1) + (inner - nu)) * fact(l + nu), mu, l + nu);
      for (int nu = p - l + 1; nu <= p; ++nu)
        add(op.coeff((outer - mu) * (p + 1) + (inner - nu)) * fact(l + nu - (p + 1)), mu + 1, l + nu - (p + 1));
    }
    ComponentRelation rel{l, high ? outer + 1 : outer, {}};
    for (const auto& [key, c] : acc)
      rel.terms.push_back({c, key.second, key.first});
    relations.push_back(std::move(rel));
  }
  return {ctx, std::move(relations)};
}

/// Matrix governing (f_0, f_1)' for a second-order operator.
struct SecondOrderMatrix {
  ComplexMatrix matrix;
  bool degenerate = false;
};

/// B = (1/gamma) [[c2 mu_p, -mu_{p+1}], [c2 mu_{p+1}, -mu_{p+2}]] for distinct
/// roots; for c1 = -2 alpha, c2 = alpha^2 the matrix
/// [[-p a^{p+1}, (p+1) a^p], [-(p+1) a^{p+2}, (p+2) a^{p+1}]].
inline SecondOrderMatrix second_order_component_matrix(const LinearOperator& op) {
  const int p = op.context().p();
  if (op.order() != 2)
    throw std::invalid_argument("second_order_component_matrix: operator must have order 2");
  const Complex c1 = op.coeff(1);
  const Complex c2 = op.coeff(2);
  ComplexMatrix m(2, 2);
  if (discriminant_is_degenerate(c1, c2)) {
    const Complex a = -c1 / 2.0;
    const double pp = p;
    m << -pp * ipow(a, p + 1), (pp + 1.0) * ipow(a, p), -(pp + 1.0) * ipow(a, p + 2), (pp + 2.0) * ipow(a, p + 1);
    return {m, true};
  }
  const Complex gamma = quadratic_roots(c1, c2).gamma;
  const Complex mu_p = binet_mu_nu(c1, c2, p).first;
  const Complex mu_p1 = binet_mu_nu(c1, c2, p + 1).first;
  const Complex mu_p2 = binet_mu_nu(c1, c2, p + 2).first;
  m << c2 * mu_p, -mu_p1, c2 * mu_p1, -mu_p2;
  return {m / gamma, false};
}

} // namespace paracalc
