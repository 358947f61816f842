#pragma once

// The ten acceptance criteria. Every tolerance is fixed here; each criterion
// reports the worst observed value next to its verdict.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "paracalc/fib.hpp"
#include "paracalc/psf.hpp"
#include "paracalc/qcore.hpp"
#include "paracalc/solver.hpp"
#include "paracalc/special.hpp"
#include "paracalc/systems.hpp"
#include "paracalc/verify.hpp"
#include "support/oracles.hpp"
#include "support/random.hpp"

namespace acceptance {

using paracalc::Complex;

struct Result {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

inline std::string format_line(const Result& r) {
  char head[64];
  std::snprintf(head, sizeof head, "%s %2d ", r.passed ? "PASS" : "FAIL", r.id);
  char tail[32];
  std::snprintf(tail, sizeof tail, " (%.3f s)", r.seconds);
  return std::string(head) + r.title + ": " + r.detail + tail;
}

// 1. D^{p+1} f = d/dx f for random f.
inline Result root_of_dx() {
  constexpr double kTol = 1e-9;
  constexpr double kTimeLimit = 1.0;
  const auto start = std::chrono::steady_clock::now();
  testgen::Rng rng(101);
  double worst = 0.0;
  for (int p = 1; p <= 6; ++p) {
    const paracalc::QContext ctx(p);
    for (int t = 0; t < 20; ++t) {
      const auto f = testgen::parafunction(rng, ctx, 2, 3);
      paracalc::ParaFunction iterated = f;
      for (int i = 0; i <= p; ++i)
        iterated = paracalc::covariant_derivative(iterated);
      const auto dx = paracalc::x_derivative(f);
      worst = std::max(worst, (iterated - dx).max_abs_coeff());
      worst = std::max(worst, (paracalc::covariant_power(f, p + 1) - dx).max_abs_coeff());
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {1, "D^(p+1) equals d/dx", worst < kTol && secs < kTimeLimit,
          "max coeff " + sci(worst) + " (tol " + sci(kTol) + ")", secs};
}

// 2. Kernel of D^s has dimension s.
inline Result kernel_dimensions() {
  constexpr double kTol = 1e-10;
  double worst = 0.0;
  bool ranks_ok = true;
  int cases = 0;
  for (int p = 1; p <= 5; ++p) {
    const paracalc::QContext ctx(p);
    for (int s = 1; s <= 3 * (p + 1); ++s) {
      const auto basis = paracalc::kernel_basis(ctx, s);
      const auto op = paracalc::LinearOperator::power(ctx, s);
      for (const auto& e : basis.elements)
        worst = std::max(worst, paracalc::residual_norm(op, e.function));
      ranks_ok = ranks_ok && static_cast<int>(basis.size()) == s && paracalc::independence_rank(basis) == s;
      ++cases;
    }
  }
  return {2, "kernel of D^s has dimension s", worst < kTol && ranks_ok,
          std::to_string(cases) + " cases, max residual " + sci(worst) + ", ranks " + (ranks_ok ? "ok" : "WRONG"), 0.0};
}

// 3. Explicit second solutions for the double root at p = 1, 2.
inline Result double_root_closed_forms() {
  constexpr double kResidualTol = 1e-12;
  constexpr double kFitTol = 1e-8;
  const Complex alpha(0.7, 0.2);
  double worst_res = 0.0;
  double worst_fit = 0.0;
  for (int p = 1; p <= 2; ++p) {
    const paracalc::QContext ctx(p);
    const paracalc::LinearOperator op(ctx, {-2.0 * alpha, alpha * alpha});
    const auto expected = p == 1 ? oracle::explicit_second_solution_p1(alpha) : oracle::explicit_second_solution_p2(alpha);
    worst_res = std::max(worst_res, paracalc::residual_norm(op, expected));
    const auto basis = paracalc::solve_constant(op);
    worst_fit = std::max(worst_fit, paracalc::fit_in_span(basis.functions(), expected).residual);
    worst_fit = std::max(worst_fit, paracalc::fit_in_span(basis.functions(), paracalc::exp_eq(ctx, alpha)).residual);
  }
  return {3, "double-root second solutions (p=1,2)", worst_res < kResidualTol && worst_fit < kFitTol,
          "residual " + sci(worst_res) + " (tol " + sci(kResidualTol) + "), fit " + sci(worst_fit) + " (tol " +
              sci(kFitTol) + ")",
          0.0};
}

// 4. Basis for (D - lambda)^n: residual, rank, literal multi-index sum and the n = 2 closed form.
// lambda is drawn with 0.3 <= |lambda| <= 1; the absolute residual grows with
// the coefficient scale, which is about 3e5 at |lambda| = 1.5, p = 5.
inline Result degenerate_basis_check() {
  constexpr double kResidualTol = 1e-9;
  constexpr double kFormulaTol = 1e-10;
  testgen::Rng rng(404);
  double worst_res = 0.0;
  double worst_formula = 0.0;
  bool ranks_ok = true;
  for (int p = 1; p <= 5; ++p) {
    const paracalc::QContext ctx(p);
    for (int n = 1; n <= p; ++n)
      for (int t = 0; t < 10; ++t) {
        const Complex lambda = testgen::in_annulus(rng, 0.3, 1.0);
        const auto basis = paracalc::degenerate_basis(ctx, lambda, n);
        const auto op = paracalc::LinearOperator::shifted_power(ctx, lambda, n);
        for (const auto& e : basis.elements)
          worst_res = std::max(worst_res, paracalc::residual_norm(op, e.function));
        ranks_ok = ranks_ok && paracalc::independence_rank(basis) == n;
        for (int i = 1; i <= n; ++i) {
          std::vector<Complex> constants(static_cast<std::size_t>(n), Complex(0.0, 0.0));
          constants[static_cast<std::size_t>(n - i)] = 1.0;
          const auto literal = oracle::degenerate_solution(ctx, lambda, constants);
          const double scale = std::max(1.0, literal.max_abs_coeff());
          worst_formula =
              std::max(worst_formula, (basis.elements[static_cast<std::size_t>(i - 1)].function - literal).max_abs_coeff() / scale);
        }
        if (n == 2) {
          const auto closed = oracle::second_solution_double_root(ctx, lambda);
          worst_formula = std::max(worst_formula, (basis.elements[1].function - closed).max_abs_coeff());
        }
      }
  }
  return {4, "repeated-root basis", worst_res < kResidualTol && worst_formula < kFormulaTol && ranks_ok,
          "max residual " + sci(worst_res) + " (tol " + sci(kResidualTol) + "), formula gap " + sci(worst_formula) +
              " (tol " + sci(kFormulaTol) + "), ranks " + (ranks_ok ? "ok" : "WRONG"),
          0.0};
}

// 5. General constant-coefficient operators with clustered roots.
inline Result clustered_roots() {
  constexpr double kResidualTol = 1e-8;
  constexpr double kMinSeparation = 0.2;
  testgen::Rng rng(505);
  std::uniform_int_distribution<int> mult(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int failures = 0;
  int cases = 0;
  for (int p = 1; p <= 5; ++p) {
    const paracalc::QContext ctx(p);
    for (int t = 0; t < 30; ++t) {
      std::vector<paracalc::RootCluster> roots;
      int n = 0;
      const int target = 1 + static_cast<int>(u(rng) * p);
      while (n < target) {
        const int m = std::min(mult(rng), target - n);
        Complex lambda;
        bool separated = false;
        while (!separated) {
          lambda = u(rng) < 0.1 ? Complex(0.0, 0.0) : testgen::in_annulus(rng, 0.3, 1.5);
          separated = true;
          for (const auto& r : roots)
            separated = separated && std::abs(r.value - lambda) > kMinSeparation;
        }
        roots.push_back({lambda, m});
        n += m;
      }
      const paracalc::LinearOperator op(ctx, paracalc::polynomial_from_roots(roots));
      const auto basis = paracalc::solve_constant(op);
      bool ok = static_cast<int>(basis.size()) == n && paracalc::independence_rank(basis) == n;
      const auto found = paracalc::characteristic_roots(op.coeffs());
      ok = ok && found.size() == roots.size();
      for (const auto& r : roots)
        ok = ok && std::any_of(found.begin(), found.end(), [&](const paracalc::RootCluster& f) {
               return f.multiplicity == r.multiplicity && std::abs(f.value - r.value) < 1e-6;
             });
      for (const auto& e : basis.elements) {
        const double r = paracalc::residual_norm(op, e.function);
        worst = std::max(worst, r);
        ok = ok && r < kResidualTol && paracalc::brute_force_check(op, e.function);
      }
      failures += ok ? 0 : 1;
      ++cases;
    }
  }
  return {5, "constant coefficients with clustered roots", failures == 0,
          std::to_string(cases) + " operators, " + std::to_string(failures) + " failing, max residual " + sci(worst) +
              " (tol " + sci(kResidualTol) + ")",
          0.0};
}

// 6. Component system against a symbolic expansion of the operator.
inline Result component_reduction() {
  constexpr double kCoeffTol = 1e-12;
  testgen::Rng rng(606);
  const std::vector<std::pair<int, int>> cases{{5, 2}, {7, 3}, {4, 4}, {6, 1}};
  bool ok = true;
  double worst = 0.0;
  for (const auto& [n, p] : cases) {
    const paracalc::QContext ctx(p);
    const auto c = testgen::complex_vector(rng, n);
    const auto sys = paracalc::reduce_components(paracalc::LinearOperator(ctx, c));
    const auto expected = oracle::operator_relations(p, c);
    const int outer = n / (p + 1);
    const int inner = n % (p + 1);
    ok = ok && sys.count_of_order(outer + 1) == (inner > 0 ? inner : 0) && sys.count_of_order(outer) == p - inner + 1;
    for (int l = 0; l <= p; ++l) {
      const auto& rel = sys.relations()[static_cast<std::size_t>(l)];
      const auto& form = expected[static_cast<std::size_t>(l)];
      int max_derivative = 0;
      for (const auto& [key, v] : form)
        max_derivative = std::max(max_derivative, key.second);
      ok = ok && rel.theta_index == l && rel.order == max_derivative && rel.terms.size() == form.size();
      for (const auto& t : rel.terms) {
        const auto it = form.find({t.component, t.derivative});
        if (it == form.end()) {
          ok = false;
          continue;
        }
        worst = std::max(worst, std::abs(it->second - t.coeff) / std::max(1.0, std::abs(it->second)));
      }
    }
  }
  return {6, "component system matches symbolic expansion", ok && worst < kCoeffTol,
          "structure " + std::string(ok ? "identical" : "DIFFERENT") + ", max coeff gap " + sci(worst) + " (tol " +
              sci(kCoeffTol) + ")",
          0.0};
}

// 7. Matrix exponential E_q and first-order systems.
inline Result matrix_systems() {
  constexpr double kIntertwineTol = 1e-8;
  constexpr double kSpecialTol = 1e-12;
  testgen::Rng rng(707);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<int> order(1, 4);
  double worst = 0.0;
  double worst_special = 0.0;
  bool ranks_ok = true;
  for (int t = 0; t < 20; ++t) {
    const int n = dim(rng);
    const paracalc::QContext ctx(order(rng));
    paracalc::ComplexMatrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        a(i, j) = testgen::in_disk(rng);
    const paracalc::SystemMatrix sys{ctx, a};
    const auto blocks = paracalc::matrix_eq(sys);
    worst = std::max(worst, paracalc::intertwining_residual(sys, blocks));
    std::vector<std::vector<paracalc::ParaFunction>> cols;
    for (int j = 0; j < n; ++j)
      cols.push_back(paracalc::solve_system(sys, paracalc::ComplexVector::Unit(n, j)));
    ranks_ok = ranks_ok && paracalc::independence_rank(cols) == n;

    // diagonal specialization: block-diagonal scalar exponentials
    paracalc::ComplexMatrix d = paracalc::ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      d(i, i) = testgen::in_disk(rng);
    const auto dblocks = paracalc::matrix_eq({ctx, d});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const auto entry = paracalc::matrix_eq_entry(ctx, dblocks, i, j);
        const auto expect = i == j ? paracalc::exp_eq(ctx, d(i, i)) : paracalc::ParaFunction(ctx);
        worst_special = std::max(worst_special, (entry - expect).max_abs_coeff());
      }
    // scalar specialization
    const Complex s = testgen::in_disk(rng);
    const auto sblocks = paracalc::matrix_eq({ctx, paracalc::ComplexMatrix::Constant(1, 1, s)});
    worst_special =
        std::max(worst_special, (paracalc::matrix_eq_entry(ctx, sblocks, 0, 0) - paracalc::exp_eq(ctx, s)).max_abs_coeff());
  }
  return {7, "matrix exponential and linear systems", worst < kIntertwineTol && worst_special < kSpecialTol && ranks_ok,
          "D E - A E " + sci(worst) + " (tol " + sci(kIntertwineTol) + "), diagonal/scalar gap " + sci(worst_special) +
              " (tol " + sci(kSpecialTol) + "), ranks " + (ranks_ok ? "ok" : "WRONG"),
          0.0};
}

// 8. theta-dependent coefficient at p = 2 and the constant specialization.
inline Result theta_coefficient() {
  constexpr double kRateTol = 1e-12;
  constexpr double kResidualTol = 1e-10;
  constexpr double kConstantTol = 1e-10;
  testgen::Rng rng(808);
  const paracalc::QContext ctx(2);
  const Complex q2 = oracle::qint(2, 2);
  double worst_rate = 0.0;
  double worst_res = 0.0;
  double worst_const = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto c = testgen::complex_vector(rng, 3);
    const paracalc::ThetaPoly poly(ctx, c);
    const auto sol = paracalc::solve_theta_coefficient(poly);
    const Complex expected = c[0] * c[0] * c[0] + (1.0 + q2) * c[0] * c[1] + q2 * c[2];
    worst_rate = std::max(worst_rate, std::abs(sol.growth_rate - expected));
    worst_res = std::max(worst_res,
                         paracalc::theta_coefficient_residual(poly, sol.basis.elements[0].function).max_abs_coeff());
  }
  for (int p = 1; p <= 6; ++p) {
    const paracalc::QContext cp(p);
    const Complex c = testgen::in_disk(rng);
    std::vector<Complex> coeffs(static_cast<std::size_t>(p) + 1, Complex(0.0, 0.0));
    coeffs[0] = c;
    const auto sol = paracalc::solve_theta_coefficient(paracalc::ThetaPoly(cp, coeffs));
    worst_const = std::max(worst_const, (sol.basis.elements[0].function - paracalc::exp_eq(cp, c)).max_abs_coeff());
  }
  return {8, "theta-dependent coefficient", worst_rate < kRateTol && worst_res < kResidualTol && worst_const < kConstantTol,
          "rate gap " + sci(worst_rate) + " (tol " + sci(kRateTol) + "), residual " + sci(worst_res) + " (tol " +
              sci(kResidualTol) + "), constant case " + sci(worst_const) + " (tol " + sci(kConstantTol) + ")",
          0.0};
}

// 9. Structure of the solutions of (D^m f)^n = 0.
inline Result nonlinear_family() {
  testgen::Rng rng(909);
  int checked = 0;
  int failures = 0;
  auto function_fill = [&](int) { return testgen::exppoly(rng, 2, 2); };
  auto nonconstant = [&]() {
    paracalc::ExpPoly g = paracalc::ExpPoly::monomial(testgen::in_annulus(rng, 0.5, 1.0), 1);
    g += paracalc::ExpPoly::exponential(testgen::in_annulus(rng, 0.3, 1.0), testgen::in_annulus(rng, 0.5, 1.0));
    return g;
  };
  for (int p = 1; p <= 8; ++p) {
    const paracalc::QContext ctx(p);
    for (int n = 1; n <= 4; ++n)
      for (int m = 1; m <= p; ++m) {
        const auto s = paracalc::nonlinear_structure(ctx, m, n);
        bool ok = static_cast<int>(s.free_functions.size()) == p - p / n;
        for (int t = 0; t < 3; ++t) {
          const auto f = paracalc::sample_conforming(ctx, s, function_fill, [&](int) { return testgen::in_disk(rng); });
          ok = ok && paracalc::nonlinear_check(f, m, n, paracalc::NonlinearPath::full_power) &&
               paracalc::nonlinear_check(f, m, n, paracalc::NonlinearPath::low_components);
          for (int k : s.forced_zero) {
            auto g = f;
            g.component(k) += nonconstant();
            ok = ok && !paracalc::nonlinear_check(g, m, n, paracalc::NonlinearPath::full_power);
          }
          for (int k : s.free_constants) {
            auto g = f;
            g.component(k) += nonconstant();
            ok = ok && !paracalc::nonlinear_check(g, m, n, paracalc::NonlinearPath::full_power);
          }
        }
        failures += ok ? 0 : 1;
        ++checked;
      }
  }
  return {9, "(D^m f)^n = 0 solution structure", failures == 0,
          std::to_string(checked) + " (p,n,m) cases, " + std::to_string(failures) + " failing", 0.0};
}

// 10. Transfer-matrix products against the closed forms.
inline Result fibonacci_layer() {
  constexpr double kBinetTol = 1e-9;
  constexpr double kDegenerateTol = 1e-12;
  testgen::Rng rng(1010);
  double worst_binet = 0.0;
  double worst_deg = 0.0;
  for (int p = 1; p <= 8; ++p) {
    const paracalc::QContext ctx(p);
    for (int t = 0; t < 5; ++t) {
      const auto c = testgen::complex_vector(rng, 2);
      if (!paracalc::discriminant_is_degenerate(c[0], c[1]))
        for (int k = 1; k <= std::min(p - 1, 15); ++k) {
          const auto norm = paracalc::normalized_entries(ctx, c, k);
          for (int i = 0; i < 2; ++i) {
            const auto [f1, f2] = paracalc::binet_sequences(c[0], c[1], k + i - 1);
            worst_binet = std::max({worst_binet, std::abs(norm(i, 0) - f1), std::abs(norm(i, 1) - f2)});
          }
        }
      const Complex alpha = testgen::in_disk(rng);
      for (int k = 0; k <= p - 1; ++k) {
        const auto product = paracalc::accumulated_matrix(ctx, {-2.0 * alpha, alpha * alpha}, k);
        const auto closed = paracalc::degenerate_accumulated_matrix(ctx, alpha, k);
        worst_deg = std::max(worst_deg, (product - closed).cwiseAbs().maxCoeff());
      }
    }
  }
  return {10, "transfer matrices vs closed forms", worst_binet < kBinetTol && worst_deg < kDegenerateTol,
          "Binet gap " + sci(worst_binet) + " (tol " + sci(kBinetTol) + "), repeated-root gap " + sci(worst_deg) +
              " (tol " + sci(kDegenerateTol) + ")",
          0.0};
}

inline std::vector<Result> run_all() {
  const std::vector<std::function<Result()>> all{root_of_dx,       kernel_dimensions,   double_root_closed_forms,
                                                 degenerate_basis_check, clustered_roots, component_reduction,
                                                 matrix_systems,   theta_coefficient,   nonlinear_family,
                                                 fibonacci_layer};
  std::vector<Result> out;
  for (const auto& criterion : all) {
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = criterion();
    } catch (const std::exception& e) {
      r = {static_cast<int>(out.size()) + 1, "criterion " + std::to_string(out.size() + 1), false,
           std::string("threw: ") + e.what(), 0.0};
    }
    if (r.seconds == 0.0)
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace acceptance
