#pragma once

// First-order systems D w = A w and the matrix exponential E_q.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "paracalc/exppoly.hpp"
#include "paracalc/fib.hpp"
#include "paracalc/psf.hpp"
#include "paracalc/roots.hpp"

namespace paracalc {

/// Square matrix whose entries are exponential polynomials in x.
class MatrixExpPoly {
public:
  MatrixExpPoly() = default;
  explicit MatrixExpPoly(int n) : n_(n), entries_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {}

  /// Constant matrix.
  static MatrixExpPoly constant(const ComplexMatrix& m) {
    MatrixExpPoly r(static_cast<int>(m.rows()));
    for (int i = 0; i < r.n_; ++i)
      for (int j = 0; j < r.n_; ++j)
        if (m(i, j) != Complex(0.0, 0.0))
          r(i, j) = ExpPoly::constant(m(i, j));
    return r;
  }

  [[nodiscard]] int size() const noexcept { return n_; }
  ExpPoly& operator()(int i, int j) { return entries_.at(index(i, j)); }
  [[nodiscard]] const ExpPoly& operator()(int i, int j) const { return entries_.at(index(i, j)); }

  [[nodiscard]] ComplexMatrix eval(Complex x) const {
    ComplexMatrix m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        m(i, j) = ep_eval((*this)(i, j), x);
    return m;
  }

  [[nodiscard]] double max_abs_coeff() const noexcept {
    double m = 0.0;
    for (const auto& e : entries_)
      m = std::max(m, e.max_abs_coeff());
    return m;
  }

  MatrixExpPoly& operator+=(const MatrixExpPoly& o) {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      entries_[i] += o.entries_[i];
    return *this;
  }
  MatrixExpPoly& operator-=(const MatrixExpPoly& o) {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      entries_[i] -= o.entries_[i];
    return *this;
  }
  friend MatrixExpPoly operator-(MatrixExpPoly a, const MatrixExpPoly& b) { return a -= b; }

private:
  [[nodiscard]] std::size_t index(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_)
      throw std::out_of_range("MatrixExpPoly: index out of range");
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
  }

  int n_ = 0;
  std::vector<ExpPoly> entries_;
};

/// M * E (constant matrix on the left).
inline MatrixExpPoly operator*(const ComplexMatrix& m, const MatrixExpPoly& e) {
  const int n = e.size();
  MatrixExpPoly r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        if (m(i, l) != Complex(0.0, 0.0))
          r(i, j) += m(i, l) * e(l, j);
  return r;
}

/// E * M (constant matrix on the right).
inline MatrixExpPoly operator*(const MatrixExpPoly& e, const ComplexMatrix& m) {
  const int n = e.size();
  MatrixExpPoly r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        if (m(l, j) != Complex(0.0, 0.0))
          r(i, j) += m(l, j) * e(i, l);
  return r;
}

inline MatrixExpPoly x_derivative(const MatrixExpPoly& e) {
  MatrixExpPoly r(e.size());
  for (int i = 0; i < e.size(); ++i)
    for (int j = 0; j < e.size(); ++j)
      r(i, j) = ep_derivative(e(i, j));
  return r;
}

/// A^e by binary exponentiation.
inline ComplexMatrix matrix_power(const ComplexMatrix& a, int e) {
  if (e < 0)
    throw std::invalid_argument("matrix_power: negative exponent");
  ComplexMatrix result = ComplexMatrix::Identity(a.rows(), a.cols());
  ComplexMatrix base = a;
  while (e > 0) {
    if ((e & 1) != 0)
      result = result * base;
    e >>= 1;
    if (e > 0)
      base = base * base;
  }
  return result;
}

/// Entry magnitudes of A^(p+1) beyond this are reported as ill-conditioned.
inline constexpr double kConditionWarning = 1e12;

inline bool power_is_ill_conditioned(const ComplexMatrix& power) { return power.cwiseAbs().maxCoeff() > kConditionWarning; }

/// Groups approximate eigenvalues of b into clusters with multiplicities.
///
/// Values within kClusterTolerance*(1+|lambda|) always merge; wider groups
/// (up to kClusterSearchRadius) merge when (b - mu I)^m has m singular values
/// that vanish relative to max(1, |b|)^m.
inline std::vector<RootCluster> cluster_eigenvalues(const ComplexMatrix& b, const std::vector<Complex>& values) {
  std::vector<RootCluster> clusters;
  std::vector<std::vector<Complex>> members;
  for (const auto& v : values) {
    bool placed = false;
    for (std::size_t c = 0; c < clusters.size(); ++c)
      if (std::abs(clusters[c].value - v) < kClusterTolerance * (1.0 + std::abs(v))) {
        members[c].push_back(v);
        Complex s(0.0, 0.0);
        for (const auto& m : members[c])
          s += m;
        clusters[c] = {s / static_cast<double>(members[c].size()), static_cast<int>(members[c].size())};
        placed = true;
        break;
      }
    if (!placed) {
      clusters.push_back({v, 1});
      members.push_back({v});
    }
  }
  const Eigen::Index n = b.rows();
  const double scale = std::max(1.0, b.operatorNorm());
  auto confirms = [&](Complex mu, int m) {
    const ComplexMatrix shifted = matrix_power(b - mu * ComplexMatrix::Identity(n, n), m);
    Eigen::JacobiSVD<ComplexMatrix> svd(shifted);
    const auto& sv = svd.singularValues();
    const double bound = 1e-9 * std::pow(scale, m);
    for (int k = 0; k < m; ++k)
      if (sv(n - 1 - k) > bound)
        return false;
    return true;
  };
  for (bool merged = true; merged;) {
    merged = false;
    double best = -1.0;
    std::size_t ba = 0;
    std::size_t bb = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double d = std::abs(clusters[i].value - clusters[j].value);
        if (d < kClusterSearchRadius * (1.0 + std::abs(clusters[i].value)) && (best < 0.0 || d < best)) {
          const int m = clusters[i].multiplicity + clusters[j].multiplicity;
          const Complex mu = (clusters[i].value * static_cast<double>(clusters[i].multiplicity) +
                              clusters[j].value * static_cast<double>(clusters[j].multiplicity)) /
                             static_cast<double>(m);
          if (confirms(mu, m)) {
            best = d;
            ba = i;
            bb = j;
          }
        }
      }
    if (best >= 0.0) {
      const int m = clusters[ba].multiplicity + clusters[bb].multiplicity;
      clusters[ba].value = (clusters[ba].value * static_cast<double>(clusters[ba].multiplicity) +
                            clusters[bb].value * static_cast<double>(clusters[bb].multiplicity)) /
                           static_cast<double>(m);
      clusters[ba].multiplicity = m;
      clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
      merged = true;
    }
  }
  return clusters;
}

namespace systems_detail {

// Putzer's recurrence: e^{Bx} = sum_j r_{j+1}(x) P_j with P_0 = I,
// P_j = P_{j-1}(B - lambda_j I), r_1 = e^{lambda_1 x},
// r_j' = lambda_j r_j + r_{j-1}, r_j(0) = 0.
inline MatrixExpPoly putzer_exponential(const ComplexMatrix& b, const std::vector<Complex>& eig) {
  const int n = static_cast<int>(b.rows());
  MatrixExpPoly result(n);
  ComplexMatrix projector = ComplexMatrix::Identity(n, n);
  ExpPoly r = ExpPoly::exponential(eig[0]);
  for (int j = 0; j < n; ++j) {
    if (j > 0) {
      projector = projector * (b - eig[static_cast<std::size_t>(j - 1)] * ComplexMatrix::Identity(n, n));
      const Complex lam = eig[static_cast<std::size_t>(j)];
      r = ep_shift(ep_antiderivative(ep_shift(r, -lam)), lam);
    }
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (projector(i, k) != Complex(0.0, 0.0))
          result(i, k) += projector(i, k) * r;
  }
  return result;
}

// e^{Bx} = sum_i e^{lambda_i x} sum_{k < m_i} x^k/k! (B - lambda_i I)^k P_i, with P_i
// the projector onto ker (B - lambda_i I)^{m_i} along the other generalized
// eigenspaces, built from the right and left null vectors of that power.
// Empty when some projector cannot be formed.
inline std::optional<MatrixExpPoly> spectral_exponential(const ComplexMatrix& b,
                                                         const std::vector<RootCluster>& spectrum) {
  const Eigen::Index n = b.rows();
  MatrixExpPoly result(static_cast<int>(n));
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  for (const auto& c : spectrum) {
    const int m = c.multiplicity;
    const ComplexMatrix shifted = b - c.value * id;
    Eigen::JacobiSVD<ComplexMatrix> svd(matrix_power(shifted, m), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const ComplexMatrix right = svd.matrixV().rightCols(m);
    const ComplexMatrix left = svd.matrixU().rightCols(m);
    const ComplexMatrix gram = left.adjoint() * right;
    Eigen::JacobiSVD<ComplexMatrix> gsvd(gram);
    const auto& gs = gsvd.singularValues();
    if (gs(m - 1) < 1e-12 * gs(0))
      return std::nullopt;
    const ComplexMatrix projector = right * gram.partialPivLu().solve(left.adjoint());
    std::vector<ComplexMatrix> terms;
    ComplexMatrix term = projector;
    double fact = 1.0;
    for (int k = 0; k < m; ++k) {
      if (k > 0) {
        term = shifted * term;
        fact *= k;
      }
      terms.push_back(term / fact);
    }
    std::vector<Complex> poly(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        for (int k = 0; k < m; ++k)
          poly[static_cast<std::size_t>(k)] = terms[static_cast<std::size_t>(k)](i, j);
        result(static_cast<int>(i), static_cast<int>(j)) += ExpPoly::block(c.value, poly);
      }
  }
  return result;
}

// Largest coefficient of d/dx E - B E.
inline double derivative_defect(const ComplexMatrix& b, const MatrixExpPoly& e) {
  MatrixExpPoly d = x_derivative(e);
  d -= b * e;
  return d.max_abs_coeff();
}

} // namespace systems_detail

/// e^{B x} from a known spectrum (clusters with multiplicities summing to n).
///
/// Both Putzer's recurrence and the spectral-projector expansion are formed;
/// the one whose x-derivative better matches B e^{Bx} is returned. Putzer
/// loses accuracy when |B| is large against the eigenvalue gaps, the
/// projectors when a generalized eigenspace is ill-conditioned.
inline MatrixExpPoly matrix_exponential(const ComplexMatrix& b, const std::vector<RootCluster>& spectrum) {
  const int n = static_cast<int>(b.rows());
  if (b.rows() != b.cols())
    throw std::invalid_argument("matrix_exponential: matrix must be square");
  std::vector<Complex> eig;
  for (const auto& c : spectrum)
    for (int k = 0; k < c.multiplicity; ++k)
      eig.push_back(c.value);
  if (static_cast<int>(eig.size()) != n)
    throw std::invalid_argument("matrix_exponential: spectrum multiplicities must sum to n");
  if (n == 0)
    return MatrixExpPoly(0);
  MatrixExpPoly putzer = systems_detail::putzer_exponential(b, eig);
  if (spectrum.size() < 2)
    return putzer;
  auto spectral = systems_detail::spectral_exponential(b, spectrum);
  if (spectral &&
      systems_detail::derivative_defect(b, *spectral) < systems_detail::derivative_defect(b, putzer))
    return std::move(*spectral);
  return putzer;
}

/// e^{B x} with eigenvalues from a Schur decomposition, clustered.
inline MatrixExpPoly matrix_exponential(const ComplexMatrix& b) {
  if (b.rows() != b.cols())
    throw std::invalid_argument("matrix_exponential: matrix must be square");
  if (b.rows() == 0)
    return MatrixExpPoly(0);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(b, false);
  std::vector<Complex> values(solver.eigenvalues().data(), solver.eigenvalues().data() + b.rows());
  return matrix_exponential(b, cluster_eigenvalues(b, values));
}

/// Constant n x n matrix A attached to a nilpotency order.
struct SystemMatrix {
  QContext ctx;
  ComplexMatrix a;

  [[nodiscard]] int size() const noexcept { return static_cast<int>(a.rows()); }
};

/// Spectrum of A^(p+1) as the (p+1)-th powers of the eigenvalues of A.
inline std::vector<RootCluster> powered_spectrum(const ComplexMatrix& a, int power) {
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, false);
  std::vector<Complex> values;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    values.push_back(ipow(solver.eigenvalues()(i), power));
  return cluster_eigenvalues(matrix_power(a, power), values);
}

namespace systems_detail {
inline void check_square(const SystemMatrix& sys) {
  if (sys.a.rows() != sys.a.cols() || sys.a.rows() == 0)
    throw std::invalid_argument("SystemMatrix: A must be square and nonempty");
  if (!sys.a.allFinite())
    throw std::invalid_argument("SystemMatrix: A has non-finite entries");
}
} // namespace systems_detail

/// Blocks of E_q(A^{p+1} x; A theta): block k = (A^k / [k]_q!) e^{A^{p+1} x}.
inline std::vector<MatrixExpPoly> matrix_eq(const SystemMatrix& sys, const std::vector<RootCluster>& spectrum) {
  systems_detail::check_square(sys);
  const int p = sys.ctx.p();
  const MatrixExpPoly base = matrix_exponential(matrix_power(sys.a, p + 1), spectrum);
  std::vector<MatrixExpPoly> blocks;
  ComplexMatrix ak = ComplexMatrix::Identity(sys.a.rows(), sys.a.cols());
  for (int k = 0; k <= p; ++k) {
    if (k > 0)
      ak = ak * sys.a;
    blocks.push_back(ComplexMatrix(ak / sys.ctx.q_factorial(k)) * base);
  }
  return blocks;
}

/// Same blocks with the exponential on the left: e^{A^{p+1} x} (A^k / [k]_q!).
inline std::vector<MatrixExpPoly> matrix_eq_exponential_first(const SystemMatrix& sys) {
  systems_detail::check_square(sys);
  const int p = sys.ctx.p();
  const MatrixExpPoly base =
      matrix_exponential(matrix_power(sys.a, p + 1), powered_spectrum(sys.a, p + 1));
  std::vector<MatrixExpPoly> blocks;
  ComplexMatrix ak = ComplexMatrix::Identity(sys.a.rows(), sys.a.cols());
  for (int k = 0; k <= p; ++k) {
    if (k > 0)
      ak = ak * sys.a;
    blocks.push_back(base * ComplexMatrix(ak / sys.ctx.q_factorial(k)));
  }
  return blocks;
}

/// Largest coefficient of the difference between the two block orderings.
inline double ordering_gap(const std::vector<MatrixExpPoly>& a, const std::vector<MatrixExpPoly>& b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    gap = std::max(gap, (a[k] - b[k]).max_abs_coeff());
  return gap;
}

/// Debug builds also form the exponential-first ordering and assert agreement.
inline std::vector<MatrixExpPoly> matrix_eq(const SystemMatrix& sys) {
  systems_detail::check_square(sys);
  auto blocks = matrix_eq(sys, powered_spectrum(sys.a, sys.ctx.p() + 1));
#ifndef NDEBUG
  double scale = 1.0;
  for (const auto& b : blocks)
    scale = std::max(scale, b.max_abs_coeff());
  assert(ordering_gap(blocks, matrix_eq_exponential_first(sys)) <= 1e-9 * scale);
#endif
  return blocks;
}

/// Entry (i, j) of E_q as a parasuperfunction.
inline ParaFunction matrix_eq_entry(const QContext& ctx, const std::vector<MatrixExpPoly>& blocks, int i, int j) {
  ParaFunction f(ctx);
  for (int k = 0; k <= ctx.p(); ++k)
    f.component(k) = blocks.at(static_cast<std::size_t>(k))(i, j);
  return f;
}

/// w = E_q(A^{p+1} x; A theta) c.
inline std::vector<ParaFunction> solve_system(const SystemMatrix& sys, const std::vector<RootCluster>& spectrum,
                                              const ComplexVector& c) {
  const int n = sys.size();
  if (c.size() != n)
    throw std::invalid_argument("solve_system: constant vector has length " + std::to_string(c.size()) +
                                ", expected " + std::to_string(n));
  const auto blocks = matrix_eq(sys, spectrum);
  std::vector<ParaFunction> w(static_cast<std::size_t>(n), ParaFunction(sys.ctx));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k <= sys.ctx.p(); ++k)
      for (int j = 0; j < n; ++j)
        if (c(j) != Complex(0.0, 0.0))
          w[static_cast<std::size_t>(i)].component(k) += c(j) * blocks[static_cast<std::size_t>(k)](i, j);
  return w;
}

inline std::vector<ParaFunction> solve_system(const SystemMatrix& sys, const ComplexVector& c) {
  systems_detail::check_square(sys);
  return solve_system(sys, powered_spectrum(sys.a, sys.ctx.p() + 1), c);
}

/// max coefficient of D w - A w over all rows.
inline double system_residual(const SystemMatrix& sys, const std::vector<ParaFunction>& w) {
  const int n = sys.size();
  if (static_cast<int>(w.size()) != n)
    throw std::invalid_argument("system_residual: vector length mismatch");
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    ParaFunction r = covariant_derivative(w[static_cast<std::size_t>(i)]);
    for (int l = 0; l < n; ++l)
      if (sys.a(i, l) != Complex(0.0, 0.0))
        r -= sys.a(i, l) * w[static_cast<std::size_t>(l)];
    worst = std::max(worst, r.max_abs_coeff());
  }
  return worst;
}

/// max coefficient of D E_q - A E_q over all entries.
inline double intertwining_residual(const SystemMatrix& sys, const std::vector<MatrixExpPoly>& blocks) {
  const int n = sys.size();
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    std::vector<ParaFunction> column;
    for (int i = 0; i < n; ++i)
      column.push_back(matrix_eq_entry(sys.ctx, blocks, i, j));
    worst = std::max(worst, system_residual(sys, column));
  }
  return worst;
}

} // namespace paracalc
