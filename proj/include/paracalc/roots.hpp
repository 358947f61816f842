#pragma once

// Roots of monic complex polynomials and their grouping into multiplicity clusters.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "paracalc/qcore.hpp"

namespace paracalc {

/// A characteristic root together with its multiplicity.
struct RootCluster {
  Complex value;
  int multiplicity = 1;
};

namespace roots_detail {

// Horner on the monic polynomial x^n + tail[0] x^(n-1) + ... + tail[n-1].
inline void eval_with_derivative(std::span<const Complex> tail, Complex z, Complex& value, Complex& deriv) {
  value = Complex(1.0, 0.0);
  deriv = Complex(0.0, 0.0);
  for (const auto& c : tail) {
    deriv = deriv * z + value;
    value = value * z + c;
  }
}

// Full coefficient vector, highest degree first, leading 1.
inline std::vector<Complex> monic_full(std::span<const Complex> tail) {
  std::vector<Complex> full;
  full.reserve(tail.size() + 1);
  full.emplace_back(1.0, 0.0);
  full.insert(full.end(), tail.begin(), tail.end());
  return full;
}

// Taylor coefficients a_0..a_n of the polynomial (highest first) about mu.
inline std::vector<Complex> taylor_shift(std::vector<Complex> full, Complex mu) {
  const std::size_t n = full.size() - 1;
  std::vector<Complex> a(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 1; i < full.size() - j; ++i)
      full[i] += mu * full[i - 1];
    a[j] = full[full.size() - 1 - j];
  }
  return a;
}

// Newton on P^(m-1) (full coefficients, highest first), which has a root of
// multiplicity m of P as a simple root.
inline Complex polish_multiple_root(const std::vector<Complex>& full, Complex mu, int m) {
  for (int it = 0; it < 20; ++it) {
    const auto a = taylor_shift(full, mu);
    const Complex f = a[static_cast<std::size_t>(m - 1)];
    const Complex df = a[static_cast<std::size_t>(m)] * static_cast<double>(m);
    if (df == Complex(0.0, 0.0))
      break;
    const Complex step = f / df;
    if (std::abs(step) > 1e-3 * (1.0 + std::abs(mu)))
      break;
    mu -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(mu)))
      break;
  }
  return mu;
}

class DisjointSets {
public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b)
      parent_[std::max(a, b)] = std::min(a, b);
  }

private:
  std::vector<std::size_t> parent_;
};

} // namespace roots_detail

/// Iteration cap and stopping threshold of the simultaneous root iteration.
inline constexpr int kRootIterationCap = 200;
inline constexpr double kRootConvergence = 1e-13;

/// Pairs closer than this (relative to 1+|lambda|) are always one cluster.
inline constexpr double kClusterTolerance = 1e-8;

/// Wider search radius for multiple roots that the iteration leaves spread out;
/// such candidates are merged only when the polynomial confirms the multiplicity.
inline constexpr double kClusterSearchRadius = 1e-3;
inline constexpr double kMultiplicityTest = 1e-10;

/// All n roots of x^n + tail[0] x^(n-1) + ... + tail[n-1] by Aberth-Ehrlich
/// iteration from deterministic starting points on the circle of radius
/// 1 + max|c_i|.
inline std::vector<Complex> polynomial_roots(std::span<const Complex> tail) {
  const std::size_t n = tail.size();
  if (n == 0)
    return {};
  if (n == 1)
    return {-tail[0]};
  double radius = 0.0;
  for (const auto& c : tail)
    radius = std::max(radius, std::abs(c));
  radius += 1.0;
  std::vector<Complex> z(n);
  for (std::size_t k = 0; k < n; ++k)
    z[k] = std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4);

  for (int iter = 0; iter < kRootIterationCap; ++iter) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex value;
      Complex deriv;
      roots_detail::eval_with_derivative(tail, z[i], value, deriv);
      if (value == Complex(0.0, 0.0))
        continue;
      Complex repulsion(0.0, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && z[i] != z[j])
          repulsion += Complex(1.0, 0.0) / (z[i] - z[j]);
      Complex step;
      if (deriv == Complex(0.0, 0.0)) {
        step = Complex(1e-8 * (1.0 + std::abs(z[i])), 1e-8);
      } else {
        const Complex newton = value / deriv;
        step = newton / (Complex(1.0, 0.0) - newton * repulsion);
      }
      z[i] -= step;
      worst = std::max(worst, std::abs(step) / (1.0 + std::abs(z[i])));
    }
    if (worst < kRootConvergence)
      break;
  }
  return z;
}

/// Groups roots into clusters with integer multiplicities.
///
/// Roots within kClusterTolerance*(1+|lambda|) are always merged. Wider groups
/// (up to kClusterSearchRadius) are merged when the Taylor coefficients
/// a_0..a_{m-1} of the polynomial about the polished cluster mean all vanish to
/// kMultiplicityTest relative to their natural scale. Cluster values are the
/// arithmetic mean, refined by Newton's method on the (m-1)-th derivative.
/// The output is ordered by (re, im) of the cluster value.
inline std::vector<RootCluster> cluster_roots(std::span<const Complex> roots, std::span<const Complex> tail) {
  using roots_detail::DisjointSets;
  const std::size_t n = roots.size();
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(roots[i] - roots[j]) < kClusterTolerance * (1.0 + std::abs(roots[i])))
        sets.unite(i, j);

  struct Group {
    std::vector<std::size_t> members;
    Complex mean;
  };
  auto build = [&]() {
    std::vector<Group> groups;
    std::vector<long> index(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = sets.find(i);
      if (index[r] < 0) {
        index[r] = static_cast<long>(groups.size());
        groups.push_back({});
      }
      groups[static_cast<std::size_t>(index[r])].members.push_back(i);
    }
    for (auto& g : groups) {
      Complex s(0.0, 0.0);
      for (auto i : g.members)
        s += roots[i];
      g.mean = s / static_cast<double>(g.members.size());
    }
    return groups;
  };

  const std::vector<Complex> full = roots_detail::monic_full(tail);
  std::vector<Complex> magnitudes;
  magnitudes.reserve(full.size());
  for (const auto& c : full)
    magnitudes.emplace_back(std::abs(c), 0.0);

  auto confirms_multiplicity = [&](Complex mu, std::size_t m) {
    mu = roots_detail::polish_multiple_root(full, mu, static_cast<int>(m));
    const auto a = roots_detail::taylor_shift(full, mu);
    const auto scale = roots_detail::taylor_shift(magnitudes, Complex(std::abs(mu), 0.0));
    for (std::size_t j = 0; j < m && j < a.size(); ++j)
      if (std::abs(a[j]) > kMultiplicityTest * std::max(1.0, scale[j].real()))
        return false;
    return true;
  };

  for (bool merged = true; merged;) {
    merged = false;
    auto groups = build();
    struct Candidate {
      double distance;
      std::size_t a;
      std::size_t b;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < groups.size(); ++i)
      for (std::size_t j = i + 1; j < groups.size(); ++j) {
        const double d = std::abs(groups[i].mean - groups[j].mean);
        if (d < kClusterSearchRadius * (1.0 + std::abs(groups[i].mean)))
          candidates.push_back({d, i, j});
      }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& x, const Candidate& y) { return x.distance < y.distance; });
    for (const auto& c : candidates) {
      const std::size_t ma = groups[c.a].members.size();
      const std::size_t mb = groups[c.b].members.size();
      const Complex mu = (groups[c.a].mean * static_cast<double>(ma) + groups[c.b].mean * static_cast<double>(mb)) /
                         static_cast<double>(ma + mb);
      if (confirms_multiplicity(mu, ma + mb)) {
        sets.unite(groups[c.a].members.front(), groups[c.b].members.front());
        merged = true;
        break;
      }
    }
  }

  std::vector<RootCluster> out;
  for (const auto& g : build()) {
    const int m = static_cast<int>(g.members.size());
    Complex mu = g.mean;
    if (m >= 2)
      mu = roots_detail::polish_multiple_root(full, mu, m);
    out.push_back({mu, m});
  }
  std::sort(out.begin(), out.end(), [](const RootCluster& x, const RootCluster& y) {
    return x.value.real() < y.value.real() || (x.value.real() == y.value.real() && x.value.imag() < y.value.imag());
  });
  return out;
}

/// Roots of x^n + tail[0] x^(n-1) + ... grouped into clusters.
inline std::vector<RootCluster> characteristic_roots(std::span<const Complex> tail) {
  const auto r = polynomial_roots(tail);
  return cluster_roots(r, tail);
}

/// Coefficients (c_1..c_n) of prod (x - root_i)^(m_i).
inline std::vector<Complex> polynomial_from_roots(std::span<const RootCluster> clusters) {
  std::vector<Complex> full{Complex(1.0, 0.0)};
  for (const auto& rc : clusters)
    for (int k = 0; k < rc.multiplicity; ++k) {
      full.emplace_back(0.0, 0.0);
      for (std::size_t i = full.size() - 1; i >= 1; --i)
        full[i] -= rc.value * full[i - 1];
    }
  return {full.begin() + 1, full.end()};
}

} // namespace paracalc
