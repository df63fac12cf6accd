#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "determinant.hpp"
#include "graph.hpp"
#include "hill.hpp"

namespace graph_spectra {

/// S(-E) came out with an imaginary part beyond rounding; points at a bug or a
/// non-Hermitian input rather than something to truncate silently.
class SecularError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// S evaluated on the secular axis gamma = -E, sqrt(gamma) = i sqrt(E).
/// Uses the bordered system, so bond eigenvalues are regular points.
class SecularFunction {
 public:
  explicit SecularFunction(const MetricGraph& g, std::vector<std::string> pinned = {})
      : graph_(g), pinned_(std::move(pinned)) {}
  explicit SecularFunction(AssemblyGraph g, std::vector<std::string> pinned = {})
      : graph_(std::move(g)), pinned_(std::move(pinned)) {}

  [[nodiscard]] double operator()(double energy) const {
    if (energy < 0.0) throw std::domain_error("secular function is defined for E >= 0");
    const auto m = bordered_matrix(graph_, SpectralPoint::at_energy(energy), pinned_);
    const complex s = lu_determinant(m).value();
    const double scale = std::max(std::abs(s), hadamard_bound(m).abs().real());
    if (std::abs(s.imag()) > 1e-9 * scale) {
      throw SecularError("S(-E) is not real at E = " + std::to_string(energy));
    }
    return s.real();
  }
  /// As a function of k = sqrt(E).
  [[nodiscard]] double at_wavenumber(double k) const { return (*this)(k * k); }

  [[nodiscard]] const AssemblyGraph& graph() const { return graph_; }

 private:
  AssemblyGraph graph_;
  std::vector<std::string> pinned_;
};

inline double secular_value(const MetricGraph& g, double energy) { return SecularFunction(g)(energy); }

enum RootFlag : unsigned {
  simple_root = 1U << 0U,      // isolated sign change of S(-E)
  tangential_root = 1U << 1U,  // S touches zero; multiplicity >= 2 suspected
  prefactor_zero = 1U << 2U,   // a bond prefactor vanishes here while det M stays finite and nonzero
};

struct SpectralLevel {
  double energy = 0.0;
  unsigned flags = 0;
  [[nodiscard]] bool has(RootFlag f) const { return (flags & f) != 0; }
};

struct SpectrumResult {
  std::vector<SpectralLevel> levels;  // ascending

  [[nodiscard]] std::vector<double> energies() const {
    std::vector<double> e;
    e.reserve(levels.size());
    for (const auto& l : levels) e.push_back(l.energy);
    return e;
  }
};

struct SpectrumOptions {
  double e_max = 0.0;
  /// Points of the uniform k = sqrt(E) grid; 0 selects 64 per expected level.
  int grid_points = 0;
  double tol = 1e-10;
};

inline double total_length(const MetricGraph& g) {
  double total = 0.0;
  for (const auto& b : g.bonds) total += b.length;
  return total;
}

/// 64 grid points per expected eigenvalue, from the Weyl estimate L sqrt(E)/pi.
inline int default_grid_points(const MetricGraph& g, double e_max) {
  const double expected = total_length(g) * std::sqrt(e_max) / std::numbers::pi;
  return std::max(64, static_cast<int>(std::ceil(64.0 * expected)));
}

namespace detail {

/// Bisection on a sign change of f over [a, b] in k until the energy bracket
/// k_b^2 - k_a^2 is below tol.
template <typename F>
double bisect_wavenumber(const F& f, double a, double b, double fa, double tol) {
  for (int it = 0; it < 200 && b * b - a * a > tol; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

inline bool has_vanishing_prefactor(const AssemblyGraph& g, double energy) {
  const auto point = SpectralPoint::at_energy(energy);
  for (const auto& b : g.bonds()) {
    const auto f = fundamental_solution(b.window(), point);
    const double amplitude = b.length / std::max(1.0, f.rate * b.length);
    const double factor = g.family() == CouplingFamily::delta
                              ? DetValue::scaled(f.w, f.scale).log2_abs() - std::log2(amplitude)
                              : DetValue::scaled(f.du, f.scale).log2_abs() + std::log2(amplitude);
    if (factor < std::log2(1e-6)) return true;
  }
  return false;
}

/// |det M| (resp. |det N|) near k on both sides, at offsets h and h/8. A pole
/// grows by ~8 between the two, a zero shrinks by ~8, a finite nonzero value
/// stays put.
inline bool vertex_determinant_regular(const AssemblyGraph& g, double k, double h) {
  auto magnitude = [&](double kk) {
    const auto vm = assemble_vertex_matrix(g, SpectralPoint::at_energy(kk * kk));
    return lu_determinant(vm.matrix).log2_abs();
  };
  try {
    for (double side : {-1.0, 1.0}) {
      if (k + side * h <= 0.0) continue;
      const double change = magnitude(k + side * h / 8.0) - magnitude(k + side * h);
      if (!(std::abs(change) < 1.0)) return false;
    }
  } catch (const DegenerateBondError&) {
    return false;
  }
  return true;
}

}  // namespace detail

/// True when some bond prefactor (Dirichlet factor, or Neumann factor for the
/// delta' family) vanishes at energy E, to a relative 1e-6 of its amplitude.
inline bool bond_prefactor_vanishes(const MetricGraph& g, double energy) {
  if (!(energy >= 0.0)) throw std::domain_error("bond_prefactor_vanishes needs E >= 0");
  return detail::has_vanishing_prefactor(AssemblyGraph(g), energy);
}

/// Eigenvalues in [0, e_max] from the zeros of S(-E).
///
/// Sign changes on a uniform k grid are refined by bisection. Local minima of
/// |S| without a sign change are refined by bisection on the central
/// difference of S; if S reaches ~0 there (below 1e-8 of its neighbours) the
/// level is reported once and flagged tangential, and if S crosses zero the two
/// nearby simple roots are reported. Multiplicity is not inferred. Levels
/// closer than (sqrt(e_max) / grid_points) may be missed.
inline SpectrumResult find_spectrum(const MetricGraph& g, const SpectrumOptions& opt) {
  if (!(opt.e_max > 0.0)) throw std::invalid_argument("find_spectrum: e_max must be positive");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("find_spectrum: tol must be positive");
  const int n = opt.grid_points > 0 ? opt.grid_points : default_grid_points(g, opt.e_max);
  if (n < 16) throw std::invalid_argument("find_spectrum: need at least 16 grid points");

  const SecularFunction secular(g);
  const auto s_of_k = [&](double k) { return secular.at_wavenumber(k); };
  const double k_max = std::sqrt(opt.e_max);
  const double dk = k_max / (n - 1);
  std::vector<double> ks(static_cast<std::size_t>(n));
  std::vector<double> ss(ks.size());
  for (int i = 0; i < n; ++i) {
    ks[static_cast<std::size_t>(i)] = i == n - 1 ? k_max : i * dk;
    ss[static_cast<std::size_t>(i)] = s_of_k(ks[static_cast<std::size_t>(i)]);
  }

  std::vector<SpectralLevel> found;
  auto add = [&](double k, unsigned flags) { found.push_back({k * k, flags}); };

  // E = 0: S(-E) ~ -c E is a simple zero in E although it is even in k.
  if (std::abs(ss[0]) <= 1e-8 * std::abs(ss[1])) add(0.0, simple_root);

  for (std::size_t i = 1; i < ks.size(); ++i) {
    const double a = ss[i - 1];
    const double b = ss[i];
    if (b == 0.0) {
      add(ks[i], simple_root);
      continue;
    }
    if (a != 0.0 && (a < 0.0) != (b < 0.0)) add(detail::bisect_wavenumber(s_of_k, ks[i - 1], ks[i], a, opt.tol), simple_root);
  }

  for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
    const double l = ss[i - 1], c = ss[i], r = ss[i + 1];
    if (c == 0.0 || (l < 0.0) != (c < 0.0) || (r < 0.0) != (c < 0.0)) continue;
    if (!(std::abs(c) < std::abs(l) && std::abs(c) <= std::abs(r))) continue;

    const double h = 1e-3 * dk;
    const auto slope = [&](double k) { return s_of_k(k + h) - s_of_k(k - h); };
    const double lo = ks[i - 1] + h;
    const double hi = ks[i + 1] - h;
    const double slo = slope(lo);
    if ((slo < 0.0) == (slope(hi) < 0.0)) continue;
    const double k_star = detail::bisect_wavenumber(slope, lo, hi, slo, opt.tol * 1e-2);
    const double s_star = s_of_k(k_star);
    if ((s_star < 0.0) != (c < 0.0) && s_star != 0.0) {
      add(detail::bisect_wavenumber(s_of_k, ks[i - 1], k_star, l, opt.tol), simple_root);
      add(detail::bisect_wavenumber(s_of_k, k_star, ks[i + 1], s_star, opt.tol), simple_root);
    } else if (std::abs(s_star) < 1e-8 * std::max(std::abs(l), std::abs(r))) {
      add(k_star, tangential_root);
    }
  }

  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.energy < y.energy; });
  SpectrumResult result;
  for (const auto& lvl : found) {
    if (!result.levels.empty() && lvl.energy - result.levels.back().energy <= opt.tol) {
      result.levels.back().flags |= lvl.flags;
      continue;
    }
    result.levels.push_back(lvl);
  }
  for (auto& lvl : result.levels) {
    const double k = std::sqrt(lvl.energy);
    if (detail::has_vanishing_prefactor(secular.graph(), lvl.energy) &&
        detail::vertex_determinant_regular(secular.graph(), k, 1e-4 * std::max(dk, 1e-3))) {
      lvl.flags |= prefactor_zero;
    }
  }
  return result;
}

}  // namespace graph_spectra
