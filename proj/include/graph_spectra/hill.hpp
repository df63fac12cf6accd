#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "det_value.hpp"
#include "graph.hpp"

namespace graph_spectra {

/// Spectral parameter together with the square-root branch used for it.
struct SpectralPoint {
  complex gamma{};
  complex sqrt_gamma{};

  static SpectralPoint from_gamma(complex g) { return {g, std::sqrt(g)}; }
  static SpectralPoint from_root(complex root) { return {root * root, root}; }
  /// gamma = -E with sqrt(gamma) = i sqrt(E), the secular-equation axis.
  static SpectralPoint at_energy(double energy) {
    return {complex{-energy, 0.0}, complex{0.0, std::sqrt(energy)}};
  }
  [[nodiscard]] SpectralPoint other_branch() const { return {gamma, -sqrt_gamma}; }
};

/// gamma hits an eigenvalue of an isolated bond with Dirichlet (resp. Neumann)
/// ends, where the vertex-matrix entries are singular.
class DegenerateBondError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HillOptions {
  /// Fixed RK4 step count for sampled potentials; 0 selects the default rule.
  int steps = 0;
};

/// Restriction of a bond potential to [begin, begin + length] of a parent bond
/// of length parent_length. Whole bonds use begin = 0, length = parent_length.
struct PotentialWindow {
  const PotentialSpec* spec = nullptr;
  double parent_length = 1.0;
  double begin = 0.0;
  double length = 1.0;

  static PotentialWindow whole(const BondData& b) { return {&b.potential, b.length, 0.0, b.length}; }

  [[nodiscard]] double at(double x) const {
    return std::visit(
        [&](const auto& p) -> double {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, ZeroPotential>) {
            return 0.0;
          } else if constexpr (std::is_same_v<P, ConstantPotential>) {
            return p.v0;
          } else {
            const auto n = p.values.size();
            const double spacing = parent_length / static_cast<double>(n - 1);
            const double pos = std::clamp((begin + x) / spacing, 0.0, static_cast<double>(n - 1));
            const auto i = std::min(static_cast<std::size_t>(pos), n - 2);
            const double t = pos - static_cast<double>(i);
            return (1.0 - t) * p.values[i] + t * p.values[i + 1];
          }
        },
        *spec);
  }

  [[nodiscard]] double minimum() const {
    if (const auto* s = std::get_if<SampledPotential>(spec)) return *std::min_element(s->values.begin(), s->values.end());
    if (const auto* c = std::get_if<ConstantPotential>(spec)) return c->v0;
    return 0.0;
  }
};

/// Values at x = l of the two initial-value solutions of
/// [gamma - d^2/dx^2 + V] y = 0 with u(0)=1, u'(0)=0 and w(0)=0, w'(0)=1.
/// Stored values are scaled: true value = stored * 2^scale.
struct FundamentalSolution {
  complex u{}, du{}, w{}, dw{};
  std::int64_t scale = 0;
  double length = 0.0;
  /// |sqrt(gamma - min V)|, the local oscillation / growth rate.
  double rate = 0.0;

  /// u w' - u' w, which is identically 1.
  [[nodiscard]] DetValue wronskian() const {
    return DetValue::scaled(u * dw - du * w, 2 * scale);
  }
};

namespace detail {

inline FundamentalSolution closed_form_solution(complex k, double l) {
  FundamentalSolution f;
  f.length = l;
  f.rate = std::abs(k);
  if (k.real() < 0.0) k = -k;  // every returned quantity is even in k
  const complex z = k * l;
  if (std::abs(z) < 1e-4) {
    const complex z2 = z * z;
    f.u = 1.0 + z2 / 2.0;
    f.w = l * (1.0 + z2 / 6.0);
    f.du = k * k * l * (1.0 + z2 / 6.0);
    f.dw = f.u;
  } else if (z.real() < 350.0) {
    f.u = std::cosh(z);
    f.dw = f.u;
    const complex sh = std::sinh(z);
    f.w = sh / k;
    f.du = k * sh;
  } else {
    const auto e = static_cast<std::int64_t>(std::floor(z.real() / std::numbers::ln2));
    const complex half = std::exp(z - complex{static_cast<double>(e) * std::numbers::ln2, 0.0}) / 2.0;
    const complex decay = std::exp(-2.0 * z);
    f.u = half * (1.0 + decay);
    f.dw = f.u;
    const complex sh = half * (1.0 - decay);
    f.w = sh / k;
    f.du = k * sh;
    f.scale = e;
  }
  return f;
}

inline int default_steps(double length, double rate) {
  return std::max(256, static_cast<int>(std::ceil(128.0 * length * std::max(1.0, rate))));
}

inline FundamentalSolution integrate_solution(const PotentialWindow& window, complex gamma, int steps) {
  FundamentalSolution f;
  f.length = window.length;
  f.rate = std::abs(std::sqrt(gamma - window.minimum()));
  if (steps <= 0) steps = default_steps(window.length, f.rate);
  const double h = window.length / steps;

  // y = (u, u', w, w'); y' = (u', (gamma+V)u, w', (gamma+V)w)
  using State = std::array<complex, 4>;
  auto rhs = [&](double x, const State& y) {
    const complex q = gamma + window.at(x);
    return State{y[1], q * y[0], y[3], q * y[2]};
  };
  auto axpy = [](const State& y, double a, const State& k) {
    return State{y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]};
  };

  State y{1.0, 0.0, 0.0, 1.0};
  for (int i = 0; i < steps; ++i) {
    const double x = i * h;
    const State k1 = rhs(x, y);
    const State k2 = rhs(x + h / 2, axpy(y, h / 2, k1));
    const State k3 = rhs(x + h / 2, axpy(y, h / 2, k2));
    const State k4 = rhs(x + h, axpy(y, h, k3));
    for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

    double big = 0.0;
    for (const auto& c : y) big = std::max(big, std::abs(c));
    if (big > 0x1p200) {
      for (auto& c : y) c = {std::ldexp(c.real(), -200), std::ldexp(c.imag(), -200)};
      f.scale += 200;
    }
  }
  f.u = y[0];
  f.du = y[1];
  f.w = y[2];
  f.dw = y[3];
  return f;
}

inline complex ldexp(complex c, std::int64_t e) {
  const int s = static_cast<int>(std::clamp<std::int64_t>(e, -4000, 4000));
  return {std::ldexp(c.real(), s), std::ldexp(c.imag(), s)};
}

}  // namespace detail

/// Fundamental solution over a potential window. Zero and Constant potentials
/// use closed forms (Constant(v0) at gamma is Zero at gamma + v0); Sampled
/// potentials are integrated with fixed-step RK4.
inline FundamentalSolution fundamental_solution(const PotentialWindow& window, const SpectralPoint& point,
                                                const HillOptions& options = {}) {
  return std::visit(
      [&](const auto& p) -> FundamentalSolution {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ZeroPotential>) {
          return detail::closed_form_solution(point.sqrt_gamma, window.length);
        } else if constexpr (std::is_same_v<P, ConstantPotential>) {
          return detail::closed_form_solution(std::sqrt(point.gamma + p.v0), window.length);
        } else {
          return detail::integrate_solution(window, point.gamma, options.steps);
        }
      },
      *window.spec);
}

/// Per-bond quantities entering the vertex matrices, stored with the sign
/// that makes them positive for V = 0 and gamma > 0:
///   delta family:  c_start = -f_ab'(0), c_end = -f_ba'(0), s = -f_ab'(l),
///                  dirichlet_factor = -1 / f_ab'(l)
///   delta' family: n_start = -g_ab(0), n_end = -g_ba(0), t = -g_ab(l),
///                  neumann_factor = -1 / g_ab(l)
/// where f(0)=1, f(l)=0 and g'(0)=1, g'(l)=0. Only the fields of the requested
/// family are filled.
struct BondBlocks {
  CouplingFamily family = CouplingFamily::delta;
  complex c_start{}, c_end{}, s{};
  DetValue dirichlet_factor;
  complex n_start{}, n_end{}, t{};
  DetValue neumann_factor;
};

inline BondBlocks blocks_from_solution(const FundamentalSolution& f, CouplingFamily family) {
  constexpr double threshold = 1e-12;
  const double l = f.length;
  BondBlocks b;
  b.family = family;
  if (family == CouplingFamily::delta) {
    const double scale = l / std::max(1.0, f.rate * l);
    if (DetValue::scaled(f.w, f.scale).log2_abs() < std::log2(threshold * scale)) {
      throw DegenerateBondError("gamma is a Dirichlet eigenvalue of a bond (length " + std::to_string(l) + ")");
    }
    b.c_start = f.u / f.w;
    b.c_end = f.dw / f.w;
    b.s = detail::ldexp(1.0 / f.w, -f.scale);
    b.dirichlet_factor = DetValue::scaled(f.w, f.scale);
  } else {
    const double scale = std::max(1.0, f.rate * l) / l;
    if (DetValue::scaled(f.du, f.scale).log2_abs() < std::log2(threshold * scale)) {
      throw DegenerateBondError("gamma is a Neumann eigenvalue of a bond (length " + std::to_string(l) + ")");
    }
    b.n_start = f.dw / f.du;
    b.n_end = f.u / f.du;
    b.t = detail::ldexp(1.0 / f.du, -f.scale);
    b.neumann_factor = DetValue::scaled(f.du, f.scale);
  }
  return b;
}

inline BondBlocks solve_bond_blocks(const BondData& bond, const SpectralPoint& point, CouplingFamily family,
                                    const HillOptions& options = {}) {
  return blocks_from_solution(fundamental_solution(PotentialWindow::whole(bond), point, options), family);
}

}  // namespace graph_spectra
