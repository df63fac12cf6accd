#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "determinant.hpp"
#include "gluing.hpp"
#include "graph.hpp"

namespace graph_spectra {

/// Reflection phase of a plane wave sent from an infinite lead attached at a
/// vertex: cot(delta/2) = -sqrt(E) S^Dir(-E) / S(-E).
struct PhaseShift {
  double energy = 0.0;
  double delta = 0.0;     // in [0, 2 pi) unless unwrapped along a sweep
  double cot_half = 0.0;  // +-inf at a pole
  bool pole = false;      // S(-E) = 0: delta = 0 mod 2 pi
};

namespace detail {

inline PhaseShift phase_from_pair(double energy, const DetPair& p) {
  const double k = std::sqrt(energy);
  const double s = p.s.real();
  const double num = -k * p.s_dir.real();  // cot(delta/2) = num / s
  PhaseShift out;
  out.energy = energy;
  if (std::abs(s) <= 1e-14 * std::abs(num) || (s == 0.0 && num == 0.0)) {
    out.pole = true;
    out.cot_half = num >= 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    out.delta = 0.0;
    return out;
  }
  out.cot_half = num / s;
  // delta/2 in (0, pi): the angle whose cotangent is num/s with positive sine.
  const double sign = s < 0.0 ? -1.0 : 1.0;
  out.delta = 2.0 * std::atan2(sign * s, sign * num);
  return out;
}

}  // namespace detail

inline PhaseShift phase_shift(const MetricGraph& g, const std::string& attach_vertex, double energy) {
  if (!(energy > 0.0)) throw std::domain_error("phase_shift needs E > 0");
  if (!std::holds_alternative<Delta>(g.vertices[vertex_index(g, attach_vertex)].condition)) {
    throw GraphError("attachment vertex must carry a Delta condition");
  }
  return detail::phase_from_pair(energy, det_pair_bordered(g, attach_vertex, SpectralPoint::at_energy(energy)));
}

/// Adds multiples of 2 pi so that consecutive phases differ by less than pi.
inline void unwrap_phases(std::span<PhaseShift> sweep) {
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    const double prev = sweep[i - 1].delta;
    double d = sweep[i].delta;
    d += 2.0 * std::numbers::pi * std::round((prev - d) / (2.0 * std::numbers::pi));
    sweep[i].delta = d;
  }
}

inline std::vector<PhaseShift> phase_shift_sweep(const MetricGraph& g, const std::string& attach_vertex,
                                                 std::span<const double> energies) {
  std::vector<PhaseShift> out;
  out.reserve(energies.size());
  for (double e : energies) out.push_back(phase_shift(g, attach_vertex, e));
  unwrap_phases(out);
  return out;
}

struct Residual {
  double value = 0.0;
  bool pole = false;
};

/// cot(delta_1/2) + cot(delta_2/2); its zeros are the levels of the graph
/// obtained by identifying v1 and v2, except where S1(-E) or S2(-E) vanish.
inline Residual bohr_sommerfeld_residual(const MetricGraph& g1, const std::string& v1, const MetricGraph& g2,
                                         const std::string& v2, double energy) {
  const auto p1 = phase_shift(g1, v1, energy);
  const auto p2 = phase_shift(g2, v2, energy);
  if (p1.pole || p2.pole) return {std::numeric_limits<double>::infinity(), true};
  return {p1.cot_half + p2.cot_half, false};
}

/// Zeros of the Bohr-Sommerfeld residual in (0, e_max], found by sign changes
/// on a uniform k grid refined by bisection. Sign changes through poles are
/// discarded.
inline std::vector<double> residual_zeros(const MetricGraph& g1, const std::string& v1, const MetricGraph& g2,
                                          const std::string& v2, double e_max, int grid_points, double tol) {
  const double k_max = std::sqrt(e_max);
  auto f = [&](double k) { return bohr_sommerfeld_residual(g1, v1, g2, v2, k * k); };
  std::vector<double> zeros;
  Residual prev = f(k_max / grid_points);
  double k_prev = k_max / grid_points;
  for (int i = 2; i <= grid_points; ++i) {
    const double k = k_max * i / grid_points;
    const Residual cur = f(k);
    if (!prev.pole && !cur.pole && (prev.value < 0.0) != (cur.value < 0.0)) {
      double a = k_prev, b = k;
      double fa = prev.value;
      while (b * b - a * a > tol) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const Residual fm = f(m);
        if (fm.pole) break;
        if ((fm.value < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm.value;
        } else {
          b = m;
        }
      }
      const double k0 = 0.5 * (a + b);
      const Residual r = f(k0);
      if (!r.pole && std::abs(r.value) < 1e-6) zeros.push_back(k0 * k0);
    }
    prev = cur;
    k_prev = k;
  }
  return zeros;
}

}  // namespace graph_spectra
