#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "determinant.hpp"
#include "graph.hpp"

namespace graph_spectra {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lumped-mass finite-difference discretization of -d^2/dx^2 + V on a
/// delta-family graph: the generalized problem K x = E D x with Hermitian K and
/// diagonal positive D. Vertex values are shared by all incident bonds, the
/// vertex row encodes sum (phi_0 - phi_1)/h + lambda phi_0 = E (sum h/2) phi_0,
/// Dirichlet vertices are removed, and the flux enters as a Peierls phase
/// theta/N on each grid link.
class FiniteDifferenceOperator {
 public:
  using Sparse = Eigen::SparseMatrix<complex>;

  FiniteDifferenceOperator(const MetricGraph& g, int points_per_bond) {
    if (points_per_bond < 50) throw std::invalid_argument("oracle needs at least 50 points per bond");
    require_valid(g);
    if (coupling_family(g) != CouplingFamily::delta) throw GraphError("oracle supports delta-family graphs only");

    std::vector<Eigen::Index> vslot(g.vertices.size(), -1);
    Eigen::Index n = 0;
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
      if (!std::holds_alternative<Dirichlet>(g.vertices[i].condition)) vslot[i] = n++;
    }
    std::vector<Eigen::Triplet<complex>> entries;
    std::vector<double> mass(static_cast<std::size_t>(n), 0.0);
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);

    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
      if (const auto* d = std::get_if<Delta>(&g.vertices[i].condition)) diag[static_cast<std::size_t>(vslot[i])] += d->lambda;
    }

    for (const auto& b : g.bonds) {
      const int cells = points_per_bond;
      const double h = b.length / cells;
      const complex hop = std::polar(1.0, b.flux / cells);
      const PotentialWindow pot = PotentialWindow::whole(b);
      // node j of this bond: 0 -> from vertex, cells -> to vertex, else interior
      const Eigen::Index first = n;
      n += cells - 1;
      mass.resize(static_cast<std::size_t>(n), 0.0);
      diag.resize(static_cast<std::size_t>(n), 0.0);
      auto node = [&](int j) -> Eigen::Index {
        if (j == 0) return vslot[vertex_index(g, b.from)];
        if (j == cells) return vslot[vertex_index(g, b.to)];
        return first + j - 1;
      };
      for (int j = 0; j <= cells; ++j) {
        const auto id = node(j);
        if (id < 0) continue;
        const double m = (j == 0 || j == cells) ? h / 2 : h;
        mass[static_cast<std::size_t>(id)] += m;
        diag[static_cast<std::size_t>(id)] += m * pot.at(j * h);
      }
      for (int j = 0; j < cells; ++j) {
        const auto p = node(j);
        const auto q = node(j + 1);
        if (p >= 0) diag[static_cast<std::size_t>(p)] += 1.0 / h;
        if (q >= 0) diag[static_cast<std::size_t>(q)] += 1.0 / h;
        if (p >= 0 && q >= 0) {
          entries.emplace_back(p, q, -std::conj(hop) / h);
          entries.emplace_back(q, p, -hop / h);
        }
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) entries.emplace_back(i, i, diag[static_cast<std::size_t>(i)]);
    stiffness_.resize(n, n);
    stiffness_.setFromTriplets(entries.begin(), entries.end());
    mass_ = Eigen::Map<const Eigen::VectorXd>(mass.data(), n);
  }

  [[nodiscard]] Eigen::Index size() const { return stiffness_.rows(); }
  [[nodiscard]] const Sparse& stiffness() const { return stiffness_; }
  [[nodiscard]] const Eigen::VectorXd& mass() const { return mass_; }

  /// Number of eigenvalues below sigma, from the inertia of K - sigma D
  /// (Sylvester's law on a sparse LDL^H factorization).
  [[nodiscard]] Eigen::Index count_below(double sigma) const {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Sparse shifted = stiffness_;
      for (Eigen::Index i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) -= sigma * mass_(i);
      Eigen::SimplicialLDLT<Sparse, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(shifted);
      if (ldlt.info() == Eigen::Success) {
        const auto d = ldlt.vectorD();
        Eigen::Index negative = 0;
        for (Eigen::Index i = 0; i < d.size(); ++i) negative += d(i).real() < 0.0 ? 1 : 0;
        return negative;
      }
      sigma += 1e-9 * std::max(1.0, std::abs(sigma));
    }
    throw OracleError("LDL^H factorization failed near sigma = " + std::to_string(sigma));
  }

  /// Lowest `count` eigenvalues (with multiplicity) by bisection on the
  /// eigenvalue counting function, to rel_tol * max(1, |E|).
  [[nodiscard]] std::vector<double> lowest(int count, double rel_tol = 1e-12) const {
    if (count <= 0) return {};
    if (count > size()) throw OracleError("requested more eigenvalues than the discretization has");
    // Gershgorin bounds for D^{-1} K
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index i = 0; i < size(); ++i) {
      double centre = 0.0, radius = 0.0;
      for (Sparse::InnerIterator it(stiffness_, i); it; ++it) {
        if (it.row() == i) centre = it.value().real();
        else radius += std::abs(it.value());
      }
      lo = std::min(lo, (centre - radius) / mass_(i));
      hi = std::max(hi, (centre + radius) / mass_(i));
    }
    lo -= 1.0;
    hi += 1.0;

    std::vector<double> values;
    for (int idx = 0; idx < count; ++idx) {
      double a = values.empty() ? lo : values.back();
      // A degenerate previous value may be shared with this one.
      if (count_below(a) > idx) a = lo;
      double b = std::max(1.0, 2.0 * std::abs(a));
      while (count_below(b) <= idx && b < hi) b = std::min(hi, 2.0 * b);
      for (int it = 0; it < 200 && b - a > rel_tol * std::max({1.0, std::abs(a), std::abs(b)}); ++it) {
        const double m = 0.5 * (a + b);
        if (count_below(m) > idx) b = m;
        else a = m;
      }
      values.push_back(0.5 * (a + b));
    }
    return values;
  }

 private:
  Sparse stiffness_;
  Eigen::VectorXd mass_;
};

/// Lowest `count` eigenvalues of the finite-difference discretization with
/// `points_per_bond` cells per bond; error O(h^2).
inline std::vector<double> oracle_spectrum(const MetricGraph& g, int points_per_bond, int count) {
  return FiniteDifferenceOperator(g, points_per_bond).lowest(count);
}

}  // namespace graph_spectra
