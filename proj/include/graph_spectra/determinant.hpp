#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "det_value.hpp"
#include "graph.hpp"
#include "hill.hpp"

namespace graph_spectra {

/// Graph prepared for matrix assembly. Self-loops and all but one of a group
/// of parallel bonds are split at their midpoint by an auxiliary Delta(0)
/// (resp. DeltaPrime(0)) vertex, so that every bond joins two distinct
/// vertices and no pair of vertices shares more than one bond.
class AssemblyGraph {
 public:
  struct Vertex {
    std::string id;
    double coupling = 0.0;  // lambda or mu
    bool pinned = false;    // Dirichlet (delta) / Neumann (delta') mark
    bool auxiliary = false;
  };
  struct Bond {
    std::size_t from = 0;
    std::size_t to = 0;
    double length = 0.0;
    double flux = 0.0;
    PotentialSpec potential;
    double parent_length = 0.0;
    double window_begin = 0.0;
    std::size_t source = 0;  // index in MetricGraph::bonds

    [[nodiscard]] PotentialWindow window() const { return {&potential, parent_length, window_begin, length}; }
  };

  explicit AssemblyGraph(const MetricGraph& g) {
    require_valid(g);
    family_ = coupling_family(g);
    for (const auto& v : g.vertices) {
      Vertex av;
      av.id = v.id;
      std::visit(
          [&](const auto& c) {
            using C = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<C, Delta>) av.coupling = c.lambda;
            if constexpr (std::is_same_v<C, DeltaPrime>) av.coupling = c.mu;
            // A mark of the other family is the m = 1 alias with coupling 0.
            if constexpr (std::is_same_v<C, Dirichlet>) av.pinned = family_ == CouplingFamily::delta;
            if constexpr (std::is_same_v<C, Neumann>) av.pinned = family_ == CouplingFamily::delta_prime;
          },
          v.condition);
      vertices_.push_back(std::move(av));
    }
    original_vertices_ = vertices_.size();

    std::set<std::pair<std::size_t, std::size_t>> used;
    for (std::size_t k = 0; k < g.bonds.size(); ++k) {
      const auto& b = g.bonds[k];
      const auto f = vertex_index(g, b.from);
      const auto t = vertex_index(g, b.to);
      const auto key = std::minmax(f, t);
      Bond whole{f, t, b.length, b.flux, b.potential, b.length, 0.0, k};
      if (f != t && used.insert(key).second) {
        bonds_.push_back(std::move(whole));
        continue;
      }
      const std::size_t mid = vertices_.size();
      vertices_.push_back({b.from + "~" + b.to + "#" + std::to_string(k), 0.0, false, true});
      const double half = b.length / 2.0;
      bonds_.push_back({f, mid, half, b.flux, b.potential, b.length, 0.0, k});
      bonds_.push_back({mid, t, half, 0.0, b.potential, b.length, half, k});
    }
  }

  [[nodiscard]] CouplingFamily family() const { return family_; }
  [[nodiscard]] const std::vector<Vertex>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<Bond>& bonds() const { return bonds_; }
  [[nodiscard]] std::size_t original_vertex_count() const { return original_vertices_; }

  [[nodiscard]] std::size_t index_of(const std::string& id) const {
    for (std::size_t i = 0; i < original_vertices_; ++i) {
      if (vertices_[i].id == id) return i;
    }
    throw GraphError("unknown vertex id '" + id + "'");
  }

  /// Pinned mask: stored Dirichlet/Neumann marks united with `extra`.
  [[nodiscard]] std::vector<bool> pinned_mask(std::span<const std::string> extra) const {
    std::vector<bool> mask(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i) mask[i] = vertices_[i].pinned;
    for (const auto& id : extra) mask[index_of(id)] = true;
    return mask;
  }

  /// Coupling of an original vertex replaced (used by Dirichlet-limit checks).
  [[nodiscard]] AssemblyGraph with_coupling(const std::string& id, double coupling) const {
    AssemblyGraph copy = *this;
    copy.vertices_[index_of(id)].coupling = coupling;
    return copy;
  }

 private:
  CouplingFamily family_ = CouplingFamily::delta;
  std::vector<Vertex> vertices_;
  std::vector<Bond> bonds_;
  std::size_t original_vertices_ = 0;
};

/// Square vertex matrix (M or N) over the unpinned vertices, with the labels of
/// its rows and the product of the bond prefactors.
struct VertexMatrix {
  Eigen::MatrixXcd matrix;
  std::vector<std::string> labels;
  DetValue prefactor = DetValue::one();
};

/// Determinant by partial-pivot LU with the product accumulated in DetValue.
/// The 0x0 determinant is 1.
inline DetValue lu_determinant(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0) return DetValue::one();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const Eigen::MatrixXcd& packed = lu.matrixLU();
  DetValue det = DetValue::one();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) det *= DetValue{packed(i, i)};
  // Sign of the row permutation.
  const auto& perm = lu.permutationP().indices();
  std::vector<bool> visited(static_cast<std::size_t>(perm.size()), false);
  int sign = 1;
  for (Eigen::Index i = 0; i < perm.size(); ++i) {
    if (visited[static_cast<std::size_t>(i)]) continue;
    Eigen::Index j = i;
    int len = 0;
    while (!visited[static_cast<std::size_t>(j)]) {
      visited[static_cast<std::size_t>(j)] = true;
      j = perm(j);
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign > 0 ? det : -det;
}

/// Assembles M (delta family) or N (delta' family):
///   M_ab = delta_ab (lambda_a + sum c) - a_ab s_ab e^{-i theta_ab}
///   N_ab = delta_ab (mu_a + sum n)     + a_ab t_ab e^{-i theta_ab}
/// Pinned vertices are dropped from the index set.
inline VertexMatrix assemble_vertex_matrix(const AssemblyGraph& g, const SpectralPoint& point,
                                           std::span<const std::string> pinned_at = {},
                                           const HillOptions& options = {}) {
  const auto mask = g.pinned_mask(pinned_at);
  std::vector<Eigen::Index> slot(g.vertices().size(), -1);
  VertexMatrix out;
  for (std::size_t i = 0; i < g.vertices().size(); ++i) {
    if (mask[i]) continue;
    slot[i] = static_cast<Eigen::Index>(out.labels.size());
    out.labels.push_back(g.vertices()[i].id);
  }
  const auto n = static_cast<Eigen::Index>(out.labels.size());
  out.matrix = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t i = 0; i < g.vertices().size(); ++i) {
    if (slot[i] >= 0) out.matrix(slot[i], slot[i]) += g.vertices()[i].coupling;
  }

  const bool delta = g.family() == CouplingFamily::delta;
  for (const auto& b : g.bonds()) {
    const BondBlocks blk = blocks_from_solution(fundamental_solution(b.window(), point, options), g.family());
    const auto f = slot[b.from];
    const auto t = slot[b.to];
    const complex phase = std::polar(1.0, -b.flux);
    if (delta) {
      out.prefactor *= blk.dirichlet_factor;
      if (f >= 0) out.matrix(f, f) += blk.c_start;
      if (t >= 0) out.matrix(t, t) += blk.c_end;
      if (f >= 0 && t >= 0) {
        out.matrix(f, t) -= blk.s * phase;
        out.matrix(t, f) -= blk.s * std::conj(phase);
      }
    } else {
      out.prefactor *= blk.neumann_factor;
      if (f >= 0) out.matrix(f, f) += blk.n_start;
      if (t >= 0) out.matrix(t, t) += blk.n_end;
      if (f >= 0 && t >= 0) {
        out.matrix(f, t) += blk.t * phase;
        out.matrix(t, f) += blk.t * std::conj(phase);
      }
    }
  }
  return out;
}

inline VertexMatrix assemble_M(const MetricGraph& g, const SpectralPoint& point,
                               std::span<const std::string> dirichlet_at = {}) {
  const AssemblyGraph ag(g);
  if (ag.family() != CouplingFamily::delta) throw GraphError("assemble_M needs a delta-family graph");
  return assemble_vertex_matrix(ag, point, dirichlet_at);
}

inline VertexMatrix assemble_N(const MetricGraph& g, const SpectralPoint& point,
                               std::span<const std::string> neumann_at = {}) {
  const AssemblyGraph ag(g);
  if (ag.family() != CouplingFamily::delta_prime) throw GraphError("assemble_N needs a delta'-family graph");
  return assemble_vertex_matrix(ag, point, neumann_at);
}

/// S(gamma) = prod(bond prefactors) * det(vertex matrix with pinned rows and
/// columns removed). `pinned_at` adds Dirichlet marks for delta-family graphs
/// and Neumann marks for delta'-family graphs. Throws DegenerateBondError when
/// gamma is a bond eigenvalue.
inline DetValue spectral_determinant(const AssemblyGraph& g, const SpectralPoint& point,
                                     std::span<const std::string> pinned_at = {},
                                     const HillOptions& options = {}) {
  const VertexMatrix vm = assemble_vertex_matrix(g, point, pinned_at, options);
  return vm.prefactor * lu_determinant(vm.matrix);
}

inline DetValue spectral_determinant(const MetricGraph& g, const SpectralPoint& point,
                                     std::span<const std::string> pinned_at = {},
                                     const HillOptions& options = {}) {
  return spectral_determinant(AssemblyGraph(g), point, pinned_at, options);
}

inline DetValue spectral_determinant(const MetricGraph& g, complex gamma,
                                     std::span<const std::string> pinned_at = {}) {
  return spectral_determinant(g, SpectralPoint::from_gamma(gamma), pinned_at);
}

/// The same S(gamma) from a bordered system with one unknown per unpinned
/// vertex and one per bond (the derivative, resp. value, at the bond start).
/// Its matrix has no bond denominators, so the result stays accurate at and
/// near bond eigenvalues, where the vertex-matrix route is singular. Entries
/// are unscaled: intended for |Re sqrt(gamma)| l below ~700, which includes
/// the whole secular axis gamma <= 0 for bounded potentials.
inline Eigen::MatrixXcd bordered_matrix(const AssemblyGraph& g, const SpectralPoint& point,
                                        std::span<const std::string> pinned_at = {},
                                        const HillOptions& options = {}) {
  const auto mask = g.pinned_mask(pinned_at);
  std::vector<Eigen::Index> slot(g.vertices().size(), -1);
  Eigen::Index nv = 0;
  for (std::size_t i = 0; i < g.vertices().size(); ++i) {
    if (!mask[i]) slot[i] = nv++;
  }
  const auto nb = static_cast<Eigen::Index>(g.bonds().size());
  Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(nv + nb, nv + nb);
  for (std::size_t i = 0; i < g.vertices().size(); ++i) {
    if (slot[i] >= 0) big(slot[i], slot[i]) = g.vertices()[i].coupling;
  }

  const bool delta = g.family() == CouplingFamily::delta;
  for (Eigen::Index k = 0; k < nb; ++k) {
    const auto& b = g.bonds()[static_cast<std::size_t>(k)];
    const FundamentalSolution fs = fundamental_solution(b.window(), point, options);
    const complex u = detail::ldexp(fs.u, fs.scale);
    const complex du = detail::ldexp(fs.du, fs.scale);
    const complex w = detail::ldexp(fs.w, fs.scale);
    const complex dw = detail::ldexp(fs.dw, fs.scale);
    const auto f = slot[b.from];
    const auto t = slot[b.to];
    const complex fwd = std::polar(1.0, -b.flux);  // e^{-i theta}
    const complex back = std::conj(fwd);
    const Eigen::Index row = nv + k;
    if (delta) {
      // psi(x) = phi_f u(x) + C w(x);  psi(l) = e^{-i theta} phi_t
      big(row, row) = w;
      if (f >= 0) big(row, f) += u;
      if (t >= 0) big(row, t) -= fwd;
      // vertex rows: lambda phi - (sum of outgoing derivatives)
      if (f >= 0) big(f, row) -= 1.0;
      if (t >= 0) {
        big(t, row) += back * dw;
        if (f >= 0) big(t, f) += back * du;
      }
    } else {
      // psi(x) = D u(x) + phi'_f w(x);  -psi'(l) = e^{-i theta} phi'_t
      big(row, row) = du;
      if (f >= 0) big(row, f) += dw;
      if (t >= 0) big(row, t) += fwd;
      // vertex rows: mu phi' - (sum of boundary values)
      if (f >= 0) big(f, row) -= 1.0;
      if (t >= 0) {
        big(t, row) -= back * u;
        if (f >= 0) big(t, f) -= back * w;
      }
    }
  }
  return big;
}

inline DetValue bordered_determinant(const AssemblyGraph& g, const SpectralPoint& point,
                                     std::span<const std::string> pinned_at = {},
                                     const HillOptions& options = {}) {
  return lu_determinant(bordered_matrix(g, point, pinned_at, options));
}

/// Hadamard bound prod_i |row_i|, a magnitude scale for rounding in det(m).
inline DetValue hadamard_bound(const Eigen::MatrixXcd& m) {
  DetValue bound = DetValue::one();
  for (Eigen::Index i = 0; i < m.rows(); ++i) bound *= DetValue{m.row(i).norm()};
  return bound;
}

inline DetValue bordered_determinant(const MetricGraph& g, const SpectralPoint& point,
                                     std::span<const std::string> pinned_at = {}) {
  return bordered_determinant(AssemblyGraph(g), point, pinned_at);
}

struct DirichletLimit {
  DetValue scaled_large_coupling;  // S(lambda_big) / lambda_big
  DetValue minor;                  // S with the vertex pinned
};

/// Pair used to check S^Dir = lim S / lambda for lambda -> infinity at a Delta
/// vertex (or the delta' analogue with mu). lambda_big = 0 returns the plain S
/// as the first member.
inline DirichletLimit dirichlet_limit_check(const MetricGraph& g, const std::string& vertex,
                                            const SpectralPoint& point, double lambda_big) {
  const AssemblyGraph ag(g);
  const auto& cond = g.vertices[vertex_index(g, vertex)].condition;
  if (!std::holds_alternative<Delta>(cond) && !std::holds_alternative<DeltaPrime>(cond)) {
    throw GraphError("vertex '" + vertex + "' has no coupling parameter");
  }
  const std::string pinned[] = {vertex};
  DirichletLimit out;
  out.minor = spectral_determinant(ag, point, pinned);
  if (lambda_big == 0.0) {
    out.scaled_large_coupling = spectral_determinant(ag, point);
  } else {
    out.scaled_large_coupling = spectral_determinant(ag.with_coupling(vertex, lambda_big), point) / DetValue{lambda_big};
  }
  return out;
}

struct Rational {
  std::uint64_t num = 1;
  std::uint64_t den = 1;
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// 2^B / prod(m_a) over the assembly graph, the factor relating S to the
/// zeta-regularized determinant.
inline Rational zeta_prefactor(const MetricGraph& g) {
  const AssemblyGraph ag(g);
  const auto bonds = ag.bonds().size();
  if (bonds > 62) throw std::overflow_error("zeta prefactor: too many bonds for exact representation");
  std::vector<std::uint64_t> m(ag.vertices().size(), 0);
  for (const auto& b : ag.bonds()) {
    ++m[b.from];
    ++m[b.to];
  }
  Rational r{std::uint64_t{1} << bonds, 1};
  for (auto mi : m) {
    const auto g1 = std::gcd(r.num, mi);
    r.num /= g1;
    const auto rest = mi / g1;
    if (rest != 0 && r.den > UINT64_MAX / rest) throw std::overflow_error("zeta prefactor: denominator overflow");
    r.den *= rest;
  }
  return r;
}

inline DetValue zeta_regularized_determinant(const MetricGraph& g, const SpectralPoint& point) {
  const Rational r = zeta_prefactor(g);
  return spectral_determinant(g, point) * DetValue{static_cast<double>(r.num)} / DetValue{static_cast<double>(r.den)};
}

}  // namespace graph_spectra
