#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "det_value.hpp"
#include "determinant.hpp"
#include "graph.hpp"
#include "hill.hpp"

namespace graph_spectra {

/// S(gamma) of a graph together with the determinant for the same graph with
/// its attachment vertex pinned (Dirichlet for delta couplings, Neumann for
/// delta' couplings), both at the same gamma.
struct DetPair {
  DetValue s;
  DetValue s_dir;
};

/// Evaluates the pair directly from a graph.
inline DetPair det_pair(const MetricGraph& g, const std::string& vertex, const SpectralPoint& point,
                        const HillOptions& options = {}) {
  const AssemblyGraph ag(g);
  const std::string pinned[] = {vertex};
  return {spectral_determinant(ag, point, {}, options), spectral_determinant(ag, point, pinned, options)};
}

/// Same as det_pair through the bordered route (valid at bond eigenvalues).
inline DetPair det_pair_bordered(const MetricGraph& g, const std::string& vertex, const SpectralPoint& point) {
  const AssemblyGraph ag(g);
  const std::string pinned[] = {vertex};
  return {bordered_determinant(ag, point), bordered_determinant(ag, point, pinned)};
}

// Free wire of length b with V = 0 ----------------------------------------------

struct WireFunctions {
  DetValue cosh;          // cosh(sqrt(gamma) b)
  DetValue sinh_over_k;   // sinh(sqrt(gamma) b) / sqrt(gamma)
  DetValue k_sinh;        // sqrt(gamma) sinh(sqrt(gamma) b)
};

inline WireFunctions wire_functions(double b, const SpectralPoint& point) {
  const ZeroPotential zero;
  const PotentialSpec spec = zero;
  const auto f = fundamental_solution(PotentialWindow{&spec, b, 0.0, b}, point);
  return {DetValue::scaled(f.u, f.scale), DetValue::scaled(f.w, f.scale), DetValue::scaled(f.du, f.scale)};
}

/// Wire with both ends free (Neumann / Delta(0)), attached at one end:
/// (sqrt(gamma) sinh, cosh).
inline DetPair neumann_wire_pair(double b, const SpectralPoint& point) {
  const auto w = wire_functions(b, point);
  return {w.k_sinh, w.cosh};
}

/// Wire with its far end Dirichlet, attached at the free end:
/// (cosh, sinh / sqrt(gamma)).
inline DetPair dirichlet_wire_pair(double b, const SpectralPoint& point) {
  const auto w = wire_functions(b, point);
  return {w.cosh, w.sinh_over_k};
}

// Determinant-pair algebra ---------------------------------------------------------

/// Two graphs identified at their attachment vertices:
/// S = S1 S2^Dir + S1^Dir S2, and S^Dir = S1^Dir S2^Dir at the junction.
inline DetPair glue_at_vertex(const DetPair& p1, const DetPair& p2) {
  return {p1.s * p2.s_dir + p1.s_dir * p2.s, p1.s_dir * p2.s_dir};
}

/// Attaches a free wire of length b at the attachment vertex of p1; the
/// result's attachment vertex is the far end of the wire.
inline DetPair attach_wire(const DetPair& p1, double b, const SpectralPoint& point) {
  return {glue_at_vertex(p1, neumann_wire_pair(b, point)).s, glue_at_vertex(p1, dirichlet_wire_pair(b, point)).s};
}

/// Two graphs joined through a bond of length l (zero potential):
///   sqrt(g) S = cosh(sqrt(g) l) [S1 sqrt(g) S2^Dir + sqrt(g) S1^Dir S2]
///             + sinh(sqrt(g) l) [S1 S2 + g S1^Dir S2^Dir].
/// The returned s_dir pins the endpoint of the bond on the second graph.
inline DetPair glue_with_bond(const DetPair& p1, const DetPair& p2, double l, const SpectralPoint& point) {
  if (!(l > 0.0)) throw std::invalid_argument("glue_with_bond: bond length must be positive");
  const auto w = wire_functions(l, point);
  const DetValue s = w.cosh * (p1.s * p2.s_dir + p1.s_dir * p2.s) + w.sinh_over_k * (p1.s * p2.s) +
                     w.k_sinh * (p1.s_dir * p2.s_dir);
  return {s, attach_wire(p1, l, point).s_dir * p2.s_dir};
}

namespace detail {

template <typename Pairs>
DetPair star_sum(const Pairs& pairs) {
  const std::size_t n = pairs.size();
  if (n < 2) throw std::invalid_argument("star gluing needs at least two graphs");
  // prefix[k] = prod_{j<k} S_j^Dir, suffix[k] = prod_{j>=k} S_j^Dir
  std::vector<DetValue> prefix(n + 1, DetValue::one());
  std::vector<DetValue> suffix(n + 1, DetValue::one());
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * pairs[k].s_dir;
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] * pairs[k].s_dir;
  DetValue s;
  for (std::size_t k = 0; k < n; ++k) s += prefix[k] * pairs[k].s * suffix[k + 1];
  return {s, prefix[n]};
}

}  // namespace detail

/// n graphs identified at one vertex:
/// S = sum_k S_1^Dir ... S_{k-1}^Dir S_k S_{k+1}^Dir ... S_n^Dir.
inline DetPair glue_star(std::span<const DetPair> pairs) { return detail::star_sum(pairs); }

/// delta' analogue of glue_star; s_dir holds the Neumann-pinned determinants.
inline DetPair glue_star_neumann(std::span<const DetPair> pairs) { return detail::star_sum(pairs); }

/// Cayley tree of coordination z and depth n with branches of length b, rooted
/// at an end vertex, built by the attach-and-extend recurrence from the
/// depth-1 tree (a single free wire).
inline DetPair cayley_tree(int z, int depth, double b, const SpectralPoint& point) {
  if (z < 2 || depth < 1 || !(b > 0.0)) throw std::invalid_argument("cayley_tree: need z >= 2, depth >= 1, b > 0");
  const auto w = wire_functions(b, point);
  DetPair p{w.k_sinh, w.cosh};
  const DetValue branches{static_cast<double>(z - 1)};
  for (int level = 1; level < depth; ++level) {
    const DetValue rest = p.s_dir.pow(static_cast<unsigned>(z - 2));
    const DetValue s = (branches * p.s * w.cosh + p.s_dir * w.k_sinh) * rest;
    const DetValue s_dir = (branches * p.s * w.sinh_over_k + p.s_dir * w.cosh) * rest;
    p = {s, s_dir};
  }
  return p;
}

// Graph surgery -------------------------------------------------------------------

namespace detail {

inline std::string second_id(const std::string& id) { return "g2/" + id; }

inline VertexCondition sum_conditions(const VertexCondition& a, const VertexCondition& b) {
  if (const auto* x = std::get_if<Delta>(&a)) {
    if (const auto* y = std::get_if<Delta>(&b)) return Delta{x->lambda + y->lambda};
  }
  if (const auto* x = std::get_if<DeltaPrime>(&a)) {
    if (const auto* y = std::get_if<DeltaPrime>(&b)) return DeltaPrime{x->mu + y->mu};
  }
  throw GraphError("merge needs two Delta or two DeltaPrime attachment vertices");
}

inline void append_second(MetricGraph& out, const MetricGraph& g2, const std::string& skip,
                          const std::string& replacement) {
  for (const auto& v : g2.vertices) {
    if (v.id != skip) out.vertices.push_back({second_id(v.id), v.condition});
  }
  for (const auto& b : g2.bonds) {
    BondData nb = b;
    nb.from = b.from == skip ? replacement : second_id(b.from);
    nb.to = b.to == skip ? replacement : second_id(b.to);
    out.bonds.push_back(std::move(nb));
  }
}

}  // namespace detail

/// Copy of g with every vertex id prefixed.
inline MetricGraph prefix_vertices(const MetricGraph& g, const std::string& prefix) {
  MetricGraph out = g;
  for (auto& v : out.vertices) v.id = prefix + v.id;
  for (auto& b : out.bonds) {
    b.from = prefix + b.from;
    b.to = prefix + b.to;
  }
  return out;
}

/// Disjoint union of g1 and g2 with v1 and v2 identified. The merged vertex
/// keeps v1's id and carries lambda1 + lambda2 (resp. mu1 + mu2); the other
/// vertices of g2 are renamed "g2/<id>".
inline MetricGraph merge_graphs(const MetricGraph& g1, const std::string& v1, const MetricGraph& g2,
                                const std::string& v2) {
  const auto i1 = vertex_index(g1, v1);
  const auto i2 = vertex_index(g2, v2);
  MetricGraph out = g1;
  out.vertices[i1].condition = detail::sum_conditions(g1.vertices[i1].condition, g2.vertices[i2].condition);
  detail::append_second(out, g2, v2, v1);
  return out;
}

/// Disjoint union of g1 and g2 plus a zero-potential bond v1 -> g2/v2 of the
/// given length and flux.
inline MetricGraph connect_graphs(const MetricGraph& g1, const std::string& v1, const MetricGraph& g2,
                                  const std::string& v2, double length, double flux = 0.0) {
  vertex_index(g1, v1);
  vertex_index(g2, v2);
  MetricGraph out = g1;
  detail::append_second(out, g2, "", "");
  out.bonds.push_back({v1, detail::second_id(v2), length, flux, ZeroPotential{}});
  return out;
}

// Standard graphs -------------------------------------------------------------------

inline MetricGraph wire_graph(double b, VertexCondition start = Delta{}, VertexCondition end = Delta{}) {
  return {{{"a", start}, {"b", end}}, {{"a", "b", b, 0.0, ZeroPotential{}}}};
}

/// Ring of perimeter L pierced by flux theta: one Delta(0) vertex with a self-loop.
inline MetricGraph ring_graph(double perimeter, double theta) {
  return {{{"o", Delta{}}}, {{"o", "o", perimeter, theta, ZeroPotential{}}}};
}

/// Ring (vertex "o") with a dangling wire o -> "w" of length b.
inline MetricGraph ring_with_wire(double perimeter, double theta, double b) {
  return {{{"o", Delta{}}, {"w", Delta{}}},
          {{"o", "o", perimeter, theta, ZeroPotential{}}, {"o", "w", b, 0.0, ZeroPotential{}}}};
}

/// Star of n wires of length b from centre "c" to leaves "l0".."l{n-1}".
inline MetricGraph star_graph(int n, double b, VertexCondition centre = Delta{}, VertexCondition leaf = Delta{}) {
  MetricGraph g;
  g.vertices.push_back({"c", centre});
  for (int i = 0; i < n; ++i) {
    const std::string id = "l" + std::to_string(i);
    g.vertices.push_back({id, leaf});
    g.bonds.push_back({"c", id, b, 0.0, ZeroPotential{}});
  }
  return g;
}

/// Explicit Cayley tree of coordination z and depth n with all Delta(0)
/// vertices; the root end vertex is "r".
inline MetricGraph cayley_graph(int z, int depth, double b) {
  if (z < 2 || depth < 1) throw std::invalid_argument("cayley_graph: need z >= 2, depth >= 1");
  MetricGraph g;
  int counter = 0;
  // Builds a depth-d subtree hanging below `root` (an already created vertex).
  auto grow = [&](auto&& self, const std::string& root, int d) -> void {
    const std::string next = "v" + std::to_string(counter++);
    g.vertices.push_back({next, Delta{}});
    g.bonds.push_back({root, next, b, 0.0, ZeroPotential{}});
    if (d == 1) return;
    for (int i = 0; i < z - 1; ++i) self(self, next, d - 1);
  };
  g.vertices.push_back({"r", Delta{}});
  grow(grow, "r", depth);
  return g;
}

}  // namespace graph_spectra
