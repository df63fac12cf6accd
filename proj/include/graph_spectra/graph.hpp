#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <variant>
#include <vector>

namespace graph_spectra {

// Vertex coupling conditions ------------------------------------------------

/// Continuous function, sum of outgoing derivatives = lambda * value.
struct Delta {
  double lambda = 0.0;
  friend bool operator==(const Delta&, const Delta&) = default;
};
/// Continuous derivative, sum of boundary values = mu * derivative.
struct DeltaPrime {
  double mu = 0.0;
  friend bool operator==(const DeltaPrime&, const DeltaPrime&) = default;
};
struct Dirichlet {
  friend bool operator==(const Dirichlet&, const Dirichlet&) = default;
};
struct Neumann {
  friend bool operator==(const Neumann&, const Neumann&) = default;
};

using VertexCondition = std::variant<Delta, DeltaPrime, Dirichlet, Neumann>;

// Bond potentials -----------------------------------------------------------

struct ZeroPotential {
  friend bool operator==(const ZeroPotential&, const ZeroPotential&) = default;
};
struct ConstantPotential {
  double v0 = 0.0;
  friend bool operator==(const ConstantPotential&, const ConstantPotential&) = default;
};
/// Values on a uniform grid over [0, l], interpolated linearly.
struct SampledPotential {
  std::vector<double> values;
  friend bool operator==(const SampledPotential&, const SampledPotential&) = default;
};

using PotentialSpec = std::variant<ZeroPotential, ConstantPotential, SampledPotential>;

// Graph ---------------------------------------------------------------------

struct VertexRecord {
  std::string id;
  VertexCondition condition = Delta{};
  friend bool operator==(const VertexRecord&, const VertexRecord&) = default;
};

/// A bond oriented from -> to. The flux is the circulation of the vector
/// potential along that orientation; the reverse arc carries -flux.
struct BondData {
  std::string from;
  std::string to;
  double length = 1.0;
  double flux = 0.0;
  PotentialSpec potential = ZeroPotential{};

  [[nodiscard]] bool is_loop() const { return from == to; }
  friend bool operator==(const BondData&, const BondData&) = default;
};

struct MetricGraph {
  std::vector<VertexRecord> vertices;
  std::vector<BondData> bonds;
  friend bool operator==(const MetricGraph&, const MetricGraph&) = default;
};

enum class CouplingFamily { delta, delta_prime };

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Queries ---------------------------------------------------------------------

inline std::optional<std::size_t> find_vertex(const MetricGraph& g, const std::string& id) {
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    if (g.vertices[i].id == id) return i;
  }
  return std::nullopt;
}

inline std::size_t vertex_index(const MetricGraph& g, const std::string& id) {
  if (auto i = find_vertex(g, id)) return *i;
  throw GraphError("unknown vertex id '" + id + "'");
}

/// Number of bond endpoints at each vertex; a self-loop counts twice.
/// Endpoints referencing unknown ids are ignored.
inline std::vector<int> coordination_numbers(const MetricGraph& g) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.vertices.size(); ++i) index.emplace(g.vertices[i].id, i);
  std::vector<int> m(g.vertices.size(), 0);
  for (const auto& b : g.bonds) {
    if (auto it = index.find(b.from); it != index.end()) ++m[it->second];
    if (auto it = index.find(b.to); it != index.end()) ++m[it->second];
  }
  return m;
}

inline bool is_delta_family(const VertexCondition& c) {
  return std::holds_alternative<Delta>(c) || std::holds_alternative<Dirichlet>(c);
}

/// Family of the graph: decided by the first Delta/DeltaPrime vertex, else by
/// the boundary marks (any Dirichlet -> delta, only Neumann -> delta_prime).
inline CouplingFamily coupling_family(const MetricGraph& g) {
  for (const auto& v : g.vertices) {
    if (std::holds_alternative<Delta>(v.condition)) return CouplingFamily::delta;
    if (std::holds_alternative<DeltaPrime>(v.condition)) return CouplingFamily::delta_prime;
  }
  for (const auto& v : g.vertices) {
    if (std::holds_alternative<Dirichlet>(v.condition)) return CouplingFamily::delta;
  }
  return g.vertices.empty() ? CouplingFamily::delta : CouplingFamily::delta_prime;
}

// Validation ----------------------------------------------------------------

enum class ViolationKind {
  empty_graph,
  duplicate_id,
  dangling_endpoint,
  nonpositive_length,
  nonfinite_value,
  bad_potential,
  isolated_vertex,
  disconnected,
  mixed_families,
};

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] bool has(ViolationKind k) const {
    for (const auto& v : violations) {
      if (v.kind == k) return true;
    }
    return false;
  }
  [[nodiscard]] std::string summary() const {
    std::string s;
    for (const auto& v : violations) {
      if (!s.empty()) s += "; ";
      s += v.message;
    }
    return s;
  }
};

inline ValidationReport validate(const MetricGraph& g) {
  ValidationReport report;
  auto add = [&](ViolationKind k, std::string msg) { report.violations.push_back({k, std::move(msg)}); };

  if (g.vertices.empty()) {
    add(ViolationKind::empty_graph, "graph has no vertices");
    return report;
  }

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    const auto& v = g.vertices[i];
    if (!index.emplace(v.id, i).second) add(ViolationKind::duplicate_id, "duplicate vertex id '" + v.id + "'");
    std::visit(
        [&](const auto& c) {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, Delta>) {
            if (!std::isfinite(c.lambda)) add(ViolationKind::nonfinite_value, "vertex '" + v.id + "': lambda not finite");
          } else if constexpr (std::is_same_v<C, DeltaPrime>) {
            if (!std::isfinite(c.mu)) add(ViolationKind::nonfinite_value, "vertex '" + v.id + "': mu not finite");
          }
        },
        v.condition);
  }

  for (std::size_t k = 0; k < g.bonds.size(); ++k) {
    const auto& b = g.bonds[k];
    const std::string name = "bond " + std::to_string(k) + " (" + b.from + "->" + b.to + ")";
    if (!index.contains(b.from) || !index.contains(b.to)) {
      add(ViolationKind::dangling_endpoint, name + ": dangling endpoint");
    }
    if (!std::isfinite(b.length)) {
      add(ViolationKind::nonfinite_value, name + ": length not finite");
    } else if (b.length <= 0.0) {
      add(ViolationKind::nonpositive_length, name + ": nonpositive length");
    }
    if (!std::isfinite(b.flux)) add(ViolationKind::nonfinite_value, name + ": flux not finite");
    if (const auto* c = std::get_if<ConstantPotential>(&b.potential); c && !std::isfinite(c->v0)) {
      add(ViolationKind::nonfinite_value, name + ": potential not finite");
    }
    if (const auto* s = std::get_if<SampledPotential>(&b.potential)) {
      if (s->values.size() < 2) add(ViolationKind::bad_potential, name + ": sampled potential needs >= 2 points");
      for (double x : s->values) {
        if (!std::isfinite(x)) {
          add(ViolationKind::nonfinite_value, name + ": potential sample not finite");
          break;
        }
      }
    }
  }

  const auto m = coordination_numbers(g);
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    if (m[i] == 0) add(ViolationKind::isolated_vertex, "vertex '" + g.vertices[i].id + "' has no bonds");
  }

  // Connectivity over resolvable bonds.
  std::vector<std::vector<std::size_t>> adj(g.vertices.size());
  for (const auto& b : g.bonds) {
    auto f = index.find(b.from);
    auto t = index.find(b.to);
    if (f == index.end() || t == index.end()) continue;
    adj[f->second].push_back(t->second);
    adj[t->second].push_back(f->second);
  }
  std::vector<bool> seen(g.vertices.size(), false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (auto w : adj[u]) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        q.push(w);
      }
    }
  }
  if (reached != g.vertices.size()) add(ViolationKind::disconnected, "graph is disconnected");

  // A boundary mark of the other family is only meaningful at m = 1, where
  // Neumann == Delta(0) and Dirichlet == DeltaPrime(0).
  const auto family = coupling_family(g);
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    const auto& c = g.vertices[i].condition;
    bool bad = false;
    if (family == CouplingFamily::delta) {
      bad = std::holds_alternative<DeltaPrime>(c) || (std::holds_alternative<Neumann>(c) && m[i] != 1);
    } else {
      bad = std::holds_alternative<Delta>(c) || (std::holds_alternative<Dirichlet>(c) && m[i] != 1);
    }
    if (bad) add(ViolationKind::mixed_families, "vertex '" + g.vertices[i].id + "': condition mixes coupling families");
  }
  return report;
}

inline void require_valid(const MetricGraph& g) {
  const auto report = validate(g);
  if (!report.ok()) throw GraphError("invalid graph: " + report.summary());
}

// Gauge -----------------------------------------------------------------------

/// Shifts the flux of every bond leaving `vertex` by +phase and every bond
/// entering it by -phase. Self-loops are unchanged.
inline MetricGraph gauge_transform(const MetricGraph& g, const std::string& vertex, double phase) {
  vertex_index(g, vertex);
  MetricGraph out = g;
  for (auto& b : out.bonds) {
    if (b.is_loop()) continue;
    if (b.from == vertex) b.flux += phase;
    if (b.to == vertex) b.flux -= phase;
  }
  return out;
}

/// Net flux around each fundamental cycle of a BFS spanning tree rooted at
/// vertex 0, one entry per non-tree bond in bond order. Requires a valid graph.
inline std::vector<double> fundamental_cycle_fluxes(const MetricGraph& g) {
  const std::size_t n = g.vertices.size();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (bond, neighbour)
  for (std::size_t k = 0; k < g.bonds.size(); ++k) {
    const auto f = vertex_index(g, g.bonds[k].from);
    const auto t = vertex_index(g, g.bonds[k].to);
    adj[f].emplace_back(k, t);
    adj[t].emplace_back(k, f);
  }
  std::vector<double> potential(n, 0.0);
  std::vector<bool> seen(n, false);
  std::vector<bool> tree(g.bonds.size(), false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (auto [k, w] : adj[u]) {
      if (seen[w]) continue;
      const auto& b = g.bonds[k];
      seen[w] = true;
      tree[k] = true;
      potential[w] = potential[u] + (vertex_index(g, b.from) == u ? b.flux : -b.flux);
      q.push(w);
    }
  }
  std::vector<double> cycles;
  for (std::size_t k = 0; k < g.bonds.size(); ++k) {
    if (tree[k]) continue;
    const auto& b = g.bonds[k];
    cycles.push_back(b.flux + potential[vertex_index(g, b.from)] - potential[vertex_index(g, b.to)]);
  }
  return cycles;
}

}  // namespace graph_spectra
