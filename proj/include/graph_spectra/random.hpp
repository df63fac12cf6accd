#pragma once

#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "graph.hpp"

namespace graph_spectra {

/// Seeded generator: std::mt19937_64 with uniform doubles built from the top
/// 53 bits of each draw, so a seed gives the same stream on every standard
/// library (the std distributions are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for item `index` of a run seeded with `seed`,
  /// so results do not depend on how the items are scheduled.
  static Rng stream(std::uint64_t seed, std::uint64_t index) { return Rng(splitmix(seed ^ splitmix(index + 1))); }

  double uniform() { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi].
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }
  bool chance(double p) { return uniform() < p; }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
  }

  std::mt19937_64 engine_;
};

struct RandomGraphOptions {
  int max_vertices = 6;
  double min_length = 0.3;
  double max_length = 2.0;
  double coupling_bound = 1.0;  // lambda (or mu) uniform in [-bound, bound]
  int max_extra_bonds = 2;      // on top of a spanning tree; may be loops or parallel
  bool delta_prime = false;
  double sampled_probability = 0.0;  // chance that a bond gets a sampled potential
  double max_potential = 2.0;
};

/// Connected random graph with vertices "v0", "v1", ...; fluxes in [0, 2 pi).
inline MetricGraph random_graph(Rng& rng, const RandomGraphOptions& opt = {}) {
  MetricGraph g;
  const int n = rng.integer(1, opt.max_vertices);
  for (int i = 0; i < n; ++i) {
    const double c = rng.uniform(-opt.coupling_bound, opt.coupling_bound);
    VertexCondition cond = opt.delta_prime ? VertexCondition{DeltaPrime{c}} : VertexCondition{Delta{c}};
    g.vertices.push_back({"v" + std::to_string(i), cond});
  }
  auto add_bond = [&](int a, int b) {
    BondData bond{g.vertices[static_cast<std::size_t>(a)].id, g.vertices[static_cast<std::size_t>(b)].id,
                  rng.uniform(opt.min_length, opt.max_length), rng.uniform(0.0, 2.0 * std::numbers::pi),
                  ZeroPotential{}};
    if (rng.chance(opt.sampled_probability)) {
      SampledPotential s;
      const int samples = rng.integer(2, 12);
      for (int k = 0; k < samples; ++k) s.values.push_back(rng.uniform(0.0, opt.max_potential));
      bond.potential = std::move(s);
    }
    g.bonds.push_back(std::move(bond));
  };
  for (int i = 1; i < n; ++i) {
    const int j = rng.integer(0, i - 1);
    if (rng.chance(0.5)) add_bond(i, j);
    else add_bond(j, i);
  }
  int extra = rng.integer(0, opt.max_extra_bonds);
  if (n == 1 && extra == 0) extra = 1;
  for (int e = 0; e < extra; ++e) add_bond(rng.integer(0, n - 1), rng.integer(0, n - 1));
  return g;
}

/// Id of a uniformly chosen vertex.
inline std::string random_vertex(Rng& rng, const MetricGraph& g) {
  return g.vertices[static_cast<std::size_t>(rng.integer(0, static_cast<int>(g.vertices.size()) - 1))].id;
}

}  // namespace graph_spectra
