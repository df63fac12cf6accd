#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "determinant.hpp"
#include "gluing.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace graph_spectra {

enum class FamilyFilter { all, delta, delta_prime };

struct VerifyOptions {
  std::uint64_t seed = 1;
  int instances = 200;
  int gammas = 10;
  double gamma_lo = 0.1;
  double gamma_hi = 20.0;
  double tol = 1e-10;
  FamilyFilter family = FamilyFilter::all;
};

struct IdentityResult {
  std::string name;
  double max_error = 0.0;
  double tol = 0.0;
  long samples = 0;
  [[nodiscard]] bool pass() const { return max_error <= tol; }
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<IdentityResult> identities;

  [[nodiscard]] bool pass() const {
    return std::all_of(identities.begin(), identities.end(), [](const auto& r) { return r.pass(); });
  }

  /// Fixed-width text table, byte-identical for identical options.
  [[nodiscard]] std::string text() const {
    std::string out = "seed " + std::to_string(seed) + "\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %10s %12s %10s  %s\n", "identity", "samples", "max_rel_err", "tol",
                  "result");
    out += line;
    for (const auto& r : identities) {
      std::snprintf(line, sizeof line, "%-24s %10ld %12.4e %10.3e  %s\n", r.name.c_str(), r.samples, r.max_error,
                    r.tol, r.pass() ? "PASS" : "FAIL");
      out += line;
    }
    out += pass() ? "all identities pass\n" : "identity violation\n";
    return out;
  }
};

namespace detail {

/// Errors collected per instance, reduced in index order afterwards.
struct ErrorTable {
  std::vector<std::vector<double>> rows;  // rows[instance][identity]
  void resize(std::size_t instances, std::size_t identities) {
    rows.assign(instances, std::vector<double>(identities, 0.0));
  }
  [[nodiscard]] double max_of(std::size_t identity) const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r[identity]);
    return m;
  }
};

inline void track(double& slot, double err) {
  // NaN must surface as a failure, not vanish in std::max
  if (std::isnan(err) || err > slot) slot = std::isnan(err) ? INFINITY : err;
}

inline double rel(const DetValue& a, const DetValue& b) { return relative_difference(a, b); }

inline std::vector<double> sample_gammas(Rng& rng, const VerifyOptions& opt) {
  std::vector<double> g(static_cast<std::size_t>(opt.gammas));
  for (auto& x : g) x = rng.uniform(opt.gamma_lo, opt.gamma_hi);
  return g;
}

/// n random subgraphs (vertex ids prefixed "s<k>.") and their attachment vertices.
struct Pieces {
  std::vector<MetricGraph> graphs;
  std::vector<std::string> attach;
};

inline Pieces random_pieces(Rng& rng, int n, const RandomGraphOptions& ro) {
  Pieces p;
  for (int k = 0; k < n; ++k) {
    auto g = prefix_vertices(random_graph(rng, ro), "s" + std::to_string(k) + ".");
    p.attach.push_back(random_vertex(rng, g));
    p.graphs.push_back(std::move(g));
  }
  return p;
}

/// Star of the pieces merged at their attachment vertices; the centre keeps
/// the first piece's attachment id.
inline MetricGraph merge_all(const Pieces& p) {
  MetricGraph g = p.graphs[0];
  for (std::size_t k = 1; k < p.graphs.size(); ++k) g = merge_graphs(g, p.attach[0], p.graphs[k], p.attach[k]);
  return g;
}

inline DetPair pair_of(const MetricGraph& g, const std::string& v, const SpectralPoint& pt) {
  return det_pair(g, v, pt);
}

}  // namespace detail

/// Randomized check of the gluing identities. Each instance draws from its
/// own stream of the seed, so the report does not depend on thread count.
inline VerifyReport run_verify(const VerifyOptions& opt) {
  using detail::track;
  const bool with_delta = opt.family != FamilyFilter::delta_prime;
  const bool with_prime = opt.family != FamilyFilter::delta;

  std::vector<std::string> names;
  std::vector<double> tols;
  auto add = [&](const char* name, double tol) {
    names.emplace_back(name);
    tols.push_back(tol);
    return names.size() - 1;
  };
  const double limit_tol = std::max(opt.tol, 1e-6);
  std::size_t id_vertex = 0, id_vertex_dir = 0, id_bond = 0, id_bond_dir = 0, id_two_step = 0, id_sampled = 0,
              id_sampled_bond = 0, id_star_wire = 0, id_star_random = 0, id_cayley = 0, id_limit = 0;
  std::size_t id_prime_wire = 0, id_prime_random = 0;
  if (with_delta) {
    id_vertex = add("vertex-gluing", opt.tol);
    id_vertex_dir = add("vertex-gluing-dirichlet", opt.tol);
    id_bond = add("bond-gluing", opt.tol);
    id_bond_dir = add("bond-gluing-dirichlet", opt.tol);
    id_two_step = add("two-step-recovery", opt.tol);
    id_sampled = add("vertex-gluing-sampled", opt.tol);
    id_sampled_bond = add("bond-gluing-sampled", opt.tol);
    id_star_wire = add("star-wires", opt.tol);
    id_star_random = add("star-random", opt.tol);
    id_cayley = add("cayley", opt.tol);
    id_limit = add("dirichlet-limit", limit_tol);
  }
  if (with_prime) {
    id_prime_wire = add("star-neumann-wires", opt.tol);
    id_prime_random = add("star-neumann-random", opt.tol);
  }

  detail::ErrorTable table;
  const auto count = static_cast<std::size_t>(std::max(0, opt.instances));
  table.resize(count, names.size());

  parallel_for(count, [&](std::size_t i) {
    auto& err = table.rows[i];
    RandomGraphOptions plain;
    RandomGraphOptions sampled;
    sampled.sampled_probability = 0.7;
    RandomGraphOptions prime;
    prime.delta_prime = true;

    if (with_delta) {
      Rng rng = Rng::stream(opt.seed, 2 * i);
      const auto gammas = detail::sample_gammas(rng, opt);
      const auto pair = detail::random_pieces(rng, 2, plain);
      const auto pot = detail::random_pieces(rng, 2, sampled);
      const auto merged = detail::merge_all(pair);
      const auto merged_pot = detail::merge_all(pot);
      const double l = rng.uniform(0.2, 2.0);
      const double bond_flux = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const auto joined = connect_graphs(pair.graphs[0], pair.attach[0], pair.graphs[1], pair.attach[1], l, bond_flux);
      const auto joined_pot = connect_graphs(pot.graphs[0], pot.attach[0], pot.graphs[1], pot.attach[1], l);
      const std::string far_end = "g2/" + pair.attach[1];
      const int n = rng.integer(2, 4);
      const double b = rng.uniform(0.3, 2.0);
      const auto star_pieces = detail::random_pieces(rng, n, plain);
      const auto star = detail::merge_all(star_pieces);
      const auto wire_star = star_graph(n, b);
      const int depth = rng.integer(1, 20);
      const auto tree = cayley_graph(3, 2, b);
      // Dirichlet limit on the first piece, at its attachment vertex
      const auto& limit_graph = pair.graphs[0];
      const auto& limit_vertex = pair.attach[0];

      for (double gamma : gammas) {
        const auto pt = SpectralPoint::from_gamma(gamma);
        const auto p1 = detail::pair_of(pair.graphs[0], pair.attach[0], pt);
        const auto p2 = detail::pair_of(pair.graphs[1], pair.attach[1], pt);

        const auto glued = glue_at_vertex(p1, p2);
        const auto direct = det_pair(merged, pair.attach[0], pt);
        track(err[id_vertex], detail::rel(direct.s, glued.s));
        track(err[id_vertex_dir], detail::rel(direct.s_dir, glued.s_dir));

        const auto through_bond = glue_with_bond(p1, p2, l, pt);
        const auto direct_bond = det_pair(joined, far_end, pt);
        track(err[id_bond], detail::rel(direct_bond.s, through_bond.s));
        track(err[id_bond_dir], detail::rel(direct_bond.s_dir, through_bond.s_dir));
        track(err[id_two_step], detail::rel(glue_at_vertex(attach_wire(p1, l, pt), p2).s, through_bond.s));

        const auto q1 = detail::pair_of(pot.graphs[0], pot.attach[0], pt);
        const auto q2 = detail::pair_of(pot.graphs[1], pot.attach[1], pt);
        track(err[id_sampled], detail::rel(spectral_determinant(merged_pot, pt), glue_at_vertex(q1, q2).s));
        track(err[id_sampled_bond], detail::rel(spectral_determinant(joined_pot, pt), glue_with_bond(q1, q2, l, pt).s));

        std::vector<DetPair> wires(static_cast<std::size_t>(n), neumann_wire_pair(b, pt));
        track(err[id_star_wire], detail::rel(spectral_determinant(wire_star, pt), glue_star(wires).s));
        std::vector<DetPair> parts;
        for (int k = 0; k < n; ++k) {
          parts.push_back(detail::pair_of(star_pieces.graphs[static_cast<std::size_t>(k)],
                                          star_pieces.attach[static_cast<std::size_t>(k)], pt));
        }
        const auto star_pair = glue_star(parts);
        const auto star_direct = det_pair(star, star_pieces.attach[0], pt);
        track(err[id_star_random], detail::rel(star_direct.s, star_pair.s));
        track(err[id_star_random], detail::rel(star_direct.s_dir, star_pair.s_dir));

        const double k = std::sqrt(gamma);
        const auto chain = cayley_tree(2, depth, b, pt);
        track(err[id_cayley], detail::rel(chain.s, DetValue{k * std::sinh(k * depth * b)}));
        track(err[id_cayley], detail::rel(chain.s_dir, DetValue{std::cosh(k * depth * b)}));
        const auto t3 = cayley_tree(3, 2, b, pt);
        const auto t3_direct = det_pair(tree, "r", pt);
        track(err[id_cayley], detail::rel(t3.s, t3_direct.s));
        track(err[id_cayley], detail::rel(t3.s_dir, t3_direct.s_dir));

        const auto lim = dirichlet_limit_check(limit_graph, limit_vertex, pt, 1e8);
        track(err[id_limit], detail::rel(lim.minor, lim.scaled_large_coupling));
      }
    }

    if (with_prime) {
      Rng rng = Rng::stream(opt.seed, 2 * i + 1);
      const auto gammas = detail::sample_gammas(rng, opt);
      const int n = rng.integer(2, 4);
      const double b = rng.uniform(0.3, 2.0);
      const auto wire_star = star_graph(n, b, DeltaPrime{}, DeltaPrime{});
      const auto single = wire_graph(b, DeltaPrime{}, DeltaPrime{});
      const auto pieces = detail::random_pieces(rng, n, prime);
      const auto star = detail::merge_all(pieces);
      for (double gamma : gammas) {
        const auto pt = SpectralPoint::from_gamma(gamma);
        std::vector<DetPair> wires(static_cast<std::size_t>(n), det_pair(single, "a", pt));
        const auto wire_glued = glue_star_neumann(wires);
        const auto wire_direct = det_pair(wire_star, "c", pt);
        track(err[id_prime_wire], detail::rel(wire_direct.s, wire_glued.s));
        track(err[id_prime_wire], detail::rel(wire_direct.s_dir, wire_glued.s_dir));
        std::vector<DetPair> parts;
        for (int k = 0; k < n; ++k) {
          parts.push_back(detail::pair_of(pieces.graphs[static_cast<std::size_t>(k)],
                                          pieces.attach[static_cast<std::size_t>(k)], pt));
        }
        const auto glued = glue_star_neumann(parts);
        const auto direct = det_pair(star, pieces.attach[0], pt);
        track(err[id_prime_random], detail::rel(direct.s, glued.s));
        track(err[id_prime_random], detail::rel(direct.s_dir, glued.s_dir));
      }
    }
  });

  VerifyReport report;
  report.seed = opt.seed;
  for (std::size_t k = 0; k < names.size(); ++k) {
    report.identities.push_back({names[k], table.max_of(k), tols[k], static_cast<long>(count) * opt.gammas});
  }
  return report;
}

}  // namespace graph_spectra
