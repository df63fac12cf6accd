// graph-spectra: command-line front end for spectral determinants of metric graphs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <graph_spectra/determinant.hpp>
#include <graph_spectra/fd_oracle.hpp>
#include <graph_spectra/gluing.hpp>
#include <graph_spectra/graph_io.hpp>
#include <graph_spectra/parallel.hpp>
#include <graph_spectra/scattering.hpp>
#include <graph_spectra/spectrum.hpp>
#include <graph_spectra/verify.hpp>

namespace gs = graph_spectra;

namespace {

enum Exit : int { ok = 0, verify_failed = 1, bad_input = 2, evaluation_failed = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Field = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Field>> rows;
};

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) out += format_double(v);
            else if constexpr (std::is_same_v<V, long long>) out += std::to_string(v);
            else out += v;
          },
          row[i]);
    }
    out += "\n";
  }
  return out;
}

std::string to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
              if (std::isfinite(v)) obj[t.header[i]] = v;
              else obj[t.header[i]] = format_double(v);
            } else {
              obj[t.header[i]] = v;
            }
          },
          row[i]);
    }
    rows.push_back(std::move(obj));
  }
  return rows.dump(2) + "\n";
}

struct Common {
  std::string graph_path;
  std::string out_path;
  std::string format = "csv";
};

void emit(const Common& c, const std::string& text) {
  if (c.out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.out_path, std::ios::binary);
  if (!f) throw UsageError("cannot open output file '" + c.out_path + "'");
  f << text;
}

void emit(const Common& c, const Table& t) { emit(c, c.format == "json" ? to_json(t) : to_csv(t)); }

gs::MetricGraph load_graph(const std::string& path) {
  if (path.empty()) throw UsageError("--graph is required");
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read graph file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  auto g = gs::parse_graph(ss.str());
  gs::require_valid(g);
  return g;
}

struct Sweep {
  double start = 0.0;
  double stop = 0.0;
  bool stop_given = false;
  int points = 1;
  std::string scale = "linear";

  [[nodiscard]] std::vector<double> values(const char* what) const {
    if (points < 1) throw UsageError(std::string(what) + ": --points must be at least 1");
    if (points == 1 && !stop_given) return {start};
    if (!(start < stop)) throw UsageError(std::string(what) + ": start must be below stop");
    if (scale == "log" && !(start > 0.0)) throw UsageError(std::string(what) + ": log scale needs start > 0");
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
      const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
      v[static_cast<std::size_t>(i)] =
          scale == "log" ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start))) : start + t * (stop - start);
    }
    v.back() = points == 1 ? start : stop;
    return v;
  }
};

void add_common(CLI::App* app, Common& c, bool needs_graph) {
  auto* opt = app->add_option("--graph", c.graph_path, "graph JSON file");
  if (needs_graph) opt->required();
  app->add_option("--out", c.out_path, "output file (default: standard output)");
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_sweep(CLI::App* app, Sweep& s, const std::string& var) {
  app->add_option("--" + var + "-start", s.start, var + " of the first point")->required();
  app->add_option_function<double>(
      "--" + var + "-stop",
      [&s](double v) {
        s.stop = v;
        s.stop_given = true;
      },
      var + " of the last point");
  app->add_option("--points", s.points, "number of sweep points");
  app->add_option("--scale", s.scale, "point spacing")->check(CLI::IsMember({"linear", "log"}));
}

// eval ------------------------------------------------------------------------------

int cmd_eval(const Common& c, const Sweep& sweep, const std::vector<std::string>& dirichlet) {
  const auto g = load_graph(c.graph_path);
  const auto gammas = sweep.values("eval");
  const gs::AssemblyGraph ag(g);
  for (const auto& v : dirichlet) (void)ag.index_of(v);
  const auto values = gs::parallel_map(gammas.size(), [&](std::size_t i) {
    return gs::spectral_determinant(ag, gs::SpectralPoint::from_gamma(gammas[i]), dirichlet);
  });
  Table t{{"gamma", "re_S", "im_S", "log2_abs_S"}, {}};
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    t.rows.push_back({gammas[i], values[i].real(), values[i].imag(), values[i].log2_abs()});
  }
  emit(c, t);
  return ok;
}

// spectrum ----------------------------------------------------------------------------

std::string flag_text(unsigned flags) {
  std::string s;
  auto add = [&](const char* name) { s += (s.empty() ? "" : "+") + std::string(name); };
  if (flags & gs::simple_root) add("simple");
  if (flags & gs::tangential_root) add("tangential");
  if (flags & gs::prefactor_zero) add("prefactor-zero");
  return s;
}

struct SpectrumArgs {
  double e_max = 0.0;
  double tol = 1e-10;
  int grid_points = 0;
  bool oracle = false;
  int oracle_points = 2000;
};

int cmd_spectrum(const Common& c, const SpectrumArgs& a) {
  if (!(a.e_max > 0.0)) throw UsageError("spectrum: --e-max must be positive");
  if (!(a.tol > 0.0)) throw UsageError("spectrum: --tol must be positive");
  if (a.grid_points != 0 && a.grid_points < 16) throw UsageError("spectrum: --grid-points must be at least 16");
  const auto g = load_graph(c.graph_path);
  const auto result = gs::find_spectrum(g, {a.e_max, a.grid_points, a.tol});

  Table t{{"index", "energy", "flags"}, {}};
  std::vector<double> oracle;
  if (a.oracle) {
    t.header.insert(t.header.end(), {"oracle_energy", "oracle_delta", "oracle_multiplicity"});
    const gs::FiniteDifferenceOperator fd(g, a.oracle_points);
    const auto n = fd.count_below(a.e_max * (1.0 + 1e-3) + 1e-3);
    oracle = fd.lowest(static_cast<int>(n));
  }
  long long index = 0;
  for (const auto& lvl : result.levels) {
    std::vector<Field> row{index++, lvl.energy, flag_text(lvl.flags)};
    if (a.oracle) {
      const double window = 1e-3 * std::max(1.0, lvl.energy);
      double nearest = NAN;
      long long mult = 0;
      for (double e : oracle) {
        if (std::isnan(nearest) || std::abs(e - lvl.energy) < std::abs(nearest - lvl.energy)) nearest = e;
        if (std::abs(e - lvl.energy) <= window) ++mult;
      }
      row.insert(row.end(), {nearest, nearest - lvl.energy, mult});
    }
    t.rows.push_back(std::move(row));
  }
  emit(c, t);
  return ok;
}

// verify ------------------------------------------------------------------------------

int cmd_verify(const Common& c, const gs::VerifyOptions& opt, const std::string& family) {
  if (!(opt.tol > 0.0)) throw UsageError("verify: --tol must be positive");
  if (opt.instances < 1) throw UsageError("verify: --instances must be at least 1");
  gs::VerifyOptions o = opt;
  o.family = family == "delta" ? gs::FamilyFilter::delta
             : family == "delta-prime" ? gs::FamilyFilter::delta_prime
                                       : gs::FamilyFilter::all;
  const auto report = gs::run_verify(o);
  if (c.format == "json") {
    nlohmann::json j = nlohmann::json::object();
    j["seed"] = report.seed;
    j["pass"] = report.pass();
    j["identities"] = nlohmann::json::array();
    for (const auto& r : report.identities) {
      j["identities"].push_back(
          {{"identity", r.name}, {"samples", r.samples}, {"max_rel_err", r.max_error}, {"tol", r.tol}, {"pass", r.pass()}});
    }
    emit(c, j.dump(2) + "\n");
  } else {
    emit(c, report.text());
  }
  return report.pass() ? ok : verify_failed;
}

// scatter -----------------------------------------------------------------------------

int cmd_scatter(const Common& c, const Sweep& sweep, const std::string& vertex) {
  const auto g = load_graph(c.graph_path);
  if (vertex.empty()) throw UsageError("scatter: --vertex is required");
  (void)gs::vertex_index(g, vertex);
  const auto energies = sweep.values("scatter");
  for (double e : energies) {
    if (!(e > 0.0)) throw UsageError("scatter: energies must be positive");
  }
  auto phases = gs::parallel_map(energies.size(), [&](std::size_t i) { return gs::phase_shift(g, vertex, energies[i]); });
  gs::unwrap_phases(phases);
  Table t{{"energy", "cot_half", "delta", "pole"}, {}};
  for (const auto& p : phases) t.rows.push_back({p.energy, p.cot_half, p.delta, static_cast<long long>(p.pole)});
  emit(c, t);
  return ok;
}

// cayley ------------------------------------------------------------------------------

struct CayleyArgs {
  int z = 3;
  int depth = 5;
  double length = 1.0;
  double gamma = 1.0;
  double tol = 1e-10;
  int max_direct_vertices = 400;
};

int cmd_cayley(const Common& c, const CayleyArgs& a) {
  if (a.z < 2) throw UsageError("cayley: --z must be at least 2");
  if (a.depth < 1) throw UsageError("cayley: --depth must be at least 1");
  if (!(a.length > 0.0)) throw UsageError("cayley: --length must be positive");
  const auto pt = gs::SpectralPoint::from_gamma(a.gamma);
  Table t{{"n", "log2_abs_S", "log2_abs_S_dir", "check"}, {}};
  const auto rows = gs::parallel_map(static_cast<std::size_t>(a.depth), [&](std::size_t i) {
    const int n = static_cast<int>(i) + 1;
    const auto p = gs::cayley_tree(a.z, n, a.length, pt);
    // direct comparison only while the explicit tree stays small
    double vertices = 1.0, layer = 1.0;
    for (int d = 0; d < n; ++d, layer *= a.z - 1) vertices += layer;
    std::string check = "-";
    if (vertices <= a.max_direct_vertices) {
      const auto direct = gs::det_pair(gs::cayley_graph(a.z, n, a.length), "r", pt);
      const double err = std::max(gs::relative_difference(direct.s, p.s), gs::relative_difference(direct.s_dir, p.s_dir));
      check = err <= a.tol ? "ok" : "mismatch";
    }
    return std::vector<Field>{static_cast<long long>(n), p.s.log2_abs(), p.s_dir.log2_abs(), check};
  });
  t.rows = rows;
  emit(c, t);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral determinants, spectra and gluing checks for quantum graphs", "graph-spectra"};
  app.require_subcommand(1);

  Common common;

  auto* eval = app.add_subcommand("eval", "evaluate S(gamma) over a gamma sweep");
  Sweep gamma_sweep;
  std::vector<std::string> dirichlet;
  add_common(eval, common, true);
  add_sweep(eval, gamma_sweep, "gamma");
  eval->add_option("--dirichlet", dirichlet, "vertex ids pinned to Dirichlet (repeatable)");

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues in [0, E_max] from the zeros of S(-E)");
  SpectrumArgs sa;
  add_common(spectrum, common, true);
  spectrum->add_option("--e-max", sa.e_max, "upper end of the energy window")->required();
  spectrum->add_option("--tol", sa.tol, "bracket width in E");
  spectrum->add_option("--grid-points", sa.grid_points, "k-grid size (0: 64 per expected level)");
  spectrum->add_flag("--oracle", sa.oracle, "compare with the finite-difference oracle");
  spectrum->add_option("--oracle-points", sa.oracle_points, "oracle grid cells per bond");

  auto* verify = app.add_subcommand("verify", "randomized gluing identity suite");
  gs::VerifyOptions vo;
  std::string family = "all";
  add_common(verify, common, false);
  verify->add_option("--seed", vo.seed, "64-bit seed");
  verify->add_option("--instances", vo.instances, "random instances per identity");
  verify->add_option("--gammas", vo.gammas, "gamma samples per instance");
  verify->add_option("--tol", vo.tol, "relative tolerance");
  verify->add_option("--family", family, "restrict to one coupling family")
      ->check(CLI::IsMember({"all", "delta", "delta-prime"}));

  auto* scatter = app.add_subcommand("scatter", "reflection phase shift over an energy sweep");
  Sweep e_sweep;
  std::string vertex;
  add_common(scatter, common, true);
  add_sweep(scatter, e_sweep, "e");
  scatter->add_option("--vertex", vertex, "attachment vertex of the lead")->required();

  auto* cayley = app.add_subcommand("cayley", "Cayley tree determinants by recurrence");
  CayleyArgs ca;
  add_common(cayley, common, false);
  cayley->add_option("--z", ca.z, "coordination number");
  cayley->add_option("--depth", ca.depth, "largest depth n");
  cayley->add_option("--length", ca.length, "branch length b");
  cayley->add_option("--gamma", ca.gamma, "spectral parameter");
  cayley->add_option("--tol", ca.tol, "tolerance of the direct cross-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bad_input;
  }

  try {
    if (*eval) return cmd_eval(common, gamma_sweep, dirichlet);
    if (*spectrum) return cmd_spectrum(common, sa);
    if (*verify) return cmd_verify(common, vo, family);
    if (*scatter) return cmd_scatter(common, e_sweep, vertex);
    if (*cayley) return cmd_cayley(common, ca);
  } catch (const gs::ParseError& e) {
    std::cerr << "graph-spectra: parse error at " << e.what() << "\n";
    return bad_input;
  } catch (const gs::GraphError& e) {
    std::cerr << "graph-spectra: invalid graph: " << e.what() << "\n";
    return bad_input;
  } catch (const UsageError& e) {
    std::cerr << "graph-spectra: " << e.what() << "\n";
    return bad_input;
  } catch (const gs::DegenerateBondError& e) {
    std::cerr << "graph-spectra: degenerate gamma: " << e.what() << "\n";
    return evaluation_failed;
  } catch (const gs::SecularError& e) {
    std::cerr << "graph-spectra: " << e.what() << "\n";
    return evaluation_failed;
  } catch (const gs::OracleError& e) {
    std::cerr << "graph-spectra: oracle: " << e.what() << "\n";
    return evaluation_failed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "graph-spectra: " << e.what() << "\n";
    return bad_input;
  } catch (const std::domain_error& e) {
    std::cerr << "graph-spectra: " << e.what() << "\n";
    return bad_input;
  }
  return bad_input;
}
