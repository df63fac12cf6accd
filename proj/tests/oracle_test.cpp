#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include <graph_spectra/fd_oracle.hpp>
#include <graph_spectra/gluing.hpp>
#include <graph_spectra/spectrum.hpp>

using namespace graph_spectra;

namespace {

constexpr double pi = std::numbers::pi;

// Dense reference for the same discretization: D^{-1/2} K D^{-1/2}.
std::vector<double> dense_spectrum(const FiniteDifferenceOperator& fd) {
  const Eigen::MatrixXcd k = Eigen::MatrixXcd(fd.stiffness());
  const Eigen::VectorXd s = fd.mass().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXcd a = s.asDiagonal() * k * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a);
  const Eigen::VectorXd ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

TEST(Oracle, InertiaBisectionMatchesDenseSolver) {
  MetricGraph g{{{"a", Delta{0.4}}, {"b", Delta{-0.3}}, {"c", Dirichlet{}}},
                {{"a", "b", 1.0, 0.8, ZeroPotential{}},
                 {"b", "a", 0.7, -0.2, ZeroPotential{}},
                 {"a", "a", 1.3, 2.1, SampledPotential{{0.0, 1.0, 3.0}}},
                 {"b", "c", 0.5, 0.0, ZeroPotential{}}}};
  const FiniteDifferenceOperator fd(g, 60);
  const Eigen::MatrixXcd k = Eigen::MatrixXcd(fd.stiffness());
  EXPECT_LT((k - k.adjoint()).norm(), 1e-12 * k.norm());
  const auto dense = dense_spectrum(fd);
  const auto bisected = fd.lowest(12);
  for (std::size_t i = 0; i < bisected.size(); ++i) {
    EXPECT_NEAR(bisected[i], dense[i], 1e-9 * std::max(1.0, std::abs(dense[i]))) << i;
  }
}

TEST(Oracle, NeumannWire) {
  const auto e = oracle_spectrum(wire_graph(1.0), 2000, 4);
  const double expected[] = {0.0, pi * pi, 4 * pi * pi, 9 * pi * pi};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(e[static_cast<std::size_t>(i)], expected[i], 1e-3);
}

TEST(Oracle, RingMultiplicities) {
  const auto e = oracle_spectrum(ring_graph(2.0 * pi, 0.0), 2000, 7);
  const double expected[] = {0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0};
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(e[static_cast<std::size_t>(i)], expected[i], 1e-3);
}

TEST(Oracle, FluxLiftsTheDegeneracy) {
  const auto e = oracle_spectrum(ring_graph(2.0 * pi, pi / 2), 2000, 4);
  const double expected[] = {1.0 / 16, 9.0 / 16, 25.0 / 16, 49.0 / 16};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(e[static_cast<std::size_t>(i)], expected[i], 1e-3);
}

TEST(Oracle, AgreesWithSecularRootsOnTheFixtureSet) {
  const std::vector<MetricGraph> fixtures{wire_graph(1.0),
                                          ring_graph(2.0 * pi, 0.0),
                                          ring_graph(2.0 * pi, pi / 2),
                                          ring_graph(2.0 * pi, pi),
                                          star_graph(3, 1.0),
                                          ring_with_wire(2.0 * pi, 0.0, 1.0),
                                          ring_with_wire(2.0 * pi, pi / 2, 1.0),
                                          cayley_graph(3, 2, 1.0)};
  for (std::size_t f = 0; f < fixtures.size(); ++f) {
    const auto& g = fixtures[f];
    const auto oracle = oracle_spectrum(g, 2000, 10);
    const double e_max = oracle.back() * 0.999;
    const auto found = find_spectrum(g, {e_max, 0, 1e-10});
    // expand tangential levels to multiplicity 2 and compare as multisets
    std::vector<double> expanded;
    for (const auto& l : found.levels) {
      expanded.push_back(l.energy);
      if (l.has(tangential_root)) expanded.push_back(l.energy);
    }
    std::vector<double> below;
    for (double e : oracle) {
      if (e <= e_max) below.push_back(e);
    }
    ASSERT_EQ(expanded.size(), below.size()) << "fixture " << f;
    // second-order discretization error grows like (E h)^2
    double longest = 0.0;
    for (const auto& b : g.bonds) longest = std::max(longest, b.length);
    const double h = longest / 2000;
    for (std::size_t i = 0; i < below.size(); ++i) {
      EXPECT_NEAR(expanded[i], below[i], 1e-3 + below[i] * below[i] * h * h / 6) << "fixture " << f << " level " << i;
    }
  }
}

TEST(Oracle, CouplingsBoundariesAndPotentials) {
  MetricGraph g{{{"a", Delta{1.5}}, {"b", Dirichlet{}}},
                {{"a", "b", 1.2, 0.0, SampledPotential{{0.0, 2.0, 0.5, 1.0}}}}};
  const auto oracle = oracle_spectrum(g, 2000, 5);
  const auto found = find_spectrum(g, {oracle.back() * 1.001, 0, 1e-10}).energies();
  ASSERT_EQ(found.size(), 5U);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(found[i], oracle[i], 2e-3 * std::max(1.0, found[i] / 10.0)) << i;
}

TEST(Oracle, RejectsUnsupportedInput) {
  EXPECT_THROW(FiniteDifferenceOperator(wire_graph(1.0), 10), std::invalid_argument);
  EXPECT_THROW(FiniteDifferenceOperator(wire_graph(1.0, DeltaPrime{}, DeltaPrime{}), 100), GraphError);
  EXPECT_THROW(FiniteDifferenceOperator(wire_graph(1.0), 100).lowest(1000), OracleError);
}
