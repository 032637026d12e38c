#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "qoc/circuit.hpp"

using namespace qoc;

namespace {

SpinHamiltonian schwinger(int sites) {
  SchwingerParams p;
  p.sites = sites;
  return build_schwinger(p);
}

CVector exact_evolution(const SpinHamiltonian& h, double theta, const CVector& psi) {
  const CMatrix m = pauli_matrix(h);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  CVector phase(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) phase(i) = std::exp(-kI * (theta * es.eigenvalues()(i)));
  return es.eigenvectors() * phase.asDiagonal() * (es.eigenvectors().adjoint() * psi);
}

CVector random_state(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CVector psi(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) = Complex(nd(rng), nd(rng));
  return psi.normalized();
}

}  // namespace

TEST_CASE("three-site Trotter layer: 34 gates, depth 24, 10 CNOTs") {
  const Circuit c = trotter_layer(schwinger(3), 0.1);
  CHECK(c.gate_count() == 34);
  CHECK(c.depth() == 24);
  CHECK(c.two_qubit_count() == 10);
  CHECK(c.swap_count() == 0);
}

TEST_CASE("four-site Trotter layer: 55 gates plus two SWAPs on a chain") {
  const Circuit nn = trotter_layer(schwinger(4), 0.1, NearestNeighbor{});
  CHECK(nn.gate_count() == 55);
  CHECK(nn.swap_count() == 2);
  const Circuit all = trotter_layer(schwinger(4), 0.1, AllToAll{});
  CHECK(all.gate_count() == 55);
  CHECK(all.swap_count() == 0);
  // 15 CNOTs and 7 single-qubit gates on the critical path at 400/71 ns.
  CHECK(circuit_duration(nn, GateTimeTable{}) == doctest::Approx(7891.0));
  CHECK(circuit_duration(nn, GateTimeTable{71.0, 400.0, true}) > 7891.0);
}

TEST_CASE("two-site Trotter layer: 12 single-qubit gates (7 sequential) and 4 CNOTs") {
  const Circuit c = trotter_layer(schwinger(2), 0.1);
  CHECK(c.single_qubit_count() == 12);
  CHECK(c.two_qubit_count() == 4);
  const CriticalPath cp = critical_path(c, GateTimeTable{71.0, 660.0});
  CHECK(cp.single_qubit == 7);
  CHECK(cp.two_qubit == 4);
  CHECK(cp.duration_ns == doctest::Approx(7 * 71.0 + 4 * 660.0));
}

TEST_CASE("three-site Trotter layer duration at 400/71 ns") {
  const CriticalPath cp = critical_path(trotter_layer(schwinger(3), 0.1), GateTimeTable{});
  CHECK(cp.two_qubit == 10);
  CHECK(cp.duration_ns == doctest::Approx(10 * 400.0 + 14 * 71.0));
}

TEST_CASE("strongly entangling layers") {
  const Circuit c3 = strongly_entangling_layer(3, RMatrix::Constant(3, 3, 0.3));
  CHECK(c3.gate_count() == 12);
  CHECK(c3.depth() == 6);
  CHECK(c3.two_qubit_count() == 3);
  CHECK(circuit_duration(c3, GateTimeTable{}) == doctest::Approx(3 * 71.0 + 3 * 400.0));

  const Circuit c2 = strongly_entangling_layer(2, RMatrix::Constant(2, 3, 0.3));
  CHECK(c2.single_qubit_count() == 6);
  CHECK(c2.two_qubit_count() == 2);
  const CriticalPath cp = critical_path(c2, GateTimeTable{71.0, 660.0});
  CHECK(cp.single_qubit == 3);
  CHECK(cp.duration_ns == doctest::Approx(3 * 71.0 + 2 * 660.0));
}

TEST_CASE("zero angles leave only the CNOT ring") {
  const Circuit sel = strongly_entangling_layer(3, RMatrix::Zero(3, 3));
  Circuit ring(3);
  for (int q = 0; q < 3; ++q) ring.add({GateKind::kCNOT, q, (q + 1) % 3});
  for (unsigned seed = 1; seed <= 3; ++seed) {
    const CVector psi = random_state(3, seed);
    CHECK((simulate_circuit(sel, psi) - simulate_circuit(ring, psi)).norm() < 1e-14);
  }
}

TEST_CASE("circuit simulation basics") {
  const CVector zero = CVector::Unit(4, 0);
  CHECK((simulate_circuit(Circuit(2), zero) - zero).norm() == 0.0);
  Circuit x(2);
  x.add({GateKind::kX, 0});
  CHECK(std::abs(simulate_circuit(x, zero)(2)) == doctest::Approx(1.0));  // |10>
  CHECK_THROWS_AS(simulate_circuit(x, CVector::Unit(8, 0)), ValidationError);
  CHECK_THROWS_AS(x.add({GateKind::kCNOT, 0, 0}), ValidationError);
}

TEST_CASE("each Trotter factor is the exact Pauli exponential") {
  for (const char* word : {"XXI", "IYY", "ZIZ", "IIZ", "XYZ", "YIX"}) {
    SpinHamiltonian h(3);
    h.add(0.37, word);
    for (const Topology& topo : {Topology{AllToAll{}}, Topology{NearestNeighbor{}}}) {
      if (std::holds_alternative<NearestNeighbor>(topo) && (std::string(word) == "XYZ" || std::string(word) == "YIX"))
        continue;
      const CVector psi = random_state(3, 17);
      const CVector got = simulate_circuit(trotter_layer(h, 0.8, topo), psi);
      CHECK((got - exact_evolution(h, 0.8, psi)).norm() < 1e-12);
    }
  }
}

TEST_CASE("first-order Trotter error falls fourfold when theta halves") {
  for (int sites : {3, 4}) {
    const SpinHamiltonian h = schwinger(sites);
    const CVector psi = random_state(sites, 5);
    auto err = [&](double theta) {
      return (simulate_circuit(trotter_layer(h, theta, NearestNeighbor{}), psi) - exact_evolution(h, theta, psi)).norm();
    };
    const double ratio = err(0.02) / err(0.01);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("circuit simulation preserves the norm") {
  const CVector psi = random_state(4, 9);
  CHECK(simulate_circuit(trotter_layer(schwinger(4), 0.7, NearestNeighbor{}), psi).norm() ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("circuit dump has one gate per line") {
  const Circuit c = trotter_layer(schwinger(2), 0.1);
  const std::string text = dump(c);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(c.gates().size()));
  CHECK(text.rfind("H 0\n", 0) == 0);
}
