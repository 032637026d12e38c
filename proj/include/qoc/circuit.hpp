#pragma once

#include <string>
#include <vector>

#include "qoc/device.hpp"
#include "qoc/spin_model.hpp"
#include "qoc/types.hpp"

namespace qoc {

enum class GateKind { kRX, kRY, kRZ, kH, kX, kCNOT, kSWAP };

std::string to_string(GateKind kind);

struct Gate {
  GateKind kind;
  int q0;           // 0-based; control for CNOT
  int q1 = -1;      // target for CNOT, partner for SWAP
  double angle = 0.0;

  bool two_qubit() const { return kind == GateKind::kCNOT || kind == GateKind::kSWAP; }
};

class Circuit {
 public:
  explicit Circuit(int n_qubits = 0);

  int n_qubits() const { return n_; }
  const std::vector<Gate>& gates() const { return gates_; }

  void add(Gate g);
  void append(const Circuit& other);

  int gate_count() const;      // SWAPs excluded
  int swap_count() const;
  int two_qubit_count() const;  // CNOTs
  int single_qubit_count() const;

  /// Greedy as-soon-as-possible layering; gates share a layer iff their qubits are disjoint.
  int depth() const;

 private:
  int n_ = 0;
  std::vector<Gate> gates_;
};

/// Gate durations in ns. SWAPs are priced as three CNOTs when `include_swaps` is set and skipped otherwise.
struct GateTimeTable {
  double single_qubit = 71.0;
  double two_qubit = 400.0;
  bool include_swaps = false;

  static GateTimeTable from(const DeviceSpec& spec, bool include_swaps = false) {
    return {spec.gate_times.single_qubit, spec.gate_times.two_qubit, include_swaps};
  }
  double duration(const Gate& g) const;
};

struct CriticalPath {
  double duration_ns = 0.0;
  int single_qubit = 0;  // single-qubit gates on the longest path
  int two_qubit = 0;     // CNOTs on the longest path
};

/// Longest path through the as-soon-as-possible schedule.
CriticalPath critical_path(const Circuit& circuit, const GateTimeTable& table);

inline double circuit_duration(const Circuit& circuit, const GateTimeTable& table) {
  return critical_path(circuit, table).duration_ns;
}

/// One first-order Trotter factor prod_k exp(-i theta c_k P_k). Terms containing
/// X or Y come first, then Z-only terms by descending weight; each factor is a
/// basis change, a CNOT ladder, one RZ and the mirrored ladder. On a
/// nearest-neighbour chain two-qubit factors on distant qubits are wrapped in
/// SWAPs that bring the pair together. Identity terms are dropped.
Circuit trotter_layer(const SpinHamiltonian& h, double theta, const Topology& topology = AllToAll{});

/// RZ RY RZ on every qubit (angles row q = (phi, theta, omega)) followed by
/// CNOT(q, q+1 mod n) around the ring; for two qubits both orientations.
Circuit strongly_entangling_layer(int n_qubits, const RMatrix& angles);

/// Exact statevector application, qubit 0 = most significant bit.
CVector simulate_circuit(const Circuit& circuit, const CVector& state);

/// Plain text, one gate per line: "KIND q0 [q1] [angle]".
std::string dump(const Circuit& circuit);

}  // namespace qoc
