#include "qoc/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <tuple>

namespace qoc {

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::kRX: return "RX";
    case GateKind::kRY: return "RY";
    case GateKind::kRZ: return "RZ";
    case GateKind::kH: return "H";
    case GateKind::kX: return "X";
    case GateKind::kCNOT: return "CNOT";
    case GateKind::kSWAP: return "SWAP";
  }
  return "?";
}

Circuit::Circuit(int n_qubits) : n_(n_qubits) { require(n_qubits >= 0, "Circuit: qubit count must be >= 0"); }

void Circuit::add(Gate g) {
  require(g.q0 >= 0 && g.q0 < n_, "Circuit: gate qubit index out of range");
  if (g.two_qubit()) {
    require(g.q1 >= 0 && g.q1 < n_, "Circuit: gate qubit index out of range");
    require(g.q0 != g.q1, "Circuit: two-qubit gate needs two distinct qubits");
  }
  gates_.push_back(g);
}

void Circuit::append(const Circuit& other) {
  require(other.n_ == n_, "Circuit: cannot append circuits of different width");
  for (const Gate& g : other.gates_) add(g);
}

int Circuit::gate_count() const { return static_cast<int>(gates_.size()) - swap_count(); }

int Circuit::swap_count() const {
  return static_cast<int>(std::count_if(gates_.begin(), gates_.end(), [](const Gate& g) { return g.kind == GateKind::kSWAP; }));
}

int Circuit::two_qubit_count() const {
  return static_cast<int>(std::count_if(gates_.begin(), gates_.end(), [](const Gate& g) { return g.kind == GateKind::kCNOT; }));
}

int Circuit::single_qubit_count() const { return gate_count() - two_qubit_count(); }

int Circuit::depth() const {
  std::vector<int> level(static_cast<std::size_t>(n_), 0);
  int depth = 0;
  for (const Gate& g : gates_) {
    int l = level[static_cast<std::size_t>(g.q0)];
    if (g.two_qubit()) l = std::max(l, level[static_cast<std::size_t>(g.q1)]);
    ++l;
    level[static_cast<std::size_t>(g.q0)] = l;
    if (g.two_qubit()) level[static_cast<std::size_t>(g.q1)] = l;
    depth = std::max(depth, l);
  }
  return depth;
}

double GateTimeTable::duration(const Gate& g) const {
  switch (g.kind) {
    case GateKind::kCNOT: return two_qubit;
    case GateKind::kSWAP: return include_swaps ? 3.0 * two_qubit : 0.0;
    default: return single_qubit;
  }
}

CriticalPath critical_path(const Circuit& circuit, const GateTimeTable& table) {
  require(table.single_qubit > 0.0 && table.two_qubit > 0.0, "circuit_duration: gate times must be > 0");
  const auto& gates = circuit.gates();
  const auto nq = static_cast<std::size_t>(circuit.n_qubits());
  std::vector<double> free_at(nq, 0.0);
  std::vector<int> last_gate(nq, -1);
  std::vector<double> end(gates.size());
  std::vector<int> pred(gates.size(), -1);
  for (std::size_t k = 0; k < gates.size(); ++k) {
    const Gate& g = gates[k];
    const auto a = static_cast<std::size_t>(g.q0);
    double start = free_at[a];
    pred[k] = last_gate[a];
    if (g.two_qubit()) {
      const auto b = static_cast<std::size_t>(g.q1);
      if (free_at[b] > start) {
        start = free_at[b];
        pred[k] = last_gate[b];
      }
    }
    end[k] = start + table.duration(g);
    free_at[a] = end[k];
    last_gate[a] = static_cast<int>(k);
    if (g.two_qubit()) {
      free_at[static_cast<std::size_t>(g.q1)] = end[k];
      last_gate[static_cast<std::size_t>(g.q1)] = static_cast<int>(k);
    }
  }
  CriticalPath out;
  if (gates.empty()) return out;
  int k = static_cast<int>(std::max_element(end.begin(), end.end()) - end.begin());
  out.duration_ns = end[static_cast<std::size_t>(k)];
  for (; k >= 0; k = pred[static_cast<std::size_t>(k)]) {
    const Gate& g = gates[static_cast<std::size_t>(k)];
    if (g.kind == GateKind::kCNOT) {
      ++out.two_qubit;
    } else if (g.kind != GateKind::kSWAP) {
      ++out.single_qubit;
    }
  }
  return out;
}

namespace {

// exp(-i angle/2 P) for a Pauli word P on adjacent-in-ladder qubits `support`.
void pauli_rotation(Circuit& c, const std::string& word, const std::vector<int>& support, double angle) {
  auto basis_in = [&](int q, char op) {
    if (op == 'X') c.add({GateKind::kH, q});
    if (op == 'Y') c.add({GateKind::kRX, q, -1, std::numbers::pi / 2});
  };
  auto basis_out = [&](int q, char op) {
    if (op == 'X') c.add({GateKind::kH, q});
    if (op == 'Y') c.add({GateKind::kRX, q, -1, -std::numbers::pi / 2});
  };
  for (int q : support) basis_in(q, word[static_cast<std::size_t>(q)]);
  for (std::size_t i = 0; i + 1 < support.size(); ++i) c.add({GateKind::kCNOT, support[i], support[i + 1]});
  c.add({GateKind::kRZ, support.back(), -1, angle});
  for (std::size_t i = support.size() - 1; i > 0; --i) c.add({GateKind::kCNOT, support[i - 1], support[i]});
  for (int q : support) basis_out(q, word[static_cast<std::size_t>(q)]);
}

}  // namespace

Circuit trotter_layer(const SpinHamiltonian& h, double theta, const Topology& topology) {
  const int n = h.n_qubits();
  require(n >= 1, "trotter_layer: empty Hamiltonian");
  const auto edges = expand_topology(topology, n);
  auto connected = [&](int a, int b) {
    return std::find(edges.begin(), edges.end(), std::pair{std::min(a, b), std::max(a, b)}) != edges.end();
  };
  const bool chain = std::holds_alternative<NearestNeighbor>(topology);

  struct Item {
    int cls;
    std::vector<int> support;
    std::string word;
    double coefficient;
  };
  std::vector<Item> items;
  for (const auto& t : h.terms()) {
    std::vector<int> support;
    bool z_only = true;
    for (int q = 0; q < n; ++q) {
      const char op = t.word[static_cast<std::size_t>(q)];
      if (op != 'I') support.push_back(q);
      if (op == 'X' || op == 'Y') z_only = false;
    }
    if (support.empty() || t.coefficient == 0.0) continue;
    const int weight = static_cast<int>(support.size());
    items.push_back({z_only ? (weight > 1 ? 1 : 2) : 0, support, t.word, t.coefficient});
  }
  // Within a class: by support, then X before Y before Z words.
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tie(a.cls, a.support, a.word) < std::tie(b.cls, b.support, b.word);
  });

  Circuit c(n);
  for (const Item& it : items) {
    const double angle = 2.0 * theta * it.coefficient;
    bool adjacent = true;
    for (std::size_t i = 0; i + 1 < it.support.size(); ++i)
      adjacent = adjacent && connected(it.support[i], it.support[i + 1]);
    if (adjacent) {
      pauli_rotation(c, it.word, it.support, angle);
      continue;
    }
    require(chain && it.support.size() == 2, "trotter_layer: unsupported Pauli term '" + it.word +
                                                  "' for the device connectivity");
    // Move the second qubit next to the first, rotate, move it back.
    const int a = it.support[0];
    const int b = it.support[1];
    for (int q = b; q > a + 1; --q) c.add({GateKind::kSWAP, q - 1, q});
    std::string moved(static_cast<std::size_t>(n), 'I');
    moved[static_cast<std::size_t>(a)] = it.word[static_cast<std::size_t>(a)];
    moved[static_cast<std::size_t>(a + 1)] = it.word[static_cast<std::size_t>(b)];
    pauli_rotation(c, moved, {a, a + 1}, angle);
    for (int q = a + 2; q <= b; ++q) c.add({GateKind::kSWAP, q - 1, q});
  }
  return c;
}

Circuit strongly_entangling_layer(int n_qubits, const RMatrix& angles) {
  require(n_qubits >= 2, "strongly_entangling_layer: at least two qubits required");
  require(angles.rows() == n_qubits && angles.cols() == 3, "strongly_entangling_layer: angles must be n_qubits x 3");
  Circuit c(n_qubits);
  for (int q = 0; q < n_qubits; ++q) {
    c.add({GateKind::kRZ, q, -1, angles(q, 0)});
    c.add({GateKind::kRY, q, -1, angles(q, 1)});
    c.add({GateKind::kRZ, q, -1, angles(q, 2)});
  }
  for (int q = 0; q < n_qubits; ++q) c.add({GateKind::kCNOT, q, (q + 1) % n_qubits});
  return c;
}

namespace {

using Mat2 = Eigen::Matrix2cd;

Mat2 single_qubit_matrix(const Gate& g) {
  const double c = std::cos(g.angle / 2);
  const double s = std::sin(g.angle / 2);
  Mat2 m;
  switch (g.kind) {
    case GateKind::kRX: m << c, -kI * s, -kI * s, c; break;
    case GateKind::kRY: m << c, -s, s, c; break;
    case GateKind::kRZ: m << std::exp(-kI * (g.angle / 2)), 0, 0, std::exp(kI * (g.angle / 2)); break;
    case GateKind::kH: m << 1, 1, 1, -1; m /= std::sqrt(2.0); break;
    case GateKind::kX: m << 0, 1, 1, 0; break;
    default: throw ValidationError("simulate_circuit: not a single-qubit gate");
  }
  return m;
}

}  // namespace

CVector simulate_circuit(const Circuit& circuit, const CVector& state) {
  const int n = circuit.n_qubits();
  require(n <= 20, "simulate_circuit: too many qubits");
  require(state.size() == (Eigen::Index{1} << n), "simulate_circuit: state dimension must be 2^n");
  CVector psi = state;
  auto bit = [n](int q) { return Eigen::Index{1} << (n - 1 - q); };
  for (const Gate& g : circuit.gates()) {
    if (g.kind == GateKind::kCNOT) {
      const Eigen::Index bc = bit(g.q0), bt = bit(g.q1);
      for (Eigen::Index i = 0; i < psi.size(); ++i)
        if ((i & bc) && !(i & bt)) std::swap(psi(i), psi(i | bt));
    } else if (g.kind == GateKind::kSWAP) {
      const Eigen::Index ba = bit(g.q0), bb = bit(g.q1);
      for (Eigen::Index i = 0; i < psi.size(); ++i)
        if ((i & ba) && !(i & bb)) std::swap(psi(i), psi((i & ~ba) | bb));
    } else {
      const Mat2 m = single_qubit_matrix(g);
      const Eigen::Index b = bit(g.q0);
      for (Eigen::Index i = 0; i < psi.size(); ++i) {
        if (i & b) continue;
        const Complex a0 = psi(i), a1 = psi(i | b);
        psi(i) = m(0, 0) * a0 + m(0, 1) * a1;
        psi(i | b) = m(1, 0) * a0 + m(1, 1) * a1;
      }
    }
  }
  return psi;
}

std::string dump(const Circuit& circuit) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const Gate& g : circuit.gates()) {
    out << to_string(g.kind) << ' ' << g.q0;
    if (g.two_qubit()) out << ' ' << g.q1;
    if (!g.two_qubit() && g.kind != GateKind::kH && g.kind != GateKind::kX) out << ' ' << g.angle;
    out << '\n';
  }
  return out.str();
}

}  // namespace qoc
