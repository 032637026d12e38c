#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qoc/types.hpp"

namespace qoc {

/// Normalization of the nearest-neighbour hopping term.
///
/// kPairExchange multiplies the bond coefficient onto (XX + YY) / 2, i.e. the
/// sigma^+ sigma^- + h.c. exchange operator. kPrinted multiplies it onto
/// XX + YY directly. The pair-exchange form reproduces the reference
/// ground-state weights and is the default.
enum class HoppingNormalization { kPairExchange, kPrinted };

/// Lattice parameters of the spin form of the massive Schwinger model with
/// open boundaries and vanishing background field.
struct SchwingerParams {
  int sites = 3;
  double mass = 0.5;
  double spacing = 0.1;
  double theta = 0.5;
  double charge = 0.2;
  HoppingNormalization hopping = HoppingNormalization::kPairExchange;

  /// J = e^2 a / 2. Always derived, never stored.
  double coupling() const { return charge * charge * spacing / 2.0; }

  void validate() const;

  friend bool operator==(const SchwingerParams&, const SchwingerParams&) = default;
};

struct PauliTerm {
  double coefficient = 0.0;
  std::string word;  // over {I,X,Y,Z}; character 0 is qubit 1

  friend bool operator==(const PauliTerm&, const PauliTerm&) = default;
};

/// Weighted sum of Pauli strings with real coefficients. Adding a word that is
/// already present accumulates into the existing coefficient.
class SpinHamiltonian {
 public:
  SpinHamiltonian() = default;
  explicit SpinHamiltonian(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }

  void add(double coefficient, std::string word);

  /// Coefficient of `word`, zero if absent.
  double coefficient(std::string_view word) const;

  /// Drops terms whose |coefficient| <= tol.
  void prune(double tol = 0.0);

 private:
  int n_qubits_ = 0;
  std::vector<PauliTerm> terms_;
};

/// Word with `op` on the listed 1-based sites and identity elsewhere.
std::string pauli_word(int n_qubits, std::initializer_list<std::pair<int, char>> ops);

SpinHamiltonian build_schwinger(const SchwingerParams& params);

// Plain-text term list, one "coefficient pauli_string" per line.
std::string to_text(const SpinHamiltonian& h);
SpinHamiltonian hamiltonian_from_text(std::string_view text);

inline constexpr int kMaxDenseQubits = 12;

/// Dense matrix of `h` in the computational basis; qubit 1 is the most
/// significant bit of the basis index.
template <typename Scalar = Complex>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pauli_matrix(const SpinHamiltonian& h);

/// Action of a single Pauli word on basis state `index`: returns the image
/// index and the phase picked up.
std::pair<std::size_t, Complex> apply_pauli_word(std::string_view word, std::size_t index);

struct SpectrumResult {
  std::vector<double> energies;                   // ascending
  std::map<std::string, double> ground_probabilities;  // bitstring -> |amp|^2
  double ground_energy = 0.0;
  CVector ground_state;
};

/// Lowest `k` eigenpairs by dense diagonalization. Probabilities below
/// `support_tol` are dropped from the returned map.
SpectrumResult exact_spectrum(const SpinHamiltonian& h, int k, double support_tol = 1e-12);

struct ThermalObservables {
  double energy = 0.0;
  double entropy = 0.0;
  std::optional<double> free_energy;  // undefined at beta == 0
};

ThermalObservables thermal_observables(const SpinHamiltonian& h, double beta);

/// Same as above but reusing an already computed ascending spectrum.
ThermalObservables thermal_observables(const std::vector<double>& energies, double beta);

std::string bitstring(std::size_t index, int n_qubits);
std::size_t bitstring_index(std::string_view bits);

}  // namespace qoc
