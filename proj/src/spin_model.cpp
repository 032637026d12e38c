#include "qoc/spin_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qoc {

void SchwingerParams::validate() const {
  require(sites >= 2, "SchwingerParams: site count N must be >= 2 (got " + std::to_string(sites) + ")");
  require(sites <= kMaxDenseQubits, "SchwingerParams: site count N must be <= " +
                                        std::to_string(kMaxDenseQubits) + " for dense diagonalization");
  require(spacing > 0.0 && std::isfinite(spacing), "SchwingerParams: lattice spacing a must be > 0");
  require(std::isfinite(mass) && std::isfinite(theta) && std::isfinite(charge),
          "SchwingerParams: m, theta and e must be finite");
}

SpinHamiltonian::SpinHamiltonian(int n_qubits) : n_qubits_(n_qubits) {
  require(n_qubits >= 1, "SpinHamiltonian: n_qubits must be >= 1");
}

void SpinHamiltonian::add(double coefficient, std::string word) {
  require(static_cast<int>(word.size()) == n_qubits_,
          "SpinHamiltonian: Pauli word '" + word + "' has wrong length");
  require(std::all_of(word.begin(), word.end(),
                      [](char c) { return c == 'I' || c == 'X' || c == 'Y' || c == 'Z'; }),
          "SpinHamiltonian: Pauli word '" + word + "' must be over {I,X,Y,Z}");
  require(std::isfinite(coefficient), "SpinHamiltonian: coefficients must be finite real numbers");
  auto it = std::find_if(terms_.begin(), terms_.end(), [&](const PauliTerm& t) { return t.word == word; });
  if (it != terms_.end()) {
    it->coefficient += coefficient;
  } else {
    terms_.push_back({coefficient, std::move(word)});
  }
}

double SpinHamiltonian::coefficient(std::string_view word) const {
  auto it = std::find_if(terms_.begin(), terms_.end(), [&](const PauliTerm& t) { return t.word == word; });
  return it == terms_.end() ? 0.0 : it->coefficient;
}

void SpinHamiltonian::prune(double tol) {
  std::erase_if(terms_, [tol](const PauliTerm& t) { return std::abs(t.coefficient) <= tol; });
}

std::string pauli_word(int n_qubits, std::initializer_list<std::pair<int, char>> ops) {
  std::string w(static_cast<std::size_t>(n_qubits), 'I');
  for (auto [site, op] : ops) {
    require(site >= 1 && site <= n_qubits, "pauli_word: site index out of range");
    w[static_cast<std::size_t>(site - 1)] = op;
  }
  return w;
}

SpinHamiltonian build_schwinger(const SchwingerParams& p) {
  p.validate();
  const int n_sites = p.sites;
  const double j = p.coupling();
  SpinHamiltonian h(n_sites);

  // Long-range ZZ: (J/2) sum_{m=1}^{N-2} sum_{n=m+1}^{N-1} (N-n) Z_m Z_n
  for (int m = 1; m <= n_sites - 2; ++m) {
    for (int n = m + 1; n <= n_sites - 1; ++n) {
      h.add(0.5 * j * (n_sites - n), pauli_word(n_sites, {{m, 'Z'}, {n, 'Z'}}));
    }
  }

  // Hopping: (1/(2a) - (-1)^n m sin(theta)/2) on each bond.
  const double norm = p.hopping == HoppingNormalization::kPairExchange ? 0.5 : 1.0;
  for (int n = 1; n <= n_sites - 1; ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    const double c = norm * (1.0 / (2.0 * p.spacing) - sign * p.mass * std::sin(p.theta) / 2.0);
    h.add(c, pauli_word(n_sites, {{n, 'X'}, {n + 1, 'X'}}));
    h.add(c, pauli_word(n_sites, {{n, 'Y'}, {n + 1, 'Y'}}));
  }

  // Staggered mass and the Gauss-law induced single-Z terms.
  for (int n = 1; n <= n_sites; ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    h.add(0.5 * p.mass * std::cos(p.theta) * sign, pauli_word(n_sites, {{n, 'Z'}}));
  }
  for (int n = 1; n <= n_sites - 1; ++n) {
    if (n % 2 == 0) continue;
    for (int l = 1; l <= n; ++l) h.add(-0.5 * j, pauli_word(n_sites, {{l, 'Z'}}));
  }
  return h;
}

std::string to_text(const SpinHamiltonian& h) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& t : h.terms()) os << t.coefficient << ' ' << t.word << '\n';
  return os.str();
}

SpinHamiltonian hamiltonian_from_text(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::vector<PauliTerm> parsed;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    PauliTerm t;
    require(static_cast<bool>(ls >> t.coefficient >> t.word), "hamiltonian_from_text: malformed line '" + line + "'");
    parsed.push_back(std::move(t));
  }
  require(!parsed.empty(), "hamiltonian_from_text: no terms");
  SpinHamiltonian h(static_cast<int>(parsed.front().word.size()));
  for (auto& t : parsed) h.add(t.coefficient, std::move(t.word));
  return h;
}

std::pair<std::size_t, Complex> apply_pauli_word(std::string_view word, std::size_t index) {
  const std::size_t n = word.size();
  Complex phase{1.0, 0.0};
  std::size_t out = index;
  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t bit = std::size_t{1} << (n - 1 - q);
    const bool one = (index & bit) != 0;
    switch (word[q]) {
      case 'X':
        out ^= bit;
        break;
      case 'Y':
        out ^= bit;
        phase *= one ? Complex{0.0, -1.0} : Complex{0.0, 1.0};
        break;
      case 'Z':
        if (one) phase = -phase;
        break;
      default:
        break;
    }
  }
  return {out, phase};
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pauli_matrix(const SpinHamiltonian& h) {
  require(h.n_qubits() >= 1 && h.n_qubits() <= kMaxDenseQubits,
          "pauli_matrix: n_qubits exceeds the dense limit of " + std::to_string(kMaxDenseQubits));
  const std::size_t dim = std::size_t{1} << h.n_qubits();
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& t : h.terms()) {
    for (std::size_t col = 0; col < dim; ++col) {
      auto [row, phase] = apply_pauli_word(t.word, col);
      m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) +=
          static_cast<Scalar>(phase * t.coefficient);
    }
  }
  return m;
}

template Eigen::MatrixXcd pauli_matrix<Complex>(const SpinHamiltonian&);
template Eigen::MatrixXcf pauli_matrix<std::complex<float>>(const SpinHamiltonian&);

std::string bitstring(std::size_t index, int n_qubits) {
  std::string s(static_cast<std::size_t>(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q) {
    if (index & (std::size_t{1} << (n_qubits - 1 - q))) s[static_cast<std::size_t>(q)] = '1';
  }
  return s;
}

std::size_t bitstring_index(std::string_view bits) {
  std::size_t idx = 0;
  for (char c : bits) {
    require(c == '0' || c == '1', "bitstring must be over {0,1}");
    idx = (idx << 1) | static_cast<std::size_t>(c == '1');
  }
  return idx;
}

SpectrumResult exact_spectrum(const SpinHamiltonian& h, int k, double support_tol) {
  require(k >= 1, "exact_spectrum: k must be >= 1");
  const CMatrix m = pauli_matrix(h);
  require((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12, "exact_spectrum: Hamiltonian is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
  require(solver.info() == Eigen::Success, "exact_spectrum: eigensolver failed");

  SpectrumResult out;
  const auto& evals = solver.eigenvalues();
  const int count = std::min<int>(k, static_cast<int>(evals.size()));
  out.energies.assign(evals.data(), evals.data() + count);
  out.ground_energy = evals(0);
  out.ground_state = solver.eigenvectors().col(0);
  for (Eigen::Index i = 0; i < out.ground_state.size(); ++i) {
    const double prob = std::norm(out.ground_state(i));
    if (prob > support_tol) out.ground_probabilities[bitstring(static_cast<std::size_t>(i), h.n_qubits())] = prob;
  }
  return out;
}

ThermalObservables thermal_observables(const std::vector<double>& energies, double beta) {
  require(beta >= 0.0 && std::isfinite(beta), "thermal_observables: beta must be >= 0");
  require(!energies.empty(), "thermal_observables: empty spectrum");
  const double e0 = *std::min_element(energies.begin(), energies.end());
  std::vector<double> w(energies.size());
  double z = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    w[i] = std::exp(-beta * (energies[i] - e0));
    z += w[i];
  }
  ThermalObservables out;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double p = w[i] / z;
    out.energy += p * energies[i];
    if (p > 0.0) out.entropy -= p * std::log(p);
  }
  if (beta > 0.0) out.free_energy = out.energy - out.entropy / beta;
  return out;
}

ThermalObservables thermal_observables(const SpinHamiltonian& h, double beta) {
  require(beta >= 0.0 && std::isfinite(beta), "thermal_observables: beta must be >= 0");
  const CMatrix m = pauli_matrix(h);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
  const auto& evals = solver.eigenvalues();
  return thermal_observables(std::vector<double>(evals.data(), evals.data() + evals.size()), beta);
}

}  // namespace qoc
