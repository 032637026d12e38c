#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qoc/device.hpp"
#include "qoc/schedule.hpp"
#include "qoc/spin_model.hpp"
#include "qoc/types.hpp"

namespace qoc {

inline constexpr double kDefaultRotatingSubstep = 0.1;  // ns
inline constexpr double kDefaultLabSubstep = 0.01;      // ns

struct QuantumState {
  CVector amplitudes;
  Frame frame = Frame::kLab;

  double norm() const { return amplitudes.norm(); }
};

struct DensityMatrix {
  CMatrix rho;
  Frame frame = Frame::kLab;

  static DensityMatrix pure(const QuantumState& psi);

  /// Trace 1 within `tol`, Hermitian, and no eigenvalue below -tol.
  void validate(double tol = 1e-8) const;
  double min_eigenvalue() const;
};

/// Product state with the computational bitstring `bits` (qudit 1 leftmost).
QuantumState basis_state(const DeviceSpec& spec, std::string_view bits);

struct PropagationOptions {
  Frame frame = Frame::kRotating;
  double substep = 0.0;  // ns; 0 selects the frame default

  double resolved_substep() const;
};

struct Trajectory {
  std::vector<double> times;        // substep boundaries, including 0 and T
  std::vector<CVector> lab_states;  // lab-frame state at each time
};

struct DensityTrajectory {
  std::vector<double> times;
  std::vector<CMatrix> lab_states;
};

/// Cotangent of a scalar objective of the final lab-frame state:
/// given psi, returns g with df = 2 Re <g, dpsi>.
using StateCotangent = std::function<CVector(const CVector& psi_lab)>;

/// Time-ordered evolution under device + control Hamiltonian.
///
/// Each substep applies exp(-i h H(t_mid)) through a Taylor series truncated
/// at machine precision (an exact unitary up to rounding). In the rotating
/// frame the carrier sum_i w_i n_i is removed and the final state is rotated
/// back to the lab frame. Substeps never straddle a segment boundary: each
/// segment is split into ceil(width / substep) equal substeps.
///
/// Gradients are exact derivatives of this discrete map obtained from one
/// forward and one adjoint sweep. The Frechet derivative of every step
/// exponential is contracted through the Taylor series, so the result agrees
/// with finite differences of `propagate` up to rounding.
class PulsePropagator {
 public:
  explicit PulsePropagator(const DeviceSpec& spec, PropagationOptions options = {});
  ~PulsePropagator();
  PulsePropagator(PulsePropagator&&) noexcept;
  PulsePropagator& operator=(PulsePropagator&&) noexcept;

  const DeviceSpec& device() const;
  const QuditSpace& space() const;
  const PropagationOptions& options() const;

  QuantumState propagate(const QuantumState& initial, const PulseSchedule& schedule) const;
  Trajectory trajectory(const QuantumState& initial, const PulseSchedule& schedule) const;

  /// Lindblad evolution with L = sqrt(G1) a and sqrt(G2) a^+a per qudit, in the
  /// form d rho/dt = -i[H, rho] + sum (2 L rho L^+ - {L^+ L, rho}). Without
  /// collapse rates on the device this is the closed-system Liouville equation.
  DensityMatrix propagate(const DensityMatrix& initial, const PulseSchedule& schedule) const;
  DensityTrajectory trajectory(const DensityMatrix& initial, const PulseSchedule& schedule) const;

  /// Gradient with respect to `layout` parameters of an objective of the final state.
  RVector gradient(const QuantumState& initial, const PulseSchedule& schedule, const ParamLayout& layout,
                   const StateCotangent& cotangent, QuantumState* final_state = nullptr) const;

  /// Gradient of Tr(O rho_lab(T)) for a Hermitian lab-frame observable O.
  RVector gradient(const DensityMatrix& initial, const PulseSchedule& schedule, const ParamLayout& layout,
                   const CMatrix& observable, DensityMatrix* final_state = nullptr) const;

  /// Number of substeps used for `schedule`.
  int step_count(const PulseSchedule& schedule) const;

  struct Impl;  // opaque, defined in the implementation file

 private:
  std::unique_ptr<Impl> impl_;
};

QuantumState propagate(const QuantumState& state, const PulseSchedule& schedule, const DeviceSpec& spec,
                       double substep, Frame frame = Frame::kRotating);
DensityMatrix propagate_lindblad(const DensityMatrix& rho, const PulseSchedule& schedule, const DeviceSpec& spec,
                                 double substep, Frame frame = Frame::kRotating);

struct Leakage {
  std::vector<double> per_qubit;  // population with the qudit in a level >= 2
  double total = 0.0;             // 1 - population of the computational subspace
  bool two_level = false;         // d == 2: no leakage possible, zeros reported
};

Leakage leakage(const QuantumState& state, const DeviceSpec& spec);
Leakage leakage(const DensityMatrix& rho, const DeviceSpec& spec);

/// Population of qudit levels >= `level` summed over all qudits' basis states
/// (the probability that any qudit is at or above `level`).
double population_at_or_above(const CVector& lab_state, const QuditSpace& space, int level);

/// Target spin Hamiltonian embedded into the qudit space by projection onto the
/// computational subspace: Pi H Pi, no renormalization.
class EmbeddedObservable {
 public:
  EmbeddedObservable(const SpinHamiltonian& h, const DeviceSpec& spec);

  double expectation(const CVector& lab_state) const;
  double expectation(const CMatrix& lab_rho) const;

  /// Pi H Pi psi.
  CVector apply(const CVector& lab_state) const;

  /// Dense d^N matrix of the embedded operator.
  CMatrix matrix() const;

  const CMatrix& computational_matrix() const { return h2_; }
  const QuditSpace& space() const { return space_; }

 private:
  QuditSpace space_;
  CMatrix h2_;
};

double measure_energy(const QuantumState& state, const SpinHamiltonian& h, const DeviceSpec& spec);
double measure_energy(const DensityMatrix& rho, const SpinHamiltonian& h, const DeviceSpec& spec);

/// Standard deviation of the energy estimate when every Pauli term is measured
/// with `shots` shots in its own basis.
double shot_noise_std(const CVector& lab_state, const SpinHamiltonian& h, const DeviceSpec& spec, int shots);
double shot_noise_std(const CMatrix& lab_rho, const SpinHamiltonian& h, const DeviceSpec& spec, int shots);

struct ProbabilityRecord {
  double time_ns;
  std::string basis_state;
  double probability;
};

/// Time series of basis-state probabilities for every state whose maximum
/// probability over the trajectory reaches `threshold`.
std::vector<ProbabilityRecord> probability_trace(const Trajectory& trajectory, const QuditSpace& space,
                                                 double threshold = 0.10);

}  // namespace qoc
