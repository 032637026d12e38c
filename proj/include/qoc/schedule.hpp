#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qoc/device.hpp"
#include "qoc/types.hpp"

namespace qoc {

inline constexpr int kDefaultSegments = 100;

/// Piecewise-constant drive: one amplitude per (qubit, segment), one detuning
/// dnu_i = w_i - v_i per qubit, optional per-segment phases.
struct PulseSchedule {
  double duration = 0.0;     // ns
  RMatrix amplitudes;        // n_qubits x segments, rad/ns
  RVector detunings;         // n_qubits, rad/ns
  std::optional<RMatrix> phases;  // n_qubits x segments, rad

  static PulseSchedule zeros(int n_qubits, int segments, double duration);

  int n_qubits() const { return static_cast<int>(amplitudes.rows()); }
  int segments() const { return static_cast<int>(amplitudes.cols()); }
  double segment_width() const { return duration / segments(); }

  /// 0-based segment containing t under half-open [t_{k-1}, t_k); t == T maps to the last one.
  int segment_index(double t) const;

  double amplitude(int qubit, double t) const { return amplitudes(qubit, segment_index(t)); }
  double phase(int qubit, int segment) const { return phases ? (*phases)(qubit, segment) : 0.0; }

  /// Checks shape, |Omega| <= amp_bound, |dnu| <= detuning_bound, T > 0 and segment width >= resolution.
  void validate(const DeviceSpec& spec) const;

  /// Same pulse stretched to a new duration (segment values kept).
  PulseSchedule rescaled(double new_duration) const;
};

/// Largest segment count <= requested whose width T/n still meets the device resolution.
int segments_for_resolution(double duration, int requested, double resolution);

enum class PhaseMode {
  kDetuning,       // amplitudes + one detuning per qubit: N (n + 1) parameters
  kSegmentPhases,  // amplitudes + one phase per segment, resonant drive: 2 N n parameters
};

/// Packing of a PulseSchedule into a flat parameter vector: all amplitudes
/// (qubit-major), then detunings or phases.
struct ParamLayout {
  int n_qubits = 0;
  int segments = kDefaultSegments;
  PhaseMode mode = PhaseMode::kDetuning;

  Eigen::Index size() const;
  Eigen::Index amplitude_index(int qubit, int segment) const { return qubit * segments + segment; }
  Eigen::Index detuning_index(int qubit) const { return n_qubits * segments + qubit; }
  Eigen::Index phase_index(int qubit, int segment) const { return n_qubits * segments + qubit * segments + segment; }

  RVector pack(const PulseSchedule& schedule) const;
  PulseSchedule unpack(const RVector& x, double duration) const;

  /// (lo, hi) bound vectors from the device limits.
  std::pair<RVector, RVector> bounds(const DeviceSpec& spec) const;
};

}  // namespace qoc
