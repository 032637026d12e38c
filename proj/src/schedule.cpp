#include "qoc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qoc {

PulseSchedule PulseSchedule::zeros(int n_qubits, int segments, double duration) {
  require(n_qubits >= 1, "PulseSchedule: n_qubits must be >= 1");
  require(segments >= 1, "PulseSchedule: segment count must be >= 1");
  PulseSchedule s;
  s.duration = duration;
  s.amplitudes = RMatrix::Zero(n_qubits, segments);
  s.detunings = RVector::Zero(n_qubits);
  return s;
}

int PulseSchedule::segment_index(double t) const {
  require(t >= 0.0 && t <= duration, "PulseSchedule: time outside [0, T]");
  const int n = segments();
  if (duration <= 0.0) return 0;
  const int k = static_cast<int>(std::floor(t / segment_width()));
  return std::clamp(k, 0, n - 1);
}

void PulseSchedule::validate(const DeviceSpec& spec) const {
  require(duration >= 0.0 && std::isfinite(duration), "PulseSchedule: duration T must be >= 0");
  require(n_qubits() == spec.n_qubits(), "PulseSchedule: qubit count does not match the device");
  require(detunings.size() == amplitudes.rows(), "PulseSchedule: one detuning per qubit required");
  if (phases) {
    require(phases->rows() == amplitudes.rows() && phases->cols() == amplitudes.cols(),
            "PulseSchedule: phase table must match the amplitude table");
  }
  const double slack = 1e-12;
  require(amplitudes.cwiseAbs().maxCoeff() <= spec.amp_bound * (1 + slack),
          "PulseSchedule: |Omega| exceeds the amplitude bound");
  require(detunings.size() == 0 || detunings.cwiseAbs().maxCoeff() <= spec.detuning_bound * (1 + slack),
          "PulseSchedule: |dnu| exceeds the detuning bound");
  if (duration > 0.0 && spec.pulse_resolution > 0.0) {
    require(segment_width() >= spec.pulse_resolution * (1 - slack),
            "PulseSchedule: segment width T/n is below the device pulse resolution");
  }
}

PulseSchedule PulseSchedule::rescaled(double new_duration) const {
  PulseSchedule s = *this;
  s.duration = new_duration;
  return s;
}

int segments_for_resolution(double duration, int requested, double resolution) {
  require(requested >= 1, "segments_for_resolution: requested segment count must be >= 1");
  if (resolution <= 0.0) return requested;
  const int fit = static_cast<int>(std::floor(duration / resolution + 1e-9));
  return std::max(1, std::min(requested, fit));
}

Eigen::Index ParamLayout::size() const {
  return mode == PhaseMode::kDetuning ? static_cast<Eigen::Index>(n_qubits) * (segments + 1)
                                      : static_cast<Eigen::Index>(2) * n_qubits * segments;
}

RVector ParamLayout::pack(const PulseSchedule& s) const {
  require(s.n_qubits() == n_qubits && s.segments() == segments, "ParamLayout: schedule shape mismatch");
  RVector x(size());
  for (int q = 0; q < n_qubits; ++q) {
    for (int k = 0; k < segments; ++k) x(amplitude_index(q, k)) = s.amplitudes(q, k);
    if (mode == PhaseMode::kDetuning) {
      x(detuning_index(q)) = s.detunings(q);
    } else {
      for (int k = 0; k < segments; ++k) x(phase_index(q, k)) = s.phase(q, k);
    }
  }
  return x;
}

PulseSchedule ParamLayout::unpack(const RVector& x, double duration) const {
  require(x.size() == size(), "ParamLayout: parameter vector has wrong length");
  PulseSchedule s = PulseSchedule::zeros(n_qubits, segments, duration);
  if (mode == PhaseMode::kSegmentPhases) s.phases = RMatrix::Zero(n_qubits, segments);
  for (int q = 0; q < n_qubits; ++q) {
    for (int k = 0; k < segments; ++k) s.amplitudes(q, k) = x(amplitude_index(q, k));
    if (mode == PhaseMode::kDetuning) {
      s.detunings(q) = x(detuning_index(q));
    } else {
      for (int k = 0; k < segments; ++k) (*s.phases)(q, k) = x(phase_index(q, k));
    }
  }
  return s;
}

std::pair<RVector, RVector> ParamLayout::bounds(const DeviceSpec& spec) const {
  require(spec.n_qubits() == n_qubits, "ParamLayout: device qubit count mismatch");
  RVector lo(size()), hi(size());
  lo.head(n_qubits * segments).setConstant(-spec.amp_bound);
  hi.head(n_qubits * segments).setConstant(spec.amp_bound);
  if (mode == PhaseMode::kDetuning) {
    lo.tail(n_qubits).setConstant(-spec.detuning_bound);
    hi.tail(n_qubits).setConstant(spec.detuning_bound);
  } else {
    lo.tail(n_qubits * segments).setConstant(-std::numbers::pi);
    hi.tail(n_qubits * segments).setConstant(std::numbers::pi);
  }
  return {lo, hi};
}

}  // namespace qoc
