#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qoc/types.hpp"

namespace qoc {

struct Coupling {
  int i = 0;  // 0-based qudit indices, i < j
  int j = 0;
  double g = 0.0;  // rad/ns
};

struct CollapseRates {
  double gamma1 = 0.0;  // amplitude damping, 1/ns
  double gamma2 = 0.0;  // dephasing, 1/ns
};

struct GateTimes {
  double single_qubit = 71.0;  // ns
  double two_qubit = 400.0;    // ns
};

struct NearestNeighbor {};
struct AllToAll {};
struct ExplicitEdges {
  std::vector<std::pair<int, int>> edges;  // 0-based
};
using Topology = std::variant<NearestNeighbor, AllToAll, ExplicitEdges>;

/// Edge list for `n` qudits, each pair ordered (i < j).
std::vector<std::pair<int, int>> expand_topology(const Topology& topology, int n);

/// Static description of a transmon device. All frequencies in rad/ns, times in ns.
struct DeviceSpec {
  std::string name;
  int levels = 4;
  std::vector<double> omega;
  std::vector<double> anharmonicity;
  std::vector<Coupling> couplings;
  double amp_bound = mhz_to_rad_per_ns(20.0);
  double detuning_bound = ghz_to_rad_per_ns(1.0);
  double pulse_resolution = 0.0;
  GateTimes gate_times;
  std::optional<std::vector<CollapseRates>> collapse;

  int n_qubits() const { return static_cast<int>(omega.size()); }
  Eigen::Index dim() const;

  void validate() const;

  /// First `n` qudits and the couplings among them.
  DeviceSpec restricted(int n) const;
  DeviceSpec with_levels(int d) const;
  /// Every coupling set to `g` (rad/ns), topology kept.
  DeviceSpec with_uniform_coupling(double g) const;
};

inline constexpr Eigen::Index kMaxDeviceDim = 4096;

/// Device with the given qubit parameters and every edge of `topology` set to `g`.
DeviceSpec make_device(std::vector<double> omega, std::vector<double> anharmonicity, const Topology& topology,
                       double g, int levels = 4);

// Device files are JSON documents holding device tables in GHz / MHz / us.
DeviceSpec parse_device(std::string_view json_text);
DeviceSpec load_device(const std::filesystem::path& path);
std::string device_to_json(const DeviceSpec& spec);

std::vector<std::string> preset_names();
std::string_view preset_json(std::string_view name);
DeviceSpec device_preset(std::string_view name);

/// Preset name or path to a device file.
DeviceSpec resolve_device(std::string_view preset_or_path);

/// Index bookkeeping for the tensor product of n d-level qudits. Qudit 0 is
/// the most significant digit of the basis index.
class QuditSpace {
 public:
  struct Transition {
    Eigen::Index from;
    Eigen::Index to;
    double factor;
  };

  QuditSpace() = default;
  QuditSpace(int n_qudits, int levels);

  int n_qudits() const { return n_; }
  int levels() const { return d_; }
  Eigen::Index dim() const { return dim_; }

  int level(Eigen::Index index, int qudit) const { return levels_[static_cast<std::size_t>(index * n_ + qudit)]; }

  /// Transitions of the lowering operator a_q: |n> -> sqrt(n) |n-1>.
  const std::vector<Transition>& lowering(int q) const { return lowering_[static_cast<std::size_t>(q)]; }

  /// Transitions of a_i^dagger a_j.
  std::vector<Transition> exchange(int i, int j) const;

  /// Basis indices of the 2^n states with every qudit in {0,1}, ordered by
  /// the bitstring value (qudit 0 = leftmost bit).
  const std::vector<Eigen::Index>& computational_indices() const { return computational_; }

  /// Basis index of the product state with the given per-qudit levels.
  Eigen::Index index_of(const std::vector<int>& qudit_levels) const;

  /// Index of a computational bitstring such as "010".
  Eigen::Index index_of_bits(std::string_view bits) const;

  std::string label(Eigen::Index index) const;

  CMatrix lowering_matrix(int q) const;
  RVector number_diagonal(int q) const;

 private:
  int n_ = 0;
  int d_ = 0;
  Eigen::Index dim_ = 0;
  std::vector<int> levels_;
  std::vector<std::vector<Transition>> lowering_;
  std::vector<Eigen::Index> computational_;
};

/// y += c * (operator described by `transitions`) * x, column by column.
template <typename In, typename Out>
void add_transitions(const std::vector<QuditSpace::Transition>& transitions, Complex c,
                     const Eigen::MatrixBase<In>& x, Eigen::MatrixBase<Out>& y) {
  for (Eigen::Index col = 0; col < x.cols(); ++col) {
    for (const auto& t : transitions) y(t.to, col) += c * t.factor * x(t.from, col);
  }
}

/// y += c * (adjoint of the operator) * x.
template <typename In, typename Out>
void add_transitions_adjoint(const std::vector<QuditSpace::Transition>& transitions, Complex c,
                             const Eigen::MatrixBase<In>& x, Eigen::MatrixBase<Out>& y) {
  for (Eigen::Index col = 0; col < x.cols(); ++col) {
    for (const auto& t : transitions) y(t.from, col) += c * t.factor * x(t.to, col);
  }
}

struct PulseSchedule;

/// Lab-frame static Hamiltonian
///   sum_i w_i n_i - sum_i (delta_i/2) a_i^+ a_i^+ a_i a_i + sum_edges g_ij (a_i^+ a_j + h.c.).
CMatrix device_hamiltonian(const DeviceSpec& spec);

/// Lab-frame drive sum_i Omega_i(t) (e^{i v_i t} a_i + e^{-i v_i t} a_i^+), v_i = w_i - dnu_i.
CMatrix control_hamiltonian(const DeviceSpec& spec, const PulseSchedule& schedule, double t);

enum class Frame { kLab, kRotating };
enum class FrameDirection { kToLab, kToRotating };

/// Applies exp(-/+ i t sum_i w_i n_i): kToLab maps rotating-frame objects to the lab frame.
CVector rotating_frame_transform(const DeviceSpec& spec, const CVector& state, double t, FrameDirection direction);
CMatrix rotating_frame_transform_operator(const DeviceSpec& spec, const CMatrix& op, double t,
                                          FrameDirection direction);

/// Diagonal of sum_i w_i n_i.
RVector frame_generator_diagonal(const DeviceSpec& spec, const QuditSpace& space);

}  // namespace qoc
