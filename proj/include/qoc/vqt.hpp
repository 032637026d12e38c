#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qoc/lbfgsb.hpp"
#include "qoc/optimize.hpp"

namespace qoc {

/// Pulse-level variational thermalizer. Circuit 1 prepares a state whose
/// computational-basis populations are the ensemble weights p_i; circuit 2
/// maps every basis state |i> to a pure state whose energy E_i enters
/// E = sum_i p_i E_i. The objective is F = E - S(p) / beta.
struct VqtConfig {
  SpinHamiltonian target;
  DeviceSpec device;
  double beta = 1.0;
  double t1 = 50.0;  // ns
  double t2 = 50.0;
  int segments = kDefaultSegments;
  int restarts = 20;
  PropagationOptions propagation;
  LbfgsbOptions lbfgsb;
  int workers = 1;

  void validate() const;
};

struct EnsembleDistribution {
  std::vector<double> p;  // indexed by computational bitstring value, sums to 1
  double leaked = 0.0;    // population outside the computational subspace before renormalization

  std::map<std::string, double> as_map(int n_qubits) const;
};

/// Computational-basis populations of the circuit-1 state started in |0...0>.
/// For d > 2 the marginal on the lowest two levels is renormalized.
EnsembleDistribution ensemble_distribution(const PulseSchedule& schedule1, const DeviceSpec& spec,
                                           const PropagationOptions& options = {});

/// -sum p log p, natural log, 0 log 0 = 0.
double shannon_entropy(const std::vector<double>& p);
double shannon_entropy(const std::map<std::string, double>& p);

/// sum_i p_i <psi_i| Pi H Pi |psi_i> with psi_i the circuit-2 image of basis state i.
double ensemble_energy(const std::vector<double>& p, const PulseSchedule& schedule2, const DeviceSpec& spec,
                       const SpinHamiltonian& h, const PropagationOptions& options = {});

/// F(Theta1, Theta2) and its exact gradient over the joint vector [Theta1; Theta2].
class ThermalObjective {
 public:
  explicit ThermalObjective(const VqtConfig& config);

  const ParamLayout& layout() const { return layout_; }
  Eigen::Index size() const { return 2 * layout_.size(); }
  std::pair<RVector, RVector> bounds() const;

  struct Terms {
    double free_energy;
    double energy;
    double entropy;
    EnsembleDistribution distribution;
  };

  Terms evaluate(const RVector& x) const;
  double operator()(const RVector& x, RVector& grad) const;

  PulseSchedule schedule1(const RVector& x) const;
  PulseSchedule schedule2(const RVector& x) const;

 private:
  VqtConfig config_;
  ParamLayout layout_;
  PulsePropagator propagator_;
  EmbeddedObservable observable_;
};

struct VqtRestart {
  int restart = 0;
  std::uint64_t seed = 0;
  double free_energy = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
  int iterations = 0;
  StopReason reason = StopReason::kMaxIterations;
  bool above_exact = true;  // F >= F_exact - 1e-9
};

struct ThermalResult {
  double beta = 0.0;
  // Best restart.
  double free_energy = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
  std::map<std::string, double> distribution;
  double leaked = 0.0;
  PulseSchedule schedule1;
  PulseSchedule schedule2;
  // Statistics over restarts.
  std::vector<VqtRestart> restarts;
  double mean_free_energy = 0.0;
  double std_free_energy = 0.0;
  double mean_energy = 0.0;
  double std_energy = 0.0;
  double mean_entropy = 0.0;
  double std_entropy = 0.0;
  // Dense reference at the same beta.
  ThermalObservables exact;
  bool variational_bound = true;  // every restart has F >= F_exact
};

/// Multi-start joint minimization of F; restart r draws its start from seed + r.
ThermalResult prepare_thermal(const VqtConfig& config, std::uint64_t seed = kDefaultSeed);

}  // namespace qoc
