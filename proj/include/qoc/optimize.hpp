#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qoc/lbfgsb.hpp"
#include "qoc/propagation.hpp"
#include "qoc/schedule.hpp"
#include "qoc/spin_model.hpp"

namespace qoc {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr int kDefaultRestarts = 10;

enum class GradientMethod { kAdjoint, kCentralDifference };

/// Central differences with step 1e-6 * max(1, |x_i|).
RVector central_difference_gradient(const std::function<double(const RVector&)>& f, const RVector& x);

/// Uniform sample of the box [lo, hi]; identical for identical seeds.
RVector random_init(const RVector& lo, const RVector& hi, std::uint64_t seed);

/// Seed used by restart `index` of a run with base seed `seed`.
inline std::uint64_t restart_seed(std::uint64_t seed, int index) { return seed + static_cast<std::uint64_t>(index); }

/// Runs `task(i)` for i in [0, count) on `workers` threads. Tasks must be independent.
void parallel_for(int count, int workers, const std::function<void(int)>& task);

/// Worker count from QOC_WORKERS, defaulting to the hardware concurrency.
int default_workers();

struct GroundStateProblem {
  SpinHamiltonian target;
  DeviceSpec device;
  std::string initial_bits;
  double duration = 0.0;  // ns
  int segments = kDefaultSegments;
  PhaseMode mode = PhaseMode::kDetuning;
  PropagationOptions propagation;
  bool noisy = false;  // Lindblad evolution with the device collapse rates

  void validate() const;
};

struct GroundOptions {
  int restarts = kDefaultRestarts;
  std::uint64_t seed = kDefaultSeed;
  LbfgsbOptions lbfgsb;
  GradientMethod gradient = GradientMethod::kAdjoint;
  int workers = 1;
  /// Stop a restart once |E - E_exact| <= this; with `stop_on_success` later
  /// restarts are skipped as soon as one succeeds.
  std::optional<double> target_delta_e;
  bool stop_on_success = false;
  /// Parameter vector used for restart 0 instead of a random draw.
  std::optional<RVector> warm_start;
  /// Record leakage and basis-state probabilities along the best pulse.
  bool record_trajectory = true;
};

struct RestartRecord {
  int restart = 0;
  std::uint64_t seed = 0;
  double energy = 0.0;
  double delta_e = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  StopReason reason = StopReason::kMaxIterations;
};

struct LeakageSample {
  double time_ns;
  std::vector<double> per_qubit;
  double total;
  double top_level;  // population with any qudit in level d-1 (d > 2)
};

struct RunResult {
  GroundStateProblem problem;
  RVector params;
  PulseSchedule schedule;
  double energy = 0.0;
  double exact_energy = 0.0;
  double delta_e = 0.0;
  bool converged = false;
  int best_restart = 0;
  std::vector<RestartRecord> restarts;
  std::vector<IterationRecord> trace;  // best restart
  Leakage final_leakage;
  std::vector<LeakageSample> leakage_trace;
  std::vector<ProbabilityRecord> probabilities;
  double bang_bang_fraction = 0.0;  // amplitudes within 5% of the bound
  int prep_x_gates = 0;
  double prep_time_ns = 0.0;

  double total_time_ns() const { return problem.duration + prep_time_ns; }
  double mean_energy() const;
  double std_energy() const;
};

/// Objective E(x) = <psi(T)| Pi H Pi |psi(T)> (or Tr(Pi H Pi rho(T)) for noisy
/// problems) and its gradient.
class GroundObjective {
 public:
  explicit GroundObjective(const GroundStateProblem& problem);

  const ParamLayout& layout() const { return layout_; }
  const PulsePropagator& propagator() const { return propagator_; }
  std::pair<RVector, RVector> bounds() const;

  double value(const RVector& x) const;
  double operator()(const RVector& x, RVector& grad, GradientMethod method = GradientMethod::kAdjoint) const;

 private:
  GroundStateProblem problem_;
  ParamLayout layout_;
  PulsePropagator propagator_;
  EmbeddedObservable observable_;
  CMatrix observable_matrix_;
  QuantumState initial_;
};

/// Multi-start minimization of the energy of the evolved initial state.
RunResult prepare_ground_state(const GroundStateProblem& problem, const GroundOptions& options = {});

/// Fills leakage and probability traces of `result` from its best schedule.
void record_trajectory(RunResult& result);

}  // namespace qoc
