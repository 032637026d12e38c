#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qoc/circuit.hpp"
#include "qoc/optimize.hpp"

namespace qoc {

/// Computational basis state minimizing the diagonal of `h` (the
/// strong-coupling configuration used as the starting state). Ties go to the
/// smallest bitstring.
std::string mass_eigenstate(const SpinHamiltonian& h);

struct MetOptions {
  double t_min = 10.0;  // ns
  double t_max = 400.0;
  double resolution = 0.5;
  double tol = 1e-3;
  GroundOptions ground;  // restarts, seed, workers, optimizer settings
  bool bisection = false;  // opt-in; success is not monotone in T
  bool warm_start = false;  // reuse the previous duration's best pulse for restart 0
  /// When > 0 the ascending sweep first steps by `coarse_step` and then scans
  /// the last failing coarse interval at `resolution`.
  double coarse_step = 0.0;
};

struct MetAttempt {
  double duration;
  double best_delta_e;
  int restarts_used;
  bool success;
};

struct MetResult {
  bool found = false;
  double met = 0.0;
  double resolution = 0.0;
  std::vector<MetAttempt> attempts;  // in evaluation order
  std::optional<RunResult> best;     // run at the MET
};

/// Progress callback invoked after every attempted duration.
using MetProgress = std::function<void(const MetAttempt&)>;

/// Smallest duration on the grid t_min + k * resolution whose best-of-restarts
/// energy error is <= tol. The default sweep ascends (optionally coarse then
/// fine); `bisection` assumes monotone success and narrows [t_min, t_max] instead.
MetResult find_met(const GroundStateProblem& problem, const MetOptions& options, const MetProgress& progress = {});

struct CouplingPoint {
  double g;                   // rad/ns
  std::vector<double> mets;   // one entry per successful repeat
  int not_found = 0;
  double mean = 0.0;
  double std = 0.0;
  double error = 0.0;  // std and resolution combined in quadrature
};

struct CouplingFit {
  // log(MET - floor) = intercept + slope * g
  double floor = 0.0;
  double intercept = 0.0;
  double slope = 0.0;
  std::vector<double> residuals;
  double rms = 0.0;
};

struct CouplingScan {
  std::vector<CouplingPoint> points;
  std::optional<CouplingFit> fit;
  bool decreasing = false;  // mean MET non-increasing along increasing g
};

using CouplingProgress = std::function<void(const CouplingPoint&)>;

/// MET as a function of a uniform coupling g on the problem's topology,
/// `repeats` independent searches per point (seed base shifted per repeat).
CouplingScan coupling_scan(const GroundStateProblem& problem, const std::vector<double>& g_values, int repeats,
                           const MetOptions& options, const CouplingProgress& progress = {});

/// Least-squares fit of log(MET - c) linear in g with the floor c scanned below min(MET).
std::optional<CouplingFit> fit_coupling_scan(const std::vector<double>& g, const std::vector<double>& met);

struct VarianceCell {
  int sites;
  double duration;
  int samples;
  double mean;
  double variance;
};

struct VarianceOptions {
  int samples = 100;
  int segments = kDefaultSegments;
  std::uint64_t seed = kDefaultSeed;
  int workers = 1;
  PropagationOptions propagation;
};

using ModelFactory = std::function<SpinHamiltonian(int sites)>;

/// Sample variance of the energy over uniform random pulse parameters for
/// every (sites, duration) cell. The device is restricted to the first `sites` qudits.
std::vector<VarianceCell> variance_scan(const DeviceSpec& device, const ModelFactory& model,
                                        const std::vector<int>& site_counts, const std::vector<double>& durations,
                                        const VarianceOptions& options,
                                        const std::function<void(const VarianceCell&)>& progress = {});

struct NoisyGroundOptions {
  SchwingerParams model;  // theta is overwritten per point
  std::vector<double> thetas;
  double duration = 70.0;  // ns
  int segments = 70;
  PhaseMode mode = PhaseMode::kSegmentPhases;
  std::string initial_bits = "00";
  int shots = 8192;
  GroundOptions ground;
  PropagationOptions propagation;
};

struct NoisyGroundPoint {
  double theta;
  double exact;
  double noiseless;        // optimized without collapse operators
  double noisy;            // optimized with Lindblad evolution
  double noiseless_std;    // shot standard deviation of the estimate
  double noisy_std;
  double noiseless_delta_e;
  double noisy_delta_e;
};

/// Ground-state optimization with and without the device collapse rates at
/// every theta. The noisy run optimizes Tr(H rho(T)) under Lindblad evolution.
std::vector<NoisyGroundPoint> noisy_ground_scan(const DeviceSpec& device, const NoisyGroundOptions& options,
                                                const std::function<void(const NoisyGroundPoint&)>& progress = {});

struct BaselineCircuit {
  std::string name;
  int gates;
  int two_qubit;
  int depth;
  int swaps;
  double duration_ns;
};

/// Trotter layer and strongly entangling layer for `h` priced with the device gate times.
std::vector<BaselineCircuit> gate_baselines(const SpinHamiltonian& h, const DeviceSpec& device, bool include_swaps = false);

struct SpeedupRow {
  std::string baseline;
  double baseline_ns;
  double speedup;           // baseline / (MET + preparation)
  double speedup_met_only;  // baseline / MET
};

struct SpeedupReport {
  double met_ns;
  int prep_x_gates;
  double prep_ns;
  double qoc_total_ns;
  std::vector<SpeedupRow> rows;
};

SpeedupReport speedup_report(double met_ns, const std::string& initial_bits, const DeviceSpec& device,
                             const std::vector<BaselineCircuit>& baselines);

}  // namespace qoc
