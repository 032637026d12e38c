#include "qoc/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace qoc {

RVector central_difference_gradient(const std::function<double(const RVector&)>& f, const RVector& x) {
  RVector g(x.size());
  RVector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + h;
    const double fp = f(xp);
    xp(i) = x(i) - h;
    const double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
    require(std::isfinite(g(i)), "gradient: non-finite objective evaluation");
  }
  return g;
}

RVector random_init(const RVector& lo, const RVector& hi, std::uint64_t seed) {
  require(lo.size() == hi.size(), "random_init: bound vectors differ in length");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RVector x(lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * u(rng);
  return x;
}

void parallel_for(int count, int workers, const std::function<void(int)>& task) {
  workers = std::clamp(workers, 1, std::max(1, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int default_workers() {
  if (const char* env = std::getenv("QOC_WORKERS")) {
    const int n = std::atoi(env);
    require(n >= 1, "QOC_WORKERS must be a positive integer");
    return n;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

void GroundStateProblem::validate() const {
  device.validate();
  require(target.n_qubits() == device.n_qubits(), "ground: target Hamiltonian and device qubit counts differ");
  require(static_cast<int>(initial_bits.size()) == device.n_qubits(),
          "ground: initial bitstring length must equal the qubit count");
  require(initial_bits.find_first_not_of("01") == std::string::npos, "ground: initial bitstring must be over {0,1}");
  require(duration > 0.0, "ground: pulse duration T must be > 0");
  require(segments >= 1, "ground: segment count must be >= 1");
  require(!noisy || device.collapse.has_value(), "ground: noisy run requested but the device has no collapse rates");
  if (device.pulse_resolution > 0.0) {
    require(duration / segments >= device.pulse_resolution * (1 - 1e-12),
            "ground: segment width T/n is below the device pulse resolution");
  }
}

double RunResult::mean_energy() const {
  if (restarts.empty()) return energy;
  double s = 0.0;
  for (const auto& r : restarts) s += r.energy;
  return s / static_cast<double>(restarts.size());
}

double RunResult::std_energy() const {
  if (restarts.size() < 2) return 0.0;
  const double mu = mean_energy();
  double s = 0.0;
  for (const auto& r : restarts) s += (r.energy - mu) * (r.energy - mu);
  return std::sqrt(s / static_cast<double>(restarts.size() - 1));
}

GroundObjective::GroundObjective(const GroundStateProblem& problem)
    : problem_(problem),
      layout_{problem.device.n_qubits(), problem.segments, problem.mode},
      propagator_(problem.device, problem.propagation),
      observable_(problem.target, problem.device),
      initial_(basis_state(problem.device, problem.initial_bits)) {
  problem_.validate();
  if (problem_.noisy) observable_matrix_ = observable_.matrix();
}

std::pair<RVector, RVector> GroundObjective::bounds() const { return layout_.bounds(problem_.device); }

double GroundObjective::value(const RVector& x) const {
  const PulseSchedule s = layout_.unpack(x, problem_.duration);
  if (problem_.noisy) {
    return observable_.expectation(propagator_.propagate(DensityMatrix::pure(initial_), s).rho);
  }
  return observable_.expectation(propagator_.propagate(initial_, s).amplitudes);
}

double GroundObjective::operator()(const RVector& x, RVector& grad, GradientMethod method) const {
  if (method == GradientMethod::kCentralDifference) {
    grad = central_difference_gradient([this](const RVector& p) { return value(p); }, x);
    return value(x);
  }
  const PulseSchedule s = layout_.unpack(x, problem_.duration);
  if (problem_.noisy) {
    DensityMatrix out;
    grad = propagator_.gradient(DensityMatrix::pure(initial_), s, layout_, observable_matrix_, &out);
    return observable_.expectation(out.rho);
  }
  QuantumState out;
  grad = propagator_.gradient(initial_, s, layout_, [this](const CVector& psi) { return observable_.apply(psi); },
                              &out);
  return observable_.expectation(out.amplitudes);
}

RunResult prepare_ground_state(const GroundStateProblem& problem, const GroundOptions& options) {
  require(options.restarts >= 1, "ground: restarts must be >= 1");
  const GroundObjective objective(problem);
  const auto [lo, hi] = objective.bounds();
  if (options.warm_start) require(options.warm_start->size() == lo.size(), "ground: warm start has the wrong length");

  RunResult result;
  result.problem = problem;
  result.exact_energy = exact_spectrum(problem.target, 1).ground_energy;

  LbfgsbOptions lbfgsb = options.lbfgsb;
  if (options.target_delta_e) lbfgsb.target = result.exact_energy + *options.target_delta_e;

  std::vector<std::optional<OptResult>> runs(static_cast<std::size_t>(options.restarts));
  std::atomic<int> first_success{std::numeric_limits<int>::max()};
  parallel_for(options.restarts, options.workers, [&](int r) {
    if (options.stop_on_success && r > first_success.load()) return;
    const RVector x0 = (r == 0 && options.warm_start) ? *options.warm_start
                                                      : random_init(lo, hi, restart_seed(options.seed, r));
    OptResult run = minimize_lbfgsb(
        [&](const RVector& x, RVector& g) { return objective(x, g, options.gradient); }, x0, lo, hi, lbfgsb);
    if (options.target_delta_e && std::abs(run.value - result.exact_energy) <= *options.target_delta_e) {
      int cur = first_success.load();
      while (r < cur && !first_success.compare_exchange_weak(cur, r)) {
      }
    }
    runs[static_cast<std::size_t>(r)] = std::move(run);
  });

  const int last = options.stop_on_success ? std::min(first_success.load(), options.restarts - 1) : options.restarts - 1;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= last; ++r) {
    const auto& run = runs[static_cast<std::size_t>(r)];
    if (!run) continue;
    RestartRecord rec;
    rec.restart = r;
    rec.seed = restart_seed(options.seed, r);
    rec.energy = run->value;
    rec.delta_e = std::abs(run->value - result.exact_energy);
    rec.iterations = run->iterations;
    rec.evaluations = run->evaluations;
    rec.converged = run->converged;
    rec.reason = run->reason;
    result.restarts.push_back(rec);
    if (run->value < best) {
      best = run->value;
      result.best_restart = r;
      result.params = run->x;
      result.trace = run->trace;
      result.converged = run->converged;
    }
  }
  result.energy = best;
  result.delta_e = std::abs(best - result.exact_energy);
  result.schedule = objective.layout().unpack(result.params, problem.duration);

  const double bound = problem.device.amp_bound;
  const RMatrix& amps = result.schedule.amplitudes;
  result.bang_bang_fraction =
      static_cast<double>((amps.array().abs() >= 0.95 * bound).count()) / static_cast<double>(amps.size());
  result.prep_x_gates = static_cast<int>(std::count(problem.initial_bits.begin(), problem.initial_bits.end(), '1'));
  result.prep_time_ns = result.prep_x_gates * problem.device.gate_times.single_qubit;
  if (options.record_trajectory) record_trajectory(result);
  return result;
}

void record_trajectory(RunResult& result) {
  const GroundStateProblem& p = result.problem;
  const PulsePropagator prop(p.device, p.propagation);
  const QuditSpace& space = prop.space();
  const int top = p.device.levels - 1;
  result.leakage_trace.clear();
  result.probabilities.clear();
  const QuantumState start = basis_state(p.device, p.initial_bits);
  if (p.noisy) {
    const DensityTrajectory traj = prop.trajectory(DensityMatrix::pure(start), result.schedule);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const DensityMatrix rho{traj.lab_states[k], Frame::kLab};
      const Leakage l = leakage(rho, p.device);
      double topp = 0.0;
      if (top >= 2) {
        const RVector pop = rho.rho.diagonal().real();
        for (Eigen::Index i = 0; i < space.dim(); ++i)
          for (int q = 0; q < space.n_qudits(); ++q)
            if (space.level(i, q) == top) {
              topp += pop(i);
              break;
            }
      }
      result.leakage_trace.push_back({traj.times[k], l.per_qubit, l.total, topp});
    }
    result.final_leakage = leakage(DensityMatrix{traj.lab_states.back(), Frame::kLab}, p.device);
    return;
  }
  const Trajectory traj = prop.trajectory(start, result.schedule);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const Leakage l = leakage(QuantumState{traj.lab_states[k], Frame::kLab}, p.device);
    const double topp = top >= 2 ? population_at_or_above(traj.lab_states[k], space, top) : 0.0;
    result.leakage_trace.push_back({traj.times[k], l.per_qubit, l.total, topp});
  }
  result.final_leakage = leakage(QuantumState{traj.lab_states.back(), Frame::kLab}, p.device);
  result.probabilities = probability_trace(traj, space);
}

}  // namespace qoc
