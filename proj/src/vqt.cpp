#include "qoc/vqt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qoc {

void VqtConfig::validate() const {
  device.validate();
  require(target.n_qubits() == device.n_qubits(), "thermal: target Hamiltonian and device qubit counts differ");
  require(beta > 0.0 && std::isfinite(beta), "thermal: beta must be > 0");
  require(t1 > 0.0 && t2 > 0.0, "thermal: pulse durations T1 and T2 must be > 0");
  require(segments >= 1, "thermal: segment count must be >= 1");
  require(restarts >= 1, "thermal: restarts must be >= 1");
}

std::map<std::string, double> EnsembleDistribution::as_map(int n_qubits) const {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < p.size(); ++i) out[bitstring(i, n_qubits)] = p[i];
  return out;
}

namespace {

// Computational populations of `psi` and their total.
std::pair<std::vector<double>, double> populations(const CVector& psi, const QuditSpace& space) {
  const auto& idx = space.computational_indices();
  std::vector<double> q(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) q[i] = std::norm(psi(idx[i]));
  return {q, std::accumulate(q.begin(), q.end(), 0.0)};
}

EnsembleDistribution normalized(std::vector<double> q, double total) {
  EnsembleDistribution d;
  d.leaked = std::max(0.0, 1.0 - total);
  const double z = std::max(total, std::numeric_limits<double>::min());
  for (double& v : q) v /= z;
  d.p = std::move(q);
  return d;
}

double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

}  // namespace

EnsembleDistribution ensemble_distribution(const PulseSchedule& schedule1, const DeviceSpec& spec,
                                           const PropagationOptions& options) {
  const PulsePropagator prop(spec, options);
  const QuantumState out = prop.propagate(basis_state(spec, std::string(spec.n_qubits(), '0')), schedule1);
  auto [q, total] = populations(out.amplitudes, prop.space());
  return normalized(std::move(q), total);
}

double shannon_entropy(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p) {
    require(v >= -1e-15, "entropy: negative probability");
    if (v > 0.0) s -= v * std::log(v);
  }
  return s;
}

double shannon_entropy(const std::map<std::string, double>& p) {
  std::vector<double> v;
  for (const auto& [k, x] : p) v.push_back(x);
  return shannon_entropy(v);
}

double ensemble_energy(const std::vector<double>& p, const PulseSchedule& schedule2, const DeviceSpec& spec,
                       const SpinHamiltonian& h, const PropagationOptions& options) {
  const int n = spec.n_qubits();
  require(h.n_qubits() == n, "ensemble energy: Hamiltonian and device qubit counts differ");
  require(p.size() == (std::size_t{1} << n), "ensemble energy: distribution length must be 2^N");
  const PulsePropagator prop(spec, options);
  const EmbeddedObservable obs(h, spec);
  double e = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    e += p[i] * obs.expectation(prop.propagate(basis_state(spec, bitstring(i, n)), schedule2).amplitudes);
  }
  return e;
}

ThermalObjective::ThermalObjective(const VqtConfig& config)
    : config_(config),
      layout_{config.device.n_qubits(), config.segments, PhaseMode::kDetuning},
      propagator_(config.device, config.propagation),
      observable_(config.target, config.device) {
  config_.validate();
}

std::pair<RVector, RVector> ThermalObjective::bounds() const {
  const auto [lo, hi] = layout_.bounds(config_.device);
  RVector l(size()), h(size());
  l << lo, lo;
  h << hi, hi;
  return {l, h};
}

PulseSchedule ThermalObjective::schedule1(const RVector& x) const {
  return layout_.unpack(x.head(layout_.size()), config_.t1);
}

PulseSchedule ThermalObjective::schedule2(const RVector& x) const {
  return layout_.unpack(x.tail(layout_.size()), config_.t2);
}

ThermalObjective::Terms ThermalObjective::evaluate(const RVector& x) const {
  require(x.size() == size(), "thermal: parameter vector has the wrong length");
  const int n = config_.device.n_qubits();
  const QuantumState psi1 =
      propagator_.propagate(basis_state(config_.device, std::string(static_cast<std::size_t>(n), '0')), schedule1(x));
  auto [q, total] = populations(psi1.amplitudes, propagator_.space());
  Terms t{0.0, 0.0, 0.0, normalized(std::move(q), total)};
  const PulseSchedule s2 = schedule2(x);
  for (std::size_t i = 0; i < t.distribution.p.size(); ++i) {
    const double pi = t.distribution.p[i];
    if (pi == 0.0) continue;
    t.energy += pi * observable_.expectation(
                         propagator_.propagate(basis_state(config_.device, bitstring(i, n)), s2).amplitudes);
  }
  t.entropy = shannon_entropy(t.distribution.p);
  t.free_energy = t.energy - t.entropy / config_.beta;
  return t;
}

double ThermalObjective::operator()(const RVector& x, RVector& grad) const {
  require(x.size() == size(), "thermal: parameter vector has the wrong length");
  const int n = config_.device.n_qubits();
  const std::size_t states = std::size_t{1} << n;
  const Eigen::Index half = layout_.size();
  grad.setZero(size());

  // Circuit 2: energies of every basis-state image and their gradients.
  const PulseSchedule s2 = schedule2(x);
  std::vector<double> e(states);
  std::vector<RVector> de(states);
  for (std::size_t i = 0; i < states; ++i) {
    QuantumState out;
    de[i] = propagator_.gradient(basis_state(config_.device, bitstring(i, n)), s2, layout_,
                                 [this](const CVector& psi) { return observable_.apply(psi); }, &out);
    e[i] = observable_.expectation(out.amplitudes);
  }

  // Circuit 1: F depends on the final state through the renormalized populations.
  // With c_i = dF/dp_i, dF/dq_j = (c_j - sum_i p_i c_i) / Q.
  const QuditSpace& space = propagator_.space();
  const double beta = config_.beta;
  std::vector<double> p;
  double value = 0.0;
  const StateCotangent cot = [&](const CVector& psi) {
    auto [q, total] = populations(psi, space);
    const double z = std::max(total, std::numeric_limits<double>::min());
    p = normalized(q, total).p;
    std::vector<double> c(states);
    double mean_c = 0.0, energy = 0.0;
    for (std::size_t i = 0; i < states; ++i) {
      c[i] = e[i] + (safe_log(p[i]) + 1.0) / beta;
      mean_c += p[i] * c[i];
      energy += p[i] * e[i];
    }
    value = energy - shannon_entropy(p) / beta;
    CVector g = CVector::Zero(psi.size());
    const auto& idx = space.computational_indices();
    for (std::size_t i = 0; i < states; ++i) g(idx[i]) = ((c[i] - mean_c) / z) * psi(idx[i]);
    return g;
  };
  grad.head(half) = propagator_.gradient(basis_state(config_.device, std::string(static_cast<std::size_t>(n), '0')),
                                         schedule1(x), layout_, cot);
  for (std::size_t i = 0; i < states; ++i) grad.tail(half) += p[i] * de[i];
  return value;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double mu = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mu, 0.0};
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return {mu, std::sqrt(s / static_cast<double>(v.size() - 1))};
}

}  // namespace

ThermalResult prepare_thermal(const VqtConfig& config, std::uint64_t seed) {
  config.validate();
  const ThermalObjective objective(config);
  const auto [lo, hi] = objective.bounds();

  ThermalResult result;
  result.beta = config.beta;
  result.exact = thermal_observables(config.target, config.beta);
  const double f_exact = *result.exact.free_energy;

  std::vector<OptResult> runs(static_cast<std::size_t>(config.restarts));
  parallel_for(config.restarts, config.workers, [&](int r) {
    runs[static_cast<std::size_t>(r)] =
        minimize_lbfgsb([&](const RVector& x, RVector& g) { return objective(x, g); },
                        random_init(lo, hi, restart_seed(seed, r)), lo, hi, config.lbfgsb);
  });

  std::vector<double> fs, es, ss;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < config.restarts; ++r) {
    const OptResult& run = runs[static_cast<std::size_t>(r)];
    const auto t = objective.evaluate(run.x);
    VqtRestart rec{r, restart_seed(seed, r), t.free_energy, t.energy, t.entropy, run.iterations, run.reason,
                   t.free_energy >= f_exact - 1e-9};
    result.variational_bound = result.variational_bound && rec.above_exact;
    result.restarts.push_back(rec);
    fs.push_back(t.free_energy);
    es.push_back(t.energy);
    ss.push_back(t.entropy);
    if (t.free_energy < best) {
      best = t.free_energy;
      result.free_energy = t.free_energy;
      result.energy = t.energy;
      result.entropy = t.entropy;
      result.distribution = t.distribution.as_map(config.device.n_qubits());
      result.leaked = t.distribution.leaked;
      result.schedule1 = objective.schedule1(run.x);
      result.schedule2 = objective.schedule2(run.x);
    }
  }
  std::tie(result.mean_free_energy, result.std_free_energy) = mean_std(fs);
  std::tie(result.mean_energy, result.std_energy) = mean_std(es);
  std::tie(result.mean_entropy, result.std_entropy) = mean_std(ss);
  return result;
}

}  // namespace qoc
