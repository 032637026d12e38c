// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Pass criterion numbers as arguments to
// run a subset, e.g. `qoc_acceptance 1 5 6`.
//
// Tolerances are pinned below and must not be edited to make a run pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qoc/circuit.hpp"
#include "qoc/experiments.hpp"
#include "qoc/propagation.hpp"
#include "qoc/vqt.hpp"

using namespace qoc;

namespace {

// Criterion 1
constexpr double kWeightTol = 5e-3;
// Criterion 2
constexpr double kGroundTol = 1e-3;
constexpr int kGroundRestarts = 10;
// Criterion 3
constexpr double kMet3Target = 53.0;
constexpr double kMet3Tol = 0.5;
constexpr double kMet4AllTarget = 101.0;
constexpr double kMet4NnTarget = 181.0;
constexpr double kMet4RelTol = 0.15;
// Criterion 4
constexpr double kLeak200Lo = 0.20, kLeak200Hi = 0.35;
constexpr double kLeak020Max = 0.10;
constexpr double kTopLevelMax = 1e-3;
constexpr double kFinalLeakMax = 1e-2;
// Criterion 5
constexpr double kDurationRelTol = 0.05;
constexpr double kSpeedupRelTol = 0.10;
// Criterion 6
constexpr double kGradRelTol = 1e-5;
constexpr double kFrameOverlapTol = 1e-6;
constexpr double kOrderRatioLo = 3.4, kOrderRatioHi = 4.6;  // ~4 for second order
constexpr double kLindbladPureTol = 1e-8;
constexpr double kDampingTol = 1e-6;
// Criterion 7
constexpr double kNoisyDeltaE = 1e-2;
constexpr double kNoiseSigmas = 2.0;
// Criterion 8
constexpr double kVqtRel = 0.05, kVqtAbs = 0.02;
constexpr double kVqtBoundSlack = 1e-9;
// Criterion 9
constexpr double kVarianceMinDuration = 10.0;

struct Report {
  int passed = 0;
  int failed = 0;

  void line(int id, bool ok, const std::string& what) {
    std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << what << std::endl;
    (ok ? passed : failed) += 1;
  }
};

std::string num(double x, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

void note(const std::string& s) { std::cout << "  " << s << std::endl; }

SpinHamiltonian schwinger(int sites, double theta = 0.5, double spacing = 0.1) {
  SchwingerParams sp;
  sp.sites = sites;
  sp.theta = theta;
  sp.spacing = spacing;
  return build_schwinger(sp);
}

GroundStateProblem falcon_problem(int sites, const std::string& preset, int levels, double duration) {
  GroundStateProblem p;
  p.target = schwinger(sites);
  p.device = device_preset(preset).restricted(sites).with_levels(levels);
  p.initial_bits = mass_eigenstate(p.target);
  p.duration = duration;
  return p;
}

GroundOptions search_options() {
  GroundOptions o;
  o.restarts = kGroundRestarts;
  o.target_delta_e = kGroundTol;
  o.stop_on_success = true;
  o.workers = default_workers();
  return o;
}

// ---------------------------------------------------------------------------

void criterion1(Report& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::map<std::string, double> w3{{"001", 0.223}, {"010", 0.531}, {"100", 0.246}};
  const std::map<std::string, double> w4{{"0011", 0.055}, {"0101", 0.299}, {"0110", 0.202},
                                         {"1001", 0.202}, {"1010", 0.205}, {"1100", 0.038}};
  double worst = 0.0;
  for (const auto& [sites, ref] : {std::pair{3, w3}, std::pair{4, w4}}) {
    const SpectrumResult s = exact_spectrum(schwinger(sites), 1);
    for (const auto& [bits, p] : ref) {
      const auto it = s.ground_probabilities.find(bits);
      worst = std::max(worst, std::abs((it == s.ground_probabilities.end() ? 0.0 : it->second) - p));
    }
    double listed = 0.0;
    for (const auto& [bits, p] : s.ground_probabilities)
      if (!ref.contains(bits)) listed = std::max(listed, p);
    worst = std::max(worst, listed);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.line(1, worst <= kWeightTol && secs < 1.0,
           "exact ground-state weights, max deviation " + num(worst, 3) + " (tol " + num(kWeightTol) + "), " +
               num(secs, 3) + " s");
}

// Keeps the d = 4 run for the leakage study.
std::optional<RunResult> g_run_d4;

void criterion2(Report& rep) {
  bool ok = true;
  std::string detail;
  for (int levels : {2, 4}) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = prepare_ground_state(falcon_problem(3, "falcon4q_nn", levels, 53.0), search_options());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    note("d=" + std::to_string(levels) + ": dE " + num(r.delta_e, 3) + " after " + std::to_string(r.restarts.size()) +
         " restart(s), " + num(secs, 3) + " s");
    ok = ok && r.delta_e <= kGroundTol;
    detail += "d=" + std::to_string(levels) + " dE " + num(r.delta_e, 3) + "; ";
    if (levels == 4) g_run_d4 = r;
  }
  rep.line(2, ok, "3-site ground state at T=53 ns within " + std::to_string(kGroundRestarts) + " restarts: " + detail +
                      "tol " + num(kGroundTol));
}

MetResult met_search(const GroundStateProblem& p, double t_min, double t_max, double coarse, double resolution) {
  MetOptions o;
  o.t_min = t_min;
  o.t_max = t_max;
  o.coarse_step = coarse;
  o.resolution = resolution;
  o.tol = kGroundTol;
  o.ground = search_options();
  return find_met(p, o, [](const MetAttempt& a) {
    note("  T=" + num(a.duration) + " ns dE " + num(a.best_delta_e, 3) + (a.success ? " ok" : ""));
  });
}

void criterion3(Report& rep) {
  // Sweeps start well below the reference values so the search measures the
  // MET rather than confirming a guess; d = 2 keeps the 4-site runs tractable.
  note("3-site nearest-neighbour MET sweep (d=2)");
  const MetResult m3 = met_search(falcon_problem(3, "falcon4q_nn", 2, 1.0), 10.0, 120.0, 5.0, 0.5);
  note("4-site all-to-all MET sweep (d=2)");
  const MetResult all = met_search(falcon_problem(4, "falcon4q_all", 2, 1.0), 20.0, 400.0, 20.0, 4.0);
  note("4-site nearest-neighbour MET sweep (d=2)");
  const MetResult nn = met_search(falcon_problem(4, "falcon4q_nn", 2, 1.0), 20.0, 400.0, 20.0, 4.0);

  const bool ok3 = m3.found && std::abs(m3.met - kMet3Target) <= kMet3Tol;
  const bool order = all.found && nn.found && all.met < nn.met;
  const bool ok_all = all.found && std::abs(all.met - kMet4AllTarget) <= kMet4RelTol * kMet4AllTarget;
  const bool ok_nn = nn.found && std::abs(nn.met - kMet4NnTarget) <= kMet4RelTol * kMet4NnTarget;
  auto show = [](const MetResult& m) { return m.found ? num(m.met) + " ns" : std::string("not found"); };
  rep.line(3, ok3 && order && ok_all && ok_nn,
           "MET 3-site " + show(m3) + " (target " + num(kMet3Target) + " +/- " + num(kMet3Tol) + "), 4-site all-to-all " +
               show(all) + " (target " + num(kMet4AllTarget) + " +/- 15%), nearest-neighbour " + show(nn) +
               " (target " + num(kMet4NnTarget) + " +/- 15%), ordering " + (order ? "holds" : "violated"));
}

void criterion4(Report& rep) {
  if (!g_run_d4) {
    const RunResult r = prepare_ground_state(falcon_problem(3, "falcon4q_nn", 4, 53.0), search_options());
    g_run_d4 = r;
  }
  const RunResult& r = *g_run_d4;
  const PulsePropagator prop(r.problem.device, r.problem.propagation);
  const Trajectory tr = prop.trajectory(basis_state(r.problem.device, r.problem.initial_bits), r.schedule);
  const QuditSpace& space = prop.space();
  const Eigen::Index i200 = space.index_of({2, 0, 0});
  const Eigen::Index i020 = space.index_of({0, 2, 0});
  double peak200 = 0.0, peak020 = 0.0, top = 0.0;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const CVector& psi = tr.lab_states[k];
    top = std::max(top, population_at_or_above(psi, space, 3));
    if (tr.times[k] >= 5.0 && tr.times[k] <= 40.0) {
      peak200 = std::max(peak200, std::norm(psi(i200)));
      peak020 = std::max(peak020, std::norm(psi(i020)));
    }
  }
  const double final_leak = leakage(QuantumState{tr.lab_states.back(), Frame::kLab}, r.problem.device).total;
  const bool ok = peak200 >= kLeak200Lo && peak200 <= kLeak200Hi && peak020 <= kLeak020Max && top < kTopLevelMax &&
                  final_leak < kFinalLeakMax;
  rep.line(4, ok,
           "d=4 3-site leakage: peak |200> " + num(peak200, 3) + " in [" + num(kLeak200Lo) + ", " + num(kLeak200Hi) +
               "], peak |020> " + num(peak020, 3) + " (max " + num(kLeak020Max) + "), top level " + num(top, 3) +
               " (max " + num(kTopLevelMax) + "), final leakage " + num(final_leak, 3) + " (max " +
               num(kFinalLeakMax) + "), run dE " + num(r.delta_e, 3));
}

void criterion5(Report& rep) {
  const DeviceSpec falcon3 = device_preset("falcon4q_nn").restricted(3);
  const DeviceSpec falcon4 = device_preset("falcon4q_nn");
  const DeviceSpec osaka = device_preset("ibm_osaka");
  std::vector<std::string> bad;
  auto exact = [&](const std::string& what, int got, int want) {
    note(what + ": " + std::to_string(got) + " (expected " + std::to_string(want) + ")");
    if (got != want) bad.push_back(what);
  };
  auto within = [&](const std::string& what, double got, double want, double rel) {
    note(what + ": " + num(got, 5) + " (expected " + num(want, 5) + " +/- " + num(100 * rel) + "%)");
    if (std::abs(got - want) > rel * want) bad.push_back(what);
  };

  const auto b3 = gate_baselines(schwinger(3), falcon3);
  exact("3-site Trotter gates", b3[0].gates, 34);
  exact("3-site Trotter depth", b3[0].depth, 24);
  exact("3-site Trotter CNOTs", b3[0].two_qubit, 10);
  const auto b4 = gate_baselines(schwinger(4), falcon4);
  exact("4-site Trotter gates", b4[0].gates, 55);

  const Circuit t2 = trotter_layer(schwinger(2), 1.0);
  const CriticalPath cp2 = critical_path(t2, GateTimeTable::from(osaka));
  exact("2-site Trotter single-qubit gates", t2.single_qubit_count(), 12);
  exact("2-site Trotter sequential single-qubit gates", cp2.single_qubit, 7);
  exact("2-site Trotter CNOTs", t2.two_qubit_count(), 4);
  const Circuit s2 = strongly_entangling_layer(2, RMatrix::Constant(2, 3, 0.3));
  const CriticalPath sp2 = critical_path(s2, GateTimeTable::from(osaka));
  exact("2-site entangling-layer single-qubit gates", s2.single_qubit_count(), 6);
  exact("2-site entangling-layer sequential single-qubit gates", sp2.single_qubit, 3);
  exact("2-site entangling-layer CNOTs", s2.two_qubit_count(), 2);

  within("3-site Trotter duration (us)", b3[0].duration_ns / 1000, 7.0, kDurationRelTol);
  within("4-site Trotter duration (us)", b4[0].duration_ns / 1000, 7.9, kDurationRelTol);
  within("3-site entangling-layer duration (us)", b3[1].duration_ns / 1000, 2.0, kDurationRelTol);
  within("2-site Trotter duration on ibm_osaka (us)", cp2.duration_ns / 1000, 3.14, kDurationRelTol);

  const SpeedupReport r3 = speedup_report(53.0, mass_eigenstate(schwinger(3)), falcon3, b3);
  const SpeedupReport r4 = speedup_report(181.0, mass_eigenstate(schwinger(4)), falcon4, b4);
  within("3-site Trotter speedup incl. preparation", r3.rows[0].speedup, 40.0, kSpeedupRelTol);
  within("3-site entangling-layer speedup incl. preparation", r3.rows[1].speedup, 11.0, kSpeedupRelTol);
  within("4-site Trotter speedup vs MET", r4.rows[0].speedup_met_only, 43.0, kSpeedupRelTol);
  note("4-site Trotter speedup incl. 2 X-gate preparation: " + num(r4.rows[0].speedup, 4));

  std::string failed;
  for (const auto& b : bad) failed += (failed.empty() ? "" : ", ") + b;
  rep.line(5, bad.empty(), "gate baselines" + (bad.empty() ? std::string(" all match") : ": off for " + failed));
}

PulseSchedule random_schedule(const DeviceSpec& spec, int segments, double duration, std::uint64_t seed,
                              bool phases) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PulseSchedule s = PulseSchedule::zeros(spec.n_qubits(), segments, duration);
  for (int q = 0; q < spec.n_qubits(); ++q) {
    for (int k = 0; k < segments; ++k) s.amplitudes(q, k) = spec.amp_bound * u(rng);
    s.detunings(q) = mhz_to_rad_per_ns(20.0) * u(rng);
  }
  if (phases) {
    s.phases = RMatrix(spec.n_qubits(), segments);
    for (int q = 0; q < spec.n_qubits(); ++q)
      for (int k = 0; k < segments; ++k) (*s.phases)(q, k) = std::numbers::pi * u(rng);
  }
  return s;
}

void criterion6(Report& rep) {
  std::vector<std::string> parts;
  bool ok = true;

  // (a) adjoint vs central differences on random 2-qubit instances.
  double worst_grad = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const DeviceSpec dev = device_preset("falcon4q_nn").restricted(2).with_levels(seed == 3 ? 3 : 2);
    std::mt19937_64 rng(100 + seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SpinHamiltonian h(2);
    for (const char* w : {"ZI", "IZ", "XX", "YY", "ZZ", "XY"}) h.add(u(rng), w);
    const EmbeddedObservable obs(h, dev);
    const PulsePropagator prop(dev);
    const PhaseMode mode = seed == 2 ? PhaseMode::kSegmentPhases : PhaseMode::kDetuning;
    const ParamLayout layout{2, 6, mode};
    const PulseSchedule s = random_schedule(dev, 6, 15.0, seed, mode == PhaseMode::kSegmentPhases);
    const QuantumState start = basis_state(dev, "01");
    const RVector x = layout.pack(s);
    const RVector g =
        prop.gradient(start, layout.unpack(x, s.duration), layout, [&](const CVector& psi) { return obs.apply(psi); });
    const RVector fd = central_difference_gradient(
        [&](const RVector& y) { return obs.expectation(prop.propagate(start, layout.unpack(y, s.duration)).amplitudes); },
        x);
    worst_grad = std::max(worst_grad, (g - fd).norm() / fd.norm());
  }
  ok = ok && worst_grad <= kGradRelTol;
  parts.push_back("(a) gradient rel. error " + num(worst_grad, 3));

  // (b) lab vs rotating frame.
  {
    const DeviceSpec dev = device_preset("falcon4q_nn").restricted(2).with_levels(3);
    const PulseSchedule s = random_schedule(dev, 5, 10.0, 7, false);
    const QuantumState start = basis_state(dev, "10");
    const CVector rot = PulsePropagator(dev, {Frame::kRotating, 0.01}).propagate(start, s).amplitudes;
    const CVector lab = PulsePropagator(dev, {Frame::kLab, 0.0005}).propagate(start, s).amplitudes;
    const double overlap = std::norm(rot.dot(lab));
    ok = ok && overlap > 1.0 - kFrameOverlapTol;
    parts.push_back("(b) frame overlap 1-" + num(1.0 - overlap, 3));
  }

  // (c) substep halving.
  {
    const DeviceSpec dev = device_preset("falcon4q_nn").restricted(2).with_levels(3);
    const PulseSchedule s = random_schedule(dev, 2, 10.0, 9, false);
    const QuantumState start = basis_state(dev, "11");
    const CVector ref = PulsePropagator(dev, {Frame::kRotating, 0.0025}).propagate(start, s).amplitudes;
    auto err = [&](double h) {
      return (PulsePropagator(dev, {Frame::kRotating, h}).propagate(start, s).amplitudes - ref).norm();
    };
    const double ratio = err(0.2) / err(0.1);
    ok = ok && ratio >= kOrderRatioLo && ratio <= kOrderRatioHi;
    parts.push_back("(c) halving ratio " + num(ratio, 4));
  }

  // (d) first-order Trotter error under theta halving.
  {
    const SpinHamiltonian h = schwinger(3);
    CVector psi = CVector::Zero(8);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (Eigen::Index i = 0; i < 8; ++i) psi(i) = Complex(n(rng), n(rng));
    psi.normalize();
    const CMatrix hm = pauli_matrix(h);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hm);
    auto exact = [&](double theta) {
      CVector ph(8);
      for (Eigen::Index i = 0; i < 8; ++i) ph(i) = std::exp(-kI * theta * es.eigenvalues()(i));
      return CVector(es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * psi);
    };
    auto err = [&](double theta) { return (simulate_circuit(trotter_layer(h, theta), psi) - exact(theta)).norm(); };
    const double ratio = err(0.02) / err(0.01);
    ok = ok && ratio >= kOrderRatioLo && ratio <= kOrderRatioHi;
    parts.push_back("(d) Trotter ratio " + num(ratio, 4));
  }

  // (e) Lindblad checks.
  {
    const DeviceSpec dev = device_preset("falcon4q_nn").restricted(2).with_levels(3);
    const PulseSchedule s = random_schedule(dev, 5, 12.0, 13, false);
    const PulsePropagator prop(dev);
    const QuantumState psi = prop.propagate(basis_state(dev, "10"), s);
    const DensityMatrix rho = prop.propagate(DensityMatrix::pure(basis_state(dev, "10")), s);
    const double pure_err = (rho.rho - psi.amplitudes * psi.amplitudes.adjoint()).cwiseAbs().maxCoeff();

    DeviceSpec one = device_preset("ibm_kyoto").restricted(1).with_levels(2);
    const double g1 = (*one.collapse)[0].gamma1;
    double decay_err = 0.0;
    for (double t : {1000.0, 20000.0, 100000.0}) {
      const DensityMatrix out =
          PulsePropagator(one, {Frame::kRotating, 10.0}).propagate(DensityMatrix::pure(basis_state(one, "1")),
                                                                   PulseSchedule::zeros(1, 1, t));
      decay_err = std::max(decay_err, std::abs(out.rho(1, 1).real() - std::exp(-2 * g1 * t)));
    }
    ok = ok && pure_err <= kLindbladPureTol && decay_err <= kDampingTol;
    parts.push_back("(e) Lindblad vs pure " + num(pure_err, 3) + ", damping error " + num(decay_err, 3));
  }

  std::string detail;
  for (const auto& p : parts) detail += (detail.empty() ? "" : "; ") + p;
  rep.line(6, ok, "numerical kernels: " + detail);
}

void criterion7(Report& rep) {
  // Lindblad optimizations at d = 4 cost ~10 min per restart on one core;
  // the gate runs the three-level truncation of the kyoto preset.
  NoisyGroundOptions o;
  o.model.sites = 2;
  o.model.spacing = 0.5;
  o.thetas = {0.0, std::numbers::pi / 4, std::numbers::pi / 2, 3 * std::numbers::pi / 4};
  o.ground.restarts = 3;
  o.ground.workers = default_workers();
  const DeviceSpec kyoto = device_preset("ibm_kyoto").with_levels(3);
  bool ok = true;
  std::string detail;
  noisy_ground_scan(kyoto, o, [&](const NoisyGroundPoint& p) {
    const double dev = std::abs(p.noisy - p.noiseless);
    const bool good = p.noiseless_delta_e <= kNoisyDeltaE && p.noisy_delta_e <= kNoisyDeltaE &&
                      dev <= kNoiseSigmas * p.noisy_std;
    note("theta=" + num(p.theta, 4) + ": exact " + num(p.exact) + ", noiseless " + num(p.noiseless) + " (dE " +
         num(p.noiseless_delta_e, 3) + "), noisy " + num(p.noisy) + " (dE " + num(p.noisy_delta_e, 3) +
         "), |noisy-noiseless| " + num(dev, 3) + " vs sigma " + num(p.noisy_std, 3));
    ok = ok && good;
    detail += num(p.theta, 3) + ":" + (good ? "ok" : "off") + " ";
  });
  rep.line(7, ok, "noisy ground states on ibm_kyoto (d=3, 3 restarts), dE tol " + num(kNoisyDeltaE) + ", deviation <= " +
                      num(kNoiseSigmas) + " sigma: " + detail);
}

void criterion8(Report& rep) {
  VqtConfig v;
  v.target = schwinger(2);
  v.device = device_preset("falcon4q_nn").restricted(2).with_levels(2);
  v.t1 = 50.0;
  v.t2 = 50.0;
  v.restarts = 20;
  v.workers = default_workers();
  bool ok = true;
  std::string detail;
  for (double beta : {0.5, 1.0, 2.0, 5.0}) {
    v.beta = beta;
    const ThermalResult r = prepare_thermal(v);
    const double fx = *r.exact.free_energy;
    const double band_f = kVqtRel * std::abs(fx) + kVqtAbs;
    const double band_e = kVqtRel * std::abs(r.exact.energy) + kVqtAbs;
    const double band_s = kVqtRel * std::abs(r.exact.entropy) + kVqtAbs;
    bool bound = true;
    for (const auto& x : r.restarts) bound = bound && x.free_energy >= fx - kVqtBoundSlack;
    const bool good = r.mean_free_energy >= fx - kVqtBoundSlack && r.mean_free_energy <= fx + band_f &&
                      std::abs(r.mean_energy - r.exact.energy) <= band_e &&
                      std::abs(r.mean_entropy - r.exact.entropy) <= band_s && bound;
    note("beta=" + num(beta) + ": F " + num(r.mean_free_energy) + " vs " + num(fx) + ", E " + num(r.mean_energy) +
         " vs " + num(r.exact.energy) + ", S " + num(r.mean_entropy) + " vs " + num(r.exact.entropy) +
         (bound ? "" : ", variational bound violated"));
    ok = ok && good;
    detail += num(beta) + ":" + (good ? "ok" : "off") + " ";
  }
  rep.line(8, ok, "thermal states (2-site, 20 restarts) track the dense oracle: " + detail);
}

void criterion9(Report& rep) {
  VarianceOptions o;
  o.samples = 100;
  o.workers = default_workers();
  const std::vector<int> sites{2, 3, 4};
  const std::vector<double> durations{5.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0};
  const auto cells = variance_scan(device_preset("falcon4q_nn").with_levels(2), [](int n) { return schwinger(n); },
                                   sites, durations, o);
  bool positive = true;
  std::vector<double> last;
  for (const auto& c : cells) {
    if (c.duration >= kVarianceMinDuration) positive = positive && c.variance > 0.0;
    if (c.duration == durations.back()) last.push_back(c.variance);
  }
  bool rising = true;
  for (std::size_t i = 1; i < last.size(); ++i) rising = rising && last[i] >= last[i - 1];
  std::string at_max;
  for (std::size_t i = 0; i < last.size(); ++i) at_max += (i ? " / " : "") + num(last[i], 4);
  rep.line(9, positive && rising,
           "variance landscape (d=2, 100 samples): all cells positive " + std::string(positive ? "yes" : "no") +
               ", at T=" + num(durations.back()) + " ns N=2/3/4 gives " + at_max);
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::function<void(Report&)>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                           criterion6, criterion7, criterion8, criterion9};
  Report rep;
  for (int id = 1; id <= static_cast<int>(criteria.size()); ++id) {
    if (!only.empty() && !only.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[static_cast<std::size_t>(id - 1)](rep);
    } catch (const std::exception& e) {
      rep.line(id, false, std::string("error: ") + e.what());
    }
    note("(" + num(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 4) + " s)");
  }
  std::cout << rep.passed << " passed, " << rep.failed << " failed" << std::endl;
  return rep.failed == 0 ? 0 : 1;
}
