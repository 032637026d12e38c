#include "qoc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

namespace qoc {

std::string mass_eigenstate(const SpinHamiltonian& h) {
  const int n = h.n_qubits();
  require(n >= 1 && n <= 20, "mass_eigenstate: unsupported qubit count");
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t idx = 0; idx < (std::size_t{1} << n); ++idx) {
    double e = 0.0;
    for (const auto& t : h.terms()) {
      if (t.word.find_first_of("XY") != std::string::npos) continue;
      const auto [image, phase] = apply_pauli_word(t.word, idx);
      e += t.coefficient * phase.real();
    }
    if (e < best - 1e-12) {
      best = e;
      arg = idx;
    }
  }
  return bitstring(arg, n);
}

namespace {

RunResult run_at(const GroundStateProblem& base, double duration, const MetOptions& options,
                 const std::optional<RVector>& warm) {
  GroundStateProblem p = base;
  p.duration = duration;
  p.segments = segments_for_resolution(duration, base.segments, base.device.pulse_resolution);
  GroundOptions g = options.ground;
  g.target_delta_e = options.tol;
  g.stop_on_success = true;
  g.record_trajectory = false;
  if (warm && warm->size() == ParamLayout{p.device.n_qubits(), p.segments, p.mode}.size()) g.warm_start = warm;
  return prepare_ground_state(p, g);
}

}  // namespace

MetResult find_met(const GroundStateProblem& problem, const MetOptions& options, const MetProgress& progress) {
  require(options.resolution > 0.0, "met: resolution must be > 0");
  require(options.t_min > 0.0 && options.t_min < options.t_max, "met: need 0 < t_min < t_max");
  require(options.resolution >= problem.device.pulse_resolution,
          "met: resolution must be >= the device pulse resolution");
  require(options.tol > 0.0, "met: tolerance must be > 0");

  MetResult out;
  out.resolution = options.resolution;
  const int last = static_cast<int>(std::floor((options.t_max - options.t_min) / options.resolution + 1e-9));
  auto grid = [&](int k) { return options.t_min + k * options.resolution; };
  std::optional<RVector> warm;

  auto attempt = [&](int k) {
    RunResult r = run_at(problem, grid(k), options, options.warm_start ? warm : std::nullopt);
    const bool ok = r.delta_e <= options.tol;
    const MetAttempt a{grid(k), r.delta_e, static_cast<int>(r.restarts.size()), ok};
    out.attempts.push_back(a);
    if (progress) progress(a);
    warm = r.params;
    return std::pair{ok, std::move(r)};
  };

  auto finish = [&](int k, RunResult r) {
    out.found = true;
    out.met = grid(k);
    record_trajectory(r);
    out.best = std::move(r);
    return out;
  };

  if (!options.bisection) {
    const int stride = options.coarse_step > 0.0
                           ? std::max(1, static_cast<int>(std::lround(options.coarse_step / options.resolution)))
                           : 1;
    int prev = -1;
    for (int k = 0; k <= last; k = (k == last) ? last + 1 : std::min(k + stride, last)) {
      auto [ok, r] = attempt(k);
      if (!ok) {
        prev = k;
        continue;
      }
      for (int f = prev + 1; f < k; ++f) {
        auto [ok_f, r_f] = attempt(f);
        if (ok_f) return finish(f, std::move(r_f));
      }
      return finish(k, std::move(r));
    }
    return out;
  }

  auto [ok_hi, r_hi] = attempt(last);
  if (!ok_hi) return out;
  int lo = -1, hi = last;
  RunResult best = std::move(r_hi);
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    auto [ok, r] = attempt(mid);
    if (ok) {
      hi = mid;
      best = std::move(r);
    } else {
      lo = mid;
    }
  }
  return finish(hi, std::move(best));
}

std::optional<CouplingFit> fit_coupling_scan(const std::vector<double>& g, const std::vector<double>& met) {
  require(g.size() == met.size(), "coupling fit: g and MET lists differ in length");
  const std::size_t n = g.size();
  if (n < 3) return std::nullopt;
  const double floor_max = *std::min_element(met.begin(), met.end());
  std::optional<CouplingFit> best;
  double best_sse = std::numeric_limits<double>::infinity();
  const int steps = 400;
  for (int s = 0; s < steps; ++s) {
    const double c = floor_max * (0.999 * s / steps);
    RMatrix a(static_cast<Eigen::Index>(n), 2);
    RVector y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      a(static_cast<Eigen::Index>(i), 0) = 1.0;
      a(static_cast<Eigen::Index>(i), 1) = g[i];
      y(static_cast<Eigen::Index>(i)) = std::log(met[i] - c);
    }
    const RVector coef = a.colPivHouseholderQr().solve(y);
    CouplingFit fit{c, coef(0), coef(1), {}, 0.0};
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = met[i] - (c + std::exp(coef(0) + coef(1) * g[i]));
      fit.residuals.push_back(r);
      sse += r * r;
    }
    fit.rms = std::sqrt(sse / static_cast<double>(n));
    if (sse < best_sse) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

CouplingScan coupling_scan(const GroundStateProblem& problem, const std::vector<double>& g_values, int repeats,
                           const MetOptions& options, const CouplingProgress& progress) {
  require(!g_values.empty(), "coupling-scan: no coupling values given");
  require(repeats >= 1, "coupling-scan: repeats must be >= 1");
  for (double g : g_values) require(g > 0.0 && std::isfinite(g), "coupling-scan: coupling values must be > 0");
  CouplingScan scan;
  for (double g : g_values) {
    CouplingPoint pt;
    pt.g = g;
    GroundStateProblem p = problem;
    p.device = problem.device.with_uniform_coupling(g);
    for (int rep = 0; rep < repeats; ++rep) {
      MetOptions o = options;
      o.ground.seed = options.ground.seed + 1000ULL * static_cast<std::uint64_t>(rep);
      const MetResult m = find_met(p, o);
      if (m.found) {
        pt.mets.push_back(m.met);
      } else {
        ++pt.not_found;
      }
    }
    if (!pt.mets.empty()) {
      pt.mean = std::accumulate(pt.mets.begin(), pt.mets.end(), 0.0) / static_cast<double>(pt.mets.size());
      double s = 0.0;
      for (double v : pt.mets) s += (v - pt.mean) * (v - pt.mean);
      pt.std = pt.mets.size() > 1 ? std::sqrt(s / static_cast<double>(pt.mets.size() - 1)) : 0.0;
    }
    pt.error = std::hypot(pt.std, options.resolution);
    if (progress) progress(pt);
    scan.points.push_back(pt);
  }

  std::vector<double> gs, ms;
  bool all_found = true;
  for (const auto& pt : scan.points) {
    if (pt.mets.empty()) {
      all_found = false;
      continue;
    }
    gs.push_back(pt.g);
    ms.push_back(pt.mean);
  }
  std::vector<std::size_t> order(gs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gs[a] < gs[b]; });
  scan.decreasing = all_found && !order.empty();
  for (std::size_t i = 1; i < order.size(); ++i) scan.decreasing = scan.decreasing && ms[order[i]] <= ms[order[i - 1]];
  scan.fit = fit_coupling_scan(gs, ms);
  return scan;
}

std::vector<VarianceCell> variance_scan(const DeviceSpec& device, const ModelFactory& model,
                                        const std::vector<int>& site_counts, const std::vector<double>& durations,
                                        const VarianceOptions& options,
                                        const std::function<void(const VarianceCell&)>& progress) {
  require(options.samples >= 2, "variance: at least two samples per cell are required");
  require(options.segments >= 1, "variance: segment count must be >= 1");
  std::vector<VarianceCell> cells;
  for (int sites : site_counts) {
    const DeviceSpec dev = device.restricted(sites);
    const SpinHamiltonian h = model(sites);
    const std::string init = mass_eigenstate(h);
    const PulsePropagator prop(dev, options.propagation);
    const EmbeddedObservable obs(h, dev);
    const QuantumState start = basis_state(dev, init);
    for (double t : durations) {
      require(t > 0.0, "variance: durations must be > 0");
      const ParamLayout layout{sites, segments_for_resolution(t, options.segments, dev.pulse_resolution),
                               PhaseMode::kDetuning};
      const auto [lo, hi] = layout.bounds(dev);
      std::vector<double> energies(static_cast<std::size_t>(options.samples));
      parallel_for(options.samples, options.workers, [&](int s) {
        const RVector x = random_init(lo, hi, restart_seed(options.seed, s));
        energies[static_cast<std::size_t>(s)] = obs.expectation(prop.propagate(start, layout.unpack(x, t)).amplitudes);
      });
      const double mean = std::accumulate(energies.begin(), energies.end(), 0.0) / options.samples;
      double var = 0.0;
      for (double e : energies) var += (e - mean) * (e - mean);
      var /= options.samples - 1;
      const VarianceCell cell{sites, t, options.samples, mean, var};
      if (progress) progress(cell);
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<NoisyGroundPoint> noisy_ground_scan(const DeviceSpec& device, const NoisyGroundOptions& options,
                                                const std::function<void(const NoisyGroundPoint&)>& progress) {
  require(!options.thetas.empty(), "noisy-ground: no theta values given");
  require(device.collapse.has_value(), "noisy-ground: the device has no collapse rates");
  require(options.shots >= 1, "noisy-ground: shots must be >= 1");
  std::vector<NoisyGroundPoint> out;
  for (double theta : options.thetas) {
    SchwingerParams sp = options.model;
    sp.theta = theta;
    sp.sites = device.n_qubits();
    GroundStateProblem p;
    p.target = build_schwinger(sp);
    p.device = device;
    p.initial_bits = options.initial_bits;
    p.duration = options.duration;
    p.segments = options.segments;
    p.mode = options.mode;
    p.propagation = options.propagation;
    GroundOptions g = options.ground;
    g.record_trajectory = false;

    p.noisy = false;
    const RunResult clean = prepare_ground_state(p, g);
    const QuantumState psi =
        PulsePropagator(device, p.propagation).propagate(basis_state(device, p.initial_bits), clean.schedule);

    p.noisy = true;
    const RunResult noisy = prepare_ground_state(p, g);
    const DensityMatrix rho = PulsePropagator(device, p.propagation)
                                  .propagate(DensityMatrix::pure(basis_state(device, p.initial_bits)), noisy.schedule);

    const NoisyGroundPoint pt{theta,
                              clean.exact_energy,
                              clean.energy,
                              noisy.energy,
                              shot_noise_std(psi.amplitudes, p.target, device, options.shots),
                              shot_noise_std(rho.rho, p.target, device, options.shots),
                              clean.delta_e,
                              noisy.delta_e};
    if (progress) progress(pt);
    out.push_back(pt);
  }
  return out;
}

namespace {

Topology device_topology(const DeviceSpec& device) {
  const int n = device.n_qubits();
  ExplicitEdges explicit_edges;
  for (const auto& c : device.couplings) explicit_edges.edges.emplace_back(c.i, c.j);
  auto chain = expand_topology(NearestNeighbor{}, n);
  auto edges = expand_topology(explicit_edges, n);
  std::sort(edges.begin(), edges.end());
  if (edges == chain) return NearestNeighbor{};
  return explicit_edges;
}

}  // namespace

std::vector<BaselineCircuit> gate_baselines(const SpinHamiltonian& h, const DeviceSpec& device, bool include_swaps) {
  require(h.n_qubits() == device.n_qubits(), "baselines: Hamiltonian and device qubit counts differ");
  const GateTimeTable table = GateTimeTable::from(device, include_swaps);
  std::vector<BaselineCircuit> out;
  const Circuit trotter = trotter_layer(h, 1.0, device_topology(device));
  out.push_back({"trotter", trotter.gate_count(), trotter.two_qubit_count(), trotter.depth(), trotter.swap_count(),
                 circuit_duration(trotter, table)});
  if (h.n_qubits() >= 2) {
    const Circuit sel = strongly_entangling_layer(h.n_qubits(), RMatrix::Zero(h.n_qubits(), 3));
    out.push_back({"strongly_entangling", sel.gate_count(), sel.two_qubit_count(), sel.depth(), sel.swap_count(),
                   circuit_duration(sel, table)});
  }
  return out;
}

SpeedupReport speedup_report(double met_ns, const std::string& initial_bits, const DeviceSpec& device,
                             const std::vector<BaselineCircuit>& baselines) {
  require(met_ns > 0.0, "speedup: MET must be > 0");
  require(!baselines.empty(), "speedup: no baseline durations given");
  SpeedupReport rep;
  rep.met_ns = met_ns;
  rep.prep_x_gates = static_cast<int>(std::count(initial_bits.begin(), initial_bits.end(), '1'));
  rep.prep_ns = rep.prep_x_gates * device.gate_times.single_qubit;
  rep.qoc_total_ns = met_ns + rep.prep_ns;
  for (const auto& b : baselines)
    rep.rows.push_back({b.name, b.duration_ns, b.duration_ns / rep.qoc_total_ns, b.duration_ns / met_ns});
  return rep;
}

}  // namespace qoc
