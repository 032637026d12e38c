// qoc: command-line front end for the pulse-level simulator.
//
//   qoc <command> [options]
//
// Settings are resolved as command defaults, then --config <file.json>, then
// flags. Exit codes: 0 success, 2 invalid input, 3 optimizer did not reach
// the target (results are still written).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qoc/experiments.hpp"
#include "qoc/run_config.hpp"
#include "qoc/vqt.hpp"

namespace fs = std::filesystem;
using namespace qoc;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;

// Flag values; unset flags leave the resolved config alone.
struct Overrides {
  std::optional<std::string> config_file;
  std::optional<std::string> device;
  std::optional<int> levels;
  std::optional<int> sites;
  std::optional<double> mass, spacing, theta, charge;
  std::optional<std::string> hopping;
  std::optional<std::string> init;
  std::optional<double> duration;
  std::optional<int> segments;
  std::optional<double> substep;
  std::optional<std::string> frame;
  std::optional<std::string> phase_mode;
  std::optional<int> restarts;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> max_iterations;
  std::optional<std::string> gradient;
  std::optional<double> t_min, t_max, resolution, coarse_step;
  bool bisection = false;
  std::optional<std::string> couplings;
  std::optional<int> repeats;
  std::optional<std::string> site_counts;
  std::optional<std::string> durations;
  std::optional<int> samples;
  std::optional<std::string> thetas;
  std::optional<std::string> betas;
  bool noisy = false;
  bool noiseless = false;
  std::optional<int> shots;
  std::optional<double> t1, t2;
  std::optional<int> spectrum_levels;
  std::optional<std::string> output_dir;
  bool print_config = false;
};

void add_options(CLI::App& sub, Overrides& o) {
  sub.add_option("--config", o.config_file, "JSON run config (flags override it)");
  sub.add_option("--device", o.device, "device preset name or JSON device file");
  sub.add_option("--levels", o.levels, "transmon levels kept per qudit (2-4)");
  sub.add_option("--sites", o.sites, "lattice sites N");
  sub.add_option("--m", o.mass, "fermion mass");
  sub.add_option("--a", o.spacing, "lattice spacing");
  sub.add_option("--theta", o.theta, "topological angle");
  sub.add_option("--e", o.charge, "coupling e");
  sub.add_option("--hopping", o.hopping, "pair-exchange | printed");
  sub.add_option("--init", o.init, "initial bitstring (default: mass eigenstate)");
  sub.add_option("-T,--duration", o.duration, "pulse duration in ns");
  sub.add_option("--segments", o.segments, "piecewise-constant segments");
  sub.add_option("--substep", o.substep, "integrator substep in ns (0 = frame default)");
  sub.add_option("--frame", o.frame, "rotating | lab");
  sub.add_option("--phase-mode", o.phase_mode, "detuning | segment-phases");
  sub.add_option("--restarts", o.restarts, "random restarts");
  sub.add_option("--seed", o.seed, "base seed");
  sub.add_option("--tol", o.tol, "energy tolerance");
  sub.add_option("--max-iter", o.max_iterations, "L-BFGS-B iteration cap per restart");
  sub.add_option("--gradient", o.gradient, "adjoint | finite-difference");
  sub.add_option("--t-min", o.t_min, "MET search lower end (ns)");
  sub.add_option("--t-max", o.t_max, "MET search upper end (ns)");
  sub.add_option("--resolution", o.resolution, "MET grid spacing (ns)");
  sub.add_option("--coarse-step", o.coarse_step, "coarse MET step before the fine scan (ns)");
  sub.add_flag("--bisection", o.bisection, "bisect instead of sweeping (assumes monotone success)");
  sub.add_option("--couplings", o.couplings, "coupling values in MHz, list or lo:hi:count");
  sub.add_option("--repeats", o.repeats, "independent MET searches per coupling");
  sub.add_option("--site-counts", o.site_counts, "site counts for the variance scan");
  sub.add_option("--durations", o.durations, "durations (ns) for the variance scan");
  sub.add_option("--samples", o.samples, "random pulses per variance cell");
  sub.add_option("--thetas", o.thetas, "theta values, list or lo:hi:count");
  sub.add_option("--beta,--beta-grid", o.betas, "inverse temperatures, list or lo:hi:count");
  sub.add_flag("--noisy", o.noisy, "include device collapse rates");
  sub.add_flag("--noiseless", o.noiseless, "ignore device collapse rates");
  sub.add_option("--shots", o.shots, "shots for the energy standard deviation");
  sub.add_option("--t1", o.t1, "thermal circuit-1 duration (ns)");
  sub.add_option("--t2", o.t2, "thermal circuit-2 duration (ns)");
  sub.add_option("--spectrum-levels", o.spectrum_levels, "eigenvalues listed by exact (0 = all)");
  sub.add_option("-o,--out", o.output_dir, "output directory");
  sub.add_flag("--print-config", o.print_config, "print the resolved config as JSON and exit");
}

HoppingNormalization hopping_from(const std::string& s) {
  if (s == "pair-exchange") return HoppingNormalization::kPairExchange;
  if (s == "printed") return HoppingNormalization::kPrinted;
  throw ValidationError("hopping must be 'pair-exchange' or 'printed'");
}

std::vector<int> int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_number_list(text)) {
    require(v == std::floor(v), "site counts must be integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// Reference METs on the nearest-neighbour device, used when no duration is given.
std::optional<double> reference_met(int sites) {
  if (sites == 3) return 53.0;
  if (sites == 4) return 181.0;
  return std::nullopt;
}

RunConfig resolve(const std::string& command, const Overrides& o) {
  RunConfig c = default_config(command);
  bool duration_given = false;
  if (o.config_file) {
    std::ifstream in(*o.config_file);
    require(static_cast<bool>(in), "config file '" + *o.config_file + "' does not exist");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    c = config_from_json(text, c);
    c.command = command;
    duration_given = text.find("\"duration\"") != std::string::npos;
  }
  if (o.device) c.device = *o.device;
  if (o.levels) c.levels = *o.levels;
  if (o.sites) c.model.sites = *o.sites;
  if (o.mass) c.model.mass = *o.mass;
  if (o.spacing) c.model.spacing = *o.spacing;
  if (o.theta) c.model.theta = *o.theta;
  if (o.charge) c.model.charge = *o.charge;
  if (o.hopping) c.model.hopping = hopping_from(*o.hopping);
  if (o.init) c.initial_bits = *o.init;
  if (o.duration) c.duration = *o.duration;
  if (o.segments) c.segments = *o.segments;
  if (o.substep) c.substep = *o.substep;
  if (o.frame) c.frame = *o.frame;
  if (o.phase_mode) c.phase_mode = *o.phase_mode;
  if (o.restarts) c.restarts = *o.restarts;
  if (o.seed) c.seed = *o.seed;
  if (o.tol) c.tol = *o.tol;
  if (o.max_iterations) c.max_iterations = *o.max_iterations;
  if (o.gradient) c.gradient = *o.gradient;
  if (o.t_min) c.t_min = *o.t_min;
  if (o.t_max) c.t_max = *o.t_max;
  if (o.resolution) c.resolution = *o.resolution;
  if (o.coarse_step) c.coarse_step = *o.coarse_step;
  if (o.bisection) c.bisection = true;
  if (o.couplings) c.couplings_mhz = parse_number_list(*o.couplings);
  if (o.repeats) c.repeats = *o.repeats;
  if (o.site_counts) c.site_counts = int_list(*o.site_counts);
  if (o.durations) c.durations = parse_number_list(*o.durations);
  if (o.samples) c.samples = *o.samples;
  if (o.thetas) c.thetas = parse_number_list(*o.thetas);
  if (o.betas) c.betas = parse_number_list(*o.betas);
  require(!(o.noisy && o.noiseless), "--noisy and --noiseless are exclusive");
  if (o.noisy) c.noisy = true;
  if (o.noiseless) c.noisy = false;
  if (o.shots) c.shots = *o.shots;
  if (o.t1) c.t1 = *o.t1;
  if (o.t2) c.t2 = *o.t2;
  if (o.spectrum_levels) c.spectrum_levels = *o.spectrum_levels;
  if (o.output_dir) c.output_dir = *o.output_dir;

  if (command == "trotter-compare" && !o.duration && !duration_given) {
    const auto met = reference_met(c.model.sites);
    require(met.has_value(), "trotter-compare needs --met for " + std::to_string(c.model.sites) + " sites");
    c.duration = *met;
  }
  c.validate();
  return c;
}

DeviceSpec device_for(const RunConfig& c, int sites) {
  DeviceSpec d = resolve_device(c.device);
  require(d.n_qubits() >= sites, "device '" + c.device + "' has " + std::to_string(d.n_qubits()) +
                                     " qudits, fewer than the " + std::to_string(sites) + " sites");
  if (d.n_qubits() > sites) d = d.restricted(sites);
  if (c.levels > 0) d = d.with_levels(c.levels);
  if (!c.noisy) d.collapse.reset();
  d.validate();
  return d;
}

PropagationOptions propagation_for(const RunConfig& c) {
  PropagationOptions p;
  p.frame = c.frame == "lab" ? Frame::kLab : Frame::kRotating;
  p.substep = c.substep;
  return p;
}

GroundOptions ground_options_for(const RunConfig& c) {
  GroundOptions g;
  g.restarts = c.restarts;
  g.seed = c.seed;
  g.lbfgsb.max_iterations = c.max_iterations;
  g.gradient = c.gradient == "adjoint" ? GradientMethod::kAdjoint : GradientMethod::kCentralDifference;
  g.workers = default_workers();
  return g;
}

MetOptions met_options_for(const RunConfig& c) {
  MetOptions m;
  m.t_min = c.t_min;
  m.t_max = c.t_max;
  m.resolution = c.resolution;
  m.coarse_step = c.coarse_step;
  m.bisection = c.bisection;
  m.tol = c.tol;
  m.ground = ground_options_for(c);
  return m;
}

GroundStateProblem problem_for(const RunConfig& c) {
  GroundStateProblem p;
  p.target = build_schwinger(c.model);
  p.device = device_for(c, c.model.sites);
  p.initial_bits = c.initial_bits.empty() ? mass_eigenstate(p.target) : c.initial_bits;
  p.duration = c.duration;
  p.segments = c.segments;
  p.mode = c.phase_mode == "segment-phases" ? PhaseMode::kSegmentPhases : PhaseMode::kDetuning;
  p.propagation = propagation_for(c);
  p.noisy = c.noisy && p.device.collapse.has_value();
  return p;
}

std::string fmt(double x) { return format_number(x); }

double to_mhz(double rad_per_ns) { return rad_per_ns / kTwoPi * 1e3; }

// Plot-data triplets: one row per point, "series" groups curves.
const std::vector<std::string> kTripletHeader{"series", "x", "y", "yerr"};

void write_schedule(OutputFile& out, const PulseSchedule& s, const std::string& label = {}) {
  std::vector<std::string> head{"qubit", "segment", "t_start_ns", "t_end_ns", "amplitude_mhz", "detuning_mhz",
                                "phase_rad"};
  if (!label.empty()) head.insert(head.begin(), "circuit");
  out.row(head);
  const double w = s.segment_width();
  for (int q = 0; q < s.n_qubits(); ++q)
    for (int k = 0; k < s.segments(); ++k) {
      std::vector<std::string> row{std::to_string(q + 1), std::to_string(k),     fmt(k * w), fmt((k + 1) * w),
                                   fmt(to_mhz(s.amplitudes(q, k))), fmt(to_mhz(s.detunings(q))),
                                   fmt(s.phase(q, k))};
      if (!label.empty()) row.insert(row.begin(), label);
      out.row(row);
    }
}

// Pulse shapes, basis-state probabilities and leakage of an optimized run.
void write_run_files(const RunConfig& c, const RunResult& r, const std::string& prefix = {}) {
  const fs::path dir = c.output_dir;
  {
    OutputFile f(dir / (prefix + "fig2_pulses.csv"), c);
    f.row(kTripletHeader);
    const PulseSchedule& s = r.schedule;
    const double w = s.segment_width();
    for (int q = 0; q < s.n_qubits(); ++q)
      for (int k = 0; k < s.segments(); ++k)
        f.row({"q" + std::to_string(q + 1), fmt((k + 0.5) * w), fmt(to_mhz(s.amplitudes(q, k))), "0"});
  }
  {
    OutputFile f(dir / (prefix + "fig3_probabilities.csv"), c);
    f.row(kTripletHeader);
    for (const auto& p : r.probabilities) f.row({p.basis_state, fmt(p.time_ns), fmt(p.probability), "0"});
  }
  {
    OutputFile f(dir / (prefix + "fig5_leakage.csv"), c);
    f.row(kTripletHeader);
    for (const auto& l : r.leakage_trace) {
      for (std::size_t q = 0; q < l.per_qubit.size(); ++q)
        f.row({"q" + std::to_string(q + 1), fmt(l.time_ns), fmt(l.per_qubit[q]), "0"});
      f.row({"total", fmt(l.time_ns), fmt(l.total), "0"});
      f.row({"top_level", fmt(l.time_ns), fmt(l.top_level), "0"});
    }
  }
  {
    OutputFile f(dir / (prefix + "schedule.csv"), c);
    write_schedule(f, r.schedule);
  }
  {
    OutputFile f(dir / (prefix + "restarts.csv"), c);
    f.row({"restart", "seed", "energy", "delta_e", "iterations", "evaluations", "converged", "stop_reason"});
    for (const auto& x : r.restarts)
      f.row({std::to_string(x.restart), std::to_string(x.seed), fmt(x.energy), fmt(x.delta_e),
             std::to_string(x.iterations), std::to_string(x.evaluations), x.converged ? "1" : "0",
             to_string(x.reason)});
  }
  {
    OutputFile f(dir / (prefix + "convergence.csv"), c);
    f.row({"iteration", "energy", "projected_gradient"});
    for (const auto& t : r.trace) f.row({std::to_string(t.iteration), fmt(t.objective), fmt(t.grad_norm)});
  }
}

void report_run(OutputFile& f, const RunResult& r) {
  f.line("initial_state: " + r.problem.initial_bits);
  f.line("duration_ns: " + fmt(r.problem.duration));
  f.line("segments: " + std::to_string(r.schedule.segments()));
  f.line("levels: " + std::to_string(r.problem.device.levels));
  f.line("energy: " + fmt(r.energy));
  f.line("exact_energy: " + fmt(r.exact_energy));
  f.line("delta_e: " + fmt(r.delta_e));
  f.line("converged: " + std::string(r.converged ? "yes" : "no"));
  f.line("best_restart: " + std::to_string(r.best_restart));
  f.line("restart_mean_energy: " + fmt(r.mean_energy()));
  f.line("restart_std_energy: " + fmt(r.std_energy()));
  f.line("final_leakage: " + fmt(r.final_leakage.total));
  f.line("bang_bang_fraction: " + fmt(r.bang_bang_fraction));
  f.line("prep_x_gates: " + std::to_string(r.prep_x_gates));
  f.line("total_time_ns: " + fmt(r.total_time_ns()));
}

int cmd_exact(const RunConfig& c) {
  const SpinHamiltonian h = build_schwinger(c.model);
  const int dim = 1 << c.model.sites;
  const SpectrumResult s = exact_spectrum(h, dim, 1e-12);
  const fs::path dir = c.output_dir;

  OutputFile report(dir / "exact_report.txt", c);
  report.line("sites: " + std::to_string(c.model.sites));
  report.line("coupling_J: " + fmt(c.model.coupling()));
  report.line("ground_energy: " + fmt(s.ground_energy));
  report.line("mass_eigenstate: " + mass_eigenstate(h));
  report.line("ground_probabilities:");
  for (const auto& [bits, p] : s.ground_probabilities)
    if (p >= 1e-6) report.line("  " + bits + ": " + fmt(p));
  report.line("hamiltonian:");
  std::istringstream terms(to_text(h));
  for (std::string line; std::getline(terms, line);) report.line("  " + line);

  OutputFile spectrum(dir / "spectrum.csv", c);
  spectrum.row({"index", "energy"});
  const int shown = c.spectrum_levels > 0 ? std::min<int>(c.spectrum_levels, s.energies.size()) : s.energies.size();
  for (int i = 0; i < shown; ++i) spectrum.row({std::to_string(i), fmt(s.energies[static_cast<std::size_t>(i)])});

  if (!c.betas.empty()) {
    OutputFile thermal(dir / "thermal_exact.csv", c);
    thermal.row({"beta", "energy", "entropy", "free_energy"});
    for (double b : c.betas) {
      const ThermalObservables t = thermal_observables(s.energies, b);
      thermal.row({fmt(b), fmt(t.energy), fmt(t.entropy), t.free_energy ? fmt(*t.free_energy) : ""});
    }
  }
  std::cout << "ground energy " << fmt(s.ground_energy) << ", outputs in " << dir.string() << "\n";
  return 0;
}

int cmd_ground(const RunConfig& c) {
  const GroundStateProblem p = problem_for(c);
  const RunResult r = prepare_ground_state(p, ground_options_for(c));
  OutputFile report(fs::path(c.output_dir) / "ground_report.txt", c);
  report_run(report, r);
  write_run_files(c, r);
  std::cout << "E = " << fmt(r.energy) << ", exact " << fmt(r.exact_energy) << ", dE = " << fmt(r.delta_e) << "\n";
  return r.delta_e <= c.tol ? 0 : kExitNotConverged;
}

int cmd_met(const RunConfig& c) {
  const GroundStateProblem p = problem_for(c);
  OutputFile attempts(fs::path(c.output_dir) / "met_attempts.csv", c);
  attempts.row({"duration_ns", "best_delta_e", "restarts_used", "success"});
  const MetResult m = find_met(p, met_options_for(c), [&](const MetAttempt& a) {
    attempts.row({fmt(a.duration), fmt(a.best_delta_e), std::to_string(a.restarts_used), a.success ? "1" : "0"});
    std::cerr << "T = " << fmt(a.duration) << " ns: dE = " << fmt(a.best_delta_e) << (a.success ? " ok" : "")
              << "\n";
  });
  OutputFile report(fs::path(c.output_dir) / "met_report.txt", c);
  report.line("found: " + std::string(m.found ? "yes" : "no"));
  if (m.found) {
    report.line("met_ns: " + fmt(m.met));
    report.line("resolution_ns: " + fmt(m.resolution));
  }
  report.line("attempts: " + std::to_string(m.attempts.size()));
  if (m.best) {
    report_run(report, *m.best);
    write_run_files(c, *m.best);
  }
  if (!m.found) {
    std::cout << "no duration in [" << fmt(c.t_min) << ", " << fmt(c.t_max) << "] ns reached dE <= " << fmt(c.tol)
              << "\n";
    return kExitNotConverged;
  }
  std::cout << "MET = " << fmt(m.met) << " +/- " << fmt(m.resolution) << " ns\n";
  return 0;
}

int cmd_coupling_scan(const RunConfig& c) {
  require(!c.couplings_mhz.empty(), "coupling-scan needs at least one coupling value");
  const GroundStateProblem p = problem_for(c);
  std::vector<double> g;
  for (double mhz : c.couplings_mhz) g.push_back(mhz_to_rad_per_ns(mhz));
  OutputFile points(fs::path(c.output_dir) / "coupling_scan.csv", c);
  points.row({"g_mhz", "repeats_found", "not_found", "met_mean_ns", "met_std_ns", "met_error_ns", "mets_ns"});
  const CouplingScan scan = coupling_scan(p, g, c.repeats, met_options_for(c), [&](const CouplingPoint& pt) {
    std::string mets;
    for (double x : pt.mets) mets += (mets.empty() ? "" : " ") + fmt(x);
    points.row({fmt(to_mhz(pt.g)), std::to_string(pt.mets.size()), std::to_string(pt.not_found), fmt(pt.mean),
                fmt(pt.std), fmt(pt.error), mets});
  });
  OutputFile fig(fs::path(c.output_dir) / "fig7_coupling.csv", c);
  fig.row(kTripletHeader);
  for (const auto& pt : scan.points)
    if (!pt.mets.empty()) fig.row({"met", fmt(to_mhz(pt.g)), fmt(pt.mean), fmt(pt.error)});
  if (scan.fit) {
    for (const auto& pt : scan.points)
      fig.row({"fit", fmt(to_mhz(pt.g)), fmt(scan.fit->floor + std::exp(scan.fit->intercept + scan.fit->slope * pt.g)),
               "0"});
  }
  OutputFile report(fs::path(c.output_dir) / "coupling_report.txt", c);
  report.line("decreasing: " + std::string(scan.decreasing ? "yes" : "no"));
  if (scan.fit) {
    report.line("fit: log(MET - floor) = intercept + slope * g[rad/ns]");
    report.line("fit_floor_ns: " + fmt(scan.fit->floor));
    report.line("fit_intercept: " + fmt(scan.fit->intercept));
    report.line("fit_slope: " + fmt(scan.fit->slope));
    report.line("fit_rms: " + fmt(scan.fit->rms));
  } else {
    report.line("fit: none");
  }
  int missing = 0;
  for (const auto& pt : scan.points) missing += pt.not_found;
  return missing == 0 ? 0 : kExitNotConverged;
}

int cmd_variance(const RunConfig& c) {
  require(!c.site_counts.empty() && !c.durations.empty(), "variance needs site counts and durations");
  const int max_sites = *std::max_element(c.site_counts.begin(), c.site_counts.end());
  DeviceSpec dev = device_for(c, max_sites);
  VarianceOptions o;
  o.samples = c.samples;
  o.segments = c.segments;
  o.seed = c.seed;
  o.workers = default_workers();
  o.propagation = propagation_for(c);
  OutputFile table(fs::path(c.output_dir) / "variance.csv", c);
  table.row({"sites", "duration_ns", "samples", "mean_energy", "variance"});
  const auto cells = variance_scan(
      dev,
      [&](int n) {
        SchwingerParams sp = c.model;
        sp.sites = n;
        return build_schwinger(sp);
      },
      c.site_counts, c.durations, o,
      [&](const VarianceCell& v) {
        table.row({std::to_string(v.sites), fmt(v.duration), std::to_string(v.samples), fmt(v.mean), fmt(v.variance)});
      });
  OutputFile fig(fs::path(c.output_dir) / "fig6_variance.csv", c);
  fig.row(kTripletHeader);
  // Standard error of a sample variance: var * sqrt(2 / (n - 1)).
  for (const auto& v : cells)
    fig.row({std::to_string(v.sites) + "_sites", fmt(v.duration), fmt(v.variance),
             fmt(v.variance * std::sqrt(2.0 / (v.samples - 1)))});
  return 0;
}

int cmd_noisy_ground(const RunConfig& c) {
  require(!c.thetas.empty(), "noisy-ground needs at least one theta");
  const DeviceSpec dev = device_for(c, c.model.sites);
  if (c.noisy) require(dev.collapse.has_value(), "device '" + c.device + "' has no collapse rates");
  NoisyGroundOptions o;
  o.model = c.model;
  o.thetas = c.thetas;
  o.duration = c.duration;
  o.segments = c.segments;
  o.mode = c.phase_mode == "segment-phases" ? PhaseMode::kSegmentPhases : PhaseMode::kDetuning;
  o.initial_bits = c.initial_bits.empty() ? std::string(static_cast<std::size_t>(c.model.sites), '0') : c.initial_bits;
  o.shots = c.shots;
  o.ground = ground_options_for(c);
  o.propagation = propagation_for(c);

  OutputFile table(fs::path(c.output_dir) / "noisy_ground.csv", c);
  table.row({"theta", "exact", "noiseless", "noiseless_std", "noiseless_delta_e", "noisy", "noisy_std",
             "noisy_delta_e"});
  std::vector<NoisyGroundPoint> points = noisy_ground_scan(dev, o, [&](const NoisyGroundPoint& p) {
    table.row({fmt(p.theta), fmt(p.exact), fmt(p.noiseless), fmt(p.noiseless_std), fmt(p.noiseless_delta_e),
               fmt(p.noisy), fmt(p.noisy_std), fmt(p.noisy_delta_e)});
    std::cerr << "theta = " << fmt(p.theta) << ": dE noiseless " << fmt(p.noiseless_delta_e) << ", noisy "
              << fmt(p.noisy_delta_e) << "\n";
  });
  OutputFile fig(fs::path(c.output_dir) / "fig8_noise.csv", c);
  fig.row(kTripletHeader);
  for (const auto& p : points) {
    fig.row({"exact", fmt(p.theta), fmt(p.exact), "0"});
    fig.row({"noiseless", fmt(p.theta), fmt(p.noiseless), fmt(p.noiseless_std)});
    fig.row({"noisy", fmt(p.theta), fmt(p.noisy), fmt(p.noisy_std)});
  }
  for (const auto& p : points)
    if (p.noiseless_delta_e > c.tol || p.noisy_delta_e > c.tol) return kExitNotConverged;
  return 0;
}

int cmd_thermal(const RunConfig& c) {
  require(!c.betas.empty(), "thermal needs at least one beta");
  VqtConfig v;
  v.target = build_schwinger(c.model);
  v.device = device_for(c, c.model.sites);
  v.device.collapse.reset();
  v.t1 = c.t1;
  v.t2 = c.t2;
  v.segments = c.segments;
  v.restarts = c.restarts;
  v.propagation = propagation_for(c);
  v.lbfgsb.max_iterations = c.max_iterations;
  v.workers = default_workers();
  const fs::path dir = c.output_dir;

  OutputFile table(dir / "thermal.csv", c);
  table.row({"beta", "free_energy_mean", "free_energy_std", "energy_mean", "energy_std", "entropy_mean",
             "entropy_std", "free_energy_best", "energy_best", "entropy_best", "leaked", "free_energy_exact",
             "energy_exact", "entropy_exact", "variational_bound"});
  OutputFile restarts(dir / "thermal_restarts.csv", c);
  restarts.row({"beta", "restart", "seed", "free_energy", "energy", "entropy", "iterations", "stop_reason",
                "above_exact"});
  std::vector<ThermalResult> results;
  bool stalled = false;
  for (double b : c.betas) {
    require(b > 0.0, "thermal needs beta > 0");
    v.beta = b;
    const ThermalResult r = prepare_thermal(v, c.seed);
    results.push_back(r);
    table.row({fmt(b), fmt(r.mean_free_energy), fmt(r.std_free_energy), fmt(r.mean_energy), fmt(r.std_energy),
               fmt(r.mean_entropy), fmt(r.std_entropy), fmt(r.free_energy), fmt(r.energy), fmt(r.entropy),
               fmt(r.leaked), fmt(r.exact.free_energy.value_or(NAN)), fmt(r.exact.energy), fmt(r.exact.entropy),
               r.variational_bound ? "1" : "0"});
    bool any_done = false;
    for (const auto& x : r.restarts) {
      restarts.row({fmt(b), std::to_string(x.restart), std::to_string(x.seed), fmt(x.free_energy), fmt(x.energy),
                    fmt(x.entropy), std::to_string(x.iterations), to_string(x.reason), x.above_exact ? "1" : "0"});
      any_done = any_done || x.reason != StopReason::kMaxIterations;
    }
    stalled = stalled || !any_done;
    OutputFile sched(dir / "schedules" / ("beta_" + fmt(b) + ".csv"), c);
    write_schedule(sched, r.schedule1, "1");
    for (int q = 0; q < r.schedule2.n_qubits(); ++q)
      for (int k = 0; k < r.schedule2.segments(); ++k) {
        const double w = r.schedule2.segment_width();
        sched.row({"2", std::to_string(q + 1), std::to_string(k), fmt(k * w), fmt((k + 1) * w),
                   fmt(to_mhz(r.schedule2.amplitudes(q, k))), fmt(to_mhz(r.schedule2.detunings(q))),
                   fmt(r.schedule2.phase(q, k))});
      }
    std::cerr << "beta = " << fmt(b) << ": F = " << fmt(r.mean_free_energy) << " +/- " << fmt(r.std_free_energy)
              << ", exact " << fmt(r.exact.free_energy.value_or(NAN)) << "\n";
  }
  OutputFile fig(dir / "fig10_thermal.csv", c);
  fig.row(kTripletHeader);
  for (const auto& r : results) {
    fig.row({"free_energy", fmt(r.beta), fmt(r.mean_free_energy), fmt(r.std_free_energy)});
    fig.row({"energy", fmt(r.beta), fmt(r.mean_energy), fmt(r.std_energy)});
    fig.row({"entropy", fmt(r.beta), fmt(r.mean_entropy), fmt(r.std_entropy)});
    fig.row({"free_energy_exact", fmt(r.beta), fmt(r.exact.free_energy.value_or(NAN)), "0"});
    fig.row({"energy_exact", fmt(r.beta), fmt(r.exact.energy), "0"});
    fig.row({"entropy_exact", fmt(r.beta), fmt(r.exact.entropy), "0"});
  }
  return stalled ? kExitNotConverged : 0;
}

int cmd_trotter_compare(const RunConfig& c) {
  const SpinHamiltonian h = build_schwinger(c.model);
  const DeviceSpec dev = device_for(c, c.model.sites);
  const std::string init = c.initial_bits.empty() ? mass_eigenstate(h) : c.initial_bits;
  const auto baselines = gate_baselines(h, dev);
  const SpeedupReport r = speedup_report(c.duration, init, dev, baselines);
  const fs::path dir = c.output_dir;

  OutputFile table(dir / "trotter_compare.csv", c);
  table.row({"baseline", "gates", "two_qubit", "depth", "swaps", "duration_ns", "met_ns", "prep_ns",
             "speedup", "speedup_met_only"});
  for (std::size_t i = 0; i < baselines.size(); ++i) {
    const auto& b = baselines[i];
    table.row({b.name, std::to_string(b.gates), std::to_string(b.two_qubit), std::to_string(b.depth),
               std::to_string(b.swaps), fmt(b.duration_ns), fmt(r.met_ns), fmt(r.prep_ns), fmt(r.rows[i].speedup),
               fmt(r.rows[i].speedup_met_only)});
    std::cout << b.name << ": " << b.gates << " gates, depth " << b.depth << ", " << b.two_qubit << " CNOTs, "
              << fmt(b.duration_ns / 1000.0) << " us, speedup " << fmt(r.rows[i].speedup) << "x ("
              << fmt(r.rows[i].speedup_met_only) << "x vs MET alone)\n";
  }
  OutputFile report(dir / "trotter_report.txt", c);
  report.line("met_ns: " + fmt(r.met_ns));
  report.line("initial_state: " + init);
  report.line("prep_x_gates: " + std::to_string(r.prep_x_gates));
  report.line("prep_ns: " + fmt(r.prep_ns));
  report.line("qoc_total_ns: " + fmt(r.qoc_total_ns));
  OutputFile circuit(dir / "trotter_circuit.txt", c);
  std::istringstream gates(dump(trotter_layer(h, 1.0, AllToAll{})));
  for (std::string line; std::getline(gates, line);) circuit.line(line);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse-level optimal control of transmon devices for lattice-model state preparation"};
  app.require_subcommand(1);
  std::map<std::string, Overrides> overrides;
  const std::map<std::string, std::string> help{
      {"exact", "dense spectrum, ground state and thermal values of the model"},
      {"ground", "optimize pulses for the ground state at fixed duration"},
      {"met", "minimum evolution time search"},
      {"coupling-scan", "MET versus uniform qubit coupling"},
      {"variance", "energy variance over random pulses"},
      {"noisy-ground", "ground-state optimization with and without decoherence over theta"},
      {"thermal", "variational thermal-state preparation over beta"},
      {"trotter-compare", "gate-based baselines and speedup against a given MET"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    add_options(*sub, overrides[name]);
    subs[name] = sub;
  }
  subs["trotter-compare"]->add_option("--met", overrides["trotter-compare"].duration, "MET in ns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  try {
    const RunConfig c = resolve(command, overrides[command]);
    if (overrides[command].print_config) {
      std::cout << to_json(c, 2) << "\n";
      return 0;
    }
    if (command == "exact") return cmd_exact(c);
    if (command == "ground") return cmd_ground(c);
    if (command == "met") return cmd_met(c);
    if (command == "coupling-scan") return cmd_coupling_scan(c);
    if (command == "variance") return cmd_variance(c);
    if (command == "noisy-ground") return cmd_noisy_ground(c);
    if (command == "thermal") return cmd_thermal(c);
    return cmd_trotter_compare(c);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
