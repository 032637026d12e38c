#include <doctest.h>

#include <cmath>

#include "qoc/experiments.hpp"

using namespace qoc;

namespace {

DeviceSpec single_qubit() {
  DeviceSpec d = make_device({ghz_to_rad_per_ns(5.0)}, {ghz_to_rad_per_ns(0.3)}, NearestNeighbor{}, 0.0, 2);
  d.gate_times = {71.0, 400.0};
  // Far off resonance the landscape is flat; keep the toy problem near it.
  d.detuning_bound = mhz_to_rad_per_ns(5.0);
  return d;
}

GroundStateProblem flip_problem(double duration) {
  GroundStateProblem p;
  p.target = SpinHamiltonian(1);
  p.target.add(1.0, "Z");
  p.device = single_qubit();
  p.initial_bits = "0";
  p.duration = duration;
  p.segments = 2;
  return p;
}

}  // namespace

TEST_CASE("central differences are exact on linear functions") {
  RVector w(3);
  w << 0.5, -2.0, 3.0;
  RVector x(3);
  x << 1.0, 200.0, -0.3;
  const RVector g = central_difference_gradient([&](const RVector& y) { return w.dot(y) + 4.0; }, x);
  CHECK((g - w).norm() < 1e-7);
}

TEST_CASE("random initialization is seeded and bounded") {
  RVector lo = RVector::Constant(4000, -2.0), hi = RVector::Constant(4000, 6.0);
  const RVector a = random_init(lo, hi, 5);
  CHECK(a == random_init(lo, hi, 5));
  CHECK(a != random_init(lo, hi, 6));
  CHECK(a.minCoeff() >= -2.0);
  CHECK(a.maxCoeff() <= 6.0);
  CHECK(std::abs(a.mean() - 2.0) < 0.2);
  CHECK(restart_seed(42, 3) == 45);
}

TEST_CASE("parallel_for visits every index and forwards errors") {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](int i) { require(i != 7, "boom"); }), ValidationError);
}

TEST_CASE("without drive the detuning gradient vanishes") {
  GroundStateProblem p = flip_problem(20.0);
  p.target.add(0.3, "X");
  const GroundObjective f(p);
  RVector x = RVector::Zero(f.layout().size());
  x(f.layout().detuning_index(0)) = 0.02;
  RVector g;
  f(x, g);
  CHECK(std::abs(g(f.layout().detuning_index(0))) < 1e-14);
  RVector fd;
  f(x, fd, GradientMethod::kCentralDifference);
  CHECK((g - fd).norm() < 1e-6);
}

TEST_CASE("single-qubit flip reaches the ground state") {
  GroundStateProblem p = flip_problem(40.0);
  p.segments = 10;
  GroundOptions o;
  o.restarts = 3;
  const RunResult r = prepare_ground_state(p, o);
  CHECK(r.exact_energy == doctest::Approx(-1.0));
  CHECK(r.delta_e < 1e-6);
  CHECK(r.restarts.size() == 3);
  CHECK(r.prep_x_gates == 0);
  CHECK(r.total_time_ns() == 40.0);
  CHECK(r.leakage_trace.size() > 10);
  CHECK(r.final_leakage.two_level);
  // Same seed, same answer.
  CHECK(prepare_ground_state(p, o).energy == r.energy);
}

TEST_CASE("ground-state problems are validated") {
  GroundStateProblem p = flip_problem(10.0);
  p.initial_bits = "01";
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = flip_problem(-1.0);
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = flip_problem(10.0);
  p.noisy = true;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = flip_problem(10.0);
  p.device.pulse_resolution = 6.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("mass eigenstates of the Schwinger chains") {
  for (auto [n, bits] : {std::pair{2, "01"}, std::pair{3, "010"}, std::pair{4, "0101"}}) {
    SchwingerParams sp;
    sp.sites = n;
    CHECK(mass_eigenstate(build_schwinger(sp)) == bits);
  }
}

TEST_CASE("minimum evolution time of a single-qubit flip") {
  // E(T) = cos(2 Omega_max T) on resonance, so dE <= 1e-3 needs
  // Omega_max T >= pi/2 - 0.02236, i.e. T >= 12.32 ns.
  MetOptions o;
  o.t_min = 10.0;
  o.t_max = 20.0;
  o.resolution = 0.5;
  o.ground.restarts = 3;
  std::vector<double> seen;
  const MetResult fine = find_met(flip_problem(1.0), o, [&](const MetAttempt& a) { seen.push_back(a.duration); });
  REQUIRE(fine.found);
  CHECK(fine.met == 12.5);
  CHECK(seen == std::vector<double>{10.0, 10.5, 11.0, 11.5, 12.0, 12.5});
  REQUIRE(fine.best.has_value());
  CHECK(fine.best->delta_e <= 1e-3);

  o.coarse_step = 2.0;
  seen.clear();
  const MetResult coarse = find_met(flip_problem(1.0), o, [&](const MetAttempt& a) { seen.push_back(a.duration); });
  CHECK(coarse.met == 12.5);
  CHECK(seen == std::vector<double>{10.0, 12.0, 14.0, 12.5});

  o.coarse_step = 0.0;
  o.bisection = true;
  CHECK(find_met(flip_problem(1.0), o).met == 12.5);
}

TEST_CASE("a trivially solved target has MET t_min") {
  GroundStateProblem p = flip_problem(1.0);
  p.target = SpinHamiltonian(1);
  p.target.add(-1.0, "I");
  MetOptions o;
  o.ground.restarts = 1;
  const MetResult r = find_met(p, o);
  CHECK(r.found);
  CHECK(r.met == o.t_min);
  CHECK(r.attempts.size() == 1);
}

TEST_CASE("MET options are validated") {
  MetOptions o;
  o.resolution = 0.0;
  CHECK_THROWS_AS(find_met(flip_problem(1.0), o), ValidationError);
  o = MetOptions{};
  o.t_min = 50.0;
  o.t_max = 20.0;
  CHECK_THROWS_AS(find_met(flip_problem(1.0), o), ValidationError);
}

TEST_CASE("coupling fit recovers an exponential with a floor") {
  std::vector<double> g, met;
  for (double x = 0.05; x < 0.2; x += 0.02) {
    g.push_back(x);
    met.push_back(20.0 + std::exp(5.0 - 12.0 * x));
  }
  const auto fit = fit_coupling_scan(g, met);
  REQUIRE(fit.has_value());
  CHECK(fit->floor == doctest::Approx(20.0).epsilon(0.02));
  CHECK(fit->slope == doctest::Approx(-12.0).epsilon(0.02));
  CHECK(fit->rms < 0.1);
  CHECK_FALSE(fit_coupling_scan({0.1, 0.2}, {30.0, 20.0}).has_value());
}

TEST_CASE("speedup accounting") {
  const DeviceSpec falcon = device_preset("falcon4q_nn").restricted(3);
  const SpeedupReport r = speedup_report(53.0, "010", falcon, {{"trotter", 34, 10, 24, 0, 4994.0}});
  CHECK(r.prep_x_gates == 1);
  CHECK(r.prep_ns == 71.0);
  CHECK(r.qoc_total_ns == 124.0);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].speedup == doctest::Approx(4994.0 / 124.0));
  CHECK(r.rows[0].speedup_met_only == doctest::Approx(4994.0 / 53.0));
  CHECK_THROWS_AS(speedup_report(0.0, "010", falcon, {{"trotter", 34, 10, 24, 0, 4994.0}}), ValidationError);
}

TEST_CASE("gate baselines for the Schwinger chains") {
  SchwingerParams sp;
  const auto three = gate_baselines(build_schwinger(sp), device_preset("falcon4q_nn").restricted(3));
  REQUIRE(three.size() == 2);
  CHECK(three[0].gates == 34);
  CHECK(three[0].depth == 24);
  CHECK(three[0].two_qubit == 10);
  CHECK(three[1].gates == 12);
  CHECK(three[1].depth == 6);
  CHECK(three[1].two_qubit == 3);
  sp.sites = 4;
  const auto four = gate_baselines(build_schwinger(sp), device_preset("falcon4q_nn"));
  CHECK(four[0].gates == 55);
  CHECK(four[0].swaps == 2);
}

TEST_CASE("energy variance over random pulses") {
  VarianceOptions o;
  o.samples = 12;
  o.segments = 5;
  const DeviceSpec dev = device_preset("falcon4q_nn").with_levels(2);
  std::vector<VarianceCell> streamed;
  const auto cells = variance_scan(
      dev,
      [](int n) {
        SchwingerParams sp;
        sp.sites = n;
        return build_schwinger(sp);
      },
      {2, 3}, {5.0, 20.0}, o, [&](const VarianceCell& c) { streamed.push_back(c); });
  REQUIRE(cells.size() == 4);
  CHECK(streamed.size() == 4);
  for (const auto& c : cells) CHECK(c.variance > 0.0);
  CHECK(cells[1].sites == 2);
  CHECK(cells[1].duration == 20.0);
  o.samples = 1;
  CHECK_THROWS_AS(variance_scan(dev, [](int) { return SpinHamiltonian(2); }, {2}, {5.0}, o), ValidationError);
}
