#include <doctest.h>

#include <cmath>

#include "qoc/device.hpp"
#include "qoc/schedule.hpp"

using namespace qoc;

TEST_CASE("presets load with the tabulated values") {
  const auto names = preset_names();
  for (const char* n : {"falcon4q_nn", "falcon4q_all", "ibm_osaka", "ibm_brisbane", "ibm_sherbrooke", "ibm_kyoto"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());

  const DeviceSpec nn = device_preset("falcon4q_nn");
  CHECK(nn.n_qubits() == 4);
  CHECK(nn.omega[2] == doctest::Approx(kTwoPi * 4.940));
  CHECK(nn.anharmonicity[3] == doctest::Approx(kTwoPi * 0.262));
  REQUIRE(nn.couplings.size() == 3);
  CHECK(nn.couplings[1].i == 1);
  CHECK(nn.couplings[1].j == 2);
  CHECK(nn.couplings[1].g == doctest::Approx(kTwoPi * 0.0213));
  CHECK(nn.amp_bound == doctest::Approx(kTwoPi * 0.020));
  CHECK(nn.detuning_bound == doctest::Approx(kTwoPi * 1.0));

  CHECK(device_preset("falcon4q_all").couplings.size() == 6);

  const DeviceSpec kyoto = device_preset("ibm_kyoto");
  REQUIRE(kyoto.collapse.has_value());
  CHECK((*kyoto.collapse)[0].gamma1 == doctest::Approx(1.0 / 203400.0));
  CHECK((*kyoto.collapse)[1].gamma2 == doctest::Approx(1.0 / 77600.0));
  CHECK(kyoto.gate_times.two_qubit == 660.0);

  CHECK_THROWS_AS(device_preset("nope"), ValidationError);
}

TEST_CASE("device JSON round trip") {
  const DeviceSpec kyoto = device_preset("ibm_kyoto");
  const DeviceSpec back = parse_device(device_to_json(kyoto));
  CHECK(back.name == kyoto.name);
  for (int q = 0; q < 2; ++q) {
    CHECK(back.omega[q] == doctest::Approx(kyoto.omega[q]).epsilon(1e-14));
    CHECK((*back.collapse)[q].gamma2 == doctest::Approx((*kyoto.collapse)[q].gamma2).epsilon(1e-14));
  }
  CHECK(back.couplings[0].g == doctest::Approx(kyoto.couplings[0].g).epsilon(1e-14));
}

TEST_CASE("invalid devices are rejected") {
  DeviceSpec d = device_preset("falcon4q_nn");
  CHECK_THROWS_AS(d.with_levels(5), ValidationError);
  CHECK_THROWS_AS(d.restricted(5), ValidationError);
  d.couplings.push_back({0, 1, 0.1});
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = device_preset("falcon4q_nn");
  d.couplings.push_back({2, 2, 0.1});
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = device_preset("falcon4q_nn");
  d.anharmonicity.pop_back();
  CHECK_THROWS_AS(d.validate(), ValidationError);
  CHECK_THROWS_AS(parse_device("{\"frequency_ghz\": [5.0]}"), ValidationError);
  CHECK_THROWS_AS(parse_device("not json"), ValidationError);
  CHECK_THROWS_AS(load_device("/nonexistent/device.json"), ValidationError);
  // 4^7 > 4096
  CHECK_THROWS_AS(make_device(std::vector<double>(7, 30.0), std::vector<double>(7, 2.0), NearestNeighbor{}, 0.1, 4),
                  ValidationError);
}

TEST_CASE("restriction keeps the leading qudits and their couplings") {
  const DeviceSpec all = device_preset("falcon4q_all").restricted(3);
  CHECK(all.n_qubits() == 3);
  CHECK(all.couplings.size() == 3);
  CHECK(device_preset("falcon4q_nn").restricted(2).couplings.size() == 1);
}

TEST_CASE("topology expansion") {
  using E = std::vector<std::pair<int, int>>;
  CHECK(expand_topology(NearestNeighbor{}, 4) == E{{0, 1}, {1, 2}, {2, 3}});
  CHECK(expand_topology(AllToAll{}, 3) == E{{0, 1}, {0, 2}, {1, 2}});
  CHECK(expand_topology(ExplicitEdges{{{2, 0}}}, 3) == E{{0, 2}});
}

TEST_CASE("device Hamiltonian matches a hand-built two-qutrit matrix") {
  const double w0 = 30.0, w1 = 31.0, a0 = 2.0, a1 = 1.8, g = 0.12;
  const DeviceSpec spec = make_device({w0, w1}, {a0, a1}, NearestNeighbor{}, g, 3);
  const CMatrix h = device_hamiltonian(spec);
  CMatrix ref = CMatrix::Zero(9, 9);
  auto idx = [](int n0, int n1) { return 3 * n0 + n1; };
  for (int n0 = 0; n0 < 3; ++n0)
    for (int n1 = 0; n1 < 3; ++n1) {
      ref(idx(n0, n1), idx(n0, n1)) = w0 * n0 - a0 / 2 * n0 * (n0 - 1) + w1 * n1 - a1 / 2 * n1 * (n1 - 1);
      // a_0^+ a_1 |n0, n1> = sqrt(n0 + 1) sqrt(n1) |n0 + 1, n1 - 1>
      if (n0 < 2 && n1 > 0) {
        const double v = g * std::sqrt((n0 + 1.0) * n1);
        ref(idx(n0 + 1, n1 - 1), idx(n0, n1)) = v;
        ref(idx(n0, n1), idx(n0 + 1, n1 - 1)) = v;
      }
    }
  CHECK((h - ref).norm() < 1e-12);
}

TEST_CASE("qudit space bookkeeping") {
  const QuditSpace s(3, 4);
  CHECK(s.dim() == 64);
  CHECK(s.index_of({1, 2, 3}) == 16 + 8 + 3);
  CHECK(s.level(27, 0) == 1);
  CHECK(s.level(27, 1) == 2);
  CHECK(s.level(27, 2) == 3);
  CHECK(s.index_of_bits("011") == 5);
  CHECK(s.label(27) == "123");
  REQUIRE(s.computational_indices().size() == 8);
  CHECK(s.computational_indices()[3] == s.index_of({0, 1, 1}));
  CHECK_THROWS_AS(s.index_of_bits("012"), ValidationError);
  const CMatrix a = s.lowering_matrix(1);
  CHECK(std::abs(a(s.index_of({0, 1, 0}), s.index_of({0, 2, 0})) - std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("schedule segments and packing") {
  PulseSchedule s = PulseSchedule::zeros(2, 4, 10.0);
  CHECK(s.segment_index(0.0) == 0);
  CHECK(s.segment_index(2.5) == 1);
  CHECK(s.segment_index(10.0) == 3);
  CHECK_THROWS_AS(s.segment_index(10.5), ValidationError);

  for (PhaseMode mode : {PhaseMode::kDetuning, PhaseMode::kSegmentPhases}) {
    const ParamLayout layout{2, 4, mode};
    CHECK(layout.size() == (mode == PhaseMode::kDetuning ? 10 : 16));
    const DeviceSpec spec = device_preset("ibm_kyoto");
    const auto [lo, hi] = layout.bounds(spec);
    RVector x = lo + (hi - lo) * 0.3;
    x(1) = 0.05;
    const PulseSchedule u = layout.unpack(x, 10.0);
    CHECK(u.amplitudes(0, 1) == 0.05);
    CHECK(layout.pack(u) == x);
    u.validate(spec);
  }
  CHECK(ParamLayout{2, 70, PhaseMode::kSegmentPhases}.size() == 280);
}

TEST_CASE("schedule validation and resolution") {
  const DeviceSpec spec = device_preset("falcon4q_nn").restricted(2);
  PulseSchedule s = PulseSchedule::zeros(2, 4, 10.0);
  s.amplitudes(1, 2) = 2 * spec.amp_bound;
  CHECK_THROWS_AS(s.validate(spec), ValidationError);
  s = PulseSchedule::zeros(2, 4, 10.0);
  s.detunings(0) = 2 * spec.detuning_bound;
  CHECK_THROWS_AS(s.validate(spec), ValidationError);
  CHECK_THROWS_AS(PulseSchedule::zeros(2, 4, 10.0).validate(device_preset("falcon4q_nn")), ValidationError);

  CHECK(segments_for_resolution(53.0, 100, 0.0) == 100);
  CHECK(segments_for_resolution(53.0, 100, 1.0) == 53);
  CHECK(segments_for_resolution(500.0, 100, 4.69) == 100);
  CHECK_THROWS_AS(segments_for_resolution(10.0, 0, 0.0), ValidationError);
}
