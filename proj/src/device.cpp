#include "qoc/device.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qoc/schedule.hpp"

namespace qoc {

namespace {

struct PresetEntry {
  std::string_view name;
  std::string_view json;
};

#include "device_presets.inc"

}  // namespace

std::vector<std::pair<int, int>> expand_topology(const Topology& topology, int n) {
  std::vector<std::pair<int, int>> edges;
  if (std::holds_alternative<NearestNeighbor>(topology)) {
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  } else if (std::holds_alternative<AllToAll>(topology)) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  } else {
    for (auto [i, j] : std::get<ExplicitEdges>(topology).edges) edges.emplace_back(std::min(i, j), std::max(i, j));
  }
  return edges;
}

Eigen::Index DeviceSpec::dim() const {
  Eigen::Index d = 1;
  for (int q = 0; q < n_qubits(); ++q) {
    d *= levels;
    if (d > kMaxDeviceDim) return d;
  }
  return d;
}

void DeviceSpec::validate() const {
  require(n_qubits() >= 1, "DeviceSpec: at least one qubit required");
  require(levels >= 2 && levels <= 4, "DeviceSpec: levels d must be in {2,3,4}");
  require(static_cast<int>(anharmonicity.size()) == n_qubits(), "DeviceSpec: one anharmonicity per qubit required");
  require(dim() <= kMaxDeviceDim, "DeviceSpec: Hilbert-space dimension d^N exceeds " + std::to_string(kMaxDeviceDim));
  for (double w : omega) require(w > 0.0 && std::isfinite(w), "DeviceSpec: qubit frequencies must be > 0");
  for (double a : anharmonicity) require(a >= 0.0 && std::isfinite(a), "DeviceSpec: anharmonicities must be >= 0");
  std::set<std::pair<int, int>> seen;
  for (const auto& c : couplings) {
    require(c.i >= 0 && c.i < n_qubits() && c.j >= 0 && c.j < n_qubits(), "DeviceSpec: coupling edge index out of range");
    require(c.i != c.j, "DeviceSpec: coupling graph has a self-loop");
    require(seen.insert({std::min(c.i, c.j), std::max(c.i, c.j)}).second, "DeviceSpec: duplicate coupling edge");
    require(std::isfinite(c.g), "DeviceSpec: coupling strengths must be finite");
  }
  require(amp_bound > 0.0, "DeviceSpec: amplitude bound must be > 0");
  require(detuning_bound >= 0.0, "DeviceSpec: detuning bound must be >= 0");
  require(pulse_resolution >= 0.0, "DeviceSpec: pulse resolution must be >= 0");
  require(gate_times.single_qubit > 0.0 && gate_times.two_qubit > 0.0, "DeviceSpec: gate times must be > 0");
  if (collapse) {
    require(static_cast<int>(collapse->size()) == n_qubits(), "DeviceSpec: one collapse-rate pair per qubit required");
    for (const auto& r : *collapse) require(r.gamma1 >= 0.0 && r.gamma2 >= 0.0, "DeviceSpec: collapse rates must be >= 0");
  }
}

DeviceSpec DeviceSpec::restricted(int n) const {
  require(n >= 1 && n <= n_qubits(), "DeviceSpec::restricted: requested " + std::to_string(n) +
                                         " qubits from a " + std::to_string(n_qubits()) + "-qubit device");
  DeviceSpec out = *this;
  out.omega.resize(static_cast<std::size_t>(n));
  out.anharmonicity.resize(static_cast<std::size_t>(n));
  std::erase_if(out.couplings, [n](const Coupling& c) { return c.i >= n || c.j >= n; });
  if (out.collapse) out.collapse->resize(static_cast<std::size_t>(n));
  return out;
}

DeviceSpec DeviceSpec::with_levels(int d) const {
  DeviceSpec out = *this;
  out.levels = d;
  out.validate();
  return out;
}

DeviceSpec DeviceSpec::with_uniform_coupling(double g) const {
  DeviceSpec out = *this;
  for (auto& c : out.couplings) c.g = g;
  return out;
}

DeviceSpec make_device(std::vector<double> omega, std::vector<double> anharmonicity, const Topology& topology,
                       double g, int levels) {
  DeviceSpec spec;
  spec.name = "custom";
  spec.levels = levels;
  const int n = static_cast<int>(omega.size());
  spec.omega = std::move(omega);
  spec.anharmonicity = std::move(anharmonicity);
  for (auto [i, j] : expand_topology(topology, n)) spec.couplings.push_back({i, j, g});
  spec.validate();
  return spec;
}

DeviceSpec parse_device(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("device file: ") + e.what());
  }
  try {
    DeviceSpec spec;
    spec.name = j.value("name", "custom");
    spec.levels = j.value("levels", 4);
    for (double f : j.at("frequency_ghz").get<std::vector<double>>()) spec.omega.push_back(ghz_to_rad_per_ns(f));
    for (double f : j.at("anharmonicity_ghz").get<std::vector<double>>())
      spec.anharmonicity.push_back(ghz_to_rad_per_ns(f));
    for (const auto& e : j.value("couplings_mhz", nlohmann::json::array())) {
      require(e.size() == 3, "device file: coupling entries are [i, j, g_mhz]");
      const int a = e[0].get<int>() - 1;
      const int b = e[1].get<int>() - 1;
      spec.couplings.push_back({std::min(a, b), std::max(a, b), mhz_to_rad_per_ns(e[2].get<double>())});
    }
    spec.amp_bound = mhz_to_rad_per_ns(j.value("amp_bound_mhz", 20.0));
    spec.detuning_bound = ghz_to_rad_per_ns(j.value("detuning_bound_ghz", 1.0));
    spec.pulse_resolution = j.value("pulse_resolution_ns", 0.0);
    if (j.contains("gate_times_ns")) {
      const auto& g = j["gate_times_ns"];
      spec.gate_times.single_qubit = g.value("single_qubit", 71.0);
      spec.gate_times.two_qubit = g.value("two_qubit", 400.0);
    }
    if (j.contains("collapse_inverse_rates_us")) {
      std::vector<CollapseRates> rates;
      for (const auto& e : j["collapse_inverse_rates_us"]) {
        require(e.size() == 2, "device file: collapse entries are [1/Gamma1_us, 1/Gamma2_us]");
        const double t1 = e[0].get<double>() * 1e3;
        const double t2 = e[1].get<double>() * 1e3;
        rates.push_back({t1 > 0 ? 1.0 / t1 : 0.0, t2 > 0 ? 1.0 / t2 : 0.0});
      }
      spec.collapse = std::move(rates);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("device file: ") + e.what());
  }
}

DeviceSpec load_device(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "device file '" + path.string() + "' does not exist or is unreadable");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_device(ss.str());
}

std::string device_to_json(const DeviceSpec& spec) {
  nlohmann::ordered_json j;
  j["name"] = spec.name;
  j["levels"] = spec.levels;
  std::vector<double> f, a;
  for (double w : spec.omega) f.push_back(w / kTwoPi);
  for (double d : spec.anharmonicity) a.push_back(d / kTwoPi);
  j["frequency_ghz"] = f;
  j["anharmonicity_ghz"] = a;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& c : spec.couplings) edges.push_back({c.i + 1, c.j + 1, c.g / kTwoPi * 1e3});
  j["couplings_mhz"] = edges;
  j["amp_bound_mhz"] = spec.amp_bound / kTwoPi * 1e3;
  j["detuning_bound_ghz"] = spec.detuning_bound / kTwoPi;
  j["pulse_resolution_ns"] = spec.pulse_resolution;
  j["gate_times_ns"] = {{"single_qubit", spec.gate_times.single_qubit}, {"two_qubit", spec.gate_times.two_qubit}};
  if (spec.collapse) {
    auto rates = nlohmann::ordered_json::array();
    for (const auto& r : *spec.collapse)
      rates.push_back({r.gamma1 > 0 ? 1e-3 / r.gamma1 : 0.0, r.gamma2 > 0 ? 1e-3 / r.gamma2 : 0.0});
    j["collapse_inverse_rates_us"] = rates;
  }
  return j.dump(2);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

std::string_view preset_json(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return p.json;
  throw ValidationError("unknown device preset '" + std::string(name) + "'");
}

DeviceSpec device_preset(std::string_view name) { return parse_device(preset_json(name)); }

DeviceSpec resolve_device(std::string_view preset_or_path) {
  for (const auto& p : kPresets)
    if (p.name == preset_or_path) return parse_device(p.json);
  return load_device(std::filesystem::path(preset_or_path));
}

QuditSpace::QuditSpace(int n_qudits, int levels) : n_(n_qudits), d_(levels) {
  require(n_qudits >= 1 && levels >= 2, "QuditSpace: need n >= 1 qudits with d >= 2 levels");
  dim_ = 1;
  for (int q = 0; q < n_; ++q) dim_ *= d_;
  require(dim_ <= kMaxDeviceDim, "QuditSpace: dimension exceeds limit");
  levels_.resize(static_cast<std::size_t>(dim_ * n_));
  for (Eigen::Index idx = 0; idx < dim_; ++idx) {
    Eigen::Index rem = idx;
    for (int q = n_ - 1; q >= 0; --q) {
      levels_[static_cast<std::size_t>(idx * n_ + q)] = static_cast<int>(rem % d_);
      rem /= d_;
    }
  }
  lowering_.resize(static_cast<std::size_t>(n_));
  for (int q = 0; q < n_; ++q) {
    Eigen::Index stride = 1;
    for (int p = q + 1; p < n_; ++p) stride *= d_;
    for (Eigen::Index idx = 0; idx < dim_; ++idx) {
      const int lv = level(idx, q);
      if (lv >= 1) lowering_[static_cast<std::size_t>(q)].push_back({idx, idx - stride, std::sqrt(double(lv))});
    }
  }
  for (std::size_t bits = 0; bits < (std::size_t{1} << n_); ++bits) {
    Eigen::Index idx = 0;
    for (int q = 0; q < n_; ++q) idx = idx * d_ + static_cast<Eigen::Index>((bits >> (n_ - 1 - q)) & 1U);
    computational_.push_back(idx);
  }
}

std::vector<QuditSpace::Transition> QuditSpace::exchange(int i, int j) const {
  // a_i^dagger a_j |.. n_i .. n_j ..> = sqrt(n_j) sqrt(n_i + 1) |.. n_i + 1 .. n_j - 1 ..>
  Eigen::Index stride_i = 1, stride_j = 1;
  for (int p = i + 1; p < n_; ++p) stride_i *= d_;
  for (int p = j + 1; p < n_; ++p) stride_j *= d_;
  std::vector<Transition> out;
  for (Eigen::Index idx = 0; idx < dim_; ++idx) {
    const int ni = level(idx, i);
    const int nj = level(idx, j);
    if (nj >= 1 && ni <= d_ - 2) {
      out.push_back({idx, idx - stride_j + stride_i, std::sqrt(double(nj)) * std::sqrt(double(ni + 1))});
    }
  }
  return out;
}

Eigen::Index QuditSpace::index_of(const std::vector<int>& qudit_levels) const {
  require(static_cast<int>(qudit_levels.size()) == n_, "QuditSpace: level list has wrong length");
  Eigen::Index idx = 0;
  for (int lv : qudit_levels) {
    require(lv >= 0 && lv < d_, "QuditSpace: level out of range");
    idx = idx * d_ + lv;
  }
  return idx;
}

Eigen::Index QuditSpace::index_of_bits(std::string_view bits) const {
  require(static_cast<int>(bits.size()) == n_, "QuditSpace: bitstring length must equal the qudit count");
  std::vector<int> lv;
  for (char c : bits) {
    require(c == '0' || c == '1', "QuditSpace: bitstring must be over {0,1}");
    lv.push_back(c - '0');
  }
  return index_of(lv);
}

std::string QuditSpace::label(Eigen::Index index) const {
  std::string s;
  for (int q = 0; q < n_; ++q) s.push_back(static_cast<char>('0' + level(index, q)));
  return s;
}

CMatrix QuditSpace::lowering_matrix(int q) const {
  CMatrix m = CMatrix::Zero(dim_, dim_);
  for (const auto& t : lowering(q)) m(t.to, t.from) = t.factor;
  return m;
}

RVector QuditSpace::number_diagonal(int q) const {
  RVector n(dim_);
  for (Eigen::Index idx = 0; idx < dim_; ++idx) n(idx) = level(idx, q);
  return n;
}

RVector frame_generator_diagonal(const DeviceSpec& spec, const QuditSpace& space) {
  RVector diag = RVector::Zero(space.dim());
  for (int q = 0; q < space.n_qudits(); ++q) diag += spec.omega[static_cast<std::size_t>(q)] * space.number_diagonal(q);
  return diag;
}

CMatrix device_hamiltonian(const DeviceSpec& spec) {
  spec.validate();
  const QuditSpace space(spec.n_qubits(), spec.levels);
  CMatrix h = CMatrix::Zero(space.dim(), space.dim());
  for (int q = 0; q < spec.n_qubits(); ++q) {
    const RVector n = space.number_diagonal(q);
    const double w = spec.omega[static_cast<std::size_t>(q)];
    const double delta = spec.anharmonicity[static_cast<std::size_t>(q)];
    for (Eigen::Index i = 0; i < space.dim(); ++i) h(i, i) += w * n(i) - 0.5 * delta * n(i) * (n(i) - 1.0);
  }
  for (const auto& c : spec.couplings) {
    for (const auto& t : space.exchange(c.i, c.j)) {
      h(t.to, t.from) += c.g * t.factor;
      h(t.from, t.to) += c.g * t.factor;
    }
  }
  return h;
}

CMatrix control_hamiltonian(const DeviceSpec& spec, const PulseSchedule& schedule, double t) {
  require(schedule.n_qubits() == spec.n_qubits(), "control_hamiltonian: schedule/device qubit mismatch");
  require(t >= 0.0 && t <= schedule.duration, "control_hamiltonian: t outside [0, T]");
  const QuditSpace space(spec.n_qubits(), spec.levels);
  CMatrix h = CMatrix::Zero(space.dim(), space.dim());
  const int k = schedule.segment_index(t);
  for (int q = 0; q < spec.n_qubits(); ++q) {
    const double amp = schedule.amplitudes(q, k);
    if (amp == 0.0) continue;
    const double v = spec.omega[static_cast<std::size_t>(q)] - schedule.detunings(q);
    const Complex w = amp * std::exp(kI * (v * t + schedule.phase(q, k)));
    for (const auto& tr : space.lowering(q)) {
      h(tr.to, tr.from) += w * tr.factor;
      h(tr.from, tr.to) += std::conj(w) * tr.factor;
    }
  }
  return h;
}

CVector rotating_frame_transform(const DeviceSpec& spec, const CVector& state, double t, FrameDirection direction) {
  const QuditSpace space(spec.n_qubits(), spec.levels);
  require(state.size() == space.dim(), "rotating_frame_transform: state dimension mismatch");
  const RVector diag = frame_generator_diagonal(spec, space);
  const double sign = direction == FrameDirection::kToLab ? -1.0 : 1.0;
  CVector out(state.size());
  for (Eigen::Index i = 0; i < state.size(); ++i) out(i) = std::exp(kI * (sign * t * diag(i))) * state(i);
  return out;
}

CMatrix rotating_frame_transform_operator(const DeviceSpec& spec, const CMatrix& op, double t,
                                          FrameDirection direction) {
  const QuditSpace space(spec.n_qubits(), spec.levels);
  require(op.rows() == space.dim() && op.cols() == space.dim(), "rotating_frame_transform: operator dimension mismatch");
  const RVector diag = frame_generator_diagonal(spec, space);
  const double sign = direction == FrameDirection::kToLab ? -1.0 : 1.0;
  CVector phase(space.dim());
  for (Eigen::Index i = 0; i < space.dim(); ++i) phase(i) = std::exp(kI * (sign * t * diag(i)));
  return phase.asDiagonal() * op * phase.conjugate().asDiagonal();
}

}  // namespace qoc
