#include "qoc/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

namespace qoc {

DensityMatrix DensityMatrix::pure(const QuantumState& psi) {
  return {psi.amplitudes * psi.amplitudes.adjoint(), psi.frame};
}

double DensityMatrix::min_eigenvalue() const {
  const CMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void DensityMatrix::validate(double tol) const {
  require(rho.rows() == rho.cols() && rho.rows() > 0, "DensityMatrix: must be square and non-empty");
  require(std::abs(rho.trace() - Complex{1.0, 0.0}) <= tol, "DensityMatrix: trace must be 1");
  require((rho - rho.adjoint()).cwiseAbs().maxCoeff() <= tol, "DensityMatrix: must be Hermitian");
  require(min_eigenvalue() >= -tol, "DensityMatrix: must be positive semidefinite");
}

QuantumState basis_state(const DeviceSpec& spec, std::string_view bits) {
  const QuditSpace space(spec.n_qubits(), spec.levels);
  QuantumState s{CVector::Zero(space.dim()), Frame::kLab};
  s.amplitudes(space.index_of_bits(bits)) = 1.0;
  return s;
}

double PropagationOptions::resolved_substep() const {
  if (substep > 0.0) return substep;
  return frame == Frame::kRotating ? kDefaultRotatingSubstep : kDefaultLabSubstep;
}

namespace {

// Generator coefficients frozen at one midpoint time.
struct Coefficients {
  std::vector<Complex> edge;         // coefficient of a_i^+ a_j for each coupling
  std::vector<Complex> drive;        // coefficient of a_q
  std::vector<Complex> drive_phase;  // e^{i theta_q(t)}
  double t = 0.0;
  int segment = 0;
};

struct StepPlan {
  int per_segment = 0;
  double h = 0.0;
  int total = 0;
};

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

struct PulsePropagator::Impl {
  DeviceSpec spec;
  PropagationOptions options;
  QuditSpace space;
  std::vector<std::vector<QuditSpace::Transition>> exchange;  // per coupling, a_i^+ a_j
  RVector diag;      // static diagonal minus shift
  double shift = 0;  // global energy offset removed from the diagonal
  RVector number_weight;  // sum_q G1 n_q + G2 n_q^2
  bool dissipative = false;
  std::vector<RVector> numbers;

  explicit Impl(const DeviceSpec& s, PropagationOptions o) : spec(s), options(o) {
    spec.validate();
    require(options.substep >= 0.0 && std::isfinite(options.substep), "propagate: substep must be > 0");
    space = QuditSpace(spec.n_qubits(), spec.levels);
    for (const auto& c : spec.couplings) exchange.push_back(space.exchange(c.i, c.j));
    diag = RVector::Zero(space.dim());
    for (int q = 0; q < spec.n_qubits(); ++q) {
      numbers.push_back(space.number_diagonal(q));
      const RVector& n = numbers.back();
      const double delta = spec.anharmonicity[static_cast<std::size_t>(q)];
      diag -= 0.5 * delta * n.cwiseProduct((n.array() - 1.0).matrix());
      if (options.frame == Frame::kLab) diag += spec.omega[static_cast<std::size_t>(q)] * n;
    }
    shift = 0.5 * (diag.maxCoeff() + diag.minCoeff());
    diag.array() -= shift;

    number_weight = RVector::Zero(space.dim());
    if (spec.collapse) {
      for (int q = 0; q < spec.n_qubits(); ++q) {
        const auto& r = (*spec.collapse)[static_cast<std::size_t>(q)];
        const RVector& n = numbers[static_cast<std::size_t>(q)];
        number_weight += r.gamma1 * n + r.gamma2 * n.cwiseProduct(n);
        if (r.gamma1 > 0.0 || r.gamma2 > 0.0) dissipative = true;
      }
    }
  }

  StepPlan plan(const PulseSchedule& s) const {
    s.validate(spec);
    StepPlan p;
    if (s.duration <= 0.0) return p;
    const double width = s.segment_width();
    p.per_segment = std::max(1, static_cast<int>(std::ceil(width / options.resolved_substep() - 1e-9)));
    p.h = width / p.per_segment;
    p.total = p.per_segment * s.segments();
    return p;
  }

  double step_mid_time(const PulseSchedule& s, const StepPlan& p, int k) const {
    const int seg = k / p.per_segment;
    const int sub = k % p.per_segment;
    return seg * s.segment_width() + (sub + 0.5) * p.h;
  }

  double step_end_time(const PulseSchedule& s, const StepPlan& p, int k) const {
    const int seg = k / p.per_segment;
    const int sub = k % p.per_segment;
    return seg * s.segment_width() + (sub + 1) * p.h;
  }

  Coefficients coefficients(const PulseSchedule& s, const StepPlan& p, int k) const {
    Coefficients c;
    c.segment = k / p.per_segment;
    c.t = step_mid_time(s, p, k);
    const bool rotating = options.frame == Frame::kRotating;
    for (const auto& cp : spec.couplings) {
      const double dw = spec.omega[static_cast<std::size_t>(cp.i)] - spec.omega[static_cast<std::size_t>(cp.j)];
      c.edge.push_back(rotating ? cp.g * std::exp(kI * (dw * c.t)) : Complex{cp.g, 0.0});
    }
    for (int q = 0; q < spec.n_qubits(); ++q) {
      const double phi = s.phase(q, c.segment);
      const double theta = rotating ? phi - s.detunings(q) * c.t
                                    : (spec.omega[static_cast<std::size_t>(q)] - s.detunings(q)) * c.t + phi;
      const Complex e = std::exp(kI * theta);
      c.drive_phase.push_back(e);
      c.drive.push_back(s.amplitudes(q, c.segment) * e);
    }
    return c;
  }

  // Upper bound on ||H - shift|| for the Taylor truncation order.
  double hamiltonian_bound(const PulseSchedule& s) const {
    const double amp = std::max(spec.amp_bound, s.amplitudes.size() ? s.amplitudes.cwiseAbs().maxCoeff() : 0.0);
    double b = diag.cwiseAbs().maxCoeff();
    b += spec.n_qubits() * 2.0 * amp * std::sqrt(spec.levels - 1.0);
    for (const auto& cp : spec.couplings) b += 2.0 * std::abs(cp.g) * (spec.levels - 1.0);
    return b;
  }

  double dissipator_bound() const {
    if (!dissipative) return 0.0;
    double b = 0.0;
    for (const auto& r : *spec.collapse) {
      const double d1 = spec.levels - 1.0;
      b += 4.0 * (r.gamma1 * d1 + r.gamma2 * d1 * d1);
    }
    return b;
  }

  static int taylor_order(double bound) {
    require(bound <= 12.0, "propagate: substep too large for the step exponential (||h H|| bound " +
                               std::to_string(bound) + "); reduce the substep");
    int m = 1;
    double term = bound;
    while (m < 90) {
      const double next = term * bound / (m + 1);
      if (next < 1e-17 && m >= 4) break;
      term = next;
      ++m;
    }
    return m;
  }

  // y = (H - shift) x for a vector or a block of columns.
  template <typename M>
  void apply_h(const Coefficients& c, const M& x, M& y) const {
    y = diag.asDiagonal() * x;
    for (std::size_t e = 0; e < exchange.size(); ++e) {
      add_transitions(exchange[e], c.edge[e], x, y);
      add_transitions_adjoint(exchange[e], std::conj(c.edge[e]), x, y);
    }
    for (int q = 0; q < spec.n_qubits(); ++q) {
      const Complex z = c.drive[static_cast<std::size_t>(q)];
      if (z == Complex{}) continue;
      add_transitions(space.lowering(q), z, x, y);
      add_transitions_adjoint(space.lowering(q), std::conj(z), x, y);
    }
  }

  // Liouvillian L(X) = -i[H, X] + D(X); `adjoint` selects L^+(X) = i[H, X] + D^+(X).
  void apply_liouvillian(const Coefficients& c, const CMatrix& x, CMatrix& y, bool adjoint) const {
    CMatrix hx(x.rows(), x.cols());
    apply_h(c, x, hx);
    CMatrix xa = x.adjoint();
    CMatrix hxa(x.rows(), x.cols());
    apply_h(c, xa, hxa);
    // x H = (H x^+)^+
    const Complex s = adjoint ? kI : -kI;
    y = s * (hx - hxa.adjoint());
    if (!dissipative) return;
    y -= number_weight.asDiagonal() * x;
    y -= x * number_weight.asDiagonal();
    for (int q = 0; q < spec.n_qubits(); ++q) {
      const auto& r = (*spec.collapse)[static_cast<std::size_t>(q)];
      if (r.gamma1 > 0.0) {
        // a X a^+ (or a^+ X a for the adjoint map)
        CMatrix ax = CMatrix::Zero(x.rows(), x.cols());
        if (adjoint) {
          add_transitions_adjoint(space.lowering(q), 1.0, x, ax);
        } else {
          add_transitions(space.lowering(q), 1.0, x, ax);
        }
        CMatrix axa = ax.adjoint();
        CMatrix out = CMatrix::Zero(x.rows(), x.cols());
        if (adjoint) {
          add_transitions_adjoint(space.lowering(q), 1.0, axa, out);
        } else {
          add_transitions(space.lowering(q), 1.0, axa, out);
        }
        y += 2.0 * r.gamma1 * out.adjoint();
      }
      if (r.gamma2 > 0.0) {
        const RVector& n = numbers[static_cast<std::size_t>(q)];
        y += 2.0 * r.gamma2 * (n.asDiagonal() * x * n.asDiagonal());
      }
    }
  }

  // <v, a_q z> and <v, a_q^+ z> for state vectors.
  void drive_overlaps(int q, const CVector& v, const CVector& z, Complex& alpha, Complex& beta) const {
    for (const auto& t : space.lowering(q)) {
      alpha += std::conj(v(t.to)) * t.factor * z(t.from);
      beta += std::conj(v(t.from)) * t.factor * z(t.to);
    }
  }

  // <V, [a_q, Z]> and <V, [a_q^+, Z]> in the Hilbert-Schmidt product.
  void drive_overlaps(int q, const CMatrix& v, const CMatrix& z, Complex& alpha, Complex& beta) const {
    const Eigen::Index n = z.rows();
    for (const auto& t : space.lowering(q)) {
      // (a Z)_{to, c} += f Z_{from, c};  (Z a)_{r, from} += f Z_{r, to}
      // (a^+ Z)_{from, c} += f Z_{to, c};  (Z a^+)_{r, to} += f Z_{r, from}
      for (Eigen::Index col = 0; col < n; ++col) {
        alpha += std::conj(v(t.to, col)) * t.factor * z(t.from, col);
        beta += std::conj(v(t.from, col)) * t.factor * z(t.to, col);
      }
      for (Eigen::Index row = 0; row < n; ++row) {
        alpha -= std::conj(v(row, t.from)) * t.factor * z(row, t.to);
        beta -= std::conj(v(row, t.to)) * t.factor * z(row, t.from);
      }
    }
  }

  CVector to_lab(const CVector& psi, double t) const {
    if (options.frame == Frame::kLab) return psi;
    return rotating_frame_transform(spec, psi, t, FrameDirection::kToLab);
  }
  CVector to_rotating(const CVector& psi, double t) const {
    if (options.frame == Frame::kLab) return psi;
    return rotating_frame_transform(spec, psi, t, FrameDirection::kToRotating);
  }
  CMatrix to_lab(const CMatrix& rho, double t) const {
    if (options.frame == Frame::kLab) return rho;
    return rotating_frame_transform_operator(spec, rho, t, FrameDirection::kToLab);
  }
  CMatrix to_rotating(const CMatrix& rho, double t) const {
    if (options.frame == Frame::kLab) return rho;
    return rotating_frame_transform_operator(spec, rho, t, FrameDirection::kToRotating);
  }
};

namespace {

// Unitary steps on state vectors: A x = -i h (H - shift) x, U = e^{-i h shift} sum A^l / l!.
struct StatePolicy {
  using State = CVector;
  const PulsePropagator::Impl& impl;
  double h;
  int order;

  Complex phase() const { return std::exp(-kI * (h * impl.shift)); }
  double weight() const { return 2.0; }
  void apply(const Coefficients& c, const State& x, State& y) const {
    impl.apply_h(c, x, y);
    y *= -kI * h;
  }
  void apply_adjoint(const Coefficients& c, const State& x, State& y) const {
    impl.apply_h(c, x, y);
    y *= kI * h;
  }
  static Complex inner(const State& a, const State& b) { return a.dot(b); }
};

// Liouvillian steps on density matrices: A X = h L(X), no phase.
struct DensityPolicy {
  using State = CMatrix;
  const PulsePropagator::Impl& impl;
  double h;
  int order;

  Complex phase() const { return {1.0, 0.0}; }
  double weight() const { return 1.0; }
  void apply(const Coefficients& c, const State& x, State& y) const {
    impl.apply_liouvillian(c, x, y, false);
    y *= h;
  }
  void apply_adjoint(const Coefficients& c, const State& x, State& y) const {
    impl.apply_liouvillian(c, x, y, true);
    y *= h;
  }
  static Complex inner(const State& a, const State& b) { return (a.adjoint() * b).trace(); }
};

template <typename Policy>
typename Policy::State taylor_step(const Policy& pol, const Coefficients& c, const typename Policy::State& x) {
  typename Policy::State out = x;
  typename Policy::State term = x;
  typename Policy::State next(x.rows(), x.cols());
  for (int l = 1; l <= pol.order; ++l) {
    pol.apply(c, term, next);
    term = next / static_cast<double>(l);
    out += term;
  }
  return pol.phase() * out;
}

template <typename Policy>
typename Policy::State taylor_step_adjoint(const Policy& pol, const Coefficients& c,
                                           const typename Policy::State& x) {
  typename Policy::State out = x;
  typename Policy::State term = x;
  typename Policy::State next(x.rows(), x.cols());
  for (int l = 1; l <= pol.order; ++l) {
    pol.apply_adjoint(c, term, next);
    term = next / static_cast<double>(l);
    out += term;
  }
  return std::conj(pol.phase()) * out;
}

// Adds the contribution of one step to the gradient and returns the pulled-back cotangent.
//
// For the truncated series T(A) = sum_{m<=M} A^m / m!, the derivative along E is
// sum_m 1/m! sum_{j+l=m-1} A^j E A^l, so
//   <lambda, dT x> = sum_j <(A^+)^j lambda, E z_j>,  z_j = sum_{l<=M-1-j} A^l x / (j+l+1)!.
template <typename Policy>
typename Policy::State backprop_step(const Policy& pol, const PulsePropagator::Impl& impl, const Coefficients& c,
                                     const PulseSchedule& schedule, const ParamLayout& layout,
                                     const typename Policy::State& x, const typename Policy::State& lambda,
                                     RVector& grad) {
  using State = typename Policy::State;
  const int m = pol.order;
  std::vector<State> u(static_cast<std::size_t>(m));
  std::vector<State> v(static_cast<std::size_t>(m + 1));
  u[0] = x;
  for (int l = 1; l < m; ++l) {
    u[static_cast<std::size_t>(l)].resize(x.rows(), x.cols());
    pol.apply(c, u[static_cast<std::size_t>(l - 1)], u[static_cast<std::size_t>(l)]);
  }
  v[0] = lambda;
  for (int j = 1; j <= m; ++j) {
    v[static_cast<std::size_t>(j)].resize(x.rows(), x.cols());
    pol.apply_adjoint(c, v[static_cast<std::size_t>(j - 1)], v[static_cast<std::size_t>(j)]);
  }

  const int nq = impl.spec.n_qubits();
  std::vector<Complex> alpha(static_cast<std::size_t>(nq)), beta(static_cast<std::size_t>(nq));
  State z(x.rows(), x.cols());
  for (int j = 0; j < m; ++j) {
    z.setZero();
    for (int l = 0; l <= m - 1 - j; ++l) z += u[static_cast<std::size_t>(l)] / factorial(j + l + 1);
    for (int q = 0; q < nq; ++q)
      impl.drive_overlaps(q, v[static_cast<std::size_t>(j)], z, alpha[static_cast<std::size_t>(q)],
                          beta[static_cast<std::size_t>(q)]);
  }

  // dH = w a_q + conj(w) a_q^+, E = -i h dH (both policies scale the commutator the same way).
  const Complex pref = pol.weight() * pol.phase() * (-kI * pol.h);
  auto contribution = [&](int q, Complex w) {
    return std::real(pref * (w * alpha[static_cast<std::size_t>(q)] + std::conj(w) * beta[static_cast<std::size_t>(q)]));
  };
  const int seg = c.segment;
  for (int q = 0; q < nq; ++q) {
    const Complex e = c.drive_phase[static_cast<std::size_t>(q)];
    const double amp = schedule.amplitudes(q, seg);
    grad(layout.amplitude_index(q, seg)) += contribution(q, e);
    if (layout.mode == PhaseMode::kDetuning) {
      grad(layout.detuning_index(q)) += contribution(q, -kI * c.t * amp * e);
    } else {
      grad(layout.phase_index(q, seg)) += contribution(q, kI * amp * e);
    }
  }

  State back = v[0];
  for (int j = 1; j <= m; ++j) back += v[static_cast<std::size_t>(j)] / factorial(j);
  return std::conj(pol.phase()) * back;
}

}  // namespace

PulsePropagator::PulsePropagator(const DeviceSpec& spec, PropagationOptions options)
    : impl_(std::make_unique<Impl>(spec, options)) {}
PulsePropagator::~PulsePropagator() = default;
PulsePropagator::PulsePropagator(PulsePropagator&&) noexcept = default;
PulsePropagator& PulsePropagator::operator=(PulsePropagator&&) noexcept = default;

const DeviceSpec& PulsePropagator::device() const { return impl_->spec; }
const QuditSpace& PulsePropagator::space() const { return impl_->space; }
const PropagationOptions& PulsePropagator::options() const { return impl_->options; }

int PulsePropagator::step_count(const PulseSchedule& schedule) const { return impl_->plan(schedule).total; }

namespace {

void check_state(const PulsePropagator::Impl& impl, const CVector& psi, Frame frame) {
  require(psi.size() == impl.space.dim(), "propagate: state dimension does not match d^N");
  require(frame == Frame::kLab, "propagate: initial state must be tagged lab frame");
}

void check_density(const PulsePropagator::Impl& impl, const DensityMatrix& rho) {
  require(rho.rho.rows() == impl.space.dim() && rho.rho.cols() == impl.space.dim(),
          "propagate_lindblad: density matrix dimension does not match d^N");
  require(rho.frame == Frame::kLab, "propagate_lindblad: initial density matrix must be tagged lab frame");
  require((rho.rho - rho.rho.adjoint()).cwiseAbs().maxCoeff() <= 1e-10, "propagate_lindblad: input is not Hermitian");
}

}  // namespace

QuantumState PulsePropagator::propagate(const QuantumState& initial, const PulseSchedule& schedule) const {
  check_state(*impl_, initial.amplitudes, initial.frame);
  const StepPlan p = impl_->plan(schedule);
  if (p.total == 0) return initial;
  const StatePolicy pol{*impl_, p.h, Impl::taylor_order(p.h * impl_->hamiltonian_bound(schedule))};
  CVector psi = initial.amplitudes;
  for (int k = 0; k < p.total; ++k) psi = taylor_step(pol, impl_->coefficients(schedule, p, k), psi);
  return {impl_->to_lab(psi, schedule.duration), Frame::kLab};
}

Trajectory PulsePropagator::trajectory(const QuantumState& initial, const PulseSchedule& schedule) const {
  check_state(*impl_, initial.amplitudes, initial.frame);
  const StepPlan p = impl_->plan(schedule);
  Trajectory out;
  out.times.push_back(0.0);
  out.lab_states.push_back(initial.amplitudes);
  if (p.total == 0) return out;
  const StatePolicy pol{*impl_, p.h, Impl::taylor_order(p.h * impl_->hamiltonian_bound(schedule))};
  CVector psi = initial.amplitudes;
  for (int k = 0; k < p.total; ++k) {
    psi = taylor_step(pol, impl_->coefficients(schedule, p, k), psi);
    const double t = impl_->step_end_time(schedule, p, k);
    out.times.push_back(t);
    out.lab_states.push_back(impl_->to_lab(psi, t));
  }
  return out;
}

DensityMatrix PulsePropagator::propagate(const DensityMatrix& initial, const PulseSchedule& schedule) const {
  check_density(*impl_, initial);
  const StepPlan p = impl_->plan(schedule);
  if (p.total == 0) return initial;
  const double bound = 2.0 * impl_->hamiltonian_bound(schedule) + impl_->dissipator_bound();
  const DensityPolicy pol{*impl_, p.h, Impl::taylor_order(p.h * bound)};
  CMatrix rho = initial.rho;
  for (int k = 0; k < p.total; ++k) rho = taylor_step(pol, impl_->coefficients(schedule, p, k), rho);
  return {impl_->to_lab(rho, schedule.duration), Frame::kLab};
}

DensityTrajectory PulsePropagator::trajectory(const DensityMatrix& initial, const PulseSchedule& schedule) const {
  check_density(*impl_, initial);
  const StepPlan p = impl_->plan(schedule);
  DensityTrajectory out;
  out.times.push_back(0.0);
  out.lab_states.push_back(initial.rho);
  if (p.total == 0) return out;
  const double bound = 2.0 * impl_->hamiltonian_bound(schedule) + impl_->dissipator_bound();
  const DensityPolicy pol{*impl_, p.h, Impl::taylor_order(p.h * bound)};
  CMatrix rho = initial.rho;
  for (int k = 0; k < p.total; ++k) {
    rho = taylor_step(pol, impl_->coefficients(schedule, p, k), rho);
    const double t = impl_->step_end_time(schedule, p, k);
    out.times.push_back(t);
    out.lab_states.push_back(impl_->to_lab(rho, t));
  }
  return out;
}

RVector PulsePropagator::gradient(const QuantumState& initial, const PulseSchedule& schedule,
                                  const ParamLayout& layout, const StateCotangent& cotangent,
                                  QuantumState* final_state) const {
  check_state(*impl_, initial.amplitudes, initial.frame);
  require(layout.n_qubits == schedule.n_qubits() && layout.segments == schedule.segments(),
          "gradient: parameter layout does not match the schedule");
  const StepPlan p = impl_->plan(schedule);
  RVector grad = RVector::Zero(layout.size());
  if (p.total == 0) {
    if (final_state) *final_state = initial;
    cotangent(initial.amplitudes);
    return grad;
  }
  const StatePolicy pol{*impl_, p.h, Impl::taylor_order(p.h * impl_->hamiltonian_bound(schedule))};
  std::vector<CVector> states;
  states.reserve(static_cast<std::size_t>(p.total));
  std::vector<Coefficients> coefs;
  coefs.reserve(static_cast<std::size_t>(p.total));
  CVector psi = initial.amplitudes;
  for (int k = 0; k < p.total; ++k) {
    states.push_back(psi);
    coefs.push_back(impl_->coefficients(schedule, p, k));
    psi = taylor_step(pol, coefs.back(), psi);
  }
  const CVector lab = impl_->to_lab(psi, schedule.duration);
  if (final_state) *final_state = {lab, Frame::kLab};
  CVector lambda = impl_->to_rotating(cotangent(lab), schedule.duration);
  for (int k = p.total - 1; k >= 0; --k) {
    lambda = backprop_step(pol, *impl_, coefs[static_cast<std::size_t>(k)], schedule, layout,
                           states[static_cast<std::size_t>(k)], lambda, grad);
  }
  return grad;
}

RVector PulsePropagator::gradient(const DensityMatrix& initial, const PulseSchedule& schedule,
                                  const ParamLayout& layout, const CMatrix& observable,
                                  DensityMatrix* final_state) const {
  check_density(*impl_, initial);
  require(layout.n_qubits == schedule.n_qubits() && layout.segments == schedule.segments(),
          "gradient: parameter layout does not match the schedule");
  require(observable.rows() == impl_->space.dim() && observable.cols() == impl_->space.dim(),
          "gradient: observable dimension mismatch");
  const StepPlan p = impl_->plan(schedule);
  RVector grad = RVector::Zero(layout.size());
  if (p.total == 0) {
    if (final_state) *final_state = initial;
    return grad;
  }
  const double bound = 2.0 * impl_->hamiltonian_bound(schedule) + impl_->dissipator_bound();
  const DensityPolicy pol{*impl_, p.h, Impl::taylor_order(p.h * bound)};
  std::vector<CMatrix> states;
  states.reserve(static_cast<std::size_t>(p.total));
  std::vector<Coefficients> coefs;
  coefs.reserve(static_cast<std::size_t>(p.total));
  CMatrix rho = initial.rho;
  for (int k = 0; k < p.total; ++k) {
    states.push_back(rho);
    coefs.push_back(impl_->coefficients(schedule, p, k));
    rho = taylor_step(pol, coefs.back(), rho);
  }
  if (final_state) *final_state = {impl_->to_lab(rho, schedule.duration), Frame::kLab};
  // Tr(O R rho R^+) = Tr(R^+ O R rho)
  CMatrix lambda = impl_->to_rotating(observable, schedule.duration);
  for (int k = p.total - 1; k >= 0; --k) {
    lambda = backprop_step(pol, *impl_, coefs[static_cast<std::size_t>(k)], schedule, layout,
                           states[static_cast<std::size_t>(k)], lambda, grad);
  }
  return grad;
}

QuantumState propagate(const QuantumState& state, const PulseSchedule& schedule, const DeviceSpec& spec,
                       double substep, Frame frame) {
  require(substep > 0.0, "propagate: substep must be > 0");
  return PulsePropagator(spec, {frame, substep}).propagate(state, schedule);
}

DensityMatrix propagate_lindblad(const DensityMatrix& rho, const PulseSchedule& schedule, const DeviceSpec& spec,
                                 double substep, Frame frame) {
  require(substep > 0.0, "propagate_lindblad: substep must be > 0");
  require(spec.collapse.has_value(), "propagate_lindblad: device has no collapse rates");
  return PulsePropagator(spec, {frame, substep}).propagate(rho, schedule);
}

namespace {

Leakage leakage_from_populations(const RVector& pop, const DeviceSpec& spec) {
  const QuditSpace space(spec.n_qubits(), spec.levels);
  require(pop.size() == space.dim(), "leakage: dimension mismatch");
  Leakage out;
  out.per_qubit.assign(static_cast<std::size_t>(spec.n_qubits()), 0.0);
  out.two_level = spec.levels == 2;
  if (out.two_level) return out;
  double computational = 0.0;
  for (Eigen::Index idx : space.computational_indices()) computational += pop(idx);
  for (Eigen::Index idx = 0; idx < space.dim(); ++idx) {
    for (int q = 0; q < spec.n_qubits(); ++q)
      if (space.level(idx, q) >= 2) out.per_qubit[static_cast<std::size_t>(q)] += pop(idx);
  }
  out.total = std::max(0.0, pop.sum() - computational);
  return out;
}

}  // namespace

Leakage leakage(const QuantumState& state, const DeviceSpec& spec) {
  return leakage_from_populations(state.amplitudes.cwiseAbs2(), spec);
}

Leakage leakage(const DensityMatrix& rho, const DeviceSpec& spec) {
  return leakage_from_populations(rho.rho.diagonal().real(), spec);
}

double population_at_or_above(const CVector& lab_state, const QuditSpace& space, int level) {
  double p = 0.0;
  for (Eigen::Index idx = 0; idx < space.dim(); ++idx) {
    for (int q = 0; q < space.n_qudits(); ++q) {
      if (space.level(idx, q) >= level) {
        p += std::norm(lab_state(idx));
        break;
      }
    }
  }
  return p;
}

EmbeddedObservable::EmbeddedObservable(const SpinHamiltonian& h, const DeviceSpec& spec)
    : space_(spec.n_qubits(), spec.levels), h2_(pauli_matrix(h)) {
  require(h.n_qubits() == spec.n_qubits(), "measure_energy: Hamiltonian and device qubit counts differ");
}

double EmbeddedObservable::expectation(const CVector& psi) const {
  require(psi.size() == space_.dim(), "measure_energy: state dimension mismatch");
  const auto& idx = space_.computational_indices();
  CVector c(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) c(static_cast<Eigen::Index>(i)) = psi(idx[i]);
  return std::real(c.dot(h2_ * c));
}

double EmbeddedObservable::expectation(const CMatrix& rho) const {
  require(rho.rows() == space_.dim(), "measure_energy: density matrix dimension mismatch");
  const auto& idx = space_.computational_indices();
  Complex acc{};
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      acc += h2_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * rho(idx[b], idx[a]);
  return acc.real();
}

CVector EmbeddedObservable::apply(const CVector& psi) const {
  const auto& idx = space_.computational_indices();
  CVector c(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) c(static_cast<Eigen::Index>(i)) = psi(idx[i]);
  const CVector hc = h2_ * c;
  CVector out = CVector::Zero(psi.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(idx[i]) = hc(static_cast<Eigen::Index>(i));
  return out;
}

CMatrix EmbeddedObservable::matrix() const {
  const auto& idx = space_.computational_indices();
  CMatrix m = CMatrix::Zero(space_.dim(), space_.dim());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      m(idx[a], idx[b]) = h2_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return m;
}

double measure_energy(const QuantumState& state, const SpinHamiltonian& h, const DeviceSpec& spec) {
  require(state.frame == Frame::kLab, "measure_energy: state must be in the lab frame");
  return EmbeddedObservable(h, spec).expectation(state.amplitudes);
}

double measure_energy(const DensityMatrix& rho, const SpinHamiltonian& h, const DeviceSpec& spec) {
  require(rho.frame == Frame::kLab, "measure_energy: density matrix must be in the lab frame");
  return EmbeddedObservable(h, spec).expectation(rho.rho);
}

namespace {

template <typename Expect>
double shot_std_impl(const SpinHamiltonian& h, int shots, Expect&& expect) {
  require(shots > 0, "shot_noise_std: shots must be > 0");
  double var = 0.0;
  for (const auto& t : h.terms()) {
    if (t.word.find_first_not_of('I') == std::string::npos) continue;
    SpinHamiltonian single(h.n_qubits());
    single.add(1.0, t.word);
    const double e = expect(single);
    var += t.coefficient * t.coefficient * std::max(0.0, 1.0 - e * e) / shots;
  }
  return std::sqrt(var);
}

}  // namespace

double shot_noise_std(const CVector& lab_state, const SpinHamiltonian& h, const DeviceSpec& spec, int shots) {
  return shot_std_impl(h, shots,
                       [&](const SpinHamiltonian& p) { return EmbeddedObservable(p, spec).expectation(lab_state); });
}

double shot_noise_std(const CMatrix& lab_rho, const SpinHamiltonian& h, const DeviceSpec& spec, int shots) {
  return shot_std_impl(h, shots,
                       [&](const SpinHamiltonian& p) { return EmbeddedObservable(p, spec).expectation(lab_rho); });
}

std::vector<ProbabilityRecord> probability_trace(const Trajectory& trajectory, const QuditSpace& space,
                                                 double threshold) {
  std::vector<double> peak(static_cast<std::size_t>(space.dim()), 0.0);
  for (const auto& psi : trajectory.lab_states)
    for (Eigen::Index i = 0; i < space.dim(); ++i)
      peak[static_cast<std::size_t>(i)] = std::max(peak[static_cast<std::size_t>(i)], std::norm(psi(i)));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < space.dim(); ++i)
    if (peak[static_cast<std::size_t>(i)] >= threshold) keep.push_back(i);
  std::vector<ProbabilityRecord> out;
  out.reserve(keep.size() * trajectory.times.size());
  for (std::size_t k = 0; k < trajectory.times.size(); ++k)
    for (Eigen::Index i : keep)
      out.push_back({trajectory.times[k], space.label(i), std::norm(trajectory.lab_states[k](i))});
  return out;
}

}  // namespace qoc
