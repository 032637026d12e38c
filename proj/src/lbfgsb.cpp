#include "qoc/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include <Eigen/LU>

namespace qoc {

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kGradient: return "projected gradient below tolerance";
    case StopReason::kObjectiveChange: return "relative objective change below tolerance";
    case StopReason::kTarget: return "target objective reached";
    case StopReason::kMaxIterations: return "iteration limit reached";
    case StopReason::kLineSearch: return "line search failed to decrease the objective";
  }
  return "unknown";
}

double projected_gradient_norm(const RVector& x, const RVector& g, const RVector& lo, const RVector& hi) {
  double norm = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double p = std::clamp(x(i) - g(i), lo(i), hi(i)) - x(i);
    norm = std::max(norm, std::abs(p));
  }
  return norm;
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Compact representation B = theta I - W M W^T of the limited-memory Hessian.
struct Memory {
  std::deque<RVector> s, y;
  double theta = 1.0;
  RMatrix w;  // n x 2k
  RMatrix m;  // 2k x 2k

  bool empty() const { return s.empty(); }

  void clear(Eigen::Index n) {
    s.clear();
    y.clear();
    theta = 1.0;
    w.resize(n, 0);
    m.resize(0, 0);
  }

  void push(const RVector& sk, const RVector& yk, int limit) {
    s.push_back(sk);
    y.push_back(yk);
    if (static_cast<int>(s.size()) > limit) {
      s.pop_front();
      y.pop_front();
    }
    theta = yk.squaredNorm() / sk.dot(yk);
    rebuild();
  }

  void rebuild() {
    const auto k = static_cast<Eigen::Index>(s.size());
    const Eigen::Index n = s.front().size();
    RMatrix smat(n, k), ymat(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      smat.col(j) = s[static_cast<std::size_t>(j)];
      ymat.col(j) = y[static_cast<std::size_t>(j)];
    }
    w.resize(n, 2 * k);
    w << ymat, theta * smat;
    const RMatrix sy = smat.transpose() * ymat;
    RMatrix mid = RMatrix::Zero(2 * k, 2 * k);
    mid.topLeftCorner(k, k) = RVector(-sy.diagonal()).asDiagonal();
    RMatrix lower = sy.triangularView<Eigen::StrictlyLower>();
    mid.topRightCorner(k, k) = lower.transpose();
    mid.bottomLeftCorner(k, k) = lower;
    mid.bottomRightCorner(k, k) = theta * (smat.transpose() * smat);
    m = mid.partialPivLu().inverse();
  }
};

struct CauchyResult {
  RVector xc;
  RVector c;  // W^T (xc - x) accumulator
};

CauchyResult cauchy_point(const RVector& x, const RVector& g, const RVector& lo, const RVector& hi, const Memory& mem) {
  const Eigen::Index n = x.size();
  const Eigen::Index cols = mem.w.cols();
  RVector t(n), d = -g;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (g(i) < 0.0) {
      t(i) = std::isfinite(hi(i)) ? (x(i) - hi(i)) / g(i) : kInf;
    } else if (g(i) > 0.0) {
      t(i) = std::isfinite(lo(i)) ? (x(i) - lo(i)) / g(i) : kInf;
    } else {
      t(i) = kInf;
    }
    if (t(i) <= 0.0) d(i) = 0.0;
  }
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < n; ++i)
    if (t(i) > 0.0 && std::isfinite(t(i))) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return t(a) < t(b); });

  CauchyResult out{x, RVector::Zero(cols)};
  RVector p = cols ? RVector(mem.w.transpose() * d) : RVector::Zero(0);
  double fp = -d.squaredNorm();
  double fpp = -mem.theta * fp - (cols ? p.dot(mem.m * p) : 0.0);
  const double fpp_floor = kEps * fpp;
  fpp = std::max(fpp, fpp_floor);
  double dtmin = fpp > 0.0 ? -fp / fpp : 0.0;
  double told = 0.0;
  std::vector<bool> fixed(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i)
    if (d(i) == 0.0) fixed[static_cast<std::size_t>(i)] = true;

  for (Eigen::Index b : order) {
    const double dt = t(b) - told;
    if (dtmin < dt) break;
    out.xc(b) = d(b) > 0.0 ? hi(b) : lo(b);
    fixed[static_cast<std::size_t>(b)] = true;
    const double zb = out.xc(b) - x(b);
    const double gb = g(b);
    if (cols) out.c += dt * p;
    fp += dt * fpp + gb * gb + mem.theta * gb * zb;
    fpp -= mem.theta * gb * gb;
    if (cols) {
      const RVector wb = mem.w.row(b).transpose();
      const RVector mwb = mem.m * wb;
      fp -= gb * mwb.dot(out.c);
      fpp -= 2.0 * gb * mwb.dot(p) + gb * gb * wb.dot(mwb);
      p += gb * wb;
    }
    d(b) = 0.0;
    fpp = std::max(fpp, fpp_floor);
    dtmin = fpp > 0.0 ? -fp / fpp : 0.0;
    told = t(b);
  }
  dtmin = std::max(dtmin, 0.0);
  told += dtmin;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!fixed[static_cast<std::size_t>(i)]) out.xc(i) = std::clamp(x(i) + told * d(i), lo(i), hi(i));
  if (cols) out.c += dtmin * p;
  return out;
}

// Minimizes the quadratic model over the variables free at the Cauchy point.
RVector subspace_minimum(const RVector& x, const RVector& g, const RVector& lo, const RVector& hi, const Memory& mem,
                         const CauchyResult& cp) {
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (cp.xc(i) > lo(i) && cp.xc(i) < hi(i)) free.push_back(i);
  if (free.empty()) return cp.xc;
  const auto nf = static_cast<Eigen::Index>(free.size());
  const Eigen::Index cols = mem.w.cols();

  RVector full = g + mem.theta * (cp.xc - x);
  if (cols) full -= mem.w * (mem.m * cp.c);
  RVector r(nf);
  RMatrix wz(nf, cols);
  for (Eigen::Index k = 0; k < nf; ++k) {
    r(k) = full(free[static_cast<std::size_t>(k)]);
    if (cols) wz.row(k) = mem.w.row(free[static_cast<std::size_t>(k)]);
  }
  RVector du = -r / mem.theta;
  if (cols) {
    const RVector v0 = mem.m * (wz.transpose() * r);
    const RMatrix nmat = RMatrix::Identity(cols, cols) - (mem.m * (wz.transpose() * wz)) / mem.theta;
    const RVector v = nmat.partialPivLu().solve(v0);
    du -= wz * v / (mem.theta * mem.theta);
  }
  double alpha = 1.0;
  for (Eigen::Index k = 0; k < nf; ++k) {
    const Eigen::Index i = free[static_cast<std::size_t>(k)];
    if (du(k) > 0.0) alpha = std::min(alpha, (hi(i) - cp.xc(i)) / du(k));
    if (du(k) < 0.0) alpha = std::min(alpha, (lo(i) - cp.xc(i)) / du(k));
  }
  RVector xbar = cp.xc;
  for (Eigen::Index k = 0; k < nf; ++k) {
    const Eigen::Index i = free[static_cast<std::size_t>(k)];
    xbar(i) = std::clamp(cp.xc(i) + alpha * du(k), lo(i), hi(i));
  }
  return xbar;
}

}  // namespace

OptResult minimize_lbfgsb(const Objective& objective, const RVector& x0, const RVector& lo, const RVector& hi,
                          const LbfgsbOptions& options) {
  const Eigen::Index n = x0.size();
  require(lo.size() == n && hi.size() == n, "minimize: bound vectors must match the parameter count");
  require((lo.array() <= hi.array()).all(), "minimize: bounds inverted (lo > hi)");
  require(options.memory >= 1, "minimize: memory must be >= 1");
  require(options.max_iterations >= 0, "minimize: max_iterations must be >= 0");

  OptResult res;
  RVector x = x0.cwiseMax(lo).cwiseMin(hi);
  RVector g(n);
  double f = objective(x, g);
  res.evaluations = 1;
  require(std::isfinite(f) && g.allFinite(), "minimize: objective or gradient is not finite at x0");
  res.initial_value = f;
  res.x = x;
  res.value = f;
  RVector best_g = g;

  auto evaluate = [&](const RVector& xt, RVector& gt) {
    const double ft = objective(xt, gt);
    ++res.evaluations;
    if (std::isfinite(ft) && ft < res.value) {
      res.value = ft;
      res.x = xt;
      best_g = gt;
    }
    return ft;
  };

  Memory mem;
  mem.clear(n);
  double pg = projected_gradient_norm(x, g, lo, hi);
  res.trace.push_back({0, f, pg});
  if (pg <= options.pgtol) {
    res.converged = true;
    res.reason = StopReason::kGradient;
  } else if (options.target && f <= *options.target) {
    res.converged = true;
    res.reason = StopReason::kTarget;
  }

  bool fresh = true;  // no curvature pairs since the start or the last reset
  int iter = 0;
  while (!res.converged && iter < options.max_iterations) {
    const CauchyResult cp = cauchy_point(x, g, lo, hi, mem);
    RVector p = subspace_minimum(x, g, lo, hi, mem, cp) - x;
    double gp = g.dot(p);
    if (!(gp < 0.0)) {
      if (!mem.empty()) {
        mem.clear(n);
        fresh = true;
        continue;
      }
      res.reason = StopReason::kLineSearch;
      break;
    }

    constexpr double c1 = 1e-4;
    double step = fresh ? std::min(1.0, 1.0 / p.norm()) : 1.0;
    RVector xn(n), gn(n);
    double fn = kInf;
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      xn = (x + step * p).cwiseMax(lo).cwiseMin(hi);
      fn = evaluate(xn, gn);
      if (std::isfinite(fn) && gn.allFinite() && fn <= f + c1 * step * gp) {
        accepted = true;
        break;
      }
      double next = 0.5 * step;
      if (std::isfinite(fn)) {
        const double denom = 2.0 * (fn - f - step * gp);
        if (denom > 0.0) next = std::clamp(-gp * step * step / denom, 0.1 * step, 0.5 * step);
      }
      step = next;
    }
    if (!accepted) {
      if (!mem.empty()) {
        mem.clear(n);
        fresh = true;
        continue;
      }
      res.reason = StopReason::kLineSearch;
      break;
    }

    ++iter;
    const RVector s = xn - x;
    const RVector y = gn - g;
    const double sy = s.dot(y);
    const double f_prev = f;
    x = xn;
    g = gn;
    f = fn;
    if (sy > kEps * y.squaredNorm()) {
      mem.push(s, y, options.memory);
      fresh = false;
    }
    pg = projected_gradient_norm(x, g, lo, hi);
    res.trace.push_back({iter, f, pg});
    if (pg <= options.pgtol) {
      res.converged = true;
      res.reason = StopReason::kGradient;
    } else if (options.target && f <= *options.target) {
      res.converged = true;
      res.reason = StopReason::kTarget;
    } else if (f_prev - f <= options.ftol * std::max({std::abs(f_prev), std::abs(f), 1.0})) {
      res.converged = true;
      res.reason = StopReason::kObjectiveChange;
    }
  }
  res.iterations = iter;
  res.grad_norm = projected_gradient_norm(res.x, best_g, lo, hi);
  return res;
}

}  // namespace qoc
