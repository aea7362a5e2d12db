#include "hmorse/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "hmorse/errors.hpp"

namespace hmorse {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

double error_norm(const Vec& err, const Vec& y0, const Vec& y1,
                  const OdeOptions& o) {
  const Vec scale = o.atol + o.rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array();
  return std::sqrt((err.array() / scale.array()).square().mean());
}

}  // namespace

std::size_t DenseSolution::step_index(double t) const {
  if (coeffs_.empty()) return 0;
  const bool forward = times_.back() >= times_.front();
  std::size_t idx;
  if (forward) {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    idx = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  } else {
    auto it = std::upper_bound(times_.begin(), times_.end(), t,
                               [](double a, double b) { return a > b; });
    idx = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  }
  return std::min(idx, coeffs_.size() - 1);
}

Vec DenseSolution::eval_in_step(std::size_t k, double t) const {
  const auto& c = coeffs_[k];
  const double h = times_[k + 1] - times_[k];
  const double th = (t - times_[k]) / h;
  const double th1 = 1.0 - th;
  return c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
}

Vec DenseSolution::operator()(double t) const {
  if (coeffs_.empty()) return states_.front();
  return eval_in_step(step_index(t), t);
}

DenseSolution integrate_dopri5(const OdeRhs& rhs, double t0, const Vec& y0,
                               double t1, const OdeOptions& opts,
                               const StepHook& hook) {
  DenseSolution sol;
  sol.times_.push_back(t0);
  sol.states_.push_back(y0);
  if (t1 == t0) return sol;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  Vec y = y0;
  double t = t0;
  Vec k1 = rhs(t, y);

  double h = opts.initial_step;
  if (h <= 0.0) {
    const Vec sc = opts.atol + opts.rtol * y.cwiseAbs().array();
    const double dy = std::sqrt((k1.array() / sc.array()).square().mean());
    const double yn = std::sqrt((y.array() / sc.array()).square().mean());
    h = (dy > 1e-10 && yn > 1e-10) ? 0.01 * yn / dy : 1e-4 * std::max(span, 1.0);
    h = std::min(h, span);
  }
  if (opts.max_step > 0.0) h = std::min(h, opts.max_step);

  long nsteps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++nsteps > opts.max_steps) {
      throw IntegratorError("step budget exhausted at t=" + std::to_string(t));
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
      throw IntegratorError("step size collapsed at t=" + std::to_string(t));
    }
    bool last = false;
    if (h >= std::abs(t1 - t)) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double hs = dir * h;
    const Vec k2 = rhs(t + c2 * hs, y + hs * (a21 * k1));
    const Vec k3 = rhs(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const Vec k4 = rhs(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = rhs(t + c5 * hs,
                       y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = rhs(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 +
                                         a64 * k4 + a65 * k5));
    const Vec ynew =
        y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vec k7 = rhs(t + hs, ynew);
    const Vec err =
        hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, ynew, opts);
    if (!std::isfinite(en)) {
      h *= 0.2;
      continue;
    }
    if (en <= 1.0) {
      std::array<Vec, 5> c;
      c[0] = y;
      c[1] = ynew - y;
      c[2] = hs * k1 - c[1];
      c[3] = c[1] - hs * k7 - c[2];
      c[4] = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      const double tnew = last ? t1 : t + hs;
      sol.coeffs_.push_back(std::move(c));
      y = ynew;
      t = tnew;
      if (hook) {
        hook(t, y);
        k1 = rhs(t, y);
      } else {
        k1 = k7;
      }
      sol.times_.push_back(t);
      sol.states_.push_back(y);
      const double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 10.0;
      h *= std::clamp(fac, 0.2, 10.0);
    } else {
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.2, 1.0);
    }
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
  }
  return sol;
}

}  // namespace hmorse
