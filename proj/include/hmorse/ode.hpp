#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hmorse/nbody.hpp"

namespace hmorse {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 picks a step from the derivative scale
  double max_step = 0.0;      // 0 means unbounded
  long max_steps = 2'000'000;
};

using OdeRhs = std::function<Vec(double, const Vec&)>;
/// Called after each accepted step; may replace the state (e.g. to
/// renormalize a frame). The dense output of the step that just finished is
/// unaffected.
using StepHook = std::function<void(double, Vec&)>;

class DenseSolution;

DenseSolution integrate_dopri5(const OdeRhs& rhs, double t0, const Vec& y0,
                               double t1, const OdeOptions& opts = {},
                               const StepHook& hook = {});

/// Piecewise dense solution produced by the Dormand-Prince 5(4) pair with
/// its fourth-order continuous extension. Each step keeps the five
/// interpolation vectors, so evaluation anywhere in the span is cheap.
class DenseSolution {
 public:
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  /// Accepted step boundaries, t_begin() ... t_end(), monotone in the
  /// direction of integration.
  const std::vector<double>& times() const { return times_; }
  /// States at the step boundaries after any StepHook was applied.
  const std::vector<Vec>& states() const { return states_; }
  int dimension() const { return states_.empty() ? 0 : static_cast<int>(states_.front().size()); }
  std::size_t steps() const { return coeffs_.size(); }

  /// Interpolated state. Inside step k the interpolant starts from the
  /// (possibly hook-modified) state at times()[k].
  Vec operator()(double t) const;
  /// Index of the step containing t.
  std::size_t step_index(double t) const;
  Vec eval_in_step(std::size_t step, double t) const;

 private:
  friend DenseSolution integrate_dopri5(const OdeRhs&, double, const Vec&, double,
                                        const OdeOptions&, const StepHook&);
  std::vector<double> times_;
  std::vector<Vec> states_;
  std::vector<std::array<Vec, 5>> coeffs_;
};

}  // namespace hmorse
