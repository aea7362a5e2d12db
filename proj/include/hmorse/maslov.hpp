#pragma once

#include <vector>

#include "hmorse/symplectic.hpp"

namespace hmorse {

/// A Lagrangian path Lambda(tau) = gamma(tau) V given by frames. Either
/// transported directly (frames are QR-renormalized after every step so
/// exponential growth of gamma does not matter) or taken from a
/// SymplecticPath.
class LagrangianPath {
 public:
  using FrameFn = std::function<Mat(double)>;

  LagrangianPath(int k, Coefficient coeff, double t0, double t1,
                 std::vector<double> grid, FrameFn frame_fn, double max_isotropy_defect);

  int k() const { return k_; }
  double tau_begin() const { return t0_; }
  double tau_end() const { return t1_; }
  /// Frame (not necessarily orthonormal) spanning Lambda(tau).
  Mat frame(double tau) const { return frame_fn_(tau); }
  /// Orthonormal frame spanning Lambda(tau).
  Mat orthonormal_frame(double tau) const;
  Mat coeff(double tau) const { return coeff_(tau); }
  /// Integrator step boundaries, used as the coarse grid for crossing search.
  const std::vector<double>& grid() const { return grid_; }
  double max_isotropy_defect() const { return max_isotropy_defect_; }

 private:
  int k_;
  Coefficient coeff_;
  double t0_, t1_;
  std::vector<double> grid_;
  FrameFn frame_fn_;
  double max_isotropy_defect_;
};

/// Solves Z' = J B(tau) Z, Z(t0) = start.frame().
LagrangianPath transport(const Coefficient& coeff, const LagrangianFrame& start,
                         double t0, double t1, double tol = 1e-10);
/// Lambda(tau) = gamma(tau) V.
LagrangianPath image(const SymplecticPath& path, const LagrangianFrame& v);

struct Inertia {
  int coindex = 0;  // positive directions
  int nullity = 0;
  int index = 0;    // negative directions
  int signature() const { return coindex - index; }
  int dim() const { return coindex + nullity + index; }
  bool operator==(const Inertia& o) const {
    return coindex == o.coindex && nullity == o.nullity && index == o.index;
  }
};

/// Inertia of a symmetric matrix; |eigenvalue| <= tol * max(1, ||A||) is null.
Inertia inertia_of(const Mat& a, double tol = 1e-8);

enum class CrossingKind { Start, Interior, End };

struct CrossingEvent {
  double tau_c = 0.0;
  int kernel_dim = 0;
  Inertia form_inertia;
  CrossingKind kind = CrossingKind::Interior;
};

struct CrossingOptions {
  double bisect_tol = 1e-10;
  /// Singular values of W^T J Q (both frames orthonormal) below this count
  /// towards the intersection dimension.
  double kernel_tol = 1e-8;
  /// Evaluation points per integrator step when bracketing sign changes.
  int subsamples = 8;
  /// Tangential (even-multiplicity) crossings: accepted when the minimum
  /// singular value at a local minimum falls below this.
  double tangency_tol = 1e-7;
};

/// det(W^T J Q(tau)); vanishes exactly at crossing instants. For W = L_D
/// this is det(-c) with c the lower-left (position) block of the frame.
double crossing_function(const LagrangianPath& path, const LagrangianFrame& w,
                         double tau);
/// dim(Lambda(tau) cap W) by singular-value threshold.
int intersection_dim(const LagrangianPath& path, const LagrangianFrame& w, double tau,
                     double kernel_tol = 1e-8);

struct CrossingForm {
  Mat form;  // on an orthonormal basis of Lambda(tau_c) cap W
  Inertia inertia;
};

/// Q(w) = <B(tau_c) w, w> on Lambda(tau_c) cap W. If kernel_dim is 0 it is
/// read off the singular values. Throws DegenerateCrossingError if the
/// form has a kernel and throw_on_degenerate is set.
CrossingForm crossing_form(const LagrangianPath& path, const LagrangianFrame& w,
                           double tau_c, int kernel_dim = 0,
                           bool throw_on_degenerate = true,
                           const CrossingOptions& opts = {});

/// All crossings on [tau_begin, tau_end], ordered in tau. Endpoint events
/// carry kind Start/End.
std::vector<CrossingEvent> detect_crossings(const LagrangianPath& path,
                                            const LagrangianFrame& w,
                                            const CrossingOptions& opts = {});
std::vector<CrossingEvent> detect_crossings(const SymplecticPath& path,
                                            const LagrangianFrame& w,
                                            const CrossingOptions& opts = {});

enum class DegeneratePolicy { Throw, Flag };

struct MaslovResult {
  int mu = 0;
  bool degenerate = false;
  std::vector<CrossingEvent> crossings;
};

/// mu = coindex(start) + sum of interior signatures - index(end).
MaslovResult maslov_index(const LagrangianPath& path, const LagrangianFrame& w,
                          DegeneratePolicy policy = DegeneratePolicy::Throw,
                          const CrossingOptions& opts = {});
MaslovResult maslov_index(const SymplecticPath& path, const LagrangianFrame& w,
                          DegeneratePolicy policy = DegeneratePolicy::Throw,
                          const CrossingOptions& opts = {});

/// Maslov index on [tau_begin, h] for every horizon h, from one crossing
/// scan of the whole path.
std::vector<int> maslov_profile(const LagrangianPath& path, const LagrangianFrame& w,
                                const std::vector<double>& horizons,
                                DegeneratePolicy policy = DegeneratePolicy::Throw,
                                const CrossingOptions& opts = {});

/// dim(Lambda(a) cap W) + sum of interior intersection dimensions.
int plus_curve_count(const LagrangianPath& path, const LagrangianFrame& w,
                     const CrossingOptions& opts = {});

}  // namespace hmorse
