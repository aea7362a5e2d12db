#pragma once

#include <optional>
#include <vector>

#include "hmorse/central_config.hpp"
#include "hmorse/ode.hpp"

namespace hmorse {

/// Initial data of the one-dimensional radial problem in blow-up variables:
///   v' = v^2/2 - b,  r' = r v,  t' = r^{3/2}
/// together with the energy level h0 (1/2 v^2 - b = r h0 along the flow).
struct RadialData {
  double b = 0.0;
  double h0 = 0.0;
  double r0 = 1.0;
  double v0 = 0.0;

  double energy_defect() const { return 0.5 * v0 * v0 - b - r0 * h0; }
  void validate() const;
};

/// A homothetic colliding orbit q(t) = r(t) s0 together with everything the
/// index computations need from its central configuration: n_star, the
/// restricted spectrum, the chart Hessian at s0 and the classification.
/// Synthetic orbits carry a prescribed spectrum and no mass system.
struct HomotheticOrbit {
  RadialData radial;
  int n_star = 1;
  std::vector<double> spectrum;
  Mat chart_hessian;  // (n_star-1)^2, Hessian of U o psi^{-1} at the base point
  SpiralClass classification{SpiralTag::NonSpiralStrict, 0.0};
  std::optional<CentralConfiguration> cc;

  double b() const { return radial.b; }
  double h0() const { return radial.h0; }

  /// h0 < 0 only: starts at rest at r0 = -b/h0.
  static HomotheticOrbit apex(const CentralConfiguration& cc, double h0);
  /// Inward start at radius r0: v0 = -sqrt(2 (b + r0 h0)).
  static HomotheticOrbit from_radius(const CentralConfiguration& cc, double h0,
                                     double r0);
  /// Apex for h0 < 0, otherwise from_radius with r0 = 1.
  static HomotheticOrbit standard(const CentralConfiguration& cc, double h0);
  /// Explicit start (r0, v0); the energy relation is checked to 1e-12.
  static HomotheticOrbit with_start(const CentralConfiguration& cc, double h0,
                                    double r0, double v0);
  /// Prescribed b and spectrum, diagonal chart Hessian, n_star = 1 + size.
  /// r0 <= 0 selects the apex (h0 < 0) or r0 = 1.
  static HomotheticOrbit synthetic(double b, std::vector<double> spectrum,
                                   double h0, double r0 = 0.0);

  void validate() const;
};

/// Dense solution of the radial flow in fictitious time. The state is
/// (v, log r, t) so that r can decay over many decades without losing
/// relative accuracy.
class ReducedPath {
 public:
  ReducedPath(RadialData data, DenseSolution sol);

  const RadialData& data() const { return data_; }
  double tau_max() const { return sol_.t_end(); }
  double v(double tau) const { return sol_(tau)(0); }
  double r(double tau) const;
  double t(double tau) const { return sol_(tau)(2); }
  double energy_residual(double tau) const;
  /// Largest |energy residual| over the accepted step boundaries.
  double max_energy_residual() const;
  /// Inverse of t(tau); throws IntegratorError when T is beyond the path.
  double tau_of_t(double t_phys) const;
  const DenseSolution& dense() const { return sol_; }

 private:
  RadialData data_;
  DenseSolution sol_;
};

ReducedPath reduced_flow(const RadialData& data, double tau_max, double tol = 1e-10);
inline ReducedPath reduced_flow(const HomotheticOrbit& orbit, double tau_max,
                                double tol = 1e-10) {
  return reduced_flow(orbit.radial, tau_max, tol);
}

/// t(tau_max) = int_0^tau_max r^{3/2} dtau.
double physical_time(const ReducedPath& path);
/// Estimate of the collision time T+: physical_time plus the tail of the
/// exponentially decaying integrand beyond tau_max.
double collision_time(const ReducedPath& path);

Mat block_B1(double v, double b);
Mat block_Blambda(double v, double lambda);

/// Blow-up state. Vectors u and x have n_star - 1 entries.
struct McGeheeState {
  double v = 0.0;
  Vec u;
  double r = 1.0;
  Vec x;
  double tau = 0.0;
  double t_phys = 0.0;
};

/// Full coefficient B-hat(tau) of the linearized flow in blow-up variables,
/// ordered (p1, p2, r, x). Requires a chart from a mass system.
Mat full_Bhat(const McGeheeState& state, const EllipsoidChart& chart);

/// The same coefficient along a homothetic orbit with chart metric = Id:
///   B1(v) (+) [[I, v/4 I], [v/4 I, -H - eps I]]   (symplectic sum)
/// where H is the chart Hessian. eps shifts the potential block downward.
Mat homothetic_Bhat(double v, double b, const Mat& chart_hessian, double eps = 0.0);

/// Hessian of H(p1, p2, r, x) = 1/2 (p1^2 + <M^-1 p2, p2>/r^2) - U(x)/r.
Mat hamiltonian_hessian(double p1, const Vec& p2, double r, const Vec& x,
                        const EllipsoidChart& chart);

/// diag(r^{3/4}, r^{-1/4} I, r^{-3/4}, r^{1/4} I).
Mat mcgehee_scaling(double r, int n_star);

/// B_R = -J R' R^{-1} + R^{-T} B R^{-1} for the tau-form coefficient
/// B = r^{3/2} D^2H and R = mcgehee_scaling(r). Independent route to
/// full_Bhat.
Mat conjugated_coefficient(const McGeheeState& state, const EllipsoidChart& chart);

struct McGeheeRates {
  double v = 0.0;
  Vec u;
  double r = 0.0;
  Vec x;
};
/// Right-hand side of the full blow-up system (used to check that u = 0,
/// x = x0 is invariant at a central configuration).
McGeheeRates mcgehee_rhs(const McGeheeState& state, const EllipsoidChart& chart);

/// Homothetic state of the orbit at fictitious time tau (u = 0, x = 0).
McGeheeState homothetic_state(const ReducedPath& path, int n_star, double tau);

}  // namespace hmorse
