#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hmorse/maslov.hpp"
#include "hmorse/mcgehee.hpp"

namespace hmorse {

struct IndexOptions {
  double tol = 1e-10;
  /// Shift of the potential block: -H - eps I (eps = 0 is the orbit itself).
  double epsilon = 0.0;
  /// Multiplies b in the Maslov route only. Anything but 1 is a deliberate
  /// corruption used as a negative control.
  double b_scale = 1.0;
  /// Also integrate the full 2 n_star coefficient and compare with the sum
  /// of the blocks.
  bool check_full = true;
};

/// Geometrical index at each horizon: the radial block, every lambda block
/// and (optionally) the full coefficient, each as a Maslov index with
/// respect to the Dirichlet subspace on [0, horizon].
struct GeometricalIndex {
  std::vector<double> horizons;
  std::vector<int> mu_total;  // mu_b1 + sum over lambda blocks
  std::vector<int> mu_b1;
  std::vector<std::vector<int>> mu_per_lambda;  // [eigenvalue][horizon]
  std::vector<int> mu_full;                     // empty unless check_full
  double max_isotropy_defect = 0.0;
  double max_energy_residual = 0.0;
  bool perturbed = false;  // a degenerate crossing forced a small eps shift
};

/// Throws IndexMismatchError when the full path disagrees with the sum.
GeometricalIndex geometrical_index(const HomotheticOrbit& orbit,
                                   const std::vector<double>& horizons,
                                   const IndexOptions& opts = {});

/// Radial data actually used by the Maslov route (b scaled, start
/// recomputed at the same r0 or at the scaled apex).
RadialData maslov_radial_data(const HomotheticOrbit& orbit, double b_scale);

/// Coefficient of the full linearized flow along the homothetic orbit as a
/// function of v. Uses the chart formulas when the orbit has a central
/// configuration, otherwise the block assembly.
std::function<Mat(double)> full_coefficient_of_v(const HomotheticOrbit& orbit,
                                                 double b, double epsilon);

struct ScalarCrossing {
  int zero_count_c = 0;          // including tau = 0
  std::vector<double> c_zeros;
  bool a_positive = true;        // a > 0 at every sample
  double min_a = 0.0;
  std::vector<double> taus;      // samples (step boundaries)
  std::vector<double> a_values;
  std::vector<double> c_values;
};

/// a'' = (-r h0/8 + b/8 + lambda) a,  a(0) = 1, a'(0) = -v(0)/4
/// c'' = (3 r h0/8 + b/8 + lambda) c, c(0) = 0, c'(0) = 1
/// integrated together with the radial flow on [0, tau_max].
ScalarCrossing scalar_crossing_ode(const HomotheticOrbit& orbit, double lambda,
                                   double tau_max, double tol = 1e-10);
/// c'' = (3/16 v^2 + 11/4 b) c, c(0) = 0, c'(0) = 1 (radial block).
ScalarCrossing scalar_b1_ode(const HomotheticOrbit& orbit, double tau_max,
                             double tol = 1e-10);

/// Physical time and fictitious time of the orbit up to T: finds tau(T)
/// by integrating the radial flow far enough. Throws ConfigError if T is
/// not below the collision time.
ReducedPath path_covering(const RadialData& data, double t_phys, double tol = 1e-10);
/// Collision time T+ of the radial motion.
double orbit_collision_time(const RadialData& data, double tol = 1e-10);

/// Potential block of the second variation at r = 1 in the mass-orthonormal
/// basis (s0, E): B^T D^2U(s0) B. Along the orbit it scales as r^{-3}.
Mat second_variation_potential(const HomotheticOrbit& orbit);

/// Negative-eigenvalue count of the second variation on [0, T] with
/// piecewise-linear elements (m interior nodes, uniform in tau).
int galerkin_count(const HomotheticOrbit& orbit, double t_phys, int m);
/// galerkin_count at m and 2m; MeshTooCoarseError if they differ.
int galerkin_morse_index(const HomotheticOrbit& orbit, double t_phys, int m);
/// The assembled (m n_star)^2 matrix, for tests.
Mat galerkin_matrix(const HomotheticOrbit& orbit, double t_phys, int m);

struct IndexTheoremRow {
  double t_phys = 0.0;
  double tau = 0.0;
  int galerkin = 0;
  int maslov = 0;
  int n_star = 0;
  bool pass = false;
};

std::vector<IndexTheoremRow> index_theorem_check(const HomotheticOrbit& orbit,
                                                 const std::vector<double>& t_grid,
                                                 int m, const IndexOptions& opts = {});

/// Maslov index of the time-parametrized linearization (Hessian of the
/// Hamiltonian in (p1, p2, r, x) along the orbit) on [0, T] for each T.
std::vector<int> t_side_maslov(const HomotheticOrbit& orbit,
                               const std::vector<double>& t_grid, double tol = 1e-10);

/// mu_total of the eps-shifted system at each horizon.
std::vector<int> epsilon_perturbed_index(const HomotheticOrbit& orbit, double epsilon,
                                         const std::vector<double>& horizons,
                                         double tol = 1e-10);

enum class Verdict { MorseZero, MorseInfinite, Inconclusive };
std::string to_string(Verdict v);

/// Sum over spiral eigenvalues of sqrt(-(b/8 + lambda))/pi.
double predicted_crossing_density(const HomotheticOrbit& orbit);

struct IndexReport {
  HomotheticOrbit orbit;
  GeometricalIndex index;
  std::map<std::pair<double, int>, int> galerkin;  // (T, mesh) -> count
  std::vector<IndexTheoremRow> theorem_rows;
  Verdict verdict = Verdict::Inconclusive;
  double predicted_density = 0.0;
  double fitted_slope = 0.0;
  std::vector<int> mu_epsilon;  // boundary case only
  std::string diagnostics;
};

/// Verdict from the index profile; requires at least 4 increasing horizons.
IndexReport theorem_a_verdict(const HomotheticOrbit& orbit,
                              const std::vector<double>& horizons,
                              const IndexOptions& opts = {});

/// Verdict expected from the classification alone.
Verdict expected_verdict(const SpiralClass& c);

}  // namespace hmorse
