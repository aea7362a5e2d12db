#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hmorse/nbody.hpp"

namespace hmorse {

inline constexpr double kTolCc = 1e-10;
inline constexpr double kTolMargin = 1e-9;

enum class SpiralTag { Spiral, NonSpiralBoundary, NonSpiralStrict };

std::string to_string(SpiralTag tag);
SpiralTag spiral_tag_from_string(const std::string& s);

/// margin = lambda_1 + b/8. An empty spectrum gives margin = +inf and
/// NonSpiralStrict (no eigenvalue can violate the bound).
struct SpiralClass {
  SpiralTag tag;
  double margin;
  bool non_spiral() const { return tag != SpiralTag::Spiral; }
};

struct CentralConfiguration {
  MassSystem system;
  Vec shape;  // centred, I(shape) = 1
  double b_value = 0.0;
  double residual_norm = 0.0;
  std::vector<double> spectrum;  // ascending, n_star - 1 entries
  SpiralClass classification{SpiralTag::NonSpiralStrict, 0.0};
  int iterations = 0;

  Configuration configuration() const { return Configuration(system, shape); }
  EllipsoidChart chart() const { return EllipsoidChart(system, shape); }
};

/// grad U(s) + U(s) M s. Zero exactly at central configurations.
Vec cc_residual(const MassSystem& sys, const Vec& s);

struct CcOptions {
  double tol = kTolCc;
  int max_iter = 200;
  /// Singular values of the tangent Hessian below this (relative) are
  /// treated as symmetry directions and skipped by the pseudo-inverse.
  double pinv_rtol = 1e-10;
};

/// Projected Newton iteration on the inertia ellipsoid starting at guess.
/// Every step is taken in the normalized-affine chart at the current iterate
/// and mapped back, so iterates stay centred with I = 1.
CentralConfiguration find_cc(const MassSystem& sys, const Vec& guess,
                             const CcOptions& opts = {});

/// Spectrum of M^{-1} D^2U|_E(s0) from the chart Hessian of U o psi^{-1}
/// at x = 0 (the chart basis is M-orthonormal, so no congruence is needed).
std::vector<double> restricted_spectrum(const MassSystem& sys, const Vec& shape,
                                        const EllipsoidChart& chart);
/// Same spectrum from the generalized symmetric problem
/// (D^2U + U M) w = lambda M w on the M-orthogonal complement of s0 inside
/// the centred subspace, using a Euclidean (not M-orthonormal) basis.
std::vector<double> restricted_spectrum_generalized(const MassSystem& sys,
                                                    const Vec& shape);

SpiralClass classify(const std::vector<double>& spectrum, double b_value,
                     double tol_margin = kTolMargin);
inline SpiralClass classify(const CentralConfiguration& cc) {
  return classify(cc.spectrum, cc.b_value);
}

struct SweepRow {
  double parameter = 0.0;
  bool converged = false;
  std::string failure;
  double lambda1 = 0.0;
  double bound = 0.0;  // -b/8
  std::optional<CentralConfiguration> cc;
};

using MassFamily = std::function<MassSystem(double)>;
using GuessFamily = std::function<Vec(double)>;

/// One classified central configuration per parameter value. Rows that do
/// not converge are kept and marked.
std::vector<SweepRow> spiral_sweep(const MassFamily& family, const GuessFamily& guess,
                                   const std::vector<double>& grid,
                                   const CcOptions& opts = {});

/// Parametrized three-body families for sweeps: "collinear3" has masses
/// (1, p, 1) on a line, "triangle3" has masses (1, 1, p) near an equilateral
/// triangle (dim >= 2).
struct Family {
  MassFamily masses;
  GuessFamily guess;
};
Family family_preset(const std::string& name, int dim);

/// Named starting points: "kepler1d", "lagrange_equal", "euler_collinear".
struct Preset {
  MassSystem system;
  Vec guess;
};
Preset preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace hmorse
