#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hmorse {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kTolDist = 1e-12;
inline constexpr double kTolCenter = 1e-10;

/// Point masses in R^d. Configurations are flat, body-major vectors of
/// length n*d; the mass metric M is diagonal with each m_i repeated d times.
class MassSystem {
 public:
  MassSystem(std::vector<double> masses, int dim);

  int n_bodies() const { return static_cast<int>(masses_.size()); }
  int dim() const { return dim_; }
  /// Dimension of the centred configuration space, d(n-1).
  int n_star() const { return dim_ * (n_bodies() - 1); }
  int ambient_size() const { return dim_ * n_bodies(); }

  const std::vector<double>& masses() const { return masses_; }
  double total_mass() const { return total_mass_; }
  const Vec& metric_diagonal() const { return metric_; }

  /// <M a, b>
  double mass_inner(const Vec& a, const Vec& b) const;
  double mass_norm(const Vec& a) const;

  /// M-orthogonal projection onto the centre-of-mass-zero subspace.
  Vec center(const Vec& q) const;
  /// Sum_i m_i q_i as a d-vector.
  Vec center_of_mass_moment(const Vec& q) const;

  /// Column basis of the centred subspace (ambient_size x n_star), built by
  /// projecting the canonical vectors and dropping dependent ones.
  Mat centered_seed_basis() const;

 private:
  std::vector<double> masses_;
  int dim_;
  double total_mass_;
  Vec metric_;
};

class Configuration {
 public:
  Configuration(int n_bodies, int dim, Vec coords);
  Configuration(const MassSystem& sys, Vec coords);

  int n_bodies() const { return n_; }
  int dim() const { return d_; }
  const Vec& coords() const { return coords_; }
  auto body(int i) const { return coords_.segment(i * d_, d_); }

  /// Smallest pairwise distance; zero exactly on the collision set.
  double min_pair_distance() const;
  bool collision_free() const { return min_pair_distance() > kTolDist; }

 private:
  int n_;
  int d_;
  Vec coords_;
};

double potential(const MassSystem& sys, const Vec& q);
Vec grad_potential(const MassSystem& sys, const Vec& q);
Mat hess_potential(const MassSystem& sys, const Vec& q);
double moment_of_inertia(const MassSystem& sys, const Vec& q);

inline double potential(const MassSystem& sys, const Configuration& q) {
  return potential(sys, q.coords());
}
inline Vec grad_potential(const MassSystem& sys, const Configuration& q) {
  return grad_potential(sys, q.coords());
}
inline Mat hess_potential(const MassSystem& sys, const Configuration& q) {
  return hess_potential(sys, q.coords());
}
inline double moment_of_inertia(const MassSystem& sys, const Configuration& q) {
  return moment_of_inertia(sys, q.coords());
}

/// Centre and scale q onto the inertia ellipsoid I(q) = 1.
Vec normalize_configuration(const MassSystem& sys, const Vec& q);

/// Normalized-affine chart on the inertia ellipsoid around a base point s0:
///   psi^{-1}(x) = (s0 + E x) / |s0 + E x|_M
/// with E an M-orthonormal basis of the tangent space (centred and
/// M-orthogonal to s0). At x = 0 the chart metric is the identity.
class EllipsoidChart {
 public:
  EllipsoidChart(const MassSystem& sys, const Vec& base_point,
                 double chart_radius = 1.0);
  /// Same base point, caller-supplied tangent basis (must be M-orthonormal).
  EllipsoidChart(const MassSystem& sys, const Vec& base_point,
                 const Mat& tangent_basis, double chart_radius = 1.0);

  const MassSystem& system() const { return sys_; }
  const Vec& base_point() const { return base_; }
  /// ambient_size x (n_star - 1)
  const Mat& tangent_basis() const { return basis_; }
  /// [s0 | E]: M-orthonormal basis of the whole centred subspace.
  Mat full_basis() const;
  int dim() const { return static_cast<int>(basis_.cols()); }
  double radius() const { return radius_; }

  Vec inverse(const Vec& x) const;
  /// d psi^{-1} / dx
  Mat jacobian(const Vec& x) const;
  /// d^2 psi^{-1} / dx_i dx_j, returned as one ambient vector per (i, j).
  std::vector<std::vector<Vec>> second_derivative(const Vec& x) const;

  /// M-hat(x) = J^T M J.
  Mat metric(const Vec& x) const;
  /// d M-hat / dx_j for each j.
  std::vector<Mat> metric_derivative(const Vec& x) const;

  double potential(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  /// Largest M-orthonormality defect of the basis (diagnostic).
  double orthonormality_defect() const;

 private:
  void check_domain(const Vec& x) const;

  MassSystem sys_;
  Vec base_;
  Mat basis_;
  double radius_;
};

/// Deterministic M-orthonormal tangent basis at s0 (Gram-Schmidt in the
/// mass inner product over the projected canonical basis).
Mat tangent_basis_at(const MassSystem& sys, const Vec& s0);

}  // namespace hmorse
