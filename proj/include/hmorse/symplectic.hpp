#pragma once

#include <functional>

#include "hmorse/ode.hpp"

namespace hmorse {

inline constexpr double kTolSymp = 1e-8;

/// Coordinates are ordered (momenta, positions): J = [[0, -I], [I, 0]].
Mat standard_j(int k);

/// ||g^T J g - J||_inf
double symplecticity_defect(const Mat& g);

/// Long's symplectic sum: blocks (A1, B1; C1, D1) and (A2, B2; C2, D2) are
/// interleaved as
///   [A1 0  B1 0 ]
///   [0  A2 0  B2]
///   [C1 0  D1 0 ]
///   [0  C2 0  D2]
Mat symplectic_sum(const Mat& a, const Mat& b);

/// Symplectic Gram-Schmidt on the column pairs (g_i, g_{k+i}). Returns a
/// matrix with g^T J g = J up to rounding; a nearly symplectic input moves
/// by O(defect).
Mat symplectic_gram_schmidt(const Mat& g);

using Coefficient = std::function<Mat(double)>;

/// Fundamental solution gamma' = J B(tau) gamma, gamma(t0) = Id.
class SymplecticPath {
 public:
  SymplecticPath(int k, Coefficient coeff, DenseSolution sol, double max_defect);

  int k() const { return k_; }
  double tau_begin() const { return sol_.t_begin(); }
  double tau_end() const { return sol_.t_end(); }
  Mat gamma(double tau) const;
  Mat coeff(double tau) const { return coeff_(tau); }
  const Coefficient& coefficient() const { return coeff_; }
  const std::vector<double>& sample_times() const { return sol_.times(); }
  Mat sample(std::size_t i) const;
  /// Largest defect over the accepted samples.
  double max_defect() const { return max_defect_; }

 private:
  int k_;
  Coefficient coeff_;
  DenseSolution sol_;
  double max_defect_;
};

/// Integrates the fundamental solution. Whenever the defect at a step
/// boundary exceeds tol_symp/10 the matrix is re-symplectified by
/// symplectic Gram-Schmidt.
SymplecticPath integrate_linear(const Coefficient& coeff, double t0, double t1,
                                double tol = 1e-10, double tol_symp = kTolSymp);

/// Full-rank 2k x k frame spanning a Lagrangian subspace.
class LagrangianFrame {
 public:
  explicit LagrangianFrame(Mat frame, double tol = 1e-8);

  static LagrangianFrame dirichlet(int k);  // {(p, 0)}
  static LagrangianFrame neumann(int k);    // {(0, q)}

  int k() const { return static_cast<int>(frame_.cols()); }
  const Mat& frame() const { return frame_; }
  /// ||F^T J F||_inf / ||F||^2
  double isotropy_defect() const;
  /// sigma * frame
  LagrangianFrame transformed(const Mat& sigma) const;

 private:
  Mat frame_;
};

/// Frame of the symplectic sum of the two subspaces (same interleaving as
/// symplectic_sum).
LagrangianFrame direct_sum(const LagrangianFrame& a, const LagrangianFrame& b);

/// Column-stacks a matrix into a vector and back.
Vec flatten(const Mat& m);
Mat unflatten(const Vec& v, int rows, int cols);

}  // namespace hmorse
