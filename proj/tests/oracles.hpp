#pragma once
// Reference computations that share no code with the library routines they
// check: closed forms, brute-force integrators and finite differences.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Mat j_matrix(int k) {
  Mat j = Mat::Zero(2 * k, 2 * k);
  j.topRightCorner(k, k) = -Mat::Identity(k, k);
  j.bottomLeftCorner(k, k) = Mat::Identity(k, k);
  return j;
}

// exp(tau J B) for a frozen coefficient.
inline Mat frozen_flow(const Mat& b, double tau) {
  const Mat a = tau * j_matrix(static_cast<int>(b.rows()) / 2) * b;
  return a.exp();
}

// Radial flow v' = v^2/2 - b in closed form.
//   v0 = 0 (apex):         v = -sqrt(2b) tanh(sqrt(b/2) tau)
//   v0^2 = 2b (h0 = 0):    v = -sqrt(2b)
//   v0^2 > 2b (h0 > 0):    v = -sqrt(2b) coth(sqrt(b/2) tau + c0)
inline double radial_v(double b, double v0, double tau) {
  const double s = std::sqrt(2.0 * b);
  const double w = std::sqrt(b / 2.0);
  if (v0 == 0.0) return -s * std::tanh(w * tau);
  if (std::abs(v0 * v0 - 2.0 * b) < 1e-14) return v0;
  const double c0 = std::atanh(s / -v0);  // coth(c0) = -v0/s
  return -s / std::tanh(w * tau + c0);
}

// Fixed-step RK4 for y'' = k(t) y with many small steps; counts sign
// changes of y on (0, t1] plus the zero at t = 0.
inline int rk4_zero_count(const std::function<double(double)>& k, double y0, double dy0,
                          double t1, int steps) {
  const double h = t1 / steps;
  double y = y0, p = dy0, t = 0.0;
  int zeros = y0 == 0.0 ? 1 : 0;
  double prev = y0 == 0.0 ? dy0 : y0;
  for (int i = 0; i < steps; ++i) {
    auto f = [&](double tt, double yy, double pp, double& dy, double& dp) {
      dy = pp;
      dp = k(tt) * yy;
    };
    double k1y, k1p, k2y, k2p, k3y, k3p, k4y, k4p;
    f(t, y, p, k1y, k1p);
    f(t + h / 2, y + h / 2 * k1y, p + h / 2 * k1p, k2y, k2p);
    f(t + h / 2, y + h / 2 * k2y, p + h / 2 * k2p, k3y, k3p);
    f(t + h, y + h * k3y, p + h * k3p, k4y, k4p);
    y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
    t += h;
    if (y != 0.0 && (y > 0.0) != (prev > 0.0)) ++zeros;
    if (y != 0.0) prev = y;
  }
  return zeros;
}

// Harmonic oscillator B = Id, k = 1: gamma(tau) L_D is the line at angle
// tau through (cos tau, sin tau). It meets L_D whenever sin tau = 0; with
// a positive-definite crossing form every such instant adds one.
inline int rotation_winding(double t0, double t1) {
  int count = 0;
  for (int n = static_cast<int>(std::ceil(t0 / M_PI - 1e-12));
       n * M_PI <= t1 + 1e-12; ++n) {
    ++count;
  }
  return count;
}

// Central-difference Hessian of a scalar function.
inline Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x,
                      double h = 1e-4) {
  const int n = static_cast<int>(x.size());
  Mat out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vec pp = x, pm = x, mp = x, mm = x;
      pp(i) += h; pp(j) += h;
      pm(i) += h; pm(j) -= h;
      mp(i) -= h; mp(j) += h;
      mm(i) -= h; mm(j) -= h;
      out(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
    }
  }
  return 0.5 * (out + out.transpose());
}

// Newtonian potential written out directly (positive convention).
inline double newton_potential(const std::vector<double>& m, int d, const Vec& q) {
  double u = 0.0;
  const int n = static_cast<int>(m.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      u += m[i] * m[j] / (q.segment(i * d, d) - q.segment(j * d, d)).norm();
    }
  }
  return u;
}

// Restricted spectrum by finite differences: eigenvalues of
// (D^2U + U M) restricted to the M-orthogonal complement of s inside the
// centred subspace, relative to M. Basis by Gram-Schmidt in the M inner
// product, Hessian by central differences.
inline std::vector<double> fd_restricted_spectrum(const std::vector<double>& m, int d,
                                                  const Vec& s) {
  const int n = static_cast<int>(m.size());
  const int N = n * d;
  Vec metric(N);
  for (int i = 0; i < n; ++i) metric.segment(i * d, d).setConstant(m[i]);
  auto ip = [&](const Vec& a, const Vec& b) { return (metric.array() * a.array() * b.array()).sum(); };
  std::vector<Vec> basis;
  basis.push_back(s / std::sqrt(ip(s, s)));
  for (int c = 0; c < N; ++c) {
    Vec v = Vec::Zero(N);
    v(c) = 1.0;
    // remove centre of mass
    for (int a = 0; a < d; ++a) {
      double cm = 0.0, mt = 0.0;
      for (int i = 0; i < n; ++i) { cm += m[i] * v(i * d + a); mt += m[i]; }
      for (int i = 0; i < n; ++i) v(i * d + a) -= cm / mt;
    }
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& e : basis) v -= ip(e, v) * e;
    const double nv = std::sqrt(ip(v, v));
    if (nv > 1e-8) basis.push_back(v / nv);
  }
  const int k = static_cast<int>(basis.size()) - 1;
  Mat e(N, k);
  for (int i = 0; i < k; ++i) e.col(i) = basis[i + 1];
  auto u = [&](const Vec& q) { return newton_potential(m, d, q); };
  const Mat h = fd_hessian(u, s);
  const double b = u(s);
  const Mat a = e.transpose() * (h + b * Mat(metric.asDiagonal())) * e;
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (a + a.transpose()));
  std::vector<double> out(eig.eigenvalues().data(), eig.eigenvalues().data() + k);
  return out;
}

// Random symmetric matrix with entries in [-s, s].
inline Mat random_symmetric(std::mt19937& rng, int n, double s) {
  std::uniform_real_distribution<double> u(-s, s);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = u(rng);
  return 0.5 * (a + a.transpose());
}

// Random symplectic matrix as a product of shears and a linear change of
// positions.
inline Mat random_symplectic(std::mt19937& rng, int k) {
  const Mat i = Mat::Identity(k, k);
  Mat lower = Mat::Identity(2 * k, 2 * k), upper = Mat::Identity(2 * k, 2 * k);
  lower.bottomLeftCorner(k, k) = random_symmetric(rng, k, 0.8);
  upper.topRightCorner(k, k) = random_symmetric(rng, k, 0.8);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  Mat a = i;
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) a(r, c) += u(rng);
  Mat diag = Mat::Zero(2 * k, 2 * k);
  diag.topLeftCorner(k, k) = a.inverse().transpose();
  diag.bottomRightCorner(k, k) = a;
  return lower * upper * diag;
}

}  // namespace oracle
