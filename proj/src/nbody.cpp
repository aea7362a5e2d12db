#include "hmorse/nbody.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hmorse/errors.hpp"

namespace hmorse {

MassSystem::MassSystem(std::vector<double> masses, int dim)
    : masses_(std::move(masses)), dim_(dim), total_mass_(0.0) {
  if (dim_ < 1) throw ConfigError("spatial dimension must be positive");
  if (masses_.size() < 2) throw ConfigError("need at least two bodies");
  for (double m : masses_) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw ConfigError("masses must be strictly positive and finite");
    }
    total_mass_ += m;
  }
  metric_.resize(ambient_size());
  for (int i = 0; i < n_bodies(); ++i) {
    metric_.segment(i * dim_, dim_).setConstant(masses_[i]);
  }
}

double MassSystem::mass_inner(const Vec& a, const Vec& b) const {
  return (metric_.array() * a.array() * b.array()).sum();
}

double MassSystem::mass_norm(const Vec& a) const {
  return std::sqrt(mass_inner(a, a));
}

Vec MassSystem::center_of_mass_moment(const Vec& q) const {
  Vec c = Vec::Zero(dim_);
  for (int i = 0; i < n_bodies(); ++i) c += masses_[i] * q.segment(i * dim_, dim_);
  return c;
}

Vec MassSystem::center(const Vec& q) const {
  const Vec shift = center_of_mass_moment(q) / total_mass_;
  Vec out = q;
  for (int i = 0; i < n_bodies(); ++i) out.segment(i * dim_, dim_) -= shift;
  return out;
}

Mat MassSystem::centered_seed_basis() const {
  const int size = ambient_size();
  Mat basis(size, n_star());
  int found = 0;
  for (int k = 0; k < size && found < n_star(); ++k) {
    Vec e = Vec::Zero(size);
    e(k) = 1.0;
    Vec v = center(e);
    for (int j = 0; j < found; ++j) {
      v -= mass_inner(v, basis.col(j)) * basis.col(j);
    }
    const double nrm = mass_norm(v);
    if (nrm < 1e-8) continue;
    basis.col(found++) = v / nrm;
  }
  return basis;
}

Configuration::Configuration(int n_bodies, int dim, Vec coords)
    : n_(n_bodies), d_(dim), coords_(std::move(coords)) {
  if (coords_.size() != n_ * d_) {
    throw ConfigError("configuration has " + std::to_string(coords_.size()) +
                      " coordinates, expected " + std::to_string(n_ * d_));
  }
}

Configuration::Configuration(const MassSystem& sys, Vec coords)
    : Configuration(sys.n_bodies(), sys.dim(), std::move(coords)) {}

double Configuration::min_pair_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      best = std::min(best, (body(i) - body(j)).norm());
    }
  }
  return best;
}

namespace {

void check_size(const MassSystem& sys, const Vec& q) {
  if (q.size() != sys.ambient_size()) {
    throw ConfigError("configuration size does not match mass system");
  }
}

[[noreturn]] void throw_collision(int i, int j, double dist) {
  throw CollisionError("bodies " + std::to_string(i) + " and " +
                       std::to_string(j) + " at distance " +
                       std::to_string(dist));
}

}  // namespace

double potential(const MassSystem& sys, const Vec& q) {
  check_size(sys, q);
  const int n = sys.n_bodies();
  const int d = sys.dim();
  const auto& m = sys.masses();
  double u = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dist = (q.segment(i * d, d) - q.segment(j * d, d)).norm();
      if (dist < kTolDist) throw_collision(i, j, dist);
      u += m[i] * m[j] / dist;
    }
  }
  return u;
}

Vec grad_potential(const MassSystem& sys, const Vec& q) {
  check_size(sys, q);
  const int n = sys.n_bodies();
  const int d = sys.dim();
  const auto& m = sys.masses();
  Vec g = Vec::Zero(q.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec diff = q.segment(i * d, d) - q.segment(j * d, d);
      const double dist = diff.norm();
      if (dist < kTolDist) throw_collision(i, j, dist);
      // d/dq_i of m_i m_j / |q_i - q_j|
      const Vec f = -m[i] * m[j] / (dist * dist * dist) * diff;
      g.segment(i * d, d) += f;
      g.segment(j * d, d) -= f;
    }
  }
  return g;
}

Mat hess_potential(const MassSystem& sys, const Vec& q) {
  check_size(sys, q);
  const int n = sys.n_bodies();
  const int d = sys.dim();
  const auto& m = sys.masses();
  Mat h = Mat::Zero(q.size(), q.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec diff = q.segment(i * d, d) - q.segment(j * d, d);
      const double dist = diff.norm();
      if (dist < kTolDist) throw_collision(i, j, dist);
      const double r3 = dist * dist * dist;
      const double r5 = r3 * dist * dist;
      // Hessian of 1/|x| is (3 x x^T - |x|^2 I) / |x|^5.
      const Mat block =
          m[i] * m[j] *
          (3.0 * diff * diff.transpose() / r5 - Mat::Identity(d, d) / r3);
      h.block(i * d, i * d, d, d) += block;
      h.block(j * d, j * d, d, d) += block;
      h.block(i * d, j * d, d, d) -= block;
      h.block(j * d, i * d, d, d) -= block;
    }
  }
  // rounding in the outer products leaves O(eps) asymmetry
  h.triangularView<Eigen::StrictlyLower>() = h.transpose();
  return h;
}

double moment_of_inertia(const MassSystem& sys, const Vec& q) {
  check_size(sys, q);
  return sys.mass_inner(q, q);
}

Vec normalize_configuration(const MassSystem& sys, const Vec& q) {
  check_size(sys, q);
  Vec c = sys.center(q);
  const double nrm = sys.mass_norm(c);
  if (nrm < kTolDist) throw CollisionError("cannot normalize total collision");
  return c / nrm;
}

Mat tangent_basis_at(const MassSystem& sys, const Vec& s0) {
  const Mat seed = sys.centered_seed_basis();
  const int k = sys.n_star() - 1;
  Mat basis(s0.size(), k);
  int found = 0;
  // Two passes of Gram-Schmidt for numerical orthogonality.
  for (int c = 0; c < seed.cols() && found < k; ++c) {
    Vec v = seed.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      v -= sys.mass_inner(v, s0) * s0;
      for (int j = 0; j < found; ++j) {
        v -= sys.mass_inner(v, basis.col(j)) * basis.col(j);
      }
    }
    const double nrm = sys.mass_norm(v);
    if (nrm < 1e-8) continue;
    basis.col(found++) = v / nrm;
  }
  if (found != k) throw ChartDomainError("failed to build tangent basis");
  return basis;
}

EllipsoidChart::EllipsoidChart(const MassSystem& sys, const Vec& base_point,
                               double chart_radius)
    : EllipsoidChart(sys, base_point, tangent_basis_at(sys, base_point),
                     chart_radius) {}

EllipsoidChart::EllipsoidChart(const MassSystem& sys, const Vec& base_point,
                               const Mat& tangent_basis, double chart_radius)
    : sys_(sys), base_(base_point), basis_(tangent_basis), radius_(chart_radius) {
  if (std::abs(moment_of_inertia(sys_, base_) - 1.0) > kTolCenter) {
    throw NotNormalizedError("chart base point is not on the inertia ellipsoid");
  }
  if (sys_.center_of_mass_moment(base_).norm() > kTolCenter) {
    throw NotNormalizedError("chart base point is not centred");
  }
  if (basis_.cols() != sys_.n_star() - 1 || basis_.rows() != base_.size()) {
    throw ChartDomainError("tangent basis has wrong shape");
  }
}

Mat EllipsoidChart::full_basis() const {
  Mat b(base_.size(), basis_.cols() + 1);
  b.col(0) = base_;
  b.rightCols(basis_.cols()) = basis_;
  return b;
}

void EllipsoidChart::check_domain(const Vec& x) const {
  if (x.size() != basis_.cols()) throw ChartDomainError("chart coordinate size");
  if (x.norm() >= radius_) {
    throw ChartDomainError("chart coordinate outside chart radius");
  }
}

Vec EllipsoidChart::inverse(const Vec& x) const {
  check_domain(x);
  const Vec w = base_ + basis_ * x;
  const double n = sys_.mass_norm(w);
  if (n < 1e-12) throw ChartDomainError("chart denominator vanishes");
  return w / n;
}

Mat EllipsoidChart::jacobian(const Vec& x) const {
  check_domain(x);
  const Vec w = base_ + basis_ * x;
  const double n = sys_.mass_norm(w);
  if (n < 1e-12) throw ChartDomainError("chart denominator vanishes");
  // dn/dx = E^T M w / n
  const Vec dn = basis_.transpose() * (sys_.metric_diagonal().asDiagonal() * w) / n;
  return basis_ / n - w * dn.transpose() / (n * n);
}

std::vector<std::vector<Vec>> EllipsoidChart::second_derivative(const Vec& x) const {
  check_domain(x);
  const int k = dim();
  const Vec w = base_ + basis_ * x;
  const double n = sys_.mass_norm(w);
  if (n < 1e-12) throw ChartDomainError("chart denominator vanishes");
  const auto metric = sys_.metric_diagonal().asDiagonal();
  const Vec g = basis_.transpose() * (metric * w);  // n dn/dx
  const Mat gram = basis_.transpose() * metric * basis_;
  std::vector<std::vector<Vec>> out(k, std::vector<Vec>(k));
  const double n3 = n * n * n;
  const double n5 = n3 * n * n;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      // psi = w / n, with n^2 = <Mw, w>.
      out[i][j] = -(basis_.col(i) * g(j) + basis_.col(j) * g(i)) / n3 -
                  w * gram(i, j) / n3 + 3.0 * w * g(i) * g(j) / n5;
    }
  }
  return out;
}

Mat EllipsoidChart::metric(const Vec& x) const {
  const Mat jac = jacobian(x);
  Mat g = jac.transpose() * sys_.metric_diagonal().asDiagonal() * jac;
  g.triangularView<Eigen::StrictlyLower>() = g.transpose();
  return g;
}

std::vector<Mat> EllipsoidChart::metric_derivative(const Vec& x) const {
  const Mat jac = jacobian(x);
  const auto second = second_derivative(x);
  const int k = dim();
  const auto metric_diag = sys_.metric_diagonal().asDiagonal();
  std::vector<Mat> out(k);
  for (int j = 0; j < k; ++j) {
    Mat djac(jac.rows(), k);
    for (int i = 0; i < k; ++i) djac.col(i) = second[i][j];
    const Mat half = djac.transpose() * metric_diag * jac;
    out[j] = half + half.transpose();
  }
  return out;
}

double EllipsoidChart::potential(const Vec& x) const {
  return hmorse::potential(sys_, inverse(x));
}

Vec EllipsoidChart::gradient(const Vec& x) const {
  return jacobian(x).transpose() * grad_potential(sys_, inverse(x));
}

Mat EllipsoidChart::hessian(const Vec& x) const {
  const Vec s = inverse(x);
  const Mat jac = jacobian(x);
  const Vec g = grad_potential(sys_, s);
  Mat h = jac.transpose() * hess_potential(sys_, s) * jac;
  const auto second = second_derivative(x);
  for (int i = 0; i < dim(); ++i) {
    for (int j = 0; j < dim(); ++j) h(i, j) += g.dot(second[i][j]);
  }
  return 0.5 * (h + h.transpose());
}

double EllipsoidChart::orthonormality_defect() const {
  if (dim() == 0) return 0.0;
  const auto metric_diag = sys_.metric_diagonal().asDiagonal();
  const Mat gram = basis_.transpose() * metric_diag * basis_;
  double defect = (gram - Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  const Vec cross = basis_.transpose() * (metric_diag * base_);
  return std::max(defect, cross.cwiseAbs().maxCoeff());
}

}  // namespace hmorse
