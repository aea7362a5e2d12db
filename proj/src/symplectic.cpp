#include "hmorse/symplectic.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/QR>

#include "hmorse/errors.hpp"

namespace hmorse {

Mat standard_j(int k) {
  Mat j = Mat::Zero(2 * k, 2 * k);
  j.topRightCorner(k, k) = -Mat::Identity(k, k);
  j.bottomLeftCorner(k, k) = Mat::Identity(k, k);
  return j;
}

double symplecticity_defect(const Mat& g) {
  const int k = static_cast<int>(g.rows()) / 2;
  const Mat j = standard_j(k);
  return (g.transpose() * j * g - j).cwiseAbs().rowwise().sum().maxCoeff();
}

Mat symplectic_sum(const Mat& a, const Mat& b) {
  if (a.rows() % 2 || b.rows() % 2 || a.rows() != a.cols() || b.rows() != b.cols()) {
    throw ConfigError("symplectic_sum needs square matrices of even size");
  }
  const int m1 = static_cast<int>(a.rows()) / 2;
  const int m2 = static_cast<int>(b.rows()) / 2;
  const int m = m1 + m2;
  Mat out = Mat::Zero(2 * m, 2 * m);
  for (int bi = 0; bi < 2; ++bi) {
    for (int bj = 0; bj < 2; ++bj) {
      out.block(bi * m, bj * m, m1, m1) = a.block(bi * m1, bj * m1, m1, m1);
      out.block(bi * m + m1, bj * m + m1, m2, m2) = b.block(bi * m2, bj * m2, m2, m2);
    }
  }
  return out;
}

Mat symplectic_gram_schmidt(const Mat& g) {
  const int k = static_cast<int>(g.rows()) / 2;
  const Mat j = standard_j(k);
  auto omega = [&j](const Vec& x, const Vec& y) { return x.dot(j * y); };
  // Target relations: omega(g_{k+i}, g_i) = 1, every other pair omega = 0.
  Mat out = g;
  for (int i = 0; i < k; ++i) {
    Vec u = out.col(i);
    Vec w = out.col(k + i);
    for (int pass = 0; pass < 2; ++pass) {
      for (int l = 0; l < i; ++l) {
        const Vec ul = out.col(l);
        const Vec wl = out.col(k + l);
        u += -omega(wl, u) * ul + omega(ul, u) * wl;
        w += -omega(wl, w) * ul + omega(ul, w) * wl;
      }
    }
    const double s = omega(w, u);
    if (!(s > 0.0)) throw IntegratorError("symplectic Gram-Schmidt broke down");
    const double f = 1.0 / std::sqrt(s);
    out.col(i) = f * u;
    out.col(k + i) = f * w;
  }
  return out;
}

Vec flatten(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unflatten(const Vec& v, int rows, int cols) {
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

SymplecticPath::SymplecticPath(int k, Coefficient coeff, DenseSolution sol,
                               double max_defect)
    : k_(k), coeff_(std::move(coeff)), sol_(std::move(sol)), max_defect_(max_defect) {}

Mat SymplecticPath::gamma(double tau) const {
  return unflatten(sol_(tau), 2 * k_, 2 * k_);
}

Mat SymplecticPath::sample(std::size_t i) const {
  return unflatten(sol_.states()[i], 2 * k_, 2 * k_);
}

SymplecticPath integrate_linear(const Coefficient& coeff, double t0, double t1,
                                double tol, double tol_symp) {
  const Mat b0 = coeff(t0);
  if (b0.rows() != b0.cols() || b0.rows() % 2) {
    throw ConfigError("coefficient must be square of even size");
  }
  const int n = static_cast<int>(b0.rows());
  const int k = n / 2;
  const Mat j = standard_j(k);
  OdeRhs rhs = [&coeff, &j, n](double t, const Vec& y) {
    return flatten(j * coeff(t) * unflatten(y, n, n));
  };
  double worst = 0.0;
  StepHook hook = [&](double, Vec& y) {
    Mat g = unflatten(y, n, n);
    double d = symplecticity_defect(g);
    if (d > 0.1 * tol_symp) {
      g = symplectic_gram_schmidt(g);
      d = symplecticity_defect(g);
      y = flatten(g);
    }
    worst = std::max(worst, d);
  };
  OdeOptions opts;
  opts.rtol = tol;
  opts.atol = tol;
  opts.max_step = std::abs(t1 - t0) / 64.0;
  DenseSolution sol =
      integrate_dopri5(rhs, t0, flatten(Mat::Identity(n, n)), t1, opts, hook);
  if (worst > tol_symp) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "symplecticity defect %.3e exceeds tolerance %.1e",
                  worst, tol_symp);
    throw IntegratorError(buf);
  }
  return SymplecticPath(k, coeff, std::move(sol), worst);
}

LagrangianFrame::LagrangianFrame(Mat frame, double tol) : frame_(std::move(frame)) {
  if (frame_.rows() != 2 * frame_.cols()) {
    throw ConfigError("Lagrangian frame must be 2k x k");
  }
  if (frame_.cols() > 0) {
    Eigen::ColPivHouseholderQR<Mat> qr(frame_);
    qr.setThreshold(1e-10);
    if (qr.rank() != frame_.cols()) throw ConfigError("Lagrangian frame is rank deficient");
    if (isotropy_defect() > tol) throw ConfigError("frame is not isotropic");
  }
}

LagrangianFrame LagrangianFrame::dirichlet(int k) {
  Mat f = Mat::Zero(2 * k, k);
  f.topRows(k).setIdentity();
  return LagrangianFrame(f);
}

LagrangianFrame LagrangianFrame::neumann(int k) {
  Mat f = Mat::Zero(2 * k, k);
  f.bottomRows(k).setIdentity();
  return LagrangianFrame(f);
}

double LagrangianFrame::isotropy_defect() const {
  const double scale = frame_.squaredNorm() / std::max<double>(1.0, frame_.cols());
  const Mat iso = frame_.transpose() * standard_j(k()) * frame_;
  return iso.cwiseAbs().maxCoeff() / std::max(scale, 1e-300);
}

LagrangianFrame LagrangianFrame::transformed(const Mat& sigma) const {
  return LagrangianFrame(sigma * frame_);
}

LagrangianFrame direct_sum(const LagrangianFrame& a, const LagrangianFrame& b) {
  const int k1 = a.k(), k2 = b.k(), k = k1 + k2;
  Mat f = Mat::Zero(2 * k, k);
  f.block(0, 0, k1, k1) = a.frame().topRows(k1);
  f.block(k1, k1, k2, k2) = b.frame().topRows(k2);
  f.block(k, 0, k1, k1) = a.frame().bottomRows(k1);
  f.block(k + k1, k1, k2, k2) = b.frame().bottomRows(k2);
  return LagrangianFrame(f);
}

}  // namespace hmorse
