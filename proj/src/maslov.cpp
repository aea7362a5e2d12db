#include "hmorse/maslov.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "hmorse/errors.hpp"

namespace hmorse {

namespace {

// Thin Q of a QR factorization with the sign of each column chosen so that
// R has a positive diagonal; det(W^T J Q) then has the sign of det(W^T J Z).
Mat positive_q(const Mat& z) {
  const int k = static_cast<int>(z.cols());
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ() * Mat::Identity(z.rows(), k);
  const Mat& r = qr.matrixQR();
  for (int i = 0; i < k; ++i) {
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  }
  return q;
}

Vec singular_values(const LagrangianPath& path, const Mat& wq, double tau) {
  const Mat m = wq.transpose() * standard_j(path.k()) * path.orthonormal_frame(tau);
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues();
}

double sigma_min(const LagrangianPath& path, const Mat& wq, double tau) {
  if (path.k() == 0) return 1.0;
  const Vec s = singular_values(path, wq, tau);
  return s(s.size() - 1);
}

int count_below(const Vec& s, double tol) {
  int n = 0;
  for (int i = 0; i < s.size(); ++i) n += s(i) < tol ? 1 : 0;
  return n;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

LagrangianPath::LagrangianPath(int k, Coefficient coeff, double t0, double t1,
                               std::vector<double> grid, FrameFn frame_fn,
                               double max_isotropy_defect)
    : k_(k),
      coeff_(std::move(coeff)),
      t0_(t0),
      t1_(t1),
      grid_(std::move(grid)),
      frame_fn_(std::move(frame_fn)),
      max_isotropy_defect_(max_isotropy_defect) {}

Mat LagrangianPath::orthonormal_frame(double tau) const {
  return positive_q(frame(tau));
}

LagrangianPath transport(const Coefficient& coeff, const LagrangianFrame& start,
                         double t0, double t1, double tol) {
  const int k = start.k();
  const int n = 2 * k;
  const Mat j = standard_j(k);
  OdeRhs rhs = [coeff, j, n, k](double t, const Vec& y) {
    return flatten(j * coeff(t) * unflatten(y, n, k));
  };
  double worst = 0.0;
  StepHook hook = [&](double, Vec& y) {
    const Mat q = positive_q(unflatten(y, n, k));
    worst = std::max(worst, (q.transpose() * j * q).cwiseAbs().maxCoeff());
    y = flatten(q);
  };
  OdeOptions opts;
  opts.rtol = tol;
  opts.atol = tol;
  opts.max_step = std::abs(t1 - t0) / 200.0;
  const Mat z0 = positive_q(start.frame());
  auto sol = std::make_shared<DenseSolution>(
      integrate_dopri5(rhs, t0, flatten(z0), t1, opts, hook));
  auto frame_fn = [sol, n, k](double tau) { return unflatten((*sol)(tau), n, k); };
  return LagrangianPath(k, coeff, t0, t1, sol->times(), frame_fn, worst);
}

LagrangianPath image(const SymplecticPath& path, const LagrangianFrame& v) {
  const int k = path.k();
  const Mat j = standard_j(k);
  double worst = 0.0;
  for (std::size_t i = 0; i < path.sample_times().size(); ++i) {
    const Mat q = positive_q(path.sample(i) * v.frame());
    worst = std::max(worst, (q.transpose() * j * q).cwiseAbs().maxCoeff());
  }
  auto shared = std::make_shared<SymplecticPath>(path);
  const Mat f = v.frame();
  auto frame_fn = [shared, f](double tau) { return Mat(shared->gamma(tau) * f); };
  return LagrangianPath(k, path.coefficient(), path.tau_begin(), path.tau_end(),
                        path.sample_times(), frame_fn, worst);
}

Inertia inertia_of(const Mat& a, double tol) {
  Inertia out;
  if (a.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (a + a.transpose()),
                                         Eigen::EigenvaluesOnly);
  const Vec& ev = eig.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol * scale) {
      ++out.coindex;
    } else if (ev(i) < -tol * scale) {
      ++out.index;
    } else {
      ++out.nullity;
    }
  }
  return out;
}

double crossing_function(const LagrangianPath& path, const LagrangianFrame& w,
                         double tau) {
  const Mat m = w.frame().transpose() * standard_j(path.k()) * path.frame(tau);
  return m.determinant();
}

int intersection_dim(const LagrangianPath& path, const LagrangianFrame& w, double tau,
                     double kernel_tol) {
  if (path.k() == 0) return 0;
  return count_below(singular_values(path, positive_q(w.frame()), tau), kernel_tol);
}

CrossingForm crossing_form(const LagrangianPath& path, const LagrangianFrame& w,
                           double tau_c, int kernel_dim, bool throw_on_degenerate,
                           const CrossingOptions& opts) {
  const int k = path.k();
  const Mat q = path.orthonormal_frame(tau_c);
  const Mat m = positive_q(w.frame()).transpose() * standard_j(k) * q;
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  if (kernel_dim <= 0) kernel_dim = count_below(svd.singularValues(), opts.kernel_tol);
  CrossingForm out;
  if (kernel_dim == 0) {
    out.form = Mat(0, 0);
    return out;
  }
  // Right singular vectors of the smallest singular values span the
  // preimage of the intersection in frame coordinates.
  const Mat basis = q * svd.matrixV().rightCols(kernel_dim);
  out.form = basis.transpose() * path.coeff(tau_c) * basis;
  out.form = 0.5 * (out.form + out.form.transpose());
  out.inertia = inertia_of(out.form, opts.kernel_tol);
  if (throw_on_degenerate && out.inertia.nullity > 0) {
    throw DegenerateCrossingError("degenerate crossing form at tau=" +
                                      std::to_string(tau_c),
                                  tau_c);
  }
  return out;
}

std::vector<CrossingEvent> detect_crossings(const LagrangianPath& path,
                                            const LagrangianFrame& w,
                                            const CrossingOptions& opts) {
  if (w.k() != path.k()) throw ConfigError("frame dimension does not match the path");
  std::vector<CrossingEvent> events;
  const int k = path.k();
  if (k == 0) return events;
  const double t0 = path.tau_begin();
  const double t1 = path.tau_end();
  const Mat wq = positive_q(w.frame());

  auto make_event = [&](double tau, int dim, CrossingKind kind) {
    CrossingEvent ev;
    ev.tau_c = tau;
    ev.kind = kind;
    const CrossingForm cf = crossing_form(path, w, tau, dim, false, opts);
    ev.kernel_dim = dim;
    ev.form_inertia = cf.inertia;
    return ev;
  };

  const int d0 = count_below(singular_values(path, wq, t0), opts.kernel_tol);
  const int d1 = count_below(singular_values(path, wq, t1), opts.kernel_tol);
  if (d0 > 0) events.push_back(make_event(t0, d0, CrossingKind::Start));

  // Sample points: each integrator step split into equal pieces.
  const auto& grid = path.grid();
  std::vector<double> taus;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double h = grid[i + 1] - grid[i];
    for (int s = 0; s < opts.subsamples; ++s) taus.push_back(grid[i] + h * s / opts.subsamples);
  }
  taus.push_back(t1);
  const std::size_t n = taus.size();
  std::vector<double> f(n), smin(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = crossing_function(path, w, taus[i]);
    smin[i] = sigma_min(path, wq, taus[i]);
  }
  // Endpoints sitting on a crossing carry no usable sign.
  const std::size_t first = d0 > 0 ? 1 : 0;
  const std::size_t last = d1 > 0 ? n - 2 : n - 1;

  std::vector<double> roots;
  std::size_t prev = n;  // last sample with a nonzero sign
  for (std::size_t i = first; i <= last && i < n; ++i) {
    if (sign_of(f[i]) == 0) continue;
    if (prev != n && sign_of(f[i]) != sign_of(f[prev])) {
      double lo = taus[prev], hi = taus[i];
      const int slo = sign_of(f[prev]);
      while (hi - lo > opts.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        const int sm = sign_of(crossing_function(path, w, mid));
        if (sm == 0) {
          lo = hi = mid;
          break;
        }
        (sm == slo ? lo : hi) = mid;
      }
      const double tc = 0.5 * (lo + hi);
      if (!roots.empty() && tc - roots.back() < 10.0 * opts.bisect_tol) {
        throw UnresolvedCrossingError("clustered crossings near tau=" +
                                      std::to_string(tc));
      }
      if (!(d0 > 0 && tc - t0 < 1e-9) && !(d1 > 0 && t1 - tc < 1e-9)) {
        roots.push_back(tc);
        const int dim = std::max(1, count_below(singular_values(path, wq, tc), opts.kernel_tol));
        events.push_back(make_event(tc, dim, CrossingKind::Interior));
      }
    }
    prev = i;
  }

  // Tangential crossings: det touches zero without changing sign.
  for (std::size_t i = first + 1; i + 1 <= last && i + 1 < n; ++i) {
    if (!(smin[i] < smin[i - 1] && smin[i] < smin[i + 1] && smin[i] < 1e-3)) continue;
    if (sign_of(f[i - 1]) != sign_of(f[i + 1]) || sign_of(f[i - 1]) == 0) continue;
    double a = taus[i - 1], b = taus[i + 1];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = sigma_min(path, wq, x1), f2 = sigma_min(path, wq, x2);
    while (b - a > opts.bisect_tol) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - g * (b - a);
        f1 = sigma_min(path, wq, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + g * (b - a);
        f2 = sigma_min(path, wq, x2);
      }
    }
    const double tc = 0.5 * (a + b);
    if (sigma_min(path, wq, tc) < opts.tangency_tol) {
      const int dim =
          std::max(1, count_below(singular_values(path, wq, tc), opts.tangency_tol));
      events.push_back(make_event(tc, dim, CrossingKind::Interior));
    }
  }

  if (d1 > 0 && t1 > t0) events.push_back(make_event(t1, d1, CrossingKind::End));
  std::sort(events.begin(), events.end(),
            [](const CrossingEvent& x, const CrossingEvent& y) { return x.tau_c < y.tau_c; });
  return events;
}

std::vector<CrossingEvent> detect_crossings(const SymplecticPath& path,
                                            const LagrangianFrame& w,
                                            const CrossingOptions& opts) {
  return detect_crossings(image(path, LagrangianFrame::dirichlet(path.k())), w, opts);
}

namespace {

void check_degenerate(const CrossingEvent& ev, DegeneratePolicy policy, bool& flag) {
  if (ev.form_inertia.nullity == 0) return;
  flag = true;
  if (policy == DegeneratePolicy::Throw) {
    throw DegenerateCrossingError(
        "degenerate crossing at tau=" + std::to_string(ev.tau_c), ev.tau_c);
  }
}

}  // namespace

MaslovResult maslov_index(const LagrangianPath& path, const LagrangianFrame& w,
                          DegeneratePolicy policy, const CrossingOptions& opts) {
  MaslovResult out;
  out.crossings = detect_crossings(path, w, opts);
  for (const auto& ev : out.crossings) {
    check_degenerate(ev, policy, out.degenerate);
    switch (ev.kind) {
      case CrossingKind::Start:
        out.mu += ev.form_inertia.coindex;
        break;
      case CrossingKind::Interior:
        out.mu += ev.form_inertia.signature();
        break;
      case CrossingKind::End:
        out.mu -= ev.form_inertia.index;
        break;
    }
  }
  return out;
}

MaslovResult maslov_index(const SymplecticPath& path, const LagrangianFrame& w,
                          DegeneratePolicy policy, const CrossingOptions& opts) {
  return maslov_index(image(path, LagrangianFrame::dirichlet(path.k())), w, policy, opts);
}

std::vector<int> maslov_profile(const LagrangianPath& path, const LagrangianFrame& w,
                                const std::vector<double>& horizons,
                                DegeneratePolicy policy, const CrossingOptions& opts) {
  const auto events = detect_crossings(path, w, opts);
  std::vector<int> out;
  out.reserve(horizons.size());
  bool flag = false;
  for (double h : horizons) {
    if (h < path.tau_begin() || h > path.tau_end() + 1e-12) {
      throw ConfigError("horizon outside the integrated span");
    }
    int mu = 0;
    for (const auto& ev : events) {
      if (ev.kind == CrossingKind::Start) {
        check_degenerate(ev, policy, flag);
        mu += ev.form_inertia.coindex;
      } else if (ev.kind == CrossingKind::Interior && ev.tau_c < h - 1e-9) {
        check_degenerate(ev, policy, flag);
        mu += ev.form_inertia.signature();
      }
    }
    if (h > path.tau_begin()) {
      const CrossingForm end = crossing_form(path, w, h, 0, false, opts);
      if (end.inertia.nullity > 0 && policy == DegeneratePolicy::Throw) {
        throw DegenerateCrossingError("degenerate crossing at horizon", h);
      }
      mu -= end.inertia.index;
    }
    out.push_back(mu);
  }
  return out;
}

int plus_curve_count(const LagrangianPath& path, const LagrangianFrame& w,
                     const CrossingOptions& opts) {
  int count = 0;
  for (const auto& ev : detect_crossings(path, w, opts)) {
    if (ev.kind != CrossingKind::End) count += ev.kernel_dim;
  }
  return count;
}

}  // namespace hmorse
