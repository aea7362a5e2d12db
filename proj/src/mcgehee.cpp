#include "hmorse/mcgehee.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hmorse/errors.hpp"
#include "hmorse/symplectic.hpp"

namespace hmorse {

void RadialData::validate() const {
  if (!(b >= 0.0)) throw ConfigError("potential value b must be nonnegative");
  if (!(r0 > 0.0)) throw ConfigError("initial radius must be positive");
  if (v0 > 0.0) throw ConfigError("initial radial velocity must be nonpositive");
  if (std::abs(energy_defect()) > 1e-12 * std::max(1.0, b)) {
    throw ConfigError("energy relation 1/2 v0^2 - b = r0 h0 violated by " +
                      std::to_string(energy_defect()));
  }
}

namespace {

HomotheticOrbit from_cc(const CentralConfiguration& cc, RadialData radial) {
  HomotheticOrbit o;
  o.radial = radial;
  o.n_star = cc.system.n_star();
  o.spectrum = cc.spectrum;
  o.classification = cc.classification;
  const EllipsoidChart chart = cc.chart();
  o.chart_hessian = chart.dim() > 0 ? chart.hessian(Vec::Zero(chart.dim()))
                                    : Mat(0, 0);
  o.cc = cc;
  o.validate();
  return o;
}

}  // namespace

HomotheticOrbit HomotheticOrbit::apex(const CentralConfiguration& cc, double h0) {
  if (!(h0 < 0.0)) throw ConfigError("apex start needs negative energy");
  return from_cc(cc, {cc.b_value, h0, -cc.b_value / h0, 0.0});
}

HomotheticOrbit HomotheticOrbit::from_radius(const CentralConfiguration& cc,
                                             double h0, double r0) {
  const double w = 2.0 * (cc.b_value + r0 * h0);
  if (w < 0.0) throw ConfigError("radius beyond the apex for this energy");
  return from_cc(cc, {cc.b_value, h0, r0, -std::sqrt(w)});
}

HomotheticOrbit HomotheticOrbit::standard(const CentralConfiguration& cc, double h0) {
  return h0 < 0.0 ? apex(cc, h0) : from_radius(cc, h0, 1.0);
}

HomotheticOrbit HomotheticOrbit::with_start(const CentralConfiguration& cc,
                                            double h0, double r0, double v0) {
  return from_cc(cc, {cc.b_value, h0, r0, v0});
}

HomotheticOrbit HomotheticOrbit::synthetic(double b, std::vector<double> spectrum,
                                           double h0, double r0) {
  HomotheticOrbit o;
  if (r0 <= 0.0) r0 = h0 < 0.0 ? -b / h0 : 1.0;
  const double w = 2.0 * (b + r0 * h0);
  if (w < 0.0) throw ConfigError("radius beyond the apex for this energy");
  o.radial = {b, h0, r0, -std::sqrt(std::max(w, 0.0))};
  std::sort(spectrum.begin(), spectrum.end());
  o.n_star = 1 + static_cast<int>(spectrum.size());
  o.chart_hessian = Mat::Zero(o.n_star - 1, o.n_star - 1);
  for (int i = 0; i + 1 < o.n_star; ++i) o.chart_hessian(i, i) = spectrum[i];
  o.spectrum = std::move(spectrum);
  o.classification = classify(o.spectrum, b);
  o.validate();
  return o;
}

void HomotheticOrbit::validate() const {
  radial.validate();
  if (!(radial.b > 0.0)) throw ConfigError("b must be positive for an orbit");
  if (static_cast<int>(spectrum.size()) != n_star - 1) {
    throw ConfigError("spectrum size must be n_star - 1");
  }
  if (chart_hessian.rows() != n_star - 1 || chart_hessian.cols() != n_star - 1) {
    throw ConfigError("chart Hessian has wrong shape");
  }
}

ReducedPath::ReducedPath(RadialData data, DenseSolution sol)
    : data_(data), sol_(std::move(sol)) {}

double ReducedPath::r(double tau) const { return std::exp(sol_(tau)(1)); }

double ReducedPath::energy_residual(double tau) const {
  const Vec y = sol_(tau);
  return 0.5 * y(0) * y(0) - data_.b - std::exp(y(1)) * data_.h0;
}

double ReducedPath::max_energy_residual() const {
  double worst = 0.0;
  for (const Vec& y : sol_.states()) {
    worst = std::max(worst,
                     std::abs(0.5 * y(0) * y(0) - data_.b - std::exp(y(1)) * data_.h0));
  }
  return worst;
}

double ReducedPath::tau_of_t(double t_phys) const {
  if (t_phys < 0.0) throw IntegratorError("negative physical time");
  const auto& times = sol_.times();
  const auto& states = sol_.states();
  if (t_phys > states.back()(2)) {
    throw IntegratorError("physical time " + std::to_string(t_phys) +
                          " beyond the integrated path (t_max = " +
                          std::to_string(states.back()(2)) + ")");
  }
  // t is increasing; locate the step then bisect on the dense output.
  std::size_t k = 0;
  while (k + 1 < states.size() && states[k + 1](2) < t_phys) ++k;
  if (k + 1 >= states.size()) return times.back();
  double lo = times[k];
  double hi = times[k + 1];
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sol_.eval_in_step(k, mid)(2) < t_phys) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ReducedPath reduced_flow(const RadialData& data, double tau_max, double tol) {
  data.validate();
  if (!(tau_max > 0.0)) throw ConfigError("tau_max must be positive");
  const double b = data.b;
  OdeRhs rhs = [b](double, const Vec& y) {
    Vec dy(3);
    dy(0) = 0.5 * y(0) * y(0) - b;
    dy(1) = y(0);
    dy(2) = std::exp(1.5 * y(1));
    return dy;
  };
  Vec y0(3);
  y0 << data.v0, std::log(data.r0), 0.0;
  OdeOptions opts;
  // the local error control is tighter than tol so that the accumulated
  // energy drift stays within a small multiple of it
  opts.rtol = tol * 0.05;
  opts.atol = tol * 1e-3;
  return ReducedPath(data, integrate_dopri5(rhs, 0.0, y0, tau_max, opts));
}

double physical_time(const ReducedPath& path) { return path.t(path.tau_max()); }

double collision_time(const ReducedPath& path) {
  const double tau = path.tau_max();
  const double v = path.v(tau);
  const double r = path.r(tau);
  // r ~ r(tau_max) exp(v (s - tau_max)) beyond the horizon.
  const double tail = v < 0.0 ? std::pow(r, 1.5) / (-1.5 * v) : 0.0;
  return physical_time(path) + tail;
}

Mat block_B1(double v, double b) {
  Mat m(2, 2);
  m << 1.0, -0.75 * v, -0.75 * v, -2.0 * b;
  return m;
}

Mat block_Blambda(double v, double lambda) {
  Mat m(2, 2);
  m << 1.0, 0.25 * v, 0.25 * v, -lambda;
  return m;
}

Mat homothetic_Bhat(double v, double b, const Mat& chart_hessian, double eps) {
  const int k = static_cast<int>(chart_hessian.rows());
  Mat b2(2 * k, 2 * k);
  b2.setZero();
  b2.topLeftCorner(k, k).setIdentity();
  b2.topRightCorner(k, k) = 0.25 * v * Mat::Identity(k, k);
  b2.bottomLeftCorner(k, k) = 0.25 * v * Mat::Identity(k, k);
  b2.bottomRightCorner(k, k) = -chart_hessian - eps * Mat::Identity(k, k);
  return symplectic_sum(block_B1(v, b), b2);
}

namespace {

struct MetricData {
  Mat inv;                   // M-hat^{-1}
  std::vector<Mat> dinv;     // d M-hat^{-1} / dx_j
};

MetricData metric_data(const EllipsoidChart& chart, const Vec& x) {
  MetricData md;
  md.inv = chart.metric(x).inverse();
  const auto dm = chart.metric_derivative(x);
  md.dinv.reserve(dm.size());
  for (const Mat& d : dm) md.dinv.push_back(-md.inv * d * md.inv);
  return md;
}

// D_x(M^-1 w): (i, j) = d_j (M^-1 w)_i
Mat d_metric_inv_times(const MetricData& md, const Vec& w) {
  const int k = static_cast<int>(w.size());
  Mat out(k, k);
  for (int j = 0; j < k; ++j) out.col(j) = md.dinv[j] * w;
  return out;
}

// grad_x <M^-1 w, w>
Vec grad_quadratic(const MetricData& md, const Vec& w) {
  const int k = static_cast<int>(w.size());
  Vec out(k);
  for (int j = 0; j < k; ++j) out(j) = w.dot(md.dinv[j] * w);
  return out;
}

// Hessian_x <M^-1 w, w>, central differences of the analytic gradient.
Mat hess_quadratic(const EllipsoidChart& chart, const Vec& x, const Vec& w) {
  const int k = static_cast<int>(w.size());
  Mat out(k, k);
  if (w.squaredNorm() == 0.0) return Mat::Zero(k, k);
  const double h = 1e-5;
  for (int l = 0; l < k; ++l) {
    Vec xp = x, xm = x;
    xp(l) += h;
    xm(l) -= h;
    out.col(l) = (grad_quadratic(metric_data(chart, xp), w) -
                  grad_quadratic(metric_data(chart, xm), w)) /
                 (2.0 * h);
  }
  return 0.5 * (out + out.transpose());
}

}  // namespace

Mat full_Bhat(const McGeheeState& s, const EllipsoidChart& chart) {
  const int k = chart.dim();
  const int ns = k + 1;
  if (s.u.size() != k || s.x.size() != k) {
    throw ConfigError("state vectors must have n_star - 1 entries");
  }
  const MetricData md = metric_data(chart, s.x);
  const Vec minv_u = md.inv * s.u;
  const double quad = s.u.dot(minv_u);
  const Vec grad_u = chart.gradient(s.x);
  const Mat hess_u = chart.hessian(s.x);

  Mat out = Mat::Zero(2 * ns, 2 * ns);
  const int P1 = 0, P2 = 1, R = ns, X = ns + 1;
  out(P1, P1) = 1.0;
  out(P1, R) = out(R, P1) = -0.75 * s.v;
  out.block(P2, P2, k, k) = md.inv;
  out.block(P2, R, k, 1) = -2.0 * minv_u;
  out.block(R, P2, 1, k) = -2.0 * minv_u.transpose();
  const Mat px = d_metric_inv_times(md, s.u) + 0.25 * s.v * Mat::Identity(k, k);
  out.block(P2, X, k, k) = px;
  out.block(X, P2, k, k) = px.transpose();
  out(R, R) = 3.0 * quad - 2.0 * chart.potential(s.x);
  const Vec rx = grad_u - grad_quadratic(md, s.u);
  out.block(R, X, 1, k) = rx.transpose();
  out.block(X, R, k, 1) = rx;
  out.block(X, X, k, k) = 0.5 * hess_quadratic(chart, s.x, s.u) - hess_u;
  return out;
}

Mat hamiltonian_hessian(double p1, const Vec& p2, double r, const Vec& x,
                        const EllipsoidChart& chart) {
  (void)p1;  // H is quadratic in p1 with unit coefficient
  const int k = chart.dim();
  const int ns = k + 1;
  const MetricData md = metric_data(chart, x);
  const Vec minv_p = md.inv * p2;
  const double quad = p2.dot(minv_p);
  const double r2 = r * r, r3 = r2 * r, r4 = r3 * r;

  Mat out = Mat::Zero(2 * ns, 2 * ns);
  const int P1 = 0, P2 = 1, R = ns, X = ns + 1;
  out(P1, P1) = 1.0;
  out.block(P2, P2, k, k) = md.inv / r2;
  out.block(P2, R, k, 1) = -2.0 * minv_p / r3;
  out.block(R, P2, 1, k) = -2.0 * minv_p.transpose() / r3;
  const Mat px = d_metric_inv_times(md, p2) / r2;
  out.block(P2, X, k, k) = px;
  out.block(X, P2, k, k) = px.transpose();
  out(R, R) = 3.0 * quad / r4 - 2.0 * chart.potential(x) / r3;
  const Vec rx = chart.gradient(x) / r2 - grad_quadratic(md, p2) / r3;
  out.block(R, X, 1, k) = rx.transpose();
  out.block(X, R, k, 1) = rx;
  out.block(X, X, k, k) =
      hess_quadratic(chart, x, p2) / (2.0 * r2) - chart.hessian(x) / r;
  return out;
}

Mat mcgehee_scaling(double r, int n_star) {
  const int k = n_star - 1;
  Vec d(2 * n_star);
  d(0) = std::pow(r, 0.75);
  d.segment(1, k).setConstant(std::pow(r, -0.25));
  d(n_star) = std::pow(r, -0.75);
  d.segment(n_star + 1, k).setConstant(std::pow(r, 0.25));
  return d.asDiagonal();
}

Mat conjugated_coefficient(const McGeheeState& s, const EllipsoidChart& chart) {
  const int ns = chart.dim() + 1;
  const double sr = std::sqrt(s.r);
  const double p1 = s.v / sr;     // v = r^{1/2} p1
  const Vec p2 = sr * s.u;        // u = r^{-1/2} p2
  const Mat btau = std::pow(s.r, 1.5) * hamiltonian_hessian(p1, p2, s.r, s.x, chart);

  const Mat rmat = mcgehee_scaling(s.r, ns);
  const Mat rinv = rmat.inverse();
  // d/dtau r^a = a r^a v, since r' = r v.
  Vec expo(2 * ns);
  expo(0) = 0.75;
  expo.segment(1, ns - 1).setConstant(-0.25);
  expo(ns) = -0.75;
  expo.segment(ns + 1, ns - 1).setConstant(0.25);
  const Mat rdot = (s.v * expo).asDiagonal() * rmat;
  const Mat j = standard_j(ns);
  return -j * rdot * rinv + rinv.transpose() * btau * rinv;
}

McGeheeRates mcgehee_rhs(const McGeheeState& s, const EllipsoidChart& chart) {
  const MetricData md = metric_data(chart, s.x);
  McGeheeRates out;
  const Vec minv_u = md.inv * s.u;
  out.v = 0.5 * s.v * s.v + s.u.dot(minv_u) - chart.potential(s.x);
  out.u = -0.5 * s.u * s.v + chart.gradient(s.x) - 0.5 * grad_quadratic(md, s.u);
  out.r = s.r * s.v;
  out.x = minv_u;
  return out;
}

McGeheeState homothetic_state(const ReducedPath& path, int n_star, double tau) {
  McGeheeState s;
  s.v = path.v(tau);
  s.r = path.r(tau);
  s.u = Vec::Zero(n_star - 1);
  s.x = Vec::Zero(n_star - 1);
  s.tau = tau;
  s.t_phys = path.t(tau);
  return s;
}

}  // namespace hmorse
