#include "hmorse/index_engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "hmorse/errors.hpp"

namespace hmorse {

namespace {

void check_horizons(const std::vector<double>& h) {
  if (h.empty()) throw ConfigError("horizon list is empty");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0)) throw ConfigError("horizons must be positive");
    if (i > 0 && !(h[i] > h[i - 1])) throw ConfigError("horizons must be strictly increasing");
  }
}

// Sign-change zeros of a sampled scalar, refined by bisection on an
// interpolant. Samples at index 0 are skipped (the caller counts tau = 0).
std::vector<double> zeros_after_start(const DenseSolution& sol, int component) {
  std::vector<double> zeros;
  const auto& t = sol.times();
  double prev_t = 0.0, prev_v = 0.0;
  bool have_prev = false;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const int sub = 8;
    for (int s = (k == 0 ? 1 : 0); s <= sub; ++s) {
      const double tau = t[k] + (t[k + 1] - t[k]) * s / sub;
      const double val = sol.eval_in_step(k, tau)(component);
      if (val == 0.0) continue;
      if (have_prev && (val > 0.0) != (prev_v > 0.0)) {
        double lo = prev_t, hi = tau;
        const bool lo_pos = prev_v > 0.0;
        while (hi - lo > 1e-12 * std::max(1.0, hi)) {
          const double mid = 0.5 * (lo + hi);
          ((sol(mid)(component) > 0.0) == lo_pos ? lo : hi) = mid;
        }
        zeros.push_back(0.5 * (lo + hi));
      }
      prev_t = tau;
      prev_v = val;
      have_prev = true;
    }
  }
  return zeros;
}

}  // namespace

RadialData maslov_radial_data(const HomotheticOrbit& orbit, double b_scale) {
  RadialData rd = orbit.radial;
  if (b_scale == 1.0) return rd;
  rd.b = orbit.b() * b_scale;
  if (rd.v0 == 0.0 && rd.h0 < 0.0) {
    rd.r0 = -rd.b / rd.h0;
  } else {
    const double w = 2.0 * (rd.b + rd.r0 * rd.h0);
    if (w < 0.0) throw ConfigError("scaled b leaves no admissible start");
    rd.v0 = -std::sqrt(w);
  }
  return rd;
}

std::function<Mat(double)> full_coefficient_of_v(const HomotheticOrbit& orbit,
                                                 double b, double epsilon) {
  const int ns = orbit.n_star;
  if (!orbit.cc) {
    const Mat h = orbit.chart_hessian;
    return [b, h, epsilon](double v) { return homothetic_Bhat(v, b, h, epsilon); };
  }
  // Along u = 0, x = 0 the coefficient is affine in v.
  const EllipsoidChart chart = orbit.cc->chart();
  McGeheeState s;
  s.u = Vec::Zero(ns - 1);
  s.x = Vec::Zero(ns - 1);
  s.v = 0.0;
  Mat b0 = full_Bhat(s, chart);
  s.v = 1.0;
  const Mat dv = full_Bhat(s, chart) - b0;
  b0(ns, ns) -= 2.0 * (b - orbit.b());
  b0.bottomRightCorner(ns - 1, ns - 1) -= epsilon * Mat::Identity(ns - 1, ns - 1);
  return [b0, dv](double v) { return Mat(b0 + v * dv); };
}

GeometricalIndex geometrical_index(const HomotheticOrbit& orbit,
                                   const std::vector<double>& horizons,
                                   const IndexOptions& opts) {
  check_horizons(horizons);
  const RadialData rd = maslov_radial_data(orbit, opts.b_scale);
  const double b = rd.b;
  const double tau_max = horizons.back();
  auto path = std::make_shared<ReducedPath>(reduced_flow(rd, tau_max, opts.tol));

  GeometricalIndex out;
  out.horizons = horizons;
  out.max_energy_residual = path->max_energy_residual();
  const auto d1 = LagrangianFrame::dirichlet(1);

  try {
    const Coefficient c1 = [path, b](double tau) { return block_B1(path->v(tau), b); };
    const LagrangianPath p1 = transport(c1, d1, 0.0, tau_max, opts.tol);
    out.max_isotropy_defect = std::max(out.max_isotropy_defect, p1.max_isotropy_defect());
    out.mu_b1 = maslov_profile(p1, d1, horizons);
    out.mu_total = out.mu_b1;

    for (double lambda : orbit.spectrum) {
      const double shifted = lambda + opts.epsilon;
      const Coefficient cl = [path, shifted](double tau) {
        return block_Blambda(path->v(tau), shifted);
      };
      const LagrangianPath pl = transport(cl, d1, 0.0, tau_max, opts.tol);
      out.max_isotropy_defect = std::max(out.max_isotropy_defect, pl.max_isotropy_defect());
      out.mu_per_lambda.push_back(maslov_profile(pl, d1, horizons));
      for (std::size_t i = 0; i < horizons.size(); ++i) {
        out.mu_total[i] += out.mu_per_lambda.back()[i];
      }
    }

    if (opts.check_full) {
      const auto coeff_v = full_coefficient_of_v(orbit, b, opts.epsilon);
      const Coefficient cf = [path, coeff_v](double tau) { return coeff_v(path->v(tau)); };
      const auto dn = LagrangianFrame::dirichlet(orbit.n_star);
      const LagrangianPath pf = transport(cf, dn, 0.0, tau_max, opts.tol);
      out.max_isotropy_defect = std::max(out.max_isotropy_defect, pf.max_isotropy_defect());
      out.mu_full = maslov_profile(pf, dn, horizons);
      if (out.mu_full != out.mu_total) {
        std::ostringstream msg;
        msg << "full path index differs from the block sum at horizons:";
        for (std::size_t i = 0; i < horizons.size(); ++i) {
          msg << " " << horizons[i] << "(" << out.mu_full[i] << " vs " << out.mu_total[i] << ")";
        }
        throw IndexMismatchError(msg.str());
      }
    }
  } catch (const DegenerateCrossingError&) {
    if (opts.epsilon != 0.0) throw;
    IndexOptions shifted = opts;
    shifted.epsilon = 1e-8;
    GeometricalIndex again = geometrical_index(orbit, horizons, shifted);
    again.perturbed = true;
    return again;
  }
  return out;
}

namespace {

ScalarCrossing scalar_run(const RadialData& rd, double tau_max, double tol,
                          std::function<double(double v, double r)> kappa_a,
                          std::function<double(double v, double r)> kappa_c, double a0,
                          double da0) {
  const double b = rd.b;
  OdeRhs rhs = [b, kappa_a, kappa_c](double, const Vec& y) {
    const double r = std::exp(y(1));
    Vec dy(6);
    dy(0) = 0.5 * y(0) * y(0) - b;
    dy(1) = y(0);
    dy(2) = y(3);
    dy(3) = kappa_a(y(0), r) * y(2);
    dy(4) = y(5);
    dy(5) = kappa_c(y(0), r) * y(4);
    return dy;
  };
  Vec y0(6);
  y0 << rd.v0, std::log(rd.r0), a0, da0, 0.0, 1.0;
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol * 1e-2;
  o.max_step = tau_max / 400.0;
  const DenseSolution sol = integrate_dopri5(rhs, 0.0, y0, tau_max, o);

  ScalarCrossing out;
  out.c_zeros.push_back(0.0);
  for (double z : zeros_after_start(sol, 4)) out.c_zeros.push_back(z);
  out.zero_count_c = static_cast<int>(out.c_zeros.size());
  out.min_a = a0;
  const auto& t = sol.times();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Vec& y = sol.states()[k];
    out.taus.push_back(t[k]);
    out.a_values.push_back(y(2));
    out.c_values.push_back(y(4));
    if (k + 1 < t.size()) {
      for (int s = 0; s < 8; ++s) {
        const double a = sol.eval_in_step(k, t[k] + (t[k + 1] - t[k]) * s / 8.0)(2);
        out.min_a = std::min(out.min_a, a);
      }
    }
    out.min_a = std::min(out.min_a, y(2));
  }
  out.a_positive = out.min_a > 0.0;
  return out;
}

}  // namespace

ScalarCrossing scalar_crossing_ode(const HomotheticOrbit& orbit, double lambda,
                                   double tau_max, double tol) {
  const RadialData& rd = orbit.radial;
  const double b = rd.b, h0 = rd.h0;
  return scalar_run(
      rd, tau_max, tol,
      [=](double, double r) { return -r * h0 / 8.0 + b / 8.0 + lambda; },
      [=](double, double r) { return 3.0 * r * h0 / 8.0 + b / 8.0 + lambda; }, 1.0,
      -0.25 * rd.v0);
}

ScalarCrossing scalar_b1_ode(const HomotheticOrbit& orbit, double tau_max, double tol) {
  const RadialData& rd = orbit.radial;
  const double b = rd.b;
  // a = c' + 3/4 v c for this block, so a'' is not tracked; only c matters.
  return scalar_run(
      rd, tau_max, tol, [](double, double) { return 0.0; },
      [=](double v, double) { return 3.0 / 16.0 * v * v + 11.0 / 4.0 * b; }, 1.0, 0.0);
}

ReducedPath path_covering(const RadialData& data, double t_phys, double tol) {
  double tau = 8.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    ReducedPath path = reduced_flow(data, tau, tol);
    if (physical_time(path) > t_phys) return path;
    if (path.r(tau) < 1e-14 || t_phys >= collision_time(path)) {
      throw ConfigError("requested time " + std::to_string(t_phys) +
                        " is not below the collision time " +
                        std::to_string(collision_time(path)));
    }
    tau *= 2.0;
  }
  throw ConfigError("could not reach the requested physical time");
}

double orbit_collision_time(const RadialData& data, double tol) {
  const double rate = std::sqrt(2.0 * std::max(data.b, 1e-300));
  // r decays like exp(-rate tau); integrate until r^{3/2} is negligible.
  const double tau = std::max(8.0, 40.0 / rate + std::abs(std::log(data.r0)) / rate * 2.0);
  return collision_time(reduced_flow(data, tau, tol));
}

Mat second_variation_potential(const HomotheticOrbit& orbit) {
  const int ns = orbit.n_star;
  if (orbit.cc) {
    const Mat basis = orbit.cc->chart().full_basis();
    return basis.transpose() * hess_potential(orbit.cc->system, orbit.cc->shape) * basis;
  }
  Mat p = Mat::Zero(ns, ns);
  p(0, 0) = 2.0 * orbit.b();
  p.bottomRightCorner(ns - 1, ns - 1) =
      orbit.chart_hessian - orbit.b() * Mat::Identity(ns - 1, ns - 1);
  return p;
}

namespace {

struct BlockTridiagonal {
  std::vector<Mat> diag;  // m blocks
  std::vector<Mat> off;   // m - 1 blocks, (i, i+1)
};

BlockTridiagonal assemble_galerkin(const HomotheticOrbit& orbit, double t_phys, int m) {
  if (m < 1) throw ConfigError("mesh size must be positive");
  if (!(t_phys > 0.0)) throw ConfigError("final time must be positive");
  const int ns = orbit.n_star;
  const ReducedPath path = path_covering(orbit.radial, t_phys);
  const double tau_t = path.tau_of_t(t_phys);
  const Mat p0 = second_variation_potential(orbit);
  const Mat id = Mat::Identity(ns, ns);

  const int nodes = m + 2;
  std::vector<double> tau(nodes), t(nodes);
  for (int i = 0; i < nodes; ++i) {
    tau[i] = tau_t * i / (m + 1);
    t[i] = i == 0 ? 0.0 : (i == nodes - 1 ? t_phys : path.t(tau[i]));
  }

  // 4-point Gauss-Legendre on [-1, 1].
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                               0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                               0.6521451548625461, 0.3478548451374538};

  BlockTridiagonal out;
  out.diag.assign(m, Mat::Zero(ns, ns));
  out.off.assign(std::max(m - 1, 0), Mat::Zero(ns, ns));
  for (int e = 0; e + 1 < nodes; ++e) {
    const double h = t[e + 1] - t[e];
    if (!(h > 0.0)) throw IntegratorError("degenerate Galerkin element");
    double mll = 0.0, mlr = 0.0, mrr = 0.0;
    const double half = 0.5 * (tau[e + 1] - tau[e]);
    const double mid = 0.5 * (tau[e + 1] + tau[e]);
    for (int q = 0; q < 4; ++q) {
      const double tq = mid + half * gx[q];
      const Vec y = path.dense()(tq);
      const double r = std::exp(y(1));
      const double w = gw[q] * half * std::pow(r, -1.5);  // r^{-3} dt, dt = r^{3/2} dtau
      const double pl = (t[e + 1] - y(2)) / h;
      const double pr = (y(2) - t[e]) / h;
      mll += w * pl * pl;
      mlr += w * pl * pr;
      mrr += w * pr * pr;
    }
    const Mat kll = id / h + mll * p0;
    const Mat klr = -id / h + mlr * p0;
    const Mat krr = id / h + mrr * p0;
    // Interior node i (1..m) maps to block i-1.
    const int left = e - 1;
    const int right = e;
    if (left >= 0) out.diag[left] += kll;
    if (right < m) out.diag[right] += krr;
    if (left >= 0 && right < m) out.off[left] += klr;
  }
  return out;
}

}  // namespace

Mat galerkin_matrix(const HomotheticOrbit& orbit, double t_phys, int m) {
  const BlockTridiagonal bt = assemble_galerkin(orbit, t_phys, m);
  const int ns = orbit.n_star;
  Mat a = Mat::Zero(m * ns, m * ns);
  for (int i = 0; i < m; ++i) {
    a.block(i * ns, i * ns, ns, ns) = bt.diag[i];
    if (i + 1 < m) {
      a.block(i * ns, (i + 1) * ns, ns, ns) = bt.off[i];
      a.block((i + 1) * ns, i * ns, ns, ns) = bt.off[i].transpose();
    }
  }
  return a;
}

int galerkin_count(const HomotheticOrbit& orbit, double t_phys, int m) {
  const BlockTridiagonal bt = assemble_galerkin(orbit, t_phys, m);
  // Block LDL^T: the inertia is the sum of the inertias of the Schur
  // complements S_i = A_i - C_{i-1}^T S_{i-1}^{-1} C_{i-1}.
  int negatives = 0;
  Mat s = bt.diag[0];
  for (int i = 0; i < m; ++i) {
    if (i > 0) {
      const Mat& c = bt.off[i - 1];
      s = bt.diag[i] - c.transpose() * s.ldlt().solve(c);
    }
    s = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(s, Eigen::EigenvaluesOnly);
    for (int j = 0; j < eig.eigenvalues().size(); ++j) {
      negatives += eig.eigenvalues()(j) < 0.0 ? 1 : 0;
    }
  }
  return negatives;
}

int galerkin_morse_index(const HomotheticOrbit& orbit, double t_phys, int m) {
  const int coarse = galerkin_count(orbit, t_phys, m);
  const int fine = galerkin_count(orbit, t_phys, 2 * m);
  if (coarse != fine) {
    throw MeshTooCoarseError("Galerkin count changed from " + std::to_string(coarse) +
                                 " to " + std::to_string(fine) + " when refining",
                             coarse, fine);
  }
  return fine;
}

std::vector<IndexTheoremRow> index_theorem_check(const HomotheticOrbit& orbit,
                                                 const std::vector<double>& t_grid,
                                                 int m, const IndexOptions& opts) {
  if (t_grid.empty()) throw ConfigError("time grid is empty");
  const RadialData rd = maslov_radial_data(orbit, opts.b_scale);
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
  auto path = std::make_shared<ReducedPath>(path_covering(rd, t_max, opts.tol));

  std::vector<double> taus;
  for (double t : t_grid) taus.push_back(path->tau_of_t(t));
  std::vector<double> sorted = taus;
  std::sort(sorted.begin(), sorted.end());

  const auto coeff_v = full_coefficient_of_v(orbit, rd.b, opts.epsilon);
  const Coefficient cf = [path, coeff_v](double tau) { return coeff_v(path->v(tau)); };
  const auto dn = LagrangianFrame::dirichlet(orbit.n_star);
  const LagrangianPath pf = transport(cf, dn, 0.0, sorted.back(), opts.tol);
  const std::vector<int> mu_sorted = maslov_profile(pf, dn, sorted);

  std::vector<IndexTheoremRow> rows;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    IndexTheoremRow row;
    row.t_phys = t_grid[i];
    row.tau = taus[i];
    row.n_star = orbit.n_star;
    const auto pos = std::lower_bound(sorted.begin(), sorted.end(), taus[i]) - sorted.begin();
    row.maslov = mu_sorted[pos];
    row.galerkin = galerkin_morse_index(orbit, t_grid[i], m);
    row.pass = row.galerkin + row.n_star == row.maslov;
    rows.push_back(row);
  }
  return rows;
}

std::vector<int> t_side_maslov(const HomotheticOrbit& orbit,
                               const std::vector<double>& t_grid, double tol) {
  if (t_grid.empty()) return {};
  const int ns = orbit.n_star;
  const RadialData& rd = orbit.radial;
  const double b = rd.b;
  std::vector<double> sorted = t_grid;
  std::sort(sorted.begin(), sorted.end());
  const double t_max = sorted.back();
  if (t_max >= orbit_collision_time(rd, tol)) {
    throw ConfigError("t-side horizon is not below the collision time");
  }

  // Radial motion in physical time: r'' = -b / r^2.
  OdeRhs radial = [b](double, const Vec& y) {
    Vec dy(2);
    dy << y(1), -b / (y(0) * y(0));
    return dy;
  };
  Vec y0(2);
  y0 << rd.r0, rd.v0 / std::sqrt(rd.r0);
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol * 1e-2;
  auto rad = std::make_shared<DenseSolution>(integrate_dopri5(radial, 0.0, y0, t_max, o));

  // Hessian of H at r = 1 along the orbit, then scaled: with
  // D = diag(1, r^{-1} I, r^{-3/2}, r^{-1/2} I), D^2H(r) = D D^2H(1) D
  // (p2 = 0 and x = 0 kill every other r dependence).
  Mat h1;
  if (orbit.cc) {
    h1 = hamiltonian_hessian(0.0, Vec::Zero(ns - 1), 1.0, Vec::Zero(ns - 1),
                             orbit.cc->chart());
  } else {
    h1 = Mat::Zero(2 * ns, 2 * ns);
    h1(0, 0) = 1.0;
    h1.block(1, 1, ns - 1, ns - 1).setIdentity();
    h1(ns, ns) = -2.0 * b;
    h1.bottomRightCorner(ns - 1, ns - 1) = -orbit.chart_hessian;
  }
  const Coefficient coeff = [rad, h1, ns](double t) {
    const double r = (*rad)(t)(0);
    Vec d(2 * ns);
    d(0) = 1.0;
    d.segment(1, ns - 1).setConstant(1.0 / r);
    d(ns) = std::pow(r, -1.5);
    d.segment(ns + 1, ns - 1).setConstant(std::pow(r, -0.5));
    return Mat(d.asDiagonal() * h1 * d.asDiagonal());
  };
  const auto dn = LagrangianFrame::dirichlet(ns);
  const LagrangianPath p = transport(coeff, dn, 0.0, t_max, tol);
  const std::vector<int> mu_sorted = maslov_profile(p, dn, sorted);
  std::vector<int> out;
  for (double t : t_grid) {
    out.push_back(mu_sorted[std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin()]);
  }
  return out;
}

std::vector<int> epsilon_perturbed_index(const HomotheticOrbit& orbit, double epsilon,
                                         const std::vector<double>& horizons,
                                         double tol) {
  if (epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
  IndexOptions o;
  o.tol = tol;
  o.epsilon = epsilon;
  return geometrical_index(orbit, horizons, o).mu_total;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::MorseZero:
      return "MorseZero";
    case Verdict::MorseInfinite:
      return "MorseInfinite";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

double predicted_crossing_density(const HomotheticOrbit& orbit) {
  double d = 0.0;
  for (double lambda : orbit.spectrum) {
    const double k = orbit.b() / 8.0 + lambda;
    if (k < 0.0) d += std::sqrt(-k) / M_PI;
  }
  return d;
}

Verdict expected_verdict(const SpiralClass& c) {
  return c.tag == SpiralTag::Spiral ? Verdict::MorseInfinite : Verdict::MorseZero;
}

IndexReport theorem_a_verdict(const HomotheticOrbit& orbit,
                              const std::vector<double>& horizons,
                              const IndexOptions& opts) {
  check_horizons(horizons);
  if (horizons.size() < 4) throw ConfigError("need at least 4 horizons");
  IndexReport rep{orbit};
  rep.predicted_density = predicted_crossing_density(orbit);
  std::ostringstream diag;
  try {
    rep.index = geometrical_index(orbit, horizons, opts);
  } catch (const Error& e) {
    rep.diagnostics = e.what();
    return rep;
  }
  const auto& mu = rep.index.mu_total;
  const std::size_t n = mu.size();
  rep.fitted_slope = (mu[n - 1] - mu[n - 2]) / (horizons[n - 1] - horizons[n - 2]);
  const int ns = orbit.n_star;
  const bool tail_at_n = mu[n - 1] == ns && mu[n - 2] == ns && mu[n - 3] == ns;

  switch (orbit.classification.tag) {
    case SpiralTag::NonSpiralStrict:
      if (tail_at_n) {
        rep.verdict = Verdict::MorseZero;
      } else {
        diag << "index did not stabilize at n_star = " << ns;
      }
      break;
    case SpiralTag::NonSpiralBoundary: {
      // Squeeze: the shifted system is strictly non-spiral and bounds the
      // index from below; the unshifted profile bounds it from above.
      const double eps = std::max(1e-6, 10.0 * std::abs(orbit.classification.margin));
      IndexOptions shifted = opts;
      shifted.epsilon = eps;
      shifted.check_full = false;
      rep.mu_epsilon = geometrical_index(orbit, horizons, shifted).mu_total;
      const auto& me = rep.mu_epsilon;
      const bool low = me[n - 1] == ns && me[n - 2] == ns && me[n - 3] == ns;
      if (tail_at_n && low) {
        rep.verdict = Verdict::MorseZero;
      } else {
        diag << "boundary squeeze failed";
      }
      break;
    }
    case SpiralTag::Spiral: {
      bool increasing = mu[0] >= 1;
      for (std::size_t i = 1; i < n; ++i) increasing = increasing && mu[i] > mu[i - 1];
      const double rel =
          std::abs(rep.fitted_slope - rep.predicted_density) / rep.predicted_density;
      if (increasing && rel <= 0.1) {
        rep.verdict = Verdict::MorseInfinite;
      } else {
        diag << "spiral profile: increasing=" << increasing << " slope=" << rep.fitted_slope
             << " predicted=" << rep.predicted_density;
      }
      break;
    }
  }
  rep.diagnostics = diag.str();
  return rep;
}

}  // namespace hmorse
