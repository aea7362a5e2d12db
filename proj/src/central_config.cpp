#include "hmorse/central_config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hmorse/errors.hpp"

namespace hmorse {

std::string to_string(SpiralTag tag) {
  switch (tag) {
    case SpiralTag::Spiral:
      return "Spiral";
    case SpiralTag::NonSpiralBoundary:
      return "NonSpiralBoundary";
    case SpiralTag::NonSpiralStrict:
      return "NonSpiralStrict";
  }
  return "?";
}

SpiralTag spiral_tag_from_string(const std::string& s) {
  if (s == "Spiral") return SpiralTag::Spiral;
  if (s == "NonSpiralBoundary") return SpiralTag::NonSpiralBoundary;
  if (s == "NonSpiralStrict") return SpiralTag::NonSpiralStrict;
  throw ConfigError("unknown classification tag '" + s + "'");
}

Vec cc_residual(const MassSystem& sys, const Vec& s) {
  if (std::abs(moment_of_inertia(sys, s) - 1.0) > 1e-8) {
    throw NotNormalizedError("configuration is not normalized (I != 1)");
  }
  const double u = potential(sys, s);
  return grad_potential(sys, s) + u * (sys.metric_diagonal().array() * s.array()).matrix();
}

CentralConfiguration find_cc(const MassSystem& sys, const Vec& guess,
                             const CcOptions& opts) {
  if (!Configuration(sys, guess).collision_free()) {
    throw CollisionError("initial guess is at a collision");
  }
  Vec s = normalize_configuration(sys, guess);
  double rn = cc_residual(sys, s).norm();
  int it = 0;
  for (; it < opts.max_iter && rn > opts.tol; ++it) {
    const EllipsoidChart chart(sys, s, 0.9);
    const int k = chart.dim();
    const Vec zero = Vec::Zero(k);
    const Vec g = chart.gradient(zero);
    const Mat h = chart.hessian(zero);

    Eigen::SelfAdjointEigenSolver<Mat> eig(h);
    const Vec& ev = eig.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    Vec coeffs = eig.eigenvectors().transpose() * g;
    for (int i = 0; i < k; ++i) {
      coeffs(i) = std::abs(ev(i)) > opts.pinv_rtol * scale ? -coeffs(i) / ev(i) : 0.0;
    }
    Vec step = eig.eigenvectors() * coeffs;
    if (step.norm() > 0.5) step *= 0.5 / step.norm();

    // Backtrack on the residual norm; Newton steps are accepted at full
    // length near the solution.
    double alpha = 1.0;
    Vec next = s;
    double next_rn = rn;
    for (int ls = 0; ls < 30; ++ls) {
      try {
        Vec trial = normalize_configuration(sys, chart.inverse(alpha * step));
        if (!Configuration(sys, trial).collision_free()) {
          throw CollisionError("iterate reached a collision");
        }
        const double trial_rn = cc_residual(sys, trial).norm();
        if (trial_rn < rn || ls == 29) {
          next = trial;
          next_rn = trial_rn;
          break;
        }
      } catch (const CollisionError&) {
        if (ls == 29) throw;
      }
      alpha *= 0.5;
    }
    s = next;
    rn = next_rn;
  }
  if (rn > opts.tol) {
    throw NoConvergenceError("projected Newton did not converge in " +
                                 std::to_string(opts.max_iter) + " iterations",
                             rn);
  }

  CentralConfiguration cc{sys, s, 0.0, 0.0, {}, {SpiralTag::NonSpiralStrict, 0.0}, 0};
  cc.b_value = potential(sys, s);
  cc.residual_norm = rn;
  cc.iterations = it;
  cc.spectrum = restricted_spectrum(sys, s, EllipsoidChart(sys, s));
  cc.classification = classify(cc.spectrum, cc.b_value);
  return cc;
}

std::vector<double> restricted_spectrum(const MassSystem& sys, const Vec& shape,
                                        const EllipsoidChart& chart) {
  const double rn = cc_residual(sys, shape).norm();
  if (rn > kTolCc) {
    throw NotCentralError("restricted Hessian requested away from a central "
                          "configuration (residual " + std::to_string(rn) + ")");
  }
  if ((chart.base_point() - shape).norm() > 1e-12) {
    throw ChartDomainError("chart is not based at the configuration");
  }
  const int k = chart.dim();
  if (k == 0) return {};
  const Mat h = chart.hessian(Vec::Zero(k));
  Eigen::SelfAdjointEigenSolver<Mat> eig(h, Eigen::EigenvaluesOnly);
  std::vector<double> out(eig.eigenvalues().data(), eig.eigenvalues().data() + k);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> restricted_spectrum_generalized(const MassSystem& sys,
                                                    const Vec& shape) {
  const double rn = cc_residual(sys, shape).norm();
  if (rn > kTolCc) {
    throw NotCentralError("restricted Hessian requested away from a central "
                          "configuration");
  }
  const int k = sys.n_star() - 1;
  if (k == 0) return {};
  // Euclidean-orthonormal basis of {v in X : <M v, s0> = 0}.
  const Mat seed = sys.centered_seed_basis();
  Mat raw(shape.size(), seed.cols());
  for (int c = 0; c < seed.cols(); ++c) {
    Vec v = seed.col(c);
    raw.col(c) = v - sys.mass_inner(v, shape) * shape;
  }
  Eigen::ColPivHouseholderQR<Mat> qr(raw);
  const Mat q = qr.householderQ() * Mat::Identity(shape.size(), k);

  const auto metric = sys.metric_diagonal().asDiagonal();
  const double b = potential(sys, shape);
  Mat hess = hess_potential(sys, shape);
  hess.diagonal() += b * sys.metric_diagonal();
  const Mat a = q.transpose() * hess * q;
  const Mat m = q.transpose() * metric * q;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> eig(0.5 * (a + a.transpose()),
                                                    0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  std::vector<double> out(eig.eigenvalues().data(), eig.eigenvalues().data() + k);
  std::sort(out.begin(), out.end());
  return out;
}

SpiralClass classify(const std::vector<double>& spectrum, double b_value,
                     double tol_margin) {
  if (spectrum.empty()) {
    return {SpiralTag::NonSpiralStrict, std::numeric_limits<double>::infinity()};
  }
  const double lambda1 = *std::min_element(spectrum.begin(), spectrum.end());
  const double margin = lambda1 + b_value / 8.0;
  if (margin < -tol_margin) return {SpiralTag::Spiral, margin};
  if (margin > tol_margin) return {SpiralTag::NonSpiralStrict, margin};
  return {SpiralTag::NonSpiralBoundary, margin};
}

std::vector<SweepRow> spiral_sweep(const MassFamily& family, const GuessFamily& guess,
                                   const std::vector<double>& grid,
                                   const CcOptions& opts) {
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double p : grid) {
    SweepRow row;
    row.parameter = p;
    try {
      auto cc = find_cc(family(p), guess(p), opts);
      row.converged = true;
      row.lambda1 = cc.spectrum.empty() ? std::numeric_limits<double>::infinity()
                                        : cc.spectrum.front();
      row.bound = -cc.b_value / 8.0;
      row.cc = std::move(cc);
    } catch (const Error& e) {
      row.failure = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Vec embed(const std::vector<std::vector<double>>& pts, int dim) {
  Vec q = Vec::Zero(static_cast<Eigen::Index>(pts.size()) * dim);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int a = 0; a < dim && a < static_cast<int>(pts[i].size()); ++a) {
      q(static_cast<Eigen::Index>(i) * dim + a) = pts[i][a];
    }
  }
  return q;
}

}  // namespace

Family family_preset(const std::string& name, int dim) {
  if (name == "collinear3") {
    return {[dim](double p) { return MassSystem({1.0, p, 1.0}, dim); },
            [dim](double) { return embed({{-1.0}, {0.05}, {1.1}}, dim); }};
  }
  if (name == "triangle3") {
    if (dim < 2) throw ConfigError("triangle3 family needs dim >= 2");
    return {[dim](double p) { return MassSystem({1.0, 1.0, p}, dim); },
            [dim](double) {
              return embed({{0.0, 0.0}, {1.0, 0.02}, {0.5, 0.9}}, dim);
            }};
  }
  throw ConfigError("unknown family '" + name + "'");
}

Preset preset(const std::string& name) {
  if (name == "kepler1d") {
    return {MassSystem({1.0, 1.0}, 1), embed({{-0.5}, {0.5}}, 1)};
  }
  if (name == "lagrange_equal") {
    const double h = std::sqrt(3.0) / 2.0;
    return {MassSystem({1.0, 1.0, 1.0}, 2),
            embed({{0.0, 0.0}, {1.0, 0.01}, {0.5, h - 0.02}}, 2)};
  }
  if (name == "euler_collinear") {
    return {MassSystem({1.0, 1.0, 1.0}, 2),
            embed({{-1.0, 0.0}, {0.05, 0.0}, {1.1, 0.0}}, 2)};
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"kepler1d", "lagrange_equal", "euler_collinear"};
}

}  // namespace hmorse
