#include <doctest.h>

#include <cmath>

#include "hmorse/errors.hpp"
#include "hmorse/index_engine.hpp"
#include "oracles.hpp"

using namespace hmorse;

namespace {

const std::vector<double> kHorizons{5.0, 10.0, 20.0, 50.0};

CentralConfiguration cc_of(const std::string& name) {
  const Preset p = preset(name);
  return find_cc(p.system, p.guess);
}

// Conjugate points of xi'' = p r(t)^{-3} xi, xi(0) = 0, in (0, T], with the
// radial motion r'' = -b/r^2 integrated alongside by fixed-step RK4.
int jacobi_zero_count(double b, double r0, double rdot0, double p, double t_end, int steps) {
  const double h = t_end / steps;
  Eigen::Vector4d y(r0, rdot0, 0.0, 1.0);
  auto f = [&](const Eigen::Vector4d& s) {
    const double r3 = s(0) * s(0) * s(0);
    return Eigen::Vector4d(s(1), -b / (s(0) * s(0)), s(3), p / r3 * s(2));
  };
  int zeros = 0;
  double prev = 1.0;  // sign of xi just after t = 0
  for (int i = 0; i < steps; ++i) {
    const Eigen::Vector4d k1 = f(y);
    const Eigen::Vector4d k2 = f(y + h / 2 * k1);
    const Eigen::Vector4d k3 = f(y + h / 2 * k2);
    const Eigen::Vector4d k4 = f(y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (y(2) != 0.0 && (y(2) > 0.0) != (prev > 0.0)) ++zeros;
    if (y(2) != 0.0) prev = y(2);
  }
  return zeros;
}

}  // namespace

TEST_CASE("Kepler geometrical index") {
  const HomotheticOrbit o = HomotheticOrbit::apex(cc_of("kepler1d"), -1.0);
  const GeometricalIndex gi = geometrical_index(o, kHorizons);
  CHECK(gi.mu_total == std::vector<int>{1, 1, 1, 1});
  CHECK(gi.mu_b1 == std::vector<int>{1, 1, 1, 1});
  CHECK(gi.mu_per_lambda.empty());
  CHECK(gi.mu_full == gi.mu_total);
  CHECK_FALSE(gi.perturbed);
}

TEST_CASE("Lagrange geometrical index") {
  const HomotheticOrbit o = HomotheticOrbit::standard(cc_of("lagrange_equal"), -1.0);
  const GeometricalIndex gi = geometrical_index(o, kHorizons);
  REQUIRE(gi.mu_per_lambda.size() == 3);
  for (const auto& row : gi.mu_per_lambda) CHECK(row == std::vector<int>{1, 1, 1, 1});
  CHECK(gi.mu_total == std::vector<int>{4, 4, 4, 4});
  CHECK(gi.mu_full == gi.mu_total);
  CHECK(gi.max_energy_residual <= 1e-9);
}

TEST_CASE("scalar equations") {
  SUBCASE("radial block") {
    for (double h0 : {-1.0, 0.0, 1.0}) {
      const ScalarCrossing s = scalar_b1_ode(HomotheticOrbit::synthetic(1.0, {}, h0), 50.0);
      CHECK(s.zero_count_c == 1);
    }
  }
  SUBCASE("strict non-spiral with apex start") {
    const HomotheticOrbit o = HomotheticOrbit::synthetic(2.0, {0.1, 1.0}, -1.0);
    for (double lambda : o.spectrum) {
      const ScalarCrossing s = scalar_crossing_ode(o, lambda, 50.0);
      CHECK(s.zero_count_c == 1);
      CHECK(s.a_positive);
      CHECK(s.min_a > 0.0);
    }
  }
  SUBCASE("strict non-spiral with h0 >= 0") {
    for (double h0 : {0.0, 1.0}) {
      const HomotheticOrbit o = HomotheticOrbit::synthetic(2.0, {-0.2}, h0);
      CHECK(scalar_crossing_ode(o, -0.2, 50.0).zero_count_c == 1);
    }
  }
  SUBCASE("boundary coefficient gives c = tau") {
    const HomotheticOrbit o = HomotheticOrbit::synthetic(1.0, {-0.125}, 0.0);
    const ScalarCrossing s = scalar_crossing_ode(o, -0.125, 10.0);
    CHECK(s.zero_count_c == 1);
    for (std::size_t i = 0; i < s.taus.size(); ++i)
      CHECK(s.c_values[i] == doctest::Approx(s.taus[i]).epsilon(1e-9));
  }
  SUBCASE("spiral block against a brute-force count") {
    const HomotheticOrbit o = HomotheticOrbit::synthetic(1.0, {-0.5}, 0.0);
    for (double tau : {20.0, 40.0, 80.0}) {
      const ScalarCrossing s = scalar_crossing_ode(o, -0.5, tau);
      CHECK(s.zero_count_c == oracle::rk4_zero_count([](double) { return -0.375; }, 0.0, 1.0, tau, 100000));
      // zeros of sin(w tau) / w on [0, tau]
      const double w = std::sqrt(0.375);
      CHECK(s.zero_count_c == 1 + static_cast<int>(std::floor(tau * w / M_PI)));
    }
  }
}

TEST_CASE("block crossings equal scalar zeros along the orbit") {
  const HomotheticOrbit o = HomotheticOrbit::synthetic(1.0, {-0.5, 0.2}, -1.0);
  const GeometricalIndex gi = geometrical_index(o, {10.0, 30.0});
  for (std::size_t i = 0; i < o.spectrum.size(); ++i) {
    CHECK(gi.mu_per_lambda[i][0] == scalar_crossing_ode(o, o.spectrum[i], 10.0).zero_count_c);
    CHECK(gi.mu_per_lambda[i][1] == scalar_crossing_ode(o, o.spectrum[i], 30.0).zero_count_c);
  }
}

TEST_CASE("collision time") {
  // free fall from rest at r0: (pi/2) sqrt(r0^3 / (2 b))
  const HomotheticOrbit o = HomotheticOrbit::apex(cc_of("kepler1d"), -1.0);
  const double r0 = o.radial.r0;
  CHECK(orbit_collision_time(o.radial) ==
        doctest::Approx(M_PI / 2 * std::sqrt(r0 * r0 * r0 / (2 * o.b()))).epsilon(1e-8));
  CHECK_THROWS_AS(path_covering(o.radial, 2.0 * orbit_collision_time(o.radial)), ConfigError);
}

TEST_CASE("Galerkin index") {
  const HomotheticOrbit kepler = HomotheticOrbit::apex(cc_of("kepler1d"), -1.0);
  const double tk = orbit_collision_time(kepler.radial);
  for (int m : {64, 128, 256}) CHECK(galerkin_count(kepler, 0.9 * tk, m) == 0);
  CHECK(galerkin_count(kepler, 1e-3 * tk, 16) == 0);

  const HomotheticOrbit euler = HomotheticOrbit::apex(cc_of("euler_collinear"), -1.0);
  const double te = orbit_collision_time(euler.radial);
  const Mat p0 = second_variation_potential(euler);
  CHECK((p0 - p0.transpose()).norm() <= 1e-12);
  const Eigen::VectorXd pe = Eigen::SelfAdjointEigenSolver<Mat>(p0).eigenvalues();
  const double rdot0 = euler.radial.v0 / std::sqrt(euler.radial.r0);

  int prev = 0;
  for (double frac : {0.5, 0.9, 0.99, 0.999, 0.9999}) {
    CAPTURE(frac);
    const double t = frac * te;
    const int g = galerkin_morse_index(euler, t, 64);
    CHECK(g >= prev);
    prev = g;

    // dense eigen-solve of the same matrix
    const Mat a = galerkin_matrix(euler, t, 64);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues();
    CHECK((ev.array() < 0.0).count() == galerkin_count(euler, t, 64));

    // Sturm oracle: one conjugate point per zero of each decoupled Jacobi field
    int sturm = 0;
    for (int i = 0; i < pe.size(); ++i)
      sturm += jacobi_zero_count(euler.b(), euler.radial.r0, rdot0, pe(i), t, 400000);
    CHECK(g == sturm);
  }

  int prev_m = 0;
  for (int m : {16, 32, 64, 128}) {
    const int g = galerkin_count(euler, 0.999 * te, m);
    CHECK(g >= prev_m);
    prev_m = g;
  }
}

TEST_CASE("index theorem rows") {
  const HomotheticOrbit kepler = HomotheticOrbit::apex(cc_of("kepler1d"), -1.0);
  const double tk = orbit_collision_time(kepler.radial);
  for (const auto& row : index_theorem_check(kepler, {0.3 * tk, 0.6 * tk, 0.9 * tk}, 64)) {
    CHECK(row.galerkin == 0);
    CHECK(row.maslov == 1);
    CHECK(row.n_star == 1);
    CHECK(row.pass);
  }
}

TEST_CASE("time-side Maslov index agrees with the blow-up side") {
  const HomotheticOrbit o = HomotheticOrbit::standard(cc_of("lagrange_equal"), -1.0);
  const double tp = orbit_collision_time(o.radial);
  const std::vector<double> grid{0.3 * tp, 0.6 * tp, 0.9 * tp};
  const auto rows = index_theorem_check(o, grid, 64);
  const auto tside = t_side_maslov(o, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(tside[i] == rows[i].maslov);
    CHECK(rows[i].pass);
  }
}

TEST_CASE("epsilon shift") {
  const HomotheticOrbit o = HomotheticOrbit::standard(cc_of("lagrange_equal"), -1.0);
  const auto mu0 = geometrical_index(o, kHorizons).mu_total;
  CHECK(epsilon_perturbed_index(o, 0.0, kHorizons) == mu0);
  std::vector<int> prev = mu0;
  for (double eps : {1e-3, 1e-2, 1e-1}) {
    const auto mu = epsilon_perturbed_index(o, eps, kHorizons);
    for (std::size_t i = 0; i < mu.size(); ++i) CHECK(mu[i] <= prev[i]);
    prev = mu;
  }
  const double half = o.classification.margin / 2.0;
  CHECK(epsilon_perturbed_index(o, half, kHorizons).back() == o.n_star);
}

TEST_CASE("verdicts") {
  CHECK(expected_verdict({SpiralTag::Spiral, -1.0}) == Verdict::MorseInfinite);
  CHECK(expected_verdict({SpiralTag::NonSpiralBoundary, 0.0}) == Verdict::MorseZero);
  CHECK(expected_verdict({SpiralTag::NonSpiralStrict, 1.0}) == Verdict::MorseZero);
  CHECK(to_string(Verdict::MorseZero) == "MorseZero");

  const HomotheticOrbit kepler = HomotheticOrbit::apex(cc_of("kepler1d"), -1.0);
  CHECK(theorem_a_verdict(kepler, kHorizons).verdict == Verdict::MorseZero);
  CHECK_THROWS_AS(theorem_a_verdict(kepler, {5.0, 10.0, 20.0}), ConfigError);

  const HomotheticOrbit spiral = HomotheticOrbit::synthetic(1.0, {-0.5}, 0.0);
  const IndexReport rep = theorem_a_verdict(spiral, {20.0, 40.0, 80.0, 160.0});
  CHECK(rep.verdict == Verdict::MorseInfinite);
  CHECK(rep.predicted_density == doctest::Approx(std::sqrt(0.375) / M_PI));

  const HomotheticOrbit boundary = HomotheticOrbit::synthetic(1.0, {-0.125, 0.5}, 0.0);
  const IndexReport b = theorem_a_verdict(boundary, kHorizons);
  CHECK(b.verdict == Verdict::MorseZero);
  CHECK_FALSE(b.mu_epsilon.empty());
}
