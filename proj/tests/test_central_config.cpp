#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hmorse/central_config.hpp"
#include "hmorse/errors.hpp"
#include "oracles.hpp"

using namespace hmorse;

namespace {

Vec equilateral() {
  Vec q(6);
  q << 0.0, 0.0, 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0;
  return q;
}

Vec collinear_guess() {
  Vec q(6);
  q << -1.1, 0.02, 0.05, -0.01, 0.9, 0.0;
  return q;
}

}  // namespace

TEST_CASE("residual vanishes at known central configurations") {
  MassSystem two({1.0, 1.0}, 1);
  Vec q(2);
  q << std::sqrt(0.5), -std::sqrt(0.5);
  CHECK(cc_residual(two, q).norm() <= 1e-12);

  MassSystem three({1.0, 1.0, 1.0}, 2);
  const Vec s = normalize_configuration(three, equilateral());
  CHECK(cc_residual(three, s).norm() <= 1e-10);

  CHECK_THROWS_AS(cc_residual(three, 2.0 * s), NotNormalizedError);
}

TEST_CASE("residual is tangent to the ellipsoid") {
  MassSystem sys({1.0, 2.0, 3.0}, 2);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vec q(6);
    for (int i = 0; i < 6; ++i) q(i) = u(rng);
    if (Configuration(sys, q).min_pair_distance() < 0.2) continue;
    const Vec s = normalize_configuration(sys, q);
    const Vec res = cc_residual(sys, s);
    CHECK(res.norm() > 1e-6);
    CHECK(std::abs(res.dot(s)) <= 1e-10);
  }
}

TEST_CASE("Newton finds the equilateral triangle") {
  MassSystem three({1.0, 1.0, 1.0}, 2);
  Vec guess = equilateral();
  guess(4) += 0.03;
  guess(1) -= 0.02;
  const CentralConfiguration cc = find_cc(three, guess);
  CHECK(cc.residual_norm <= kTolCc);
  CHECK(moment_of_inertia(three, cc.shape) == doctest::Approx(1.0).epsilon(1e-12));

  // Side length of the normalized equilateral triangle: I = sum m_i |q_i|^2
  // with |q_i| = l/sqrt(3) gives l = 1, so U = 3 / l = 3.
  CHECK(cc.b_value == doctest::Approx(3.0).epsilon(1e-10));
  const Configuration c = cc.configuration();
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      CHECK((c.body(i) - c.body(j)).norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Newton finds the Euler collinear configuration") {
  MassSystem three({1.0, 1.0, 1.0}, 2);
  const CentralConfiguration cc = find_cc(three, collinear_guess());
  CHECK(cc.residual_norm <= kTolCc);
  const Configuration c = cc.configuration();
  // middle body stays in the middle and sits at the centre of mass
  CHECK(c.body(1).norm() <= 1e-9);
  CHECK(c.body(0)(0) < 0.0);
  CHECK(c.body(2)(0) > 0.0);
  // equal masses on a line: outer bodies at +-a with 2a^2 = 1
  CHECK(c.body(2).norm() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  CHECK(cc.b_value == doctest::Approx(2.5 * std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("exact central configuration is a fixed point") {
  MassSystem three({1.0, 1.0, 1.0}, 2);
  const CentralConfiguration first = find_cc(three, equilateral());
  const CentralConfiguration again = find_cc(three, first.shape);
  CHECK(again.iterations <= 1);
  CHECK((again.shape - first.shape).norm() <= 1e-10);
}

TEST_CASE("restricted spectrum") {
  SUBCASE("two bodies on a line have no shape directions") {
    MassSystem two({1.0, 1.0}, 1);
    Vec q(2);
    q << -0.5, 0.5;
    const CentralConfiguration cc = find_cc(two, q);
    CHECK(cc.spectrum.empty());
    CHECK(cc.classification.tag == SpiralTag::NonSpiralStrict);
  }
  SUBCASE("equilateral triangle") {
    MassSystem three({1.0, 1.0, 1.0}, 2);
    const CentralConfiguration cc = find_cc(three, equilateral());
    REQUIRE(cc.spectrum.size() == 3);
    CHECK(std::is_sorted(cc.spectrum.begin(), cc.spectrum.end()));
    CHECK(cc.spectrum.front() >= -1e-7);
    CHECK(std::abs(cc.spectrum.front()) <= 1e-7);
    const auto gen = restricted_spectrum_generalized(three, cc.shape);
    for (int i = 0; i < 3; ++i) CHECK(gen[i] == doctest::Approx(cc.spectrum[i]).epsilon(1e-8).scale(1.0));
    const auto fd = oracle::fd_restricted_spectrum(three.masses(), 2, cc.shape);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(fd[i] - cc.spectrum[i]) <= 1e-5);
  }
  SUBCASE("Euler collinear has a spiral direction") {
    MassSystem three({1.0, 1.0, 1.0}, 2);
    const CentralConfiguration cc = find_cc(three, collinear_guess());
    REQUIRE(cc.spectrum.size() == 3);
    const auto fd = oracle::fd_restricted_spectrum(three.masses(), 2, cc.shape);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(fd[i] - cc.spectrum[i]) <= 1e-4);
    CHECK(cc.spectrum.front() < -cc.b_value / 8.0);
    CHECK(cc.classification.tag == SpiralTag::Spiral);
    CHECK(std::abs(cc.spectrum[1]) <= 1e-7);
  }
  SUBCASE("non-central shapes are refused") {
    MassSystem three({1.0, 2.0, 3.0}, 2);
    Vec q = equilateral();
    q(4) += 0.3;
    const Vec s = normalize_configuration(three, q);
    CHECK_THROWS_AS(restricted_spectrum(three, s, EllipsoidChart(three, s)), NotCentralError);
  }
}

TEST_CASE("critical point in chart coordinates") {
  MassSystem sys({1.0, 2.0, 3.0}, 2);
  const CentralConfiguration cc = find_cc(sys, equilateral());
  CHECK(cc.chart().gradient(Vec::Zero(cc.chart().dim())).norm() <= kTolCc);
}

TEST_CASE("spectrum is invariant under a rotation of the tangent basis") {
  MassSystem sys({1.0, 2.0, 3.0}, 2);
  const CentralConfiguration cc = find_cc(sys, equilateral());
  const EllipsoidChart base = cc.chart();
  std::mt19937 rng(4);
  const Mat a = oracle::random_symmetric(rng, base.dim(), 1.0) + Mat::Identity(base.dim(), base.dim());
  const Mat q = Eigen::HouseholderQR<Mat>(a).householderQ();
  EllipsoidChart rotated(sys, cc.shape, Mat(base.tangent_basis() * q));
  const auto s1 = restricted_spectrum(sys, cc.shape, base);
  const auto s2 = restricted_spectrum(sys, cc.shape, rotated);
  REQUIRE(s1.size() == s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(std::abs(s1[i] - s2[i]) <= 1e-9);
}

TEST_CASE("relabeling equal masses") {
  MassSystem sys({1.0, 1.0, 2.0}, 2);
  const CentralConfiguration cc = find_cc(sys, equilateral());
  Vec swapped = cc.shape;
  swapped.segment(0, 2) = cc.shape.segment(2, 2);
  swapped.segment(2, 2) = cc.shape.segment(0, 2);
  const CentralConfiguration other = find_cc(sys, swapped);
  CHECK(other.b_value == doctest::Approx(cc.b_value).epsilon(1e-10));
  for (std::size_t i = 0; i < cc.spectrum.size(); ++i)
    CHECK(std::abs(other.spectrum[i] - cc.spectrum[i]) <= 1e-10);
}

TEST_CASE("classification thresholds") {
  CHECK(classify({0.0, 1.0}, 1.0).tag == SpiralTag::NonSpiralStrict);
  CHECK(classify({-0.2, 1.0}, 1.0).tag == SpiralTag::Spiral);
  CHECK(classify({-0.125, 1.0}, 1.0).tag == SpiralTag::NonSpiralBoundary);
  CHECK(classify({-0.125, 1.0}, 1.0).margin == doctest::Approx(0.0));
  CHECK(classify({}, 1.0).tag == SpiralTag::NonSpiralStrict);
  CHECK(std::isinf(classify({}, 1.0).margin));
  CHECK(spiral_tag_from_string(to_string(SpiralTag::NonSpiralBoundary)) == SpiralTag::NonSpiralBoundary);
}

TEST_CASE("sweeps") {
  const Family fam = family_preset("collinear3", 2);
  CHECK(spiral_sweep(fam.masses, fam.guess, {}).empty());

  const auto one = spiral_sweep(fam.masses, fam.guess, {1.0});
  REQUIRE(one.size() == 1);
  CHECK(one[0].converged);
  REQUIRE(one[0].cc.has_value());
  CHECK(one[0].lambda1 == doctest::Approx(one[0].cc->spectrum.front()));
  CHECK(one[0].bound == doctest::Approx(-one[0].cc->b_value / 8.0));
  CHECK(one[0].cc->classification.tag == SpiralTag::Spiral);

  const auto rows = spiral_sweep(fam.masses, fam.guess, {0.5, 1.0, 2.0});
  CHECK(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.converged);
}

TEST_CASE("presets converge") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const Preset p = preset(name);
    const CentralConfiguration cc = find_cc(p.system, p.guess);
    CHECK(cc.residual_norm <= kTolCc);
  }
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}
