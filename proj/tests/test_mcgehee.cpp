#include <doctest.h>

#include <cmath>
#include <random>

#include "hmorse/errors.hpp"
#include "hmorse/mcgehee.hpp"
#include "hmorse/symplectic.hpp"
#include "oracles.hpp"

using namespace hmorse;

namespace {

CentralConfiguration kepler() {
  const Preset p = preset("kepler1d");
  return find_cc(p.system, p.guess);
}

CentralConfiguration euler() {
  const Preset p = preset("euler_collinear");
  return find_cc(p.system, p.guess);
}

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("orbit construction and energy relation") {
  const CentralConfiguration cc = kepler();
  const HomotheticOrbit apex = HomotheticOrbit::apex(cc, -1.0);
  CHECK(apex.radial.v0 == 0.0);
  CHECK(apex.radial.r0 == doctest::Approx(cc.b_value));
  CHECK(std::abs(apex.radial.energy_defect()) <= 1e-12);

  for (double h0 : {-1.0, 0.0, 1.0}) {
    const HomotheticOrbit o = HomotheticOrbit::standard(cc, h0);
    CHECK(o.radial.v0 <= 0.0);
    CHECK(std::abs(o.radial.energy_defect()) <= 1e-12);
  }
  CHECK_THROWS_AS(HomotheticOrbit::with_start(cc, 0.0, 1.0, -1.0), ConfigError);
  CHECK_THROWS_AS(HomotheticOrbit::with_start(cc, 0.0, 1.0, std::sqrt(2 * cc.b_value)), ConfigError);
  CHECK_THROWS_AS(HomotheticOrbit::from_radius(cc, -1.0, 2.0 * cc.b_value), ConfigError);
  CHECK_THROWS_AS(HomotheticOrbit::apex(cc, 1.0), ConfigError);
}

TEST_CASE("equilibrium of the radial flow") {
  const double b = 0.7;
  const double v = -std::sqrt(2 * b);
  CHECK(std::abs(0.5 * v * v - b) <= 1e-14);
  const ReducedPath path = reduced_flow(RadialData{b, 0.0, 1.0, v}, 5.0);
  CHECK(path.v(5.0) == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("apex start decreases v and r") {
  const HomotheticOrbit o = HomotheticOrbit::apex(kepler(), -1.0);
  const ReducedPath path = reduced_flow(o, 20.0);
  double pv = path.v(0.0), pr = path.r(0.0);
  for (int i = 1; i <= 200; ++i) {
    const double tau = 0.1 * i;
    CHECK(path.v(tau) < pv);
    CHECK(path.r(tau) < pr);
    pv = path.v(tau);
    pr = path.r(tau);
  }
}

TEST_CASE("radial velocity matches the closed form and its limit") {
  const CentralConfiguration cc = kepler();
  const double b = cc.b_value;
  for (double h0 : {-1.0, 0.0, 1.0}) {
    CAPTURE(h0);
    const HomotheticOrbit o = HomotheticOrbit::standard(cc, h0);
    const ReducedPath path = reduced_flow(o, 50.0);
    for (double tau : {0.5, 2.0, 7.0, 20.0})
      CHECK(std::abs(path.v(tau) - oracle::radial_v(b, o.radial.v0, tau)) <= 1e-8);
    CHECK(std::abs(path.v(50.0) + std::sqrt(2 * b)) <= 1e-6);
  }
}

TEST_CASE("energy relation holds along the flow") {
  const CentralConfiguration cc = euler();
  for (double tol : {1e-8, 1e-10}) {
    for (double h0 : {-1.0, 0.0, 1.0}) {
      CAPTURE(tol);
      CAPTURE(h0);
      const ReducedPath path = reduced_flow(HomotheticOrbit::standard(cc, h0), 30.0, tol);
      CHECK(path.max_energy_residual() <= 10 * tol);
      for (int i = 0; i <= 300; ++i) CHECK(std::abs(path.energy_residual(0.1 * i)) <= 10 * tol);
    }
  }
}

TEST_CASE("physical time") {
  const ReducedPath still = reduced_flow(RadialData{0.0, 0.0, 1.0, 0.0}, 2.0);
  CHECK(physical_time(still) == doctest::Approx(2.0).epsilon(1e-12));

  const HomotheticOrbit o = HomotheticOrbit::apex(kepler(), -1.0);
  double prev = 0.0, prev_inc = 0.0;
  for (double tau : {5.0, 10.0, 20.0, 40.0}) {
    const double t = physical_time(reduced_flow(o, tau));
    CHECK(t > prev);
    const double inc = t - prev;
    if (prev_inc > 0.0) CHECK(inc < 0.1 * prev_inc);
    prev_inc = inc;
    prev = t;
  }
  // free fall r'' = -b/r^2 from rest at r0: (pi/2) sqrt(r0^3 / (2 b))
  const double b = o.b();
  const double r0 = o.radial.r0;
  const double tplus = M_PI / 2.0 * std::sqrt(r0 * r0 * r0 / (2.0 * b));
  CHECK(collision_time(reduced_flow(o, 40.0)) == doctest::Approx(tplus).epsilon(1e-8));
}

TEST_CASE("tau_of_t inverts t") {
  const ReducedPath path = reduced_flow(HomotheticOrbit::standard(euler(), 0.0), 20.0);
  for (double tau : {0.3, 1.0, 2.0}) CHECK(path.tau_of_t(path.t(tau)) == doctest::Approx(tau).epsilon(1e-9));
  CHECK_THROWS(path.tau_of_t(2.0 * path.t(20.0)));
}

TEST_CASE("two-by-two blocks") {
  CHECK(block_B1(0.0, 1.0) == mat2(1, 0, 0, -2));
  CHECK(block_Blambda(0.0, 0.0) == mat2(1, 0, 0, 0));
  CHECK(block_Blambda(-2.0, 1.0) == mat2(1, -0.5, -0.5, -1));
  const Mat b1 = block_B1(-0.37, 2.1);
  CHECK(b1 == b1.transpose());
  CHECK(b1(0, 1) == doctest::Approx(0.75 * 0.37));
}

TEST_CASE("full coefficient at a homothetic state") {
  SUBCASE("two bodies in the plane") {
    MassSystem two({1.0, 1.0}, 2);
    Vec q(4);
    q << -0.5, 0.0, 0.5, 0.0;
    const CentralConfiguration cc = find_cc(two, q);
    const EllipsoidChart chart = cc.chart();
    REQUIRE(chart.dim() == 1);
    McGeheeState st;
    st.v = 0.0;
    st.u = Vec::Zero(1);
    st.x = Vec::Zero(1);
    st.r = 1.0;
    const Mat full = full_Bhat(st, chart);
    const Mat expect = symplectic_sum(block_B1(0.0, cc.b_value), block_Blambda(0.0, 0.0));
    CHECK((full - expect).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("Euler configuration splits into two-by-two blocks") {
    const CentralConfiguration cc = euler();
    const EllipsoidChart chart = cc.chart();
    const int k = chart.dim();
    const Mat h = chart.hessian(Vec::Zero(k));
    for (double v : {0.0, -1.3, -2.6}) {
      McGeheeState st;
      st.v = v;
      st.u = Vec::Zero(k);
      st.x = Vec::Zero(k);
      st.r = 0.4;
      const Mat full = full_Bhat(st, chart);
      CHECK((full - full.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK((full - homothetic_Bhat(v, cc.b_value, h)).cwiseAbs().maxCoeff() <= 1e-7);

      // diagonalizing the chart Hessian turns it into B1 (+) B_lambda_1 (+) ...
      Eigen::SelfAdjointEigenSolver<Mat> eig(h);
      Mat s = Mat::Zero(2 * (k + 1), 2 * (k + 1));
      s(0, 0) = 1.0;
      s(k + 1, k + 1) = 1.0;
      s.block(1, 1, k, k) = eig.eigenvectors();
      s.block(k + 2, k + 2, k, k) = eig.eigenvectors();
      Mat blocks = block_B1(v, cc.b_value);
      for (int i = 0; i < k; ++i) blocks = symplectic_sum(blocks, block_Blambda(v, cc.spectrum[i]));
      const Mat hb = homothetic_Bhat(v, cc.b_value, h);
      CHECK((s.transpose() * hb * s - blocks).cwiseAbs().maxCoeff() <= 1e-12 * hb.norm());
    }
  }
}

TEST_CASE("full coefficient agrees with the conjugation route") {
  const CentralConfiguration cc = euler();
  const EllipsoidChart chart = cc.chart();
  const int k = chart.dim();
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int trial = 0; trial < 10; ++trial) {
    McGeheeState st;
    st.v = -1.0 + u(rng);
    st.u = Vec(k);
    st.x = Vec(k);
    for (int i = 0; i < k; ++i) {
      st.u(i) = u(rng);
      st.x(i) = 0.5 * u(rng);
    }
    st.r = 0.3 + std::abs(u(rng));
    const Mat a = full_Bhat(st, chart);
    const Mat b = conjugated_coefficient(st, chart);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * a.norm());
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, a.norm()));
  }
}

TEST_CASE("scaling matrix is symplectic") {
  const Mat r = mcgehee_scaling(0.37, 4);
  CHECK(symplecticity_defect(r) <= 1e-14);
  CHECK(r(0, 0) == doctest::Approx(std::pow(0.37, 0.75)));
}

TEST_CASE("homothetic data is invariant for the full blow-up system") {
  const CentralConfiguration cc = euler();
  const EllipsoidChart chart = cc.chart();
  const int k = chart.dim();
  const ReducedPath path = reduced_flow(HomotheticOrbit::standard(cc, -1.0), 10.0);
  for (double tau : {0.0, 1.0, 5.0}) {
    const McGeheeState st = homothetic_state(path, cc.system.n_star(), tau);
    CHECK(st.u.size() == k);
    const McGeheeRates rates = mcgehee_rhs(st, chart);
    CHECK(rates.u.norm() <= 1e-9);
    CHECK(rates.x.norm() <= 1e-12);
    CHECK(rates.v == doctest::Approx(0.5 * st.v * st.v - cc.b_value).epsilon(1e-9));
    CHECK(rates.r == doctest::Approx(st.r * st.v).epsilon(1e-12));
  }
}
