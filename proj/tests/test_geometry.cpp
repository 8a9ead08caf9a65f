#include <cmath>

#include "barriertop/geometry.hpp"
#include "barriertop/model.hpp"
#include "barriertop/util.hpp"
#include "doctest.h"

using namespace bt;

TEST_CASE("eikonal phase of the sech2 barrier") {
  Potential p = make_sech2();
  // outgoing branch: xi = tanh x, phase = log cosh x
  CHECK(eikonal_slope(p, 1.0, +1) == doctest::Approx(std::tanh(1.0)).epsilon(1e-12));
  CHECK(eikonal_slope(p, -1.0, +1) == doctest::Approx(-std::tanh(1.0)).epsilon(1e-12));
  CHECK(eikonal_slope(p, 0.5, -1) == doctest::Approx(-std::tanh(0.5)).epsilon(1e-12));
  CHECK(eikonal_phase(p, 1.0, +1) == doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-10));
  CHECK(eikonal_phase(p, -2.0, +1) == doctest::Approx(std::log(std::cosh(2.0))).epsilon(1e-10));
  CHECK(eikonal_phase(p, 1.0, -1) == doctest::Approx(-std::log(std::cosh(1.0))).epsilon(1e-10));

  Eigen::VectorXd xs(5);
  xs << -2.0, -0.5, 0.1, 1.0, 3.0;
  Eigen::VectorXd ph = eikonal_phase_batch(p, xs, +1);
  for (int i = 0; i < 5; ++i)
    CHECK(ph(i) == doctest::Approx(std::log(std::cosh(xs(i)))).epsilon(1e-9));
}

TEST_CASE("hamiltonian flow conserves energy and tracks the closed form") {
  Potential p = make_sech2();
  Eigen::VectorXd s0(2);
  s0 << 0.5, 0.8;
  double H0 = 0.64 + eval_potential1(p, 0.5);
  Trajectory tr = flow(p, s0, 0.0, 2.0);
  REQUIRE(tr.t.size() > 4);
  CHECK(tr.t.front() == doctest::Approx(0.0));
  CHECK(tr.t.back() == doctest::Approx(2.0));
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    double H = tr.state[i](1) * tr.state[i](1) + eval_potential1(p, tr.state[i](0));
    CHECK(std::abs(H - H0) < 1e-9);
  }

  // on the outgoing branch sinh x(t) = sinh x(0) e^{2t}
  Eigen::VectorXd u0(2);
  u0 << 0.3, std::tanh(0.3);
  Trajectory out = flow(p, u0, 0.0, 1.0);
  double xe = std::asinh(std::sinh(0.3) * std::exp(2.0));
  CHECK(out.state.back()(0) == doctest::Approx(xe).epsilon(1e-9));
}

TEST_CASE("manifold trajectory stays on the graph branch") {
  Potential p = make_sech2();
  double x0 = std::asinh(0.5);
  Trajectory tr = manifold_trajectory(p, x0, -1, -1.0, 4.0);
  double sh0 = std::sinh(x0);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    double x = tr.state[i](0);
    CHECK(std::abs(std::sinh(x) - sh0 * std::exp(-2.0 * tr.t[i])) < 1e-8 * std::exp(-2.0 * tr.t[i]));
    CHECK(tr.state[i](1) == doctest::Approx(-std::tanh(x)).epsilon(1e-8));
  }
  CHECK_THROWS_AS(manifold_trajectory(p, x0, -1, 1.0, 4.0), Error);  // range must bracket 0

  // outgoing branch on the left: x < 0, xi = tanh x < 0 moving away
  Trajectory to = manifold_trajectory(p, -x0, +1, -4.0, 1.0);
  for (std::size_t i = 0; i < to.t.size(); ++i) {
    double x = to.state[i](0);
    CHECK(x < 0.0);
    CHECK(to.state[i](1) == doctest::Approx(std::tanh(x)).epsilon(1e-8));
  }
}

TEST_CASE("expansion fit recovers the closed-form coefficients") {
  // pinned incoming curve sinh x = (1/2) e^{-2t}; asinh series gives
  // x = (1/2) e^{-2t} - (1/48) e^{-6t} + (3/1280) e^{-10t} - ...
  Trajectory tr;
  for (int i = 0; i <= 1000; ++i) {
    double t = 0.01 * i;
    double x = std::asinh(0.5 * std::exp(-2.0 * t));
    Eigen::VectorXd s(2);
    s << x, -std::tanh(x);
    tr.t.push_back(t);
    tr.state.push_back(s);
  }
  Eigen::VectorXd lam(1);
  lam << 2.0;
  ExpansionFit fit = fit_expansion(tr, lam, 10.5);
  REQUIRE(fit.mu.size() == 5);  // levels 2, 4, 6, 8, 10
  for (int k = 0; k < 5; ++k) CHECK(fit.degree[k] == 0);
  CHECK(fit.coef[0][0](0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fit.coef[0][0](1) == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(std::abs(fit.coef[1][0](0)) < 1e-8);
  CHECK(fit.coef[2][0](0) == doctest::Approx(-1.0 / 48).epsilon(1e-6));
  CHECK(fit.coef[2][0](1) == doctest::Approx(1.0 / 16).epsilon(1e-6));
  CHECK(std::abs(fit.coef[3][0](0)) < 1e-5);
  CHECK(fit.coef[4][0](0) == doctest::Approx(3.0 / 1280).epsilon(1e-3));
  CHECK(fit.residual < 1e-8);
  CHECK(fit.samples > 100);
}

TEST_CASE("scattering geometry of sech2") {
  Potential p = make_sech2();
  // both connections carry action -log 2; the curve coefficient is +-1/2
  // with sign following the side, and the rate factor is lambda |g| = 1
  for (int sign : {-1, +1}) {
    for (int side : {-1, +1}) {
      ScatteringGeometry sg = scattering_geometry(p, sign, side);
      CHECK(sg.action == doctest::Approx(-std::log(2.0)).epsilon(1e-8));
      CHECK(sg.g == doctest::Approx(0.5 * side).epsilon(1e-7));
      CHECK(sg.det_factor == doctest::Approx(1.0).epsilon(1e-7));
      CHECK(sg.caustics == 0);
      CHECK(sg.speed == doctest::Approx(2.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("action agrees with its trajectory-integral form") {
  // int_0^inf (sqrt(E0-W) - sqrt(E0)) du equals int x dV(x(s)) along the
  // connection, i.e. int_0^inf u W'(u) / (2 sqrt(E0-W)) du, by parts
  // the integrand tends to -u near 0 but its quotient form is only evaluable
  // away from the apex; the piece dropped below 1e-4 is under 5e-9
  auto byparts = [](const Potential& p) {
    return integrate(
        [&](double u) {
          double W = eval_potential1(p, u);
          double dW = grad_potential(p, Eigen::VectorXd::Constant(1, u))(0);
          double rad = std::sqrt(std::max(p.height - W, 1e-300));
          return u * dW / (2.0 * rad);
        },
        1e-4, 40.0, 1e-11);
  };
  Potential s = make_sech2();
  CHECK(byparts(s) == doctest::Approx(-std::log(2.0)).epsilon(1e-7));
  CHECK(scattering_geometry(s, -1, +1).action == doctest::Approx(byparts(s)).epsilon(1e-6));
  Potential g = make_gaussian();
  CHECK(scattering_geometry(g, -1, +1).action == doctest::Approx(byparts(g)).epsilon(1e-6));
}

TEST_CASE("fit window guards") {
  Trajectory tiny;
  for (int i = 0; i < 6; ++i) {
    tiny.t.push_back(0.1 * i);
    Eigen::VectorXd s(2);
    s << 1e-4, 1e-4;
    tiny.state.push_back(s);
  }
  Eigen::VectorXd lam(1);
  lam << 2.0;
  CHECK_THROWS_AS(fit_expansion(tiny, lam, 10.5), Error);  // too few usable samples
}
