#include <cmath>
#include <complex>

#include "barriertop/model.hpp"
#include "barriertop/util.hpp"
#include "doctest.h"

using namespace bt;

TEST_CASE("sech2 evaluation matches the closed form") {
  Potential p = make_sech2();
  // frozen: sech(1)^2
  CHECK(eval_potential1(p, 1.0) == doctest::Approx(0.4199743416140260693945).epsilon(1e-15));
  CHECK(eval_potential1(p, 0.0) == doctest::Approx(1.0));
  Potential q = make_sech2(2.0, 3.0);
  CHECK(eval_potential1(q, 1.5) == doctest::Approx(2.0 / std::pow(std::cosh(0.5), 2)).epsilon(1e-15));

  // derivative closed forms against central differences of the evaluator
  Eigen::VectorXd x(1);
  x << 0.7;
  double d = 1e-5;
  Eigen::VectorXd xp = x, xm = x;
  xp(0) += d;
  xm(0) -= d;
  double fd = (eval_potential(p, xp) - eval_potential(p, xm)) / (2 * d);
  CHECK(grad_potential(p, x)(0) == doctest::Approx(fd).epsilon(1e-8));
  double fd2 = (eval_potential(p, xp) - 2 * eval_potential(p, x) + eval_potential(p, xm)) / (d * d);
  CHECK(hess_potential(p, x)(0, 0) == doctest::Approx(fd2).epsilon(1e-5));
}

TEST_CASE("complex evaluation honors the sector and pole guards") {
  Potential p = make_sech2();
  cplx z(1.0, 0.3);  // arg ~ 0.29 < pi/4 - 0.01
  cplx v = eval_potential1(p, z);
  cplx ch = std::cosh(z);
  CHECK(std::abs(v - 1.0 / (ch * ch)) < 1e-14);

  CHECK_THROWS_AS(eval_potential1(p, cplx(1.0, 1.1)), Error);          // outside the sector
  CHECK_THROWS_AS(eval_potential1(p, cplx(0.0, M_PI / 2)), Error);     // cosh zero
  try {
    eval_potential1(p, cplx(1.0, 1.1));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SectorViolation);
  }

  Potential g = make_gaussian();
  cplx zg(0.3, 2.0);  // gaussian sector is the open right/left half plane
  CHECK(std::abs(eval_potential1(g, zg) - std::exp(-zg * zg)) < 1e-12);
}

TEST_CASE("barrier data for the built-in families") {
  BarrierData b = barrier_data(make_sech2());
  CHECK(b.energy == doctest::Approx(1.0));
  CHECK(b.apex(0) == doctest::Approx(0.0));
  CHECK(b.lambda(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.axes(0, 0) == doctest::Approx(1.0));

  // frozen: a = (1,2), E0 = 1 has rates (2, 2*sqrt(2)) on the coordinate axes
  BarrierData ba = barrier_data(make_anisotropic_gaussian(1.0, {1.0, 2.0}));
  CHECK(ba.lambda(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ba.lambda(1) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK((ba.axes - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);

  // swapped coefficients must come back in the same ascending rate order,
  // with the axes permuted to match
  BarrierData bs = barrier_data(make_anisotropic_gaussian(1.0, {2.0, 1.0}));
  CHECK(bs.lambda(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(bs.lambda(1) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(bs.axes(1, 0) == doctest::Approx(1.0));
  CHECK(bs.axes(0, 1) == doctest::Approx(1.0));

  BarrierData bq = barrier_data(make_quadratic(1.0, {1.0, 2.0}));
  CHECK(bq.lambda(0) == doctest::Approx(1.0));
  CHECK(bq.lambda(1) == doctest::Approx(2.0));
}

TEST_CASE("tabulated potentials reproduce their source") {
  std::vector<double> xs, vs;
  for (int i = 0; i <= 2000; ++i) {
    double x = -10.0 + 0.01 * i;
    xs.push_back(x);
    vs.push_back(1.0 / std::pow(std::cosh(x), 2));
  }
  Potential t = make_table(xs, vs);
  CHECK(eval_potential1(t, 0.37) == doctest::Approx(1.0 / std::pow(std::cosh(0.37), 2)).epsilon(1e-8));
  CHECK(eval_potential1(t, 30.0) == doctest::Approx(0.0));  // beyond the table: decayed

  BarrierData b = barrier_data(t);
  CHECK(b.energy == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(b.apex(0)) < 1e-6);
  CHECK(b.lambda(0) == doctest::Approx(2.0).epsilon(1e-3));

  // flat-top table has a degenerate maximum
  std::vector<double> fx, fv;
  for (int i = 0; i <= 400; ++i) {
    double x = -2.0 + 0.01 * i;
    fx.push_back(x);
    fv.push_back(1.0 - std::pow(x, 4));
  }
  CHECK_THROWS_AS(barrier_data(make_table(fx, fv)), Error);
}

TEST_CASE("hamiltonian field and jacobian") {
  Potential p = make_sech2();
  Eigen::VectorXd s(2);
  s << 0.3, -0.2;
  Eigen::VectorXd f = hamiltonian_field(p, s);
  CHECK(f(0) == doctest::Approx(-0.4));
  double sech2 = 1.0 / std::pow(std::cosh(0.3), 2);
  CHECK(f(1) == doctest::Approx(2.0 * sech2 * std::tanh(0.3)).epsilon(1e-14));

  Eigen::MatrixXd J = hamiltonian_jacobian(p, s);
  CHECK(J(0, 1) == doctest::Approx(2.0));
  CHECK(J(0, 0) == doctest::Approx(0.0));
  CHECK(J(1, 0) == doctest::Approx(-hess_potential(p, s.head(1))(0, 0)).epsilon(1e-14));
}

TEST_CASE("taylor data in principal coordinates") {
  Potential p = make_sech2();
  // sech^2 x = 1 - x^2 + (2/3) x^4 - (17/45) x^6 + ...
  CHECK(taylor_coefficient(p, {2}) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(taylor_coefficient(p, {3}) == doctest::Approx(0.0));
  CHECK(taylor_coefficient(p, {4}) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(taylor_coefficient(p, {6}) == doctest::Approx(-17.0 / 45.0).epsilon(1e-12));

  auto fields = taylor_field(p, 3);
  REQUIRE(fields.size() == 2);
  CHECK(fields[0].degree == 2);
  CHECK(fields[1].degree == 3);
  // even potential: the quadratic-correction field vanishes
  CHECK(fields[0].comp[1].empty());
  // G_3 momentum component is -(d/dx)(T_4 V) = -(8/3) x^3
  REQUIRE(fields[1].comp[1].size() == 1);
  CHECK(fields[1].comp[1][0].coef == doctest::Approx(-8.0 / 3.0).epsilon(1e-13));
  CHECK(fields[1].comp[1][0].beta == std::vector<int>{3});
  CHECK(fields[1].comp[0].empty());  // position components carry no correction

  // anisotropic gaussian, mixed index: V = exp(-x^2 - 2y^2),
  // coefficient of x^2 y^2 is d^4/(2!2!) = (coeff of x^2)(coeff of y^2) product rule
  Potential a = make_anisotropic_gaussian(1.0, {1.0, 2.0});
  CHECK(taylor_coefficient(a, {2, 2}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(taylor_coefficient(a, {0, 4}) == doctest::Approx(2.0).epsilon(1e-12));

  // quadratic model with a cubic bump reports the bump coefficient itself
  Potential q = make_quadratic(1.0, {1.0, 2.0}, {Monomial{0.1, {2, 1}}});
  CHECK(taylor_coefficient(q, {2, 1}) == doctest::Approx(0.1));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(make_quadratic(1.0, {1.0}, {Monomial{0.1, {2}}}), Error);  // degree < 3
  CHECK_THROWS_AS(make_quadratic(1.0, {1.0}, {Monomial{0.1, {1, 2}}}), Error);  // dim mismatch
  CHECK_THROWS_AS(make_table({0.0, 1.0, 0.5}, {1.0, 2.0, 3.0}), Error);  // not increasing
  CHECK_THROWS_AS(make_table({0.0, 1.0}, {1.0, 2.0}), Error);            // too short
}
