#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "barriertop/lattice.hpp"
#include "barriertop/model.hpp"
#include "barriertop/scaled_operator.hpp"
#include "doctest.h"

using namespace bt;

namespace {

// exact eigenvalues of the discrete kinetic stencils on box sine modes
double fd4_symbol(double h, double dx, double kappa) {
  double phi = kappa * dx;
  return h * h * (30.0 - 32.0 * std::cos(phi) + 2.0 * std::cos(2.0 * phi)) /
         (12.0 * dx * dx);
}
double fd2_symbol(double h, double dx, double kappa) {
  double phi = kappa * dx;
  return h * h * (2.0 - 2.0 * std::cos(phi)) / (dx * dx);
}

Potential zero_potential() { return make_gaussian(0.0, 1.0); }

Potential harmonic_table() {
  std::vector<double> x, v;
  for (int i = 0; i <= 600; ++i) {
    double t = -8.5 + 17.0 * i / 600.0;
    x.push_back(t);
    v.push_back(t * t);
  }
  return make_table(x, v);
}

const ScaledOperator& harmonic_op() {
  static ScaledOperator op =
      assemble_selfadjoint(harmonic_table(), Grid1D(8.0, 1024), 0.1);
  return op;
}

struct HarmonicEig {
  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;
};
const HarmonicEig& harmonic_eig() {
  static HarmonicEig e = [] {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(harmonic_op().matrix.real());
    return HarmonicEig{es.eigenvalues(), es.eigenvectors()};
  }();
  return e;
}

const ScaledOperator& sech2_op() {
  static ScaledOperator op =
      assemble_scaled(make_sech2(), Grid1D(10.0, 819), 0.1, 0.3);
  return op;
}

const std::vector<ResonanceHit>& sech2_hits() {
  static std::vector<ResonanceHit> hits = [] {
    BarrierData b = barrier_data(make_sech2());
    return find_resonances(sech2_op(), pseudo_resonances(b, 0.1, 3.5));
  }();
  return hits;
}

}  // namespace

TEST_CASE("empty box modes land on the exact stencil symbols") {
  Grid1D grid(8.0, 256);
  double h = 0.1, dx = grid.dx();
  for (Disc disc : {Disc::fd4, Disc::fd2}) {
    ScaledOperator op = assemble_selfadjoint(zero_potential(), grid, h, disc);
    CHECK((op.matrix - op.matrix.transpose()).norm() == 0.0);
    CHECK(op.matrix.imag().norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix.real());
    int m = grid.N - 2;
    REQUIRE(es.eigenvalues().size() == m);
    for (int k = 1; k <= m; ++k) {
      double kappa = k * M_PI / (2.0 * grid.L);
      double sym = disc == Disc::fd4 ? fd4_symbol(h, dx, kappa) : fd2_symbol(h, dx, kappa);
      // the ghost closure keeps every sine mode exact, not just the low ones
      CHECK(std::abs(es.eigenvalues()[k - 1] - sym) < 1e-11);
    }
    for (int k = 1; k <= 8; ++k) {
      double kappa = k * M_PI / (2.0 * grid.L);
      double cont = h * h * kappa * kappa;
      double dispersion = std::pow(kappa * dx, disc == Disc::fd4 ? 4.0 : 2.0) /
                          (disc == Disc::fd4 ? 90.0 : 12.0);
      CHECK(std::abs(es.eigenvalues()[k - 1] - cont) < 2.0 * dispersion * cont + 1e-13);
    }
  }
}

TEST_CASE("periodic assembly matches the circulant wavenumbers") {
  Grid1D grid(6.0, 64);
  double h = 0.1;
  ScaledOperator op = assemble_selfadjoint(zero_potential(), grid, h, Disc::fourier);
  CHECK(op.band == -1);
  CHECK((op.matrix - op.matrix.transpose()).norm() == 0.0);
  double period = grid.N * grid.dx();
  std::vector<double> expect;
  for (int m = -grid.N / 2 + 1; m <= grid.N / 2; ++m) {
    double k = 2.0 * M_PI * m / period;
    expect.push_back(h * h * k * k);
  }
  std::sort(expect.begin(), expect.end());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix.real());
  for (int i = 0; i < grid.N; ++i)
    CHECK(std::abs(es.eigenvalues()[i] - expect[size_t(i)]) < 1e-10);

  ScaledOperator rot = assemble_scaled(zero_potential(), grid, h, 0.4, Scaling::uniform(),
                                       Disc::fourier);
  Eigen::VectorXcd ev = dense_eigenvalues(rot);
  std::vector<cplx> got(ev.data(), ev.data() + ev.size());
  std::sort(got.begin(), got.end(),
            [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  cplx phase = std::exp(cplx(0.0, -0.8));
  for (int i = 0; i < grid.N; ++i)
    CHECK(std::abs(got[size_t(i)] - phase * expect[size_t(i)]) < 1e-10);
}

TEST_CASE("harmonic well spectrum starts at the odd multiples of h") {
  const ScaledOperator& op = harmonic_op();
  CHECK((op.matrix - op.matrix.transpose()).norm() == 0.0);
  const Eigen::VectorXd& vals = harmonic_eig().vals;
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(vals[k] - 0.1 * (2 * k + 1)) < 1e-6);
}

TEST_CASE("resolution warning fires exactly when dx exceeds the de Broglie threshold") {
  Potential p = make_sech2();
  ScaledOperator coarse = assemble_selfadjoint(p, Grid1D(10.0, 101), 0.1);
  CHECK(coarse.warnings.size() == 1);
  ScaledOperator fine = assemble_selfadjoint(p, Grid1D(10.0, 1001), 0.1);
  CHECK(fine.warnings.empty());
}

TEST_CASE("theta zero reproduces the self-adjoint assembly bit for bit") {
  Potential p = make_sech2();
  Grid1D grid(10.0, 301);
  ScaledOperator base = assemble_selfadjoint(p, grid, 0.1);
  ScaledOperator u = assemble_scaled(p, grid, 0.1, 0.0);
  ScaledOperator e = assemble_scaled(p, grid, 0.1, 0.0, Scaling::exterior(4.0, 2.0));
  CHECK((u.matrix - base.matrix).norm() == 0.0);
  CHECK((e.matrix - base.matrix).norm() == 0.0);
}

TEST_CASE("uniform scaling rotates the empty box spectrum") {
  Grid1D grid(6.0, 130);
  double h = 0.1, theta = 0.4;
  ScaledOperator base = assemble_selfadjoint(zero_potential(), grid, h);
  ScaledOperator rot = assemble_scaled(zero_potential(), grid, h, theta);
  CHECK((rot.matrix - rot.matrix.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(base.matrix.real());
  Eigen::VectorXcd ev = dense_eigenvalues(rot);
  std::vector<cplx> got(ev.data(), ev.data() + ev.size());
  std::sort(got.begin(), got.end(),
            [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  cplx phase = std::exp(cplx(0.0, -2.0 * theta));
  for (long i = 0; i < ev.size(); ++i)
    CHECK(std::abs(got[size_t(i)] - phase * es.eigenvalues()[i]) < 1e-10);
}

TEST_CASE("exterior contour is the identity inside R0 and the full tilt outside") {
  Potential p = make_sech2();
  Grid1D grid(10.0, 401);
  double h = 0.1, theta = 0.35;
  ScaledOperator base = assemble_selfadjoint(p, grid, h);
  ScaledOperator uni = assemble_scaled(p, grid, h, theta);
  ScaledOperator ext = assemble_scaled(p, grid, h, theta, Scaling::exterior(3.0, 2.0));
  CHECK(ext.band == 2);

  // nodes well inside R0 carry untouched self-adjoint rows
  int m = grid.N - 2;
  auto node_index = [&](double x) { return int(std::lround((x + grid.L) / grid.dx())) - 1; };
  for (int i = node_index(-2.0); i <= node_index(2.0); ++i)
    CHECK((ext.matrix.row(i) - base.matrix.row(i)).norm() == 0.0);
  // nodes past the ramp match the uniform rows
  for (int i : {node_index(6.0), node_index(8.0), node_index(-7.0)})
    CHECK((ext.matrix.row(i) - uni.matrix.row(i)).norm() < 1e-13);

  // contour-weighted pairing symmetry
  Eigen::MatrixXcd wm = ext.weight.asDiagonal() * ext.matrix;
  CHECK((wm - wm.transpose()).norm() < 1e-8 * wm.norm());
  CHECK((wm - wm.transpose()).norm() < 1e-12 * wm.norm());
  (void)m;

  CHECK_THROWS_AS(assemble_scaled(p, grid, h, theta, Scaling::exterior(9.5, 1.0)), Error);
  CHECK_THROWS_AS(
      assemble_scaled(p, grid, h, theta, Scaling::exterior(3.0, 2.0), Disc::fourier),
      Error);
  CHECK_THROWS_AS(assemble_scaled(p, grid, h, 0.8), Error);  // sector is pi/4 - 0.01
  try {
    assemble_scaled(p, grid, h, 0.8);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SectorViolation);
  }
}

TEST_CASE("damping ladder of the quadratic model") {
  Potential p = make_quadratic(1.0, {2.0});
  Grid1D grid(5.0, 817);
  double h = 0.05;
  ScaledOperator op = assemble_scaled(p, grid, h, 0.3);
  BarrierData b = barrier_data(p);
  auto hits = find_resonances(op, pseudo_resonances(b, h, 5.5));
  REQUIRE(hits.size() == 3);
  for (int k = 0; k < 3; ++k) {
    cplx expect(1.0, -0.1 * (k + 0.5));
    CHECK(std::abs(hits[size_t(k)].z - expect) < 1e-4);
    CHECK(hits[size_t(k)].residual <= 1e-10);
    CHECK(hits[size_t(k)].z.imag() <= 0.0);
    CHECK(hits[size_t(k)].alpha == std::vector<int>{k});
  }
}

TEST_CASE("sech2 ground resonance agrees with the dense spectrum") {
  const auto& hits = sech2_hits();
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].match_distance <= 0.15);
  CHECK(hits[1].match_distance <= 0.35);  // drift grows with the level
  for (const auto& hit : hits) {
    CHECK(hit.residual <= 1e-10);
    CHECK(hit.z.imag() < 0.0);
  }
  Eigen::VectorXcd ev = dense_eigenvalues(sech2_op());
  for (const auto& hit : hits) {
    double best = 1e300;
    for (long i = 0; i < ev.size(); ++i) best = std::min(best, std::abs(ev[i] - hit.z));
    CHECK(best < 1e-8);
  }
}

TEST_CASE("shifts between lattice lines either stall or land far away") {
  PseudoResonance fake;
  fake.alpha = {0};
  fake.z = cplx(1.0, -0.22);
  try {
    auto hits = find_resonances(sech2_op(), {fake});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].match_distance > 0.5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
}

TEST_CASE("shifts below the rotated sector are rejected") {
  ScaledOperator shallow = assemble_scaled(make_sech2(), Grid1D(10.0, 301), 0.1, 0.05);
  PseudoResonance pr;
  pr.alpha = {0};
  pr.z = cplx(1.0, -0.3);
  CHECK_THROWS_AS(find_resonances(shallow, {pr}), Error);
  try {
    find_resonances(shallow, {pr});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SectorUncovered);
  }
}

TEST_CASE("scaling flavor does not move the resonance") {
  Potential p = make_sech2();
  double h = 0.1;
  // the ramp derivatives are steep; dx beyond this leaves visible truncation
  Grid1D grid(12.0, 2771);
  BarrierData b = barrier_data(p);
  auto shifts = pseudo_resonances(b, h, 1.5);
  REQUIRE(shifts.size() == 1);
  cplx zu = find_resonances(assemble_scaled(p, grid, h, 0.6), shifts)[0].z;
  cplx ze = find_resonances(
      assemble_scaled(p, grid, h, 0.6, Scaling::exterior(2.0, 1.0)), shifts)[0].z;
  cplx ze2 = find_resonances(
      assemble_scaled(p, grid, h, 0.65, Scaling::exterior(2.0, 1.0)), shifts)[0].z;
  CHECK(std::abs(zu - ze) < 1e-4);
  CHECK(std::abs(zu - ze2) < 1e-4);
  CHECK(std::abs(ze - ze2) < 1e-4);
}

TEST_CASE("resolvent norm inverts the distance to the spectrum") {
  const ScaledOperator& op = harmonic_op();
  const Eigen::VectorXd& vals = harmonic_eig().vals;
  for (double z : {-0.4, 0.17}) {
    double dist = 1e300;
    for (long i = 0; i < vals.size(); ++i) dist = std::min(dist, std::abs(vals[i] - z));
    double rn = resolvent_norm(op, cplx(z, 0.0));
    CHECK(std::abs(rn - 1.0 / dist) < 1e-8 * rn);
  }
  // sitting on an eigenvalue hits the near-singularity cap
  CHECK(resolvent_norm(op, cplx(vals[0], 0.0)) > 1e9);
}

TEST_CASE("riesz projector around a simple resonance") {
  const ScaledOperator& op = sech2_op();
  cplx z0 = sech2_hits()[0].z;
  RieszProjector small = riesz_projector(op, z0, 0.05, 16);
  RieszProjector big = riesz_projector(op, z0, 0.05, 32);
  CHECK(small.n_quad == 32);
  CHECK(big.n_quad == 64);
  CHECK((small.matrix - big.matrix).norm() < 1e-8);

  const Eigen::MatrixXcd& pi = big.matrix;
  CHECK((pi * pi - pi).norm() <= 1e-6 * pi.norm());
  CHECK(big.rank_gap <= 1e-6);
  CHECK(std::abs(pi.trace() - 1.0) < 1e-6);

  RieszProjector empty = riesz_projector(op, cplx(1.3, -0.05), 0.03, 16);
  CHECK(empty.matrix.norm() <= 1e-8);

  CHECK_THROWS_AS(riesz_projector(op, z0 + 0.01, 0.01, 32), Error);
  try {
    riesz_projector(op, z0 + 0.01, 0.01, 32);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ContourTooClose);
  }
  try {
    riesz_projector(op, z0 + 0.034, 0.04, 32);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::QuadratureDivergence);
  }
}

TEST_CASE("bump calculus honors plateau identities") {
  const ScaledOperator& op = harmonic_op();
  const Eigen::VectorXd& vals = harmonic_eig().vals;
  double lo = vals[0], hi = vals[vals.size() - 1];

  BumpSpec one{0.5 * (lo + hi), 0.5 * (hi - lo) + 1.0, 0.5 * (hi - lo) + 2.0};
  Eigen::MatrixXd mi = functional_calculus(op, one);
  CHECK((mi - Eigen::MatrixXd::Identity(op.dim(), op.dim())).norm() < 1e-12 * mi.norm());

  BumpSpec below{lo - 5.0, 1.0, 2.0};
  CHECK(functional_calculus(op, below).norm() < 1e-12);

  BumpSpec narrow{0.5, 0.1, 0.3};
  BumpSpec wide{0.5, 0.35, 0.6};  // plateau covers the narrow support
  Eigen::MatrixXd mn = functional_calculus(op, narrow);
  Eigen::MatrixXd mw = functional_calculus(op, wide);
  CHECK((mw * mn - mn).norm() < 1e-10 * mn.norm());

  // squaring through the interface matches the squared symbol
  const Eigen::MatrixXd& v = harmonic_eig().vecs;
  Eigen::VectorXd w2(vals.size());
  for (long i = 0; i < vals.size(); ++i) {
    double b = bump_eval(narrow, vals[i]);
    w2[i] = b * b;
  }
  Eigen::MatrixXd sq = v * w2.asDiagonal() * v.transpose();
  CHECK((mn * mn - sq).norm() < 1e-10);

  Eigen::MatrixXd a = op.matrix.real();
  CHECK((a * mn - mn * a).norm() < 1e-10 * a.norm());

  CHECK_THROWS_AS(functional_calculus(sech2_op(), narrow), Error);
  CHECK_THROWS_AS(functional_calculus(op, BumpSpec{0.5, 0.4, 0.3}), Error);
}
