#include "barriertop/scaled_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "barriertop/util.hpp"
#include "lapack.hpp"

namespace bt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// C^inf ramp m(s) with m' and m''; same a/(a+b) profile as smoothstep
struct Ramp {
  double m = 0.0, mp = 0.0, mpp = 0.0;
};

Ramp ramp_eval(double s) {
  Ramp r;
  if (s <= 0.0) return r;
  if (s >= 1.0) {
    r.m = 1.0;
    return r;
  }
  r.m = smoothstep(s);
  double q = 1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s));
  double qp = -2.0 / (s * s * s) + 2.0 / ((1.0 - s) * (1.0 - s) * (1.0 - s));
  double g = r.m * (1.0 - r.m);
  r.mp = q * g;
  r.mpp = qp * g + q * q * g * (1.0 - 2.0 * r.m);
  return r;
}

// contour point gamma(x) = x + (e^{i theta} - 1) F(x) with F = x ramp((|x|-R0)/width)
struct ContourPoint {
  cplx g, gp, gpp;
};

ContourPoint contour_point(double x, double theta, const Scaling& sc) {
  ContourPoint c;
  cplx mu = std::exp(cplx(0.0, theta)) - 1.0;
  if (sc.kind == Scaling::Kind::uniform) {
    c.g = x + mu * x;
    c.gp = 1.0 + mu;
    c.gpp = 0.0;
    return c;
  }
  double ax = std::abs(x), sgn = x < 0.0 ? -1.0 : 1.0;
  Ramp r = ramp_eval((ax - sc.R0) / sc.width);
  double F = x * r.m;
  double Fp = r.m + ax * r.mp / sc.width;
  double Fpp = sgn * (2.0 * r.mp / sc.width + ax * r.mpp / (sc.width * sc.width));
  c.g = x + mu * F;
  c.gp = 1.0 + mu * Fp;
  c.gpp = mu * Fpp;
  return c;
}

// second and first derivative stencils on the interior nodes with Dirichlet
// walls; the fourth-order rows next to a wall close with the antisymmetric
// ghost u_{-1} = -u_1, which is exact on the sine modes of the box
void kinetic_rows(Disc disc, int m, double dx, Eigen::MatrixXd& d2, Eigen::MatrixXd& d1) {
  d2 = Eigen::MatrixXd::Zero(m, m);
  d1 = Eigen::MatrixXd::Zero(m, m);
  if (disc == Disc::fd2) {
    double w2 = 1.0 / (dx * dx), w1 = 1.0 / (2.0 * dx);
    for (int i = 0; i < m; ++i) {
      d2(i, i) = -2.0 * w2;
      if (i > 0) {
        d2(i, i - 1) = w2;
        d1(i, i - 1) = -w1;
      }
      if (i < m - 1) {
        d2(i, i + 1) = w2;
        d1(i, i + 1) = w1;
      }
    }
    return;
  }
  double w2 = 1.0 / (12.0 * dx * dx), w1 = 1.0 / (12.0 * dx);
  static const double c2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
  static const double c1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
  for (int i = 0; i < m; ++i)
    for (int k = -2; k <= 2; ++k) {
      int j = i + k;
      double a2 = c2[k + 2], a1 = c1[k + 2];
      if (j == -2) {
        // ghost beyond the left wall folds onto node 0 with flipped sign
        d2(i, 0) -= a2 * w2;
        d1(i, 0) -= a1 * w1;
      } else if (j == m + 1) {
        d2(i, m - 1) -= a2 * w2;
        d1(i, m - 1) -= a1 * w1;
      } else if (j >= 0 && j < m) {
        d2(i, j) += a2 * w2;
        d1(i, j) += a1 * w1;
      }
      // j == -1 or m is the wall node itself, weight zero under Dirichlet
    }
}

// exact circulant second derivative for the periodic grid, period N dx
Eigen::MatrixXd fourier_d2(int n, double dx) {
  double period = n * dx;
  std::vector<double> c(n, 0.0);
  for (int d = 0; d < n; ++d) {
    double s = 0.0;
    for (int m = 1; m <= (n - 1) / 2; ++m) {
      double k = 2.0 * kPi * m / period;
      s += 2.0 * k * k * std::cos(2.0 * kPi * m * d / double(n));
    }
    if (n % 2 == 0) {
      double k = kPi * n / period;
      s += k * k * std::cos(kPi * d);
    }
    c[d] = -s / double(n);
  }
  Eigen::MatrixXd m2(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m2(i, j) = c[std::abs(i - j)];
  return m2;
}

std::string fmt_cplx(cplx z) {
  std::ostringstream os;
  os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
  return os.str();
}

// shared solve handle so shift-invert and resolvent scans use the banded
// factorization whenever the rows are local
struct Factor {
  std::unique_ptr<lapack::BandedLu> banded;
  std::unique_ptr<lapack::Lu> dense;
  Factor(const Eigen::MatrixXcd& a, int band) {
    if (band >= 0)
      banded = std::make_unique<lapack::BandedLu>(a, band);
    else
      dense = std::make_unique<lapack::Lu>(a);
  }
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b, bool adjoint = false) const {
    return banded ? banded->solve(b, adjoint) : dense->solve(b, adjoint);
  }
  Eigen::MatrixXcd solve_mat(const Eigen::MatrixXcd& b, bool adjoint = false) const {
    return banded ? banded->solve_mat(b, adjoint) : dense->solve_mat(b, adjoint);
  }
};

Eigen::VectorXcd random_unit(long n, uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXcd v(n);
  for (long i = 0; i < n; ++i) v[i] = cplx(rng.uniform(), rng.uniform());
  v /= v.norm();
  return v;
}

}  // namespace

Grid1D::Grid1D(double half_length, int points) : L(half_length), N(points) {
  if (!(L > 0.0) || N < 16)
    throw Error(ErrorCode::ConfigError, "grid needs L > 0 and at least 16 points");
}

double bump_eval(const BumpSpec& psi, double e) {
  double d = std::abs(e - psi.center);
  if (d <= psi.plateau) return 1.0;
  if (d >= psi.support) return 0.0;
  return smoothstep((psi.support - d) / (psi.support - psi.plateau));
}

Grid1D suggest_grid(const Potential& p, double h) {
  BarrierData b = barrier_data(p);
  double L = (p.decays() ? 10.0 : 5.0) * std::max(1.0, 1.0 / std::sqrt(b.lambda[0]));
  double dx = 0.98 * h / (4.0 * std::sqrt(std::max(p.height, 1e-12)));
  int n = int(std::ceil(2.0 * L / dx)) + 1;
  if (n % 2 == 0) ++n;
  return Grid1D(L, std::max(n, 17));
}

ScaledOperator assemble_selfadjoint(const Potential& p, const Grid1D& grid, double h,
                                    Disc disc) {
  if (p.dim != 1)
    throw Error(ErrorCode::DimensionUnsupported, "grid operators are 1-d");
  if (!(h > 0.0)) throw Error(ErrorCode::ConfigError, "h must be positive");
  ScaledOperator op;
  op.grid = grid;
  op.h = h;
  op.theta = 0.0;
  op.disc = disc;
  double dx = grid.dx();
  if (disc == Disc::fourier) {
    int n = grid.N;
    Eigen::MatrixXd m = -h * h * fourier_d2(n, dx);
    for (int i = 0; i < n; ++i) m(i, i) += eval_potential1(p, grid.node(i));
    op.matrix = m.cast<cplx>();
    op.band = -1;
    op.weight = Eigen::VectorXcd::Constant(n, cplx(dx, 0.0));
  } else {
    int m = grid.N - 2;
    Eigen::MatrixXd d2, d1;
    kinetic_rows(disc, m, dx, d2, d1);
    Eigen::MatrixXd a = -h * h * d2;
    for (int i = 0; i < m; ++i) a(i, i) += eval_potential1(p, grid.node(i + 1));
    op.matrix = a.cast<cplx>();
    op.band = disc == Disc::fd2 ? 1 : 2;
    op.weight = Eigen::VectorXcd::Constant(m, cplx(dx, 0.0));
  }
  double thresh = h / (4.0 * std::sqrt(std::max(p.height, 1e-12)));
  if (dx > thresh) {
    std::ostringstream os;
    os << "resolution: dx=" << dx << " above the de Broglie threshold " << thresh;
    op.warnings.push_back(os.str());
  }
  return op;
}

ScaledOperator assemble_scaled(const Potential& p, const Grid1D& grid, double h,
                               double theta, Scaling scaling, Disc disc) {
  if (theta < 0.0) throw Error(ErrorCode::ConfigError, "theta must be nonnegative");
  if (theta == 0.0) {
    // identity distortion, reuse the self-adjoint assembly bit for bit
    ScaledOperator op = assemble_selfadjoint(p, grid, h, disc);
    op.scaling = scaling;
    return op;
  }
  if (theta >= p.sector_half_angle())
    throw Error(ErrorCode::SectorViolation, "theta outside the analyticity sector");
  if (p.dim != 1)
    throw Error(ErrorCode::DimensionUnsupported, "grid operators are 1-d");
  if (scaling.kind == Scaling::Kind::exterior) {
    if (!(scaling.R0 > 0.0) || !(scaling.width > 0.0) ||
        scaling.R0 + scaling.width >= grid.L)
      throw Error(ErrorCode::InvalidScaling,
                  "exterior ramp needs 0 < R0 and R0 + width < L");
    if (disc == Disc::fourier)
      throw Error(ErrorCode::ConfigError, "exterior scaling needs a Dirichlet stencil");
  }
  ScaledOperator op;
  op.grid = grid;
  op.h = h;
  op.theta = theta;
  op.scaling = scaling;
  op.disc = disc;
  double dx = grid.dx();

  if (disc == Disc::fourier) {
    // uniform only; constant gamma' keeps the circulant form
    int n = grid.N;
    cplx phase = std::exp(cplx(0.0, -2.0 * theta));
    Eigen::MatrixXcd m = (-h * h * phase) * fourier_d2(n, dx).cast<cplx>();
    cplx rot = std::exp(cplx(0.0, theta));
    for (int i = 0; i < n; ++i) m(i, i) += eval_potential1(p, rot * grid.node(i));
    op.matrix = std::move(m);
    op.band = -1;
    op.weight = Eigen::VectorXcd::Constant(n, dx * rot);
    return op;
  }

  int m = grid.N - 2;
  Eigen::MatrixXd d2, d1;
  kinetic_rows(disc, m, dx, d2, d1);
  Eigen::VectorXcd gp(m), pot(m);
  Eigen::MatrixXcd a(m, m);
  a.setZero();
  for (int i = 0; i < m; ++i) {
    ContourPoint c = contour_point(grid.node(i + 1), theta, scaling);
    gp[i] = c.gp;
    pot[i] = eval_potential1(p, c.g);
    cplx w = 1.0 / c.gp;
    cplx w2 = w * w;
    cplx wwp = -c.gpp / (c.gp * c.gp * c.gp);
    a.row(i) = -h * h * (w2 * d2.row(i).cast<cplx>() + wwp * d1.row(i).cast<cplx>());
    a(i, i) += pot[i];
  }
  // the contour weight gamma' makes W a = (W a)^T up to truncation error;
  // fold that error into the symmetric part so the pairing is exact
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      cplx s = 0.5 * (gp[i] * a(i, j) + gp[j] * a(j, i));
      a(i, j) = s / gp[i];
      a(j, i) = s / gp[j];
    }
  op.matrix = std::move(a);
  op.band = disc == Disc::fd2 ? 1 : 2;
  op.weight = dx * gp;
  return op;
}

std::vector<ResonanceHit> find_resonances(const ScaledOperator& op,
                                          const std::vector<PseudoResonance>& shifts,
                                          double tol) {
  const Eigen::MatrixXcd& mat = op.matrix;
  long n = mat.rows();
  std::vector<ResonanceHit> hits;
  for (size_t si = 0; si < shifts.size(); ++si) {
    cplx z0 = shifts[si].z;
    // the scaled operator only uncovers the sector swept through angle 2 theta
    if (2.0 * op.theta < kPi / 2.0) {
      if (!(z0.real() > 0.0) ||
          !(std::abs(z0.imag()) < z0.real() * std::tan(2.0 * op.theta)))
        throw Error(ErrorCode::SectorUncovered,
                    "shift " + fmt_cplx(z0) + " outside the rotated sector");
    }
    cplx z = z0;
    Eigen::VectorXcd v = random_unit(n, 0x5eedull + si);
    bool ok = false;
    double best_res = 1e300;
    cplx zr = z0;
    Eigen::VectorXcd best = v;
    for (int outer = 0; outer < 6 && !ok; ++outer) {
      Eigen::MatrixXcd shifted = mat;
      shifted.diagonal().array() -= z;
      Factor f(shifted, op.band);
      double prev = 1e300;
      for (int it = 0; it < 60; ++it) {
        Eigen::VectorXcd w = f.solve(v);
        double nw = w.norm();
        if (!std::isfinite(nw) || nw == 0.0) {
          // singular shift, nudge off the eigenvalue and refactor
          z += 1e-10 * (1.0 + std::abs(z));
          break;
        }
        v = w / nw;
        Eigen::VectorXcd mv = mat * v;
        zr = v.dot(mv);  // conjugating Rayleigh quotient
        double r = (mv - zr * v).norm();
        if (r < best_res) {
          best_res = r;
          best = v;
        }
        if (r <= tol) {
          ok = true;
          break;
        }
        if (it >= 4 && r > 0.9 * prev) {
          z = zr;  // stagnated, restart the factorization at the estimate
          break;
        }
        prev = r;
      }
    }
    if (!ok)
      throw Error(ErrorCode::NoConvergence,
                  "shift " + fmt_cplx(z0) + " residual " + std::to_string(best_res));
    if (zr.imag() > 1e-8 * (1.0 + std::abs(zr)))
      throw Error(ErrorCode::NoConvergence,
                  "shift " + fmt_cplx(z0) + " converged above the real axis");
    ResonanceHit hit;
    hit.z = zr;
    hit.alpha = shifts[si].alpha;
    hit.right_vector = best;
    hit.residual = best_res;
    hit.match_distance = std::abs(zr - z0) / op.h;
    hits.push_back(std::move(hit));
  }
  // two shifts landing on one eigenvalue keep the better-matched copy
  std::vector<ResonanceHit> out;
  for (auto& h : hits) {
    bool dup = false;
    for (auto& o : out)
      if (std::abs(h.z - o.z) < std::max(1e-10, 1e-6 * op.h)) {
        dup = true;
        if (h.match_distance < o.match_distance) o = h;
      }
    if (!dup) out.push_back(std::move(h));
  }
  return out;
}

double resolvent_norm(const ScaledOperator& op, cplx z) {
  constexpr double kCap = 1e12;
  long n = op.matrix.rows();
  Eigen::MatrixXcd shifted = op.matrix;
  shifted.diagonal().array() -= z;
  Factor f(shifted, op.band);
  // power iteration on (A^H A)^{-1}; the iterate norm converges to 1/sigma_min^2
  Eigen::VectorXcd v = random_unit(n, 0xabcdull);
  double lam = 0.0, prev = 0.0;
  int calm = 0;
  for (int it = 0; it < 2000; ++it) {
    Eigen::VectorXcd u = f.solve(v);
    Eigen::VectorXcd w = f.solve(u, true);
    double nw = w.norm();
    if (!std::isfinite(nw) || nw > kCap * kCap) return kCap;
    lam = nw;
    v = w / nw;
    if (it > 8 && std::abs(lam - prev) <= 1e-13 * lam) {
      if (++calm >= 2) break;
    } else {
      calm = 0;
    }
    prev = lam;
  }
  return std::min(std::sqrt(lam), kCap);
}

RieszProjector riesz_projector(const ScaledOperator& op, cplx center, double radius,
                               int n_quad) {
  if (!(radius > 0.0) || n_quad < 4)
    throw Error(ErrorCode::ConfigError, "contour needs radius > 0 and n_quad >= 4");
  long n = op.matrix.rows();
  // eigenvalues closer than radius/10 to the contour wreck the trapezoid rate.
  // scaling inflates the resolvent norm by an eigenvector condition number
  // that varies smoothly in angle, so neither the size nor the spread of the
  // norm is conclusive; an eigenvalue hugging a node spikes that node against
  // its immediate neighbors, which the condition number cannot do
  std::vector<double> rns(static_cast<size_t>(n_quad));
  std::vector<cplx> nodes(static_cast<size_t>(n_quad));
  for (int k = 0; k < n_quad; ++k) {
    nodes[size_t(k)] = center + radius * std::exp(cplx(0.0, 2.0 * kPi * k / n_quad));
    rns[size_t(k)] = resolvent_norm(op, nodes[size_t(k)]);
  }
  for (int k = 0; k < n_quad; ++k) {
    double nb = std::max(rns[size_t((k + 1) % n_quad)],
                         rns[size_t((k + n_quad - 1) % n_quad)]);
    if (rns[size_t(k)] > 8.0 * nb && rns[size_t(k)] > 10.0 / radius)
      throw Error(ErrorCode::ContourTooClose,
                  "resolvent norm spikes to " + std::to_string(rns[size_t(k)]) +
                      " at node " + fmt_cplx(nodes[size_t(k)]));
  }
  auto contour_sum = [&](int m) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < m; ++k) {
      cplx ph = std::exp(cplx(0.0, 2.0 * kPi * k / m));
      Eigen::MatrixXcd shifted = op.matrix;
      shifted.diagonal().array() -= (center + radius * ph);
      Factor f(shifted, op.band);
      acc -= ph * f.solve_mat(Eigen::MatrixXcd::Identity(n, n));
    }
    return Eigen::MatrixXcd(acc * (radius / double(m)));
  };
  Eigen::MatrixXcd pi1 = contour_sum(n_quad);
  Eigen::MatrixXcd pi2 = contour_sum(2 * n_quad);
  double n2 = pi2.norm();
  if (n2 > 1e-10 && (pi2 - pi1).norm() > 1e-6 * n2)
    throw Error(ErrorCode::QuadratureDivergence,
                "node doubling moved the projector by " +
                    std::to_string((pi2 - pi1).norm() / n2));
  RieszProjector pr;
  pr.center = center;
  pr.radius = radius;
  pr.n_quad = 2 * n_quad;
  // leading singular pair from a seeded sketch with one two-sided pass
  int sk = int(std::min<long>(8, n));
  Eigen::MatrixXcd g(n, sk);
  Rng rng(0x515ecull);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < sk; ++j) g(i, j) = cplx(rng.uniform(), rng.uniform());
  Eigen::MatrixXcd t = pi2.adjoint() * (pi2 * g);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(t);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, sk);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pi2 * q);
  double s1 = svd.singularValues()[0];
  pr.rank_gap = s1 > 1e-12 ? svd.singularValues()[1] / s1 : 0.0;
  pr.matrix = std::move(pi2);
  return pr;
}

Eigen::MatrixXd functional_calculus(const ScaledOperator& op, const BumpSpec& psi) {
  if (op.theta != 0.0)
    throw Error(ErrorCode::ConfigError, "functional calculus needs theta = 0");
  if (op.dim() > 4096)
    throw Error(ErrorCode::ConfigError, "dense eigendecomposition capped at 4096");
  if (!(psi.plateau > 0.0) || !(psi.support > psi.plateau))
    throw Error(ErrorCode::ConfigError, "bump needs 0 < plateau < support");
  Eigen::MatrixXd a = op.matrix.real();
  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;
  lapack::eigh(a, vals, vecs);
  Eigen::VectorXd w(vals.size());
  for (long i = 0; i < vals.size(); ++i) w[i] = bump_eval(psi, vals[i]);
  return vecs * w.asDiagonal() * vecs.transpose();
}

Eigen::VectorXcd dense_eigenvalues(const ScaledOperator& op) {
  return lapack::eigenvalues(op.matrix);
}

}  // namespace bt
