#include "barriertop/curves.hpp"

#include <algorithm>
#include <cmath>

#include "barriertop/lattice.hpp"
#include "barriertop/util.hpp"

namespace bt {

namespace {

constexpr double kLevelTolRel = 1e-8;

long find_level(const std::vector<double>& mu, double v, double tol) {
  for (size_t k = 0; k < mu.size(); ++k)
    if (std::abs(mu[k] - v) < tol) return long(k);
  return -1;
}

// scalar expandible series as explicit (rate, polynomial) terms
struct ScalarTerm {
  double mu;
  std::vector<double> poly;
};
using ScalarSeries = std::vector<ScalarTerm>;

void add_term(ScalarSeries& s, double mu, const std::vector<double>& poly, double tol) {
  for (auto& t : s)
    if (std::abs(t.mu - mu) < tol) {
      if (t.poly.size() < poly.size()) t.poly.resize(poly.size(), 0.0);
      for (size_t m = 0; m < poly.size(); ++m) t.poly[m] += poly[m];
      return;
    }
  s.push_back({mu, poly});
}

ScalarSeries multiply(const ScalarSeries& a, const ScalarSeries& b, double cap,
                      double tol) {
  ScalarSeries out;
  for (const auto& ta : a)
    for (const auto& tb : b) {
      double mu = ta.mu + tb.mu;
      if (mu > cap + tol) continue;
      std::vector<double> poly(ta.poly.size() + tb.poly.size() - 1, 0.0);
      for (size_t i = 0; i < ta.poly.size(); ++i)
        for (size_t j = 0; j < tb.poly.size(); ++j)
          poly[i + j] += ta.poly[i] * tb.poly[j];
      add_term(out, mu, poly, tol);
    }
  return out;
}

// component c of the expansion as a scalar series
ScalarSeries component_series(const Expansion& e, long c) {
  ScalarSeries s;
  for (size_t k = 0; k < e.mu.size(); ++k) {
    std::vector<double> poly;
    for (const auto& v : e.coef[k]) poly.push_back(v[c]);
    while (poly.size() > 1 && poly.back() == 0.0) poly.pop_back();
    if (poly.size() == 1 && poly[0] == 0.0) continue;
    s.push_back({e.mu[k], poly});
  }
  return s;
}

// sum of G_k(gamma) as one expansion over the level grid, truncated at cap
Expansion nonlinear_source(const Expansion& gamma, const std::vector<PolyField>& fields,
                           const std::vector<double>& grid, double cap, double tol) {
  long dim2 = gamma.coef.empty() || gamma.coef[0].empty()
                  ? 0
                  : gamma.coef[0][0].size();
  int n = int(dim2 / 2);
  Expansion out;
  out.mu = grid;
  for (size_t k = 0; k < grid.size(); ++k)
    out.coef.push_back({Eigen::VectorXd::Zero(dim2)});

  std::vector<ScalarSeries> xs;
  for (int i = 0; i < n; ++i) xs.push_back(component_series(gamma, i));

  for (const auto& f : fields)
    for (long c = 0; c < dim2; ++c)
      for (const auto& mono : f.comp[size_t(c)]) {
        ScalarSeries prod{{0.0, {mono.coef}}};
        for (int i = 0; i < n; ++i)
          for (int r = 0; r < mono.beta[size_t(i)]; ++r)
            prod = multiply(prod, xs[size_t(i)], cap, tol);
        for (const auto& term : prod) {
          if (term.mu <= tol) continue;  // constant terms cannot arise from beta >= 2
          long k = find_level(grid, term.mu, tol);
          if (k < 0) continue;  // beyond the truncation grid
          auto& dst = out.coef[size_t(k)];
          if (dst.size() < term.poly.size())
            dst.resize(term.poly.size(), Eigen::VectorXd::Zero(dim2));
          for (size_t m = 0; m < term.poly.size(); ++m) dst[m][c] += term.poly[m];
        }
      }
  return out;
}

Eigen::VectorXd poly_coef(const std::vector<Eigen::VectorXd>& poly, size_t m, long dim2) {
  if (m < poly.size()) return poly[m];
  return Eigen::VectorXd::Zero(dim2);
}

// deterministic halton points in the ball |u| <= radius
std::vector<Eigen::VectorXd> halton_ball(int dim, double radius, int count) {
  static const int primes[] = {2, 3, 5, 7, 11, 13};
  std::vector<Eigen::VectorXd> out;
  for (int i = 1; out.size() < size_t(count); ++i) {
    if (i > 64 * count) break;
    Eigen::VectorXd u(dim);
    for (int d = 0; d < dim; ++d) {
      double f = 1.0, r = 0.0;
      int v = i;
      while (v > 0) {
        f /= primes[d];
        r += f * (v % primes[d]);
        v /= primes[d];
      }
      u[d] = radius * (2.0 * r - 1.0);
    }
    if (u.norm() <= radius) out.push_back(u);
  }
  return out;
}

}  // namespace

Eigen::VectorXd eval_expansion(const Expansion& e, double t) {
  long dim2 = e.coef.empty() || e.coef[0].empty() ? 0 : e.coef[0][0].size();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim2);
  for (size_t k = 0; k < e.mu.size(); ++k) {
    double w = std::exp(-e.mu[k] * t);
    double tp = 1.0;
    for (const auto& v : e.coef[k]) {
      s += w * tp * v;
      tp *= t;
    }
  }
  return s;
}

Expansion expansion_derivative(const Expansion& e) {
  Expansion d = e;
  for (size_t k = 0; k < e.mu.size(); ++k) {
    const auto& src = e.coef[k];
    auto& dst = d.coef[k];
    for (size_t m = 0; m < src.size(); ++m) {
      dst[m] = -e.mu[k] * src[m];
      if (m + 1 < src.size()) dst[m] += double(m + 1) * src[m + 1];
    }
  }
  return d;
}

Eigen::MatrixXd LinearizationData::projector(double mu) const {
  long n = lambda.size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (long j = 0; j < n; ++j) {
    if (std::abs(lambda[j] - mu) > kLevelTolRel * lambda.minCoeff()) continue;
    double l = lambda[j];
    p(j, j) = 0.5;
    p(j, n + j) = -1.0 / l;
    p(n + j, j) = -l / 4.0;
    p(n + j, n + j) = 0.5;
  }
  return p;
}

Eigen::MatrixXd LinearizationData::partial_inverse(double mu) const {
  long n = lambda.size();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (long j = 0; j < n; ++j) {
    double l = lambda[j];
    if (std::abs(l - mu) <= kLevelTolRel * lambda.minCoeff()) {
      // unstable projector over 2*mu: inverse on the range line
      k(j, j) = 0.25 / mu;
      k(j, n + j) = 0.5 / (mu * mu);
      k(n + j, j) = 0.125;
      k(n + j, n + j) = 0.25 / mu;
    } else {
      double det = mu * mu - l * l;
      k(j, j) = mu / det;
      k(j, n + j) = -2.0 / det;
      k(n + j, j) = -l * l / (2.0 * det);
      k(n + j, n + j) = mu / det;
    }
  }
  return k;
}

LinearizationData linearize(const BarrierData& b) {
  LinearizationData lin;
  long n = b.lambda.size();
  lin.lambda = b.lambda;
  lin.Fp = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (long j = 0; j < n; ++j) {
    lin.Fp(j, n + j) = 2.0;
    lin.Fp(n + j, j) = 0.5 * b.lambda[j] * b.lambda[j];
  }
  // construction-time sanity: projectors idempotent, partial inverses exact
  for (long j = 0; j < n; ++j) {
    double mu = b.lambda[j];
    Eigen::MatrixXd pi = lin.projector(mu);
    if ((pi * pi - pi).norm() > 1e-12)
      throw Error(ErrorCode::IllConditioned, "projector not idempotent");
    Eigen::MatrixXd a = lin.Fp + mu * Eigen::MatrixXd::Identity(2 * n, 2 * n);
    Eigen::MatrixXd k = lin.partial_inverse(mu);
    Eigen::MatrixXd id_range = a * k;
    Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(2 * n, 2 * n) - pi;
    if ((id_range - expect).norm() > 1e-12)
      throw Error(ErrorCode::IllConditioned, "partial inverse fails on the range");
  }
  return lin;
}

FormalCurve formal_curve(const LinearizationData& lin,
                         const std::vector<PolyField>& fields,
                         const std::vector<Prescription>& prescribed, double N) {
  long n = lin.lambda.size();
  double lmin = lin.lambda.minCoeff(), lmax = lin.lambda.maxCoeff();
  double tol = kLevelTolRel * lmin;
  if (N <= lmax)
    throw Error(ErrorCode::TruncationTooLow, "need N above the largest rate");
  std::vector<double> lamv(lin.lambda.data(), lin.lambda.data() + n);
  for (const auto& pr : prescribed) {
    if (find_level(lamv, pr.mu, tol) < 0)
      throw Error(ErrorCode::ConfigError, "prescription rate is not a lambda_j");
    Eigen::MatrixXd pi = lin.projector(pr.mu);
    if ((pr.gamma - pi * pr.gamma).norm() > 1e-10 * std::max(1.0, pr.gamma.norm()))
      throw Error(ErrorCode::PrescriptionNotInKernel,
                  "prescribed data leaves Ker(Fp+mu)");
  }

  FormalCurve fc;
  fc.dim = int(n);
  fc.truncation = N;
  fc.prescribed = prescribed;
  auto& e = fc.expansion;
  e.mu = mu_sequence(lin.lambda, N);
  for (size_t k = 0; k < e.mu.size(); ++k) {
    int deg = expansion_degree(lin.lambda, e.mu[k]);
    e.coef.push_back(
        std::vector<Eigen::VectorXd>(size_t(deg) + 1, Eigen::VectorXd::Zero(2 * n)));
  }

  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  for (size_t k = 0; k < e.mu.size(); ++k) {
    double mu = e.mu[k];
    // source from levels below; higher levels are still zero so the product
    // algebra cannot feed back
    Expansion src = nonlinear_source(fc.expansion, fields, e.mu, mu, tol);
    const auto& R = src.coef[k];
    size_t M = e.coef[k].size() - 1;
    for (size_t m = M + 1; m < R.size(); ++m)
      if (R[m].norm() > 1e-10)
        throw Error(ErrorCode::TruncationTooLow, "source degree exceeds the ladder");
    bool resonant = find_level(lamv, mu, tol) >= 0;
    if (resonant) {
      Eigen::MatrixXd pi = lin.projector(mu);
      Eigen::MatrixXd kk = lin.partial_inverse(mu);
      Eigen::VectorXd top = pi * poly_coef(R, M, 2 * n);
      if (top.norm() > 1e-10)
        throw Error(ErrorCode::TruncationTooLow, "kernel source at the top power");
      std::vector<Eigen::VectorXd> ker(M + 1, Eigen::VectorXd::Zero(2 * n));
      for (size_t m = 1; m <= M; ++m)
        ker[m] = pi * poly_coef(R, m - 1, 2 * n) / double(m);
      for (const auto& pr : prescribed)
        if (std::abs(pr.mu - mu) < tol) ker[0] = pr.gamma;
      Eigen::VectorXd next = Eigen::VectorXd::Zero(2 * n);
      for (size_t m = M + 1; m-- > 0;) {
        Eigen::VectorXd rng = kk * (double(m + 1) * next - poly_coef(R, m, 2 * n));
        e.coef[k][m] = ker[m] + rng;
        next = e.coef[k][m];
      }
    } else {
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(lin.Fp + mu * eye);
      Eigen::VectorXd next = Eigen::VectorXd::Zero(2 * n);
      for (size_t m = M + 1; m-- > 0;) {
        e.coef[k][m] = lu.solve(double(m + 1) * next - poly_coef(R, m, 2 * n));
        next = e.coef[k][m];
      }
    }
  }
  return fc;
}

double formal_residual(const FormalCurve& c, const LinearizationData& lin,
                       const std::vector<PolyField>& fields) {
  double tol = kLevelTolRel * lin.lambda.minCoeff();
  const Expansion& e = c.expansion;
  Expansion d = expansion_derivative(e);
  Expansion src = nonlinear_source(e, fields, e.mu, c.truncation, tol);
  double worst = 0.0;
  for (size_t k = 0; k < e.mu.size(); ++k) {
    size_t top = std::max({d.coef[k].size(), e.coef[k].size(), src.coef[k].size()});
    for (size_t m = 0; m < top; ++m) {
      long n2 = lin.Fp.rows();
      Eigen::VectorXd v = poly_coef(d.coef[k], m, n2) -
                          lin.Fp * poly_coef(e.coef[k], m, n2) -
                          poly_coef(src.coef[k], m, n2);
      worst = std::max(worst, v.norm());
    }
  }
  return worst;
}

Eigen::VectorXd RefinedCurve::gamma(size_t i) const {
  return eval_expansion(formal.expansion, time(i)) + r[i];
}

RefinedCurve picard_refine(const FormalCurve& formal, const Potential& p, double N,
                           double span, int j_max, double tol, double dt) {
  BarrierData b = barrier_data(p);
  long n = b.lambda.size();
  if (N > formal.truncation + kLevelTolRel * b.lambda.minCoeff())
    throw Error(ErrorCode::ConfigError,
                "envelope rate N exceeds the series truncation");
  double lmax = b.lambda.maxCoeff();

  // field in apex-centered principal coordinates
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Q.topLeftCorner(n, n) = b.axes;
  Q.bottomRightCorner(n, n) = b.axes;
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(2 * n);
  shift.head(n) = b.apex;
  auto field = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return Q.transpose() * hamiltonian_field(p, Q * u + shift);
  };

  double C1 = 0.0;
  for (const auto& u : halton_ball(int(2 * n), 2.0, 256)) {
    Eigen::MatrixXd j = hamiltonian_jacobian(p, Q * u + shift);
    C1 = std::max(C1, j.jacobiSvd().singularValues()(0));
  }
  if (N < std::max({C1 + 1.0, 2.0 * C1, lmax + 0.5}))
    throw Error(ErrorCode::ContractionViolated,
                "N = " + std::to_string(N) + " below the certified threshold for C1 = " +
                    std::to_string(C1));

  Expansion drho = expansion_derivative(formal.expansion);
  auto defect = [&](double t) -> Eigen::VectorXd {
    return field(eval_expansion(formal.expansion, t)) - eval_expansion(drho, t);
  };

  // defect evaluation cancels two O(e^{-lambda_1 t}) quantities, so beyond
  // s_max the e^{Nt}-weighted check would only amplify roundoff; past it the
  // envelope is certified by the measured decay rate instead
  double l1 = b.lambda.minCoeff();
  double s_max = 33.0 / std::max(N - l1, 0.5);

  // first time from which both the curve and its defect sit inside the envelope
  double T = -1.0;
  for (double t = 0.0; t <= 60.0; t += 0.25) {
    double rho_n = eval_expansion(formal.expansion, t).norm();
    double def_n = defect(t).norm() * std::exp(N * t);
    if (rho_n <= 0.9 && def_n <= 0.9) {
      bool ok = true;
      for (double s = t; s <= std::min(t + span + 30.0 / N, s_max); s += 0.25)
        if (defect(s).norm() * std::exp(N * s) > 0.9 ||
            eval_expansion(formal.expansion, s).norm() > 0.9)
          ok = false;
      if (ok) {
        T = t;
        break;
      }
    }
  }
  if (T < 0.0)
    throw Error(ErrorCode::TailDivergence,
                "formal defect never enters the e^{-Nt} envelope");
  if (T + span + 30.0 / N > s_max) {
    // decay-rate certificate over the last stretch where the defect still
    // dominates the cancellation noise of its own evaluation
    auto noise = [&](double s) {
      return 1e-14 * (field(eval_expansion(formal.expansion, s)).norm() +
                      eval_expansion(drho, s).norm());
    };
    double s1 = -1.0;
    for (double s = std::min(s_max, T + span); s >= T + 1.5; s -= 0.25)
      if (defect(s).norm() >= 300.0 * noise(s)) {
        s1 = s;
        break;
      }
    // no measurable point means the defect sits at the roundoff floor already
    if (s1 > 0.0) {
      double s0 = std::max(s1 - 1.5, T);
      if (s1 <= s0 + 0.25) throw Error(ErrorCode::WindowTooShort, "no rate window");
      double d0 = defect(s0).norm(), d1 = defect(s1).norm();
      if (std::log(d0 / d1) / (s1 - s0) < N)
        throw Error(ErrorCode::TailDivergence,
                    "defect decay rate below N beyond the verifiable window");
    }
  }

  RefinedCurve rc;
  rc.formal = formal;
  rc.N = N;
  rc.t0 = T;
  rc.span = span;
  double L = 30.0 / N;
  rc.dt = dt;
  long l_steps = long(std::ceil(L / rc.dt));
  L = double(l_steps) * rc.dt;
  long keep = long(std::ceil(span / rc.dt));
  long m_steps = keep + l_steps;
  // index cap for the e^{Nt}-weighted metrics; beyond it the weight only
  // amplifies the roundoff floor of the defect evaluation
  long wkeep = std::min(keep, long(std::floor((s_max - T) / rc.dt)));
  if (double(wkeep) * rc.dt < 1.0)
    throw Error(ErrorCode::WindowTooShort, "no verifiable weighted stretch");
  double tail_bound = std::exp(-30.0) * (C1 + 1.0) / N;
  if (tail_bound > tol)
    throw Error(ErrorCode::TailTruncationError, "analytic tail bound exceeds tol");

  std::vector<Eigen::VectorXd> rho(size_t(m_steps) + 1), rhod(size_t(m_steps) + 1);
  for (long i = 0; i <= m_steps; ++i) {
    double t = rc.time(size_t(i));
    rho[size_t(i)] = eval_expansion(formal.expansion, t);
    rhod[size_t(i)] = eval_expansion(drho, t);
  }
  rc.r.assign(size_t(m_steps) + 1, Eigen::VectorXd::Zero(2 * n));

  for (int j = 0; j < j_max; ++j) {
    // g = H_p(rho + r) - rho' ; r_new(t) = -int_t^{t+L} g
    std::vector<Eigen::VectorXd> g(size_t(m_steps) + 1);
    for (long i = 0; i <= m_steps; ++i)
      g[size_t(i)] = field(rho[size_t(i)] + rc.r[size_t(i)]) - rhod[size_t(i)];
    // sliding trapezoid window by backward recurrence: every rounding lands
    // at the local integral scale, which decays with the defect, so the
    // e^{Nt} weight never meets a flat error floor. a forward prefix sum
    // would round at the scale of the early-window defect instead and drown
    // the late diffs. the O(dt^2) Euler-Maclaurin end correction keeps the
    // discrete fixed point on the integral equation to O(dt^4)
    std::vector<Eigen::VectorXd> I(size_t(m_steps) + 1), gp(size_t(m_steps) + 1);
    I[size_t(m_steps)] = Eigen::VectorXd::Zero(2 * n);
    for (long i = m_steps - 1; i >= 0; --i) {
      I[size_t(i)] =
          I[size_t(i + 1)] + 0.5 * rc.dt * (g[size_t(i)] + g[size_t(i + 1)]);
      if (i + l_steps < m_steps)
        I[size_t(i)] -=
            0.5 * rc.dt * (g[size_t(i + l_steps)] + g[size_t(i + l_steps + 1)]);
    }
    for (long i = 0; i <= m_steps; ++i) {
      long a = std::max(i - 1, 0L), c = std::min(i + 1, m_steps);
      gp[size_t(i)] = (g[size_t(c)] - g[size_t(a)]) / (double(c - a) * rc.dt);
    }
    double diff = 0.0;
    for (long i = 0; i <= m_steps; ++i) {
      long e = std::min(i + l_steps, m_steps);
      Eigen::VectorXd rn =
          -I[size_t(i)] + rc.dt * rc.dt / 12.0 * (gp[size_t(e)] - gp[size_t(i)]);
      if (i <= wkeep)
        diff = std::max(diff, (rn - rc.r[size_t(i)]).norm() *
                                  std::exp(N * rc.time(size_t(i))));
      rc.r[size_t(i)] = rn;
    }
    rc.picard_history.push_back(diff);
    size_t hj = rc.picard_history.size();
    if (hj >= 2 && diff > 10.0 * tol &&
        diff > (0.5 + 0.1) * rc.picard_history[hj - 2])
      throw Error(ErrorCode::ContractionViolated,
                  "picard ratio " +
                      std::to_string(diff / rc.picard_history[hj - 2]) +
                      " above the certified 1/2");
    if (diff <= tol) break;
  }

  rc.envelope = 0.0;
  for (long i = 0; i <= wkeep; ++i)
    rc.envelope = std::max(
        rc.envelope, rc.r[size_t(i)].norm() * std::exp(N * rc.time(size_t(i))));

  // independent residual: centered differences of the assembled curve
  rc.residual = 0.0;
  for (long i = 2; i <= keep && i + 2 <= m_steps; ++i) {
    Eigen::VectorXd gm = rho[size_t(i)] + rc.r[size_t(i)];
    Eigen::VectorXd d1 = (-(rho[size_t(i + 2)] + rc.r[size_t(i + 2)]) +
                          8.0 * (rho[size_t(i + 1)] + rc.r[size_t(i + 1)]) -
                          8.0 * (rho[size_t(i - 1)] + rc.r[size_t(i - 1)]) +
                          (rho[size_t(i - 2)] + rc.r[size_t(i - 2)])) /
                         (12.0 * rc.dt);
    rc.residual = std::max(rc.residual, (d1 - field(gm)).norm());
  }
  return rc;
}

double flow_membership(const RefinedCurve& rc, const Potential& p, double arc,
                       double rtol) {
  BarrierData b = barrier_data(p);
  long n = b.lambda.size();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Q.topLeftCorner(n, n) = b.axes;
  Q.bottomRightCorner(n, n) = b.axes;
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(2 * n);
  shift.head(n) = b.apex;

  long keep = long(std::floor(rc.span / rc.dt));
  if (size_t(keep) >= rc.r.size()) keep = long(rc.r.size()) - 1;
  long hop = std::max(1L, long(std::llround(0.5 / rc.dt)));
  long alen = std::max(1L, long(std::llround(arc / rc.dt)));
  double worst = 0.0;
  for (long i = 0; i + alen <= keep; i += hop) {
    Eigen::VectorXd s0 = Q * rc.gamma(size_t(i)) + shift;
    Trajectory tr = flow(p, s0, rc.time(size_t(i)), rc.time(size_t(i + alen)), rtol);
    Eigen::VectorXd want = Q * rc.gamma(size_t(i + alen)) + shift;
    worst = std::max(worst, (tr.state.back() - want).norm());
  }
  return worst;
}

PrescriptionReport verify_prescription(const RefinedCurve& rc,
                                       const LinearizationData& lin) {
  long n = lin.lambda.size();
  Trajectory traj;
  long keep = long(std::floor(rc.span / rc.dt));
  for (long i = 0; i <= keep && size_t(i) < rc.r.size(); ++i) {
    traj.t.push_back(rc.time(size_t(i)));
    traj.state.push_back(rc.gamma(size_t(i)));
  }
  // fit levels past the truncation so omitted true levels cannot bias the
  // recovered leading data
  double mu_max = std::max(rc.formal.truncation, 3.1 * lin.lambda.maxCoeff());
  auto fit = fit_expansion(traj, lin.lambda, mu_max);

  PrescriptionReport rep;
  rep.fit_residual = fit.residual;
  rep.r_envelope = rc.envelope;
  double tol = kLevelTolRel * lin.lambda.minCoeff();
  for (long j = 0; j < n; ++j) {
    double mu = lin.lambda[j];
    long k = find_level(fit.mu, mu, tol);
    Eigen::VectorXd rec = k >= 0 ? Eigen::VectorXd(lin.projector(mu) * fit.coef[size_t(k)][0])
                                 : Eigen::VectorXd(Eigen::VectorXd::Zero(2 * n));
    rep.recovered.push_back(rec);
    Eigen::VectorXd want = Eigen::VectorXd::Zero(2 * n);
    for (const auto& pr : rc.formal.prescribed)
      if (std::abs(pr.mu - mu) < tol) want = pr.gamma;
    rep.max_mismatch = std::max(rep.max_mismatch, (rec - want).norm());
  }
  if (rep.max_mismatch > 1e-6)
    throw Error(ErrorCode::PrescriptionDrift,
                "recovered kernel data off by " + std::to_string(rep.max_mismatch));
  return rep;
}

}  // namespace bt
