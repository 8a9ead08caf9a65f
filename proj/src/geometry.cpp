#include "barriertop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "barriertop/lattice.hpp"
#include "barriertop/util.hpp"

namespace bt {

namespace {

void require_1d(const Potential& p, const char* op) {
  if (p.dim != 1)
    throw Error(ErrorCode::DimensionUnsupported, std::string(op) + ": 1-d only");
}

// (E0 - V(x)) / (x - apex)^2, smooth through the apex; closed-form families
// get the cancellation-free deficit, so the quotient stays accurate down to
// the underflow floor. tables only have the direct difference, noisy inside
// |u| ~ 1e-6, hence the wider seam
double qfactor(const Potential& p, const BarrierData& b, double x) {
  double u = x - b.apex[0];
  double l = b.lambda[0];
  if (p.family == Family::user_table) {
    if (std::abs(u) < 1e-6) return 0.25 * l * l;
    return (b.energy - eval_potential1(p, x)) / (u * u);
  }
  if (std::abs(u) < 1e-120) return 0.25 * l * l;
  return barrier_deficit1(p, x) / (u * u);
}

// dormand-prince 5(4); error scaled by the state norm, so accuracy stays
// relative while the trajectory collapses onto the apex
Trajectory rk45(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
                const Eigen::VectorXd& s0, double t0, double t1, double rtol) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                      e4 = 125.0 / 192 - 393.0 / 640,
                      e5 = -2187.0 / 6784 + 92097.0 / 339200, e6 = 11.0 / 84 - 187.0 / 2100,
                      e7 = -1.0 / 40;

  double dir = t1 >= t0 ? 1.0 : -1.0;
  double span = std::abs(t1 - t0);
  double t = t0;
  Eigen::VectorXd y = s0;
  double h = dir * std::min(0.01, span);
  Trajectory out;
  out.t.push_back(t);
  out.state.push_back(y);
  long steps = 0;
  while (dir * (t1 - t) > 0) {
    if (++steps > 4000000) throw Error(ErrorCode::StepFailure, "step budget exhausted");
    if (dir * (t + h - t1) > 0) h = t1 - t;
    Eigen::VectorXd k1 = f(t, y);
    Eigen::VectorXd k2 = f(t + c2 * h, y + h * (a21 * k1));
    Eigen::VectorXd k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    Eigen::VectorXd k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Eigen::VectorXd k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Eigen::VectorXd k6 =
        f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Eigen::VectorXd y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Eigen::VectorXd k7 = f(t + h, y5);
    Eigen::VectorXd err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double scale = rtol * std::max({y.norm(), y5.norm(), 1e-290});
    double en = err.norm() / scale;
    if (en <= 1.0) {
      t += h;
      y = y5;
      out.t.push_back(t);
      out.state.push_back(y);
    }
    double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
    if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(t)))
      throw Error(ErrorCode::StepFailure, "step size collapsed");
  }
  return out;
}

}  // namespace

double eikonal_slope(const Potential& p, double x, int sign) {
  require_1d(p, "eikonal");
  BarrierData b = barrier_data(p);
  return sign * (x - b.apex[0]) * std::sqrt(qfactor(p, b, x));
}

double eikonal_phase(const Potential& p, double x, int sign) {
  require_1d(p, "eikonal");
  BarrierData b = barrier_data(p);
  double a = b.apex[0];
  return sign * integrate(
                    [&](double s) { return (s - a) * std::sqrt(qfactor(p, b, s)); }, a, x,
                    1e-13);
}

Eigen::VectorXd eikonal_phase_batch(const Potential& p, const Eigen::VectorXd& xs,
                                    int sign) {
  require_1d(p, "eikonal");
  BarrierData b = barrier_data(p);
  double apex = b.apex[0];
  auto slope = [&](double s) { return (s - apex) * std::sqrt(qfactor(p, b, s)); };
  std::vector<long> idx(size_t(xs.size()));
  std::iota(idx.begin(), idx.end(), 0L);
  std::sort(idx.begin(), idx.end(), [&](long a, long c) { return xs[a] < xs[c]; });
  Eigen::VectorXd out(xs.size());
  // cumulative pass from the apex outward on each side
  long first_pos = long(idx.size());
  for (size_t r = 0; r < idx.size(); ++r)
    if (xs[idx[r]] >= apex) {
      first_pos = long(r);
      break;
    }
  double acc = 0.0, prev = apex;
  for (long r = first_pos; r < long(idx.size()); ++r) {
    double x = xs[idx[size_t(r)]];
    acc += integrate(slope, prev, x, 1e-13);
    prev = x;
    out[idx[size_t(r)]] = sign * acc;
  }
  acc = 0.0;
  prev = apex;
  for (long r = first_pos - 1; r >= 0; --r) {
    double x = xs[idx[size_t(r)]];
    acc += integrate(slope, prev, x, 1e-13);
    prev = x;
    out[idx[size_t(r)]] = sign * acc;
  }
  return out;
}

Trajectory flow(const Potential& p, const Eigen::VectorXd& s0, double t0, double t1,
                double rtol) {
  return rk45([&](double, const Eigen::VectorXd& s) { return hamiltonian_field(p, s); },
              s0, t0, t1, rtol);
}

Trajectory manifold_trajectory(const Potential& p, double x_ref, int sign, double t0,
                               double t1, double rtol) {
  require_1d(p, "manifold");
  if (t0 > 0.0 || t1 < 0.0)
    throw Error(ErrorCode::ConfigError, "time range must bracket t = 0");
  BarrierData b = barrier_data(p);
  double apex = b.apex[0];
  if (x_ref == apex) throw Error(ErrorCode::ConfigError, "reference point at the apex");
  auto fld = [&](double, const Eigen::VectorXd& s) {
    Eigen::VectorXd d(1);
    d[0] = 2.0 * sign * (s[0] - apex) * std::sqrt(qfactor(p, b, s[0]));
    return d;
  };
  Eigen::VectorXd x0(1);
  x0[0] = x_ref;
  // split at t=0 so both arcs leave the reference point exactly
  Trajectory fw = t1 > 0 ? rk45(fld, x0, 0.0, t1, rtol) : Trajectory{};
  Trajectory bw = t0 < 0 ? rk45(fld, x0, 0.0, t0, rtol) : Trajectory{};
  Trajectory out;
  for (size_t i = bw.t.size(); i-- > 1;) {
    out.t.push_back(bw.t[i]);
    out.state.push_back(bw.state[i]);
  }
  if (!fw.t.empty())
    for (size_t i = 0; i < fw.t.size(); ++i) {
      out.t.push_back(fw.t[i]);
      out.state.push_back(fw.state[i]);
    }
  else {
    out.t.push_back(0.0);
    out.state.push_back(x0);
  }
  for (auto& s : out.state) {
    double x = s[0];
    Eigen::VectorXd full(2);
    full << x, sign * (x - apex) * std::sqrt(qfactor(p, b, x));
    s = full;
  }
  return out;
}

ExpansionFit fit_expansion(const Trajectory& traj, const Eigen::VectorXd& lambda,
                           double mu_max, double lo, double hi) {
  if (traj.t.size() < 8) throw Error(ErrorCode::WindowTooShort, "trajectory too short");
  size_t ns = traj.t.size();
  long nc = traj.state[0].size();
  // decay direction: toward larger or smaller t
  double n_front = traj.state.front().norm(), n_back = traj.state.back().norm();
  double flip = n_back < n_front ? 1.0 : -1.0;

  std::vector<size_t> win;
  for (size_t i = 0; i < ns; ++i) {
    double nrm = traj.state[i].norm();
    if (nrm >= lo && nrm <= hi) win.push_back(i);
  }

  ExpansionFit fit;
  fit.mu = mu_sequence(lambda, mu_max);
  if (fit.mu.empty()) throw Error(ErrorCode::ConfigError, "no levels below mu_max");
  int ncols = 0;
  for (double m : fit.mu) {
    fit.degree.push_back(expansion_degree(lambda, m));
    ncols += fit.degree.back() + 1;
  }
  if (long(win.size()) < 2 * ncols + 4)
    throw Error(ErrorCode::WindowTooShort,
                "only " + std::to_string(win.size()) + " samples in the fit window");

  fit.samples = int(win.size());
  fit.t_lo = std::min(traj.t[win.front()], traj.t[win.back()]);
  fit.t_hi = std::max(traj.t[win.front()], traj.t[win.back()]);

  Eigen::MatrixXd A(long(win.size()), ncols);
  Eigen::MatrixXd Y(long(win.size()), nc);
  for (size_t r = 0; r < win.size(); ++r) {
    double tau = flip * traj.t[win[r]];
    double w = 1.0 / traj.state[win[r]].norm();
    long c = 0;
    for (size_t k = 0; k < fit.mu.size(); ++k) {
      double e = std::exp(-fit.mu[k] * tau);
      double tp = 1.0;
      for (int d = 0; d <= fit.degree[k]; ++d) {
        A(long(r), c++) = w * tp * e;
        tp *= tau;
      }
    }
    Y.row(long(r)) = w * traj.state[win[r]].transpose();
  }
  Eigen::VectorXd colscale(ncols);
  for (long c = 0; c < ncols; ++c) {
    colscale[c] = A.col(c).norm();
    if (colscale[c] < 1e-290) colscale[c] = 1.0;
    A.col(c) /= colscale[c];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd C = qr.solve(Y);
  double res = (A * C - Y).norm() / Y.norm();
  fit.residual = res;
  for (long c = 0; c < ncols; ++c) C.row(c) /= colscale[c];

  long c = 0;
  for (size_t k = 0; k < fit.mu.size(); ++k) {
    std::vector<Eigen::VectorXd> powers;
    for (int d = 0; d <= fit.degree[k]; ++d) powers.push_back(C.row(c++).transpose());
    fit.coef.push_back(std::move(powers));
  }
  return fit;
}

ScatteringGeometry scattering_geometry(const Potential& p, int sign, int side) {
  require_1d(p, "scattering geometry");
  if (sign != 1 && sign != -1) throw Error(ErrorCode::ConfigError, "sign must be +-1");
  if (side != 1 && side != -1) throw Error(ErrorCode::ConfigError, "side must be +-1");
  if (!p.decays())
    throw Error(ErrorCode::LongRangeUnsupported, "asymptotics need a decaying potential");
  BarrierData b = barrier_data(p);
  double E0 = b.energy, lam = b.lambda[0], v0 = 2.0 * std::sqrt(E0);

  // far radius where the potential stops mattering
  double X = 10.0;
  while (std::abs(eval_potential1(p, side * X)) > 1e-13 * E0) {
    X += 5.0;
    if (X > 300.0)
      throw Error(ErrorCode::TailDivergence, "potential still visible at |x| = 300");
  }

  ScatteringGeometry out;
  out.speed = v0;
  out.action = integrate(
      [&](double u) {
        return std::sqrt(std::max(E0 - eval_potential1(p, side * u), 0.0)) -
               std::sqrt(E0);
      },
      0.0, X + 30.0, 1e-13);

  // launch just outside the interaction region, pinned so the free asymptote
  // extrapolates through the origin at t = 0
  double u_ref = 1.0;
  while (std::abs(eval_potential1(p, side * u_ref)) > 1e-3 * E0) u_ref += 0.5;
  u_ref += 1.0;
  double delta = integrate(
      [&](double u) {
        return 0.5 / std::sqrt(std::max(E0 - eval_potential1(p, side * u), 1e-30)) -
               0.5 / std::sqrt(E0);
      },
      u_ref, X + 30.0, 1e-13);
  double t_ref = sign == -1 ? -u_ref / v0 + delta : u_ref / v0 - delta;

  double span = (std::log(std::max(u_ref, 1.0)) + 21.0) / lam + 2.0;
  Trajectory arc = sign == -1
                       ? manifold_trajectory(p, side * u_ref, sign, 0.0, span)
                       : manifold_trajectory(p, side * u_ref, sign, -span, 0.0);
  for (auto& t : arc.t) t += t_ref;
  for (auto& s : arc.state) s[0] -= b.apex[0];

  auto fit = fit_expansion(arc, b.lambda, 3.2 * lam);
  size_t k0 = 0;
  for (size_t k = 0; k < fit.mu.size(); ++k)
    if (std::abs(fit.mu[k] - lam) < 1e-8 * lam) k0 = k;
  out.g = fit.coef[k0][0][0];
  out.det_factor = 2.0 * std::abs(fit.coef[k0][0][1]);
  if (std::abs(out.det_factor - lam * std::abs(out.g)) > 1e-6 * out.det_factor)
    throw Error(ErrorCode::MethodDisagreement,
                "determinant limit disagrees with lambda*|g|");

  int flips = 0;
  for (size_t i = 1; i + 1 < arc.state.size(); ++i)
    if (arc.state[i][1] * arc.state[i + 1][1] < 0.0) ++flips;
  out.caustics = flips;
  return out;
}

}  // namespace bt
