#include "barriertop/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "barriertop/geometry.hpp"
#include "barriertop/lattice.hpp"
#include "barriertop/util.hpp"

namespace bt {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

std::vector<int> window_indices(const ScaledOperator& op, double half) {
  std::vector<int> idx;
  for (long i = 0; i < op.dim(); ++i)
    if (std::abs(op.grid.node(int(i) + 1)) <= half) idx.push_back(int(i));
  return idx;
}

Eigen::VectorXcd random_probe(long n, uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXcd v(n);
  for (long i = 0; i < n; ++i) v[i] = cplx(rng.uniform(), rng.uniform());
  return v;
}

}  // namespace

cplx predicted_constant(const std::vector<int>& alpha, const Eigen::VectorXd& lambda,
                        int n, double h) {
  if (int(alpha.size()) != n || lambda.size() != n)
    throw Error(ErrorCode::ConfigError, "alpha and lambda must have length n");
  double order = 0.0, fact = 1.0, prod = 1.0;
  for (int j = 0; j < n; ++j) {
    order += alpha[size_t(j)];
    for (int k = 2; k <= alpha[size_t(j)]; ++k) fact *= k;
    prod *= std::pow(lambda[j], alpha[size_t(j)] + 0.5);
  }
  double mod = std::pow(h, -(order + 0.5 * n)) / (fact * std::pow(2.0 * kPi, 0.5 * n)) * prod;
  double phase = -0.5 * kPi * (order + 0.5 * n);
  return std::polar(mod, phase);
}

ResonantState extract_state(const ScaledOperator& op, const RieszProjector& proj,
                            const Potential& pot, const std::vector<int>& alpha) {
  if (proj.rank_gap > 1e-6)
    throw Error(ErrorCode::RankDeficiency,
                "projector rank gap " + std::to_string(proj.rank_gap));
  BarrierData b = barrier_data(pot);
  if (!is_simple(b, alpha))
    throw Error(ErrorCode::NonSimpleResonance, "width sum is degenerate");
  double half = std::cbrt(op.h);
  if (op.theta > 0.0 && (op.scaling.kind != Scaling::Kind::exterior ||
                         op.scaling.R0 <= half))
    throw Error(ErrorCode::ConfigError,
                "Taylor window needs the undistorted segment of an exterior contour");

  // the rank-one kernel makes the dominant factor a fixed point of the
  // projector itself
  long n = op.dim();
  Eigen::VectorXcd f = random_probe(n, 0xfacell);
  f /= f.norm();
  for (int it = 0; it < 4; ++it) {
    f = proj.matrix * f;
    double nf = f.norm();
    if (nf < 1e-14)
      throw Error(ErrorCode::RankDeficiency, "projector annihilates the probe");
    f /= nf;
  }
  Eigen::VectorXcd mf = op.matrix * f;
  cplx z = f.dot(mf);
  double resid = (mf - z * f).norm();

  // Taylor normalization of f e^{-i phi_+/h} on the window
  std::vector<int> idx = window_indices(op, half);
  int deg = alpha[0] + 2;
  if (int(idx.size()) < 3 * (deg + 1))
    throw Error(ErrorCode::WindowTooShort,
                "only " + std::to_string(idx.size()) + " nodes inside h^{1/3}");
  Eigen::VectorXd xs(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) xs[long(k)] = op.grid.node(idx[k] + 1);
  Eigen::VectorXd phi = eikonal_phase_batch(pot, xs, +1);
  Eigen::VectorXcd d(xs.size());
  double fsup = 0.0;
  for (long k = 0; k < xs.size(); ++k) {
    d[k] = f[idx[size_t(k)]] * std::exp(cplx(0.0, -phi[k] / op.h));
    fsup = std::max(fsup, std::abs(f[idx[size_t(k)]]));
  }
  // scale abscissae by the window so the Vandermonde stays well conditioned
  Eigen::MatrixXcd vand(xs.size(), deg + 1);
  for (long k = 0; k < xs.size(); ++k) {
    double u = xs[k] / half;
    double pw = 1.0;
    for (int j = 0; j <= deg; ++j) {
      vand(k, j) = pw;
      pw *= u;
    }
  }
  Eigen::VectorXcd coef = vand.householderQr().solve(d);
  cplx ca = coef[alpha[0]] / std::pow(half, alpha[0]);
  if (std::abs(ca) < 1e-6 * fsup)
    throw Error(ErrorCode::NormalizationDegenerate,
                "alpha coefficient " + std::to_string(std::abs(ca)) + " below 1e-6 of " +
                    std::to_string(fsup));
  f /= ca;

  ResonantState st;
  st.samples = std::move(f);
  st.h = op.h;
  st.alpha = alpha;
  st.z = z;
  st.norm_coef = ca;
  st.window = half;
  double sup = 0.0;
  for (long k = 0; k < xs.size(); ++k)
    sup = std::max(sup, std::abs(d[k] / ca - std::pow(xs[k], alpha[0])));
  st.window_sup = sup;
  st.residual = resid;
  return st;
}

ProjectionConstant extract_constant(const ScaledOperator& op, const RieszProjector& proj,
                                    const ResonantState& f, const BarrierData& b) {
  long n = op.dim();
  const Eigen::VectorXcd& fv = f.samples;

  // kernel diagonal over the strongest samples; K_ij = Pi_ij / w_j
  std::vector<long> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](long a, long c) { return std::abs(fv[a]) > std::abs(fv[c]); });
  long keep = std::max<long>(8, n / 10);
  cplx acc = 0.0;
  for (long k = 0; k < keep; ++k) {
    long i = order[size_t(k)];
    acc += proj.matrix(i, i) / op.weight[i] / (fv[i] * fv[i]);
  }
  cplx c = acc / double(keep);

  // rank-one action check: Pi v = c (v, conj f) f with the contour pairing
  double worst = 0.0;
  for (int t = 0; t < 8; ++t) {
    Eigen::VectorXcd v = random_probe(n, 0xc0115 + uint64_t(t));
    Eigen::VectorXcd lhs = proj.matrix * v;
    cplx pair = (op.weight.array() * v.array() * fv.array()).sum();
    double r = (lhs - c * pair * fv).norm() / lhs.norm();
    worst = std::max(worst, r);
  }
  if (worst > 1e-4)
    throw Error(ErrorCode::InconsistentFactorization,
                "rank-one reconstruction off by " + std::to_string(worst));

  ProjectionConstant pc;
  pc.c_num = c;
  pc.h = f.h;
  pc.alpha = f.alpha;
  pc.predicted = predicted_constant(f.alpha, b.lambda, b.dim(), f.h);
  pc.modulus_ratio = std::abs(c) / std::abs(pc.predicted);
  pc.phase_gap = std::abs(wrap_angle(std::arg(c) - std::arg(pc.predicted)));
  pc.consistency = worst;
  return pc;
}

OutgoingReport verify_outgoing(const Potential& p, const Grid1D& grid, double h,
                               const Eigen::VectorXcd& f, double E0, double R) {
  if (f.size() != grid.N - 2)
    throw Error(ErrorCode::ConfigError, "state and grid sizes disagree");
  double half = std::clamp(10.0 * h, 0.5, 1.5);
  OutgoingReport rep;
  for (int side : {+1, -1}) {
    double c0 = side * R;
    std::vector<int> idx;
    for (int i = 0; i < grid.N - 2; ++i)
      if (std::abs(grid.node(i + 1) - c0) <= half) idx.push_back(i);
    if (idx.size() < 16)
      throw Error(ErrorCode::ConfigError, "side window has too few nodes");
    Eigen::VectorXd k(long(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) {
      double ek = E0 - eval_potential1(p, grid.node(idx[j] + 1));
      if (ek <= 0.01 * std::abs(E0))
        throw Error(ErrorCode::WindowInClassicallyForbiddenRegion,
                    "E0 - V = " + std::to_string(ek) + " inside the side window");
      k[long(j)] = std::sqrt(ek);
    }
    // cumulative action along the window, then the two WKB columns
    Eigen::VectorXd s(k.size());
    s[0] = 0.0;
    for (long j = 1; j < k.size(); ++j) {
      double dx = grid.node(idx[size_t(j)] + 1) - grid.node(idx[size_t(j - 1)] + 1);
      s[j] = s[j - 1] + 0.5 * dx * (k[j] + k[j - 1]);
    }
    Eigen::MatrixXcd cols(k.size(), 2);  // column 0 rightward, 1 leftward
    Eigen::VectorXcd fw(k.size());
    for (long j = 0; j < k.size(); ++j) {
      double amp = 1.0 / std::sqrt(k[j]);
      cols(j, 0) = amp * std::exp(cplx(0.0, s[j] / h));
      cols(j, 1) = amp * std::exp(cplx(0.0, -s[j] / h));
      fw[j] = f[idx[size_t(j)]];
    }
    Eigen::Vector2cd a = cols.householderQr().solve(fw);
    double er = (cols.col(0) * a[0]).squaredNorm();
    double el = (cols.col(1) * a[1]).squaredNorm();
    double ein = side > 0 ? el : er;   // moving toward the barrier
    double eout = side > 0 ? er : el;  // moving away
    rep.incoming_fraction = std::max(rep.incoming_fraction, ein / (ein + eout));
    rep.outgoing_fraction = std::max(rep.outgoing_fraction, eout / (ein + eout));
    rep.fit_residual =
        std::max(rep.fit_residual, (cols * a - fw).norm() / fw.norm());
  }
  return rep;
}

}  // namespace bt
