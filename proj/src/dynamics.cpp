#include "barriertop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "barriertop/lattice.hpp"
#include "barriertop/util.hpp"
#include "lapack.hpp"

namespace bt {

namespace {

// modulate the eigenbasis coefficients; real basis times complex data is
// cheapest as two real products per side
Eigen::VectorXcd apply_diagonal(const SpectralDecomposition& d,
                                const Eigen::VectorXcd& u,
                                const Eigen::VectorXcd& weights) {
  Eigen::VectorXd cr = d.vecs.transpose() * u.real().matrix();
  Eigen::VectorXd ci = d.vecs.transpose() * u.imag().matrix();
  Eigen::VectorXcd c =
      (cr.cast<cplx>() + cplx(0.0, 1.0) * ci.cast<cplx>()).array() * weights.array();
  Eigen::VectorXd outr = d.vecs * c.real().matrix();
  Eigen::VectorXd outi = d.vecs * c.imag().matrix();
  return outr.cast<cplx>() + cplx(0.0, 1.0) * outi.cast<cplx>();
}

Eigen::VectorXcd mask(const Eigen::VectorXd& chi, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out(v.size());
  for (long i = 0; i < v.size(); ++i) out[i] = chi[i] * v[i];
  return out;
}

}  // namespace

SpectralDecomposition decompose(const Potential& p, const Grid1D& grid, double h,
                                Disc disc) {
  ScaledOperator op = assemble_selfadjoint(p, grid, h, disc);
  if (op.dim() > 4096)
    throw Error(ErrorCode::ConfigError, "dense eigendecomposition capped at 4096");
  SpectralDecomposition d;
  d.grid = grid;
  d.h = h;
  lapack::eigh(op.matrix.real(), d.vals, d.vecs);
  return d;
}

Eigen::VectorXcd evolve(const SpectralDecomposition& d, const Eigen::VectorXcd& u0,
                        double t) {
  if (u0.size() != d.dim())
    throw Error(ErrorCode::ConfigError, "state and decomposition sizes disagree");
  Eigen::VectorXcd w(d.dim());
  for (long k = 0; k < d.dim(); ++k) w[k] = std::polar(1.0, -t * d.vals[k] / d.h);
  return apply_diagonal(d, u0, w);
}

Eigen::VectorXcd filter_state(const SpectralDecomposition& d, const BumpSpec& psi,
                              const Eigen::VectorXcd& u0) {
  if (u0.size() != d.dim())
    throw Error(ErrorCode::ConfigError, "state and decomposition sizes disagree");
  Eigen::VectorXcd w(d.dim());
  for (long k = 0; k < d.dim(); ++k) w[k] = bump_eval(psi, d.vals[k]);
  return apply_diagonal(d, u0, w);
}

Eigen::VectorXd sample_bump(const BumpSpec& chi, const Grid1D& grid, long dim) {
  int off = 0;
  if (dim == grid.N - 2)
    off = 1;
  else if (dim != grid.N)
    throw Error(ErrorCode::ConfigError, "dimension fits neither node layout");
  Eigen::VectorXd out(dim);
  for (long i = 0; i < dim; ++i) out[i] = bump_eval(chi, grid.node(int(i) + off));
  return out;
}

Eigen::VectorXcd expansion_sum(const BarrierData& b,
                               const std::vector<ResonanceHit>& hits,
                               const std::vector<RieszProjector>& projs,
                               const Eigen::VectorXd& chi,
                               const Eigen::VectorXcd& psi_u, double t, double h) {
  if (hits.size() != projs.size())
    throw Error(ErrorCode::ConfigError, "one projector per resonance");
  if (chi.size() != psi_u.size())
    throw Error(ErrorCode::ConfigError, "cutoff and state sizes disagree");
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(psi_u.size());
  Eigen::VectorXcd cut = mask(chi, psi_u);
  for (size_t k = 0; k < hits.size(); ++k) {
    if (!is_simple(b, hits[k].alpha))
      throw Error(ErrorCode::NonSimpleResonance, "degenerate width sum in the sum");
    if (projs[k].matrix.rows() != psi_u.size())
      throw Error(ErrorCode::ConfigError, "projector size disagrees with the state");
    cplx phase = std::exp(cplx(0.0, -t / h) * hits[k].z);
    acc += phase * mask(chi, projs[k].matrix * cut);
  }
  return acc;
}

ExpansionComparison compare_expansion(const PropagatorRun& run,
                                      const SpectralDecomposition& herm,
                                      const ScaledOperator& scaled,
                                      const Potential& pot,
                                      const std::vector<ResonanceHit>& hits,
                                      const std::vector<RieszProjector>& projs) {
  if (run.times.empty() || run.test_states.empty())
    throw Error(ErrorCode::ConfigError, "run needs times and test states");
  if (run.h != herm.h)
    throw Error(ErrorCode::ConfigError, "run and decomposition h disagree");
  if (hits.size() != projs.size())
    throw Error(ErrorCode::ConfigError, "one projector per resonance");
  // the cutoff identity chi Pi chi = chi Pi_theta chi needs the distortion
  // entirely outside supp chi
  if (scaled.theta > 0.0) {
    if (scaled.scaling.kind != Scaling::Kind::exterior)
      throw Error(ErrorCode::ConfigError, "distorted projectors need exterior scaling");
    if (std::abs(run.chi.center) + run.chi.support > scaled.scaling.R0)
      throw Error(ErrorCode::ConfigError, "spatial cutoff leaks into the distortion");
  }
  BarrierData b = barrier_data(pot);
  if (std::abs(run.psi.center - b.energy) + run.psi.support >
      0.15 * b.energy + 1e-12)
    throw Error(ErrorCode::ConfigError, "spectral window exceeds 0.15 E0 around E0");
  // throws when mu sits on a decay sum; the expansion is ill-defined there
  std::vector<PseudoResonance> depth = pseudo_resonances(b, run.h, run.mu);
  if (depth.size() != hits.size())
    throw Error(ErrorCode::ConfigError, "hit set does not exhaust the strip depth");
  for (size_t k = 0; k < hits.size(); ++k) {
    if (hits[k].alpha != depth[k].alpha)
      throw Error(ErrorCode::ConfigError, "hit order disagrees with the lattice");
    if (!is_simple(b, hits[k].alpha))
      throw Error(ErrorCode::NonSimpleResonance, "degenerate width sum in the strip");
  }

  Eigen::VectorXd chi = sample_bump(run.chi, herm.grid, herm.dim());
  long nb = herm.dim();
  long ns = scaled.dim();
  long off = 0;
  Eigen::VectorXd chi_s = chi;
  if (ns != nb) {
    // projectors may live on a nested sub-box: same spacing, aligned nodes.
    // the cutoff vanishes outside the sub-box, so restricting the filtered
    // state and embedding the masked terms back is exact, and the sub-box
    // keeps the absorber tail modes away from the resonance
    double dxb = herm.grid.dx();
    if (std::abs(scaled.grid.dx() - dxb) > 1e-12 * dxb)
      throw Error(ErrorCode::ConfigError, "sub-box spacing disagrees with the box");
    double sh = (herm.grid.L - scaled.grid.L) / dxb;
    off = std::llround(sh);
    if (off < 0 || std::abs(sh - double(off)) > 1e-9 || off + ns > nb)
      throw Error(ErrorCode::ConfigError, "sub-box nodes do not align with the box");
    chi_s = sample_bump(run.chi, scaled.grid, ns);
  }
  for (const RieszProjector& pr : projs)
    if (pr.matrix.rows() != ns)
      throw Error(ErrorCode::ConfigError,
                  "projector size disagrees with the scaled operator");
  ExpansionComparison cmp;
  cmp.times = run.times;
  size_t nt = run.times.size();
  cmp.error_curve.assign(nt, 0.0);
  cmp.rel_curve.assign(nt, 0.0);
  cmp.lhs_curve.assign(nt, 0.0);
  cmp.sum_curve.assign(nt, 0.0);

  for (const Eigen::VectorXcd& raw : run.test_states) {
    if (raw.size() != herm.dim())
      throw Error(ErrorCode::ConfigError, "test state size disagrees");
    Eigen::VectorXcd u0 = raw / raw.norm();
    Eigen::VectorXcd cut = mask(chi, filter_state(herm, run.psi, u0));
    std::vector<Eigen::VectorXcd> terms;
    terms.reserve(hits.size());
    Eigen::VectorXcd cs = cut.segment(off, ns);
    for (const RieszProjector& pr : projs) {
      Eigen::VectorXcd term = Eigen::VectorXcd::Zero(nb);
      term.segment(off, ns) = mask(chi_s, pr.matrix * cs);
      terms.push_back(term);
    }
    // disjoint writes per time index, so the samples can fan out
    parallel_for(int(nt), [&](int i) {
      double t = run.times[size_t(i)];
      Eigen::VectorXcd lhs = mask(chi, evolve(herm, cut, t));
      Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(herm.dim());
      for (size_t k = 0; k < hits.size(); ++k)
        sum += std::exp(cplx(0.0, -t / run.h) * hits[k].z) * terms[k];
      double err = (lhs - sum).norm();
      double ln = lhs.norm();
      size_t si = size_t(i);
      cmp.error_curve[si] = std::max(cmp.error_curve[si], err);
      cmp.lhs_curve[si] = std::max(cmp.lhs_curve[si], ln);
      cmp.sum_curve[si] = std::max(cmp.sum_curve[si], sum.norm());
      cmp.rel_curve[si] = std::max(cmp.rel_curve[si], err / std::max(ln, 1e-300));
    });
  }

  cmp.onset_time = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < nt; ++i)
    if (cmp.rel_curve[i] <= 0.05) {
      cmp.onset_time = run.times[i];
      break;
    }

  // log-linear decay fit past the onset scale, above the rounding floor
  double t_min = 2.0 * std::abs(std::log(run.h)) / b.lambda[0];
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (size_t i = 0; i < nt; ++i) {
    if (run.times[i] < t_min || cmp.error_curve[i] <= 1e-11) continue;
    double x = run.times[i], y = std::log(cmp.error_curve[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 4)
    throw Error(ErrorCode::NoExponentialRegime,
                "only " + std::to_string(m) + " usable samples past the onset scale");
  double det = m * sxx - sx * sx;
  double slope = (m * sxy - sx * sy) / det;
  double icept = (sy * sxx - sx * sxy) / det;
  double rms = 0.0;
  for (size_t i = 0; i < nt; ++i) {
    if (run.times[i] < t_min || cmp.error_curve[i] <= 1e-11) continue;
    double r = std::log(cmp.error_curve[i]) - (icept + slope * run.times[i]);
    rms += r * r;
  }
  rms = std::sqrt(rms / m);
  cmp.fitted_mu = -slope;
  cmp.fitted_K = icept / std::abs(std::log(run.h));
  if (cmp.fitted_mu <= 0.0 || rms > 0.5)
    throw Error(ErrorCode::NoExponentialRegime,
                "log error is not linear: rate " + std::to_string(cmp.fitted_mu) +
                    ", rms " + std::to_string(rms));
  return cmp;
}

}  // namespace bt
