#include "barriertop/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace bt {

namespace {

void enumerate_alpha(const Eigen::VectorXd& lambda, double depth, std::vector<int>& cur,
                     int pos, double acc, std::vector<PseudoResonance>& out) {
  if (pos == lambda.size()) {
    PseudoResonance pr;
    pr.alpha = cur;
    pr.width_sum = acc;
    out.push_back(std::move(pr));
    return;
  }
  for (int a = 0;; ++a) {
    double w = acc + (a + 0.5) * lambda[pos];
    if (w > depth) break;
    cur[size_t(pos)] = a;
    enumerate_alpha(lambda, depth, cur, pos + 1, w, out);
  }
}

}  // namespace

cplx lattice_point(const BarrierData& b, double h, const std::vector<int>& alpha) {
  if (int(alpha.size()) != b.dim())
    throw Error(ErrorCode::ConfigError, "alpha size mismatch");
  double w = 0.0;
  for (int j = 0; j < b.dim(); ++j) w += (alpha[size_t(j)] + 0.5) * b.lambda[j];
  return cplx(b.energy, -h * w);
}

std::vector<PseudoResonance> pseudo_resonances(const BarrierData& b, double h,
                                               double depth) {
  double lmin = b.lambda.minCoeff();
  if (depth < 0.5 * b.lambda.sum())
    throw Error(ErrorCode::ForbiddenRadius, "depth excludes even the ground point");
  std::vector<PseudoResonance> out;
  std::vector<int> cur(size_t(b.dim()), 0);
  enumerate_alpha(b.lambda, depth + 1e-8 * lmin, cur, 0, 0.0, out);
  for (const auto& pr : out)
    if (std::abs(pr.width_sum - depth) < 1e-8 * lmin)
      throw Error(ErrorCode::ForbiddenRadius,
                  "depth cuts through a lattice point; shift it");
  out.erase(std::remove_if(out.begin(), out.end(),
                           [&](const PseudoResonance& pr) { return pr.width_sum > depth; }),
            out.end());
  std::sort(out.begin(), out.end(), [](const PseudoResonance& a, const PseudoResonance& c) {
    if (a.width_sum != c.width_sum) return a.width_sum < c.width_sum;
    return a.alpha < c.alpha;
  });
  for (auto& pr : out) pr.z = lattice_point(b, h, pr.alpha);
  return out;
}

bool is_simple(const BarrierData& b, const std::vector<int>& alpha) {
  double w0 = 0.0;
  for (int j = 0; j < b.dim(); ++j) w0 += (alpha[size_t(j)] + 0.5) * b.lambda[j];
  double lmin = b.lambda.minCoeff();
  std::vector<PseudoResonance> all;
  std::vector<int> cur(size_t(b.dim()), 0);
  enumerate_alpha(b.lambda, w0 + 1e-8 * lmin, cur, 0, 0.0, all);
  int hits = 0;
  for (const auto& pr : all)
    if (std::abs(pr.width_sum - w0) < 1e-8 * lmin) ++hits;
  return hits == 1;
}

std::vector<double> mu_sequence(const Eigen::VectorXd& lambda, double mu_max) {
  double lmin = lambda.minCoeff();
  if (mu_max < lmin) return {};
  // breadth-first closure of {lambda_j} under addition, capped at mu_max
  std::vector<double> vals;
  std::vector<int> cur(size_t(lambda.size()), 0);
  std::vector<PseudoResonance> pts;
  enumerate_alpha(lambda, mu_max + 0.5 * lambda.sum() + 1e-9 * lmin, cur, 0, 0.0, pts);
  for (const auto& pr : pts) {
    double v = pr.width_sum - 0.5 * lambda.sum();
    if (v > 1e-10 * lmin && v <= mu_max + 1e-10 * lmin) vals.push_back(v);
  }
  std::sort(vals.begin(), vals.end());
  std::vector<double> out;
  for (double v : vals)
    if (out.empty() || v - out.back() > 1e-10 * lmin) out.push_back(v);
  return out;
}

namespace {

// best sum of degrees over decompositions of vals[k] into >= 2 smaller levels;
// -1 when none exists
int best_decomposition(const std::vector<double>& vals, const std::vector<int>& deg,
                       size_t k, double tol) {
  int best = -1;
  // parts chosen non-increasing to avoid revisiting permutations
  std::function<void(double, size_t, int, int)> dfs = [&](double remaining,
                                                          size_t max_part, int count,
                                                          int score) {
    if (remaining < tol) {
      if (remaining > -tol && count >= 2) best = std::max(best, score);
      return;
    }
    for (size_t i = std::min(max_part, k); i-- > 0;) {
      if (vals[i] > remaining + tol) continue;
      dfs(remaining - vals[i], i + 1, count + 1, score + deg[i]);
    }
  };
  dfs(vals[k], k, 0, 0);
  return best;
}

}  // namespace

int expansion_degree(const Eigen::VectorXd& lambda, double mu) {
  double lmin = lambda.minCoeff();
  double tol = 1e-8 * lmin;
  auto vals = mu_sequence(lambda, mu);
  if (vals.empty() || std::abs(vals.back() - mu) > tol)
    throw Error(ErrorCode::ConfigError, "mu is not an excitation level");
  std::vector<int> deg(vals.size(), 0);
  for (size_t k = 0; k < vals.size(); ++k) {
    int n = best_decomposition(vals, deg, k, tol);
    bool primitive = false;
    for (long j = 0; j < lambda.size(); ++j)
      if (std::abs(vals[k] - lambda[j]) < tol) primitive = true;
    if (primitive)
      deg[k] = n >= 0 ? n + 1 : 0;
    else
      deg[k] = std::max(n, 0);
  }
  return deg.back();
}

}  // namespace bt
