#pragma once

#include <vector>

#include "barriertop/model.hpp"

namespace bt {

// lattice point E0 - i h sum_j (alpha_j + 1/2) lambda_j
struct PseudoResonance {
  std::vector<int> alpha;
  double width_sum = 0.0;  // sum (alpha_j + 1/2) lambda_j, so z = E0 - i h width_sum
  cplx z;
};

cplx lattice_point(const BarrierData& b, double h, const std::vector<int>& alpha);

// all lattice points with width_sum <= depth, sorted by width_sum then alpha.
// depth must stay clear of the lattice by 1e-8*min(lambda); a cut through a
// point makes the enumeration ill-defined.
std::vector<PseudoResonance> pseudo_resonances(const BarrierData& b, double h,
                                               double depth);

// true when alpha is the unique multi-index attaining its width_sum
// (coincidences resolved at 1e-8*min(lambda))
bool is_simple(const BarrierData& b, const std::vector<int>& alpha);

// distinct positive values of sum alpha_j lambda_j up to mu_max, ascending,
// merged at 1e-10*min(lambda)
std::vector<double> mu_sequence(const Eigen::VectorXd& lambda, double mu_max);

// highest power of t multiplying e^{-mu t} in time expansions along the
// outgoing manifold: recursion over decompositions of mu into smaller levels,
// +1 whenever mu hits a lambda_j that also decomposes
int expansion_degree(const Eigen::VectorXd& lambda, double mu);

}  // namespace bt
