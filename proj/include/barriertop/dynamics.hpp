#pragma once

#include <vector>

#include "barriertop/model.hpp"
#include "barriertop/scaled_operator.hpp"

namespace bt {

// orthonormal eigenpairs of a Hermitian assembly; one diagonalization buys
// exact unitary evolution and spectral filtering for a whole run
struct SpectralDecomposition {
  Grid1D grid{10.0, 1001};
  double h = 0.0;
  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;  // orthonormal columns over the grid unknowns
  long dim() const { return vals.size(); }
};

// cut-off propagation experiment: chi is a spatial bump, psi a spectral one,
// mu the decay-sum depth of the resonance set kept in the expansion
struct PropagatorRun {
  double h = 0.0;
  std::vector<double> times;
  BumpSpec chi;
  BumpSpec psi;
  std::vector<Eigen::VectorXcd> test_states;
  double mu = 0.0;
};

struct ExpansionComparison {
  std::vector<double> times;
  std::vector<double> error_curve;  // max over states of |lhs - sum| / |u0|
  std::vector<double> rel_curve;    // max over states of |lhs - sum| / |lhs|
  std::vector<double> lhs_curve;    // max over states of |lhs| / |u0|
  std::vector<double> sum_curve;    // max over states of |sum| / |u0|
  double fitted_mu = 0.0;           // decay rate from the log-linear error fit
  double fitted_K = 0.0;            // fit intercept over |ln h|
  double onset_time = 0.0;          // first sampled t with rel_curve <= 0.05
};

SpectralDecomposition decompose(const Potential& p, const Grid1D& grid, double h,
                                Disc disc = Disc::fd4);

// e^{-itP/h} u0 through the eigenbasis; unitary to rounding
Eigen::VectorXcd evolve(const SpectralDecomposition& d, const Eigen::VectorXcd& u0,
                        double t);

// psi(P) u0 through the same eigenbasis
Eigen::VectorXcd filter_state(const SpectralDecomposition& d, const BumpSpec& psi,
                              const Eigen::VectorXcd& u0);

// chi at the nodes carrying the unknowns: all of them for a periodic
// operator, the interior ones otherwise
Eigen::VectorXd sample_bump(const BumpSpec& chi, const Grid1D& grid, long dim);

// sum over hits of e^{-itz/h} chi Pi chi psi_u, with psi_u already filtered
Eigen::VectorXcd expansion_sum(const BarrierData& b,
                               const std::vector<ResonanceHit>& hits,
                               const std::vector<RieszProjector>& projs,
                               const Eigen::VectorXd& chi,
                               const Eigen::VectorXcd& psi_u, double t, double h);

// error curves of chi e^{-itP/h} chi psi(P) u against the resonance sum,
// with the log-linear decay fit restricted to t >= 2|ln h|/lambda_1
ExpansionComparison compare_expansion(const PropagatorRun& run,
                                      const SpectralDecomposition& herm,
                                      const ScaledOperator& scaled,
                                      const Potential& pot,
                                      const std::vector<ResonanceHit>& hits,
                                      const std::vector<RieszProjector>& projs);

}  // namespace bt
