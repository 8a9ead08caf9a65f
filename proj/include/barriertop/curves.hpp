#pragma once

#include <vector>

#include "barriertop/geometry.hpp"
#include "barriertop/model.hpp"

namespace bt {

// finite expandible series sum_k p_k(t) e^{-mu_k t}, p_k vector polynomials
struct Expansion {
  std::vector<double> mu;                          // ascending
  std::vector<std::vector<Eigen::VectorXd>> coef;  // [level][power] -> 2n components
};
Eigen::VectorXd eval_expansion(const Expansion& e, double t);
Expansion expansion_derivative(const Expansion& e);

struct LinearizationData {
  Eigen::MatrixXd Fp;        // [[0, 2I], [diag(lambda^2)/2, 0]]
  Eigen::VectorXd lambda;
  // projection onto Ker(Fp + mu), the stable eigenspace of rate mu
  Eigen::MatrixXd projector(double mu) const;
  // inverse of (Fp + mu) on Im(Fp + mu), extended by 0 on the kernel
  Eigen::MatrixXd partial_inverse(double mu) const;
};
LinearizationData linearize(const BarrierData& b);

struct Prescription {
  double mu = 0.0;          // one of the lambda_j
  Eigen::VectorXd gamma;    // in Ker(Fp + mu)
};

struct FormalCurve {
  Expansion expansion;
  std::vector<Prescription> prescribed;
  double truncation = 0.0;  // keep levels mu_k <= truncation
  int dim = 0;              // spatial dimension n
};

// stable-side series solution of gamma' = Fp gamma + sum G_k(gamma), levels in
// ascending order; resonant levels mu = lambda_j gain one t-power and carry the
// prescribed kernel data, everything else is forced
FormalCurve formal_curve(const LinearizationData& lin,
                         const std::vector<PolyField>& fields,
                         const std::vector<Prescription>& prescribed, double N);

// max coefficient norm of gamma' - Fp gamma - sum G_k(gamma) over levels <= N,
// computed in the series algebra; zero up to roundoff by construction
double formal_residual(const FormalCurve& c, const LinearizationData& lin,
                       const std::vector<PolyField>& fields);

struct RefinedCurve {
  FormalCurve formal;
  double N = 0.0;    // certified decay rate of the correction
  double t0 = 0.0;   // start of the certified window
  double dt = 0.0;
  double span = 0.0; // reported window is [t0, t0+span]; samples extend further
  std::vector<Eigen::VectorXd> r;      // correction samples on the uniform grid
  std::vector<double> picard_history;  // sup_t e^{Nt}|r_{j+1}-r_j|
  double residual = 0.0;               // sup |gamma' - H_p(gamma)|, fd check
  double envelope = 0.0;               // sup |r| e^{Nt}
  double time(size_t i) const { return t0 + double(i) * dt; }
  Eigen::VectorXd gamma(size_t i) const;
};

// fixed-point correction r(t) = -int_t^inf (H_p(rho+r) - H_p(rho) + R) with
// R the formal defect; contraction certified through the iteration history.
// needs N <= truncation so the defect actually decays at the claimed rate.
// residual is measured on all of [t0, t0+span]; the e^{Nt}-weighted history
// and envelope stop where the weight would only amplify roundoff, and a
// measured-decay certificate covers the rest.  the grid carries a 30/N pad
// past the window to feed the improper integrals
RefinedCurve picard_refine(const FormalCurve& formal, const Potential& p, double N,
                           double span, int j_max = 40, double tol = 1e-12,
                           double dt = 0.002);

// worst gap between the curve's samples and its own flow restarted every
// half-unit along the window; arcs short enough that the unstable shear
// cannot amplify representation noise past the tolerance
double flow_membership(const RefinedCurve& rc, const Potential& p, double arc = 1.0,
                       double rtol = 1e-12);

struct PrescriptionReport {
  double max_mismatch = 0.0;   // worst |Pi gamma_fit - prescribed|
  double fit_residual = 0.0;
  double r_envelope = 0.0;     // sup |r| e^{Nt}, must stay <= 1
  std::vector<Eigen::VectorXd> recovered;  // per lambda_j, kernel component
};
PrescriptionReport verify_prescription(const RefinedCurve& rc,
                                       const LinearizationData& lin);

}  // namespace bt
