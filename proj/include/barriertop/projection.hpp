#pragma once

#include <vector>

#include "barriertop/model.hpp"
#include "barriertop/scaled_operator.hpp"

namespace bt {

// resonant grid function normalized so the fitted alpha-th Taylor
// coefficient of f e^{-i phi_+/h} at the apex equals +1
struct ResonantState {
  Eigen::VectorXcd samples;
  double h = 0.0;
  std::vector<int> alpha;
  cplx z;                   // Rayleigh value of the projected state
  cplx norm_coef;           // fitted coefficient the raw factor was divided by
  double window = 0.0;      // h^{1/3} half-width of the Taylor window
  double window_sup = 0.0;  // sup |f e^{-i phi/h} - x^alpha| over the window
  double residual = 0.0;    // ||(P_theta - z) f|| / ||f||
};

struct ProjectionConstant {
  cplx c_num;
  double h = 0.0;
  std::vector<int> alpha;
  cplx predicted;
  double modulus_ratio = 0.0;  // |c_num| / |predicted|
  double phase_gap = 0.0;      // wrapped |arg c_num - arg predicted|
  double consistency = 0.0;    // worst rank-one reconstruction error on probes
};

struct OutgoingReport {
  double incoming_fraction = 0.0;  // worst of the two side windows
  double outgoing_fraction = 0.0;
  double fit_residual = 0.0;
};

// dominant rank-one factor of the projector, Taylor-normalized on the
// window |x| <= h^{1/3}; a scaled operator must leave that window on the
// undistorted segment (exterior scaling)
ResonantState extract_state(const ScaledOperator& op, const RieszProjector& proj,
                            const Potential& pot, const std::vector<int>& alpha);

// c with Pi = c (., conj f) f, averaged over the top-|f| decile of the
// diagonal kernel, cross-checked on random vectors
ProjectionConstant extract_constant(const ScaledOperator& op, const RieszProjector& proj,
                                    const ResonantState& f, const BarrierData& b);

cplx predicted_constant(const std::vector<int>& alpha, const Eigen::VectorXd& lambda,
                        int n, double h);

// WKB branch content of f on windows around +-R; incoming means moving
// toward the barrier on that side
OutgoingReport verify_outgoing(const Potential& p, const Grid1D& grid, double h,
                               const Eigen::VectorXcd& f, double E0, double R);

}  // namespace bt
