#pragma once

#include <vector>

#include "barriertop/model.hpp"

namespace bt {

struct Trajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> state;  // (x, xi), length 2*dim
};

// phase of the branch xi = sign * sgn(x) * sqrt(E0 - V) through the apex; 1-d
double eikonal_slope(const Potential& p, double x, int sign);
double eikonal_phase(const Potential& p, double x, int sign);
// cumulative quadrature over sorted abscissae, one pass
Eigen::VectorXd eikonal_phase_batch(const Potential& p, const Eigen::VectorXd& xs,
                                    int sign);

// adaptive RK45 on the Hamilton field, accepted steps only
Trajectory flow(const Potential& p, const Eigen::VectorXd& s0, double t0, double t1,
                double rtol = 1e-11);

// trajectory restricted to the stable/unstable graph branch through x_ref; 1-d.
// sign=-1 rides the incoming manifold (decays as t -> +inf), sign=+1 the
// outgoing one (decays as t -> -inf); integration toward the apex is the
// stable direction either way.
Trajectory manifold_trajectory(const Potential& p, double x_ref, int sign, double t0,
                               double t1, double rtol = 1e-11);

// least squares against sum_k sum_d c_{k,d} t^d e^{-mu_k t} on the window where
// the state norm sits in [lo, hi]; rows weighted by 1/|state| so every decade
// counts equally
struct ExpansionFit {
  std::vector<double> mu;
  std::vector<int> degree;
  std::vector<std::vector<Eigen::VectorXd>> coef;  // [level][power] -> components
  double residual = 0.0;                           // weighted relative rms
  double t_lo = 0.0, t_hi = 0.0;
  int samples = 0;
};
ExpansionFit fit_expansion(const Trajectory& traj, const Eigen::VectorXd& lambda,
                           double mu_max, double lo = 1e-8, double hi = 1e-2);

// one asymptotic half-trajectory of the barrier: side=-1 comes from / goes to
// x = -inf, side=+1 the right end; sign as in manifold_trajectory
struct ScatteringGeometry {
  double action = 0.0;      // int (sqrt(E0-V) - sqrt(E0)) dx over the half-line
  double g = 0.0;           // x(t) ~ g e^{-lambda|t|} approaching the apex
  double det_factor = 0.0;  // lim |dx/dt| e^{lambda|t|}; lambda*|g| in 1-d
  int caustics = 0;
  double speed = 0.0;       // asymptotic |dx/dt| away from the barrier
};
ScatteringGeometry scattering_geometry(const Potential& p, int sign, int side);

}  // namespace bt
