#pragma once
#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "barriertop/errors.hpp"

namespace bt {

using cplx = std::complex<double>;

enum class Family { sech2_barrier, gaussian_barrier, anisotropic_gaussian, quadratic_model, user_table };

// monomial coef * x^beta, used for the quadratic family's polynomial bumps
// and for the homogeneous field pieces below
struct Monomial {
  double coef;
  std::vector<int> beta;
};

// barrier-shaped potential on R^n; every built-in family has closed-form
// derivatives, user_table falls back to finite differences
struct Potential {
  Family family = Family::sech2_barrier;
  int dim = 1;
  double height = 1.0;               // apex value E0
  std::vector<double> widths;        // sech2/gaussian: [w]; anisotropic: [a_1..a_n]; quadratic: [lambda_1..lambda_n]
  std::vector<Monomial> perturbation;  // quadratic_model only, degree >= 3 terms
  std::vector<double> table_x, table_v;  // user_table samples, strictly increasing x

  double sector_half_angle() const;  // admissible |arg| for complex rays
  double decay_exponent() const;     // +inf coded as large for super-exponential decay
  bool decays() const { return family != Family::quadratic_model; }
};

Potential make_sech2(double E0 = 1.0, double w = 1.0);
Potential make_gaussian(double E0 = 1.0, double w = 1.0, int dim = 1);
Potential make_anisotropic_gaussian(double E0, const std::vector<double>& a);
Potential make_quadratic(double E0, const std::vector<double>& lambda,
                         std::vector<Monomial> perturbation = {});
Potential make_table(std::vector<double> x, std::vector<double> v);

// evaluation; the complex overloads check the analyticity sector and, for
// sech2, proximity to the cosh poles on the imaginary axis
double eval_potential(const Potential& p, const Eigen::VectorXd& x);
cplx eval_potential(const Potential& p, const Eigen::VectorXcd& x);
double eval_potential1(const Potential& p, double x);
cplx eval_potential1(const Potential& p, cplx x);

Eigen::VectorXd grad_potential(const Potential& p, const Eigen::VectorXd& x);
Eigen::MatrixXd hess_potential(const Potential& p, const Eigen::VectorXd& x);

// height - V(x) without the cancellation that kills the direct difference
// near the apex; tables have no closed form and fall back to it
double barrier_deficit(const Potential& p, const Eigen::VectorXd& x);
double barrier_deficit1(const Potential& p, double x);

// nondegenerate maximum data: E0, apex, principal axes and the rates
// lambda_j > 0 with hessian eigenvalues -lambda_j^2/2
struct BarrierData {
  double energy;
  Eigen::VectorXd apex;
  Eigen::VectorXd lambda;   // ascending
  Eigen::MatrixXd axes;     // columns, orthonormal
  int dim() const { return int(lambda.size()); }
};
BarrierData barrier_data(const Potential& p);

// state convention everywhere: (x_1..x_n, xi_1..xi_n)
Eigen::VectorXd hamiltonian_field(const Potential& p, const Eigen::VectorXd& state);
Eigen::MatrixXd hamiltonian_jacobian(const Potential& p, const Eigen::VectorXd& state);

// degree-k homogeneous piece of the field at the apex, k >= 2; only the
// momentum components are nonzero and they depend on x alone
struct PolyField {
  int degree;
  std::vector<std::vector<Monomial>> comp;  // size 2n
};

// fields G_2..G_K in apex-centered principal coordinates
std::vector<PolyField> taylor_field(const Potential& p, int K);

// Taylor coefficient of V at the apex for multi-index beta (principal coords)
double taylor_coefficient(const Potential& p, const std::vector<int>& beta);

}  // namespace bt
