#pragma once

#include <string>
#include <vector>

#include "barriertop/lattice.hpp"
#include "barriertop/model.hpp"

namespace bt {

// uniform grid on [-L, L], both walls included; operators act on the
// interior nodes (Dirichlet) except fourier, which wraps all N nodes with
// period N*dx
struct Grid1D {
  double L = 10.0;
  int N = 1001;
  Grid1D(double half_length, int points);
  double dx() const { return 2.0 * L / (N - 1); }
  double node(int i) const { return -L + dx() * i; }
};

enum class Disc { fd2, fd4, fourier };

struct Scaling {
  enum class Kind { uniform, exterior } kind = Kind::uniform;
  double R0 = 0.0;     // exterior: contour stays real for |x| <= R0
  double width = 1.0;  // exterior: ramp reaches F = x at R0 + width
  static Scaling uniform() { return {}; }
  static Scaling exterior(double R0, double width = 1.0) {
    Scaling s;
    s.kind = Kind::exterior;
    s.R0 = R0;
    s.width = width;
    return s;
  }
};

// discretized P_theta; theta = 0 holds the self-adjoint assembly. weight
// carries the quadrature weights of the deformed contour (dx * gamma'), the
// diagonal W with W*matrix symmetric. band is the stencil half-bandwidth,
// -1 for dense rows
struct ScaledOperator {
  Grid1D grid{10.0, 1001};
  double h = 0.1;
  double theta = 0.0;
  Scaling scaling;
  Disc disc = Disc::fd4;
  Eigen::MatrixXcd matrix;
  Eigen::VectorXcd weight;
  int band = 2;
  std::vector<std::string> warnings;
  long dim() const { return matrix.rows(); }
};

struct ResonanceHit {
  cplx z;
  std::vector<int> alpha;
  Eigen::VectorXcd right_vector;
  double residual = 0.0;
  double match_distance = 0.0;  // |z - shift| / h
};

struct RieszProjector {
  cplx center;
  double radius = 0.0;
  int n_quad = 0;
  Eigen::MatrixXcd matrix;
  double rank_gap = 0.0;  // sigma_2 / sigma_1
};

// smooth cutoff, identically 1 on |E - center| <= plateau and 0 outside
// |E - center| >= support
struct BumpSpec {
  double center = 1.0;
  double plateau = 0.1;
  double support = 0.2;
};
double bump_eval(const BumpSpec& psi, double e);

// L = 10 * max(1, 1/sqrt(lambda_1)) and dx under the h/(4 sqrt(E0)) warning
// threshold
Grid1D suggest_grid(const Potential& p, double h);

ScaledOperator assemble_selfadjoint(const Potential& p, const Grid1D& grid, double h,
                                    Disc disc = Disc::fd4);
ScaledOperator assemble_scaled(const Potential& p, const Grid1D& grid, double h,
                               double theta, Scaling scaling = Scaling::uniform(),
                               Disc disc = Disc::fd4);

// shift-invert per lattice shift, deduplicated by match quality
std::vector<ResonanceHit> find_resonances(const ScaledOperator& op,
                                          const std::vector<PseudoResonance>& shifts,
                                          double tol = 1e-10);

// 1/sigma_min(P_theta - z), capped at 1e12 near singularity
double resolvent_norm(const ScaledOperator& op, cplx z);

// counterclockwise trapezoid contour; the returned matrix is the refined
// half of an internal node-doubling pair, so n_quad comes back doubled
RieszProjector riesz_projector(const ScaledOperator& op, cplx center, double radius,
                               int n_quad = 32);

// psi(P) for the self-adjoint assembly by full eigendecomposition
Eigen::MatrixXd functional_calculus(const ScaledOperator& op, const BumpSpec& psi);

// full spectrum oracle (dense eigensolve)
Eigen::VectorXcd dense_eigenvalues(const ScaledOperator& op);

}  // namespace bt
