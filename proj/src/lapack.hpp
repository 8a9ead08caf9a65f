#pragma once
#include <Eigen/Dense>
#include <complex>
#include <vector>

// thin lapacke layer for the dense hot paths; everything here is column-major
namespace bt::lapack {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// all eigenvalues of a general complex matrix (zgeev), unordered
VectorXcd eigenvalues(const MatrixXcd& a);

// eigenvalues + right eigenvectors
void eigensystem(const MatrixXcd& a, VectorXcd& vals, MatrixXcd& vecs);

// full symmetric eigendecomposition (dsyevd), ascending
void eigh(const MatrixXd& a, VectorXd& vals, MatrixXd& vecs);

// in-place LU of a general complex matrix; solve against factors, possibly conjugate-transposed
struct Lu {
  MatrixXcd f;
  std::vector<int> piv;
  explicit Lu(MatrixXcd a);
  VectorXcd solve(const VectorXcd& b, bool adjoint = false) const;
  MatrixXcd solve_mat(const MatrixXcd& b, bool adjoint = false) const;
  MatrixXcd inverse() const;
};

// banded LU (zgbtrf) of a dense matrix with half-bandwidth kd on both sides;
// entries outside the band are ignored. solves cost O(n kd) each
struct BandedLu {
  int n = 0;
  int kd = 0;
  MatrixXcd ab;  // lapack band storage, 3 kd + 1 rows
  std::vector<int> piv;
  BandedLu(const MatrixXcd& a, int kd);
  VectorXcd solve(const VectorXcd& b, bool adjoint = false) const;
  MatrixXcd solve_mat(const MatrixXcd& b, bool adjoint = false) const;
};

}  // namespace bt::lapack
