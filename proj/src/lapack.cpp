#include "lapack.hpp"

#include <lapacke.h>

#include <algorithm>

#include "barriertop/errors.hpp"

namespace bt::lapack {

namespace {
lapack_complex_double* ptr(MatrixXcd& m) {
  return reinterpret_cast<lapack_complex_double*>(m.data());
}
lapack_complex_double* ptr(VectorXcd& v) {
  return reinterpret_cast<lapack_complex_double*>(v.data());
}
}  // namespace

VectorXcd eigenvalues(const MatrixXcd& a) {
  MatrixXcd work = a;
  int n = int(a.rows());
  VectorXcd vals(n);
  int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, ptr(work), n, ptr(vals),
                           nullptr, 1, nullptr, 1);
  if (info != 0)
    throw Error(ErrorCode::NoConvergence, "zgeev info=" + std::to_string(info));
  return vals;
}

void eigensystem(const MatrixXcd& a, VectorXcd& vals, MatrixXcd& vecs) {
  MatrixXcd work = a;
  int n = int(a.rows());
  vals.resize(n);
  vecs.resize(n, n);
  int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, ptr(work), n, ptr(vals),
                           nullptr, 1, ptr(vecs), n);
  if (info != 0)
    throw Error(ErrorCode::NoConvergence, "zgeev info=" + std::to_string(info));
}

void eigh(const MatrixXd& a, VectorXd& vals, MatrixXd& vecs) {
  vecs = a;
  int n = int(a.rows());
  vals.resize(n);
  int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, vecs.data(), n, vals.data());
  if (info != 0)
    throw Error(ErrorCode::NoConvergence, "dsyevd info=" + std::to_string(info));
}

Lu::Lu(MatrixXcd a) : f(std::move(a)), piv(f.rows()) {
  int n = int(f.rows());
  int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, ptr(f), n, piv.data());
  if (info < 0)
    throw Error(ErrorCode::NoConvergence, "zgetrf info=" + std::to_string(info));
  // info > 0 marks an exactly singular pivot; keep factors, solves will blow up
  // visibly and callers cap or detect that
}

VectorXcd Lu::solve(const VectorXcd& b, bool adjoint) const {
  VectorXcd x = b;
  int n = int(f.rows());
  int info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, adjoint ? 'C' : 'N', n, 1,
                            reinterpret_cast<const lapack_complex_double*>(f.data()), n,
                            piv.data(), ptr(x), n);
  if (info != 0)
    throw Error(ErrorCode::NoConvergence, "zgetrs info=" + std::to_string(info));
  return x;
}

MatrixXcd Lu::solve_mat(const MatrixXcd& b, bool adjoint) const {
  MatrixXcd x = b;
  int n = int(f.rows());
  int info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, adjoint ? 'C' : 'N', n, int(b.cols()),
                            reinterpret_cast<const lapack_complex_double*>(f.data()), n,
                            piv.data(), ptr(x), n);
  if (info != 0)
    throw Error(ErrorCode::NoConvergence, "zgetrs info=" + std::to_string(info));
  return x;
}

MatrixXcd Lu::inverse() const {
  MatrixXcd inv = f;
  int n = int(inv.rows());
  int info = LAPACKE_zgetri(LAPACK_COL_MAJOR, n, ptr(inv), n, piv.data());
  if (info != 0)
    throw Error(ErrorCode::NoConvergence, "zgetri info=" + std::to_string(info));
  return inv;
}

BandedLu::BandedLu(const MatrixXcd& a, int kd_) : n(int(a.rows())), kd(kd_), piv(n) {
  // zgbtrf wants kl extra rows above the band for the fill-in of U
  int ldab = 3 * kd + 1;
  ab = MatrixXcd::Zero(ldab, n);
  for (int j = 0; j < n; ++j)
    for (int i = std::max(0, j - kd); i <= std::min(n - 1, j + kd); ++i)
      ab(2 * kd + i - j, j) = a(i, j);
  int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kd, kd, ptr(ab), ldab, piv.data());
  if (info < 0)
    throw Error(ErrorCode::NoConvergence, "zgbtrf info=" + std::to_string(info));
  // info > 0 handled as in Lu: singular pivots surface as non-finite solves
}

VectorXcd BandedLu::solve(const VectorXcd& b, bool adjoint) const {
  VectorXcd x = b;
  int info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, adjoint ? 'C' : 'N', n, kd, kd, 1,
                            reinterpret_cast<const lapack_complex_double*>(ab.data()),
                            int(ab.rows()), piv.data(), ptr(x), n);
  if (info != 0)
    throw Error(ErrorCode::NoConvergence, "zgbtrs info=" + std::to_string(info));
  return x;
}

MatrixXcd BandedLu::solve_mat(const MatrixXcd& b, bool adjoint) const {
  MatrixXcd x = b;
  int info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, adjoint ? 'C' : 'N', n, kd, kd, int(b.cols()),
                            reinterpret_cast<const lapack_complex_double*>(ab.data()),
                            int(ab.rows()), piv.data(), ptr(x), n);
  if (info != 0)
    throw Error(ErrorCode::NoConvergence, "zgbtrs info=" + std::to_string(info));
  return x;
}

}  // namespace bt::lapack
