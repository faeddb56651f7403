#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ncdel {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

/// Malformed input: bad arguments, dimension mismatches, violated preconditions.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to deliver a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Singular values straddle the rank threshold; the rank is not guessed.
class RankAmbiguityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

template <typename Derived>
double hermitian_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// (A - A*) / 2i, always returned exactly hermitian.
template <typename Derived>
CMatrix imag_part(const Eigen::MatrixBase<Derived>& a) {
  CMatrix im = (a - a.adjoint()) / cplx(0.0, 2.0);
  return (im + im.adjoint()) * 0.5;
}

template <typename Derived>
double min_hermitian_eigenvalue(const Eigen::MatrixBase<Derived>& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.derived(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <typename Derived>
double operator_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a.derived());
  return svd.singularValues()(0);
}

template <typename Derived>
double smallest_singular_value(const Eigen::MatrixBase<Derived>& a) {
  Eigen::JacobiSVD<CMatrix> svd(a.derived());
  return svd.singularValues()(svd.singularValues().size() - 1);
}

inline CMatrix unit_j(Eigen::Index m) {
  CMatrix j = CMatrix::Zero(m, m);
  j(0, 0) = 1.0;
  return j;
}

}  // namespace ncdel
