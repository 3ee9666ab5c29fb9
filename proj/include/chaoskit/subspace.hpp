#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <stdexcept>

#include "chaoskit/sym_tensor.hpp"

namespace chaoskit {

/// Orthonormal basis of a linear subspace of R^ambient, held column-wise.
/// rank == 0 encodes the zero subspace (matrix with zero columns).
template <typename Scalar = double>
class SubspaceBasis {
 public:
  SubspaceBasis() = default;

  explicit SubspaceBasis(MatrixX<Scalar> basis) : basis_(std::move(basis)) {
    if (basis_.cols() > 0) {
      MatrixX<Scalar> gram = basis_.transpose() * basis_;
      gram -= MatrixX<Scalar>::Identity(basis_.cols(), basis_.cols());
      if (gram.cwiseAbs().maxCoeff() > Scalar(1e-10))
        throw std::invalid_argument("SubspaceBasis: columns are not orthonormal");
    }
  }

  Eigen::Index ambient() const { return basis_.rows(); }
  Eigen::Index rank() const { return basis_.cols(); }
  const MatrixX<Scalar>& basis() const { return basis_; }

  /// Orthogonal projection of v onto the subspace.
  VectorX<Scalar> project(const VectorX<Scalar>& v) const {
    if (v.size() != ambient())
      throw std::invalid_argument("SubspaceBasis: ambient dimension mismatch");
    if (rank() == 0) return VectorX<Scalar>::Zero(v.size());
    return basis_ * (basis_.transpose() * v);
  }

 private:
  MatrixX<Scalar> basis_;
};

using SubspaceBasisd = SubspaceBasis<double>;

/// Orthonormal basis of the column space of m via SVD.  Singular values below
/// tol * sigma_max are treated as zero; an all-zero or empty m yields the zero
/// subspace.
template <typename Scalar>
SubspaceBasis<Scalar> orthonormal_range(const MatrixX<Scalar>& m, double tol = 1e-10) {
  if (tol <= 0) throw std::invalid_argument("orthonormal_range: tol must be > 0");
  if (m.rows() < 1) throw std::invalid_argument("orthonormal_range: empty ambient space");
  if (m.cols() == 0) return SubspaceBasis<Scalar>(MatrixX<Scalar>(m.rows(), 0));
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const Scalar cutoff = sv.size() > 0 ? sv(0) * Scalar(tol) : Scalar(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > Scalar(0)) ++rank;
  return SubspaceBasis<Scalar>(svd.matrixU().leftCols(rank));
}

/// min over unit u in U of the squared residual ||u - P_S u||^2, computed as
/// 1 - sigma_max(B_U^T B_S)^2 and clamped to [0,1].  U must be nonzero; an
/// empty S leaves every direction untouched, giving 1.
template <typename Scalar>
Scalar residual_ratio(const SubspaceBasis<Scalar>& u, const SubspaceBasis<Scalar>& s) {
  if (u.rank() == 0)
    throw std::invalid_argument("residual_ratio: test subspace U is zero");
  if (s.rank() == 0) return Scalar(1);
  if (u.ambient() != s.ambient())
    throw std::invalid_argument("residual_ratio: ambient dimension mismatch");
  MatrixX<Scalar> overlap = u.basis().transpose() * s.basis();
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(overlap);
  const Scalar smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : Scalar(0);
  Scalar r = Scalar(1) - smax * smax;
  if (r < Scalar(0)) r = Scalar(0);
  if (r > Scalar(1)) r = Scalar(1);
  return r;
}

}  // namespace chaoskit
