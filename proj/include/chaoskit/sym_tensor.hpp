#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include "chaoskit/multi_index.hpp"

namespace chaoskit {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Symmetric tensor of a fixed order over a dim-dimensional real inner-product
/// space with orthonormal basis e_1..e_dim.  Stored sparsely as coefficients
/// over sorted multi-indices: f = sum_sigma c_sigma e_hat(sigma), where
/// e_hat(sigma) is the average of the elementary tensor over all slot
/// permutations.  The zero tensor has an empty coefficient map; coefficients
/// that become exactly zero are pruned.
template <typename Scalar = double>
class SymTensor {
 public:
  SymTensor() = default;

  SymTensor(int order, int dim) : order_(order), dim_(dim) {
    if (order < 0) throw std::invalid_argument("SymTensor: order must be >= 0");
    if (dim < 1) throw std::invalid_argument("SymTensor: dim must be >= 1");
  }

  int order() const { return order_; }
  int dim() const { return dim_; }
  bool is_zero() const { return coeffs_.empty(); }
  std::size_t nnz() const { return coeffs_.size(); }
  const std::map<MultiIndex, Scalar>& coefficients() const { return coeffs_; }

  Scalar coefficient(const MultiIndex& idx) const {
    auto it = coeffs_.find(idx);
    return it == coeffs_.end() ? Scalar(0) : it->second;
  }

  SymTensor& set(const MultiIndex& idx, Scalar value) {
    check_index(idx);
    if (value == Scalar(0))
      coeffs_.erase(idx);
    else
      coeffs_[idx] = value;
    return *this;
  }

  SymTensor& add(const MultiIndex& idx, Scalar value) {
    check_index(idx);
    auto [it, inserted] = coeffs_.try_emplace(idx, value);
    if (!inserted) {
      it->second += value;
      if (it->second == Scalar(0)) coeffs_.erase(it);
    } else if (value == Scalar(0)) {
      coeffs_.erase(it);
    }
    return *this;
  }

  /// *this += a * other
  SymTensor& add_scaled(const SymTensor& other, Scalar a) {
    check_compatible(other);
    if (a == Scalar(0)) return *this;
    for (const auto& [idx, c] : other.coeffs_) add(idx, a * c);
    return *this;
  }

  SymTensor& operator+=(const SymTensor& other) { return add_scaled(other, Scalar(1)); }
  SymTensor& operator-=(const SymTensor& other) { return add_scaled(other, Scalar(-1)); }

  SymTensor& operator*=(Scalar a) {
    if (a == Scalar(0)) {
      coeffs_.clear();
      return *this;
    }
    for (auto& [idx, c] : coeffs_) c *= a;
    return *this;
  }

  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator*(SymTensor a, Scalar s) { return a *= s; }
  friend SymTensor operator*(Scalar s, SymTensor a) { return a *= s; }

  void check_compatible(const SymTensor& other) const {
    if (order_ != other.order_ || dim_ != other.dim_)
      throw std::invalid_argument("SymTensor: order/dim mismatch");
  }

 private:
  void check_index(const MultiIndex& idx) const {
    if (idx.order() != order_)
      throw std::invalid_argument("SymTensor: multi-index order mismatch");
    if (idx.max_entry() > dim_)
      throw std::invalid_argument("SymTensor: basis index exceeds dim");
  }

  int order_ = 0;
  int dim_ = 1;
  std::map<MultiIndex, Scalar> coeffs_;
};

using SymTensord = SymTensor<double>;

/// <f,g> = sum_sigma c_sigma d_sigma ||e_hat(sigma)||^2.  The basis tensors
/// for distinct sorted multi-indices are orthogonal, so the sum is diagonal.
template <typename Scalar>
Scalar inner(const SymTensor<Scalar>& f, const SymTensor<Scalar>& g) {
  f.check_compatible(g);
  Scalar acc(0);
  auto it = f.coefficients().begin();
  auto jt = g.coefficients().begin();
  const auto fe = f.coefficients().end();
  const auto ge = g.coefficients().end();
  while (it != fe && jt != ge) {
    if (it->first < jt->first) {
      ++it;
    } else if (jt->first < it->first) {
      ++jt;
    } else {
      acc += it->second * jt->second * Scalar(sym_weight(it->first));
      ++it;
      ++jt;
    }
  }
  return acc;
}

template <typename Scalar>
Scalar norm(const SymTensor<Scalar>& f) {
  using std::sqrt;
  return sqrt(inner(f, f));
}

/// Project a dense order-n array (row-major over 1-based tuples, first slot
/// slowest) onto the symmetric subspace.  The coefficient of e_hat(sigma) is
/// the sum of dense entries over the distinct arrangements of sigma.
template <typename Scalar>
SymTensor<Scalar> symmetrize(const std::vector<Scalar>& dense, int order, int dim) {
  std::size_t expect = 1;
  for (int i = 0; i < order; ++i) {
    expect *= static_cast<std::size_t>(dim);
    if (expect > 100000000u)
      throw std::invalid_argument("symmetrize: dense size too large");
  }
  if (dense.size() != expect)
    throw std::invalid_argument("symmetrize: dense size does not match dim^order");
  SymTensor<Scalar> out(order, dim);
  std::vector<int> tuple(order, 1);
  for (std::size_t flat = 0; flat < dense.size(); ++flat) {
    std::size_t rem = flat;
    for (int p = order - 1; p >= 0; --p) {
      tuple[p] = static_cast<int>(rem % dim) + 1;
      rem /= dim;
    }
    if (dense[flat] != Scalar(0)) out.add(MultiIndex(tuple), dense[flat]);
  }
  return out;
}

/// Pair one slot of f with e_j.  In the symmetrized basis this sends
/// e_hat(sigma) to (k_j(sigma)/n) e_hat(sigma \ j).
template <typename Scalar>
SymTensor<Scalar> contract_last(const SymTensor<Scalar>& f, int j) {
  const int n = f.order();
  if (n < 1) throw std::invalid_argument("contract_last: order must be >= 1");
  if (j < 1 || j > f.dim())
    throw std::invalid_argument("contract_last: basis index out of range");
  SymTensor<Scalar> out(n - 1, f.dim());
  for (const auto& [sigma, c] : f.coefficients()) {
    int k = sigma.count(j);
    if (k == 0) continue;
    out.add(sigma.without_one(j), c * Scalar(k) / Scalar(n));
  }
  return out;
}

/// Coordinates of f in the orthonormal basis e_hat(sigma)/||e_hat(sigma)||,
/// ordered lexicographically over sorted multi-indices.  Plain dot products of
/// coordinate vectors reproduce the tensor inner product.
template <typename Scalar>
VectorX<Scalar> to_coords(const SymTensor<Scalar>& f) {
  const std::size_t count = multi_index_count(f.order(), f.dim());
  if (count > 5000000u)
    throw std::invalid_argument("to_coords: coordinate space too large");
  VectorX<Scalar> v = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(count));
  for (const auto& [sigma, c] : f.coefficients())
    v[static_cast<Eigen::Index>(multi_index_rank(sigma, f.dim()))] =
        c * Scalar(std::sqrt(sym_weight(sigma)));
  return v;
}

/// First-slot unfolding: the dim x C(dim+n-2, n-1) matrix whose column for the
/// sorted (n-1)-multi-index tau has i-th entry <f, e_i (x) e(tau)>.  Each
/// sorted tau contributes one column; permuted duplicates are omitted.
template <typename Scalar>
MatrixX<Scalar> unfold(const SymTensor<Scalar>& f) {
  const int n = f.order();
  if (n < 1) throw std::invalid_argument("unfold: order must be >= 1");
  const std::size_t cols = multi_index_count(n - 1, f.dim());
  if (cols > 100000u) throw std::invalid_argument("unfold: too many columns");
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(f.dim(), static_cast<Eigen::Index>(cols));
  for (const auto& [sigma, c] : f.coefficients()) {
    const Scalar dense = c * Scalar(sym_weight(sigma));
    for (auto [j, k] : sigma.multiplicities()) {
      (void)k;
      const auto col = multi_index_rank(sigma.without_one(j), f.dim());
      m(j - 1, static_cast<Eigen::Index>(col)) = dense;
    }
  }
  return m;
}

}  // namespace chaoskit
