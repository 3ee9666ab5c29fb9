#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

namespace chaoskit {

/// Sorted multi-index (i_1 <= ... <= i_n) of 1-based basis indices.
/// The empty index (order 0) labels the scalar slot produced by fully
/// contracting an order-1 tensor.
class MultiIndex {
 public:
  MultiIndex() = default;

  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end());
    if (!entries_.empty() && entries_.front() < 1)
      throw std::invalid_argument("MultiIndex: basis indices are 1-based");
  }

  static MultiIndex of(std::initializer_list<int> entries) {
    return MultiIndex(std::vector<int>(entries));
  }

  int order() const { return static_cast<int>(entries_.size()); }
  const std::vector<int>& entries() const { return entries_; }
  int max_entry() const { return entries_.empty() ? 0 : entries_.back(); }

  /// Occurrences of basis index j.
  int count(int j) const {
    auto [lo, hi] = std::equal_range(entries_.begin(), entries_.end(), j);
    return static_cast<int>(hi - lo);
  }

  /// Distinct indices with multiplicities, ascending.
  std::vector<std::pair<int, int>> multiplicities() const {
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < entries_.size();) {
      std::size_t j = i;
      while (j < entries_.size() && entries_[j] == entries_[i]) ++j;
      out.emplace_back(entries_[i], static_cast<int>(j - i));
      i = j;
    }
    return out;
  }

  /// Copy with one occurrence of j removed; j must be present.
  MultiIndex without_one(int j) const {
    auto it = std::find(entries_.begin(), entries_.end(), j);
    if (it == entries_.end())
      throw std::invalid_argument("MultiIndex: index not present");
    MultiIndex out;
    out.entries_.reserve(entries_.size() - 1);
    out.entries_.insert(out.entries_.end(), entries_.begin(), it);
    out.entries_.insert(out.entries_.end(), it + 1, entries_.end());
    return out;
  }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.entries_ == b.entries_;
  }
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
    return a.entries_ < b.entries_;
  }

 private:
  std::vector<int> entries_;
};

inline double factorial(int k) {
  if (k < 0) throw std::invalid_argument("factorial: negative argument");
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

/// Gram weight of the symmetrized basis tensor: ||e_hat(sigma)||^2 =
/// (prod_l k_l!) / n!  over the multiplicities k_l of sigma.
inline double sym_weight(const MultiIndex& sigma) {
  double num = 1.0;
  for (auto [j, k] : sigma.multiplicities()) {
    (void)j;
    num *= factorial(k);
  }
  return num / factorial(sigma.order());
}

/// Number of sorted multi-indices of the given order over 1..dim:
/// C(dim + order - 1, order).
inline std::size_t multi_index_count(int order, int dim) {
  if (order < 0 || dim < 1)
    throw std::invalid_argument("multi_index_count: bad order/dim");
  unsigned long long num = 1, den = 1;
  for (int i = 0; i < order; ++i) {
    num *= static_cast<unsigned long long>(dim + i);
    den *= static_cast<unsigned long long>(i + 1);
    if (num % den == 0) {  // keep intermediates small
      num /= den;
      den = 1;
    }
  }
  return static_cast<std::size_t>(num / den);
}

/// All sorted multi-indices of the given order over 1..dim, lexicographic.
inline std::vector<MultiIndex> all_multi_indices(int order, int dim) {
  std::vector<MultiIndex> out;
  out.reserve(multi_index_count(order, dim));
  std::vector<int> cur(order, 1);
  if (order == 0) {
    out.emplace_back();
    return out;
  }
  while (true) {
    out.push_back(MultiIndex(cur));
    int p = order - 1;
    while (p >= 0 && cur[p] == dim) --p;
    if (p < 0) break;
    int v = cur[p] + 1;
    for (int q = p; q < order; ++q) cur[q] = v;
  }
  return out;
}

/// Position of sigma within all_multi_indices(sigma.order(), dim).
inline std::size_t multi_index_rank(const MultiIndex& sigma, int dim) {
  const auto& e = sigma.entries();
  const int n = sigma.order();
  if (!e.empty() && e.back() > dim)
    throw std::invalid_argument("multi_index_rank: index exceeds dim");
  std::size_t rank = 0;
  int lo = 1;
  for (int p = 0; p < n; ++p) {
    for (int j = lo; j < e[p]; ++j)
      rank += multi_index_count(n - p - 1, dim - j + 1);
    lo = e[p];
  }
  return rank;
}

}  // namespace chaoskit
