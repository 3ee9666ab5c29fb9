#pragma once

#include <stdexcept>

namespace chaoskit {

/// Probabilists' Hermite polynomial H_k(x), via the three-term recurrence
/// H_{k+1}(x) = x H_k(x) - k H_{k-1}(x),  H_0 = 1, H_1 = x.
template <typename Scalar>
Scalar hermite(int k, Scalar x) {
  if (k < 0) throw std::invalid_argument("hermite: negative degree");
  if (k == 0) return Scalar(1);
  Scalar prev = Scalar(1);
  Scalar cur = x;
  for (int i = 1; i < k; ++i) {
    Scalar next = x * cur - Scalar(i) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace chaoskit
