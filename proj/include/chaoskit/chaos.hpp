#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "chaoskit/hermite.hpp"
#include "chaoskit/parallel.hpp"
#include "chaoskit/rng.hpp"
#include "chaoskit/sym_tensor.hpp"

namespace chaoskit {

/// One draw of the underlying Gaussian coordinates W(e_1)..W(e_dim).
struct GaussianSample {
  Eigen::VectorXd z;
  std::uint64_t master_seed = 0;
  std::uint64_t sample_index = 0;
};

/// Deterministic draw: sample `index` of the stream identified by `seed`.
/// Coordinate j depends only on (seed, index, j).
inline GaussianSample draw_gaussian_sample(std::uint64_t seed, std::uint64_t index, int dim) {
  if (dim < 1) throw std::invalid_argument("draw_gaussian_sample: dim must be >= 1");
  GaussianSample s;
  s.master_seed = seed;
  s.sample_index = index;
  s.z.resize(dim);
  NormalStream gen(stream_key(seed, index));
  for (int j = 0; j < dim; ++j) s.z[j] = gen.next();
  return s;
}

/// Value of the multiple Wiener-Ito integral I_n(f) at the sample z: for each
/// sorted multi-index with multiplicities (j_l, k_l), the basis tensor
/// contributes prod_l H_{k_l}(z_{j_l}).
template <typename Scalar>
Scalar evaluate(const SymTensor<Scalar>& kernel, const VectorX<Scalar>& z) {
  if (z.size() != kernel.dim())
    throw std::invalid_argument("evaluate: sample dimension mismatch");
  Scalar acc(0);
  for (const auto& [sigma, c] : kernel.coefficients()) {
    Scalar prod(1);
    for (auto [j, k] : sigma.multiplicities()) prod *= hermite(k, z[j - 1]);
    acc += c * prod;
  }
  return acc;
}

inline double evaluate(const SymTensord& kernel, const GaussianSample& s) {
  return evaluate<double>(kernel, s.z);
}

/// Malliavin derivative of I_n(f) at z, one component per basis direction:
/// D_j I_n(f) = n I_{n-1}(<f, e_j>_last).  Computed directly from the
/// coefficient map; component j collects k_j(sigma) c_sigma times the Hermite
/// product over sigma with one j removed.
template <typename Scalar>
VectorX<Scalar> malliavin_gradient(const SymTensor<Scalar>& kernel, const VectorX<Scalar>& z) {
  if (kernel.order() < 1)
    throw std::invalid_argument("malliavin_gradient: order must be >= 1");
  if (z.size() != kernel.dim())
    throw std::invalid_argument("malliavin_gradient: sample dimension mismatch");
  VectorX<Scalar> g = VectorX<Scalar>::Zero(kernel.dim());
  for (const auto& [sigma, c] : kernel.coefficients()) {
    const auto mults = sigma.multiplicities();
    for (std::size_t a = 0; a < mults.size(); ++a) {
      const auto [j, k] = mults[a];
      // Hermite product over sigma with multiplicity of j lowered by one.
      Scalar prod(1);
      for (std::size_t b = 0; b < mults.size(); ++b) {
        const auto [jb, kb] = mults[b];
        const int deg = (b == a) ? kb - 1 : kb;
        if (deg > 0) prod *= hermite(deg, z[jb - 1]);
      }
      g[j - 1] += c * Scalar(k) * prod;
    }
  }
  return g;
}

inline Eigen::VectorXd malliavin_gradient(const SymTensord& kernel, const GaussianSample& s) {
  return malliavin_gradient<double>(kernel, s.z);
}

/// Gram matrix of gradient vectors: entry (a,b) = <g_a, g_b>.  For a vector of
/// chaos variables this is the Malliavin matrix at one sample.
inline Eigen::MatrixXd malliavin_matrix(const std::vector<Eigen::VectorXd>& gradients) {
  if (gradients.empty())
    throw std::invalid_argument("malliavin_matrix: no gradients given");
  const Eigen::Index dim = gradients.front().size();
  for (const auto& g : gradients)
    if (g.size() != dim)
      throw std::invalid_argument("malliavin_matrix: inconsistent gradient dimensions");
  const Eigen::Index m = static_cast<Eigen::Index>(gradients.size());
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = a; b < m; ++b)
      out(a, b) = out(b, a) = gradients[a].dot(gradients[b]);
  return out;
}

struct McStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

/// Monte Carlo mean of fn over independent Gaussian samples.  Sample i always
/// uses draw (seed, i); worker threads fill disjoint slots of a preallocated
/// buffer and the reduction is a fixed-shape pairwise sum, so the result is
/// bit-identical for any thread count.
inline McStats mc_expectation(const std::function<double(const GaussianSample&)>& fn,
                              std::size_t n_samples, std::uint64_t seed, int dim,
                              int threads = 1) {
  if (n_samples < 2) throw std::invalid_argument("mc_expectation: need at least 2 samples");
  std::vector<double> vals(n_samples);
  parallel_for(n_samples, threads, [&](std::size_t i) {
    vals[i] = fn(draw_gaussian_sample(seed, i, dim));
  });
  McStats st;
  st.n_samples = n_samples;
  st.mean = pairwise_sum(vals) / static_cast<double>(n_samples);
  std::vector<double> dev2(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double d = vals[i] - st.mean;
    dev2[i] = d * d;
  }
  const double var = pairwise_sum(dev2) / static_cast<double>(n_samples - 1);
  st.std_error = std::sqrt(var / static_cast<double>(n_samples));
  return st;
}

}  // namespace chaoskit
