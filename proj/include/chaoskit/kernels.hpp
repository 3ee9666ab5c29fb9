#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chaoskit/chaos.hpp"
#include "chaoskit/sym_tensor.hpp"

namespace chaoskit {

/// A deterministic kernel path t -> f_t in the n-fold symmetric tensor space:
/// the process under study is X_t = I_n(f_t).  `theta` is the exponent the
/// family claims for the increment variance E(X_t - X_s)^2 ~ |t-s|^theta,
/// valid for separations down to `resolution`; `rho` is the matching path
/// Hoelder exponent used when the paths drive Young integrals.  Families that
/// assert a two-sided variance floor E(X_t-X_s)^2 >= c |t-s|^eta carry the
/// fitted constants.
struct KernelFamily {
  std::string name;
  int order = 1;
  int dim = 1;
  double theta = 2.0;
  double rho = 1.0;
  double resolution = 1.0;
  bool has_cov_floor = false;
  double cov_floor_c = 0.0;
  double cov_floor_eta = 0.0;
  int cov_floor_grid = 0;  // uniform grid size the floor was fitted on
  std::function<SymTensord(double)> eval;

  SymTensord at(double t) const {
    if (!(t >= -1e-12 && t <= 1.0 + 1e-12))
      throw std::invalid_argument("KernelFamily: t outside [0,1]");
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return eval(t);
  }

  SymTensord increment(double s, double t) const {
    if (s > t) throw std::invalid_argument("KernelFamily: increment needs s <= t");
    SymTensord out = at(t);
    out -= at(s);
    return out;
  }
};

/// Variance of the process increment over [s,t]: n! ||f_t - f_s||^2.
inline double increment_variance(const KernelFamily& fam, double s, double t) {
  const SymTensord inc = fam.increment(s, t);
  return factorial(fam.order) * inner(inc, inc);
}

/// Fit the largest constant c with E(X_t-X_s)^2 >= c |t-s|^eta over all pairs
/// of the given grid.  Returns 0 if some increment vanishes.
inline double fit_cov_floor(const KernelFamily& fam, const std::vector<double>& grid,
                            double eta) {
  std::vector<SymTensord> f;
  f.reserve(grid.size());
  for (double t : grid) f.push_back(fam.at(t));
  double c = std::numeric_limits<double>::infinity();
  const double nfact = factorial(fam.order);
  for (std::size_t a = 0; a + 1 < grid.size(); ++a) {
    for (std::size_t b = a + 1; b < grid.size(); ++b) {
      SymTensord inc = f[b];
      inc -= f[a];
      const double var = nfact * inner(inc, inc);
      const double gap = std::pow(grid[b] - grid[a], eta);
      c = std::min(c, var / gap);
    }
  }
  return std::isfinite(c) ? c : 0.0;
}

inline std::vector<double> uniform_grid(int m) {
  if (m < 1) throw std::invalid_argument("uniform_grid: need m >= 1");
  std::vector<double> g(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) g[static_cast<std::size_t>(k)] = static_cast<double>(k) / m;
  return g;
}

/// Two-block negative control (n = 1, dim = 2):
/// f_t = min(t, 1/2) e_1 + (t - 1/2)_+ e_2.  Scaling exponent 2; no direction
/// of the first half ever reappears after 1/2, so the conditional
/// non-degeneracy ratio over interior blocks is exactly zero.
inline KernelFamily make_blk2() {
  KernelFamily fam;
  fam.name = "BLK2";
  fam.order = 1;
  fam.dim = 2;
  fam.theta = 2.0;
  fam.rho = 1.0;
  fam.resolution = 0.0625;
  fam.eval = [](double t) {
    SymTensord f(1, 2);
    f.set(MultiIndex::of({1}), std::min(t, 0.5));
    if (t > 0.5) f.set(MultiIndex::of({2}), t - 0.5);
    return f;
  };
  fam.has_cov_floor = true;
  fam.cov_floor_eta = 2.0;
  fam.cov_floor_grid = 16;
  fam.cov_floor_c = fit_cov_floor(fam, uniform_grid(16), 2.0);
  return fam;
}

namespace detail {

/// Saturating dyadic ramp: the cell (l,k) covers [k 2^-l, (k+1) 2^-l]; the
/// ramp rises linearly across the cell and stays at 1 afterwards.
inline double ramp(double t, int level, int cell) {
  const double x = std::ldexp(t, level) - static_cast<double>(cell);
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x;
}

inline int dyadic_offset(int level) { return (1 << level) - 1; }

}  // namespace detail

/// Multiscale ramp family (n = 1): one basis direction per dyadic cell (l,k)
/// for levels l = 0..L, with weight 2^{-l theta/2} on the cell's saturating
/// ramp.  dim = 2^{L+1} - 1.  Increments gain fresh basis directions from the
/// finest cells strictly inside the increment, which keeps conditional
/// residuals positive, while the weighted multiscale ladder gives
/// E(X_t - X_s)^2 ~ |t-s|^theta for separations down to 2^-L.
inline KernelFamily make_fd(int levels, double theta) {
  if (levels < 0 || levels > 12) throw std::invalid_argument("make_fd: levels out of range");
  if (!(theta > 0.0 && theta <= 2.0)) throw std::invalid_argument("make_fd: theta in (0,2]");
  KernelFamily fam;
  fam.name = "FD(" + std::to_string(levels) + "," + std::to_string(theta) + ")";
  fam.order = 1;
  fam.dim = (1 << (levels + 1)) - 1;
  fam.theta = theta;
  fam.rho = std::min(1.0, theta / 2.0);
  fam.resolution = std::ldexp(1.0, -levels);
  const int L = levels;
  fam.eval = [L, theta](double t) {
    SymTensord f(1, (1 << (L + 1)) - 1);
    for (int l = 0; l <= L; ++l) {
      const double w = std::pow(2.0, -0.5 * l * theta);
      const int cells = 1 << l;
      const double x = std::ldexp(t, l);
      const int full = std::min(cells, static_cast<int>(std::floor(x)));
      for (int k = 0; k < full; ++k)
        f.set(MultiIndex::of({detail::dyadic_offset(l) + k + 1}), w);
      if (full < cells) {
        const double frac = x - static_cast<double>(full);
        if (frac > 0.0)
          f.set(MultiIndex::of({detail::dyadic_offset(l) + full + 1}), w * frac);
      }
    }
    return f;
  };
  fam.has_cov_floor = true;
  fam.cov_floor_eta = theta;
  fam.cov_floor_grid = std::min(64, 1 << levels);
  fam.cov_floor_c = fit_cov_floor(fam, uniform_grid(fam.cov_floor_grid), theta);
  return fam;
}

/// Second-chaos sibling of the ramp family: the same dyadic ladder, but cell
/// (l,k) rides the off-diagonal pair direction e_hat(2j-1, 2j) (scaled to unit
/// norm) of a 2(2^{L+1}-1)-dimensional space.  X_t is then a sum of
/// independent products of pairs of Gaussians.
inline KernelFamily make_herm2(int levels, double theta) {
  if (levels < 0 || levels > 6)
    throw std::invalid_argument("make_herm2: levels out of range");
  if (!(theta > 0.0 && theta <= 2.0)) throw std::invalid_argument("make_herm2: theta in (0,2]");
  KernelFamily fam;
  fam.name = "HERM2(" + std::to_string(levels) + "," + std::to_string(theta) + ")";
  fam.order = 2;
  const int directions = (1 << (levels + 1)) - 1;
  fam.dim = 2 * directions;
  fam.theta = theta;
  fam.rho = std::min(1.0, theta / 2.0);
  fam.resolution = std::ldexp(1.0, -levels);
  const int L = levels;
  const double sqrt2 = std::sqrt(2.0);
  fam.eval = [L, theta, sqrt2](double t) {
    SymTensord f(2, 2 * ((1 << (L + 1)) - 1));
    for (int l = 0; l <= L; ++l) {
      const double w = sqrt2 * std::pow(2.0, -0.5 * l * theta);
      const int cells = 1 << l;
      const double x = std::ldexp(t, l);
      const int full = std::min(cells, static_cast<int>(std::floor(x)));
      for (int k = 0; k < full; ++k) {
        const int j = detail::dyadic_offset(l) + k + 1;
        f.set(MultiIndex::of({2 * j - 1, 2 * j}), w);
      }
      if (full < cells) {
        const double frac = x - static_cast<double>(full);
        if (frac > 0.0) {
          const int j = detail::dyadic_offset(l) + full + 1;
          f.set(MultiIndex::of({2 * j - 1, 2 * j}), w * frac);
        }
      }
    }
    return f;
  };
  fam.has_cov_floor = true;
  fam.cov_floor_eta = theta;
  fam.cov_floor_grid = std::min(64, 1 << levels);
  fam.cov_floor_c = fit_cov_floor(fam, uniform_grid(fam.cov_floor_grid), theta);
  return fam;
}

namespace detail {

struct RosenImpl {
  int m = 0;
  double hurst = 0.85;
  double scale = 1.0;
  // per-panel kernel columns (node at the panel's right endpoint) and the
  // prefix quadrature over full panels; a panel being crossed contributes its
  // rank-one term linearly, so every increment is a nonnegative combination
  // of the same rank-one matrices.
  std::vector<Eigen::VectorXd> cols;
  std::vector<Eigen::MatrixXd> prefix;

  double phi(double u) const {
    const double clip = 0.5 / static_cast<double>(m);
    if (u <= 0.0) return 0.0;
    return std::pow(std::max(u, clip), hurst - 1.5);
  }

  Eigen::VectorXd phi_column(double r) const {
    Eigen::VectorXd v(m);
    for (int i = 1; i <= m; ++i)
      v[i - 1] = phi(r - (static_cast<double>(i) - 0.5) / m);
    return v;
  }

  SymTensord tensor_at(double t) const {
    const double mm = static_cast<double>(m);
    const int full = std::min(m, static_cast<int>(std::floor(t * mm)));
    Eigen::MatrixXd dense = prefix[static_cast<std::size_t>(full)];
    const double rest = t - static_cast<double>(full) / mm;
    if (rest > 0.0 && full < m) {
      const Eigen::VectorXd& v = cols[static_cast<std::size_t>(full)];
      dense.noalias() += rest * (v * v.transpose());
    }
    SymTensord f(2, m);
    for (int i = 1; i <= m; ++i) {
      for (int j = i; j <= m; ++j) {
        const double a = scale * dense(i - 1, j - 1);
        if (a == 0.0) continue;
        f.set(MultiIndex::of({i, j}), i == j ? a : 2.0 * a);
      }
    }
    return f;
  }
};

}  // namespace detail

/// Hermite-process kernel in the second chaos on L^2[0,1] discretized to m
/// cells: f_t(x,y) ~ int_0^t (r-x)_+^{H'-3/2} (r-y)_+^{H'-3/2} dr with the
/// singular power clipped at the cell scale, quadratured over m time panels,
/// and normalized so ||f_1|| = 1.  Needs H' in (3/4, 1); the increment
/// variance exponent is theta = 4H' - 2.
inline KernelFamily make_rosen(double hurst, int m) {
  if (!(hurst > 0.75 && hurst < 1.0))
    throw std::invalid_argument("make_rosen: hurst must lie in (3/4, 1)");
  if (m < 4 || m > 256) throw std::invalid_argument("make_rosen: m out of range");
  auto impl = std::make_shared<detail::RosenImpl>();
  impl->m = m;
  impl->hurst = hurst;
  impl->prefix.assign(static_cast<std::size_t>(m) + 1, Eigen::MatrixXd::Zero(m, m));
  impl->cols.reserve(static_cast<std::size_t>(m));
  for (int p = 1; p <= m; ++p) {
    impl->cols.push_back(impl->phi_column(static_cast<double>(p) / m));
    const Eigen::VectorXd& v = impl->cols.back();
    impl->prefix[static_cast<std::size_t>(p)] =
        impl->prefix[static_cast<std::size_t>(p - 1)] + (v * v.transpose()) / m;
  }
  impl->scale = 1.0;
  const double raw = norm(impl->tensor_at(1.0));
  if (!(raw > 0.0)) throw std::runtime_error("make_rosen: degenerate kernel");
  impl->scale = 1.0 / raw;

  KernelFamily fam;
  fam.name = "ROSEN(" + std::to_string(hurst) + "," + std::to_string(m) + ")";
  fam.order = 2;
  fam.dim = m;
  fam.theta = 4.0 * hurst - 2.0;
  fam.rho = std::min(1.0, fam.theta / 2.0);
  fam.resolution = 1.0 / m;
  fam.eval = [impl](double t) { return impl->tensor_at(t); };
  fam.has_cov_floor = true;
  fam.cov_floor_eta = fam.theta;
  fam.cov_floor_grid = std::min(32, m);
  fam.cov_floor_c = fit_cov_floor(fam, uniform_grid(fam.cov_floor_grid), fam.theta);
  return fam;
}

/// Piecewise-linear interpolation through user-supplied nodes.  Nodes must
/// start at t = 0 with the zero tensor, be strictly increasing in t, share
/// order and dim, and reach t = 1 so the evaluator is total on [0,1].
inline KernelFamily make_custom(std::vector<std::pair<double, SymTensord>> nodes,
                                double theta = 2.0) {
  if (nodes.size() < 2) throw std::invalid_argument("make_custom: need at least 2 nodes");
  if (std::abs(nodes.front().first) > 1e-12)
    throw std::invalid_argument("make_custom: first node must sit at t = 0");
  if (!nodes.front().second.is_zero())
    throw std::invalid_argument("make_custom: tensor at t = 0 must be zero");
  if (std::abs(nodes.back().first - 1.0) > 1e-12)
    throw std::invalid_argument("make_custom: last node must sit at t = 1");
  double res = 1.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (!(nodes[i + 1].first > nodes[i].first))
      throw std::invalid_argument("make_custom: node times must be strictly increasing");
    nodes[i].second.check_compatible(nodes[i + 1].second);
    res = std::min(res, nodes[i + 1].first - nodes[i].first);
  }
  if (!(theta > 0.0 && theta <= 2.0))
    throw std::invalid_argument("make_custom: theta in (0,2]");
  auto shared = std::make_shared<const std::vector<std::pair<double, SymTensord>>>(std::move(nodes));
  KernelFamily fam;
  fam.name = "CUSTOM";
  fam.order = (*shared)[0].second.order();
  fam.dim = (*shared)[0].second.dim();
  fam.theta = theta;
  fam.rho = std::min(1.0, theta / 2.0);
  fam.resolution = res;
  fam.eval = [shared](double t) {
    const auto& nd = *shared;
    auto it = std::lower_bound(nd.begin(), nd.end(), t,
                               [](const auto& node, double v) { return node.first < v; });
    if (it == nd.end()) return nd.back().second;
    if (it->first == t || it == nd.begin()) return it->second;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double lam = (t - lo.first) / (hi.first - lo.first);
    SymTensord out = lo.second;
    out *= (1.0 - lam);
    out.add_scaled(hi.second, lam);
    return out;
  };
  return fam;
}

/// Kernel tensors cached along a time grid.
struct KernelPath {
  std::vector<double> times;
  std::vector<SymTensord> f;
};

inline KernelPath make_kernel_path(const KernelFamily& fam, const std::vector<double>& grid) {
  if (grid.size() < 2) throw std::invalid_argument("make_kernel_path: need >= 2 grid points");
  if (std::abs(grid.front()) > 1e-12)
    throw std::invalid_argument("make_kernel_path: grid must start at 0");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1]))
      throw std::invalid_argument("make_kernel_path: grid must be increasing");
  if (grid.back() > 1.0 + 1e-12)
    throw std::invalid_argument("make_kernel_path: grid must stay within [0,1]");
  KernelPath p;
  p.times = grid;
  p.f.reserve(grid.size());
  for (double t : grid) p.f.push_back(fam.at(t));
  return p;
}

inline KernelPath make_kernel_path(const KernelFamily& fam, int m) {
  return make_kernel_path(fam, uniform_grid(m));
}

/// One sampled trajectory: X_t = I_n(f_t) and its Malliavin gradient rows
/// DX_t (one row per grid time, one column per basis direction).
struct PathSample {
  std::vector<double> times;
  Eigen::VectorXd x;
  Eigen::MatrixXd dx;
};

inline PathSample sample_path(const KernelPath& path, const GaussianSample& z) {
  PathSample out;
  out.times = path.times;
  const Eigen::Index nt = static_cast<Eigen::Index>(path.times.size());
  out.x.resize(nt);
  out.dx.resize(nt, path.f.front().dim());
  for (Eigen::Index k = 0; k < nt; ++k) {
    const auto& fk = path.f[static_cast<std::size_t>(k)];
    out.x[k] = evaluate(fk, z);
    out.dx.row(k) = malliavin_gradient(fk, z).transpose();
  }
  return out;
}

inline PathSample sample_path(const KernelFamily& fam, const std::vector<double>& grid,
                              const GaussianSample& z) {
  return sample_path(make_kernel_path(fam, grid), z);
}

}  // namespace chaoskit
