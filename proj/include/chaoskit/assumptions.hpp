#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chaoskit/kernels.hpp"
#include "chaoskit/rng.hpp"
#include "chaoskit/subspace.hpp"

namespace chaoskit {

// ---------------------------------------------------------------------------
// Scaling regularity: least-squares fit of log E(X_t-X_s)^2 against
// log|t-s| over all pairs of a grid.

struct RegularityFit {
  double theta_hat = 0.0;
  double log_c_hat = 0.0;
  double min_variance = 0.0;
  double max_log_residual = 0.0;
  std::size_t n_pairs = 0;
  double margin = 0.05;
  bool pass = false;
};

inline RegularityFit check_regularity(const KernelFamily& fam, const std::vector<double>& grid,
                                      double margin = 0.05) {
  if (grid.size() < 3) throw std::invalid_argument("check_regularity: need >= 3 grid points");
  std::vector<SymTensord> f;
  f.reserve(grid.size());
  for (double t : grid) f.push_back(fam.at(t));
  const double nfact = factorial(fam.order);

  RegularityFit fit;
  fit.margin = margin;
  fit.min_variance = std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t a = 0; a + 1 < grid.size(); ++a) {
    for (std::size_t b = a + 1; b < grid.size(); ++b) {
      SymTensord inc = f[b];
      inc -= f[a];
      const double var = nfact * inner(inc, inc);
      fit.min_variance = std::min(fit.min_variance, var);
      if (var <= 0.0) continue;  // logged fit skips exact-zero increments
      const double x = std::log(grid[b] - grid[a]);
      const double y = std::log(var);
      pts.emplace_back(x, y);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
  }
  fit.n_pairs = pts.size();
  if (pts.size() >= 2) {
    const double n = static_cast<double>(pts.size());
    const double denom = n * sxx - sx * sx;
    fit.theta_hat = (n * sxy - sx * sy) / denom;
    fit.log_c_hat = (sy - fit.theta_hat * sx) / n;
    for (auto [x, y] : pts)
      fit.max_log_residual =
          std::max(fit.max_log_residual, std::abs(y - fit.theta_hat * x - fit.log_c_hat));
  }
  fit.pass = fit.min_variance > 0.0 && fit.theta_hat > 1.0 + margin;
  return fit;
}

// ---------------------------------------------------------------------------
// Partition configurations for the conditional non-degeneracy estimates: an
// inner chain t_1 < .. < t_m whose span is tested against the conditioning
// span of everything outside [t_1, t_m].

struct PartitionConfig {
  std::vector<double> inner;  // m >= 2 points, inner chain
  std::vector<double> left;   // s-chain in (0, t_1)
  std::vector<double> right;  // r-chain in (t_m, 1]
};

inline void validate_config(const PartitionConfig& cfg) {
  auto strictly_sorted = [](const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
      if (!(v[i] < v[i + 1])) return false;
    return true;
  };
  if (cfg.inner.size() < 2)
    throw std::invalid_argument("PartitionConfig: need at least two inner points");
  if (!strictly_sorted(cfg.inner) || !strictly_sorted(cfg.left) || !strictly_sorted(cfg.right))
    throw std::invalid_argument("PartitionConfig: chains must be strictly increasing");
  if (cfg.inner.front() < 0.0 || cfg.inner.back() > 1.0)
    throw std::invalid_argument("PartitionConfig: inner chain must lie in [0,1]");
  if (!cfg.left.empty()) {
    if (cfg.left.front() <= 0.0 || cfg.left.back() >= cfg.inner.front())
      throw std::invalid_argument("PartitionConfig: left chain must lie in (0, t_1)");
  }
  if (!cfg.right.empty()) {
    if (cfg.right.front() <= cfg.inner.back() || cfg.right.back() > 1.0)
      throw std::invalid_argument("PartitionConfig: right chain must lie in (t_m, 1]");
  }
}

inline std::vector<std::pair<double, double>> inner_intervals(const PartitionConfig& cfg) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < cfg.inner.size(); ++i)
    out.emplace_back(cfg.inner[i], cfg.inner[i + 1]);
  return out;
}

/// Conditioning intervals: the consecutive spans of [0, s_1..s_k, t_1] when
/// the left chain is nonempty, and of [t_m, r_1..r_l] when the right chain is
/// nonempty.  Empty chains contribute nothing.
inline std::vector<std::pair<double, double>> conditioning_intervals(const PartitionConfig& cfg) {
  std::vector<std::pair<double, double>> out;
  if (!cfg.left.empty()) {
    double prev = 0.0;
    for (double s : cfg.left) {
      out.emplace_back(prev, s);
      prev = s;
    }
    out.emplace_back(prev, cfg.inner.front());
  }
  if (!cfg.right.empty()) {
    double prev = cfg.inner.back();
    for (double r : cfg.right) {
      out.emplace_back(prev, r);
      prev = r;
    }
  }
  return out;
}

/// First-chaos directions reachable from the increment of X over [s,t]: the
/// column space of the unfolded increment kernel.  Gradients of X_t - X_s lie
/// in this subspace for every sample.
inline SubspaceBasisd chaos_subspace(const KernelFamily& fam, double s, double t,
                                     double tol = 1e-10) {
  return orthonormal_range<double>(unfold(fam.increment(s, t)), tol);
}

/// All-window dyadic configurations at one depth: every window [a,b] of the
/// 2^depth-cell grid becomes the inner chain (all dyadic points inside), with
/// full conditioning chains on both sides.
inline std::vector<PartitionConfig> dyadic_configs_at(int depth) {
  if (depth < 1 || depth > 10) throw std::invalid_argument("dyadic_configs_at: bad depth");
  const int cells = 1 << depth;
  std::vector<PartitionConfig> out;
  for (int a = 0; a <= cells; ++a) {
    for (int b = a + 1; b <= cells; ++b) {
      PartitionConfig cfg;
      for (int j = a; j <= b; ++j) cfg.inner.push_back(static_cast<double>(j) / cells);
      for (int j = 1; j < a; ++j) cfg.left.push_back(static_cast<double>(j) / cells);
      for (int j = b + 1; j <= cells; ++j) cfg.right.push_back(static_cast<double>(j) / cells);
      validate_config(cfg);
      out.push_back(std::move(cfg));
    }
  }
  return out;
}

/// Random configurations: 2..5 inner points, up to 3 conditioning points per
/// side, minimum point spacing min_gap.  Fully determined by the seed.  Keep
/// min_gap at or above the family resolution: below its finest scale a
/// piecewise-linear kernel repeats increment directions exactly and every
/// residual collapses to zero.
inline std::vector<PartitionConfig> random_configs(int count, std::uint64_t seed,
                                                   double min_gap = 0.02,
                                                   double snap = 0.0) {
  if (!(min_gap > 0.0 && min_gap < 0.5))
    throw std::invalid_argument("random_configs: min_gap out of range");
  std::vector<PartitionConfig> out;
  std::uint64_t ctr = 0;
  std::uint64_t stale = 0;
  const std::uint64_t key = stream_key(seed, 0x7a5717);
  auto draw = [&]() { return uniform_at(key, ctr++); };
  auto sorted_points = [&](int n, double lo, double hi, double gap) {
    std::vector<double> pts;
    int guard = 0;
    while (static_cast<int>(pts.size()) < n && guard < 1000) {
      ++guard;
      double p = lo + (hi - lo) * draw();
      if (snap > 0.0) p = std::round(p / snap) * snap;
      if (p <= lo + gap * 0.999 || p >= hi - gap * 0.999) continue;
      bool ok = true;
      for (double q : pts) ok = ok && std::abs(p - q) >= gap * 0.999;
      if (ok) pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end());
    return pts;
  };
  while (static_cast<int>(out.size()) < count) {
    if (++stale > 100000) throw std::runtime_error("random_configs: spacing too restrictive");
    const int m = 2 + static_cast<int>(draw() * 4.0);
    auto inner = sorted_points(m, 0.0, 1.0, min_gap);
    if (static_cast<int>(inner.size()) < 2) continue;
    PartitionConfig cfg;
    cfg.inner = std::move(inner);
    const int k = static_cast<int>(draw() * 4.0);
    const int l = static_cast<int>(draw() * 4.0);
    if (k > 0 && cfg.inner.front() > 3.0 * min_gap)
      cfg.left = sorted_points(k, 0.0, cfg.inner.front(), min_gap);
    if (l > 0 && cfg.inner.back() < 1.0 - 3.0 * min_gap)
      cfg.right = sorted_points(l, cfg.inner.back(), 1.0, min_gap);
    // right chains may touch 1 but sorted_points keeps a gap; stretch the last
    if (!cfg.right.empty() && draw() < 0.25) cfg.right.back() = 1.0;
    validate_config(cfg);
    out.push_back(std::move(cfg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conditional non-degeneracy estimators.

struct ResidualEstimate {
  double value = 1.0;               // min residual over usable configs
  std::size_t witness = 0;          // index of the minimizing config
  std::vector<double> per_config;   // residual per config; NaN where skipped
  std::size_t n_skipped = 0;
  std::size_t n_trivial = 0;        // configs with an empty conditioning span
};

namespace detail {

class IncrementCache {
 public:
  explicit IncrementCache(const KernelFamily& fam, double tol) : fam_(fam), tol_(tol) {}

  const SubspaceBasisd& subspace(double s, double t) {
    auto it = subspaces_.find({s, t});
    if (it == subspaces_.end())
      it = subspaces_.emplace(std::make_pair(s, t), chaos_subspace(fam_, s, t, tol_)).first;
    return it->second;
  }

  const Eigen::VectorXd& coords(double s, double t) {
    auto it = coords_.find({s, t});
    if (it == coords_.end())
      it = coords_.emplace(std::make_pair(s, t), to_coords(fam_.increment(s, t))).first;
    return it->second;
  }

 private:
  const KernelFamily& fam_;
  double tol_;
  std::map<std::pair<double, double>, SubspaceBasisd> subspaces_;
  std::map<std::pair<double, double>, Eigen::VectorXd> coords_;
};

inline Eigen::MatrixXd concat_bases(const std::vector<const SubspaceBasisd*>& blocks,
                                    Eigen::Index ambient) {
  Eigen::Index cols = 0;
  for (const auto* b : blocks) cols += b->rank();
  Eigen::MatrixXd m(ambient, cols);
  Eigen::Index at = 0;
  for (const auto* b : blocks) {
    m.middleCols(at, b->rank()) = b->basis();
    at += b->rank();
  }
  return m;
}

}  // namespace detail

/// Estimate the first-derivative conditional non-degeneracy constant: for
/// each configuration, U spans the chaos subspaces of the inner increments,
/// S spans those of the conditioning increments, and the config's value is
/// min_{unit u in U} ||u - P_S u||^2.  The estimate is the minimum over
/// configs; rank-0 U configs are skipped.
inline ResidualEstimate estimate_alpha(const KernelFamily& fam,
                                       const std::vector<PartitionConfig>& configs,
                                       double tol = 1e-10) {
  if (configs.empty()) throw std::invalid_argument("estimate_alpha: no configs");
  detail::IncrementCache cache(fam, tol);
  ResidualEstimate est;
  est.value = std::numeric_limits<double>::infinity();
  est.per_config.assign(configs.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    const auto& cfg = configs[ci];
    validate_config(cfg);
    std::vector<const SubspaceBasisd*> ublocks;
    for (auto [s, t] : inner_intervals(cfg)) ublocks.push_back(&cache.subspace(s, t));
    const Eigen::MatrixXd uraw = detail::concat_bases(ublocks, fam.dim);
    if (uraw.cols() == 0) {
      ++est.n_skipped;
      continue;
    }
    const SubspaceBasisd u = orthonormal_range<double>(uraw, tol);
    if (u.rank() == 0) {
      ++est.n_skipped;
      continue;
    }
    std::vector<const SubspaceBasisd*> sblocks;
    for (auto [s, t] : conditioning_intervals(cfg)) sblocks.push_back(&cache.subspace(s, t));
    const Eigen::MatrixXd sraw = detail::concat_bases(sblocks, fam.dim);
    double val = 1.0;
    if (sraw.cols() == 0) {
      ++est.n_trivial;
    } else {
      const SubspaceBasisd s = orthonormal_range<double>(sraw, tol);
      val = s.rank() == 0 ? 1.0 : residual_ratio(u, s);
    }
    est.per_config[ci] = val;
    if (val < est.value) {
      est.value = val;
      est.witness = ci;
    }
  }
  if (!std::isfinite(est.value))
    throw std::runtime_error("estimate_alpha: every configuration was degenerate");
  return est;
}

/// Same game one level up: U and S span the increment kernels themselves
/// (coordinates in the full chaos space) rather than their derivative
/// directions.
inline ResidualEstimate estimate_beta(const KernelFamily& fam,
                                      const std::vector<PartitionConfig>& configs,
                                      double tol = 1e-10) {
  if (configs.empty()) throw std::invalid_argument("estimate_beta: no configs");
  detail::IncrementCache cache(fam, tol);
  const Eigen::Index ambient =
      static_cast<Eigen::Index>(multi_index_count(fam.order, fam.dim));
  ResidualEstimate est;
  est.value = std::numeric_limits<double>::infinity();
  est.per_config.assign(configs.size(), std::numeric_limits<double>::quiet_NaN());
  auto stack = [&](const std::vector<std::pair<double, double>>& ivs) {
    Eigen::MatrixXd m(ambient, static_cast<Eigen::Index>(ivs.size()));
    for (std::size_t i = 0; i < ivs.size(); ++i)
      m.col(static_cast<Eigen::Index>(i)) = cache.coords(ivs[i].first, ivs[i].second);
    return m;
  };
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    const auto& cfg = configs[ci];
    validate_config(cfg);
    const SubspaceBasisd u = orthonormal_range<double>(stack(inner_intervals(cfg)), tol);
    if (u.rank() == 0) {
      ++est.n_skipped;
      continue;
    }
    const auto cond = conditioning_intervals(cfg);
    double val = 1.0;
    if (cond.empty()) {
      ++est.n_trivial;
    } else {
      const SubspaceBasisd s = orthonormal_range<double>(stack(cond), tol);
      val = s.rank() == 0 ? 1.0 : residual_ratio(u, s);
    }
    est.per_config[ci] = val;
    if (val < est.value) {
      est.value = val;
      est.witness = ci;
    }
  }
  if (!std::isfinite(est.value))
    throw std::runtime_error("estimate_beta: every configuration was degenerate");
  return est;
}

// ---------------------------------------------------------------------------
// Increment correlation positivity over nested windows.

struct RowSumCheck {
  double min_value = 0.0;
  double witness_s = 0, witness_sp = 0, witness_tp = 0, witness_t = 0;
  std::size_t n_quadruples = 0;
  double tolerance = -1e-12;
  bool pass = false;
};

/// min over grid quadruples s <= s' <= t' <= t of E[(X_t-X_s)(X_t'-X_s')],
/// computed from the kernel Gram matrix.
inline RowSumCheck check_row_sums(const KernelFamily& fam, const std::vector<double>& grid,
                                  double tolerance = -1e-12) {
  const std::size_t n = grid.size();
  if (n < 2) throw std::invalid_argument("check_row_sums: need >= 2 grid points");
  std::vector<SymTensord> f;
  f.reserve(n);
  for (double t : grid) f.push_back(fam.at(t));
  Eigen::MatrixXd gram(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      gram(a, b) = gram(b, a) = inner(f[a], f[b]);
  const double nfact = factorial(fam.order);

  RowSumCheck out;
  out.tolerance = tolerance;
  out.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t sp = s; sp < n; ++sp)
      for (std::size_t tp = sp + 1; tp < n; ++tp)
        for (std::size_t t = tp; t < n; ++t) {
          const double v =
              nfact * (gram(t, tp) - gram(t, sp) - gram(s, tp) + gram(s, sp));
          ++out.n_quadruples;
          if (v < out.min_value) {
            out.min_value = v;
            out.witness_s = grid[s];
            out.witness_sp = grid[sp];
            out.witness_tp = grid[tp];
            out.witness_t = grid[t];
          }
        }
  out.pass = out.min_value >= tolerance;
  return out;
}

// ---------------------------------------------------------------------------
// Combined report.

struct AssumptionOptions {
  int regularity_m = 0;        // 0: derived from the family resolution
  double theta_margin = 0.05;
  int alpha_depth = 4;         // dyadic depths 1..alpha_depth
  int n_random_configs = 64;
  std::uint64_t seed = 1;
  double rank_tol = 1e-10;
  double alpha_threshold = 1e-8;
  double beta_threshold = 1e-8;
  int rowsum_m = 32;
  double rowsum_tolerance = -1e-12;
};

struct AssumptionReport {
  std::string family;
  AssumptionOptions options;
  RegularityFit regularity;
  ResidualEstimate alpha;
  ResidualEstimate beta;
  std::map<int, double> alpha_by_depth;  // depth -> min residual (0 = random set)
  std::map<int, double> beta_by_depth;
  PartitionConfig alpha_witness_config;
  PartitionConfig beta_witness_config;
  RowSumCheck row_sums;
  bool alpha_pass = false;
  bool beta_pass = false;
  bool all_pass = false;
};

inline AssumptionReport check_assumptions(const KernelFamily& fam,
                                          const AssumptionOptions& opt = {}) {
  AssumptionReport rep;
  rep.family = fam.name;
  rep.options = opt;

  int m = opt.regularity_m;
  if (m == 0) {
    m = static_cast<int>(std::lround(1.0 / fam.resolution));
    m = std::max(8, std::min(64, m));
  }
  rep.regularity = check_regularity(fam, uniform_grid(m), opt.theta_margin);

  // Partitions finer than the family's resolution would test conditional
  // determinism the truncated kernel cannot have, so cap the dyadic depth and
  // snap random partition points to the resolution lattice.
  const int res_depth =
      static_cast<int>(std::floor(std::log2(1.0 / fam.resolution) + 1e-9));
  const int max_depth = std::min(opt.alpha_depth, std::max(1, res_depth));
  const double min_gap = std::max(0.02, fam.resolution);

  std::vector<PartitionConfig> configs;
  std::vector<int> depth_tag;
  for (int d = 1; d <= max_depth; ++d) {
    for (auto& cfg : dyadic_configs_at(d)) {
      configs.push_back(std::move(cfg));
      depth_tag.push_back(d);
    }
  }
  if (fam.resolution <= 0.26) {
    for (auto& cfg :
         random_configs(opt.n_random_configs, opt.seed, min_gap, fam.resolution)) {
      configs.push_back(std::move(cfg));
      depth_tag.push_back(0);
    }
  }

  rep.alpha = estimate_alpha(fam, configs, opt.rank_tol);
  rep.beta = estimate_beta(fam, configs, opt.rank_tol);
  rep.alpha_witness_config = configs[rep.alpha.witness];
  rep.beta_witness_config = configs[rep.beta.witness];
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const int d = depth_tag[i];
    if (std::isfinite(rep.alpha.per_config[i])) {
      auto [it, fresh] = rep.alpha_by_depth.try_emplace(d, rep.alpha.per_config[i]);
      if (!fresh) it->second = std::min(it->second, rep.alpha.per_config[i]);
    }
    if (std::isfinite(rep.beta.per_config[i])) {
      auto [it, fresh] = rep.beta_by_depth.try_emplace(d, rep.beta.per_config[i]);
      if (!fresh) it->second = std::min(it->second, rep.beta.per_config[i]);
    }
  }
  rep.alpha_pass = rep.alpha.value > opt.alpha_threshold;
  rep.beta_pass = rep.beta.value > opt.beta_threshold;

  rep.row_sums = check_row_sums(fam, uniform_grid(opt.rowsum_m), opt.rowsum_tolerance);
  rep.all_pass =
      rep.regularity.pass && rep.alpha_pass && rep.beta_pass && rep.row_sums.pass;
  return rep;
}

}  // namespace chaoskit
