#pragma once
// Young integration on uniform grids, Euler schemes for Young-regime SDEs,
// Jacobian and inverse-Jacobian flows, and the Duhamel blocks that assemble
// the Malliavin derivative and Malliavin matrix of an SDE solution.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chaoskit/sym_tensor.hpp"

namespace chaoskit {

using VectorXd = VectorX<double>;
using MatrixXd = MatrixX<double>;

/// Thrown when an integrand/integrator pair leaves the Young regime
/// (Hoelder exponents summing to <= 1).
class YoungRegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an Euler iterate exceeds the overflow guard; carries the grid
/// time at which the solution blew up.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_ = 0.0;
};

// ---------------------------------------------------------------------------
// Paths on uniform grids.

/// Values of a path on the uniform grid t0 + k*(t1-t0)/m, k = 0..m, together
/// with the Hoelder exponent the path claims.  V may be double, VectorXd or
/// MatrixXd.
template <typename V>
struct Path {
  std::vector<V> values;
  double holder = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;

  int steps() const { return static_cast<int>(values.size()) - 1; }
  double dt() const { return (t1 - t0) / steps(); }
  double time(int i) const { return t0 + (t1 - t0) * i / steps(); }

  void require_valid() const {
    if (values.size() < 2) throw std::invalid_argument("Path: need >= 2 grid values");
    if (!(t1 > t0)) throw std::invalid_argument("Path: t1 must exceed t0");
    if (!(holder > 0.0 && holder <= 1.0))
      throw std::invalid_argument("Path: Hoelder exponent in (0,1]");
  }
};

namespace detail {

inline double vnorm(double x) { return std::abs(x); }
template <typename Derived>
double vnorm(const Eigen::MatrixBase<Derived>& x) {
  return x.norm();
}

template <typename V>
void check_common_grid(const Path<double>& g, const Path<V>& x) {
  g.require_valid();
  x.require_valid();
  if (g.values.size() != x.values.size())
    throw std::invalid_argument("young_integral: paths live on different grids");
  if (std::abs(g.t0 - x.t0) > 1e-12 || std::abs(g.t1 - x.t1) > 1e-12)
    throw std::invalid_argument("young_integral: paths cover different time ranges");
}

}  // namespace detail

/// Restrict a path to the grid indices [a, b] (inclusive); the result keeps
/// the original spacing and time stamps.
template <typename V>
Path<V> sub_path(const Path<V>& p, int a, int b) {
  p.require_valid();
  if (a < 0 || b <= a || b > p.steps())
    throw std::invalid_argument("sub_path: bad index range");
  Path<V> out;
  out.values.assign(p.values.begin() + a, p.values.begin() + b + 1);
  out.holder = p.holder;
  out.t0 = p.time(a);
  out.t1 = p.time(b);
  return out;
}

/// Keep every second grid point (requires an even step count).
template <typename V>
Path<V> half_path(const Path<V>& p) {
  p.require_valid();
  if (p.steps() % 2 != 0) throw std::invalid_argument("half_path: step count must be even");
  Path<V> out;
  out.holder = p.holder;
  out.t0 = p.t0;
  out.t1 = p.t1;
  out.values.reserve(p.steps() / 2 + 1);
  for (int k = 0; k <= p.steps(); k += 2) out.values.push_back(p.values[k]);
  return out;
}

/// Hoelder seminorm of a path over all grid pairs: max |p_t - p_s| / |t-s|^e.
template <typename V>
double holder_seminorm(const Path<V>& p, double exponent) {
  p.require_valid();
  if (!(exponent > 0.0 && exponent <= 1.0))
    throw std::invalid_argument("holder_seminorm: exponent in (0,1]");
  const int m = p.steps();
  double best = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j <= m; ++j) {
      const double gap = p.time(j) - p.time(i);
      best = std::max(best, detail::vnorm(p.values[j] - p.values[i]) /
                                std::pow(gap, exponent));
    }
  return best;
}

// ---------------------------------------------------------------------------
// Young integrals.

template <typename XV>
struct YoungResult {
  XV value;
  /// |value - value on the half-coarsened grid|; NaN when the grid cannot be
  /// halved.  In the Young regime this gap shrinks like m^{1-tau-rho}.
  double refinement_error = std::numeric_limits<double>::quiet_NaN();
};

/// Left-point Riemann-Stieltjes sum sum_k g_{t_k} (x_{t_{k+1}} - x_{t_k}).
template <typename XV>
YoungResult<XV> young_integral(const Path<double>& g, const Path<XV>& x) {
  detail::check_common_grid(g, x);
  if (!(g.holder + x.holder > 1.0))
    throw YoungRegimeError("young_integral: outside Young regime (tau + rho <= 1)");
  const int m = x.steps();
  XV sum = g.values[0] * (x.values[1] - x.values[0]);
  for (int k = 1; k < m; ++k) sum += g.values[k] * (x.values[k + 1] - x.values[k]);
  YoungResult<XV> out{sum, std::numeric_limits<double>::quiet_NaN()};
  if (m >= 4 && m % 2 == 0) {
    XV half = g.values[0] * (x.values[2] - x.values[0]);
    for (int k = 2; k < m; k += 2) half += g.values[k] * (x.values[k + 2] - x.values[k]);
    out.refinement_error = detail::vnorm(sum - half);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vector fields.

/// Drift V_0 and diffusion fields V_1..V_d on R^d with their derivatives.
/// Index 0 addresses the drift throughout.
struct VectorFieldSet {
  std::string name;
  int dim = 1;
  bool elliptic = false;
  std::function<VectorXd(int, const VectorXd&)> field;
  std::function<MatrixXd(int, const VectorXd&)> jacobian;

  VectorXd V(int i, const VectorXd& y) const {
    check(i, y);
    return field(i, y);
  }
  MatrixXd DV(int i, const VectorXd& y) const {
    check(i, y);
    return jacobian(i, y);
  }

 private:
  void check(int i, const VectorXd& y) const {
    if (i < 0 || i > dim) throw std::invalid_argument("VectorFieldSet: field index out of range");
    if (y.size() != dim) throw std::invalid_argument("VectorFieldSet: state dimension mismatch");
    if (!field || !jacobian) throw std::invalid_argument("VectorFieldSet: fields not set");
  }
};

/// Decoupled linear diffusion V_i(y) = a y_i e_i with zero drift; the scalar
/// case is the classical exponential benchmark Y_t = y_0 exp(a (X_t - X_0)).
inline VectorFieldSet make_linear_fields(int d, double a) {
  if (d < 1) throw std::invalid_argument("make_linear_fields: dim >= 1");
  VectorFieldSet out;
  out.name = "linear";
  out.dim = d;
  out.field = [d, a](int i, const VectorXd& y) {
    VectorXd v = VectorXd::Zero(d);
    if (i >= 1) v(i - 1) = a * y(i - 1);
    return v;
  };
  out.jacobian = [d, a](int i, const VectorXd&) {
    MatrixXd j = MatrixXd::Zero(d, d);
    if (i >= 1) j(i - 1, i - 1) = a;
    return j;
  };
  return out;
}

/// Affine fields V_i(y) = A_i y + b_i, i = 0..d (index 0 is the drift).
inline VectorFieldSet make_affine_fields(std::vector<MatrixXd> a, std::vector<VectorXd> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("make_affine_fields: need matching A_i and b_i for i = 0..d");
  const int d = static_cast<int>(a.size()) - 1;
  if (d < 1) throw std::invalid_argument("make_affine_fields: need at least one diffusion field");
  for (int i = 0; i <= d; ++i)
    if (a[i].rows() != d || a[i].cols() != d || b[i].size() != d)
      throw std::invalid_argument("make_affine_fields: shape mismatch");
  auto sa = std::make_shared<const std::vector<MatrixXd>>(std::move(a));
  auto sb = std::make_shared<const std::vector<VectorXd>>(std::move(b));
  VectorFieldSet out;
  out.name = "affine";
  out.dim = d;
  out.field = [sa, sb](int i, const VectorXd& y) -> VectorXd {
    return (*sa)[i] * y + (*sb)[i];
  };
  out.jacobian = [sa](int i, const VectorXd&) { return (*sa)[i]; };
  return out;
}

/// Elliptic benchmark: V_i(y) = (1 + amp sin y_i) e_i, zero drift.  The
/// diffusion matrix is diagonal with entries in [1-amp, 1+amp], hence
/// uniformly elliptic for amp < 1.
inline VectorFieldSet make_elliptic_sine_fields(int d, double amp = 0.1) {
  if (d < 1) throw std::invalid_argument("make_elliptic_sine_fields: dim >= 1");
  if (!(amp >= 0.0 && amp < 1.0))
    throw std::invalid_argument("make_elliptic_sine_fields: amp in [0,1)");
  VectorFieldSet out;
  out.name = "elliptic-sine";
  out.dim = d;
  out.elliptic = true;
  out.field = [d, amp](int i, const VectorXd& y) {
    VectorXd v = VectorXd::Zero(d);
    if (i >= 1) v(i - 1) = 1.0 + amp * std::sin(y(i - 1));
    return v;
  };
  out.jacobian = [d, amp](int i, const VectorXd& y) {
    MatrixXd j = MatrixXd::Zero(d, d);
    if (i >= 1) j(i - 1, i - 1) = amp * std::cos(y(i - 1));
    return j;
  };
  return out;
}

/// Largest mismatch between the declared derivatives and central finite
/// differences of the fields at state y.
inline double check_field_derivatives(const VectorFieldSet& vf, const VectorXd& y,
                                      double h = 1e-6) {
  double worst = 0.0;
  for (int i = 0; i <= vf.dim; ++i) {
    const MatrixXd jac = vf.DV(i, y);
    for (int c = 0; c < vf.dim; ++c) {
      VectorXd yp = y, ym = y;
      yp(c) += h;
      ym(c) -= h;
      const VectorXd fd = (vf.V(i, yp) - vf.V(i, ym)) / (2.0 * h);
      worst = std::max(worst, (fd - jac.col(c)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Euler schemes.

namespace detail {

inline void check_drivers(const VectorFieldSet& vf, const std::vector<Path<double>>& x) {
  if (static_cast<int>(x.size()) != vf.dim)
    throw std::invalid_argument("solve_sde: need one driver per diffusion field");
  for (const auto& p : x) {
    p.require_valid();
    if (!(p.holder > 0.5))
      throw YoungRegimeError("solve_sde: driver Hoelder exponent must exceed 1/2");
    if (p.values.size() != x[0].values.size() || std::abs(p.t0 - x[0].t0) > 1e-12 ||
        std::abs(p.t1 - x[0].t1) > 1e-12)
      throw std::invalid_argument("solve_sde: drivers live on different grids");
  }
}

inline Path<VectorXd> euler_forward(const VectorFieldSet& vf,
                                    const std::vector<Path<double>>& x, const VectorXd& y0,
                                    double guard) {
  const int m = x[0].steps();
  const double dt = x[0].dt();
  Path<VectorXd> out;
  out.holder = x[0].holder;
  out.t0 = x[0].t0;
  out.t1 = x[0].t1;
  out.values.reserve(m + 1);
  out.values.push_back(y0);
  VectorXd y = y0;
  for (int k = 0; k < m; ++k) {
    VectorXd step = vf.V(0, y) * dt;
    for (int i = 1; i <= vf.dim; ++i)
      step += vf.V(i, y) * (x[i - 1].values[k + 1] - x[i - 1].values[k]);
    y += step;
    if (!y.allFinite() || y.norm() > guard)
      throw BlowupError("solve_sde: solution exceeded the overflow guard",
                        x[0].time(k + 1));
    out.values.push_back(y);
  }
  return out;
}

}  // namespace detail

struct SdeSolution {
  Path<VectorXd> y;
  /// Same scheme on the half-coarsened grid (empty when the grid is odd);
  /// comparing the endpoints monitors convergence.
  Path<VectorXd> y_half;
};

/// Left-point Euler for dY = sum_i V_i(Y) dX^i + V_0(Y) dt, Y_0 = y0.
inline SdeSolution solve_sde(const VectorFieldSet& vf, const std::vector<Path<double>>& x,
                             const VectorXd& y0, double guard = 1e12) {
  detail::check_drivers(vf, x);
  if (y0.size() != vf.dim) throw std::invalid_argument("solve_sde: y0 dimension mismatch");
  SdeSolution out;
  out.y = detail::euler_forward(vf, x, y0, guard);
  if (x[0].steps() % 2 == 0 && x[0].steps() >= 4) {
    std::vector<Path<double>> xh;
    xh.reserve(x.size());
    for (const auto& p : x) xh.push_back(half_path(p));
    out.y_half = detail::euler_forward(vf, xh, y0, guard);
  }
  return out;
}

/// Euler for the linearized flow dJ = sum_i DV_i(Y) J dX^i + DV_0(Y) J dt,
/// J_0 = I.
inline Path<MatrixXd> solve_jacobian(const VectorFieldSet& vf,
                                     const std::vector<Path<double>>& x,
                                     const Path<VectorXd>& y, double guard = 1e12) {
  detail::check_drivers(vf, x);
  y.require_valid();
  if (y.values.size() != x[0].values.size())
    throw std::invalid_argument("solve_jacobian: solution grid mismatch");
  const int m = x[0].steps();
  const double dt = x[0].dt();
  const int d = vf.dim;
  Path<MatrixXd> out;
  out.holder = x[0].holder;
  out.t0 = x[0].t0;
  out.t1 = x[0].t1;
  out.values.reserve(m + 1);
  MatrixXd j = MatrixXd::Identity(d, d);
  out.values.push_back(j);
  for (int k = 0; k < m; ++k) {
    MatrixXd b = vf.DV(0, y.values[k]) * dt;
    for (int i = 1; i <= d; ++i)
      b += vf.DV(i, y.values[k]) * (x[i - 1].values[k + 1] - x[i - 1].values[k]);
    j += b * j;
    if (!j.allFinite() || j.norm() > guard)
      throw BlowupError("solve_jacobian: flow exceeded the overflow guard",
                        x[0].time(k + 1));
    out.values.push_back(j);
  }
  return out;
}

/// Implicit left-point Euler for the inverse flow
/// dJ^{-1} = -J^{-1} DV_i(Y) dX^i - J^{-1} DV_0(Y) dt: each step solves
/// Jinv_{k+1} (I + B_k) = Jinv_k, which keeps J_k Jinv_k = I to rounding.
inline Path<MatrixXd> solve_jacobian_inverse(const VectorFieldSet& vf,
                                             const std::vector<Path<double>>& x,
                                             const Path<VectorXd>& y, double guard = 1e12) {
  detail::check_drivers(vf, x);
  y.require_valid();
  if (y.values.size() != x[0].values.size())
    throw std::invalid_argument("solve_jacobian_inverse: solution grid mismatch");
  const int m = x[0].steps();
  const double dt = x[0].dt();
  const int d = vf.dim;
  Path<MatrixXd> out;
  out.holder = x[0].holder;
  out.t0 = x[0].t0;
  out.t1 = x[0].t1;
  out.values.reserve(m + 1);
  MatrixXd jinv = MatrixXd::Identity(d, d);
  out.values.push_back(jinv);
  for (int k = 0; k < m; ++k) {
    MatrixXd b = vf.DV(0, y.values[k]) * dt;
    for (int i = 1; i <= d; ++i)
      b += vf.DV(i, y.values[k]) * (x[i - 1].values[k + 1] - x[i - 1].values[k]);
    const MatrixXd step = MatrixXd::Identity(d, d) + b;
    jinv = step.transpose().partialPivLu().solve(jinv.transpose()).transpose();
    if (!jinv.allFinite() || jinv.norm() > guard)
      throw BlowupError("solve_jacobian_inverse: flow exceeded the overflow guard",
                        x[0].time(k + 1));
    out.values.push_back(jinv);
  }
  return out;
}

/// max over grid times of ||J_k Jinv_k - I||_F.
inline double jacobian_product_error(const Path<MatrixXd>& j, const Path<MatrixXd>& jinv) {
  if (j.values.size() != jinv.values.size())
    throw std::invalid_argument("jacobian_product_error: grid mismatch");
  const auto d = j.values[0].rows();
  double worst = 0.0;
  for (std::size_t k = 0; k < j.values.size(); ++k)
    worst = std::max(worst,
                     (j.values[k] * jinv.values[k] - MatrixXd::Identity(d, d)).norm());
  return worst;
}

// ---------------------------------------------------------------------------
// Duhamel blocks and the Malliavin matrix.

struct MalliavinBlocks {
  /// One block per driver j: the derivative of Y_t with respect to driver j's
  /// underlying Gaussian coordinates, a dim x ambient matrix.
  std::vector<MatrixXd> dy;
  /// Malliavin matrix C_t = sum_j dy_j dy_j^T (symmetric PSD).
  MatrixXd matrix;
};

/// Chain-rule evaluation of D^j Y_t = int_0^t J_{t<-s} V_j(Y_s) d D^j X_s via
/// the cumulative sums A_j = sum_k Jinv_k V_j(Y_k) (Delta DX_k)^T and
/// D^j Y_t = J_t A_j; one pass over the grid serves every driver.
inline MalliavinBlocks duhamel_malliavin(const VectorFieldSet& vf,
                                         const std::vector<Path<VectorXd>>& dx,
                                         const Path<VectorXd>& y, const Path<MatrixXd>& j,
                                         const Path<MatrixXd>& jinv, int upto = -1) {
  if (static_cast<int>(dx.size()) != vf.dim)
    throw std::invalid_argument("duhamel_malliavin: need one derivative path per driver");
  y.require_valid();
  const int m = y.steps();
  if (upto < 0) upto = m;
  if (upto < 1 || upto > m) throw std::invalid_argument("duhamel_malliavin: time index out of range");
  if (static_cast<int>(j.values.size()) != m + 1 ||
      static_cast<int>(jinv.values.size()) != m + 1)
    throw std::invalid_argument("duhamel_malliavin: flow grids mismatch");
  const auto ambient = dx[0].values[0].size();
  for (const auto& p : dx) {
    p.require_valid();
    if (static_cast<int>(p.values.size()) != m + 1)
      throw std::invalid_argument("duhamel_malliavin: derivative path grid mismatch");
    for (const auto& v : p.values)
      if (v.size() != ambient)
        throw std::invalid_argument("duhamel_malliavin: derivative path dimension mismatch");
  }
  const int d = vf.dim;
  MalliavinBlocks out;
  out.dy.reserve(d);
  out.matrix = MatrixXd::Zero(d, d);
  for (int jdx = 1; jdx <= d; ++jdx) {
    MatrixXd a = MatrixXd::Zero(d, ambient);
    for (int k = 0; k < upto; ++k) {
      const VectorXd delta = dx[jdx - 1].values[k + 1] - dx[jdx - 1].values[k];
      a.noalias() += (jinv.values[k] * vf.V(jdx, y.values[k])) * delta.transpose();
    }
    MatrixXd block = j.values[upto] * a;
    out.matrix.noalias() += block * block.transpose();
    out.dy.push_back(std::move(block));
  }
  return out;
}

}  // namespace chaoskit
