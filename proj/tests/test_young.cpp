// Young integrals, Euler SDE schemes, Jacobian flows and the Duhamel blocks.
// Oracles: closed-form left-point sums (computed symbolically), classical
// calculus limits, exact additive-noise solutions, the exponential chain-rule
// solution, and finite differences of the discrete Euler map.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "chaoskit/chaos.hpp"
#include "chaoskit/kernels.hpp"
#include "chaoskit/young.hpp"

using namespace chaoskit;

namespace {

Path<double> path_from(const std::function<double(double)>& fn, int m, double holder) {
  Path<double> p;
  p.holder = holder;
  p.values.reserve(m + 1);
  for (int k = 0; k <= m; ++k) p.values.push_back(fn(static_cast<double>(k) / m));
  return p;
}

// scalar n=1 chaos path and its (deterministic) Malliavin derivative path on
// a uniform grid
struct ScalarDriver {
  Path<double> x;
  Path<VectorXd> dx;
};

ScalarDriver chaos_driver(const KernelFamily& fam, const VectorXd& z, int m) {
  ScalarDriver out;
  out.x.holder = fam.rho;
  out.dx.holder = fam.rho;
  for (int k = 0; k <= m; ++k) {
    const SymTensord f = fam.at(static_cast<double>(k) / m);
    out.x.values.push_back(evaluate(f, z));
    out.dx.values.push_back(to_coords(f));
  }
  return out;
}

// left-point sum of t d(t^2) on the uniform m-grid, derived by hand:
// sum_{i<m} (i/m) ((i+1)^2 - i^2)/m^2 = (m-1)(4m+1)/(6 m^2)
double t_dtsq_closed_form(int m) {
  return (m - 1.0) * (4.0 * m + 1.0) / (6.0 * m * m);
}

}  // namespace

TEST_CASE("left-point integral matches hand-derived closed forms") {
  const int m = 1024;
  const Path<double> g = path_from([](double t) { return t; }, m, 1.0);
  const Path<double> x = path_from([](double t) { return t * t; }, m, 1.0);
  const auto r = young_integral(g, x);
  CHECK(r.value == doctest::Approx(t_dtsq_closed_form(m)).epsilon(1e-13));
  CHECK(std::abs(r.value - 2.0 / 3.0) <= 1e-3);
  CHECK(r.refinement_error ==
        doctest::Approx(std::abs(t_dtsq_closed_form(m) - t_dtsq_closed_form(m / 2)))
            .epsilon(1e-10));
}

TEST_CASE("constant integrand telescopes to the endpoint difference") {
  const int m = 1024;  // dyadic values keep every partial sum exact
  const Path<double> one = path_from([](double) { return 1.0; }, m, 1.0);
  const Path<double> x = path_from([](double t) { return t; }, m, 1.0);
  const auto r = young_integral(one, x);
  CHECK(r.value == 1.0);

  Path<VectorXd> vx;
  for (int k = 0; k <= 8; ++k) vx.values.push_back(Eigen::Vector2d(k / 8.0, -k / 4.0));
  const auto vr = young_integral(path_from([](double) { return 1.0; }, 8, 1.0), vx);
  CHECK((vr.value - Eigen::Vector2d(1.0, -2.0)).norm() == 0.0);
}

TEST_CASE("smooth chain rule: integral of X dX has no correction term") {
  const int m = 1024;
  const Path<double> x =
      path_from([](double t) { return 0.5 * t + 0.3 * std::sin(2 * M_PI * t); }, m, 1.0);
  const auto r = young_integral(x, x);
  const double exact = 0.5 * (x.values[m] * x.values[m] - x.values[0] * x.values[0]);
  CHECK(std::abs(r.value - exact) <= 1.5 * r.refinement_error + 1e-12);
  CHECK(r.refinement_error < 1e-2);
}

TEST_CASE("integrals are additive across a grid split point") {
  const int m = 256;
  const Path<double> g = path_from([](double t) { return std::cos(3 * t); }, m, 1.0);
  const Path<double> x = path_from([](double t) { return t + 0.2 * std::sin(5 * t); }, m, 1.0);
  const double whole = young_integral(g, x).value;
  for (int cut : {64, 128, 200}) {
    const double left = young_integral(sub_path(g, 0, cut), sub_path(x, 0, cut)).value;
    const double right = young_integral(sub_path(g, cut, m), sub_path(x, cut, m)).value;
    CHECK(whole == doctest::Approx(left + right).epsilon(1e-13));
  }
}

TEST_CASE("regime and grid violations are rejected") {
  const Path<double> g_rough = path_from([](double t) { return t; }, 16, 0.4);
  const Path<double> x_rough = path_from([](double t) { return t; }, 16, 0.5);
  CHECK_THROWS_AS(young_integral(g_rough, x_rough), YoungRegimeError);

  const Path<double> g = path_from([](double t) { return t; }, 16, 1.0);
  const Path<double> x_off = path_from([](double t) { return t; }, 32, 1.0);
  CHECK_THROWS_AS(young_integral(g, x_off), std::invalid_argument);

  Path<double> empty;
  CHECK_THROWS_AS(young_integral(g, empty), std::invalid_argument);
  CHECK_THROWS_AS(sub_path(g, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(half_path(path_from([](double t) { return t; }, 15, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("Hoelder seminorm of the linear path is exactly one") {
  const Path<double> lin = path_from([](double t) { return t; }, 64, 1.0);
  CHECK(holder_seminorm(lin, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(holder_seminorm(lin, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("field builders differentiate consistently with finite differences") {
  const VectorXd y = (VectorXd(2) << 0.3, -1.2).finished();
  for (const VectorFieldSet& vf :
       {make_linear_fields(2, 0.7), make_elliptic_sine_fields(2, 0.1),
        make_affine_fields({MatrixXd::Zero(2, 2), (MatrixXd(2, 2) << 1, 2, 3, 4).finished(),
                            MatrixXd::Identity(2, 2)},
                           {VectorXd::Zero(2), (VectorXd(2) << 1, 0).finished(),
                            (VectorXd(2) << 0, 1).finished()})}) {
    INFO(vf.name);
    CHECK(check_field_derivatives(vf, y) <= 1e-8);
  }
  CHECK_THROWS_AS(make_linear_fields(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_elliptic_sine_fields(2, 1.5), std::invalid_argument);
}

TEST_CASE("additive noise and pure drift are solved exactly") {
  const int m = 128;
  // V_1 = (2,0), V_2 = (0,-1), no drift: Y = y0 + sum_i b_i (X^i_t - X^i_0)
  const VectorFieldSet add = make_affine_fields(
      {MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)},
      {VectorXd::Zero(2), (VectorXd(2) << 2, 0).finished(), (VectorXd(2) << 0, -1).finished()});
  const Path<double> x1 = path_from([](double t) { return std::sin(t); }, m, 1.0);
  const Path<double> x2 = path_from([](double t) { return t * t; }, m, 1.0);
  const VectorXd y0 = (VectorXd(2) << 0.5, 1.5).finished();
  const auto sol = solve_sde(add, {x1, x2}, y0);
  for (int k = 0; k <= m; k += 16) {
    const Eigen::Vector2d expect(0.5 + 2 * (x1.values[k] - x1.values[0]),
                                 1.5 - (x2.values[k] - x2.values[0]));
    CHECK((sol.y.values[k] - expect).norm() <= 1e-13);
  }
  // half-grid companion equals a direct solve on the coarsened drivers
  const auto coarse = solve_sde(add, {half_path(x1), half_path(x2)}, y0);
  REQUIRE(sol.y_half.values.size() == coarse.y.values.size());
  for (std::size_t k = 0; k < coarse.y.values.size(); ++k)
    CHECK((sol.y_half.values[k] - coarse.y.values[k]).norm() == 0.0);

  // drift only: Y = y0 + b0 t
  const VectorFieldSet drift = make_affine_fields(
      {MatrixXd::Zero(1, 1), MatrixXd::Zero(1, 1)},
      {(VectorXd(1) << 0.3).finished(), VectorXd::Zero(1)});
  const Path<double> flat = path_from([](double) { return 0.0; }, m, 1.0);
  const auto dsol = solve_sde(drift, {flat}, VectorXd::Zero(1));
  CHECK(std::abs(dsol.y.values[m](0) - 0.3) <= 1e-12);
}

TEST_CASE("exponential benchmark converges at first order on smooth drivers") {
  const VectorFieldSet lin = make_linear_fields(1, 1.0);
  const VectorXd y0 = (VectorXd(1) << 1.0).finished();
  auto xfun = [](double t) { return 0.4 * t + 0.25 * std::sin(2 * M_PI * t); };
  const double exact = std::exp(xfun(1.0) - xfun(0.0));
  std::vector<double> logerr;
  for (int lvl = 5; lvl <= 9; ++lvl) {
    const int m = 1 << lvl;
    const auto sol = solve_sde(lin, {path_from(xfun, m, 1.0)}, y0);
    logerr.push_back(std::log2(std::abs(sol.y.values[m](0) - exact)));
  }
  // least-squares slope of log2(error) against the level
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < logerr.size(); ++i) {
    sx += i;
    sy += logerr[i];
    sxx += static_cast<double>(i) * i;
    sxy += i * logerr[i];
  }
  const double n = static_cast<double>(logerr.size());
  const double slope = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  INFO("empirical order ", slope);
  CHECK(slope >= 0.8);
  CHECK(slope <= 1.6);
}

TEST_CASE("scalar linear Jacobian tracks the exponential of the driver") {
  const int m = 4096;
  const VectorFieldSet lin = make_linear_fields(1, 1.2);
  auto xfun = [](double t) { return 0.4 * t + 0.25 * std::sin(2 * M_PI * t); };
  const Path<double> x = path_from(xfun, m, 1.0);
  const auto sol = solve_sde(lin, {x}, (VectorXd(1) << 1.0).finished());
  const auto jac = solve_jacobian(lin, {x}, sol.y);
  CHECK(jac.values[0](0, 0) == 1.0);
  const double exact = std::exp(1.2 * (xfun(1.0) - xfun(0.0)));
  CHECK(jac.values[m](0, 0) == doctest::Approx(exact).epsilon(5e-3));
}

TEST_CASE("implicit inverse flow keeps the Jacobian product at identity") {
  const int m = 4096;
  const VectorFieldSet vf = make_elliptic_sine_fields(2, 0.1);
  const Path<double> x1 =
      path_from([](double t) { return 0.5 * t + 0.1 * std::sin(2 * M_PI * t); }, m, 1.0);
  const Path<double> x2 =
      path_from([](double t) { return 0.3 * t + 0.2 * std::cos(2 * M_PI * t) - 0.2; }, m, 1.0);
  const auto sol = solve_sde(vf, {x1, x2}, VectorXd::Zero(2));
  const auto jac = solve_jacobian(vf, {x1, x2}, sol.y);
  const auto jinv = solve_jacobian_inverse(vf, {x1, x2}, sol.y);
  const double err = jacobian_product_error(jac, jinv);
  INFO("max ||J Jinv - I|| = ", err);
  CHECK(err <= 1e-6);   // the contract
  CHECK(err <= 1e-9);   // what the implicit step actually delivers
}

TEST_CASE("rough or mismatched drivers are rejected before solving") {
  const VectorFieldSet lin = make_linear_fields(1, 1.0);
  const Path<double> rough = path_from([](double t) { return t; }, 16, 0.5);
  CHECK_THROWS_AS(solve_sde(lin, {rough}, VectorXd::Zero(1)), YoungRegimeError);
  const Path<double> ok = path_from([](double t) { return t; }, 16, 1.0);
  CHECK_THROWS_AS(solve_sde(lin, {ok, ok}, VectorXd::Zero(1)), std::invalid_argument);
  CHECK_THROWS_AS(solve_sde(lin, {ok}, VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("a superlinear field trips the overflow guard with a blow-up time") {
  VectorFieldSet quad;
  quad.name = "quadratic";
  quad.dim = 1;
  quad.field = [](int i, const VectorXd& y) {
    return i == 0 ? VectorXd::Zero(1).eval() : y.cwiseProduct(y).eval();
  };
  quad.jacobian = [](int i, const VectorXd& y) {
    MatrixXd j = MatrixXd::Zero(1, 1);
    if (i == 1) j(0, 0) = 2.0 * y(0);
    return j;
  };
  const Path<double> steep = path_from([](double t) { return 4.0 * t; }, 64, 1.0);
  try {
    solve_sde(quad, {steep}, (VectorXd(1) << 1.0).finished());
    FAIL("expected a blow-up");
  } catch (const BlowupError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() <= 1.0);
  }
}

TEST_CASE("Duhamel blocks: additive noise reproduces the driver derivative") {
  const KernelFamily fam = make_fd(4, 1.5);
  const int m = 64;
  const VectorXd z = draw_gaussian_sample(11, 0, fam.dim).z;
  const ScalarDriver drv = chaos_driver(fam, z, m);
  const VectorFieldSet add = make_affine_fields(
      {MatrixXd::Zero(1, 1), MatrixXd::Zero(1, 1)},
      {VectorXd::Zero(1), (VectorXd(1) << 1.0).finished()});
  const auto sol = solve_sde(add, {drv.x}, VectorXd::Zero(1));
  const auto jac = solve_jacobian(add, {drv.x}, sol.y);
  const auto jinv = solve_jacobian_inverse(add, {drv.x}, sol.y);
  const auto mal = duhamel_malliavin(add, {drv.dx}, sol.y, jac, jinv);
  // J == I and V == 1, so DY telescopes to the final derivative value
  const VectorXd expect = to_coords(fam.at(1.0));
  CHECK((mal.dy[0].row(0).transpose() - expect).norm() <= 1e-12);
  CHECK(mal.matrix(0, 0) == doctest::Approx(inner(fam.at(1.0), fam.at(1.0))).epsilon(1e-12));
}

TEST_CASE("Duhamel blocks match finite differences of the Euler map") {
  const KernelFamily fam = make_fd(3, 1.5);
  const int m = 256;
  const VectorFieldSet vf = make_elliptic_sine_fields(2, 0.1);
  std::vector<ScalarDriver> drv;
  std::vector<Path<double>> xs;
  std::vector<Path<VectorXd>> dxs;
  for (int i = 0; i < 2; ++i) {
    drv.push_back(chaos_driver(fam, draw_gaussian_sample(21, i, fam.dim).z, m));
    xs.push_back(drv.back().x);
    dxs.push_back(drv.back().dx);
  }
  const VectorXd y0 = (VectorXd(2) << 0.2, -0.4).finished();
  const auto sol = solve_sde(vf, xs, y0);
  const auto jac = solve_jacobian(vf, xs, sol.y);
  const auto jinv = solve_jacobian_inverse(vf, xs, sol.y);
  const auto mal = duhamel_malliavin(vf, dxs, sol.y, jac, jinv);

  // independent oracle: bump one Gaussian coordinate of one driver and re-run
  // the solver; the sensitivity approximates the corresponding block column
  const double h = 1e-5;
  double worst = 0.0;
  for (int j = 0; j < 2; ++j) {
    for (int c : {0, 3, 6}) {
      auto bump = [&](double sign) {
        std::vector<Path<double>> xb = xs;
        for (int k = 0; k <= m; ++k) {
          const double basis = to_coords(fam.at(static_cast<double>(k) / m))(c);
          xb[j].values[k] += sign * h * basis;
        }
        return solve_sde(vf, xb, y0).y.values[m];
      };
      const VectorXd fd = (bump(1.0) - bump(-1.0)) / (2.0 * h);
      worst = std::max(worst, (fd - mal.dy[j].col(c)).norm() / (fd.norm() + 1e-12));
    }
  }
  INFO("worst relative sensitivity mismatch ", worst);
  CHECK(worst <= 0.05);

  // Gram structure: symmetric, PSD
  CHECK((mal.matrix - mal.matrix.transpose()).norm() <= 1e-14);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(mal.matrix);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);

  CHECK_THROWS_AS(duhamel_malliavin(vf, dxs, sol.y, jac, jinv, 0), std::invalid_argument);
  CHECK_THROWS_AS(duhamel_malliavin(vf, {dxs[0]}, sol.y, jac, jinv), std::invalid_argument);
}
