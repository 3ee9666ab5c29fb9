// Scaling-regularity fits, partition configurations and the conditional
// non-degeneracy estimators.  Oracles: families with exactly polynomial
// increment variance (slope and intercept known in closed form), hand-built
// two-node families where residuals are exactly 0 or 1, and hand-counted
// dyadic configuration sets.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "chaoskit/assumptions.hpp"
#include "chaoskit/kernels.hpp"

using namespace chaoskit;

namespace {

SymTensord vec2(double a, double b) {
  SymTensord f(1, 2);
  if (a != 0.0) f.set(MultiIndex::of({1}), a);
  if (b != 0.0) f.set(MultiIndex::of({2}), b);
  return f;
}

// n = 1, d = 2, f_t = t * (a e_1 + b e_2): increment variance is exactly
// (a^2 + b^2) |t-s|^2, so the log-log fit must reproduce slope 2 and the
// intercept log(a^2 + b^2) to rounding.
KernelFamily linear_family(double a, double b) {
  return make_custom({{0.0, vec2(0.0, 0.0)}, {1.0, vec2(a, b)}}, 2.0);
}

// Increments over [0, 1/2] span e_1 only, over [1/2, 1] span e_2 only, at a
// single scale: conditional residuals across the break are exactly 0 or 1.
KernelFamily split_family() {
  return make_custom({{0.0, vec2(0.0, 0.0)}, {0.5, vec2(1.0, 0.0)}, {1.0, vec2(1.0, 1.0)}},
                     2.0);
}

}  // namespace

TEST_CASE("regularity fit recovers exact power scaling to rounding") {
  const KernelFamily fam = linear_family(3.0, 4.0);
  const RegularityFit fit = check_regularity(fam, uniform_grid(16));
  CHECK(fit.theta_hat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.log_c_hat == doctest::Approx(std::log(25.0)).epsilon(1e-12));
  CHECK(fit.max_log_residual <= 1e-12);
  CHECK(fit.min_variance > 0.0);
  CHECK(fit.pass);
  CHECK(fit.n_pairs == 16 * 17 / 2);

  // restricted to the first half, the two-block family is exactly linear too
  std::vector<double> half;
  for (int k = 0; k <= 8; ++k) half.push_back(k / 16.0);
  const RegularityFit bfit = check_regularity(make_blk2(), half);
  CHECK(bfit.theta_hat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(bfit.max_log_residual <= 1e-10);
}

TEST_CASE("regularity fit lands near the claimed exponent for every family") {
  struct Case {
    KernelFamily fam;
    int m;
    double tol;  // truncated ladders drift away from the nominal slope at
                 // exponents far from 3/2; the two-block family wobbles
                 // across its break
  };
  const std::vector<Case> cases = {
      {make_fd(6, 1.2), 64, 0.25},   {make_fd(6, 1.5), 64, 0.1},
      {make_fd(6, 1.8), 64, 0.25},   {make_herm2(5, 1.5), 32, 0.1},
      {make_rosen(0.85, 32), 32, 0.15}, {make_blk2(), 16, 0.35},
  };
  for (const auto& [fam, m, tol] : cases) {
    const RegularityFit fit = check_regularity(fam, uniform_grid(m));
    INFO(fam.name, " theta_hat=", fit.theta_hat);
    CHECK(std::abs(fit.theta_hat - fam.theta) <= tol);
    CHECK(fit.pass);
  }
}

TEST_CASE("a flat stretch fails the fit through its zero increment") {
  const KernelFamily fam =
      make_custom({{0.0, vec2(0, 0)}, {0.5, vec2(1, 0)}, {1.0, vec2(1, 0)}}, 2.0);
  const RegularityFit fit = check_regularity(fam, uniform_grid(8));
  CHECK(fit.min_variance == 0.0);
  CHECK_FALSE(fit.pass);

  // a discrete random walk has increment variance exactly |t-s| on its own
  // grid: slope 1, below the admissible range
  std::vector<std::pair<double, SymTensord>> nodes;
  for (int j = 0; j <= 8; ++j) {
    SymTensord f(1, 8);
    for (int i = 1; i <= j; ++i) f.set(MultiIndex::of({i}), 1.0 / std::sqrt(8.0));
    nodes.emplace_back(j / 8.0, std::move(f));
  }
  const RegularityFit rough = check_regularity(make_custom(nodes, 1.0), uniform_grid(8));
  CHECK(rough.theta_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rough.max_log_residual <= 1e-12);
  CHECK_FALSE(rough.pass);
}

TEST_CASE("partition configs are validated and sliced into intervals") {
  PartitionConfig cfg;
  cfg.left = {0.1, 0.2};
  cfg.inner = {0.3, 0.5};
  cfg.right = {0.9};
  validate_config(cfg);

  const auto inner = inner_intervals(cfg);
  REQUIRE(inner.size() == 1);
  CHECK(inner[0] == std::pair{0.3, 0.5});

  const auto cond = conditioning_intervals(cfg);
  REQUIRE(cond.size() == 4);
  CHECK(cond[0] == std::pair{0.0, 0.1});
  CHECK(cond[1] == std::pair{0.1, 0.2});
  CHECK(cond[2] == std::pair{0.2, 0.3});
  CHECK(cond[3] == std::pair{0.5, 0.9});

  PartitionConfig bare;
  bare.inner = {0.25, 0.75};
  validate_config(bare);
  CHECK(conditioning_intervals(bare).empty());

  PartitionConfig bad = cfg;
  bad.inner = {0.5, 0.3};
  CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
  bad = cfg;
  bad.left = {0.1, 0.4};  // reaches past t_1
  CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
  bad = cfg;
  bad.right = {0.4};  // before t_m
  CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
  bad = cfg;
  bad.inner = {0.3};
  CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
  bad = cfg;
  bad.right = {0.9, 1.2};
  CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
}

TEST_CASE("dyadic config sets have the hand-counted sizes") {
  CHECK(dyadic_configs_at(1).size() == 3);
  CHECK(dyadic_configs_at(2).size() == 10);
  CHECK(dyadic_configs_at(3).size() == 36);
  CHECK(dyadic_configs_at(4).size() == 136);
  for (const auto& cfg : dyadic_configs_at(3)) validate_config(cfg);

  const auto rnd_a = random_configs(20, 7);
  const auto rnd_b = random_configs(20, 7);
  const auto rnd_c = random_configs(20, 8);
  REQUIRE(rnd_a.size() == 20);
  for (const auto& cfg : rnd_a) validate_config(cfg);
  for (std::size_t i = 0; i < rnd_a.size(); ++i) {
    CHECK(rnd_a[i].inner == rnd_b[i].inner);
    CHECK(rnd_a[i].left == rnd_b[i].left);
    CHECK(rnd_a[i].right == rnd_b[i].right);
  }
  bool differs = false;
  for (std::size_t i = 0; i < rnd_a.size(); ++i) differs = differs || rnd_a[i].inner != rnd_c[i].inner;
  CHECK(differs);
}

TEST_CASE("chaos subspaces of increments have the expected spans") {
  const SubspaceBasisd blk = chaos_subspace(make_blk2(), 0.25, 0.5);
  REQUIRE(blk.rank() == 1);
  CHECK(std::abs(std::abs(blk.basis()(0, 0)) - 1.0) <= 1e-14);
  CHECK(std::abs(blk.basis()(1, 0)) <= 1e-14);

  // first-order kernels unfold to a single column: rank one, parallel to the
  // increment's coordinate vector however many ramp cells are active
  const KernelFamily fd = make_fd(2, 1.0);
  for (auto [s, t] : {std::pair{0.0, 1.0}, std::pair{0.0, 0.5}, std::pair{0.25, 0.875}}) {
    const SubspaceBasisd sub = chaos_subspace(fd, s, t);
    REQUIRE(sub.rank() == 1);
    Eigen::VectorXd v = to_coords(fd.increment(s, t));
    v.normalize();
    CHECK(std::abs(std::abs(sub.basis().col(0).dot(v)) - 1.0) <= 1e-12);
  }

  // a second-order ladder exposes one rank-two block per active direction pair
  const KernelFamily h = make_herm2(3, 1.5);
  CHECK(chaos_subspace(h, 0.0, 1.0).rank() == 2 * 15);
}

TEST_CASE("two-block family: conditional residual collapses to exactly zero") {
  const KernelFamily fam = make_blk2();
  PartitionConfig cfg;
  cfg.left = {0.25};
  cfg.inner = {0.5, 0.75};
  cfg.right = {0.875, 1.0};
  const ResidualEstimate est = estimate_alpha(fam, {cfg});
  CHECK(est.value <= 1e-14);
  CHECK(est.witness == 0);

  // the full dyadic sweep finds it too
  std::vector<PartitionConfig> configs;
  for (int d = 1; d <= 3; ++d)
    for (auto& c : dyadic_configs_at(d)) configs.push_back(std::move(c));
  const ResidualEstimate sweep = estimate_alpha(fam, configs);
  CHECK(sweep.value <= 1e-14);
  const ResidualEstimate beta = estimate_beta(fam, configs);
  CHECK(beta.value <= 1e-14);
}

TEST_CASE("split family: aligned partitions give residual exactly one") {
  const KernelFamily fam = split_family();
  PartitionConfig cfg;
  cfg.inner = {0.0, 0.5};  // U = span e_1
  cfg.right = {1.0};       // S = span e_2
  const ResidualEstimate a = estimate_alpha(fam, {cfg});
  CHECK(a.value == 1.0);
  const ResidualEstimate b = estimate_beta(fam, {cfg});
  CHECK(b.value == 1.0);

  // with no conditioning at all the residual is trivially one
  PartitionConfig bare;
  bare.inner = {0.25, 0.75};
  const ResidualEstimate t = estimate_alpha(fam, {bare});
  CHECK(t.value == 1.0);
  CHECK(t.n_trivial == 1);
}

TEST_CASE("degenerate configurations are skipped, not scored") {
  // flat after 0.4: increments inside [0.5, 0.9] vanish identically
  const KernelFamily fam =
      make_custom({{0.0, vec2(0, 0)}, {0.4, vec2(1, 0)}, {1.0, vec2(1, 0)}}, 2.0);
  PartitionConfig dead;
  dead.inner = {0.5, 0.9};
  CHECK_THROWS_AS(estimate_alpha(fam, {dead}), std::runtime_error);

  PartitionConfig alive;
  alive.inner = {0.0, 0.3};
  const ResidualEstimate est = estimate_alpha(fam, {dead, alive});
  CHECK(est.n_skipped == 1);
  CHECK(std::isnan(est.per_config[0]));
  CHECK(est.per_config[1] == 1.0);
}

TEST_CASE("first-order families: alpha and beta estimates coincide") {
  const KernelFamily fam = make_fd(3, 1.2);
  std::vector<PartitionConfig> configs;
  for (auto& c : dyadic_configs_at(2)) configs.push_back(std::move(c));
  // random points snapped to the family's own lattice keep the partitions at
  // scales the truncated ladder resolves
  for (auto& c : random_configs(8, 3, 0.125, 0.125)) configs.push_back(std::move(c));
  const ResidualEstimate a = estimate_alpha(fam, configs);
  const ResidualEstimate b = estimate_beta(fam, configs);
  REQUIRE(a.per_config.size() == b.per_config.size());
  for (std::size_t i = 0; i < a.per_config.size(); ++i) {
    if (std::isnan(a.per_config[i])) {
      CHECK(std::isnan(b.per_config[i]));
    } else {
      CHECK(a.per_config[i] == doctest::Approx(b.per_config[i]).epsilon(1e-9));
    }
  }
  CHECK(a.value > 1e-6);
}

TEST_CASE("ramp family keeps strictly positive conditional residuals") {
  const KernelFamily fam = make_fd(6, 1.5);
  std::vector<PartitionConfig> configs;
  for (int d = 1; d <= 4; ++d)
    for (auto& c : dyadic_configs_at(d)) configs.push_back(std::move(c));
  const ResidualEstimate est = estimate_alpha(fam, configs);
  INFO("alpha over dyadic depths 1..4: ", est.value);
  CHECK(est.value > 1e-6);
  CHECK(est.n_skipped == 0);
}

TEST_CASE("row sums: counts, positive families, a negative control") {
  const std::vector<double> tiny = {0.0, 0.5, 1.0};
  const RowSumCheck counts = check_row_sums(make_blk2(), tiny);
  CHECK(counts.n_quadruples == 5);  // hand-enumerated nested windows

  for (const KernelFamily& fam :
       {make_blk2(), make_fd(5, 1.5), make_herm2(4, 1.5), make_rosen(0.85, 16)}) {
    const RowSumCheck rs = check_row_sums(fam, uniform_grid(16));
    INFO(fam.name);
    CHECK(rs.min_value >= -1e-12);
    CHECK(rs.pass);
  }

  // an increment that retraces its path correlates negatively with history
  const KernelFamily neg =
      make_custom({{0.0, vec2(0, 0)}, {0.5, vec2(1, 0)}, {1.0, vec2(0.2, 0)}}, 2.0);
  const RowSumCheck rs = check_row_sums(neg, uniform_grid(8));
  CHECK(rs.min_value < -0.1);
  CHECK_FALSE(rs.pass);
  // the witness quadruple reproduces the minimum from the raw kernels
  const double again = factorial(neg.order) * inner(neg.increment(rs.witness_s, rs.witness_t),
                                                    neg.increment(rs.witness_sp, rs.witness_tp));
  CHECK(again == doctest::Approx(rs.min_value).epsilon(1e-12));
}

TEST_CASE("combined report: ramp family passes, two-block control fails") {
  AssumptionOptions opt;
  opt.alpha_depth = 3;
  opt.n_random_configs = 12;
  const AssumptionReport good = check_assumptions(make_fd(4, 1.5), opt);
  CHECK(good.regularity.pass);
  CHECK(good.alpha_pass);
  CHECK(good.beta_pass);
  CHECK(good.row_sums.pass);
  CHECK(good.all_pass);
  CHECK(good.alpha_by_depth.count(1) == 1);
  CHECK(good.alpha_by_depth.count(3) == 1);
  CHECK(good.alpha_by_depth.count(0) == 1);  // random batch

  const AssumptionReport bad = check_assumptions(make_blk2(), opt);
  CHECK(bad.regularity.pass);
  CHECK(bad.row_sums.pass);
  CHECK_FALSE(bad.alpha_pass);
  CHECK(bad.alpha.value == 0.0);
  CHECK_FALSE(bad.all_pass);
  // the witness reproduces the collapse on its own
  const ResidualEstimate again = estimate_alpha(make_blk2(), {bad.alpha_witness_config});
  CHECK(again.value <= 1e-14);
}
