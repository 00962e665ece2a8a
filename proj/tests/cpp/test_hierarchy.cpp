#include <doctest.h>

#include <cmath>
#include <memory>

#include "secantlab/hierarchy.hpp"

using namespace secantlab;

namespace {

Eigen::MatrixXcd omega_g1() {
  Eigen::MatrixXcd o(1, 1);
  o(0, 0) = cplx(0, 1);
  return o;
}

Eigen::MatrixXcd omega_g2() {
  Eigen::MatrixXcd o(2, 2);
  o(0, 0) = cplx(0.8, 1.2);
  o(0, 1) = cplx(0.3, 0.4);
  o(1, 0) = cplx(0.3, 0.4);
  o(1, 1) = cplx(0.6, 1.5);
  return o;
}

SecantConfig config_g1() {
  Eigen::VectorXcd u(1), b(1);
  u[0] = cplx(0.23, 0.04);
  b[0] = cplx(0.41, -0.07);
  return config_from_centered(u, {b});
}

// Evaluate P_s with explicit trial values in the order-s slots.
cplx p_s_with_unknowns(const HierarchyState& state, int s,
                       const Eigen::VectorXcd& unknowns,
                       const Eigen::VectorXcd& z,
                       const TruncationPolicy& policy) {
  HierarchyState trial = state;
  const int m = state.config.m;
  const int g = state.engine->genus();
  trial.seq.w.push_back(unknowns.segment(m, g));
  trial.alphas.set(1, s, unknowns(0));
  for (int j = 1; j <= m - 1; ++j) trial.alphas.set(j + 2, s, unknowns(j));
  return p_series_eval(trial, z, s, policy).coeff(s);
}

}  // namespace

TEST_CASE("P_0 vanishes under the normalization") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  SecantConfig config = config_g1();
  GridSpec spec;
  spec.count = 8;
  spec.seed = 4;
  SampleGrid grid = make_sample_grid(*engine, config, spec, policy);
  HierarchyState state = make_initial_state(engine, config, grid);
  for (const auto& z : grid.points) {
    PowerSeries p = p_series_eval(state, z, 2, policy);
    CHECK(std::abs(p.coeff(0)) <= 1e-11);
  }
}

TEST_CASE("Q_1 is identically zero on the grid") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  SecantConfig config = config_g1();
  GridSpec spec;
  spec.count = 8;
  spec.seed = 4;
  SampleGrid grid = make_sample_grid(*engine, config, spec, policy);
  HierarchyState state = make_initial_state(engine, config, grid);
  for (const auto& z : grid.points)
    CHECK(std::abs(q_s_eval(state, 1, z, policy)) <= 1e-12);
}

TEST_CASE("g=1 m=1 hierarchy solves the first orders") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  GridSpec spec;
  spec.count = 8;
  spec.seed = 11;
  HierarchyRun run =
      run_hierarchy(engine, config_g1(), 4, 1e-8, spec, policy);
  REQUIRE(run.first_failed_order == 0);
  REQUIRE(run.state.solved_order() == 4);
  for (double r : run.state.residuals) CHECK(r <= 1e-8);
  CHECK(run.state.seq.w[0].norm() > 1e-6);  // D_1 != 0
}

TEST_CASE("run_hierarchy with S_max = 0 returns the initial state") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  GridSpec spec;
  spec.count = 8;
  spec.seed = 11;
  HierarchyRun run = run_hierarchy(engine, config_g1(), 0, 1e-8, spec, policy);
  CHECK(run.state.solved_order() == 0);
  CHECK(run.first_failed_order == 0);
  CHECK(run.state.residuals.empty());
}

TEST_CASE("P_s is affine in the order-s unknowns") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  GridSpec spec;
  spec.count = 8;
  spec.seed = 11;
  HierarchyRun run = run_hierarchy(engine, config_g1(), 2, 1e-8, spec, policy);
  REQUIRE(run.first_failed_order == 0);
  const HierarchyState& state = run.state;
  const int s = 3;
  Rng rng(101);
  for (int rep = 0; rep < 4; ++rep) {
    Eigen::VectorXcd x(2), y(2);
    for (int i = 0; i < 2; ++i) {
      x[i] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
      y[i] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    }
    double lam = rng.uniform();
    const Eigen::VectorXcd& z = state.grid.points[rep];
    cplx px = p_s_with_unknowns(state, s, x, z, policy);
    cplx py = p_s_with_unknowns(state, s, y, z, policy);
    cplx pmix = p_s_with_unknowns(
        state, s, Eigen::VectorXcd(lam * x + (1 - lam) * y), z, policy);
    cplx expected = lam * px + (1 - lam) * py;
    CHECK(std::abs(pmix - expected) <= 1e-12 * (1 + std::abs(expected)));
  }
}

TEST_CASE("consistency: P_s = Q_s + affine block at the current unknowns") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  GridSpec spec;
  spec.count = 8;
  spec.seed = 19;
  HierarchyRun run = run_hierarchy(engine, config_g1(), 3, 1e-8, spec, policy);
  REQUIRE(run.first_failed_order == 0);
  const HierarchyState& state = run.state;
  const ThetaEngine& eng = *state.engine;
  const Eigen::VectorXcd u = state.config.centered_u;
  for (int s = 1; s <= 3; ++s) {
    for (int i = 0; i < 3; ++i) {
      const Eigen::VectorXcd& z = state.grid.points[i];
      cplx ps = p_series_eval(state, z, s, policy).coeff(s);
      cplx qs = q_s_eval(state, s, z, policy);
      cplx th_pu = eng.theta(z + u, policy);
      cplx th_mu = eng.theta(z - u, policy);
      Eigen::VectorXcd gr_pu =
          eng.gradient(ThetaCharacteristic::zero(1), z + u, policy);
      Eigen::VectorXcd gr_mu =
          eng.gradient(ThetaCharacteristic::zero(1), z - u, policy);
      cplx affine = state.alphas.get(1, s) * th_pu * th_mu;
      Eigen::VectorXcd d = state.seq.at(s);
      affine += d[0] * (gr_pu[0] * th_mu - th_pu * gr_mu[0]);
      if (s == 1) {
        const Eigen::VectorXcd b = state.config.centered_b[0];
        affine += state.alphas.eps_scale * eng.theta(z + b, policy) *
                  eng.theta(z - b, policy);
      }
      CHECK(std::abs(ps - (qs + affine)) <= 1e-12 * (1 + std::abs(ps)));
    }
  }
}

TEST_CASE("Q_s ignores the order-s slots") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  GridSpec spec;
  spec.count = 8;
  spec.seed = 23;
  HierarchyRun run = run_hierarchy(engine, config_g1(), 2, 1e-8, spec, policy);
  REQUIRE(run.first_failed_order == 0);
  HierarchyState state = run.state;
  const Eigen::VectorXcd& z = state.grid.points[0];
  cplx q_before = q_s_eval(state, 3, z, policy);
  HierarchyState touched = state;
  touched.seq.w.push_back(Eigen::VectorXcd::Ones(1) * cplx(0.4, 0.3));
  touched.alphas.set(1, 3, cplx(-2.0, 1.0));
  cplx q_after = q_s_eval(touched, 3, z, policy);
  CHECK(q_before == q_after);
}

TEST_CASE("solve_order preconditions") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  SecantConfig config = config_g1();
  GridSpec spec;
  spec.count = 8;
  spec.seed = 29;
  SampleGrid grid = make_sample_grid(*engine, config, spec, policy);
  HierarchyState state = make_initial_state(engine, config, grid);
  CHECK_THROWS_AS(solve_order(state, 2, 1e-8, policy), Error);
  CHECK_THROWS_AS(q_s_eval(state, 2, grid.points[0], policy), Error);
}

TEST_CASE("random g=2 configuration is unsolvable at order 1") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g2()));
  Rng rng(12345);
  Eigen::VectorXcd u(2), b(2);
  for (int i = 0; i < 2; ++i) {
    u[i] = cplx(rng.uniform(0.1, 0.9), rng.uniform(-0.2, 0.2));
    b[i] = cplx(rng.uniform(0.1, 0.9), rng.uniform(-0.2, 0.2));
  }
  SecantConfig config = config_from_centered(u, {b}, engine.get());
  GridSpec spec;
  spec.count = 16;
  spec.seed = 31;
  SampleGrid grid = make_sample_grid(*engine, config, spec, policy);
  HierarchyState state = make_initial_state(engine, config, grid);
  SolveOutcome outcome = solve_order(state, 1, 1e-8, policy);
  CHECK(outcome.status == SolveStatus::order_unsolvable);
  CHECK(outcome.residual > 1e-4);
}

TEST_CASE("rt cross-check vanishes on solved g=1 states") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  GridSpec spec;
  spec.count = 8;
  spec.seed = 37;
  HierarchyRun run = run_hierarchy(engine, config_g1(), 4, 1e-8, spec, policy);
  REQUIRE(run.first_failed_order == 0);
  Rng rng(7);
  for (int s = 2; s <= 4; ++s) {
    for (int rep = 0; rep < 3; ++rep) {
      Eigen::VectorXcd z(1);
      z[0] = cplx(rng.uniform(), rng.uniform(-0.2, 0.2));
      RtResiduals res = rt_cross_check(run.state, s, z, policy);
      CHECK(res.r_residual <= 1e-7);
      CHECK(res.t_residual <= 1e-7);
      CHECK(res.rsq_residual <= 1e-7);
    }
  }

  // diagnostic mode on an unsolved state still returns values
  HierarchyState fresh =
      make_initial_state(engine, run.state.config, run.state.grid);
  Eigen::VectorXcd z(1);
  z[0] = cplx(0.3, 0.05);
  RtResiduals res = rt_cross_check(fresh, 1, z, policy);
  CHECK(std::isfinite(res.r_residual));
}

TEST_CASE("gauge reparametrization preserves verdicts") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  GridSpec spec;
  spec.count = 8;
  spec.seed = 41;
  HierarchyRun base = run_hierarchy(engine, config_g1(), 1, 1e-8, spec, policy);
  REQUIRE(base.first_failed_order == 0);

  const cplx c(0.7, 0.2);
  HierarchyState scaled = reparametrize_state(base.state, c);

  // Solve orders 2 and 3 independently in both gauges.
  HierarchyState a = base.state;
  HierarchyState b = scaled;
  for (int s = 2; s <= 3; ++s) {
    SolveOutcome oa = solve_order(a, s, 1e-8, policy);
    SolveOutcome ob = solve_order(b, s, 1e-8, policy);
    CHECK(oa.status == SolveStatus::solved);
    CHECK((oa.status == SolveStatus::solved) ==
          (ob.status == SolveStatus::solved));
    // unknowns transport as x -> c^s x
    cplx expect_alpha = oa.unknowns(0) * std::pow(c, s);
    cplx expect_d = oa.unknowns(1) * std::pow(c, s);
    CHECK(std::abs(ob.unknowns(0) - expect_alpha) <=
          1e-6 * (1 + std::abs(expect_alpha)));
    CHECK(std::abs(ob.unknowns(1) - expect_d) <=
          1e-6 * (1 + std::abs(expect_d)));
    a = oa.state;
    b = ob.state;
  }
}

TEST_CASE("grid robustness of solved unknowns") {
  TruncationPolicy policy;
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_g1()));
  GridSpec spec_a;
  spec_a.count = 8;
  spec_a.seed = 51;
  GridSpec spec_b;
  spec_b.count = 8;
  spec_b.seed = 52;
  HierarchyRun ra = run_hierarchy(engine, config_g1(), 3, 1e-8, spec_a, policy);
  HierarchyRun rb = run_hierarchy(engine, config_g1(), 3, 1e-8, spec_b, policy);
  REQUIRE(ra.first_failed_order == 0);
  REQUIRE(rb.first_failed_order == 0);
  for (int s = 1; s <= 3; ++s) {
    cplx aa = ra.state.alphas.get(1, s);
    cplx ab = rb.state.alphas.get(1, s);
    CHECK(std::abs(aa - ab) <= 1e-6 * (1 + std::abs(aa)));
    Eigen::VectorXcd da = ra.state.seq.at(s);
    Eigen::VectorXcd db = rb.state.seq.at(s);
    CHECK((da - db).norm() <= 1e-6 * (1 + da.norm()));
  }
}

TEST_CASE("alpha table guards its fixed rows") {
  AlphaTable table;
  table.m = 3;
  table.set(1, 1, cplx(1, 0));
  table.set(3, 2, cplx(0, 1));
  table.set(4, 1, cplx(2, 0));
  CHECK_THROWS_AS(table.set(2, 1, cplx(1, 0)), Error);
  CHECK_THROWS_AS(table.set(5, 1, cplx(1, 0)), Error);  // m+2 row is the gauge
  PowerSeries a2 = table.alpha(2, 3);
  CHECK(a2.coeff(0) == cplx(-1, 0));
  CHECK(a2.coeff(1) == cplx(0, 0));
  PowerSeries a5 = table.alpha(5, 3);
  CHECK(a5.coeff(1) == cplx(1, 0));
  CHECK(a5.coeff(2) == cplx(0, 0));
}
