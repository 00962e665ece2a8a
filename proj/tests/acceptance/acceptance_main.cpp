// Acceptance suite: runs the numbered criteria and prints one line each.
// Usage: acceptance [criterion ...]   (no arguments: run all)
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "secantlab/geometry.hpp"
#include "secantlab/hierarchy.hpp"
#include "secantlab/kummer.hpp"
#include "secantlab/runner.hpp"
#include "secantlab/series.hpp"

using namespace secantlab;

namespace {

Eigen::MatrixXcd omega_for(int g) {
  if (g == 1) {
    Eigen::MatrixXcd o(1, 1);
    o(0, 0) = cplx(0, 1);
    return o;
  }
  if (g == 2) {
    Eigen::MatrixXcd o(2, 2);
    o(0, 0) = cplx(0.8, 1.2);
    o(0, 1) = cplx(0.3, 0.4);
    o(1, 0) = cplx(0.3, 0.4);
    o(1, 1) = cplx(0.6, 1.5);
    return o;
  }
  Eigen::MatrixXcd o = Eigen::MatrixXcd::Zero(3, 3);
  o(0, 0) = cplx(0.1, 1.0);
  o(1, 1) = cplx(-0.3, 1.3);
  o(2, 2) = cplx(0.2, 1.6);
  o(0, 1) = o(1, 0) = cplx(0.05, 0.25);
  o(0, 2) = o(2, 0) = cplx(-0.1, 0.15);
  o(1, 2) = o(2, 1) = cplx(0.07, 0.2);
  return o;
}

Eigen::VectorXcd random_point(Rng& rng, const Eigen::MatrixXcd& omega,
                              double q_range = 0.25) {
  const int g = static_cast<int>(omega.rows());
  Eigen::VectorXd p(g), q(g);
  for (int i = 0; i < g; ++i) {
    p[i] = rng.uniform();
    q[i] = rng.uniform(-q_range, q_range);
  }
  return p.cast<cplx>() + omega * q.cast<cplx>();
}

// Independent box-sum oracle, no code shared with the engine path.
cplx theta_brute(const Eigen::MatrixXcd& omega, const Eigen::VectorXcd& z,
                 int radius) {
  const int g = static_cast<int>(omega.rows());
  const cplx ipi(0, kPi);
  const cplx twopii(0, 2 * kPi);
  cplx total(0, 0);
  std::vector<int> n(g, -radius);
  for (;;) {
    Eigen::VectorXcd m(g);
    for (int i = 0; i < g; ++i) m[i] = n[i];
    cplx quad = (m.transpose() * omega * m)(0, 0);
    cplx lin(0, 0);
    for (int i = 0; i < g; ++i) lin += m[i] * z[i];
    total += std::exp(ipi * quad + twopii * lin);
    int i = 0;
    for (; i < g; ++i) {
      if (n[i] < radius) {
        ++n[i];
        break;
      }
      n[i] = -radius;
    }
    if (i == g) break;
  }
  return total;
}

// The fixed seeded g=2 instantiation shared by criteria 6..8.
struct G2Fixture {
  SecantSearchResult search;
  HierarchyRun run;
};

const std::uint64_t kG2SearchSeed = 2026;

std::optional<G2Fixture>& g2_fixture_slot() {
  static std::optional<G2Fixture> fixture;
  return fixture;
}

const G2Fixture& g2_fixture(int s_max) {
  auto& slot = g2_fixture_slot();
  if (!slot) {
    TruncationPolicy policy;
    policy.tol = 1e-13;
    KummerContext ctx(validate_siegel(omega_for(2)));
    G2Fixture f;
    f.search =
        find_degenerate_secant(ctx, 1, kG2SearchSeed, 1e-8, 400, policy);
    if (f.search.success) {
      GridSpec spec;
      spec.count = 20;
      spec.seed = 5;
      f.run = run_hierarchy(ctx.engine_ptr(), f.search.config, s_max, 1e-6,
                            spec, policy);
    }
    slot = std::move(f);
  }
  return *slot;
}

struct OneCriterion {
  int id;
  std::string name;
  std::function<bool(std::ostringstream&)> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool criterion_addition_formula(std::ostringstream& detail) {
  TruncationPolicy policy;
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  Rng rng(1001);
  for (int g = 1; g <= 3; ++g) {
    Eigen::MatrixXcd omega = omega_for(g);
    KummerContext ctx(validate_siegel(omega));
    std::vector<Eigen::VectorXcd> zs, ws;
    for (int i = 0; i < 100; ++i) {
      zs.push_back(random_point(rng, omega));
      ws.push_back(random_point(rng, omega));
    }
    std::vector<double> res(100, 0.0);
    parallel_for(100, [&](std::size_t i) {
      res[i] = ctx.addition_formula_residual(zs[i], ws[i], policy);
    });
    for (double r : res) worst = std::max(worst, r);
  }
  double elapsed = seconds_since(t0);
  detail << "max residual " << worst << " over 300 pairs, " << elapsed << " s";
  return worst <= 1e-9 && elapsed < 60.0;
}

bool criterion_theta_correctness(std::ostringstream& detail) {
  TruncationPolicy policy;
  ThetaEngine engine(validate_siegel(omega_for(1)));
  Eigen::VectorXcd z0 = Eigen::VectorXcd::Zero(1);
  Eigen::VectorXcd zh(1);
  zh[0] = cplx(0.5, 0);
  cplx v0 = engine.theta(z0, policy);
  cplx vh = engine.theta(zh, policy);
  double err0 = std::abs(v0 - theta_brute(omega_for(1), z0, 10));
  double errh = std::abs(vh - theta_brute(omega_for(1), zh, 10));
  bool ok = err0 <= 1e-10 && errh <= 1e-10;

  double worst = 0;
  Rng rng(1002);
  for (int g = 1; g <= 3; ++g) {
    Eigen::MatrixXcd omega = omega_for(g);
    ThetaEngine eng(validate_siegel(omega));
    for (int rep = 0; rep < 50; ++rep) {
      Eigen::VectorXcd z = random_point(rng, omega);
      cplx base = eng.theta(z, policy);
      int k = static_cast<int>(rng.next_u64() % g);
      Eigen::VectorXcd ze = z;
      ze[k] += 1.0;
      worst = std::max(worst, std::abs(eng.theta(ze, policy) - base));
      Eigen::VectorXcd zo = z + omega.col(k);
      cplx factor =
          std::exp(cplx(0, -kPi) * omega(k, k) + cplx(0, -2 * kPi) * z[k]);
      cplx lhs = eng.theta(zo, policy);
      worst = std::max(worst, std::abs(lhs - factor * base) / std::abs(lhs));
      worst = std::max(worst, std::abs(eng.theta(-z, policy) - base));
    }
  }
  detail << "theta(0;i) = " << v0.real() << " (err " << err0 << "), theta(1/2;i) = "
         << vh.real() << " (err " << errh << "), identity residual " << worst;
  return ok && worst <= 1e-9;
}

bool criterion_jets(std::ostringstream& detail) {
  TruncationPolicy policy;
  Rng rng(1003);
  double worst1 = 0, worst2 = 0;
  for (int g = 1; g <= 3; ++g) {
    Eigen::MatrixXcd omega = omega_for(g);
    ThetaEngine engine(validate_siegel(omega));
    auto chr = ThetaCharacteristic::zero(g);
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXcd z = random_point(rng, omega);
      Eigen::VectorXcd v(g);
      for (int i = 0; i < g; ++i)
        v[i] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
      DirectionalJet jet = engine.jet(chr, z, {v}, 2, policy);
      const double h = 1e-5;
      cplx fd1 = (engine.theta(z + h * v, policy) -
                  engine.theta(z - h * v, policy)) /
                 (2 * h);
      cplx d1 = jet.value({1});
      worst1 = std::max(worst1, std::abs(d1 - fd1) / (1 + std::abs(d1)));
      cplx fd2 = (engine.theta(z + h * v, policy) -
                  2.0 * engine.theta(z, policy) +
                  engine.theta(z - h * v, policy)) /
                 (h * h);
      cplx d2 = jet.value({2});
      worst2 = std::max(worst2, std::abs(d2 - fd2) / (1 + std::abs(d2)));
    }
  }
  detail << "first-derivative residual " << worst1
         << ", second-derivative residual " << worst2;
  return worst1 <= 1e-7 && worst2 <= 1e-5;
}

MultiPoly random_poly(Rng& rng, int g) {
  MultiPoly f(g);
  for (int t = 0; t < 6; ++t) {
    std::vector<int> exp(g, 0);
    int deg = static_cast<int>(rng.next_u64() % 6);
    for (int d = 0; d < deg; ++d) ++exp[rng.next_u64() % g];
    f.set(exp, cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)));
  }
  return f;
}

bool criterion_delta_oracle(std::ostringstream& detail) {
  Rng rng(1004);
  double worst = 0;
  for (int draw = 0; draw < 20; ++draw) {
    int g = 1 + static_cast<int>(rng.next_u64() % 3);
    MultiPoly f = random_poly(rng, g);
    VectorFieldSeq seq;
    seq.g = g;
    for (int j = 0; j < 6; ++j) {
      Eigen::VectorXcd w(g);
      for (int i = 0; i < g; ++i)
        w[i] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
      seq.w.push_back(w);
    }
    Eigen::VectorXcd c0(g);
    for (int i = 0; i < g; ++i)
      c0[i] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    PowerSeries oracle = exp_series_oracle(seq, f, c0, 6);
    // analytic polynomial jet
    DirectionalJet jet;
    jet.point = c0;
    for (int j = 1; j <= 6; ++j) jet.directions.push_back(seq.at(j));
    std::vector<int> key(6, 0);
    std::function<void(int, int)> rec = [&](int pos, int budget) {
      if (pos == 6) {
        MultiPoly d = f;
        for (int j = 0; j < 6; ++j)
          for (int rep = 0; rep < key[j]; ++rep)
            d = d.directional(seq.at(j + 1));
        jet.values[key] = d.eval(c0);
        return;
      }
      for (int v = 0; v <= budget; ++v) {
        key[pos] = v;
        rec(pos + 1, budget - v);
      }
      key[pos] = 0;
    };
    rec(0, 6);
    for (int s = 0; s <= 6; ++s) {
      cplx ours = delta_apply(s, seq, jet, +1);
      worst = std::max(worst, std::abs(ours - oracle.coeff(s)) /
                                  (1 + std::abs(oracle.coeff(s))));
    }
    // e^{D} e^{-D} coefficient cancellation
    for (int s = 1; s <= 5; ++s) {
      cplx acc(0, 0);
      for (int j = 0; j <= s; ++j)
        acc += delta_poly(j, seq, delta_poly(s - j, seq, f, -1), +1).eval(c0);
      worst = std::max(worst, std::abs(acc));
    }
  }
  detail << "max deviation " << worst;
  return worst <= 1e-10;
}

bool criterion_hierarchy_g1(std::ostringstream& detail) {
  TruncationPolicy policy;
  auto t0 = std::chrono::steady_clock::now();
  auto engine = std::make_shared<ThetaEngine>(validate_siegel(omega_for(1)));
  Eigen::VectorXcd u(1), b(1);
  u[0] = cplx(0.23, 0.04);
  b[0] = cplx(0.41, -0.07);
  SecantConfig config = config_from_centered(u, {b}, engine.get());
  GridSpec spec;
  spec.count = 8;
  spec.seed = 11;
  HierarchyRun run = run_hierarchy(engine, config, 8, 1e-8, spec, policy);
  double elapsed = seconds_since(t0);
  double worst = 0;
  for (double r : run.state.residuals) worst = std::max(worst, r);
  detail << "solved " << run.state.solved_order() << "/8 orders, max residual "
         << worst << ", " << elapsed << " s";
  return run.first_failed_order == 0 && run.state.solved_order() == 8 &&
         worst <= 1e-8 && elapsed < 30.0;
}

bool criterion_g2_instantiation(std::ostringstream& detail) {
  TruncationPolicy policy;
  auto t0 = std::chrono::steady_clock::now();
  const G2Fixture& f = g2_fixture(5);
  double elapsed = seconds_since(t0);
  if (!f.search.success) {
    detail << "search failed, residual " << f.search.final_residual;
    return false;
  }
  double worst = 0;
  for (std::size_t s = 1; s < f.run.state.residuals.size(); ++s)
    worst = std::max(worst, f.run.state.residuals[s]);
  detail << "search residual " << f.search.final_residual << ", solved "
         << f.run.state.solved_order() << "/5 orders, max residual (s>=2) "
         << worst << ", " << elapsed << " s";
  return f.search.final_residual <= 1e-8 && f.run.first_failed_order == 0 &&
         f.run.state.solved_order() == 5 && worst <= 1e-6 && elapsed < 600.0;
}

bool criterion_rt_cross(std::ostringstream& detail) {
  TruncationPolicy policy;
  double worst = 0;

  auto engine1 = std::make_shared<ThetaEngine>(validate_siegel(omega_for(1)));
  Eigen::VectorXcd u(1), b(1);
  u[0] = cplx(0.23, 0.04);
  b[0] = cplx(0.41, -0.07);
  SecantConfig config1 = config_from_centered(u, {b}, engine1.get());
  GridSpec spec;
  spec.count = 8;
  spec.seed = 11;
  HierarchyRun run1 = run_hierarchy(engine1, config1, 5, 1e-8, spec, policy);
  if (run1.first_failed_order != 0) {
    detail << "g=1 state failed to solve";
    return false;
  }
  Rng rng(1007);
  for (int s = 2; s <= 5; ++s)
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXcd z = random_point(rng, omega_for(1), 0.2);
      RtResiduals res = rt_cross_check(run1.state, s, z, policy);
      worst = std::max({worst, res.r_residual, res.t_residual,
                        res.rsq_residual});
    }

  const G2Fixture& f = g2_fixture(5);
  if (!f.search.success || f.run.first_failed_order != 0) {
    detail << "g=2 state unavailable";
    return false;
  }
  for (int s = 2; s <= 5; ++s)
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXcd z = random_point(rng, omega_for(2), 0.2);
      RtResiduals res = rt_cross_check(f.run.state, s, z, policy);
      worst = std::max({worst, res.r_residual, res.t_residual,
                        res.rsq_residual});
    }
  detail << "max residual " << worst;
  return worst <= 1e-7;
}

bool criterion_restriction(std::ostringstream& detail) {
  TruncationPolicy policy;
  const G2Fixture& f = g2_fixture(5);
  if (!f.search.success || f.run.first_failed_order != 0) {
    detail << "g=2 state unavailable";
    return false;
  }
  const ThetaEngine& engine = *f.run.state.engine;
  DivisorIntersection isect = divisor_intersection_points(
      engine, f.run.state.config.centered_u, 48, 1e-9, policy);
  double r1 = restriction_check(f.run.state, 1, isect, policy);
  double r2 = restriction_check(f.run.state, 2, isect, policy);
  detail << isect.points.size() << " intersection points, residuals s=1: "
         << r1 << ", s=2: " << r2;
  return isect.points.size() == 2 && r1 <= 1e-6 && r2 <= 1e-6;
}

bool criterion_negative_controls(std::ostringstream& detail) {
  TruncationPolicy policy;
  KummerContext ctx(validate_siegel(omega_for(2)));
  Rng rng(1009);
  int false_count = 0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Eigen::VectorXcd> pts;
    for (int i = 0; i < 3; ++i) pts.push_back(random_point(rng, omega_for(2)));
    SecantConfig cfg = center_config(pts, &ctx.engine());
    Eigen::VectorXcd zeta = Eigen::VectorXcd::Zero(2);
    if (!ctx.honest_secant_test(cfg, zeta, 1e-7, policy).is_secant)
      ++false_count;
  }

  Eigen::VectorXcd u = random_point(rng, omega_for(2));
  Eigen::VectorXcd b = random_point(rng, omega_for(2));
  SecantConfig config = config_from_centered(u, {b}, &ctx.engine());
  GridSpec spec;
  spec.count = 16;
  spec.seed = 77;
  SampleGrid grid = make_sample_grid(ctx.engine(), config, spec, policy);
  HierarchyState state = make_initial_state(ctx.engine_ptr(), config, grid);
  SolveOutcome outcome = solve_order(state, 1, 1e-8, policy);
  detail << false_count << "/50 non-secant verdicts, order-1 status "
         << solve_status_name(outcome.status) << " (residual "
         << outcome.residual << ")";
  return false_count == 50 && outcome.status == SolveStatus::order_unsolvable;
}

bool criterion_determinism(std::ostringstream& detail) {
  const char* cfg = R"({
    "command": "hierarchy-run",
    "genus": 1,
    "omega": [[[0.0, 1.0]]],
    "u": [[0.23, 0.04]],
    "b": [[[0.41, -0.07]]],
    "s_max": 4,
    "tol_solve": 1e-8,
    "seed": 11,
    "rt_orders": [2, 3],
    "rt_samples": 4
  })";
  RunConfig config = parse_config(cfg);
  std::string a = serialize_report(dispatch(config));
  std::string b = serialize_report(dispatch(config));
  detail << "report bytes " << a.size() << (a == b ? ", identical" : ", DIFFER");
  return a == b && a.find("\"status\":\"success\"") != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<OneCriterion> criteria = {
      {1, "addition formula residuals (g = 1..3)", criterion_addition_formula},
      {2, "theta values vs direct summation, periodicity, evenness",
       criterion_theta_correctness},
      {3, "directional jets vs finite differences", criterion_jets},
      {4, "Delta operators vs series-substitution oracle",
       criterion_delta_oracle},
      {5, "g=1 m=1 hierarchy through order 8", criterion_hierarchy_g1},
      {6, "g=2 degenerate trisecant + hierarchy orders 2..5",
       criterion_g2_instantiation},
      {7, "R/T cross-identities on solved states", criterion_rt_cross},
      {8, "divisor intersection and restriction identity",
       criterion_restriction},
      {9, "negative controls (non-secant verdicts, unsolvable order)",
       criterion_negative_controls},
      {10, "byte-identical reports for identical configs",
       criterion_determinism},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  bool all_ok = true;
  for (const auto& crit : criteria) {
    if (!selected.empty() && !selected.count(crit.id)) continue;
    std::ostringstream detail;
    bool ok = false;
    try {
      ok = crit.run(detail);
    } catch (const std::exception& e) {
      detail << "exception: " << e.what();
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << crit.id << ": "
              << crit.name << " (" << detail.str() << ")" << std::endl;
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
