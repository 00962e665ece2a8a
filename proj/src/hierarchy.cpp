#include "secantlab/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace secantlab {

namespace {

// Base points p_1 = u, p_2 = -u, p_{j+2} = b_j of the centered configuration.
std::vector<Eigen::VectorXcd> base_points(const SecantConfig& config) {
  std::vector<Eigen::VectorXcd> pts;
  pts.push_back(config.centered_u);
  pts.push_back(-config.centered_u);
  for (const auto& b : config.centered_b) pts.push_back(b);
  return pts;
}

// Multi-orders required by Delta_0..Delta_S, padded to length S.
std::vector<std::vector<int>> delta_orders(int order) {
  std::vector<std::vector<int>> orders;
  orders.push_back(std::vector<int>(order, 0));
  for (int s = 1; s <= order; ++s) {
    for (const auto& p : partitions_weighted(s)) {
      std::vector<int> key = p.multiplicities;
      key.resize(order, 0);
      orders.push_back(key);
    }
  }
  return orders;
}

VectorFieldSeq scaled_seq(const VectorFieldSeq& seq, cplx factor, int order) {
  VectorFieldSeq out;
  out.g = seq.g;
  for (int j = 1; j <= order; ++j) out.w.push_back(factor * seq.at(j));
  return out;
}

// Expansion of theta(base + sign * (C(eps) * factor)) as a power series via
// the partition operators on one jet.
PowerSeries theta_shift_series(const ThetaEngine& engine,
                               const Eigen::VectorXcd& base,
                               const VectorFieldSeq& dirs, int order, int sign,
                               const TruncationPolicy& policy) {
  std::vector<Eigen::VectorXcd> dvec;
  for (int j = 1; j <= order; ++j) dvec.push_back(dirs.at(j));
  DirectionalJet jet =
      engine.jet_select(ThetaCharacteristic::zero(engine.genus()), base, dvec,
                        delta_orders(order), policy);
  PowerSeries out(order);
  for (int s = 0; s <= order; ++s) out[s] = delta_apply(s, dirs, jet, sign);
  return out;
}

}  // namespace

cplx AlphaTable::get(int j, int i) const {
  auto it = entries.find({j, i});
  return it == entries.end() ? cplx(0, 0) : it->second;
}

void AlphaTable::set(int j, int i, cplx v) {
  bool free_row = (j == 1) || (j >= 3 && j <= m + 1);
  if (!free_row)
    throw Error(ErrorCode::ValidationError,
                "alpha row " + std::to_string(j) + " is fixed by normalization");
  if (i < 1) throw Error(ErrorCode::ValidationError, "alpha order must be >= 1");
  entries[{j, i}] = v;
}

PowerSeries AlphaTable::alpha(int j, int order) const {
  PowerSeries s(order);
  if (j == 1) {
    s[0] = cplx(1, 0);
    for (int i = 1; i <= order; ++i) s[i] = get(1, i);
  } else if (j == 2) {
    s[0] = cplx(-1, 0);
  } else if (j == m + 2) {
    if (order >= 1) s[1] = eps_scale;
  } else if (j >= 3 && j <= m + 1) {
    for (int i = 1; i <= order; ++i) s[i] = get(j, i);
  } else {
    throw Error(ErrorCode::ValidationError, "alpha row out of range");
  }
  return s;
}

SampleGrid make_sample_grid(const ThetaEngine& engine,
                            const SecantConfig& config, const GridSpec& spec,
                            const TruncationPolicy& policy) {
  const int g = engine.genus();
  int count = spec.count > 0 ? spec.count : 4 * (1 << g);
  if (count < 2 * (1 << g))
    throw Error(ErrorCode::ValidationError,
                "grid needs at least 2 * 2^g points");
  SampleGrid grid;
  grid.seed = spec.seed;
  Rng rng(spec.seed);
  // Points are drawn in the (p, q) lattice frame, z = p + Omega q, with the
  // q range kept small so theta magnitudes stay O(1).
  std::vector<Eigen::VectorXcd> divisors;
  divisors.push_back(config.centered_u);
  divisors.push_back(-config.centered_u);
  for (const auto& b : config.centered_b) {
    divisors.push_back(b);
    divisors.push_back(-b);
  }
  for (int i = 0; i < count; ++i) {
    bool ok = false;
    for (int attempt = 0; attempt < 256 && !ok; ++attempt) {
      Eigen::VectorXd p(g), q(g);
      for (int k = 0; k < g; ++k) {
        p[k] = rng.uniform();
        q[k] = rng.uniform(-0.22, 0.22);
      }
      Eigen::VectorXcd z =
          p.cast<cplx>() + engine.siegel().omega * q.cast<cplx>();
      ok = true;
      for (const auto& d : divisors) {
        if (std::abs(engine.theta(z + d, policy)) < 1e-4) {
          ok = false;
          break;
        }
      }
      if (ok) grid.points.push_back(z);
    }
    if (!ok)
      throw Error(ErrorCode::ValidationError,
                  "could not place grid points away from the theta divisors");
  }
  return grid;
}

HierarchyState make_initial_state(std::shared_ptr<const ThetaEngine> engine,
                                  const SecantConfig& config,
                                  const SampleGrid& grid) {
  HierarchyState st;
  st.engine = std::move(engine);
  st.config = config;
  st.seq.g = st.engine->genus();
  st.alphas.m = config.m;
  st.grid = grid;
  return st;
}

PowerSeries p_series_eval(const HierarchyState& state,
                          const Eigen::VectorXcd& z, int order,
                          const TruncationPolicy& policy) {
  const auto pts = base_points(state.config);
  const int m = state.config.m;
  VectorFieldSeq half = scaled_seq(state.seq, cplx(0.5, 0), order);
  PowerSeries total(order);
  for (int j = 1; j <= m + 2; ++j) {
    PowerSeries f = theta_shift_series(*state.engine, z + pts[j - 1], half,
                                       order, +1, policy);
    PowerSeries gneg = theta_shift_series(*state.engine, z - pts[j - 1], half,
                                          order, -1, policy);
    PowerSeries term =
        series_mul(state.alphas.alpha(j, order), series_mul(f, gneg));
    total = series_add(total, term);
  }
  return total;
}

namespace {

// State copy with every order-s slot removed: W^(s) = 0, alpha_{j,s} = 0 for
// all rows including the gauge row.
HierarchyState strip_order(const HierarchyState& state, int s) {
  HierarchyState st = state;
  if (st.seq.order() >= s) st.seq.w[s - 1].setZero();
  for (auto it = st.alphas.entries.begin(); it != st.alphas.entries.end();) {
    if (it->first.second == s)
      it = st.alphas.entries.erase(it);
    else
      ++it;
  }
  if (s == 1) st.alphas.eps_scale = cplx(0, 0);
  return st;
}

}  // namespace

cplx q_s_eval(const HierarchyState& state, int s, const Eigen::VectorXcd& z,
              const TruncationPolicy& policy) {
  if (s < 1) throw Error(ErrorCode::ValidationError, "order must be >= 1");
  if (state.solved_order() < s - 1)
    throw Error(ErrorCode::LowerOrdersUnsolved,
                "orders below " + std::to_string(s) + " are not solved");
  return p_series_eval(strip_order(state, s), z, s, policy).coeff(s);
}

const char* solve_status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::solved: return "solved";
    case SolveStatus::order_unsolvable: return "order_unsolvable";
    case SolveStatus::ill_conditioned: return "ill_conditioned";
  }
  return "unknown";
}

SolveOutcome solve_order(const HierarchyState& state, int s, double tol_solve,
                         const TruncationPolicy& policy) {
  if (s < 1 || s > kOrderCeiling)
    throw Error(ErrorCode::OrderCeilingExceeded, "order out of range");
  if (state.solved_order() != s - 1)
    throw Error(ErrorCode::LowerOrdersUnsolved,
                "solve_order(" + std::to_string(s) + ") requires exactly " +
                    std::to_string(s - 1) + " solved orders");
  if (state.grid.points.empty())
    throw Error(ErrorCode::ValidationError, "state has no sample grid");
  const ThetaEngine& engine = *state.engine;
  const int g = engine.genus();
  const int m = state.config.m;
  const int n_unknown = m + g;  // alpha_{1,s}; alpha_{3..m+1,s}; D_s
  const auto& grid = state.grid.points;
  const int n = static_cast<int>(grid.size());
  const Eigen::VectorXcd u = state.config.centered_u;
  const auto& b = state.config.centered_b;

  // P_s is affine in the order-s unknowns:
  //   P_s = Q_s + [s==1] eps_scale theta_{b_m} theta_{-b_m}
  //       + alpha_{1,s} theta_u theta_{-u}
  //       + sum_{j<m} alpha_{j+2,s} theta_{b_j} theta_{-b_j}
  //       + D_s theta_{-u} . theta_u - D_s theta_u . theta_{-u}.
  Eigen::MatrixXcd a_mat(n, n_unknown);
  Eigen::VectorXcd rhs(n);
  std::vector<double> theta_uu(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const Eigen::VectorXcd& z = grid[i];
    cplx th_pu = engine.theta(z + u, policy);
    cplx th_mu = engine.theta(z - u, policy);
    Eigen::VectorXcd gr_pu = engine.gradient(
        ThetaCharacteristic::zero(g), z + u, policy);
    Eigen::VectorXcd gr_mu = engine.gradient(
        ThetaCharacteristic::zero(g), z - u, policy);
    theta_uu[i] = std::abs(th_pu * th_mu);
    a_mat(i, 0) = th_pu * th_mu;
    for (int j = 1; j <= m - 1; ++j)
      a_mat(i, j) = engine.theta(z + b[j - 1], policy) *
                    engine.theta(z - b[j - 1], policy);
    for (int k = 0; k < g; ++k)
      a_mat(i, m + k) = gr_pu[k] * th_mu - th_pu * gr_mu[k];
    cplx fixed(0, 0);
    if (s == 1)
      fixed = state.alphas.eps_scale * engine.theta(z + b[m - 1], policy) *
              engine.theta(z - b[m - 1], policy);
    rhs(i) = -(q_s_eval(state, s, z, policy) + fixed);
  });

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      a_mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  double smax = sv.size() ? sv[0] : 0.0;
  double smin_pos = smax;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 0) smin_pos = sv[i];
  SolveOutcome out;
  out.cond = (smin_pos > 0) ? smax / smin_pos
                            : std::numeric_limits<double>::infinity();
  // Minimum-norm solution with a rank cutoff relative to sigma_max.
  svd.setThreshold(1e-13);
  out.unknowns = svd.solve(rhs);

  HierarchyState updated = state;
  updated.seq.w.push_back(out.unknowns.segment(m, g));
  updated.alphas.set(1, s, out.unknowns(0));
  for (int j = 1; j <= m - 1; ++j) updated.alphas.set(j + 2, s, out.unknowns(j));

  double scale = *std::max_element(theta_uu.begin(), theta_uu.end());
  std::vector<double> abs_ps(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    abs_ps[i] = std::abs(p_series_eval(updated, grid[i], s, policy).coeff(s));
  });
  out.residual = *std::max_element(abs_ps.begin(), abs_ps.end()) / scale;
  out.state = std::move(updated);

  if (out.cond > 1e12) {
    out.status = SolveStatus::ill_conditioned;
    std::ostringstream os;
    os << "least-squares condition number " << out.cond;
    out.note = os.str();
    return out;
  }
  if (!(out.residual <= tol_solve)) {
    out.status = SolveStatus::order_unsolvable;
    std::ostringstream os;
    os << "residual " << out.residual << " above tol " << tol_solve;
    out.note = os.str();
    return out;
  }
  if (s == 1 && out.state.seq.w[0].norm() < 1e-10) {
    out.status = SolveStatus::order_unsolvable;
    out.note = "solved first order has D_1 = 0 (no smooth germ)";
    return out;
  }
  out.status = SolveStatus::solved;
  out.state.residuals.push_back(out.residual);
  out.state.tol_solve = tol_solve;
  return out;
}

HierarchyRun run_hierarchy(std::shared_ptr<const ThetaEngine> engine,
                           const SecantConfig& config, int s_max,
                           double tol_solve, const GridSpec& grid_spec,
                           const TruncationPolicy& policy) {
  SampleGrid grid = make_sample_grid(*engine, config, grid_spec, policy);
  HierarchyRun run;
  run.state = make_initial_state(std::move(engine), config, grid);
  for (int s = 1; s <= s_max; ++s) {
    SolveOutcome outcome = solve_order(run.state, s, tol_solve, policy);
    if (outcome.status != SolveStatus::solved) {
      run.first_failed_order = s;
      run.failure_status = outcome.status;
      run.failure_residual = outcome.residual;
      run.failure_note = outcome.note;
      break;
    }
    run.state = std::move(outcome.state);
  }
  return run;
}

namespace {

// R and T differ from P only in which factor carries the full C(eps) shift:
//   R(z,eps) = sum_j alpha_j(eps) theta(z+p_j+C(eps)) theta(z-p_j)
//   T(z,eps) = sum_j alpha_j(eps) theta(z+p_j) theta(z-p_j-C(eps)).
PowerSeries rt_series(const HierarchyState& state, const Eigen::VectorXcd& z,
                      int order, int sign, const TruncationPolicy& policy) {
  const auto pts = base_points(state.config);
  const int m = state.config.m;
  VectorFieldSeq full = scaled_seq(state.seq, cplx(1.0, 0), order);
  PowerSeries total(order);
  for (int j = 1; j <= m + 2; ++j) {
    Eigen::VectorXcd moving = sign > 0 ? Eigen::VectorXcd(z + pts[j - 1])
                                       : Eigen::VectorXcd(z - pts[j - 1]);
    Eigen::VectorXcd fixed_pt = sign > 0 ? Eigen::VectorXcd(z - pts[j - 1])
                                         : Eigen::VectorXcd(z + pts[j - 1]);
    PowerSeries shifted =
        theta_shift_series(*state.engine, moving, full, order, sign, policy);
    cplx plain = state.engine->theta(fixed_pt, policy);
    PowerSeries term = series_mul(state.alphas.alpha(j, order),
                                  series_mul(shifted, PowerSeries::constant(plain, order)));
    total = series_add(total, term);
  }
  return total;
}

}  // namespace

PowerSeries r_series_eval(const HierarchyState& state,
                          const Eigen::VectorXcd& z, int order,
                          const TruncationPolicy& policy) {
  return rt_series(state, z, order, +1, policy);
}

PowerSeries t_series_eval(const HierarchyState& state,
                          const Eigen::VectorXcd& z, int order,
                          const TruncationPolicy& policy) {
  return rt_series(state, z, order, -1, policy);
}

RtResiduals rt_cross_check(const HierarchyState& state, int s,
                           const Eigen::VectorXcd& z,
                           const TruncationPolicy& policy) {
  cplx ps = p_series_eval(state, z, s, policy).coeff(s);
  cplx rs = r_series_eval(state, z, s, policy).coeff(s);
  cplx ts = t_series_eval(state, z, s, policy).coeff(s);
  RtResiduals res;
  res.r_residual = std::abs(rs - ps);
  res.t_residual = std::abs(ts - ps);
  res.rsq_residual = std::abs(rs * rs - rs * ts);
  return res;
}

HierarchyState reparametrize_state(const HierarchyState& state, cplx c) {
  if (c == cplx(0, 0))
    throw Error(ErrorCode::ValidationError, "reparametrization needs c != 0");
  HierarchyState out = state;
  cplx pw = c;
  for (std::size_t k = 0; k < out.seq.w.size(); ++k) {
    out.seq.w[k] *= pw;
    pw *= c;
  }
  for (auto& [key, value] : out.alphas.entries)
    value *= std::pow(c, key.second);
  out.alphas.eps_scale *= c;
  for (std::size_t k = 0; k < out.residuals.size(); ++k)
    out.residuals[k] *= std::pow(std::abs(c), static_cast<double>(k + 1));
  return out;
}

}  // namespace secantlab
