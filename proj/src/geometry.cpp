#include "secantlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace secantlab {

namespace {

// Torus point p + Omega q with q kept small so theta magnitudes stay O(1).
Eigen::VectorXcd random_torus_point(const ThetaEngine& engine, Rng& rng,
                                    double q_range) {
  const int g = engine.genus();
  Eigen::VectorXd p(g), q(g);
  for (int k = 0; k < g; ++k) {
    p[k] = rng.uniform();
    q[k] = rng.uniform(-q_range, q_range);
  }
  return p.cast<cplx>() + engine.siegel().omega * q.cast<cplx>();
}

struct SearchParams {
  Eigen::VectorXcd u;
  std::vector<Eigen::VectorXcd> b;  // m points
  Eigen::VectorXcd d1;
  cplx alpha1_1;
  std::vector<cplx> alpha_extra;  // alpha_{j+2,1}, j = 1..m-1
};

int param_count(int g, int m) { return 2 * g * (m + 2) + 2 + 2 * (m - 1); }

Eigen::VectorXd pack(const SearchParams& sp) {
  const int g = static_cast<int>(sp.u.size());
  const int m = static_cast<int>(sp.b.size());
  Eigen::VectorXd x(param_count(g, m));
  int at = 0;
  auto put_vec = [&](const Eigen::VectorXcd& v) {
    for (int i = 0; i < v.size(); ++i) {
      x[at++] = v[i].real();
      x[at++] = v[i].imag();
    }
  };
  put_vec(sp.u);
  for (const auto& bj : sp.b) put_vec(bj);
  put_vec(sp.d1);
  x[at++] = sp.alpha1_1.real();
  x[at++] = sp.alpha1_1.imag();
  for (const auto& a : sp.alpha_extra) {
    x[at++] = a.real();
    x[at++] = a.imag();
  }
  return x;
}

SearchParams unpack(const Eigen::VectorXd& x, int g, int m) {
  SearchParams sp;
  int at = 0;
  auto take_vec = [&](int n) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) {
      v[i] = cplx(x[at], x[at + 1]);
      at += 2;
    }
    return v;
  };
  sp.u = take_vec(g);
  for (int j = 0; j < m; ++j) sp.b.push_back(take_vec(g));
  sp.d1 = take_vec(g);
  sp.alpha1_1 = cplx(x[at], x[at + 1]);
  at += 2;
  for (int j = 0; j < m - 1; ++j) {
    sp.alpha_extra.push_back(cplx(x[at], x[at + 1]));
    at += 2;
  }
  return sp;
}

// P_1 on the grid for the current parameters, plus the normalization scale
// max |theta(z+u) theta(z-u)|.
void eval_p1(const ThetaEngine& engine,
             const std::vector<Eigen::VectorXcd>& grid, const SearchParams& sp,
             const TruncationPolicy& policy, Eigen::VectorXcd& p1,
             double& scale) {
  const int g = engine.genus();
  const int m = static_cast<int>(sp.b.size());
  const int n = static_cast<int>(grid.size());
  p1.resize(n);
  std::vector<double> mags(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const Eigen::VectorXcd& z = grid[i];
    cplx th_pu = engine.theta(z + sp.u, policy);
    cplx th_mu = engine.theta(z - sp.u, policy);
    Eigen::VectorXcd gr_pu =
        engine.gradient(ThetaCharacteristic::zero(g), z + sp.u, policy);
    Eigen::VectorXcd gr_mu =
        engine.gradient(ThetaCharacteristic::zero(g), z - sp.u, policy);
    cplx val = sp.alpha1_1 * th_pu * th_mu;
    for (int k = 0; k < g; ++k)
      val += sp.d1[k] * (gr_pu[k] * th_mu - th_pu * gr_mu[k]);
    for (int j = 0; j < m; ++j) {
      cplx prod = engine.theta(z + sp.b[j], policy) *
                  engine.theta(z - sp.b[j], policy);
      if (j < m - 1)
        val += sp.alpha_extra[j] * prod;
      else
        val += prod;  // gauge alpha_{m+2,1} = 1
    }
    p1[i] = val;
    mags[i] = std::abs(th_pu * th_mu);
  });
  scale = *std::max_element(mags.begin(), mags.end());
}

double norm_residual(const Eigen::VectorXcd& p1, double scale) {
  double mx = 0;
  for (int i = 0; i < p1.size(); ++i) mx = std::max(mx, std::abs(p1[i]));
  return mx / std::max(scale, 1e-300);
}

// Degenerate iterates: collapsed configuration or vanishing tangency.
bool degenerate_params(const ThetaEngine& engine, const SearchParams& sp) {
  Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(sp.u.size());
  if (engine.lattice_distance(2.0 * sp.u, zero) < 1e-3) return true;
  for (const auto& bj : sp.b) {
    if (engine.lattice_distance(bj, sp.u) < 1e-3) return true;
    if (engine.lattice_distance(bj, -sp.u) < 1e-3) return true;
  }
  for (std::size_t i = 0; i < sp.b.size(); ++i)
    for (std::size_t j = i + 1; j < sp.b.size(); ++j)
      if (engine.lattice_distance(sp.b[i], sp.b[j]) < 1e-3) return true;
  if (sp.d1.norm() < 1e-8) return true;
  return false;
}

// Least-squares fill-in of the linear parameters (alpha, D_1) for fixed
// points; used only to initialize the LM iteration.
void init_linear_params(const ThetaEngine& engine,
                        const std::vector<Eigen::VectorXcd>& grid,
                        SearchParams& sp, const TruncationPolicy& policy) {
  const int g = engine.genus();
  const int m = static_cast<int>(sp.b.size());
  const int n = static_cast<int>(grid.size());
  const int nu = 1 + (m - 1) + g;
  Eigen::MatrixXcd a_mat(n, nu);
  Eigen::VectorXcd rhs(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXcd& z = grid[i];
    cplx th_pu = engine.theta(z + sp.u, policy);
    cplx th_mu = engine.theta(z - sp.u, policy);
    Eigen::VectorXcd gr_pu =
        engine.gradient(ThetaCharacteristic::zero(g), z + sp.u, policy);
    Eigen::VectorXcd gr_mu =
        engine.gradient(ThetaCharacteristic::zero(g), z - sp.u, policy);
    a_mat(i, 0) = th_pu * th_mu;
    for (int j = 1; j <= m - 1; ++j)
      a_mat(i, j) = engine.theta(z + sp.b[j - 1], policy) *
                    engine.theta(z - sp.b[j - 1], policy);
    for (int k = 0; k < g; ++k)
      a_mat(i, m - 1 + 1 + k) = gr_pu[k] * th_mu - th_pu * gr_mu[k];
    rhs(i) = -engine.theta(z + sp.b[m - 1], policy) *
             engine.theta(z - sp.b[m - 1], policy);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      a_mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-13);
  Eigen::VectorXcd sol = svd.solve(rhs);
  sp.alpha1_1 = sol(0);
  for (int j = 0; j < m - 1; ++j) sp.alpha_extra[j] = sol(1 + j);
  sp.d1 = sol.segment(m, g);
}

}  // namespace

SecantSearchResult find_degenerate_secant(const KummerContext& ctx, int m,
                                          std::uint64_t seed, double tol_search,
                                          int max_iters,
                                          const TruncationPolicy& policy) {
  if (m < 1) throw Error(ErrorCode::ValidationError, "m must be >= 1");
  if (!(tol_search > 0))
    throw Error(ErrorCode::ValidationError, "tol_search must be positive");
  const ThetaEngine& engine = ctx.engine();
  const int g = engine.genus();
  const int np = param_count(g, m);

  // The sample grid is derived from the seed but shared by all restarts.
  Rng grid_rng(seed ^ 0x5eedf00dULL);
  const int n_grid = 3 * (1 << g) + 4;
  std::vector<Eigen::VectorXcd> grid;
  for (int i = 0; i < n_grid; ++i)
    grid.push_back(random_torus_point(engine, grid_rng, 0.22));

  SecantSearchResult best;
  best.seed = seed;
  best.final_residual = std::numeric_limits<double>::infinity();
  int total_iters = 0;

  const double fd_step = 1e-6;
  for (int attempt = 0; attempt < 5; ++attempt) {
    Rng rng(seed + 1000003ULL * static_cast<std::uint64_t>(attempt));
    SearchParams sp;
    sp.u = random_torus_point(engine, rng, 0.2);
    for (int j = 0; j < m; ++j)
      sp.b.push_back(random_torus_point(engine, rng, 0.2));
    sp.d1 = Eigen::VectorXcd::Zero(g);
    sp.alpha1_1 = cplx(0, 0);
    sp.alpha_extra.assign(m - 1, cplx(0, 0));
    init_linear_params(engine, grid, sp, policy);

    Eigen::VectorXd x = pack(sp);
    Eigen::VectorXcd p1;
    double scale = 0;
    eval_p1(engine, grid, unpack(x, g, m), policy, p1, scale);
    double f = p1.squaredNorm();
    double lambda = 1e-3;
    int it = 0;
    bool converged = norm_residual(p1, scale) <= tol_search;
    const int n_res = 2 * static_cast<int>(grid.size());
    auto residual_vec = [&](const Eigen::VectorXd& xv) {
      Eigen::VectorXcd v;
      double sc;
      eval_p1(engine, grid, unpack(xv, g, m), policy, v, sc);
      Eigen::VectorXd r(n_res);
      for (int i = 0; i < v.size(); ++i) {
        r[2 * i] = v[i].real();
        r[2 * i + 1] = v[i].imag();
      }
      return r;
    };

    // Iterate past the tolerance while the objective still improves: the
    // downstream hierarchy orders inherit whatever error is left here.
    while (it < max_iters) {
      ++it;
      Eigen::VectorXd r0 = residual_vec(x);
      Eigen::MatrixXd jac(n_res, np);
      parallel_for(np, [&](std::size_t c) {
        Eigen::VectorXd xp = x;
        xp[c] += fd_step;
        jac.col(c) = (residual_vec(xp) - r0) / fd_step;
      });
      Eigen::MatrixXd jtj = jac.transpose() * jac;
      Eigen::VectorXd jtr = jac.transpose() * r0;
      bool accepted = false;
      double f_prev = f;
      for (int inner = 0; inner < 12 && !accepted; ++inner) {
        Eigen::MatrixXd damped = jtj;
        for (int d = 0; d < np; ++d)
          damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
        Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
        Eigen::VectorXd xt = x + delta;
        Eigen::VectorXcd pt;
        double st;
        eval_p1(engine, grid, unpack(xt, g, m), policy, pt, st);
        double ft = pt.squaredNorm();
        if (ft < f) {
          x = xt;
          f = ft;
          p1 = pt;
          scale = st;
          lambda = std::max(lambda / 3.0, 1e-14);
          accepted = true;
        } else {
          lambda *= 4.0;
        }
      }
      converged = norm_residual(p1, scale) <= tol_search;
      if (!accepted) break;  // stalled
      if (converged && f > 0.2 * f_prev) break;  // no further gain
    }
    converged = norm_residual(p1, scale) <= tol_search;
    total_iters += it;

    SearchParams sol = unpack(x, g, m);
    double res = norm_residual(p1, scale);
    bool degenerate = degenerate_params(engine, sol);
    if (res < best.final_residual && !degenerate) {
      best.success = converged && res <= tol_search;
      try {
        best.config = config_from_centered(sol.u, sol.b, &engine);
      } catch (const Error&) {
        best.success = false;
        continue;
      }
      best.d1_scale = sol.d1.norm();
      best.d1 = best.d1_scale > 0 ? Eigen::VectorXcd(sol.d1 / best.d1_scale)
                                  : sol.d1;
      best.alpha1_1 = sol.alpha1_1;
      best.alpha_j_1 = sol.alpha_extra;
      best.final_residual = res;
    }
    if (best.success) break;
  }
  best.iterations = total_iters;
  return best;
}

std::vector<SecantConfig> translated_configs(
    const Eigen::VectorXcd& u, const std::vector<Eigen::VectorXcd>& b) {
  const int m = static_cast<int>(b.size());
  std::vector<SecantConfig> out;
  for (int k = 0; k < m - 1; ++k) {
    Eigen::VectorXcd mu = -b[k];
    Eigen::VectorXcd shift = -0.5 * (b[m - 1] + mu);
    std::vector<Eigen::VectorXcd> pts;
    pts.push_back(u + shift);
    pts.push_back(-u + shift);
    for (const auto& bj : b) pts.push_back(bj + shift);
    out.push_back(center_config(pts));
  }
  return out;
}

DivisorIntersection divisor_intersection_points(
    const ThetaEngine& engine, const Eigen::VectorXcd& u, int n_starts,
    double tol, const TruncationPolicy& policy) {
  if (engine.genus() != 2)
    throw Error(ErrorCode::ValidationError,
                "divisor intersection is implemented for genus 2");
  if (n_starts < 1)
    throw Error(ErrorCode::ValidationError, "need at least one start");
  const int g = 2;
  const auto& omega = engine.siegel().omega;
  auto chr = ThetaCharacteristic::zero(g);

  auto value = [&](const Eigen::VectorXcd& zeta) {
    Eigen::Vector2cd f;
    f[0] = engine.theta(zeta - u, policy);
    f[1] = engine.theta(zeta + u, policy);
    return f;
  };

  // Starts are derived per index from a fixed internal seed so identical
  // inputs give identical point sets.
  std::vector<Eigen::VectorXcd> found(n_starts);
  std::vector<char> ok(n_starts, 0);
  parallel_for(n_starts, [&](std::size_t si) {
    Rng local(0xd1715ULL + 0x9e3779b97f4a7c15ULL * (si + 1));
    Eigen::VectorXd p(g), q(g);
    for (int k = 0; k < g; ++k) {
      p[k] = local.uniform();
      q[k] = local.uniform();
    }
    Eigen::VectorXcd zeta = p.cast<cplx>() + omega * q.cast<cplx>();
    const double im_cap = 4.0 * engine.im_omega().norm();
    for (int iter = 0; iter < 80; ++iter) {
      if (zeta.imag().norm() > im_cap) return;  // wandered off the torus
      Eigen::Vector2cd f = value(zeta);
      double fn = f.norm();
      if (std::max(std::abs(f[0]), std::abs(f[1])) <= tol) break;
      Eigen::Matrix2cd jac;
      jac.row(0) = engine.gradient(chr, zeta - u, policy).transpose();
      jac.row(1) = engine.gradient(chr, zeta + u, policy).transpose();
      Eigen::Vector2cd delta = jac.partialPivLu().solve(-f);
      double t = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 8; ++bt) {
        Eigen::VectorXcd trial = zeta + t * delta;
        if (trial.imag().norm() <= im_cap && value(trial).norm() < fn) {
          zeta = trial;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) return;  // diverged start
    }
    if (zeta.imag().norm() > im_cap) return;
    Eigen::Vector2cd f = value(zeta);
    if (std::max(std::abs(f[0]), std::abs(f[1])) <= tol) {
      // Two polish steps sharpen the root well below tol so deduplication
      // and downstream restriction checks see stable coordinates.
      for (int polish = 0; polish < 2; ++polish) {
        Eigen::Matrix2cd jac;
        jac.row(0) = engine.gradient(chr, zeta - u, policy).transpose();
        jac.row(1) = engine.gradient(chr, zeta + u, policy).transpose();
        zeta += jac.partialPivLu().solve(-value(zeta));
      }
      found[si] = engine.reduce_mod_lattice(zeta);
      ok[si] = 1;
    }
  });

  DivisorIntersection isect;
  isect.u = u;
  isect.tol = tol;
  for (int si = 0; si < n_starts; ++si) {
    if (!ok[si]) continue;
    Eigen::Vector2cd f = value(found[si]);
    if (std::max(std::abs(f[0]), std::abs(f[1])) > tol) continue;
    bool dup = false;
    for (const auto& existing : isect.points)
      if (engine.lattice_distance(existing, found[si]) < 1e-6) dup = true;
    if (!dup) isect.points.push_back(found[si]);
  }
  if (isect.points.empty())
    throw Error(ErrorCode::NoPointsFound,
                "no divisor intersection points converged from " +
                    std::to_string(n_starts) + " starts");
  std::sort(isect.points.begin(), isect.points.end(),
            [](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
              for (int i = 0; i < a.size(); ++i) {
                if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
                if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
              }
              return false;
            });
  return isect;
}

double restriction_check(const HierarchyState& state, int s,
                         const DivisorIntersection& isect,
                         const TruncationPolicy& policy) {
  if (state.engine->genus() != 2 || state.config.m != 1)
    throw Error(ErrorCode::ValidationError,
                "restriction check is implemented for g = 2, m = 1");
  if (s < 1) throw Error(ErrorCode::ValidationError, "order must be >= 1");
  if (state.solved_order() < s - 1)
    throw Error(ErrorCode::LowerOrdersUnsolved,
                "restriction check at order " + std::to_string(s) +
                    " needs orders below it solved");
  if (isect.points.empty())
    throw Error(ErrorCode::NoPointsFound, "empty divisor intersection");
  const ThetaEngine& engine = *state.engine;
  const Eigen::VectorXcd bm = state.config.centered_b.back();
  VectorFieldSeq full;
  full.g = state.seq.g;
  for (int j = 1; j <= s - 1; ++j) full.w.push_back(state.seq.at(j));

  double worst = 0;
  for (const auto& zeta : isect.points) {
    cplx rs = r_series_eval(state, zeta, s, policy).coeff(s);
    cplx lead;
    if (s == 1) {
      lead = engine.theta(zeta + bm, policy);
    } else {
      std::vector<Eigen::VectorXcd> dirs;
      for (int j = 1; j <= s - 1; ++j) dirs.push_back(full.at(j));
      std::vector<std::vector<int>> orders;
      orders.push_back(std::vector<int>(s - 1, 0));
      for (int t = 1; t <= s - 1; ++t)
        for (const auto& p : partitions_weighted(t)) {
          std::vector<int> key = p.multiplicities;
          key.resize(s - 1, 0);
          orders.push_back(key);
        }
      DirectionalJet jet =
          engine.jet_select(ThetaCharacteristic::zero(2), zeta + bm, dirs,
                            orders, policy);
      lead = delta_apply(s - 1, full, jet, +1);
    }
    cplx rhs = lead * engine.theta(zeta - bm, policy);
    double res =
        std::abs(rs - rhs) / (1.0 + std::max(std::abs(rs), std::abs(rhs)));
    worst = std::max(worst, res);
  }
  return worst;
}

}  // namespace secantlab
