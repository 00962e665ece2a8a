#ifndef SECANTLAB_HIERARCHY_HPP
#define SECANTLAB_HIERARCHY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "secantlab/kummer.hpp"
#include "secantlab/series.hpp"
#include "secantlab/theta.hpp"

namespace secantlab {

// Coefficients alpha_{j,i} of the series alpha_j(eps).  The fixed rows are
// never stored: alpha_1 = 1 + sum_i alpha_{1,i} eps^i, alpha_2 = -1 and
// alpha_{m+2} = eps_scale * eps (eps_scale is 1 except for reparametrized
// states).  Free rows are j = 1 and j = 3..m+1.
struct AlphaTable {
  int m = 0;
  std::map<std::pair<int, int>, cplx> entries;
  cplx eps_scale{1.0, 0.0};

  cplx get(int j, int i) const;
  void set(int j, int i, cplx v);
  // Full series of row j (1-based, 1 <= j <= m+2) to the given order.
  PowerSeries alpha(int j, int order) const;
};

// Sample points used to impose section vanishing; kept away from the theta
// divisor translates that enter the residual normalization.
struct SampleGrid {
  std::vector<Eigen::VectorXcd> points;
  std::uint64_t seed = 0;
};

struct GridSpec {
  int count = 0;  // 0: use 4 * 2^g (always >= 2 * 2^g)
  std::uint64_t seed = 1;
};

SampleGrid make_sample_grid(const ThetaEngine& engine,
                            const SecantConfig& config, const GridSpec& spec,
                            const TruncationPolicy& policy);

// Solved data of the hierarchy: direction vectors W^(1..S), alpha
// coefficients and the per-order certified residuals.
struct HierarchyState {
  std::shared_ptr<const ThetaEngine> engine;
  SecantConfig config;
  VectorFieldSeq seq;
  AlphaTable alphas;
  std::vector<double> residuals;
  SampleGrid grid;
  double tol_solve = 0;

  int solved_order() const { return static_cast<int>(seq.w.size()); }
};

HierarchyState make_initial_state(std::shared_ptr<const ThetaEngine> engine,
                                  const SecantConfig& config,
                                  const SampleGrid& grid);

// Coefficients (P_0(z),...,P_S(z)) of
//   P(z,eps) = sum_j alpha_j(eps) theta(z+p_j+C/2) theta(z-p_j-C/2)
// with p_1 = u, p_2 = -u, p_{j+2} = b_j.  Unknown slots beyond the solved
// order enter as zero.
PowerSeries p_series_eval(const HierarchyState& state,
                          const Eigen::VectorXcd& z, int order,
                          const TruncationPolicy& policy);

// P_s(z) with every order-s slot zeroed (alpha_{j,s} for all j, D_s; at s=1
// this includes the gauge row, so Q_1 is identically zero).
cplx q_s_eval(const HierarchyState& state, int s, const Eigen::VectorXcd& z,
              const TruncationPolicy& policy);

enum class SolveStatus { solved, order_unsolvable, ill_conditioned };
const char* solve_status_name(SolveStatus status);

struct SolveOutcome {
  SolveStatus status = SolveStatus::order_unsolvable;
  HierarchyState state;       // updated state when solved, candidate otherwise
  double residual = 0;        // max_grid |P_s| / max_grid |theta_u theta_-u|
  double cond = 0;            // least-squares condition number
  Eigen::VectorXcd unknowns;  // (alpha_{1,s}, alpha_{3,s}..alpha_{m+1,s}, D_s)
  std::string note;
};

// Minimum-norm linear least squares for the m+g order-s unknowns on the
// sample grid.  The order-s dependence of P_s is exactly affine.
SolveOutcome solve_order(const HierarchyState& state, int s, double tol_solve,
                         const TruncationPolicy& policy);

struct HierarchyRun {
  HierarchyState state;
  int first_failed_order = 0;  // 0 when every requested order solved
  SolveStatus failure_status = SolveStatus::solved;
  double failure_residual = 0;
  std::string failure_note;
};

HierarchyRun run_hierarchy(std::shared_ptr<const ThetaEngine> engine,
                           const SecantConfig& config, int s_max,
                           double tol_solve, const GridSpec& grid_spec,
                           const TruncationPolicy& policy);

// Coefficients of R(z,eps) = P(z + C(eps)/2, eps) and
// T(z,eps) = P(z - C(eps)/2, eps).
PowerSeries r_series_eval(const HierarchyState& state,
                          const Eigen::VectorXcd& z, int order,
                          const TruncationPolicy& policy);
PowerSeries t_series_eval(const HierarchyState& state,
                          const Eigen::VectorXcd& z, int order,
                          const TruncationPolicy& policy);

struct RtResiduals {
  double r_residual = 0;    // |R_s - P_s|
  double t_residual = 0;    // |T_s - P_s|
  double rsq_residual = 0;  // |R_s^2 - R_s T_s|
};

// Diagnostic identities from the order-s cross-expansion; they vanish only
// when the lower orders are solved.
RtResiduals rt_cross_check(const HierarchyState& state, int s,
                           const Eigen::VectorXcd& z,
                           const TruncationPolicy& policy);

// Gauge transport eps -> c * eps: W^(k) scales by c^k, alpha_{j,i} by c^i,
// and the gauge row becomes c * eps.
HierarchyState reparametrize_state(const HierarchyState& state, cplx c);

}  // namespace secantlab

#endif
