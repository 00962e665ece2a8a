#ifndef SECANTLAB_GEOMETRY_HPP
#define SECANTLAB_GEOMETRY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "secantlab/hierarchy.hpp"
#include "secantlab/kummer.hpp"

namespace secantlab {

// Output of the degenerate-secant search.  The returned coefficients are in
// the gauge alpha_{m+2,1} = 1; d1 is reported unit-norm with the solved
// magnitude in d1_scale (so D_1 = d1_scale * d1 reproduces P_1).
struct SecantSearchResult {
  bool success = false;
  SecantConfig config;
  Eigen::VectorXcd d1;
  double d1_scale = 0;
  cplx alpha1_1{0, 0};
  std::vector<cplx> alpha_j_1;  // alpha_{j+2,1}, j = 1..m-1
  double final_residual = 0;    // max-grid |P_1| / max-grid |theta_u theta_-u|
  int iterations = 0;
  std::uint64_t seed = 0;
};

// Levenberg-Marquardt least squares over Re/Im of (u, b_1..b_m, D_1,
// alpha_{1,1}, alpha_{3,1}..alpha_{m+1,1}) minimizing sum |P_1(z_i)|^2 on a
// seeded grid.  Degenerate iterates (2u = 0, b_j = +-u, D_1 = 0 mod lattice)
// trigger an internal restart, at most 5 attempts.
SecantSearchResult find_degenerate_secant(const KummerContext& ctx, int m,
                                          std::uint64_t seed, double tol_search,
                                          int max_iters,
                                          const TruncationPolicy& policy);

// The m-1 translated configurations of the honest-secant hypotheses: for
// mu in {-b_1,...,-b_{m-1}} every point of (u, -u, b_1,...,b_m) is shifted
// by -(b_m + mu)/2.  Empty for m = 1.
std::vector<SecantConfig> translated_configs(
    const Eigen::VectorXcd& u, const std::vector<Eigen::VectorXcd>& b);

// Points of Theta_u . Theta_{-u} for g = 2: zeros of
// zeta -> (theta(zeta - u), theta(zeta + u)), deduplicated mod lattice.
struct DivisorIntersection {
  Eigen::VectorXcd u;
  std::vector<Eigen::VectorXcd> points;
  double tol = 0;
};

DivisorIntersection divisor_intersection_points(const ThetaEngine& engine,
                                                const Eigen::VectorXcd& u,
                                                int n_starts, double tol,
                                                const TruncationPolicy& policy);

// Max over the intersection points of
//   |R_s(zeta) - (Delta_{s-1} theta)(zeta + b_m) theta(zeta - b_m)|
// normalized by 1 + the larger magnitude.  Requires g = 2, m = 1.
double restriction_check(const HierarchyState& state, int s,
                         const DivisorIntersection& isect,
                         const TruncationPolicy& policy);

}  // namespace secantlab

#endif
