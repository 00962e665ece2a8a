#ifndef SECANTLAB_KUMMER_HPP
#define SECANTLAB_KUMMER_HPP

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "secantlab/theta.hpp"

namespace secantlab {

// Projective image [theta_0(z) : ... : theta_N(z)], N = 2^g - 1, stored with
// the largest-magnitude coordinate normalized to 1.
struct KummerPoint {
  Eigen::VectorXcd coords;
  Eigen::VectorXcd source_z;
};

// Points of an (m+2)-secant configuration in both representations:
// a_1,...,a_{m+2} and the centered (u; b_1,...,b_m) with
// u = a_1 - (a_1+a_2)/2, b_j = a_{j+2} - (a_1+a_2)/2.
struct SecantConfig {
  int m = 0;
  std::vector<Eigen::VectorXcd> points_a;
  Eigen::VectorXcd centered_u;
  std::vector<Eigen::VectorXcd> centered_b;
};

// Builds both representations from the m+2 raw points.  Throws
// DuplicatePoints when two points coincide (mod lattice when an engine is
// supplied) or when 2u degenerates to zero.
SecantConfig center_config(const std::vector<Eigen::VectorXcd>& points_a,
                           const ThetaEngine* engine = nullptr);
// Builds the configuration directly from the centered data (a_1 = u,
// a_2 = -u, a_{j+2} = b_j).
SecantConfig config_from_centered(const Eigen::VectorXcd& u,
                                  const std::vector<Eigen::VectorXcd>& b,
                                  const ThetaEngine* engine = nullptr);

struct SecantReport {
  int matrix_rows = 0;
  std::vector<double> singular_values;  // descending
  int rank_estimate = 0;
  bool is_secant = false;
  double gap_ratio = 0;  // sigma_{r+1}/sigma_r at the decision index r = m+1
};

// Second-order theta basis and Kummer morphism for one period matrix.
// Holds engines for Omega and 2*Omega; the basis is
//   theta_j(z) = theta[e_j/2, 0](2z, 2*Omega),  e_j over {0,1}^g lexicographic.
class KummerContext {
 public:
  explicit KummerContext(SiegelMatrix sm);

  int genus() const { return engine_->genus(); }
  const ThetaEngine& engine() const { return *engine_; }
  const ThetaEngine& doubled_engine() const { return *engine2_; }
  std::shared_ptr<const ThetaEngine> engine_ptr() const { return engine_; }

  // All 2^g basis values at z, in the fixed lexicographic order.
  Eigen::VectorXcd second_order_basis(const Eigen::VectorXcd& z,
                                      const TruncationPolicy& policy) const;
  // Componentwise directional derivative D_v theta_j at z.
  Eigen::VectorXcd second_order_basis_deriv(const Eigen::VectorXcd& z,
                                            const Eigen::VectorXcd& v,
                                            const TruncationPolicy& policy) const;

  // |theta(z+w)theta(z-w) - sum_j theta_j(z)theta_j(w)| / (1 + |lhs|).
  double addition_formula_residual(const Eigen::VectorXcd& z,
                                   const Eigen::VectorXcd& w,
                                   const TruncationPolicy& policy) const;

  KummerPoint kummer_map(const Eigen::VectorXcd& z,
                         const TruncationPolicy& policy) const;

  // Rank test on the (m+2) x 2^g matrix with rows K(zeta + a_i).
  SecantReport honest_secant_test(const SecantConfig& config,
                                  const Eigen::VectorXcd& zeta,
                                  double tol_rank,
                                  const TruncationPolicy& policy) const;

  // Rank test on rows K(u), D_{d1}K(u), K(b_1),...,K(b_m).
  SecantReport degenerate_secant_test(const Eigen::VectorXcd& u,
                                      const Eigen::VectorXcd& d1,
                                      const std::vector<Eigen::VectorXcd>& b,
                                      double tol_rank,
                                      const TruncationPolicy& policy) const;

 private:
  std::shared_ptr<const ThetaEngine> engine_;
  std::shared_ptr<const ThetaEngine> engine2_;
  std::vector<ThetaCharacteristic> basis_chars_;

  SecantReport rank_report(Eigen::MatrixXcd rows, int m, double tol_rank) const;
};

}  // namespace secantlab

#endif
