#ifndef SECANTLAB_THETA_HPP
#define SECANTLAB_THETA_HPP

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "secantlab/common.hpp"

namespace secantlab {

// Genus and period matrix of the abelian variety C^g / (Z^g + Omega Z^g).
// Omega is symmetric with positive definite imaginary part.
struct SiegelMatrix {
  int g = 0;
  Eigen::MatrixXcd omega;
};

// Accepts a square matrix, symmetrizes asymmetry below 1e-14 relative and
// rejects anything worse.  Im(omega) must be positive definite.
SiegelMatrix validate_siegel(const Eigen::MatrixXcd& omega);

// Real characteristic shifts [a, b] of the theta series
//   theta[a,b](z) = sum_n exp(i pi (n+a)^T Omega (n+a) + 2 pi i (n+a)^T (z+b)).
struct ThetaCharacteristic {
  Eigen::VectorXd a;
  Eigen::VectorXd b;

  static ThetaCharacteristic zero(int g) {
    return {Eigen::VectorXd::Zero(g), Eigen::VectorXd::Zero(g)};
  }
};

struct TruncationPolicy {
  double tol = 1e-12;      // absolute tail bound target
  double max_radius = 24;  // safety cap on the lattice ellipsoid radius

  void validate() const;
};

// Table of directional derivatives
//   (D_{v_1}^{n_1} ... D_{v_k}^{n_k} theta)(z)
// keyed by the multi-order (n_1,...,n_k).  The all-zero key is the plain
// theta value.
struct DirectionalJet {
  Eigen::VectorXcd point;
  std::vector<Eigen::VectorXcd> directions;
  std::map<std::vector<int>, cplx> values;

  // Looks up a multi-order, padding trailing zeros up to the direction count.
  // Throws JetTooShallow if the entry is absent or the order refers to a
  // direction the jet does not carry.
  cplx value(const std::vector<int>& order) const;
};

// Evaluator for one period matrix.  Precomputes the Cholesky frame of
// Im(Omega) used for ellipsoid truncation and caches lattice enumerations
// keyed by rounded radius (safe for concurrent use).
class ThetaEngine {
 public:
  explicit ThetaEngine(SiegelMatrix sm);

  const SiegelMatrix& siegel() const { return sm_; }
  int genus() const { return sm_.g; }
  const Eigen::MatrixXd& im_omega() const { return Y_; }

  // Smallest radius R <= policy.max_radius whose certified tail bound is
  // below policy.tol, for derivative order deriv_order and evaluation points
  // with || Im z || <= z_bound.  Throws RadiusCapExceeded.
  double truncation_radius(const TruncationPolicy& policy, int deriv_order,
                           double z_bound) const;

  // Conservative bound on the sum of |terms| outside radius R.
  double tail_bound(double radius, int deriv_order, double z_bound) const;

  cplx theta(const ThetaCharacteristic& chr, const Eigen::VectorXcd& z,
             const TruncationPolicy& policy) const;
  cplx theta(const Eigen::VectorXcd& z, const TruncationPolicy& policy) const;

  // Dense jet: all multi-orders of total order <= max_order.
  DirectionalJet jet(const ThetaCharacteristic& chr, const Eigen::VectorXcd& z,
                     const std::vector<Eigen::VectorXcd>& directions,
                     int max_order, const TruncationPolicy& policy) const;

  // Sparse jet: exactly the requested multi-orders (lengths must equal the
  // direction count).
  DirectionalJet jet_select(const ThetaCharacteristic& chr,
                            const Eigen::VectorXcd& z,
                            const std::vector<Eigen::VectorXcd>& directions,
                            const std::vector<std::vector<int>>& orders,
                            const TruncationPolicy& policy) const;

  // Gradient (dtheta/dz_1, ..., dtheta/dz_g) at z.
  Eigen::VectorXcd gradient(const ThetaCharacteristic& chr,
                            const Eigen::VectorXcd& z,
                            const TruncationPolicy& policy) const;

  // Reduces x modulo Z^g + Omega Z^g; lattice_coords returns the (p, q)
  // frame coordinates of x = p + Omega q.
  Eigen::VectorXcd reduce_mod_lattice(const Eigen::VectorXcd& x) const;
  std::pair<Eigen::VectorXd, Eigen::VectorXd> lattice_coords(
      const Eigen::VectorXcd& x) const;
  // Max absolute lattice-frame coordinate of the reduced difference x - y.
  double lattice_distance(const Eigen::VectorXcd& x,
                          const Eigen::VectorXcd& y) const;

 private:
  SiegelMatrix sm_;
  Eigen::MatrixXd Y_;     // Im Omega
  Eigen::MatrixXd Yinv_;
  Eigen::MatrixXd T_;     // Y = T^T T (transposed Cholesky factor)
  double lambda_min_ = 0;  // smallest eigenvalue of Y
  double smin_ = 0;        // sqrt(lambda_min)
  double det_t_ = 0;       // sqrt(det Y)
  double rho_box_ = 0;     // max ||T f|| over f in [-1/2,1/2]^g
  double delta_shell_ = 0; // half cell diameter, shell-count slack

  mutable std::mutex cache_mutex_;
  mutable std::map<long, std::shared_ptr<const std::vector<Eigen::VectorXi>>>
      lattice_cache_;

  std::shared_ptr<const std::vector<Eigen::VectorXi>> lattice_points(
      double radius) const;

  DirectionalJet jet_impl(const ThetaCharacteristic& chr,
                          const Eigen::VectorXcd& z,
                          const std::vector<Eigen::VectorXcd>& directions,
                          const std::vector<std::vector<int>>& orders,
                          const TruncationPolicy& policy) const;
};

}  // namespace secantlab

#endif
