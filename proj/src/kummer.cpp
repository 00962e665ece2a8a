#include "secantlab/kummer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace secantlab {

namespace {

void check_pairwise_distinct(const std::vector<Eigen::VectorXcd>& pts,
                             const ThetaEngine* engine) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double d = engine ? engine->lattice_distance(pts[i], pts[j])
                        : (pts[i] - pts[j]).cwiseAbs().maxCoeff();
      if (d < 1e-8) {
        std::ostringstream os;
        os << "points " << i + 1 << " and " << j + 1 << " coincide";
        throw Error(ErrorCode::DuplicatePoints, os.str());
      }
    }
  }
}

}  // namespace

SecantConfig center_config(const std::vector<Eigen::VectorXcd>& points_a,
                           const ThetaEngine* engine) {
  if (points_a.size() < 3)
    throw Error(ErrorCode::ValidationError, "need at least 3 points");
  check_pairwise_distinct(points_a, engine);
  SecantConfig cfg;
  cfg.m = static_cast<int>(points_a.size()) - 2;
  cfg.points_a = points_a;
  Eigen::VectorXcd mid = 0.5 * (points_a[0] + points_a[1]);
  cfg.centered_u = points_a[0] - mid;
  for (std::size_t j = 2; j < points_a.size(); ++j)
    cfg.centered_b.push_back(points_a[j] - mid);
  // 2u = a_1 - a_2 = 0 is already rejected by the distinctness check; guard
  // against 2u hitting a nonzero lattice vector as well.
  if (engine) {
    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(cfg.centered_u.size());
    if (engine->lattice_distance(2.0 * cfg.centered_u, zero) < 1e-8)
      throw Error(ErrorCode::DuplicatePoints, "2u vanishes modulo the lattice");
  }
  return cfg;
}

SecantConfig config_from_centered(const Eigen::VectorXcd& u,
                                  const std::vector<Eigen::VectorXcd>& b,
                                  const ThetaEngine* engine) {
  std::vector<Eigen::VectorXcd> pts;
  pts.push_back(u);
  pts.push_back(-u);
  for (const auto& bj : b) pts.push_back(bj);
  return center_config(pts, engine);
}

KummerContext::KummerContext(SiegelMatrix sm) {
  engine_ = std::make_shared<ThetaEngine>(sm);
  SiegelMatrix doubled = validate_siegel(2.0 * sm.omega);
  engine2_ = std::make_shared<ThetaEngine>(doubled);
  const int g = sm.g;
  const int n = 1 << g;
  for (int j = 0; j < n; ++j) {
    ThetaCharacteristic chr = ThetaCharacteristic::zero(g);
    // Lexicographic on (e_1,...,e_g): the first coordinate is the most
    // significant bit.
    for (int i = 0; i < g; ++i)
      chr.a[i] = ((j >> (g - 1 - i)) & 1) ? 0.5 : 0.0;
    basis_chars_.push_back(chr);
  }
}

Eigen::VectorXcd KummerContext::second_order_basis(
    const Eigen::VectorXcd& z, const TruncationPolicy& policy) const {
  const int n = static_cast<int>(basis_chars_.size());
  Eigen::VectorXcd out(n);
  for (int j = 0; j < n; ++j)
    out[j] = engine2_->theta(basis_chars_[j], 2.0 * z, policy);
  return out;
}

Eigen::VectorXcd KummerContext::second_order_basis_deriv(
    const Eigen::VectorXcd& z, const Eigen::VectorXcd& v,
    const TruncationPolicy& policy) const {
  const int n = static_cast<int>(basis_chars_.size());
  Eigen::VectorXcd out(n);
  std::vector<Eigen::VectorXcd> dirs{v};
  std::vector<std::vector<int>> orders{{1}};
  for (int j = 0; j < n; ++j) {
    DirectionalJet jet =
        engine2_->jet_select(basis_chars_[j], 2.0 * z, dirs, orders, policy);
    // theta_j(z) = theta[a,0](2z, 2*Omega): chain rule factor 2.
    out[j] = 2.0 * jet.values.at({1});
  }
  return out;
}

double KummerContext::addition_formula_residual(
    const Eigen::VectorXcd& z, const Eigen::VectorXcd& w,
    const TruncationPolicy& policy) const {
  cplx lhs = engine_->theta(z + w, policy) * engine_->theta(z - w, policy);
  Eigen::VectorXcd bz = second_order_basis(z, policy);
  Eigen::VectorXcd bw = second_order_basis(w, policy);
  cplx rhs(0, 0);
  for (int j = 0; j < bz.size(); ++j) rhs += bz[j] * bw[j];
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

KummerPoint KummerContext::kummer_map(const Eigen::VectorXcd& z,
                                      const TruncationPolicy& policy) const {
  Eigen::VectorXcd coords = second_order_basis(z, policy);
  int imax = 0;
  double vmax = 0;
  for (int j = 0; j < coords.size(); ++j) {
    double a = std::abs(coords[j]);
    if (a > vmax) {
      vmax = a;
      imax = j;
    }
  }
  if (!(vmax > 0))
    throw Error(ErrorCode::AllCoordinatesVanish,
                "all second-order theta values vanish at the point");
  coords /= coords[imax];
  return KummerPoint{coords, z};
}

SecantReport KummerContext::rank_report(Eigen::MatrixXcd rows, int m,
                                        double tol_rank) const {
  if (!(tol_rank > 0 && tol_rank < 1))
    throw Error(ErrorCode::ValidationError, "tol_rank must be in (0,1)");
  // Rank is decided on the row-normalized matrix so projective rescaling of
  // the rows cannot change the verdict.
  for (int i = 0; i < rows.rows(); ++i) {
    double n = rows.row(i).norm();
    if (n > 0) rows.row(i) /= n;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(rows);
  Eigen::VectorXd sv = svd.singularValues();
  SecantReport rep;
  rep.matrix_rows = static_cast<int>(rows.rows());
  for (int i = 0; i < sv.size(); ++i) rep.singular_values.push_back(sv[i]);
  double smax = sv.size() > 0 ? sv[0] : 0.0;
  rep.rank_estimate = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] >= tol_rank * smax) ++rep.rank_estimate;
  rep.is_secant = rep.rank_estimate <= m + 1;
  // Decision index r = m+1 (1-based): ratio of the first discarded to the
  // last kept singular value if both exist.
  if (m + 1 < static_cast<int>(sv.size()) && sv[m] > 0)
    rep.gap_ratio = sv[m + 1] / sv[m];
  else
    rep.gap_ratio = 0.0;
  return rep;
}

SecantReport KummerContext::honest_secant_test(
    const SecantConfig& config, const Eigen::VectorXcd& zeta, double tol_rank,
    const TruncationPolicy& policy) const {
  const int rows_n = config.m + 2;
  // Shifting every point by zeta preserves coincidences, so check the a_i.
  for (int i = 0; i < rows_n; ++i)
    for (int j = i + 1; j < rows_n; ++j)
      if (engine_->lattice_distance(config.points_a[i], config.points_a[j]) <
          1e-8)
        throw Error(ErrorCode::DegenerateInput,
                    "two configuration points coincide mod lattice");
  Eigen::MatrixXcd mat(rows_n, 1 << genus());
  for (int i = 0; i < rows_n; ++i)
    mat.row(i) =
        second_order_basis(zeta + config.points_a[i], policy).transpose();
  return rank_report(std::move(mat), config.m, tol_rank);
}

SecantReport KummerContext::degenerate_secant_test(
    const Eigen::VectorXcd& u, const Eigen::VectorXcd& d1,
    const std::vector<Eigen::VectorXcd>& b, double tol_rank,
    const TruncationPolicy& policy) const {
  if (d1.norm() == 0.0)
    throw Error(ErrorCode::ZeroDirection, "tangency direction is zero");
  const int m = static_cast<int>(b.size());
  Eigen::MatrixXcd mat(m + 2, 1 << genus());
  mat.row(0) = second_order_basis(u, policy).transpose();
  mat.row(1) = second_order_basis_deriv(u, d1, policy).transpose();
  for (int j = 0; j < m; ++j)
    mat.row(2 + j) = second_order_basis(b[j], policy).transpose();
  return rank_report(std::move(mat), m, tol_rank);
}

}  // namespace secantlab
