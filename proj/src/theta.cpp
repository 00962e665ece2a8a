#include "secantlab/theta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace secantlab {

namespace {

std::string order_to_string(const std::vector<int>& order) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < order.size(); ++i)
    os << order[i] << (i + 1 < order.size() ? "," : "");
  os << ")";
  return os.str();
}

}  // namespace

void TruncationPolicy::validate() const {
  if (!(tol > 0))
    throw Error(ErrorCode::ValidationError, "truncation tol must be positive");
  if (!(max_radius >= 1))
    throw Error(ErrorCode::ValidationError, "max_radius must be >= 1");
}

SiegelMatrix validate_siegel(const Eigen::MatrixXcd& omega) {
  if (omega.rows() != omega.cols() || omega.rows() == 0)
    throw Error(ErrorCode::ValidationError, "period matrix must be square");
  const int g = static_cast<int>(omega.rows());
  double scale = std::max(1.0, omega.cwiseAbs().maxCoeff());
  double asym = (omega - omega.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-14 * scale) {
    std::ostringstream os;
    os << "period matrix asymmetry " << asym << " exceeds 1e-14 relative";
    throw Error(ErrorCode::NotSymmetric, os.str());
  }
  SiegelMatrix sm;
  sm.g = g;
  sm.omega = 0.5 * (omega + omega.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sm.omega.imag());
  double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0)) {
    std::ostringstream os;
    os << "Im(omega) has smallest eigenvalue " << lmin;
    throw Error(ErrorCode::ImaginaryPartNotPositiveDefinite, os.str());
  }
  return sm;
}

cplx DirectionalJet::value(const std::vector<int>& order) const {
  std::vector<int> key(directions.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] < 0)
      throw Error(ErrorCode::JetTooShallow, "negative derivative order");
    if (i >= directions.size()) {
      if (order[i] != 0)
        throw Error(ErrorCode::JetTooShallow,
                    "multi-order " + order_to_string(order) +
                        " refers to a missing direction");
      continue;
    }
    key[i] = order[i];
  }
  auto it = values.find(key);
  if (it == values.end())
    throw Error(ErrorCode::JetTooShallow,
                "jet has no entry at multi-order " + order_to_string(order));
  return it->second;
}

ThetaEngine::ThetaEngine(SiegelMatrix sm) : sm_(std::move(sm)) {
  Y_ = sm_.omega.imag();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Y_);
  lambda_min_ = es.eigenvalues().minCoeff();
  if (!(lambda_min_ > 0))
    throw Error(ErrorCode::ImaginaryPartNotPositiveDefinite,
                "engine requires positive definite Im(omega)");
  smin_ = std::sqrt(lambda_min_);
  Yinv_ = Y_.inverse();
  Eigen::LLT<Eigen::MatrixXd> llt(Y_);
  T_ = llt.matrixL().transpose();  // Y = T^T T, ||T x||^2 = x^T Y x
  det_t_ = T_.diagonal().prod();
  double colsum = 0, colsq = 0;
  for (int i = 0; i < sm_.g; ++i) {
    double cn = T_.col(i).norm();
    colsum += cn;
    colsq += cn * cn;
  }
  rho_box_ = 0.5 * std::sqrt(colsq) * std::sqrt(static_cast<double>(sm_.g));
  delta_shell_ = 0.5 * colsum;
}

double ThetaEngine::tail_bound(double radius, int deriv_order,
                               double z_bound) const {
  const int g = sm_.g;
  const double vg = std::pow(kPi, 0.5 * g) / std::tgamma(0.5 * g + 1.0);
  // Work with log terms so a large z_bound saturates to +inf instead of
  // overflowing into nan.
  const double log_pref = kPi * z_bound * z_bound / lambda_min_;
  const double shift = z_bound / lambda_min_;  // bound on ||Yinv Im z||
  double total = 0;
  int k0 = static_cast<int>(std::floor(radius));
  for (int k = k0; k < k0 + 400; ++k) {
    double lo = std::max(0.0, k - delta_shell_);
    double hi = k + 1 + delta_shell_;
    double count = vg * (std::pow(hi, g) - std::pow(lo, g)) / det_t_;
    double fac = 1.0;
    if (deriv_order > 0)
      fac += std::pow(2.0 * kPi * ((k + 1) / smin_ + shift + 1.0),
                      deriv_order);
    double r0 = std::max(static_cast<double>(k), radius);
    double term = count * fac * std::exp(log_pref - kPi * r0 * r0);
    if (std::isinf(term) || std::isnan(term))
      return std::numeric_limits<double>::infinity();
    total += term;
    if (term < 1e-320 || (k > radius + 4 && term < 1e-40 * total)) break;
  }
  return total;
}

double ThetaEngine::truncation_radius(const TruncationPolicy& policy,
                                      int deriv_order, double z_bound) const {
  policy.validate();
  if (deriv_order > kOrderCeiling)
    throw Error(ErrorCode::OrderCeilingExceeded,
                "derivative order above ceiling");
  for (double r = 1.0; r <= policy.max_radius + 1e-9; r += 0.25) {
    if (tail_bound(r, deriv_order, z_bound) <= policy.tol) return r;
  }
  std::ostringstream os;
  os << "tail bound at max_radius " << policy.max_radius << " is "
     << tail_bound(policy.max_radius, deriv_order, z_bound)
     << ", above tol " << policy.tol;
  throw Error(ErrorCode::RadiusCapExceeded, os.str());
}

std::shared_ptr<const std::vector<Eigen::VectorXi>> ThetaEngine::lattice_points(
    double radius) const {
  // Quarter-step key so nearby radii share one enumeration.
  long key = static_cast<long>(std::ceil(radius * 4.0));
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = lattice_cache_.find(key);
    if (it != lattice_cache_.end()) return it->second;
  }
  const int g = sm_.g;
  const double r = static_cast<double>(key) / 4.0;
  const int bound = static_cast<int>(std::ceil(r / smin_)) + 1;
  auto pts = std::make_shared<std::vector<Eigen::VectorXi>>();
  Eigen::VectorXi n = Eigen::VectorXi::Constant(g, -bound);
  Eigen::VectorXd nd(g);
  for (;;) {
    for (int i = 0; i < g; ++i) nd[i] = n[i];
    if ((T_ * nd).norm() <= r) pts->push_back(n);
    int i = 0;
    for (; i < g; ++i) {
      if (n[i] < bound) {
        ++n[i];
        break;
      }
      n[i] = -bound;
    }
    if (i == g) break;
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = lattice_cache_.emplace(key, pts);
  return it->second;
}

DirectionalJet ThetaEngine::jet_impl(
    const ThetaCharacteristic& chr, const Eigen::VectorXcd& z,
    const std::vector<Eigen::VectorXcd>& directions,
    const std::vector<std::vector<int>>& orders,
    const TruncationPolicy& policy) const {
  const int g = sm_.g;
  if (chr.a.size() != g || chr.b.size() != g || z.size() != g)
    throw Error(ErrorCode::ShapeMismatch, "characteristic or point size != g");
  const int k = static_cast<int>(directions.size());
  int max_total = 0;
  for (const auto& ord : orders) {
    if (static_cast<int>(ord.size()) != k)
      throw Error(ErrorCode::ShapeMismatch,
                  "multi-order length does not match direction count");
    int tot = 0;
    for (int v : ord) {
      if (v < 0) throw Error(ErrorCode::ShapeMismatch, "negative order");
      tot += v;
    }
    max_total = std::max(max_total, tot);
  }
  if (max_total > kOrderCeiling)
    throw Error(ErrorCode::OrderCeilingExceeded,
                "requested jet order exceeds ceiling " +
                    std::to_string(kOrderCeiling));

  // Directions are normalized so the truncation bound only needs the unit
  // case; entries are rescaled by the norm powers afterwards.
  std::vector<Eigen::VectorXcd> unit(directions.begin(), directions.end());
  std::vector<double> norms(k, 0.0);
  for (int j = 0; j < k; ++j) {
    if (unit[j].size() != g)
      throw Error(ErrorCode::ShapeMismatch, "direction size != g");
    norms[j] = unit[j].norm();
    if (norms[j] > 0)
      unit[j] /= norms[j];
    else
      unit[j].setZero();
  }

  const Eigen::VectorXd y = z.imag();
  const double z_bound = y.norm();
  const double radius = truncation_radius(policy, max_total, z_bound);

  // Fold characteristic and Im-part shift into a fractional center:
  // the included lattice points are { l : ||T(l + a + Yinv y)|| <= radius }.
  const Eigen::VectorXd center = chr.a + Yinv_ * y;
  Eigen::VectorXd kshift(g), frac(g);
  for (int i = 0; i < g; ++i) {
    kshift[i] = std::round(center[i]);
    frac[i] = center[i] - kshift[i];
  }
  auto cached = lattice_points(radius + rho_box_);

  const cplx ipi(0.0, kPi);
  const cplx twopii(0.0, 2.0 * kPi);
  const Eigen::VectorXcd zb = z + chr.b.cast<cplx>();

  std::vector<cplx> acc(orders.size(), cplx(0, 0));
  Eigen::VectorXd m_real(g);
  std::vector<cplx> dots(k);
  for (const auto& n : *cached) {
    Eigen::VectorXd nf = n.cast<double>() + frac;
    if ((T_ * nf).norm() > radius) continue;
    for (int i = 0; i < g; ++i) m_real[i] = n[i] - kshift[i] + chr.a[i];
    const Eigen::VectorXcd m = m_real.cast<cplx>();
    cplx quad = (m.transpose() * sm_.omega * m)(0, 0);
    cplx lin = (m_real.transpose() * zb)(0, 0);
    cplx base = std::exp(ipi * quad + twopii * lin);
    for (int j = 0; j < k; ++j)
      dots[j] = twopii * (m_real.transpose() * unit[j])(0, 0);
    for (std::size_t oi = 0; oi < orders.size(); ++oi) {
      cplx term = base;
      const auto& ord = orders[oi];
      for (int j = 0; j < k; ++j)
        for (int p = 0; p < ord[j]; ++p) term *= dots[j];
      acc[oi] += term;
    }
  }

  DirectionalJet out;
  out.point = z;
  out.directions = directions;
  for (std::size_t oi = 0; oi < orders.size(); ++oi) {
    double scale = 1.0;
    for (int j = 0; j < k; ++j)
      for (int p = 0; p < orders[oi][j]; ++p) scale *= norms[j];
    out.values[orders[oi]] = acc[oi] * scale;
  }
  return out;
}

cplx ThetaEngine::theta(const ThetaCharacteristic& chr,
                        const Eigen::VectorXcd& z,
                        const TruncationPolicy& policy) const {
  std::vector<std::vector<int>> orders{{}};
  DirectionalJet j = jet_impl(chr, z, {}, orders, policy);
  return j.values.begin()->second;
}

cplx ThetaEngine::theta(const Eigen::VectorXcd& z,
                        const TruncationPolicy& policy) const {
  return theta(ThetaCharacteristic::zero(sm_.g), z, policy);
}

DirectionalJet ThetaEngine::jet(const ThetaCharacteristic& chr,
                                const Eigen::VectorXcd& z,
                                const std::vector<Eigen::VectorXcd>& directions,
                                int max_order,
                                const TruncationPolicy& policy) const {
  if (max_order < 0)
    throw Error(ErrorCode::ValidationError, "max_order must be >= 0");
  if (max_order > kOrderCeiling)
    throw Error(ErrorCode::OrderCeilingExceeded,
                "max_order exceeds ceiling " + std::to_string(kOrderCeiling));
  if (directions.empty() && max_order > 0)
    throw Error(ErrorCode::ValidationError,
                "nonzero max_order requires directions");
  const int k = static_cast<int>(directions.size());
  // All multi-orders with total order <= max_order.
  std::vector<std::vector<int>> orders;
  std::vector<int> cur(k, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == k) {
      orders.push_back(cur);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      cur[pos] = v;
      rec(pos + 1, remaining - v);
    }
    cur[pos] = 0;
  };
  if (k == 0)
    orders.push_back({});
  else
    rec(0, max_order);
  return jet_impl(chr, z, directions, orders, policy);
}

DirectionalJet ThetaEngine::jet_select(
    const ThetaCharacteristic& chr, const Eigen::VectorXcd& z,
    const std::vector<Eigen::VectorXcd>& directions,
    const std::vector<std::vector<int>>& orders,
    const TruncationPolicy& policy) const {
  return jet_impl(chr, z, directions, orders, policy);
}

Eigen::VectorXcd ThetaEngine::gradient(const ThetaCharacteristic& chr,
                                       const Eigen::VectorXcd& z,
                                       const TruncationPolicy& policy) const {
  const int g = sm_.g;
  std::vector<Eigen::VectorXcd> dirs;
  std::vector<std::vector<int>> orders;
  for (int i = 0; i < g; ++i) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(g);
    e[i] = 1.0;
    dirs.push_back(e);
    std::vector<int> ord(g, 0);
    ord[i] = 1;
    orders.push_back(ord);
  }
  DirectionalJet j = jet_impl(chr, z, dirs, orders, policy);
  Eigen::VectorXcd grad(g);
  for (int i = 0; i < g; ++i) {
    std::vector<int> ord(g, 0);
    ord[i] = 1;
    grad[i] = j.values.at(ord);
  }
  return grad;
}

Eigen::VectorXcd ThetaEngine::reduce_mod_lattice(
    const Eigen::VectorXcd& x) const {
  auto [p, q] = lattice_coords(x);
  Eigen::VectorXd pr(sm_.g), qr(sm_.g);
  for (int i = 0; i < sm_.g; ++i) {
    pr[i] = p[i] - std::round(p[i]);
    qr[i] = q[i] - std::round(q[i]);
  }
  return pr.cast<cplx>() + sm_.omega * qr.cast<cplx>();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> ThetaEngine::lattice_coords(
    const Eigen::VectorXcd& x) const {
  Eigen::VectorXd q = Yinv_ * x.imag();
  Eigen::VectorXd p = x.real() - sm_.omega.real() * q;
  return {p, q};
}

double ThetaEngine::lattice_distance(const Eigen::VectorXcd& x,
                                     const Eigen::VectorXcd& y) const {
  auto [p, q] = lattice_coords(x - y);
  double d = 0;
  for (int i = 0; i < sm_.g; ++i) {
    d = std::max(d, std::abs(p[i] - std::round(p[i])));
    d = std::max(d, std::abs(q[i] - std::round(q[i])));
  }
  return d;
}

}  // namespace secantlab
