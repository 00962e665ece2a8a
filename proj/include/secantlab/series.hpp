#ifndef SECANTLAB_SERIES_HPP
#define SECANTLAB_SERIES_HPP

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "secantlab/common.hpp"
#include "secantlab/theta.hpp"

namespace secantlab {

// Truncated scalar power series in epsilon; coeffs[s] is the coefficient of
// epsilon^s and arithmetic never reads past the declared order.
class PowerSeries {
 public:
  explicit PowerSeries(int order) : coeffs_(order + 1, cplx(0, 0)) {
    if (order < 0 || order > kOrderCeiling)
      throw Error(ErrorCode::OrderCeilingExceeded, "series order out of range");
  }
  static PowerSeries constant(cplx value, int order) {
    PowerSeries s(order);
    s.coeffs_[0] = value;
    return s;
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  cplx coeff(int s) const { return coeffs_.at(s); }
  cplx& operator[](int s) { return coeffs_.at(s); }

 private:
  std::vector<cplx> coeffs_;
};

PowerSeries series_add(const PowerSeries& a, const PowerSeries& b);
// Cauchy product, truncated to the smaller declared order.
PowerSeries series_mul(const PowerSeries& a, const PowerSeries& b);
PowerSeries series_truncate(const PowerSeries& a, int order);
// Reparametrization epsilon -> c * epsilon (coeff s scales by c^s).
PowerSeries series_scale_epsilon(const PowerSeries& a, cplx c);

// Direction vectors W^(1),...,W^(S) defining the curve germ
// C(eps) = sum_j W^(j) eps^j and the operators D_j = W^(j) . grad.
struct VectorFieldSeq {
  int g = 0;
  std::vector<Eigen::VectorXcd> w;  // w[j-1] = W^(j)

  int order() const { return static_cast<int>(w.size()); }
  // W^(j), zero when j exceeds the stored orders.
  Eigen::VectorXcd at(int j) const;
};

// One term of Delta_s: multiplicities (i_1,...,i_s) with sum k*i_k = s and
// exact weight 1/(i_1! ... i_s!).
struct WeightedPartition {
  int s = 0;
  std::vector<int> multiplicities;
  long long weight_num = 1;
  long long weight_den = 1;

  double weight() const {
    return static_cast<double>(weight_num) / static_cast<double>(weight_den);
  }
  int total() const;  // i_1 + ... + i_s
};

// Complete enumeration for 1 <= s <= kOrderCeiling; count equals the number
// of integer partitions of s.
std::vector<WeightedPartition> partitions_weighted(int s);

// Applies Delta_s (sign=+1) or Delta_s^- (sign=-1) to the function whose
// directional derivatives the jet tabulates.  The jet directions must be the
// first s entries of seq.
cplx delta_apply(int s, const VectorFieldSeq& seq, const DirectionalJet& jet,
                 int sign);

// Multivariate polynomial with explicit coefficient table; the test oracle
// for the Delta operators works on these.
class MultiPoly {
 public:
  explicit MultiPoly(int g) : g_(g) {}

  int vars() const { return g_; }
  void set(const std::vector<int>& exponents, cplx coeff);
  cplx eval(const Eigen::VectorXcd& point) const;
  // Partial derivative d/dz_i.
  MultiPoly partial(int i) const;
  // Directional derivative along v.
  MultiPoly directional(const Eigen::VectorXcd& v) const;
  const std::map<std::vector<int>, cplx>& terms() const { return terms_; }

 private:
  int g_;
  std::map<std::vector<int>, cplx> terms_;
};

// Expands f(c0 + C(eps)) by direct polynomial/series substitution.  This is
// the independent oracle for delta_apply; it shares no code with the jet or
// partition machinery.
PowerSeries exp_series_oracle(const VectorFieldSeq& seq, const MultiPoly& f,
                              const Eigen::VectorXcd& c0, int order);

// Delta_s f as an exact polynomial (partition-weighted derivatives of f);
// used for operator-composition identities on polynomials.
MultiPoly delta_poly(int s, const VectorFieldSeq& seq, const MultiPoly& f,
                     int sign);

}  // namespace secantlab

#endif
