#include "secantlab/series.hpp"

#include <algorithm>

namespace secantlab {

PowerSeries series_add(const PowerSeries& a, const PowerSeries& b) {
  int order = std::min(a.order(), b.order());
  PowerSeries out(order);
  for (int s = 0; s <= order; ++s) out[s] = a.coeff(s) + b.coeff(s);
  return out;
}

PowerSeries series_mul(const PowerSeries& a, const PowerSeries& b) {
  int order = std::min(a.order(), b.order());
  PowerSeries out(order);
  for (int s = 0; s <= order; ++s) {
    cplx acc(0, 0);
    for (int i = 0; i <= s; ++i) acc += a.coeff(i) * b.coeff(s - i);
    out[s] = acc;
  }
  return out;
}

PowerSeries series_truncate(const PowerSeries& a, int order) {
  PowerSeries out(order);
  for (int s = 0; s <= std::min(order, a.order()); ++s) out[s] = a.coeff(s);
  return out;
}

PowerSeries series_scale_epsilon(const PowerSeries& a, cplx c) {
  PowerSeries out(a.order());
  cplx pw(1, 0);
  for (int s = 0; s <= a.order(); ++s) {
    out[s] = a.coeff(s) * pw;
    pw *= c;
  }
  return out;
}

Eigen::VectorXcd VectorFieldSeq::at(int j) const {
  if (j < 1) throw Error(ErrorCode::ShapeMismatch, "W index starts at 1");
  if (j <= order()) return w[j - 1];
  return Eigen::VectorXcd::Zero(g);
}

int WeightedPartition::total() const {
  int t = 0;
  for (int v : multiplicities) t += v;
  return t;
}

std::vector<WeightedPartition> partitions_weighted(int s) {
  if (s < 1) throw Error(ErrorCode::ValidationError, "s must be >= 1");
  if (s > kOrderCeiling)
    throw Error(ErrorCode::OrderCeilingExceeded,
                "partition order exceeds ceiling");
  static const long long factorial[13] = {1,      1,       2,       6,
                                          24,     120,     720,     5040,
                                          40320,  362880,  3628800, 39916800,
                                          479001600};
  std::vector<WeightedPartition> out;
  std::vector<int> mult(s, 0);
  // Choose i_k for k = s down to 1 with the weighted-sum budget.
  std::function<void(int, int)> rec = [&](int k, int budget) {
    if (k == 0) {
      if (budget != 0) return;
      WeightedPartition p;
      p.s = s;
      p.multiplicities = mult;
      for (int v : mult) p.weight_den *= factorial[v];
      out.push_back(p);
      return;
    }
    for (int i = 0; i * k <= budget; ++i) {
      mult[k - 1] = i;
      rec(k - 1, budget - i * k);
    }
    mult[k - 1] = 0;
  };
  rec(s, s);
  return out;
}

cplx delta_apply(int s, const VectorFieldSeq& seq, const DirectionalJet& jet,
                 int sign) {
  if (sign != 1 && sign != -1)
    throw Error(ErrorCode::ValidationError, "sign must be +1 or -1");
  if (s == 0) return jet.value(std::vector<int>{});
  if (static_cast<int>(jet.directions.size()) < s)
    throw Error(ErrorCode::JetTooShallow,
                "jet carries fewer directions than the requested order");
  for (int j = 0; j < s; ++j) {
    if (seq.at(j + 1).size() != jet.directions[j].size() ||
        (seq.at(j + 1) - jet.directions[j]).norm() != 0.0)
      throw Error(ErrorCode::ShapeMismatch,
                  "jet directions do not match the vector field sequence");
  }
  cplx acc(0, 0);
  for (const auto& p : partitions_weighted(s)) {
    cplx term = jet.value(p.multiplicities);
    double w = p.weight();
    if (sign < 0 && (p.total() % 2 != 0)) w = -w;
    acc += w * term;
  }
  return acc;
}

void MultiPoly::set(const std::vector<int>& exponents, cplx coeff) {
  if (static_cast<int>(exponents.size()) != g_)
    throw Error(ErrorCode::ShapeMismatch, "exponent tuple length != vars");
  if (coeff == cplx(0, 0))
    terms_.erase(exponents);
  else
    terms_[exponents] = coeff;
}

cplx MultiPoly::eval(const Eigen::VectorXcd& point) const {
  if (point.size() != g_)
    throw Error(ErrorCode::ShapeMismatch, "point size != vars");
  cplx acc(0, 0);
  for (const auto& [exp, c] : terms_) {
    cplx term = c;
    for (int i = 0; i < g_; ++i)
      for (int p = 0; p < exp[i]; ++p) term *= point[i];
    acc += term;
  }
  return acc;
}

MultiPoly MultiPoly::partial(int i) const {
  MultiPoly out(g_);
  for (const auto& [exp, c] : terms_) {
    if (exp[i] == 0) continue;
    std::vector<int> e = exp;
    e[i] -= 1;
    auto it = out.terms_.find(e);
    cplx add = c * static_cast<double>(exp[i]);
    if (it == out.terms_.end())
      out.terms_[e] = add;
    else
      it->second += add;
  }
  return out;
}

MultiPoly MultiPoly::directional(const Eigen::VectorXcd& v) const {
  if (v.size() != g_)
    throw Error(ErrorCode::ShapeMismatch, "direction size != vars");
  MultiPoly out(g_);
  for (int i = 0; i < g_; ++i) {
    if (v[i] == cplx(0, 0)) continue;
    MultiPoly pi = partial(i);
    for (const auto& [exp, c] : pi.terms_) {
      auto it = out.terms_.find(exp);
      if (it == out.terms_.end())
        out.terms_[exp] = v[i] * c;
      else
        it->second += v[i] * c;
    }
  }
  return out;
}

PowerSeries exp_series_oracle(const VectorFieldSeq& seq, const MultiPoly& f,
                              const Eigen::VectorXcd& c0, int order) {
  if (order > kOrderCeiling)
    throw Error(ErrorCode::OrderCeilingExceeded, "oracle order exceeds ceiling");
  // Coordinate series z_i(eps) = c0_i + sum_j W^(j)_i eps^j.
  std::vector<PowerSeries> coord;
  for (int i = 0; i < seq.g; ++i) {
    PowerSeries s(order);
    s[0] = c0[i];
    for (int j = 1; j <= std::min(order, seq.order()); ++j) s[j] = seq.at(j)[i];
    coord.push_back(s);
  }
  PowerSeries total(order);
  for (const auto& [exp, c] : f.terms()) {
    PowerSeries term = PowerSeries::constant(c, order);
    for (int i = 0; i < seq.g; ++i)
      for (int p = 0; p < exp[i]; ++p) term = series_mul(term, coord[i]);
    total = series_add(total, term);
  }
  return total;
}

MultiPoly delta_poly(int s, const VectorFieldSeq& seq, const MultiPoly& f,
                     int sign) {
  if (s == 0) return f;
  MultiPoly acc(f.vars());
  for (const auto& p : partitions_weighted(s)) {
    MultiPoly term = f;
    for (int k = 1; k <= s; ++k)
      for (int rep = 0; rep < p.multiplicities[k - 1]; ++rep)
        term = term.directional(seq.at(k));
    double w = p.weight();
    if (sign < 0 && (p.total() % 2 != 0)) w = -w;
    for (const auto& [exp, c] : term.terms()) {
      auto existing = acc.terms().find(exp);
      cplx cur = existing == acc.terms().end() ? cplx(0, 0) : existing->second;
      acc.set(exp, cur + w * c);
    }
  }
  return acc;
}

}  // namespace secantlab
