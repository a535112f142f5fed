#pragma once

// Scalar-generic moment assembly and dense solves. Included by exactly one
// translation unit per scalar type.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include "linalg.hpp"
#include "mixedmop/errors.hpp"

namespace mixedmop::detail {

template <class Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <class Real>
double to_double(const Real& x) {
  return static_cast<double>(x);
}

/// Product moments of a table in the scalar type Real. Gaussian pairs are
/// recomputed from their parameters so wider types get genuinely wider moments.
template <class Real>
class MomentSource {
 public:
  explicit MomentSource(const ProductMomentTable& table)
      : table_(table), p_(table.first_size()), q_(table.second_size()) {
    if constexpr (!std::is_same_v<Real, double>) {
      values_.resize(static_cast<std::size_t>(p_) * q_);
      for (int j = 0; j < p_; ++j)
        for (int l = 0; l < q_; ++l) values_[j * q_ + l] = compute(j, l);
    }
  }

  Real operator()(int j, int l, int k) const {
    if constexpr (std::is_same_v<Real, double>) {
      return table_(j, l, k);
    } else {
      if (k > table_.max_order())
        throw ValidationError("moment order " + std::to_string(k) + " missing from table");
      return values_[j * q_ + l][k];
    }
  }

 private:
  std::vector<Real> compute(int j, int l) const {
    const int K = table_.max_order();
    std::vector<Real> out(K + 1);
    const Weight& a = table_.first()[j];
    const Weight& b = table_.second()[l];
    if (!(a.is_gaussian() && b.is_gaussian())) {
      for (int k = 0; k <= K; ++k) out[k] = Real(table_(j, l, k));
      return out;
    }
    using std::exp;
    using std::sqrt;
    using std::abs;
    const Gaussian& g1 = a.as_gaussian();
    const Gaussian& g2 = b.as_gaussian();
    const Real v1 = g1.variance, v2 = g2.variance, c1 = g1.center, c2 = g2.center;
    const Real var = Real(1) / (Real(1) / v1 + Real(1) / v2);
    const Real mean = (c1 / v1 + c2 / v2) * var;
    const Real d = c1 - c2;
    const Real amp = Real(g1.amplitude) * Real(g2.amplitude) * exp(-d * d / (Real(2) * (v1 + v2)));
    const ShiftedBasis& basis = table_.basis();
    const Real s = basis.scale;
    Real mu = (mean - Real(basis.center)) / s;
    const Real uvar = var / (s * s);
    const Real eps = std::numeric_limits<Real>::epsilon();
    Real offset = std::max({Real(1), Real(abs(mean) / s), Real(abs(Real(basis.center)) / s)});
    if (abs(mu) <= Real(16) * eps * offset) mu = 0;
    out[0] = amp * sqrt(Real(2) * boost::math::constants::pi<Real>() * var);
    if (K >= 1) out[1] = mu * out[0];
    for (int k = 2; k <= K; ++k) out[k] = mu * out[k - 1] + Real(k - 1) * uvar * out[k - 2];
    return out;
  }

  const ProductMomentTable& table_;
  int p_, q_;
  std::vector<std::vector<Real>> values_;
};

inline std::vector<int> offsets(const MultiIndex& n) {
  std::vector<int> out(n.length() + 1, 0);
  for (int i = 0; i < n.length(); ++i) out[i + 1] = out[i] + n[i];
  return out;
}

/// Rows (k, j) over m and the second family, columns (l, i) over n and the first.
template <class Real>
Mat<Real> moment_matrix(const MomentSource<Real>& src, const MultiIndex& n, const MultiIndex& m) {
  const auto co = offsets(n);
  const auto ro = offsets(m);
  Mat<Real> a(m.total(), n.total());
  for (int k = 0; k < m.length(); ++k)
    for (int j = 0; j < m[k]; ++j)
      for (int l = 0; l < n.length(); ++l)
        for (int i = 0; i < n[l]; ++i) a(ro[k] + j, co[l] + i) = src(l, k, i + j);
  return a;
}

template <class Real>
struct Equilibrated {
  Mat<Real> a;
  Vec<Real> row, col;  // a = diag(row) * A * diag(col)
};

/// Ruiz scaling: rows and columns are scaled simultaneously by the inverse square
/// roots of their 2-norms, so A and A^T are treated alike.
template <class Real>
Equilibrated<Real> equilibrate(const Mat<Real>& a) {
  using std::sqrt;
  Equilibrated<Real> e{a, Vec<Real>::Ones(a.rows()), Vec<Real>::Ones(a.cols())};
  for (int sweep = 0; sweep < 8; ++sweep) {
    Vec<Real> r(e.a.rows()), c(e.a.cols());
    for (int i = 0; i < e.a.rows(); ++i) {
      const Real v = e.a.row(i).norm();
      r(i) = v > 0 ? Real(1) / sqrt(v) : Real(1);
    }
    for (int j = 0; j < e.a.cols(); ++j) {
      const Real v = e.a.col(j).norm();
      c(j) = v > 0 ? Real(1) / sqrt(v) : Real(1);
    }
    e.a = r.asDiagonal() * e.a * c.asDiagonal();
    e.row = e.row.cwiseProduct(r);
    e.col = e.col.cwiseProduct(c);
  }
  return e;
}

template <class Real>
RankInfo rank_of(const Mat<Real>& a, double tolerance) {
  RankInfo info;
  info.rows = static_cast<int>(a.rows());
  info.cols = static_cast<int>(a.cols());
  if (info.cols == 0) return info;
  if (info.rows == 0) {
    info.null_vector = Eigen::VectorXd::Zero(info.cols);
    info.null_vector(info.cols - 1) = 1.0;
    info.condition = 1.0;
    return info;
  }
  const auto e = equilibrate(a);
  Eigen::JacobiSVD<Mat<Real>> svd(e.a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Real smax = sv(0);
  const Real threshold = Real(std::max(info.rows, info.cols)) * smax * Real(tolerance);
  for (int i = 0; i < sv.size(); ++i) {
    info.singular_values.push_back(to_double(sv(i)));
    if (sv(i) > threshold) ++info.rank;
  }
  const Real smin = sv(sv.size() - 1);
  info.condition = smin > 0 ? to_double(smax / smin) : std::numeric_limits<double>::infinity();
  Vec<Real> v = svd.matrixV().col(info.cols - 1).cwiseProduct(e.col);
  v /= v.norm();
  info.null_vector = v.unaryExpr([](const Real& x) { return to_double(x); });
  return info;
}

template <class Real>
RankInfo system_rank_t(const ProductMomentTable& table, const MultiIndex& n, const MultiIndex& m) {
  MomentSource<Real> src(table);
  return rank_of<Real>(moment_matrix(src, n, m), rank_tolerance(table.precision()));
}

template <class Real>
Real int_power(Real x, int k) {
  Real r = 1;
  if (k < 0) {
    x = Real(1) / x;
    k = -k;
  }
  while (k-- > 0) r *= x;
  return r;
}

/// rhs - a y, accumulated in long double when Real is double.
template <class Real, int Cols>
Eigen::Matrix<Real, Eigen::Dynamic, Cols> wide_residual(const Eigen::Matrix<Real, Eigen::Dynamic, Cols>& rhs,
                                                        const Mat<Real>& a,
                                                        const Eigen::Matrix<Real, Eigen::Dynamic, Cols>& y) {
  if constexpr (std::is_same_v<Real, double>) {
    using Wide = Eigen::Matrix<long double, Eigen::Dynamic, Cols>;
    const Wide r = rhs.template cast<long double>() - a.template cast<long double>() * y.template cast<long double>();
    return r.template cast<double>();
  } else {
    return rhs - a * y;
  }
}

template <class Real>
NormalizedSolve solve_normalized_t(const ProductMomentTable& table, const MultiIndex& n,
                                   const MultiIndex& m, const Normalization& norm) {
  MomentSource<Real> src(table);
  const int N = n.total();
  const int rows = m.total();
  if (rows + 1 != N) throw ValidationError("normalised solve needs |n| = |m| + 1");
  Mat<Real> a(N, N);
  a.topRows(rows) = moment_matrix(src, n, m);
  a.row(rows).setZero();
  const Real s = table.basis().scale;
  const auto co = offsets(n);
  if (norm.kind == Normalization::Kind::TypeI) {
    const int k = norm.index;
    const Real f = int_power(s, m[k]);
    for (int l = 0; l < n.length(); ++l)
      for (int i = 0; i < n[l]; ++i) a(rows, co[l] + i) = src(l, k, i + m[k]) * f;
  } else {
    const int k = norm.index;
    a(rows, co[k] + n[k] - 1) = int_power(s, -(n[k] - 1));
  }
  Vec<Real> b = Vec<Real>::Zero(N);
  b(rows) = 1;

  const auto e = equilibrate(a);
  Eigen::FullPivLU<Mat<Real>> lu(e.a);
  const Vec<Real> bs = e.row.cwiseProduct(b);
  Vec<Real> y = lu.solve(bs);
  y += lu.solve(wide_residual(bs, e.a, y));
  const Vec<Real> x = e.col.cwiseProduct(y);

  using std::abs;
  Real worst = 0;
  const Vec<Real> ax = a * x;
  for (int i = 0; i < N; ++i) {
    Real scale = abs(b(i));
    for (int j = 0; j < N; ++j) scale += abs(a(i, j) * x(j));
    if (scale > 0) worst = std::max(worst, Real(abs(ax(i) - b(i)) / scale));
  }
  NormalizedSolve out;
  out.coefficients = x.unaryExpr([](const Real& v) { return to_double(v); });
  out.residual = to_double(worst);
  return out;
}

template <class Real>
GramInverse gram_inverse_t(const ProductMomentTable& table, const MultiIndex& n,
                           const MultiIndex& m, const std::vector<int>& f_order,
                           const std::vector<int>& g_order) {
  MomentSource<Real> src(table);
  if (n.total() != m.total()) throw ValidationError("Gram matrix needs |n| = |m|");
  const Mat<Real> raw = moment_matrix(src, n, m).transpose();
  const int size = static_cast<int>(raw.rows());
  auto order = [size](const std::vector<int>& o) {
    std::vector<int> out(size);
    for (int i = 0; i < size; ++i) out[i] = o.empty() ? i : o.at(i);
    return out;
  };
  const auto fo = order(f_order), go = order(g_order);
  Mat<Real> B(size, size);
  for (int a = 0; a < size; ++a)
    for (int b = 0; b < size; ++b) B(a, b) = raw(fo[a], go[b]);
  GramInverse out;
  out.gram = B.unaryExpr([](const Real& v) { return to_double(v); });
  out.rank = rank_of<Real>(B, rank_tolerance(table.precision()));
  const int N = static_cast<int>(B.rows());
  if (out.rank.rank < N) return out;

  // C B = I  <=>  B^T C^T = I; solving with B^T keeps the left residual small.
  const Mat<Real> Bt = B.transpose();
  const auto e = equilibrate(Bt);
  Eigen::FullPivLU<Mat<Real>> lu(e.a);
  const Mat<Real> I = Mat<Real>::Identity(N, N);
  const Mat<Real> rhs = e.row.asDiagonal() * I;
  Mat<Real> y = lu.solve(rhs);
  y += lu.solve(wide_residual(rhs, e.a, y));
  const Mat<Real> C = (e.col.asDiagonal() * y).transpose();
  using std::abs;
  const Mat<Real> check = C * B - I;
  Real worst = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) worst = std::max(worst, Real(abs(check(i, j))));
  out.inverse = C.unaryExpr([](const Real& v) { return to_double(v); });
  out.residual = to_double(worst);
  return out;
}

}  // namespace mixedmop::detail
