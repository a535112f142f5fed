#include "linalg.hpp"

#include "linalg_impl.hpp"
#include "mixedmop/quadrature.hpp"

namespace mixedmop::detail {

double rank_tolerance(Precision precision) {
  return precision == Precision::Extended ? 1e-25 : 1e-10;
}

int sampled_rank(const WeightFamily& weights, const MultiIndex& n, const ShiftedBasis& basis) {
  if (n.total() == 0) return 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& w : weights) {
    const auto win = w.window();
    lo = std::min(lo, win.lo);
    hi = std::max(hi, win.hi);
  }
  const auto& rule = gauss_legendre(20);
  const int panels = 64;
  const double h = (hi - lo) / panels;
  Eigen::MatrixXd s(panels * rule.nodes.size(), n.total());
  int row = 0;
  for (int p = 0; p < panels; ++p)
    for (std::size_t i = 0; i < rule.nodes.size(); ++i, ++row) {
      const double x = lo + (p + 0.5) * h + 0.5 * h * rule.nodes[i];
      const double sw = std::sqrt(0.5 * h * rule.weights[i]);
      const double u = basis.to_local(x);
      int col = 0;
      for (int l = 0; l < n.length(); ++l) {
        const double wx = weights[l](x);
        double power = 1.0;
        for (int k = 0; k < n[l]; ++k, ++col, power *= u) s(row, col) = sw * power * wx;
      }
    }
  return rank_of<double>(s, rank_tolerance(Precision::Double)).rank;
}

RankInfo system_rank_double(const ProductMomentTable& t, const MultiIndex& n, const MultiIndex& m) {
  return system_rank_t<double>(t, n, m);
}

NormalizedSolve solve_normalized_double(const ProductMomentTable& t, const MultiIndex& n,
                                        const MultiIndex& m, const Normalization& norm) {
  return solve_normalized_t<double>(t, n, m, norm);
}

GramInverse gram_inverse_double(const ProductMomentTable& t, const MultiIndex& n,
                                const MultiIndex& m, const std::vector<int>& fo,
                                const std::vector<int>& go) {
  return gram_inverse_t<double>(t, n, m, fo, go);
}

RankInfo system_rank(const ProductMomentTable& t, const MultiIndex& n, const MultiIndex& m) {
  return t.precision() == Precision::Extended ? system_rank_extended(t, n, m)
                                              : system_rank_double(t, n, m);
}

NormalizedSolve solve_normalized(const ProductMomentTable& t, const MultiIndex& n,
                                 const MultiIndex& m, const Normalization& norm) {
  return t.precision() == Precision::Extended ? solve_normalized_extended(t, n, m, norm)
                                              : solve_normalized_double(t, n, m, norm);
}

GramInverse gram_inverse(const ProductMomentTable& t, const MultiIndex& n, const MultiIndex& m,
                         const std::vector<int>& fo, const std::vector<int>& go) {
  return t.precision() == Precision::Extended ? gram_inverse_extended(t, n, m, fo, go)
                                              : gram_inverse_double(t, n, m, fo, go);
}

}  // namespace mixedmop::detail
