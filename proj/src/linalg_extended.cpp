#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "linalg.hpp"
#include "linalg_impl.hpp"

namespace mixedmop::detail {

using Quad = boost::multiprecision::cpp_bin_float_quad;

RankInfo system_rank_extended(const ProductMomentTable& t, const MultiIndex& n,
                              const MultiIndex& m) {
  return system_rank_t<Quad>(t, n, m);
}

NormalizedSolve solve_normalized_extended(const ProductMomentTable& t, const MultiIndex& n,
                                          const MultiIndex& m, const Normalization& norm) {
  return solve_normalized_t<Quad>(t, n, m, norm);
}

GramInverse gram_inverse_extended(const ProductMomentTable& t, const MultiIndex& n,
                                  const MultiIndex& m, const std::vector<int>& fo,
                                  const std::vector<int>& go) {
  return gram_inverse_t<Quad>(t, n, m, fo, go);
}

}  // namespace mixedmop::detail
