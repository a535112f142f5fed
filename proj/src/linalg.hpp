#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "mixedmop/mop.hpp"
#include "mixedmop/weights.hpp"

namespace mixedmop::detail {

struct RankInfo {
  int rows = 0;
  int cols = 0;
  int rank = 0;
  double condition = 0.0;  // sigma_max / sigma_min of the equilibrated matrix
  std::vector<double> singular_values;
  Eigen::VectorXd null_vector;  // smallest right singular direction, unit length
  int kernel_dimension() const { return cols - rank; }
};

/// Numerical rank of the |m| x |n| moment system (columns over n / first family).
RankInfo system_rank(const ProductMomentTable& table, const MultiIndex& n, const MultiIndex& m);

struct NormalizedSolve {
  Eigen::VectorXd coefficients;
  double residual = 0.0;
};

/// Square solve of the moment system plus one normalisation row.
NormalizedSolve solve_normalized(const ProductMomentTable& table, const MultiIndex& n,
                                 const MultiIndex& m, const Normalization& norm);

struct GramInverse {
  Eigen::MatrixXd gram;     // B_{ab} = \int f_a g_b
  Eigen::MatrixXd inverse;  // C with C * B = I
  RankInfo rank;
  double residual = 0.0;  // max |C B - I|
};

/// Inverse of the |n| x |n| Gram matrix of a balanced pair. Row a of B uses raw F
/// function f_order[a], column b raw G function g_order[b] (identity when empty).
GramInverse gram_inverse(const ProductMomentTable& table, const MultiIndex& n, const MultiIndex& m,
                         const std::vector<int>& f_order = {}, const std::vector<int>& g_order = {});

/// Numerical rank of the raw basis u^i w_l (i < n_l) of F_n, from the SVD of the
/// basis sampled at weighted Gauss-Legendre nodes over the weights' windows. This
/// sees the conditioning of the functions themselves rather than its square.
int sampled_rank(const WeightFamily& weights, const MultiIndex& n, const ShiftedBasis& basis);

/// Rank threshold relative to sigma_max for a precision.
double rank_tolerance(Precision precision);

// Per-precision entry points, defined in linalg.cpp and linalg_extended.cpp.
RankInfo system_rank_double(const ProductMomentTable&, const MultiIndex&, const MultiIndex&);
RankInfo system_rank_extended(const ProductMomentTable&, const MultiIndex&, const MultiIndex&);
NormalizedSolve solve_normalized_double(const ProductMomentTable&, const MultiIndex&,
                                        const MultiIndex&, const Normalization&);
NormalizedSolve solve_normalized_extended(const ProductMomentTable&, const MultiIndex&,
                                          const MultiIndex&, const Normalization&);
GramInverse gram_inverse_double(const ProductMomentTable&, const MultiIndex&, const MultiIndex&,
                                const std::vector<int>&, const std::vector<int>&);
GramInverse gram_inverse_extended(const ProductMomentTable&, const MultiIndex&, const MultiIndex&,
                                  const std::vector<int>&, const std::vector<int>&);

}  // namespace mixedmop::detail
