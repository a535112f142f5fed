#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mixedmop/errors.hpp"
#include "mixedmop/mop.hpp"
#include "mixedmop/quadrature.hpp"
#include "mixedmop/weights.hpp"

namespace mixedmop {

class DegeneratePair : public NumericalError {
 public:
  DegeneratePair(const std::string& what, NormalityReport report)
      : NumericalError("degenerate_pair", what), report_(std::move(report)) {}
  const NormalityReport& report() const { return report_; }

 private:
  NormalityReport report_;
};

/// A raw basis function u^power * w_weight(x), u in the shifted basis.
struct BasisLabel {
  int weight = 0;
  int power = 0;
};

/// Moment order a table must reach for kernel and RH work on a balanced pair
/// (covers all 2(p+q) neighbour solves).
int kernel_moment_order(const MultiIndexPair& pair);

/// Raw bases f_a of F_n and g_b of G_m, their Gram matrix B_{ab} = \int f_a g_b and
/// the transform C = B^{-1}; phi_j = sum_a C_{ja} f_a is biorthogonal to g_j.
class BiorthogonalSystem {
 public:
  const MultiIndexPair& pair() const { return pair_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& transform() const { return transform_; }
  const std::vector<BasisLabel>& f_basis() const { return f_basis_; }
  const std::vector<BasisLabel>& g_basis() const { return g_basis_; }
  const WeightFamily& first() const { return w1_; }
  const WeightFamily& second() const { return w2_; }
  const ShiftedBasis& basis() const { return basis_; }
  double condition() const { return condition_; }
  /// max |C B - I| computed in the working precision.
  double inverse_residual() const { return inverse_residual_; }
  int dimension() const { return static_cast<int>(f_basis_.size()); }

  Eigen::VectorXd f_values(double x) const;
  Eigen::VectorXd g_values(double y) const;
  /// phi(x) = C f(x).
  Eigen::VectorXd phi_values(double x) const;

  /// Union of the windows of all weights: the effective support of K.
  Interval support() const;

 private:
  friend BiorthogonalSystem build_biorthogonal(const MultiIndexPair&, const ProductMomentTable&,
                                               const std::vector<int>&, const std::vector<int>&);
  MultiIndexPair pair_ = MultiIndexPair::balanced({1}, {1});
  Eigen::MatrixXd gram_, transform_;
  std::vector<BasisLabel> f_basis_, g_basis_;
  WeightFamily w1_, w2_;
  ShiftedBasis basis_;
  double condition_ = 0.0;
  double inverse_residual_ = 0.0;
};

/// `f_order` / `g_order` permute the raw bases (identity when empty); the kernel
/// does not depend on them. Throws DegeneratePair if B is numerically singular.
BiorthogonalSystem build_biorthogonal(const MultiIndexPair& pair, const ProductMomentTable& table,
                                      const std::vector<int>& f_order = {},
                                      const std::vector<int>& g_order = {});

/// K(x, y) = g(y)^T C f(x).
double kernel_direct(const BiorthogonalSystem& sys, double x, double y);

/// The 2(p+q) linear forms entering the Christoffel-Darboux formula.
struct CdKernelData {
  MultiIndexPair pair = MultiIndexPair::balanced({1}, {1});
  ShiftedBasis basis;
  double diagonal_band = 0.0;
  std::vector<MixedMopSolution> type2_plus;          ///< Q^(II,j)_{n+e_j,m}(x; w1, w2)
  std::vector<MixedMopSolution> type1_minus_swapped;  ///< Q^(I,j)_{m,n-e_j}(y; w2, w1)
  std::vector<MixedMopSolution> type1_minus;          ///< Q^(I,k)_{n,m-e_k}(x; w1, w2)
  std::vector<MixedMopSolution> type2_plus_swapped;   ///< Q^(II,k)_{m+e_k,n}(y; w2, w1)

  int solve_count() const;
  double max_residual() const;
};

CdKernelData build_cd_data(const MultiIndexPair& pair, const ProductMomentTable& table);

/// Numerator (x - y) K(x, y) of the Christoffel-Darboux formula.
double cd_numerator(const CdKernelData& data, double x, double y);

/// Throws DiagonalRegion when |x - y| <= 1e-4 * s.
double kernel_cd(const CdKernelData& data, double x, double y);

/// K(x, x) from the derivative of the numerator.
double kernel_cd_diagonal(const CdKernelData& data, double x);

enum class KernelRoute { Biorthogonal, ChristoffelDarboux, RiemannHilbert };

struct KernelEvaluation {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
  KernelRoute route = KernelRoute::Biorthogonal;
};

/// \int K(x, x) dx by adaptive composite Gauss-Legendre over the support.
Estimate kernel_trace(const BiorthogonalSystem& sys);

/// max over the grid of |\int K(x, z) K(z, y) dz - K(x, y)|, the z-integral by
/// composite Gauss-Legendre with panel doubling until it stabilises.
double idempotence_residual(const BiorthogonalSystem& sys, const std::vector<double>& xs,
                            const std::vector<double>& ys);

}  // namespace mixedmop
