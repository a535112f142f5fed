#pragma once

#include <Eigen/Dense>

#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

#include "mixedmop/errors.hpp"
#include "mixedmop/weights.hpp"

namespace mixedmop {

/// A vector of nonnegative integers. `total()` is |n| = sum of parts.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> parts);
  MultiIndex(std::initializer_list<int> parts) : MultiIndex(std::vector<int>(parts)) {}

  int length() const { return static_cast<int>(parts_.size()); }
  int total() const;
  int max_part() const;
  int operator[](int i) const { return parts_.at(i); }
  const std::vector<int>& parts() const { return parts_; }
  bool all_positive() const;

  /// n + e_k and n - e_k (0-based k).
  MultiIndex plus_unit(int k) const;
  MultiIndex minus_unit(int k) const;

  bool operator==(const MultiIndex&) const = default;
  std::string str() const;

 private:
  std::vector<int> parts_;
};

enum class PairRelation {
  MopDefining,  ///< |n| = |m| + 1
  RhBalanced    ///< |n| = |m|, every part >= 1
};

class MultiIndexPair {
 public:
  MultiIndexPair(MultiIndex n, MultiIndex m, PairRelation relation);
  static MultiIndexPair mop(MultiIndex n, MultiIndex m) {
    return {std::move(n), std::move(m), PairRelation::MopDefining};
  }
  static MultiIndexPair balanced(MultiIndex n, MultiIndex m) {
    return {std::move(n), std::move(m), PairRelation::RhBalanced};
  }

  const MultiIndex& n() const { return n_; }
  const MultiIndex& m() const { return m_; }
  PairRelation relation() const { return relation_; }
  /// The same pair seen from the other side: (m, n) with the roles of the families swapped.
  /// Only meaningful for balanced pairs.
  MultiIndexPair swapped() const;
  std::string str() const;

 private:
  MultiIndex n_, m_;
  PairRelation relation_;
};

/// Type I (k indexes the second family) or type II (k indexes the first family)
/// normalisation. Indices are 0-based.
struct Normalization {
  enum class Kind { TypeI, TypeII };
  Kind kind = Kind::TypeII;
  int index = 0;

  static Normalization type_one(int k) { return {Kind::TypeI, k}; }
  static Normalization type_two(int k) { return {Kind::TypeII, k}; }
  std::string str() const;
};

struct NormalityReport {
  MultiIndexPair pair = MultiIndexPair::mop({1}, {0});
  bool f_dimension_ok = false;
  int kernel_dimension = 0;
  std::vector<bool> typeI_admissible;   ///< per index of m
  std::vector<bool> typeII_admissible;  ///< per index of n
  double condition_estimate = 0.0;

  /// For a defining pair: the solution space is one-dimensional. For a balanced
  /// pair: F_n and G_m^perp intersect trivially.
  bool normal() const;
  bool admissible(const Normalization& norm) const;
  std::string summary() const;
};

class NotNormalizable : public NumericalError {
 public:
  NotNormalizable(const std::string& what, NormalityReport report)
      : NumericalError("not_normalizable", what), report_(std::move(report)) {}
  const NormalityReport& report() const { return report_; }

 private:
  NormalityReport report_;
};

/// Multiple orthogonal polynomials of mixed type A_1..A_p for one pair and
/// normalisation. Coefficients are stored in the shifted monomial basis
/// u = (x - c) / s of the table they were solved from.
class MixedMopSolution {
 public:
  MixedMopSolution(std::vector<Eigen::VectorXd> coefficients, Normalization normalization,
                   MultiIndexPair pair, double residual, WeightFamily weights, ShiftedBasis basis);

  const std::vector<Eigen::VectorXd>& coefficients() const { return coefficients_; }
  const Normalization& normalization() const { return normalization_; }
  const MultiIndexPair& pair() const { return pair_; }
  double residual() const { return residual_; }
  const WeightFamily& weights() const { return weights_; }
  const ShiftedBasis& basis() const { return basis_; }

  double polynomial(int j, double x) const;
  std::complex<double> polynomial(int j, std::complex<double> z) const;
  double polynomial_derivative(int j, double x) const;

  /// Q(x) = sum_j A_j(x) w_j(x) and its derivative.
  double form(double x) const;
  double form_derivative(double x) const;

  /// Coefficients of A_j in powers of the original variable x, ascending.
  std::vector<std::vector<double>> monomial_coefficients() const;
  /// Coefficient of x^(n_j - 1) in A_j.
  double leading_coefficient(int j) const;

 private:
  std::vector<Eigen::VectorXd> coefficients_;
  Normalization normalization_;
  MultiIndexPair pair_;
  double residual_;
  WeightFamily weights_;
  ShiftedBasis basis_;
};

/// Highest moment order touched when solving (n, m), its +-e_k neighbours and
/// either normalisation row.
int required_moment_order(const MultiIndex& n, const MultiIndex& m);

/// Rows (k, j), k over the second family and j < m_k; columns (l, i), l over the
/// first family and i < n_l. Entry = \int u^(i+j) w_{1,l} w_{2,k}.
Eigen::MatrixXd assemble_orthogonality_matrix(const MultiIndex& n, const MultiIndex& m,
                                              const ProductMomentTable& table);
Eigen::MatrixXd assemble_orthogonality_matrix(const MultiIndexPair& pair,
                                              const ProductMomentTable& table);

/// Normality and admissibility of both normalisations, via numerical rank of the
/// moment systems for (n, m), (n, m + e_k) and (n - e_k, m).
NormalityReport check_normality(const MultiIndexPair& pair, const ProductMomentTable& table);

/// Solve for the mixed-type polynomials of a defining pair. Throws NotNormalizable
/// with the full report if the pair is not normal or the normalisation is not
/// admissible; no arbitrary null-space element is ever returned.
MixedMopSolution solve_mixed(const MultiIndexPair& pair, const ProductMomentTable& table,
                             const Normalization& normalization);

/// Right singular vector of the unnormalised |m| x |n| system for the smallest
/// singular value (shifted basis, unit length). Used to cross-check solves.
Eigen::VectorXd null_direction(const MultiIndexPair& pair, const ProductMomentTable& table);

/// Classical type I forms Q = sum A_j w_j with \int Q x^j dx = 0 (j <= |n| - 2) and
/// \int Q x^(|n|-1) dx = 1. Realised as a mixed problem whose second family is the
/// constant weight on [c - 12 s, c + 12 s].
MixedMopSolution solve_type1_classical(const WeightFamily& weights, const MultiIndex& n,
                                       Precision precision = Precision::Double);

/// Classical monic type II polynomial P of degree |m| with \int P x^j w_k = 0 for
/// j < m_k. The returned solution has a single polynomial A_1 = P over the constant
/// truncated weight.
MixedMopSolution solve_type2_classical(const WeightFamily& weights, const MultiIndex& m,
                                       Precision precision = Precision::Double);

/// The constant weight used by the classical reductions for a family.
Weight truncated_lebesgue(const WeightFamily& weights);

}  // namespace mixedmop
