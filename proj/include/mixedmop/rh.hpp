#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

#include "mixedmop/kernel.hpp"
#include "mixedmop/quadrature.hpp"

namespace mixedmop {

using cplx = std::complex<double>;

/// A (p+q) x (p+q) solution matrix at one point. `accuracy` holds per-entry
/// absolute error bounds (zero for the polynomial entries).
struct RhEvaluation {
  cplx z;
  Side side = Side::Off;
  Eigen::MatrixXcd matrix;
  Eigen::MatrixXd accuracy;
};

/// J(x) = [I_p W(x); 0 I_q] with W = w1^t w2.
struct JumpMatrix {
  double x = 0.0;
  Eigen::MatrixXd value;
  int p = 0;
  int q = 0;

  Eigen::MatrixXd W() const { return value.topRightCorner(p, q); }
  /// J^{-t} = [I_p 0; -W^t I_q], the jump of X.
  Eigen::MatrixXd inverse_transpose() const;
};

JumpMatrix jump_matrix(const WeightFamily& w1, const WeightFamily& w2, double x);

/// Cauchy transforms closer than near_band_fraction * s to the real axis use
/// singularity subtraction; rel_tol is the quadrature stopping tolerance.
struct RhOptions {
  double near_band_fraction = 0.05;
  double rel_tol = 1e-12;
};

/// Y(z) from the mixed-type solutions of a balanced pair. For real z, side picks
/// the boundary value (Plemelj split of the Cauchy transforms). Throws
/// AccuracyFailure when a Cauchy transform does not converge.
RhEvaluation eval_Y(const CdKernelData& data, cplx z, Side side = Side::Off,
                    const RhOptions& options = {});

/// X(z) = Y(z)^{-t}, assembled from the swapped-orientation solutions.
RhEvaluation eval_X(const CdKernelData& data, cplx z, Side side = Side::Off,
                    const RhOptions& options = {});

RhEvaluation eval_Y(const MultiIndexPair& pair, const ProductMomentTable& table, cplx z,
                    Side side = Side::Off);
RhEvaluation eval_X(const MultiIndexPair& pair, const ProductMomentTable& table, cplx z,
                    Side side = Side::Off);

/// |det M - 1|.
double det_residual(const RhEvaluation& e);

/// max |(X^t Y - I)_{ij}|.
double xy_residual(const RhEvaluation& x, const RhEvaluation& y);

enum class RhMatrix { Y, X };

struct JumpReport {
  RhMatrix which = RhMatrix::Y;
  double x = 0.0;
  std::vector<double> deltas;
  std::vector<double> residuals;  // ||M(x + i d) - M(x - i d) J||_inf per delta
  double extrapolated = 0.0;      // ||Richardson limit||_inf
  double scale = 0.0;             // ||M(x + i d_min)||_inf
  bool passed = false;            // extrapolated < 1e-6 * scale
};

/// The jump of Y (or X) at x from the differences at x +- i*delta, extrapolated
/// to delta = 0 by Neville's scheme in delta.
JumpReport verify_jump(const CdKernelData& data, double x,
                       const std::vector<double>& deltas = {1e-2, 5e-3, 2.5e-3},
                       RhMatrix which = RhMatrix::Y, const RhOptions& options = {});

struct AsymptoticReport {
  RhMatrix which = RhMatrix::Y;
  std::vector<double> radii;
  std::vector<double> errors;  // ||M(z) z^{-D} - I||_inf at z = i R
  std::vector<double> ratios;  // errors[i] / errors[i + 1]
  bool passed = false;         // every ratio >= 1.8
};

/// ||Y(z) diag(z^{-n}, z^{m}) - I||_inf (X: exponents negated); powers in log-space.
double asymptotic_error(const CdKernelData& data, cplx z, RhMatrix which = RhMatrix::Y,
                        const RhOptions& options = {});

AsymptoticReport verify_asymptotics(const CdKernelData& data,
                                    const std::vector<double>& radii = {10, 20, 40},
                                    RhMatrix which = RhMatrix::Y, const RhOptions& options = {});

struct RhKernelValue {
  double value = 0.0;
  double imag = 0.0;  // imaginary part of the assembled value
};

/// K(x, y) = [0, w2(y)] Y_+^{-1}(y) Y_+(x) [w1(x), 0]^t / (2 pi i (x - y)). The row
/// vector comes from the polynomial columns of X = Y^{-t}, the column from the
/// polynomial columns of Y, so no Cauchy transform enters. DiagonalRegion as in
/// kernel_cd.
RhKernelValue kernel_rh(const CdKernelData& data, double x, double y);

struct RhVerifyOptions {
  int det_points = 20;
  int jump_points = 10;
  std::vector<double> deltas{1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4};
  std::vector<double> radii{10, 20, 40};
  std::uint64_t seed = 1;
  RhOptions rh;
};

struct RhVerifyReport {
  std::vector<cplx> points;
  std::vector<double> det_residuals;  // Y
  std::vector<double> det_residuals_x;
  std::vector<double> xy_residuals;
  std::vector<JumpReport> jumps;  // Y then X at each sample point
  AsymptoticReport asymptotics_y;
  AsymptoticReport asymptotics_x;

  double max_det() const;
  double max_xy() const;
  double max_jump() const;  // max extrapolated / scale
};

/// Complex points x + i y with x across the bulk of the weights and 0.1 <= |y| <= 1,
/// real jump points spread over the same range.
RhVerifyReport rh_verify(const CdKernelData& data, const RhVerifyOptions& options = {});

}  // namespace mixedmop
