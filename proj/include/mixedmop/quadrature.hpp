#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace mixedmop {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1]. Rules are computed once and cached.
const QuadratureRule& gauss_legendre(int n);

/// Gauss-Hermite rule for the weight exp(-t^2) on the real line (Golub-Welsch).
const QuadratureRule& gauss_hermite(int n);

/// An integral estimate with an absolute error bound.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Integrates g(x) * exp(-(x - mean)^2 / (2 variance)) over the real line with
/// Gauss-Hermite rules re-centred at `mean`. The degree doubles from 16 until two
/// successive estimates agree to `abs_tol` or `rel_tol`, capped at degree 512.
Estimate integrate_gaussian_weighted(const std::function<double(double)>& g, double mean,
                                     double variance, double abs_tol = 1e-12,
                                     double rel_tol = 1e-10);

/// Composite Gauss-Legendre on [a, b] with `panels` equal panels of `order` points.
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        int order = 20);

/// Composite Gauss-Legendre on [a, b] with the panel count doubling until two
/// successive estimates agree (same stopping rule as above, at most 4096 panels).
Estimate integrate_interval(const std::function<double(double)>& f, double a, double b,
                            double abs_tol = 1e-12, double rel_tol = 1e-10);

/// Which value a Cauchy transform takes at a real point.
enum class Side { Off, Plus, Minus };

struct ComplexEstimate {
  std::complex<double> value;
  double error = 0.0;
  bool converged = true;
};

/// Cauchy transform C(z) = \int_lo^hi f(x) / (x - z) dx of a real density f that is
/// negligible outside [lo, hi].
///
/// For Im z = 0 the boundary value from above (Side::Plus) or below (Side::Minus)
/// is returned through the Plemelj split (principal value +- i*pi*f(x0)). When z is
/// within `near_band` of the real axis the integrand is regularised by subtracting
/// f(Re z) and the log term f(Re z) * log((hi - z)/(lo - z)) is added back. Panels are
/// graded geometrically towards Re z so the width-|Im z| structure is resolved.
ComplexEstimate cauchy_transform(const std::function<double(double)>& f, std::complex<double> z,
                                 Side side, double lo, double hi, double near_band,
                                 double rel_tol = 1e-12);

}  // namespace mixedmop
