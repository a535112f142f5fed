#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Adaptive Gauss-Kronrod on [a, b]; independent of the library's quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-14) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol, &err);
}

inline double integrate_abs(const std::function<double(double)>& f, double a, double b) {
  return integrate([&](double x) { return std::abs(f(x)); }, a, b, 1e-10);
}

// Monic orthogonal polynomials for a weight by Gram-Schmidt on monomials, with the
// inner product computed by Gauss-Kronrod. Coefficients are ascending powers of x.
struct OrthogonalSystem {
  std::vector<std::vector<double>> monic;
  std::vector<double> h;  // h_j = \int P_j x^j w dx

  double eval(int j, double x) const {
    double r = 0.0;
    for (int i = static_cast<int>(monic[j].size()) - 1; i >= 0; --i) r = r * x + monic[j][i];
    return r;
  }
};

inline OrthogonalSystem gram_schmidt(const std::function<double(double)>& w, int count, double lo,
                                     double hi) {
  OrthogonalSystem sys;
  auto inner = [&](const std::vector<double>& a, const std::vector<double>& b) {
    auto ev = [](const std::vector<double>& c, double x) {
      double r = 0.0;
      for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) r = r * x + c[i];
      return r;
    };
    return integrate([&](double x) { return ev(a, x) * ev(b, x) * w(x); }, lo, hi);
  };
  for (int j = 0; j < count; ++j) {
    std::vector<double> p(j + 1, 0.0);
    p[j] = 1.0;
    const std::vector<double> mono = p;
    for (int i = 0; i < j; ++i) {
      const double c = inner(mono, sys.monic[i]) / inner(sys.monic[i], sys.monic[i]);
      for (int r = 0; r <= i; ++r) p[r] -= c * sys.monic[i][r];
    }
    sys.monic.push_back(p);
    sys.h.push_back(inner(p, mono));
  }
  return sys;
}

}  // namespace oracle
