#include "mixedmop/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "mixedmop/errors.hpp"

namespace mixedmop {

namespace {

QuadratureRule make_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

QuadratureRule make_gauss_hermite(int n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = eig.eigenvalues()(i);
    const double v = eig.eigenvectors()(0, i);
    rule.weights[i] = sqrt_pi * v * v;
  }
  // symmetrise: the rule is exactly symmetric in exact arithmetic
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

template <class Maker>
const QuadratureRule& cached_rule(std::map<int, std::unique_ptr<QuadratureRule>>& cache,
                                  std::mutex& mutex, int n, Maker make) {
  if (n < 1) throw ValidationError("quadrature order must be positive");
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(make(n));
  return *slot;
}

bool agree(double a, double b, double abs_tol, double rel_tol) {
  const double d = std::abs(a - b);
  return d <= abs_tol || d <= rel_tol * std::abs(b);
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex mutex;
  return cached_rule(cache, mutex, n, make_gauss_legendre);
}

const QuadratureRule& gauss_hermite(int n) {
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex mutex;
  return cached_rule(cache, mutex, n, make_gauss_hermite);
}

Estimate integrate_gaussian_weighted(const std::function<double(double)>& g, double mean,
                                     double variance, double abs_tol, double rel_tol) {
  const double width = std::sqrt(2.0 * variance);
  auto apply = [&](int n) {
    const auto& rule = gauss_hermite(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rule.weights[i] * g(mean + width * rule.nodes[i]);
    return width * sum;
  };
  double previous = apply(16);
  for (int n = 32; n <= 512; n *= 2) {
    const double current = apply(n);
    if (agree(current, previous, abs_tol, rel_tol)) return {current, std::abs(current - previous), true};
    previous = current;
  }
  const double last = apply(512);
  return {last, std::abs(last - previous), false};
}

double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        int order) {
  const auto& rule = gauss_legendre(order);
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double local = 0.0;
    for (int i = 0; i < order; ++i) local += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    sum += 0.5 * h * local;
  }
  return sum;
}

Estimate integrate_interval(const std::function<double(double)>& f, double a, double b,
                            double abs_tol, double rel_tol) {
  double previous = integrate_panels(f, a, b, 8);
  for (int panels = 16; panels <= 4096; panels *= 2) {
    const double current = integrate_panels(f, a, b, panels);
    if (agree(current, previous, abs_tol, rel_tol))
      return {current, std::abs(current - previous), true};
    previous = current;
  }
  return {previous, std::abs(previous), false};
}

ComplexEstimate cauchy_transform(const std::function<double(double)>& f, std::complex<double> z,
                                 Side side, double lo, double hi, double near_band,
                                 double rel_tol) {
  using cplx = std::complex<double>;
  const double x0 = z.real();
  const double b = side == Side::Off ? z.imag() : 0.0;
  if (side == Side::Off && b == 0.0)
    throw ValidationError("Cauchy transform at a real point needs a boundary side");
  if (!(hi > lo)) throw ValidationError("Cauchy transform window is empty");

  const bool inside = x0 > lo && x0 < hi;
  const bool subtract = inside && (side != Side::Off || std::abs(b) < near_band);
  const double f0 = subtract ? f(x0) : 0.0;

  auto integrand = [&](double x) -> cplx {
    if (subtract) return (f(x) - f0) / (cplx(x, 0.0) - cplx(x0, b));
    return f(x) / (cplx(x, 0.0) - z);
  };

  auto breakpoints = [&](int uniform) {
    std::vector<double> pts;
    const double h = (hi - lo) / uniform;
    for (int i = 0; i <= uniform; ++i) pts.push_back(lo + i * h);
    if (inside) {
      pts.push_back(x0);
      const double h0 = std::max(std::abs(b) * 0.5, 1e-9 * (hi - lo));
      for (double step = h0; step < h; step *= 2.0) {
        if (x0 - step > lo) pts.push_back(x0 - step);
        if (x0 + step < hi) pts.push_back(x0 + step);
      }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  };

  struct Pass {
    cplx low, high;
    double magnitude;
  };
  auto run = [&](const std::vector<double>& pts) {
    const auto& r1 = gauss_legendre(16);
    const auto& r2 = gauss_legendre(24);
    Pass out{0.0, 0.0, 0.0};
    for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
      const double mid = 0.5 * (pts[p] + pts[p + 1]);
      const double half = 0.5 * (pts[p + 1] - pts[p]);
      cplx s1 = 0.0, s2 = 0.0;
      for (std::size_t i = 0; i < r1.nodes.size(); ++i)
        s1 += r1.weights[i] * integrand(mid + half * r1.nodes[i]);
      for (std::size_t i = 0; i < r2.nodes.size(); ++i) {
        const cplx v = r2.weights[i] * integrand(mid + half * r2.nodes[i]);
        s2 += v;
        out.magnitude += half * std::abs(v);
      }
      out.low += half * s1;
      out.high += half * s2;
    }
    return out;
  };

  Pass pass{};
  bool converged = false;
  for (int uniform = 16; uniform <= 1024; uniform *= 2) {
    pass = run(breakpoints(uniform));
    if (std::abs(pass.high - pass.low) <= rel_tol * std::max(pass.magnitude, 1e-300)) {
      converged = true;
      break;
    }
  }

  cplx value = pass.high;
  if (subtract) {
    if (side == Side::Off) {
      value += f0 * (std::log(cplx(hi, 0.0) - z) - std::log(cplx(lo, 0.0) - z));
    } else {
      const double sign = side == Side::Plus ? 1.0 : -1.0;
      value += f0 * cplx(std::log((hi - x0) / (x0 - lo)), sign * std::numbers::pi);
    }
  }
  return {value, std::abs(pass.high - pass.low), converged};
}

}  // namespace mixedmop
