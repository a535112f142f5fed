#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace mixedmop {

enum class Precision { Double, Extended };

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool finite() const;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// amplitude * exp(-(x - center)^2 / (2 variance))
struct Gaussian {
  double center = 0.0;
  double variance = 1.0;
  double amplitude = 1.0;

  double operator()(double x) const;
  double sigma() const;
};

/// Gaussian envelope a tabulated weight declares it decays at least as fast as.
struct DecayBound {
  double center = 0.0;
  double variance = 1.0;
};

struct Tabulated {
  std::function<double(double)> eval;
  Interval support;
  DecayBound decay;
  std::function<double(double)> derivative;  // optional
};

/// A nonnegative weight on the real line with finite moments of every order.
class Weight {
 public:
  static Weight gaussian(double center, double variance, double amplitude = 1.0);
  static Weight tabulated(std::function<double(double)> eval, Interval support, DecayBound decay,
                          std::function<double(double)> derivative = {});
  /// The constant `height` on [lo, hi], zero elsewhere.
  static Weight box(double lo, double hi, double height = 1.0);

  bool is_gaussian() const { return std::holds_alternative<Gaussian>(kind_); }
  const Gaussian& as_gaussian() const;
  const Tabulated& as_tabulated() const;

  double operator()(double x) const;
  double derivative(double x) const;

  /// Nominal location and width, used to fit the shifted monomial basis.
  double center() const;
  double width() const;
  /// Interval outside which the weight is below exp(-sigmas^2 / 2) of its peak scale.
  Interval window(double sigmas = 14.0) const;

 private:
  explicit Weight(std::variant<Gaussian, Tabulated> kind) : kind_(std::move(kind)) {}
  std::variant<Gaussian, Tabulated> kind_;
};

double eval_weight(const Weight& w, double x);

/// An ordered, nonempty list of weights (w_1 or w_2 of a mixed problem).
class WeightFamily {
 public:
  WeightFamily() = default;
  WeightFamily(std::vector<Weight> weights);
  WeightFamily(std::initializer_list<Weight> weights) : WeightFamily(std::vector<Weight>(weights)) {}

  int size() const { return static_cast<int>(weights_.size()); }
  const Weight& operator[](int i) const { return weights_.at(i); }
  auto begin() const { return weights_.begin(); }
  auto end() const { return weights_.end(); }
  bool all_gaussian() const;

 private:
  std::vector<Weight> weights_;
};

/// Affine change of variable u = (x - center) / scale for the monomial basis.
struct ShiftedBasis {
  double center = 0.0;
  double scale = 1.0;

  double to_local(double x) const { return (x - center) / scale; }
  /// center = mean of all weight centres, scale = max(largest width, half the range of centres).
  static ShiftedBasis fit(const WeightFamily& a, const WeightFamily& b);
};

/// Brownian transition density sqrt(n) / sqrt(2 pi t) * exp(-n (x - a)^2 / (2 t)), t in (0, 1).
double gaussian_transition(double t, double a, double x, int scale = 1);

/// The weight x -> gaussian_transition(t, a, x, scale) as a Gaussian.
Weight transition_weight(double t, double a, int scale = 1);

/// The product of two Gaussians is amplitude * exp(-(x - mean)^2 / (2 variance)).
Gaussian gaussian_product(const Gaussian& g1, const Gaussian& g2);

struct MomentValue {
  double value = 0.0;
  double error_bound = 0.0;
};

/// \int u^k w1(x) w2(x) dx with u = basis.to_local(x). Gaussian pairs use the closed
/// form; anything involving a tabulated weight goes through adaptive quadrature and
/// throws AccuracyFailure if it does not converge.
MomentValue product_moment(const Weight& w1, const Weight& w2, int k,
                           const ShiftedBasis& basis = {});

/// All moments 0..max_order of a Gaussian pair, with running error bounds.
std::vector<MomentValue> gaussian_product_moments(const Gaussian& g1, const Gaussian& g2,
                                                  int max_order, const ShiftedBasis& basis = {});

struct MomentOptions {
  /// Basis for the monomials; fitted from the two families when absent.
  std::optional<ShiftedBasis> basis;
  Precision precision = Precision::Double;
};

/// Table of product moments \int u^k w_{1,j} w_{2,l} for k = 0..max_order. The table
/// also keeps both weight families, so derived quantities (Gram matrices, kernel
/// bases) can be built from it. `swapped()` returns a view with the roles of the two
/// families interchanged; the moments are symmetric so no recomputation happens.
class ProductMomentTable {
 public:
  int first_size() const;
  int second_size() const;
  int max_order() const;
  Precision precision() const;
  const ShiftedBasis& basis() const;
  const WeightFamily& first() const;
  const WeightFamily& second() const;
  bool is_swapped() const { return swapped_; }

  /// 0-based indices: j into first(), l into second().
  double operator()(int j, int l, int k) const;
  double error_bound(int j, int l, int k) const;
  double max_error_bound() const;

  ProductMomentTable swapped() const;

 private:
  struct Data;
  friend ProductMomentTable build_moment_table(const WeightFamily&, const WeightFamily&, int,
                                               const MomentOptions&);
  std::size_t index(int j, int l, int k) const;
  std::shared_ptr<const Data> data_;
  bool swapped_ = false;
};

ProductMomentTable build_moment_table(const WeightFamily& w1, const WeightFamily& w2,
                                      int max_order, const MomentOptions& options = {});

}  // namespace mixedmop
