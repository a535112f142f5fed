#include "mixedmop/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mixedmop/errors.hpp"
#include "mixedmop/quadrature.hpp"

namespace mixedmop {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_gaussian(const Gaussian& g) {
  if (!std::isfinite(g.center) || !(g.variance > 0.0) || !std::isfinite(g.variance) ||
      !(g.amplitude > 0.0) || !std::isfinite(g.amplitude))
    throw ValidationError("Gaussian weight needs a finite centre, positive variance and positive amplitude");
}

double int_pow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

bool Interval::finite() const { return std::isfinite(lo) && std::isfinite(hi); }

double Gaussian::operator()(double x) const {
  const double d = x - center;
  return amplitude * std::exp(-d * d / (2.0 * variance));
}

double Gaussian::sigma() const { return std::sqrt(variance); }

Weight Weight::gaussian(double center, double variance, double amplitude) {
  Gaussian g{center, variance, amplitude};
  check_gaussian(g);
  return Weight(g);
}

Weight Weight::tabulated(std::function<double(double)> eval, Interval support, DecayBound decay,
                         std::function<double(double)> derivative) {
  if (!eval) throw ValidationError("tabulated weight needs an evaluation function");
  if (!(support.hi > support.lo)) throw ValidationError("tabulated weight support is empty");
  if (!support.finite() && !(decay.variance > 0.0))
    throw ValidationError("tabulated weight with unbounded support needs a positive decay variance");
  return Weight(Tabulated{std::move(eval), support, decay, std::move(derivative)});
}

Weight Weight::box(double lo, double hi, double height) {
  if (!(height > 0.0)) throw ValidationError("box weight height must be positive");
  auto eval = [lo, hi, height](double x) { return (x >= lo && x <= hi) ? height : 0.0; };
  auto deriv = [](double) { return 0.0; };
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  return tabulated(eval, Interval{lo, hi}, DecayBound{mid, half * half}, deriv);
}

const Gaussian& Weight::as_gaussian() const {
  if (auto* g = std::get_if<Gaussian>(&kind_)) return *g;
  throw ValidationError("weight is not Gaussian");
}

const Tabulated& Weight::as_tabulated() const {
  if (auto* t = std::get_if<Tabulated>(&kind_)) return *t;
  throw ValidationError("weight is not tabulated");
}

double Weight::operator()(double x) const {
  if (auto* g = std::get_if<Gaussian>(&kind_)) return (*g)(x);
  const auto& t = std::get<Tabulated>(kind_);
  if (!t.support.contains(x)) return 0.0;
  return t.eval(x);
}

double Weight::derivative(double x) const {
  if (auto* g = std::get_if<Gaussian>(&kind_)) return -(x - g->center) / g->variance * (*g)(x);
  const auto& t = std::get<Tabulated>(kind_);
  if (!t.support.contains(x)) return 0.0;
  if (t.derivative) return t.derivative(x);
  // five-point central difference
  const double h = 1e-3 * std::sqrt(t.decay.variance);
  return (-t.eval(x + 2 * h) + 8 * t.eval(x + h) - 8 * t.eval(x - h) + t.eval(x - 2 * h)) /
         (12 * h);
}

double Weight::center() const {
  if (auto* g = std::get_if<Gaussian>(&kind_)) return g->center;
  const auto& t = std::get<Tabulated>(kind_);
  return t.support.finite() ? 0.5 * (t.support.lo + t.support.hi) : t.decay.center;
}

double Weight::width() const {
  if (auto* g = std::get_if<Gaussian>(&kind_)) return g->sigma();
  const auto& t = std::get<Tabulated>(kind_);
  if (t.support.finite()) return std::min(0.5 * (t.support.hi - t.support.lo), std::sqrt(t.decay.variance));
  return std::sqrt(t.decay.variance);
}

Interval Weight::window(double sigmas) const {
  if (auto* g = std::get_if<Gaussian>(&kind_))
    return {g->center - sigmas * g->sigma(), g->center + sigmas * g->sigma()};
  const auto& t = std::get<Tabulated>(kind_);
  const double s = std::sqrt(t.decay.variance);
  return {std::max(t.support.lo, t.decay.center - sigmas * s),
          std::min(t.support.hi, t.decay.center + sigmas * s)};
}

double eval_weight(const Weight& w, double x) { return w(x); }

WeightFamily::WeightFamily(std::vector<Weight> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ValidationError("a weight family needs at least one weight");
}

bool WeightFamily::all_gaussian() const {
  return std::all_of(weights_.begin(), weights_.end(), [](const Weight& w) { return w.is_gaussian(); });
}

ShiftedBasis ShiftedBasis::fit(const WeightFamily& a, const WeightFamily& b) {
  double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo, widest = 0.0;
  int count = 0;
  for (const auto* fam : {&a, &b}) {
    for (const auto& w : *fam) {
      const double c = w.center();
      sum += c;
      lo = std::min(lo, c);
      hi = std::max(hi, c);
      widest = std::max(widest, w.width());
      ++count;
    }
  }
  ShiftedBasis basis;
  basis.center = count ? sum / count : 0.0;
  basis.scale = std::max(widest, 0.5 * (hi - lo));
  if (!(basis.scale > 0.0)) basis.scale = 1.0;
  return basis;
}

double gaussian_transition(double t, double a, double x, int scale) {
  if (!(t > 0.0 && t < 1.0)) throw ValidationError("transition time must lie in (0, 1)");
  if (scale < 1) throw ValidationError("transition scale must be a positive integer");
  const double n = scale;
  const double d = x - a;
  return std::sqrt(n) / std::sqrt(2.0 * std::numbers::pi * t) * std::exp(-n * d * d / (2.0 * t));
}

Weight transition_weight(double t, double a, int scale) {
  if (!(t > 0.0 && t < 1.0)) throw ValidationError("transition time must lie in (0, 1)");
  if (scale < 1) throw ValidationError("transition scale must be a positive integer");
  const double n = scale;
  return Weight::gaussian(a, t / n, std::sqrt(n) / std::sqrt(2.0 * std::numbers::pi * t));
}

Gaussian gaussian_product(const Gaussian& g1, const Gaussian& g2) {
  const double precision = 1.0 / g1.variance + 1.0 / g2.variance;
  const double variance = 1.0 / precision;
  const double mean = (g1.center / g1.variance + g2.center / g2.variance) * variance;
  const double d = g1.center - g2.center;
  const double amplitude =
      g1.amplitude * g2.amplitude * std::exp(-d * d / (2.0 * (g1.variance + g2.variance)));
  return {mean, variance, amplitude};
}

std::vector<MomentValue> gaussian_product_moments(const Gaussian& g1, const Gaussian& g2,
                                                  int max_order, const ShiftedBasis& basis) {
  if (max_order < 0) throw ValidationError("moment order must be nonnegative");
  const Gaussian prod = gaussian_product(g1, g2);
  double mu = (prod.center - basis.center) / basis.scale;
  const double var = prod.variance / (basis.scale * basis.scale);
  // Exact symmetrisation: a product centred on the grid centre has vanishing odd moments.
  const double offset_scale =
      std::max({1.0, std::abs(prod.center) / basis.scale, std::abs(basis.center) / basis.scale});
  if (std::abs(mu) <= 16.0 * kEps * offset_scale) mu = 0.0;

  std::vector<MomentValue> m(max_order + 1);
  m[0].value = prod.amplitude * std::sqrt(2.0 * std::numbers::pi * prod.variance);
  m[0].error_bound = 4.0 * kEps * m[0].value;
  if (max_order >= 1) {
    m[1].value = mu * m[0].value;
    m[1].error_bound = std::abs(mu) * (m[0].error_bound + 2.0 * kEps * m[0].value);
  }
  for (int k = 2; k <= max_order; ++k) {
    const double a = mu * m[k - 1].value;
    const double b = (k - 1) * var * m[k - 2].value;
    m[k].value = a + b;
    m[k].error_bound = std::abs(mu) * m[k - 1].error_bound + (k - 1) * var * m[k - 2].error_bound +
                       3.0 * kEps * (std::abs(a) + std::abs(b));
  }
  return m;
}

MomentValue product_moment(const Weight& w1, const Weight& w2, int k, const ShiftedBasis& basis) {
  if (k < 0) throw ValidationError("moment order must be nonnegative");
  if (w1.is_gaussian() && w2.is_gaussian())
    return gaussian_product_moments(w1.as_gaussian(), w2.as_gaussian(), k, basis)[k];

  auto integrand = [&](double x) { return int_pow(basis.to_local(x), k) * w1(x) * w2(x); };
  Estimate est;
  std::ostringstream where;
  if (w1.is_gaussian() || w2.is_gaussian()) {
    const Gaussian& g = w1.is_gaussian() ? w1.as_gaussian() : w2.as_gaussian();
    const Weight& other = w1.is_gaussian() ? w2 : w1;
    const Interval win{g.center - 14.0 * g.sigma(), g.center + 14.0 * g.sigma()};
    const auto& sup = other.as_tabulated().support;
    if (sup.lo <= win.lo && sup.hi >= win.hi) {
      auto smooth = [&](double x) { return g.amplitude * int_pow(basis.to_local(x), k) * other(x); };
      est = integrate_gaussian_weighted(smooth, g.center, g.variance);
      where << "Gauss-Hermite";
    } else {
      const double lo = std::max(sup.lo, win.lo), hi = std::min(sup.hi, win.hi);
      if (!(hi > lo)) return {0.0, 0.0};
      est = integrate_interval(integrand, lo, hi);
      where << "Gauss-Legendre";
    }
  } else {
    const Interval a = w1.window(), b = w2.window();
    const double lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
    if (!(hi > lo)) return {0.0, 0.0};
    est = integrate_interval(integrand, lo, hi);
    where << "Gauss-Legendre";
  }
  if (!est.converged) {
    where << " quadrature for moment order " << k << " did not converge (achieved " << est.error << ")";
    throw AccuracyFailure(where.str(), est.error);
  }
  return {est.value, est.error};
}

struct ProductMomentTable::Data {
  WeightFamily first, second;
  ShiftedBasis basis;
  Precision precision = Precision::Double;
  int max_order = 0;
  std::vector<MomentValue> values;
};

int ProductMomentTable::first_size() const {
  return swapped_ ? data_->second.size() : data_->first.size();
}
int ProductMomentTable::second_size() const {
  return swapped_ ? data_->first.size() : data_->second.size();
}
int ProductMomentTable::max_order() const { return data_->max_order; }
Precision ProductMomentTable::precision() const { return data_->precision; }
const ShiftedBasis& ProductMomentTable::basis() const { return data_->basis; }
const WeightFamily& ProductMomentTable::first() const { return swapped_ ? data_->second : data_->first; }
const WeightFamily& ProductMomentTable::second() const { return swapped_ ? data_->first : data_->second; }

std::size_t ProductMomentTable::index(int j, int l, int k) const {
  if (swapped_) std::swap(j, l);
  if (j < 0 || j >= data_->first.size() || l < 0 || l >= data_->second.size())
    throw ValidationError("moment table index out of range");
  if (k < 0 || k > data_->max_order) {
    std::ostringstream os;
    os << "moment order " << k << " missing from table (max order " << data_->max_order << ")";
    throw ValidationError(os.str());
  }
  return (static_cast<std::size_t>(j) * data_->second.size() + l) * (data_->max_order + 1) + k;
}

double ProductMomentTable::operator()(int j, int l, int k) const { return data_->values[index(j, l, k)].value; }

double ProductMomentTable::error_bound(int j, int l, int k) const {
  return data_->values[index(j, l, k)].error_bound;
}

double ProductMomentTable::max_error_bound() const {
  double e = 0.0;
  for (const auto& v : data_->values) e = std::max(e, v.error_bound);
  return e;
}

ProductMomentTable ProductMomentTable::swapped() const {
  ProductMomentTable t = *this;
  t.swapped_ = !swapped_;
  return t;
}

ProductMomentTable build_moment_table(const WeightFamily& w1, const WeightFamily& w2,
                                      int max_order, const MomentOptions& options) {
  if (w1.size() == 0 || w2.size() == 0) throw ValidationError("weight families must be nonempty");
  if (max_order < 0) throw ValidationError("maximum moment order must be nonnegative");
  auto data = std::make_shared<ProductMomentTable::Data>();
  data->first = w1;
  data->second = w2;
  data->basis = options.basis.value_or(ShiftedBasis::fit(w1, w2));
  data->precision = options.precision;
  data->max_order = max_order;
  data->values.resize(static_cast<std::size_t>(w1.size()) * w2.size() * (max_order + 1));
  std::size_t pos = 0;
  for (int j = 0; j < w1.size(); ++j) {
    for (int l = 0; l < w2.size(); ++l) {
      if (w1[j].is_gaussian() && w2[l].is_gaussian()) {
        auto ms = gaussian_product_moments(w1[j].as_gaussian(), w2[l].as_gaussian(), max_order, data->basis);
        std::copy(ms.begin(), ms.end(), data->values.begin() + pos);
        pos += ms.size();
        continue;
      }
      for (int k = 0; k <= max_order; ++k) {
        try {
          data->values[pos++] = product_moment(w1[j], w2[l], k, data->basis);
        } catch (const AccuracyFailure& e) {
          std::ostringstream os;
          os << "moment (j=" << j + 1 << ", l=" << l + 1 << ", k=" << k << "): " << e.what();
          throw AccuracyFailure(os.str(), e.achieved_bound());
        }
      }
    }
  }
  ProductMomentTable table;
  table.data_ = std::move(data);
  return table;
}

}  // namespace mixedmop
