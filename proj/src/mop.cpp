#include "mixedmop/mop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "linalg.hpp"

namespace mixedmop {

MultiIndex::MultiIndex(std::vector<int> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw ValidationError("multi-index needs at least one part");
  for (int v : parts_)
    if (v < 0) throw ValidationError("multi-index parts must be nonnegative, got " + str());
}

int MultiIndex::total() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }

int MultiIndex::max_part() const {
  return parts_.empty() ? 0 : *std::max_element(parts_.begin(), parts_.end());
}

bool MultiIndex::all_positive() const {
  return std::all_of(parts_.begin(), parts_.end(), [](int v) { return v >= 1; });
}

MultiIndex MultiIndex::plus_unit(int k) const {
  if (k < 0 || k >= length()) throw ValidationError("unit index out of range");
  auto p = parts_;
  ++p[k];
  return MultiIndex(std::move(p));
}

MultiIndex MultiIndex::minus_unit(int k) const {
  if (k < 0 || k >= length()) throw ValidationError("unit index out of range");
  if (parts_[k] == 0) throw ValidationError("cannot lower a zero part of " + str());
  auto p = parts_;
  --p[k];
  return MultiIndex(std::move(p));
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < parts_.size(); ++i) os << (i ? "," : "") << parts_[i];
  os << ')';
  return os.str();
}

MultiIndexPair::MultiIndexPair(MultiIndex n, MultiIndex m, PairRelation relation)
    : n_(std::move(n)), m_(std::move(m)), relation_(relation) {
  if (n_.length() == 0 || m_.length() == 0) throw ValidationError("multi-index needs at least one part");
  if (relation_ == PairRelation::MopDefining) {
    if (n_.total() != m_.total() + 1)
      throw ValidationError("defining pair needs |n| = |m| + 1, got " + str());
  } else {
    if (n_.total() != m_.total()) throw ValidationError("balanced pair needs |n| = |m|, got " + str());
    if (!n_.all_positive() || !m_.all_positive())
      throw ValidationError("balanced pair needs every part >= 1, got " + str());
  }
}

MultiIndexPair MultiIndexPair::swapped() const {
  if (relation_ != PairRelation::RhBalanced)
    throw ValidationError("only balanced pairs can be swapped");
  return MultiIndexPair(m_, n_, relation_);
}

std::string MultiIndexPair::str() const { return "n=" + n_.str() + " m=" + m_.str(); }

std::string Normalization::str() const {
  return std::string(kind == Kind::TypeI ? "type I" : "type II") + " k=" + std::to_string(index + 1);
}

bool NormalityReport::normal() const {
  const int want = pair.relation() == PairRelation::MopDefining ? 1 : 0;
  return f_dimension_ok && kernel_dimension == want;
}

bool NormalityReport::admissible(const Normalization& norm) const {
  const auto& v = norm.kind == Normalization::Kind::TypeI ? typeI_admissible : typeII_admissible;
  return norm.index >= 0 && norm.index < static_cast<int>(v.size()) && v[norm.index];
}

std::string NormalityReport::summary() const {
  std::ostringstream os;
  os << pair.str() << ": kernel dimension " << kernel_dimension << ", F dimension "
     << (f_dimension_ok ? "ok" : "deficient") << ", condition " << condition_estimate;
  auto list = [&](const char* name, const std::vector<bool>& v) {
    os << ", " << name << " [";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << (v[i] ? "yes" : "no");
    os << ']';
  };
  list("type I admissible", typeI_admissible);
  list("type II admissible", typeII_admissible);
  return os.str();
}

MixedMopSolution::MixedMopSolution(std::vector<Eigen::VectorXd> coefficients,
                                   Normalization normalization, MultiIndexPair pair,
                                   double residual, WeightFamily weights, ShiftedBasis basis)
    : coefficients_(std::move(coefficients)),
      normalization_(normalization),
      pair_(std::move(pair)),
      residual_(residual),
      weights_(std::move(weights)),
      basis_(basis) {}

namespace {

template <class T>
T horner(const Eigen::VectorXd& a, T u) {
  T r = 0.0;
  for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) r = r * u + a(i);
  return r;
}

}  // namespace

double MixedMopSolution::polynomial(int j, double x) const {
  return horner(coefficients_.at(j), basis_.to_local(x));
}

std::complex<double> MixedMopSolution::polynomial(int j, std::complex<double> z) const {
  return horner(coefficients_.at(j), (z - basis_.center) / basis_.scale);
}

double MixedMopSolution::polynomial_derivative(int j, double x) const {
  const auto& a = coefficients_.at(j);
  const double u = basis_.to_local(x);
  double r = 0.0;
  for (int i = static_cast<int>(a.size()) - 1; i >= 1; --i) r = r * u + i * a(i);
  return r / basis_.scale;
}

double MixedMopSolution::form(double x) const {
  double sum = 0.0;
  for (int j = 0; j < weights_.size(); ++j) sum += polynomial(j, x) * weights_[j](x);
  return sum;
}

double MixedMopSolution::form_derivative(double x) const {
  double sum = 0.0;
  for (int j = 0; j < weights_.size(); ++j)
    sum += polynomial_derivative(j, x) * weights_[j](x) +
           polynomial(j, x) * weights_[j].derivative(x);
  return sum;
}

std::vector<std::vector<double>> MixedMopSolution::monomial_coefficients() const {
  std::vector<std::vector<double>> out;
  const double c = basis_.center, s = basis_.scale;
  for (const auto& a : coefficients_) {
    const int d = static_cast<int>(a.size());
    std::vector<double> x(d, 0.0);
    for (int i = 0; i < d; ++i) {
      const double lead = a(i) / std::pow(s, i);
      double binom = 1.0;
      for (int r = i; r >= 0; --r) {
        // term C(i, r) x^r (-c)^(i-r)
        x[r] += lead * binom * std::pow(-c, i - r);
        binom = binom * r / (i - r + 1);
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

double MixedMopSolution::leading_coefficient(int j) const {
  const auto& a = coefficients_.at(j);
  if (a.size() == 0) return 0.0;
  return a(a.size() - 1) / std::pow(basis_.scale, static_cast<double>(a.size() - 1));
}

int required_moment_order(const MultiIndex& n, const MultiIndex& m) {
  return n.max_part() + m.max_part() + 1;
}

namespace {

void check_table(const MultiIndex& n, const MultiIndex& m, const ProductMomentTable& table,
                 int order) {
  if (n.length() != table.first_size() || m.length() != table.second_size())
    throw ValidationError("pair " + n.str() + "/" + m.str() +
                          " does not match the weight families of the moment table");
  if (order > table.max_order())
    throw ValidationError("moment order " + std::to_string(order) +
                          " missing from table (max " + std::to_string(table.max_order()) + ")");
}

}  // namespace

Eigen::MatrixXd assemble_orthogonality_matrix(const MultiIndex& n, const MultiIndex& m,
                                              const ProductMomentTable& table) {
  check_table(n, m, table, std::max(0, n.max_part() + m.max_part() - 2));
  Eigen::MatrixXd a(m.total(), n.total());
  int row = 0;
  for (int k = 0; k < m.length(); ++k)
    for (int j = 0; j < m[k]; ++j, ++row) {
      int col = 0;
      for (int l = 0; l < n.length(); ++l)
        for (int i = 0; i < n[l]; ++i, ++col) a(row, col) = table(l, k, i + j);
    }
  return a;
}

Eigen::MatrixXd assemble_orthogonality_matrix(const MultiIndexPair& pair,
                                              const ProductMomentTable& table) {
  return assemble_orthogonality_matrix(pair.n(), pair.m(), table);
}

NormalityReport check_normality(const MultiIndexPair& pair, const ProductMomentTable& table) {
  const MultiIndex& n = pair.n();
  const MultiIndex& m = pair.m();
  const bool defining = pair.relation() == PairRelation::MopDefining;
  check_table(n, m, table,
              defining ? required_moment_order(n, m) : std::max(0, n.max_part() + m.max_part() - 2));

  NormalityReport report;
  report.pair = pair;
  const auto main = detail::system_rank(table, n, m);
  report.kernel_dimension = main.kernel_dimension();
  report.condition_estimate = main.condition;

  report.f_dimension_ok = detail::sampled_rank(table.first(), n, table.basis()) == n.total();

  if (defining) {
    for (int k = 0; k < m.length(); ++k)
      report.typeI_admissible.push_back(
          detail::system_rank(table, n, m.plus_unit(k)).rank == n.total());
    for (int l = 0; l < n.length(); ++l) {
      if (n[l] == 0) {
        report.typeII_admissible.push_back(false);
        continue;
      }
      report.typeII_admissible.push_back(
          detail::system_rank(table, n.minus_unit(l), m).rank == n.total() - 1);
    }
  }
  return report;
}

MixedMopSolution solve_mixed(const MultiIndexPair& pair, const ProductMomentTable& table,
                             const Normalization& normalization) {
  if (pair.relation() != PairRelation::MopDefining)
    throw ValidationError("solve_mixed needs a pair with |n| = |m| + 1");
  const int range = normalization.kind == Normalization::Kind::TypeI ? pair.m().length()
                                                                     : pair.n().length();
  if (normalization.index < 0 || normalization.index >= range)
    throw ValidationError("normalisation index out of range: " + normalization.str());

  auto report = check_normality(pair, table);
  if (!report.normal())
    throw NotNormalizable("pair is not normal: " + report.summary(), report);
  if (!report.admissible(normalization))
    throw NotNormalizable(normalization.str() + " is not admissible: " + report.summary(), report);

  const auto solved = detail::solve_normalized(table, pair.n(), pair.m(), normalization);
  std::vector<Eigen::VectorXd> parts;
  int offset = 0;
  for (int l = 0; l < pair.n().length(); ++l) {
    parts.push_back(solved.coefficients.segment(offset, pair.n()[l]));
    offset += pair.n()[l];
  }
  return MixedMopSolution(std::move(parts), normalization, pair, solved.residual, table.first(),
                          table.basis());
}

Eigen::VectorXd null_direction(const MultiIndexPair& pair, const ProductMomentTable& table) {
  check_table(pair.n(), pair.m(), table, std::max(0, pair.n().max_part() + pair.m().max_part() - 2));
  return detail::system_rank(table, pair.n(), pair.m()).null_vector;
}

Weight truncated_lebesgue(const WeightFamily& weights) {
  const auto basis = ShiftedBasis::fit(weights, weights);
  return Weight::box(basis.center - 12.0 * basis.scale, basis.center + 12.0 * basis.scale);
}

MixedMopSolution solve_type1_classical(const WeightFamily& weights, const MultiIndex& n,
                                       Precision precision) {
  if (n.length() != weights.size())
    throw ValidationError("multi-index length must match the number of weights");
  if (n.total() < 1) throw ValidationError("type I forms need |n| >= 1");
  const MultiIndex m{n.total() - 1};
  MomentOptions opts;
  opts.basis = ShiftedBasis::fit(weights, weights);
  opts.precision = precision;
  const auto table = build_moment_table(weights, WeightFamily{truncated_lebesgue(weights)},
                                        required_moment_order(n, m), opts);
  return solve_mixed(MultiIndexPair::mop(n, m), table, Normalization::type_one(0));
}

MixedMopSolution solve_type2_classical(const WeightFamily& weights, const MultiIndex& m,
                                       Precision precision) {
  if (m.length() != weights.size())
    throw ValidationError("multi-index length must match the number of weights");
  const MultiIndex n{m.total() + 1};
  MomentOptions opts;
  opts.basis = ShiftedBasis::fit(weights, weights);
  opts.precision = precision;
  const auto table = build_moment_table(WeightFamily{truncated_lebesgue(weights)}, weights,
                                        required_moment_order(n, m), opts);
  return solve_mixed(MultiIndexPair::mop(n, m), table, Normalization::type_two(0));
}

}  // namespace mixedmop
