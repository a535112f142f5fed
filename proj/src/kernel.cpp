#include "mixedmop/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linalg.hpp"

namespace mixedmop {

int kernel_moment_order(const MultiIndexPair& pair) {
  return pair.n().max_part() + pair.m().max_part() + 2;
}

namespace {

std::vector<BasisLabel> labels(const MultiIndex& n, const std::vector<int>& order) {
  std::vector<BasisLabel> raw;
  for (int l = 0; l < n.length(); ++l)
    for (int i = 0; i < n[l]; ++i) raw.push_back({l, i});
  if (order.empty()) return raw;
  if (static_cast<int>(order.size()) != n.total())
    throw ValidationError("basis ordering must be a permutation of 0..|n|-1");
  std::vector<bool> seen(raw.size(), false);
  std::vector<BasisLabel> out;
  for (int a : order) {
    if (a < 0 || a >= n.total() || seen[a])
      throw ValidationError("basis ordering must be a permutation of 0..|n|-1");
    seen[a] = true;
    out.push_back(raw[a]);
  }
  return out;
}

Eigen::VectorXd basis_values(const std::vector<BasisLabel>& labels, const WeightFamily& w,
                             const ShiftedBasis& basis, double x) {
  const double u = basis.to_local(x);
  std::vector<double> wv(w.size());
  for (int l = 0; l < w.size(); ++l) wv[l] = w[l](x);
  Eigen::VectorXd out(labels.size());
  for (std::size_t a = 0; a < labels.size(); ++a)
    out(a) = std::pow(u, labels[a].power) * wv[labels[a].weight];
  return out;
}

void require_balanced(const MultiIndexPair& pair) {
  if (pair.relation() != PairRelation::RhBalanced)
    throw ValidationError("kernel construction needs a balanced pair with |n| = |m|");
}

}  // namespace

Eigen::VectorXd BiorthogonalSystem::f_values(double x) const {
  return basis_values(f_basis_, w1_, basis_, x);
}

Eigen::VectorXd BiorthogonalSystem::g_values(double y) const {
  return basis_values(g_basis_, w2_, basis_, y);
}

Eigen::VectorXd BiorthogonalSystem::phi_values(double x) const { return transform_ * f_values(x); }

Interval BiorthogonalSystem::support() const {
  Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto* fam : {&w1_, &w2_})
    for (const auto& w : *fam) {
      const auto win = w.window();
      out.lo = std::min(out.lo, win.lo);
      out.hi = std::max(out.hi, win.hi);
    }
  return out;
}

BiorthogonalSystem build_biorthogonal(const MultiIndexPair& pair, const ProductMomentTable& table,
                                      const std::vector<int>& f_order,
                                      const std::vector<int>& g_order) {
  require_balanced(pair);
  BiorthogonalSystem sys;
  sys.pair_ = pair;
  sys.f_basis_ = labels(pair.n(), f_order);
  sys.g_basis_ = labels(pair.m(), g_order);
  sys.w1_ = table.first();
  sys.w2_ = table.second();
  sys.basis_ = table.basis();
  const auto report = check_normality(pair, table);
  const auto inv = detail::gram_inverse(table, pair.n(), pair.m(), f_order, g_order);
  if (inv.rank.rank < pair.n().total())
    throw DegeneratePair("Gram matrix is singular: " + report.summary(), report);
  sys.gram_ = inv.gram;
  sys.transform_ = inv.inverse;
  sys.condition_ = inv.rank.condition;
  sys.inverse_residual_ = inv.residual;
  return sys;
}

double kernel_direct(const BiorthogonalSystem& sys, double x, double y) {
  return sys.g_values(y).dot(sys.phi_values(x));
}

int CdKernelData::solve_count() const {
  return static_cast<int>(type2_plus.size() + type1_minus_swapped.size() + type1_minus.size() +
                          type2_plus_swapped.size());
}

double CdKernelData::max_residual() const {
  double r = 0.0;
  for (const auto* group : {&type2_plus, &type1_minus_swapped, &type1_minus, &type2_plus_swapped})
    for (const auto& s : *group) r = std::max(r, s.residual());
  return r;
}

CdKernelData build_cd_data(const MultiIndexPair& pair, const ProductMomentTable& table) {
  require_balanced(pair);
  const MultiIndex& n = pair.n();
  const MultiIndex& m = pair.m();
  if (n.length() != table.first_size() || m.length() != table.second_size())
    throw ValidationError("pair " + pair.str() + " does not match the weight families of the table");
  if (table.max_order() < kernel_moment_order(pair))
    throw ValidationError("moment order " + std::to_string(kernel_moment_order(pair)) +
                          " missing from table (max " + std::to_string(table.max_order()) + ")");
  const auto swapped = table.swapped();
  CdKernelData data;
  data.pair = pair;
  data.basis = table.basis();
  data.diagonal_band = 1e-4 * table.basis().scale;

  auto solve = [](const char* what, int k, const MultiIndexPair& p, const ProductMomentTable& t,
                  const Normalization& norm) {
    try {
      return solve_mixed(p, t, norm);
    } catch (const NotNormalizable& e) {
      throw NotNormalizable(std::string(what) + " k=" + std::to_string(k + 1) + ": " + e.what(),
                            e.report());
    }
  };
  for (int j = 0; j < n.length(); ++j) {
    data.type2_plus.push_back(solve("orientation (w1,w2) type II", j,
                                    MultiIndexPair::mop(n.plus_unit(j), m), table,
                                    Normalization::type_two(j)));
    data.type1_minus_swapped.push_back(solve("orientation (w2,w1) type I", j,
                                             MultiIndexPair::mop(m, n.minus_unit(j)), swapped,
                                             Normalization::type_one(j)));
  }
  for (int k = 0; k < m.length(); ++k) {
    data.type1_minus.push_back(solve("orientation (w1,w2) type I", k,
                                     MultiIndexPair::mop(n, m.minus_unit(k)), table,
                                     Normalization::type_one(k)));
    data.type2_plus_swapped.push_back(solve("orientation (w2,w1) type II", k,
                                            MultiIndexPair::mop(m.plus_unit(k), n), swapped,
                                            Normalization::type_two(k)));
  }
  return data;
}

double cd_numerator(const CdKernelData& data, double x, double y) {
  double sum = 0.0;
  for (std::size_t j = 0; j < data.type2_plus.size(); ++j)
    sum += data.type2_plus[j].form(x) * data.type1_minus_swapped[j].form(y);
  for (std::size_t k = 0; k < data.type1_minus.size(); ++k)
    sum -= data.type1_minus[k].form(x) * data.type2_plus_swapped[k].form(y);
  return sum;
}

double kernel_cd(const CdKernelData& data, double x, double y) {
  if (std::abs(x - y) <= data.diagonal_band)
    throw DiagonalRegion("|x - y| = " + std::to_string(std::abs(x - y)) +
                         " is inside the diagonal band; use the diagonal formula");
  return cd_numerator(data, x, y) / (x - y);
}

double kernel_cd_diagonal(const CdKernelData& data, double x) {
  double sum = 0.0;
  for (std::size_t j = 0; j < data.type2_plus.size(); ++j)
    sum += data.type2_plus[j].form_derivative(x) * data.type1_minus_swapped[j].form(x);
  for (std::size_t k = 0; k < data.type1_minus.size(); ++k)
    sum -= data.type1_minus[k].form_derivative(x) * data.type2_plus_swapped[k].form(x);
  return sum;
}

Estimate kernel_trace(const BiorthogonalSystem& sys) {
  const auto s = sys.support();
  return integrate_interval([&](double x) { return kernel_direct(sys, x, x); }, s.lo, s.hi, 1e-14,
                            1e-13);
}

double idempotence_residual(const BiorthogonalSystem& sys, const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  const auto s = sys.support();
  const int N = sys.dimension();
  // \int K(x,z) K(z,y) dz = phi(x)^T M C^T g(y), M = sum_i w_i g(z_i) f(z_i)^T
  auto moment = [&](int panels) {
    const auto& rule = gauss_legendre(20);
    const double h = (s.hi - s.lo) / panels;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    for (int p = 0; p < panels; ++p) {
      const double mid = s.lo + (p + 0.5) * h;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double z = mid + 0.5 * h * rule.nodes[i];
        M.noalias() += (0.5 * h * rule.weights[i]) * sys.g_values(z) * sys.f_values(z).transpose();
      }
    }
    return M;
  };
  Eigen::MatrixXd M = moment(16);
  for (int panels = 32; panels <= 4096; panels *= 2) {
    const Eigen::MatrixXd next = moment(panels);
    const double change = (next - M).cwiseAbs().maxCoeff();
    M = next;
    if (change <= 1e-14 * std::max(1.0, M.cwiseAbs().maxCoeff())) break;
  }
  const Eigen::MatrixXd right = M * sys.transform().transpose();
  double worst = 0.0;
  for (double x : xs) {
    const Eigen::VectorXd phi = sys.phi_values(x);
    for (double y : ys) {
      const Eigen::VectorXd g = sys.g_values(y);
      const double composed = phi.dot(right * g);
      worst = std::max(worst, std::abs(composed - g.dot(phi)));
    }
  }
  return worst;
}

}  // namespace mixedmop
