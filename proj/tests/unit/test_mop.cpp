#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>

#include "mixedmop/mop.hpp"
#include "common/oracle.hpp"

using namespace mixedmop;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

ProductMomentTable table_for(const WeightFamily& w1, const WeightFamily& w2, const MultiIndex& n,
                             const MultiIndex& m, Precision precision = Precision::Double) {
  MomentOptions opts;
  opts.precision = precision;
  return build_moment_table(w1, w2, required_moment_order(n, m) + 1, opts);
}

// Orthogonality matrix in the original variable from Gauss-Kronrod integrals.
Eigen::MatrixXd oracle_matrix(const WeightFamily& w1, const WeightFamily& w2, const MultiIndex& n,
                              const MultiIndex& m, const ShiftedBasis& b) {
  Eigen::MatrixXd a(m.total(), n.total());
  int row = 0;
  for (int k = 0; k < m.length(); ++k)
    for (int j = 0; j < m[k]; ++j, ++row) {
      int col = 0;
      for (int l = 0; l < n.length(); ++l)
        for (int i = 0; i < n[l]; ++i, ++col)
          a(row, col) = oracle::integrate(
              [&](double x) { return std::pow(b.to_local(x), i + j) * w1[l](x) * w2[k](x); }, -15, 15);
    }
  return a;
}

Eigen::VectorXd stacked(const MixedMopSolution& s) {
  Eigen::VectorXd v(s.pair().n().total());
  int off = 0;
  for (const auto& c : s.coefficients()) {
    v.segment(off, c.size()) = c;
    off += c.size();
  }
  return v;
}

// Angle between the lines spanned by a and b, from the chord length.
double angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ua = a.normalized();
  const Eigen::VectorXd ub = a.dot(b) < 0 ? Eigen::VectorXd(-b.normalized()) : b.normalized();
  return 2 * std::asin(std::min(1.0, (ua - ub).norm() / 2));
}

WeightFamily brownian_family(const std::vector<double>& centers, double variance) {
  std::vector<Weight> w;
  for (double c : centers) w.push_back(Weight::gaussian(c, variance, 1.0 / std::sqrt(2 * std::numbers::pi * variance)));
  return WeightFamily(w);
}

}  // namespace

TEST_CASE("multi-index bookkeeping") {
  const MultiIndex n{2, 1, 3};
  CHECK(n.total() == 6);
  CHECK(n.length() == 3);
  CHECK(n.plus_unit(1) == MultiIndex{2, 2, 3});
  CHECK(n.minus_unit(2) == MultiIndex{2, 1, 2});
  CHECK_THROWS_AS(MultiIndex({1, -1}), ValidationError);
  CHECK_THROWS_AS(MultiIndex(std::vector<int>{}), ValidationError);
  CHECK_THROWS_AS(MultiIndex{0}.minus_unit(0), ValidationError);
  CHECK_NOTHROW(MultiIndexPair::mop({2}, {1}));
  CHECK_THROWS_AS(MultiIndexPair::mop({2}, {2}), ValidationError);
  CHECK_THROWS_AS(MultiIndexPair::balanced({2, 0}, {2}), ValidationError);
  CHECK(MultiIndexPair::balanced({1, 2}, {3}).swapped().n() == MultiIndex{3});
}

TEST_CASE("orthogonality matrix examples") {
  const auto w = Weight::gaussian(0, 1, 1);
  const auto t = build_moment_table({w}, {w}, 4, {ShiftedBasis{0, 1}, Precision::Double});
  const auto a = assemble_orthogonality_matrix(MultiIndexPair::mop({2}, {1}), t);
  REQUIRE(a.rows() == 1);
  REQUIRE(a.cols() == 2);
  CHECK(a(0, 0) == doctest::Approx(kSqrtPi).epsilon(1e-15));
  CHECK(a(0, 1) == 0.0);

  const WeightFamily w1{Weight::gaussian(-1, 1), Weight::gaussian(1, 1)};
  const WeightFamily w2{Weight::gaussian(0, 1)};
  const auto t2 = build_moment_table(w1, w2, 4);
  const auto b = assemble_orthogonality_matrix(MultiIndexPair::mop({1, 1}, {1}), t2);
  const auto ref = oracle_matrix(w1, w2, {1, 1}, {1}, t2.basis());
  CHECK((b - ref).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(b(0, 0) == doctest::Approx(b(0, 1)).epsilon(1e-14));

  const auto bigger = build_moment_table(w1, w2, 12);
  CHECK(assemble_orthogonality_matrix({3, 4}, {6}, bigger).rows() == 6);
  CHECK(assemble_orthogonality_matrix({3, 4}, {6}, bigger).cols() == 7);
  CHECK_THROWS_AS(assemble_orthogonality_matrix({3, 4}, {6}, t2), ValidationError);
}

TEST_CASE("small solves") {
  const auto w = Weight::gaussian(0, 1, 1);
  const auto t = build_moment_table({w}, {w}, 4);
  const auto s = solve_mixed(MultiIndexPair::mop({2}, {1}), t, Normalization::type_two(0));
  const auto c = s.monomial_coefficients()[0];
  CHECK(c[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(c[0]) < 1e-15);
  CHECK(s.residual() < 1e-14);

  const auto one = solve_mixed(MultiIndexPair::mop({1}, {0}), t, Normalization::type_two(0));
  CHECK(one.polynomial(0, 0.37) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two-by-two configuration against a null-space oracle") {
  const WeightFamily w1{Weight::gaussian(-1, 0.5), Weight::gaussian(1, 0.5)};
  const WeightFamily w2{Weight::gaussian(-0.5, 0.5), Weight::gaussian(0.5, 0.5)};
  const MultiIndex n{2, 2}, m{2, 1};
  const auto t = table_for(w1, w2, n, m);
  const auto pair = MultiIndexPair::mop(n, m);
  const auto ref = oracle_matrix(w1, w2, n, m, t.basis());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ref, Eigen::ComputeFullV);
  const Eigen::VectorXd null = svd.matrixV().col(3);

  for (auto norm : {Normalization::type_two(0), Normalization::type_two(1), Normalization::type_one(0),
                    Normalization::type_one(1)}) {
    const auto s = solve_mixed(pair, t, norm);
    CHECK(s.residual() < 1e-10);
    CHECK(angle(stacked(s), null) < 1e-8);
    // orthogonality recomputed by quadrature, scale-normalised
    for (int k = 0; k < m.length(); ++k)
      for (int j = 0; j < m[k]; ++j) {
        auto f = [&](double x) { return s.form(x) * std::pow(x, j) * w2[k](x); };
        const double v = oracle::integrate(f, -15, 15);
        CHECK(std::abs(v) < 1e-8 * std::max(1.0, oracle::integrate_abs(f, -15, 15)));
      }
    if (norm.kind == Normalization::Kind::TypeII) {
      const int k = norm.index;
      CHECK(s.leading_coefficient(k) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(s.coefficients()[k].size() == n[k]);
    } else {
      const int k = norm.index;
      const double v = oracle::integrate(
          [&](double x) { return s.form(x) * std::pow(x, m[k]) * w2[k](x); }, -15, 15);
      CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("classical reductions") {
  const auto w = Weight::gaussian(0, 0.5, 1);  // e^{-x^2}
  const auto q = solve_type1_classical({w}, {1});
  CHECK(q.polynomial(0, 0.0) == doctest::Approx(1 / kSqrtPi).epsilon(1e-12));

  const auto even = solve_type1_classical({w}, {2});
  const auto ce = even.monomial_coefficients()[0];
  CHECK(std::abs(ce[0]) < 1e-12 * std::abs(ce[1]));

  const auto p1 = solve_type2_classical({w}, {1});
  CHECK(std::abs(p1.polynomial(0, 0.0)) < 1e-12);
  CHECK(p1.polynomial(0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

  // Gram-Schmidt on the moments {sqrt(pi), 0, sqrt(pi)/2}: P2 = x^2 - m2/m0
  const double m0 = kSqrtPi, m2 = kSqrtPi / 2;
  const auto p2 = solve_type2_classical({w}, {2});
  const auto c2 = p2.monomial_coefficients()[0];
  CHECK(c2[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(c2[1]) < 1e-12);
  CHECK(c2[0] == doctest::Approx(-m2 / m0).epsilon(1e-12));

  CHECK_THROWS_AS(solve_type2_classical({w, w}, {1, 1}), NotNormalizable);

  // Angelesco-like pair of separated weights
  const WeightFamily ang{Weight::gaussian(-2, 0.3), Weight::gaussian(2, 0.3)};
  const auto a = solve_type1_classical(ang, {2, 2});
  CHECK(a.residual() < 1e-10);
  for (int j = 0; j <= 2; ++j) {
    auto f = [&](double x) { return a.form(x) * std::pow(x, j); };
    CHECK(std::abs(oracle::integrate(f, -12, 12)) < 1e-8 * oracle::integrate_abs(f, -12, 12));
  }
  CHECK(oracle::integrate([&](double x) { return a.form(x) * std::pow(x, 3); }, -12, 12) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("normality reports") {
  const auto w = Weight::gaussian(0, 1, 1);
  const auto t = build_moment_table({w}, {w}, 4);
  const auto r = check_normality(MultiIndexPair::mop({2}, {1}), t);
  CHECK(r.normal());
  CHECK(r.kernel_dimension == 1);
  CHECK(r.f_dimension_ok);
  CHECK(r.admissible(Normalization::type_one(0)));
  CHECK(r.admissible(Normalization::type_two(0)));

  const auto dup = build_moment_table({Weight::gaussian(0, 1), Weight::gaussian(1, 1)}, {w, w}, 6);
  const auto d = check_normality(MultiIndexPair::mop({2, 1}, {1, 1}), dup);
  CHECK_FALSE(d.normal());
  CHECK(d.kernel_dimension >= 2);
  CHECK_THROWS_AS(solve_mixed(MultiIndexPair::mop({2, 1}, {1, 1}), dup, Normalization::type_two(0)),
                  NotNormalizable);
  try {
    solve_mixed(MultiIndexPair::mop({2, 1}, {1, 1}), dup, Normalization::type_two(0));
  } catch (const NotNormalizable& e) {
    CHECK(e.report().kernel_dimension == d.kernel_dimension);
    CHECK(std::string(e.code()) == "not_normalizable");
  }
}

TEST_CASE("Brownian families are normal up to |n| = 8") {
  std::mt19937_64 rng(3);
  for (int p = 1; p <= 3; ++p)
    for (int q = 1; q <= 3; ++q) {
      std::vector<double> a, b;
      for (int j = 0; j < p; ++j) a.push_back(-1.0 + 2.0 * j / std::max(1, p - 1) * (p > 1));
      for (int j = 0; j < q; ++j) b.push_back(-0.8 + 1.6 * j / std::max(1, q - 1) * (q > 1));
      const auto w1 = brownian_family(a, 0.4), w2 = brownian_family(b, 0.6);
      const auto t = build_moment_table(w1, w2, 18);
      for (int trial = 0; trial < 6; ++trial) {
        std::uniform_int_distribution<int> size(std::max(p, q + 1), 8);
        const int N = size(rng);
        std::vector<int> n(p, 1), m(q, 1);
        for (int r = p; r < N; ++r) ++n[std::uniform_int_distribution<int>(0, p - 1)(rng)];
        for (int r = q; r < N - 1; ++r) ++m[std::uniform_int_distribution<int>(0, q - 1)(rng)];
        const auto rep = check_normality(MultiIndexPair::mop(MultiIndex(n), MultiIndex(m)), t);
        CHECK_MESSAGE(rep.normal(), rep.summary());
        for (int k = 0; k < q; ++k) CHECK(rep.admissible(Normalization::type_one(k)));
        for (int k = 0; k < p; ++k) CHECK(rep.admissible(Normalization::type_two(k)));
      }
    }
}

TEST_CASE("rank is invariant under change of basis") {
  const WeightFamily w1{Weight::gaussian(-1, 0.5), Weight::gaussian(1, 0.5)};
  const WeightFamily w2{Weight::gaussian(-0.5, 0.5), Weight::gaussian(0.5, 0.5)};
  const auto pair = MultiIndexPair::mop({3, 2}, {2, 2});
  for (ShiftedBasis b : {ShiftedBasis{0, 1}, ShiftedBasis{0.7, 2.0}, ShiftedBasis{-0.3, 0.5}}) {
    const auto t = build_moment_table(w1, w2, 8, {b, Precision::Double});
    CHECK(check_normality(pair, t).kernel_dimension == 1);
  }
}

TEST_CASE("normalisations give proportional solutions") {
  const WeightFamily w1{Weight::gaussian(-1, 0.5), Weight::gaussian(0.2, 0.5), Weight::gaussian(1, 0.5)};
  const WeightFamily w2{Weight::gaussian(-0.3, 0.4), Weight::gaussian(0.6, 0.4)};
  const auto pair = MultiIndexPair::mop({2, 2, 2}, {3, 2});
  const auto t = build_moment_table(w1, w2, 10);
  const auto ref = stacked(solve_mixed(pair, t, Normalization::type_two(1)));
  CHECK(angle(stacked(solve_mixed(pair, t, Normalization::type_one(0))), ref) < 1e-8);
  CHECK(angle(stacked(solve_mixed(pair, t, Normalization::type_one(1))), ref) < 1e-8);
  CHECK(angle(null_direction(pair, t), ref) < 1e-8);
}

TEST_CASE("extended precision agrees with double") {
  const WeightFamily w1{Weight::gaussian(-1, 0.5), Weight::gaussian(1, 0.5)};
  const WeightFamily w2{Weight::gaussian(-0.5, 0.5), Weight::gaussian(0.5, 0.5)};
  const MultiIndex n{3, 3}, m{3, 2};
  const auto pair = MultiIndexPair::mop(n, m);
  const auto td = table_for(w1, w2, n, m);
  const auto te = table_for(w1, w2, n, m, Precision::Extended);
  const auto sd = solve_mixed(pair, td, Normalization::type_two(0));
  const auto se = solve_mixed(pair, te, Normalization::type_two(0));
  CHECK(se.residual() < 1e-25);
  for (double x : {-1.5, -0.2, 0.4, 1.1}) CHECK(sd.form(x) == doctest::Approx(se.form(x)).epsilon(1e-9));
}
