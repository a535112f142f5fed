#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "common/configs.hpp"
#include "common/oracle.hpp"
#include "mixedmop/brownian.hpp"
#include "mixedmop/kernel.hpp"
#include "mixedmop/mop.hpp"
#include "mixedmop/rh.hpp"

using namespace mixedmop;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

struct KernelCase {
  testcfg::Config config;
  MultiIndexPair pair = MultiIndexPair::balanced({1}, {1});
  BiorthogonalSystem sys;
  CdKernelData cd;
  std::vector<double> grid;
};

Interval bulk(const testcfg::Config& c) {
  Interval r{1e300, -1e300};
  for (const auto* fam : {&c.w1, &c.w2})
    for (const auto& w : *fam) {
      r.lo = std::min(r.lo, w.center() - 3 * w.width());
      r.hi = std::max(r.hi, w.center() + 3 * w.width());
    }
  return r;
}

// 25 configurations cycling through p, q in {1, 2, 3}, |n| = |m| in [max(p, q, 2), 8].
std::vector<KernelCase> kernel_cases() {
  std::mt19937_64 rng(2024);
  std::vector<KernelCase> out;
  for (int i = 0; i < 25; ++i) {
    const int p = 1 + i % 3, q = 1 + (i / 3) % 3;
    const int size = std::uniform_int_distribution<int>(std::max({p, q, 2}), 8)(rng);
    KernelCase k;
    k.config = testcfg::random_config(rng, p, q, size);
    k.pair = MultiIndexPair::balanced(k.config.n, k.config.m);
    const auto t = build_moment_table(k.config.w1, k.config.w2, kernel_moment_order(k.pair));
    k.sys = build_biorthogonal(k.pair, t);
    k.cd = build_cd_data(k.pair, t);
    const auto b = bulk(k.config);
    for (int j = 0; j < 30; ++j) k.grid.push_back(b.lo + (b.hi - b.lo) * j / 29.0);
    out.push_back(std::move(k));
  }
  return out;
}

Outcome three_routes(const std::vector<KernelCase>& cases) {
  double worst = 0.0, worst_rh = 0.0;
  for (const auto& k : cases)
    for (double x : k.grid)
      for (double y : k.grid) {
        const double kd = kernel_direct(k.sys, x, y);
        const double scale = 1 + std::abs(kd);
        double kc;
        try {
          kc = kernel_cd(k.cd, x, y);
          const double kr = kernel_rh(k.cd, x, y).value;
          worst_rh = std::max({worst_rh, std::abs(kr - kd) / scale, std::abs(kr - kc) / scale});
        } catch (const DiagonalRegion&) {
          kc = kernel_cd_diagonal(k.cd, x);
        }
        worst = std::max(worst, std::abs(kc - kd) / scale);
      }
  const double all = std::max(worst, worst_rh);
  return {all < 1e-7, fmt("max rel discrepancy %.2e (direct/cd %.2e, rh %.2e), tol 1e-07, 25 configs, "
                          "30x30 grid",
                          all, worst, worst_rh)};
}

Outcome projection_laws(const std::vector<KernelCase>& cases) {
  double trace = 0.0, idem = 0.0;
  for (const auto& k : cases) {
    trace = std::max(trace, std::abs(kernel_trace(k.sys).value - k.pair.n().total()));
    std::vector<double> sub;
    for (int j = 0; j < 30; j += 5) sub.push_back(k.grid[j]);
    idem = std::max(idem, idempotence_residual(k.sys, sub, sub));
  }
  return {trace < 1e-8 && idem < 1e-6,
          fmt("max |trace - |n|| %.2e (tol 1e-08), max idempotence residual %.2e (tol 1e-06) on 6x6 "
              "subgrids",
              trace, idem)};
}

Outcome rh_certification(const std::vector<KernelCase>& cases) {
  // |n| <= 6 in double moments, larger sizes with extended moments
  std::vector<CdKernelData> targets;
  int extended = 0;
  const WeightFamily w1{transition_weight(0.5, -1), transition_weight(0.5, 1)};
  const WeightFamily w2{transition_weight(0.5, -0.5), transition_weight(0.5, 0.5)};
  const auto bpair = MultiIndexPair::balanced({2, 2}, {2, 2});
  targets.push_back(build_cd_data(bpair, build_moment_table(w1, w2, kernel_moment_order(bpair))));
  for (std::size_t i = 0; i < cases.size(); i += 4) {
    const auto& k = cases[i];
    if (k.pair.n().total() <= 6) {
      targets.push_back(k.cd);
      continue;
    }
    ++extended;
    targets.push_back(build_cd_data(
        k.pair, build_moment_table(k.config.w1, k.config.w2, kernel_moment_order(k.pair),
                                   {.basis = std::nullopt, .precision = Precision::Extended})));
  }

  double det = 0.0, xy = 0.0, jump = 0.0, ratio = 1e300;
  bool asym = true;
  for (const auto& cd : targets) {
    RhVerifyOptions o;
    o.det_points = 20;
    o.jump_points = 10;
    const auto r = rh_verify(cd, o);
    det = std::max(det, r.max_det());
    xy = std::max(xy, r.max_xy());
    jump = std::max(jump, r.max_jump());
    asym = asym && r.asymptotics_y.passed && r.asymptotics_x.passed;
    for (const auto* a : {&r.asymptotics_y, &r.asymptotics_x})
      for (double v : a->ratios) ratio = std::min(ratio, v);
  }
  const bool ok = det < 1e-7 && xy < 1e-7 && jump < 1e-6 && asym && ratio >= 1.8;
  return {ok, fmt("%zu configs (%d with |n| > 6 on extended moments): max |det-1| %.2e, max |X^tY-I| "
                  "%.2e (tol 1e-07), max rel jump %.2e (tol 1e-06), min asymptotic ratio %.3f (>= 1.8)",
                  targets.size(), extended, det, xy, jump, ratio)};
}

double p1q1_reduction() {
  const auto w1 = Weight::gaussian(0.3, 0.8), w2 = Weight::gaussian(-0.2, 1.2);
  const auto os = oracle::gram_schmidt([&](double x) { return w1(x) * w2(x); }, 8, -15, 15);
  double worst = 0.0;
  for (int n = 1; n <= 6; ++n) {
    const auto pair = MultiIndexPair::balanced({n}, {n});
    const auto cd = build_cd_data(pair, build_moment_table({w1}, {w2}, kernel_moment_order(pair)));
    for (double x : {-1.7, -0.6, 0.1, 0.8, 1.9})
      for (double y : {-1.2, -0.3, 0.5, 1.4}) {
        double ref = 0.0;
        for (int j = 0; j < n; ++j) ref += os.eval(j, x) * os.eval(j, y) / os.h[j];
        ref *= w1(x) * w2(y);
        worst = std::max(worst, std::abs(kernel_cd(cd, x, y) - ref) / (1 + std::abs(ref)));
      }
  }
  return worst;
}

Weight product(const Weight& a, const Weight& b) {
  const auto g = gaussian_product(a.as_gaussian(), b.as_gaussian());
  return Weight::gaussian(g.center, g.variance, g.amplitude);
}

struct CdFit {
  double residual = 0.0;
  std::vector<double> constants;
};

// p = 1, q = 2: (x - y) K(x, y) w11(y) / w11(x) = P_m(x) Q_m(y) - sum_k c_k P_{m-e_k}(x) Q_{m+e_k}(y)
// with classical multiple orthogonal polynomials for the products w11 w2k.
CdFit p1q2_reduction(double t, const MultiIndex& m) {
  const auto w11 = transition_weight(t, 0.0);
  const WeightFamily w2{transition_weight(1 - t, -1.0), transition_weight(1 - t, 1.0)};
  const WeightFamily v{product(w11, w2[0]), product(w11, w2[1])};
  const auto pair = MultiIndexPair::balanced(MultiIndex{m.total()}, m);
  const auto cd = build_cd_data(pair, build_moment_table({w11}, w2, kernel_moment_order(pair)));

  const auto P = solve_type2_classical(v, m);
  const auto Q = solve_type1_classical(v, m);
  std::vector<MixedMopSolution> Pk, Qk;
  for (int k = 0; k < 2; ++k) {
    Pk.push_back(solve_type2_classical(v, m.minus_unit(k)));
    Qk.push_back(solve_type1_classical(v, m.plus_unit(k)));
  }
  auto lhs = [&](double x, double y) {
    return cd_numerator(cd, x, y) * w11(y) / w11(x) - P.polynomial(0, x) * Q.form(y);
  };

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  auto sample = [&](int count) {
    std::vector<std::pair<double, double>> pts;
    while (static_cast<int>(pts.size()) < count) {
      const double x = u(rng), y = u(rng);
      if (std::abs(x - y) > 0.1) pts.emplace_back(x, y);
    }
    return pts;
  };
  const auto fit = sample(40);
  Eigen::MatrixXd A(fit.size(), 2);
  Eigen::VectorXd b(fit.size());
  for (std::size_t i = 0; i < fit.size(); ++i) {
    const auto [x, y] = fit[i];
    for (int k = 0; k < 2; ++k) A(i, k) = -Pk[k].polynomial(0, x) * Qk[k].form(y);
    b(i) = lhs(x, y);
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);

  CdFit out;
  out.constants = {c(0), c(1)};
  for (const auto& [x, y] : sample(30)) {
    const double assembled = (P.polynomial(0, x) * Q.form(y) - c(0) * Pk[0].polynomial(0, x) * Qk[0].form(y) -
                              c(1) * Pk[1].polynomial(0, x) * Qk[1].form(y)) /
                             (x - y) * w11(x) / w11(y);
    const double k = kernel_cd(cd, x, y);
    out.residual = std::max(out.residual, std::abs(assembled - k) / (1 + std::abs(k)));
  }
  return out;
}

Outcome classical_reductions() {
  const double a = p1q1_reduction();
  double b = 0.0;
  std::string fitted;
  for (const auto& m : {MultiIndex{1, 1}, MultiIndex{2, 1}, MultiIndex{2, 2}, MultiIndex{3, 2}, MultiIndex{3, 3}}) {
    const auto f = p1q2_reduction(0.5, m);
    b = std::max(b, f.residual);
    fitted += fmt(" %s:(%.6g,%.6g)", m.str().c_str(), f.constants[0], f.constants[1]);
  }
  return {a < 1e-8 && b < 1e-8,
          fmt("p=q=1 vs Gram-Schmidt %.2e, p=1 q=2 vs fitted assembly %.2e (tol 1e-08); fitted h-ratios%s", a,
              b, fitted.c_str())};
}

BrownianConfig distinct(std::vector<double> a, std::vector<double> b, double t) {
  BrownianConfig c;
  for (double x : a) c.starts.push_back({x, 1});
  for (double x : b) c.ends.push_back({x, 1});
  c.t = t;
  return c;
}

Outcome determinantal_identity() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  double worst = 0.0, zbound = 0.0, zdiff = 0.0;
  for (const auto& c : {distinct({-1, 0.8}, {-0.5, 1.5}, 0.4), distinct({-1.5, 0, 1}, {-1, 0.2, 1.8}, 0.55)}) {
    const KarlinMcGregorDensity d(c);
    const auto K = correlation_kernel(c);
    const int n = c.paths();
    zbound = std::max(zbound, d.normalization().error_bound);
    zdiff = std::max(zdiff, std::abs(d.normalization().value - d.normalization().andreief));
    const double sd = std::sqrt(c.t * (1 - c.t));
    for (int i = 0; i < 200; ++i) {
      std::vector<double> x(n);
      for (int j = 0; j < n; ++j)
        x[j] = (1 - c.t) * c.starts[j].point + c.t * c.ends[j].point + sd * normal(rng);
      std::sort(x.begin(), x.end());
      const double det = r_m(K, x);
      const double lhs = factorial(n) * d.eval(Eigen::Map<Eigen::VectorXd>(x.data(), n));
      worst = std::max(worst, std::abs(lhs - det) / std::abs(det));
    }
  }
  return {worst < 1e-6 && zbound <= 1e-8,
          fmt("n=2,3 x 200 points: max rel |n! p - det K| %.2e (tol 1e-06); Z_n bound %.2e (<= 1e-08), "
              "|Z_n - closed form| %.2e",
              worst, zbound, zdiff)};
}

// standard error of the mean of f over the draws by 50 batch means
std::pair<double, double> batch_mean(const std::vector<Eigen::VectorXd>& draws,
                                     const std::function<double(double)>& f) {
  const int batches = 50, len = static_cast<int>(draws.size()) / batches;
  double mean = 0.0;
  std::vector<double> bm(batches, 0.0);
  for (int i = 0; i < batches * len; ++i) {
    const double v = f(draws[i](0));
    bm[i / len] += v / len;
    mean += v / (batches * len);
  }
  double var = 0.0;
  for (double m : bm) var += (m - mean) * (m - mean);
  return {mean, std::sqrt(var / (batches - 1) / batches)};
}

Outcome monte_carlo() {
  SamplerOptions o;
  o.thinning = 0;
  const auto c2 = distinct({-1, 1}, {-1, 1}, 0.5);
  const KarlinMcGregorDensity d2(c2);
  const auto s2 = sample_positions(d2, 100000, 42, o);
  const double sd = std::sqrt(0.25);
  const auto h = position_histogram_test(s2.draws, correlation_kernel(c2), 40, -1 - 4 * sd, 1 + 4 * sd);

  const double a = -0.5, b = 1.0, t = 0.3;
  const KarlinMcGregorDensity d1(distinct({a}, {b}, t));
  const auto s1 = sample_positions(d1, 100000, 43, o);
  const double mu = (1 - t) * a + t * b, var = t * (1 - t);
  const auto [m, se_m] = batch_mean(s1.draws, [](double x) { return x; });
  const auto [v, se_v] = batch_mean(s1.draws, [&](double x) { return (x - m) * (x - m); });
  const double zm = std::abs(m - mu) / se_m, zv = std::abs(v - var) / se_v;

  const auto r1 = sample_positions(d2, 2000, 7, o), r2 = sample_positions(d2, 2000, 7, o);
  bool same = true;
  for (std::size_t i = 0; i < r1.draws.size(); ++i) same = same && r1.draws[i] == r2.draws[i];

  return {h.chi2.p_value > 0.01 && zm < 3 && zv < 3 && same && s2.converged,
          fmt("n=2: chi2 %.1f on %d dof, p %.3f (> 0.01), R-hat %.4f, thinning %d, tau %.2f; n=1: mean %.2f "
              "SE, variance %.2f SE (< 3); deterministic %s",
              h.chi2.statistic, h.chi2.dof, h.chi2.p_value, s2.r_hat, s2.thinning[0], s2.autocorrelation_time,
              zm, zv, same ? "yes" : "no")};
}

Outcome normality_battery() {
  int pairs = 0, failures = 0;
  std::mt19937_64 rng(8);
  for (int p = 1; p <= 3; ++p)
    for (int q = 1; q <= 3; ++q) {
      const double t = 0.5;
      const auto a = testcfg::distinct_points(rng, p, -2, 2, 0.8);
      const auto b = testcfg::distinct_points(rng, q, -2, 2, 0.8);
      std::vector<Weight> w1, w2;
      for (double x : a) w1.push_back(transition_weight(t, x));
      for (double x : b) w2.push_back(transition_weight(1 - t, x));
      const auto table = build_moment_table(WeightFamily(w1), WeightFamily(w2), 16);
      std::function<void(std::vector<int>&, int, int, std::vector<std::vector<int>>&)> comps =
          [&](std::vector<int>& cur, int parts, int left, std::vector<std::vector<int>>& out) {
            if (parts == 1) {
              cur.push_back(left);
              out.push_back(cur);
              cur.pop_back();
              return;
            }
            for (int v = 1; v <= left - parts + 1; ++v) {
              cur.push_back(v);
              comps(cur, parts - 1, left - v, out);
              cur.pop_back();
            }
          };
      for (int N = std::max(p, q + 1); N <= 8; ++N) {
        std::vector<std::vector<int>> ns, ms;
        std::vector<int> cur;
        comps(cur, p, N, ns);
        comps(cur, q, N - 1, ms);
        for (const auto& n : ns)
          for (const auto& m : ms) {
            const auto rep = check_normality(MultiIndexPair::mop(MultiIndex(n), MultiIndex(m)), table);
            bool ok = rep.normal() && rep.kernel_dimension == 1;
            for (int k = 0; k < q; ++k) ok = ok && rep.admissible(Normalization::type_one(k));
            for (int k = 0; k < p; ++k) ok = ok && rep.admissible(Normalization::type_two(k));
            ++pairs;
            failures += !ok;
          }
      }
    }
  const auto g = Weight::gaussian(0, 1);
  const auto dup = build_moment_table({g, g}, {Weight::gaussian(0.5, 1)}, 8);
  const auto d = check_normality(MultiIndexPair::mop({2, 1}, {2}), dup);
  return {failures == 0 && !d.normal(),
          fmt("%d pairs with |n| <= 8 normal with all normalisations admissible: %d failures; duplicated "
              "weights kernel dimension %d (non-normal: %s)",
              pairs, failures, d.kernel_dimension, d.normal() ? "no" : "yes")};
}

Outcome confluence() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<std::pair<double, double>> probes;
  for (int i = 0; i < 10; ++i) probes.emplace_back(u(rng), u(rng));

  BrownianConfig starts;
  starts.starts = {{0, 2}};
  starts.ends = {{-1, 1}, {1, 1}};
  starts.t = 0.5;
  BrownianConfig ends;
  ends.starts = {{-1, 1}, {0.5, 1}};
  ends.ends = {{0.2, 2}};
  ends.t = 0.4;

  bool ok = true;
  std::string seq;
  for (int side = 0; side < 2; ++side) {
    const auto& merged = side == 0 ? starts : ends;
    const auto K0 = correlation_kernel(merged);
    double prev = 1e300;
    seq += side == 0 ? " starts:" : " ends:";
    for (double eta : {0.2, 0.1, 0.05}) {
      auto c = merged;
      auto& pts = side == 0 ? c.starts : c.ends;
      const double at = pts[0].point;
      pts = {{at - eta / 2, 1}, {at + eta / 2, 1}};
      const auto K = correlation_kernel(c);
      double diff = 0.0;
      for (const auto& [x, y] : probes) diff = std::max(diff, std::abs(K(x, y) - K0(x, y)));
      ok = ok && diff < prev;
      prev = diff;
      seq += fmt(" %.3e", diff);
    }
  }
  return {ok, fmt("sup differences at 10 probes for eta = 0.2, 0.1, 0.05 strictly decreasing:%s", seq.c_str())};
}

struct Criterion {
  int id;
  const char* name;
  double limit;  // seconds, 0 = none
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  std::vector<KernelCase> cases;
  auto timed = [](const std::function<void()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  const std::vector<Criterion> criteria{
      {1, "three-route kernel agreement", 120,
       [&] {
         cases = kernel_cases();
         return three_routes(cases);
       }},
      {2, "projection-kernel laws", 0, [&] { return projection_laws(cases); }},
      {3, "RH certification", 180, [&] { return rh_certification(cases); }},
      {4, "classical reductions", 0, classical_reductions},
      {5, "determinantal identity", 120, determinantal_identity},
      {6, "Monte Carlo validation", 300, monte_carlo},
      {7, "normality battery", 30, normality_battery},
      {8, "confluence continuity", 0, confluence},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    std::string error;
    const double secs = timed([&] {
      try {
        o = c.run();
      } catch (const std::exception& e) {
        error = e.what();
      }
    });
    const bool in_time = c.limit == 0 || secs < c.limit;
    const bool pass = error.empty() && o.passed && in_time;
    failed += !pass;
    std::string timing = c.limit > 0 ? fmt("%.1f s (limit %.0f s)", secs, c.limit) : fmt("%.1f s", secs);
    std::printf("%s [%d] %s: %s; %s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                error.empty() ? o.detail.c_str() : ("exception: " + error).c_str(), timing.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
