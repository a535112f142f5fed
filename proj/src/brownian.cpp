#include "mixedmop/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mixedmop/parallel.hpp"
#include "mixedmop/quadrature.hpp"

namespace mixedmop {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::vector<double> expand(const std::vector<PointMultiplicity>& pts) {
  std::vector<double> out;
  for (const auto& p : pts)
    for (int i = 0; i < p.multiplicity; ++i) out.push_back(p.point);
  return out;
}

double bridge_sd(const BrownianConfig& c) { return std::sqrt(c.t * (1.0 - c.t) / c.scale()); }

Interval bridge_box(const BrownianConfig& c, double sds) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : c.starts)
    for (const auto& e : c.ends) {
      const double mean = (1.0 - c.t) * s.point + c.t * e.point;
      lo = std::min(lo, mean);
      hi = std::max(hi, mean);
    }
  const double pad = sds * bridge_sd(c);
  return {lo - pad, hi + pad};
}

// F(j, k) = P(t, a_j, x_k), G(j, k) = P(1 - t, b_j, x_k)
template <class Vec>
void transition_matrices(const BrownianConfig& c, const std::vector<double>& a,
                         const std::vector<double>& b, const Vec& x, Eigen::MatrixXd& F,
                         Eigen::MatrixXd& G) {
  const int n = static_cast<int>(a.size());
  F.resize(n, n);
  G.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      F(j, k) = gaussian_transition(c.t, a[j], x[k], c.scale());
      G(j, k) = gaussian_transition(1.0 - c.t, b[j], x[k], c.scale());
    }
}

double permanent(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double sum = 0.0;
  do {
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= m(i, perm[i]);
    sum += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum;
}

// sum over strictly increasing node tuples of w_i1..w_in det F det G
template <int N>
double tensor_sum(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, const std::vector<double>& w) {
  const int M = static_cast<int>(w.size());
  using Mat = Eigen::Matrix<double, N, N>;
  double total = 0.0;
  int idx[N];
  auto rec = [&](auto&& self, int depth, int from, double weight) -> void {
    if (depth == N) {
      Mat F, G;
      for (int k = 0; k < N; ++k) {
        F.col(k) = f.col(idx[k]);
        G.col(k) = g.col(idx[k]);
      }
      total += weight * F.determinant() * G.determinant();
      return;
    }
    for (int i = from; i < M; ++i) {
      idx[depth] = i;
      self(self, depth + 1, i + 1, weight * w[i]);
    }
  };
  rec(rec, 0, 0, 1.0);
  return total;
}

double tensor_quadrature(const BrownianConfig& c, const std::vector<double>& a,
                         const std::vector<double>& b, const Interval& box, int panels, int order,
                         int& nodes) {
  const auto& rule = gauss_legendre(order);
  std::vector<double> x, w;
  const double h = (box.hi - box.lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = box.lo + (p + 0.5) * h;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      x.push_back(mid + 0.5 * h * rule.nodes[i]);
      w.push_back(0.5 * h * rule.weights[i]);
    }
  }
  nodes = static_cast<int>(x.size());
  const int n = static_cast<int>(a.size());
  Eigen::MatrixXd f(n, nodes), g(n, nodes);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < nodes; ++i) {
      f(j, i) = gaussian_transition(c.t, a[j], x[i], c.scale());
      g(j, i) = gaussian_transition(1.0 - c.t, b[j], x[i], c.scale());
    }
  double sum = 0.0;
  switch (n) {
    case 1: sum = tensor_sum<1>(f, g, w); break;
    case 2: sum = tensor_sum<2>(f, g, w); break;
    case 3: sum = tensor_sum<3>(f, g, w); break;
    case 4: sum = tensor_sum<4>(f, g, w); break;
    default: break;
  }
  return factorial(n) * sum;
}

}  // namespace

int BrownianConfig::paths() const {
  int n = 0;
  for (const auto& s : starts) n += s.multiplicity;
  return n;
}

bool BrownianConfig::distinct_points() const {
  auto ones = [](const std::vector<PointMultiplicity>& v) {
    return std::all_of(v.begin(), v.end(), [](const auto& p) { return p.multiplicity == 1; });
  };
  return ones(starts) && ones(ends);
}

void BrownianConfig::validate() const {
  if (starts.empty() || ends.empty()) throw ValidationError("starts and ends must be nonempty");
  if (!(t > 0.0 && t < 1.0)) throw ValidationError("t must lie in (0, 1)");
  auto check = [](const std::vector<PointMultiplicity>& v, const char* what) {
    int total = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i].point)) throw ValidationError(std::string(what) + " must be finite");
      if (v[i].multiplicity < 1)
        throw ValidationError(std::string(what) + " multiplicities must be positive");
      if (i > 0 && !(v[i].point > v[i - 1].point))
        throw ValidationError(std::string(what) + " points must be strictly increasing");
      total += v[i].multiplicity;
    }
    return total;
  };
  const int n = check(starts, "start"), m = check(ends, "end");
  if (n != m)
    throw ValidationError("starts carry " + std::to_string(n) + " paths but ends carry " +
                          std::to_string(m));
}

BrownianWeights config_to_weights(const BrownianConfig& config) {
  config.validate();
  std::vector<Weight> w1, w2;
  std::vector<int> n, m;
  for (const auto& s : config.starts) {
    w1.push_back(transition_weight(config.t, s.point, config.scale()));
    n.push_back(s.multiplicity);
  }
  for (const auto& e : config.ends) {
    w2.push_back(transition_weight(1.0 - config.t, e.point, config.scale()));
    m.push_back(e.multiplicity);
  }
  return {WeightFamily(w1), WeightFamily(w2), MultiIndexPair::balanced(MultiIndex(n), MultiIndex(m))};
}

PartitionFunction km_normalization(const BrownianConfig& config) {
  config.validate();
  if (!config.distinct_points())
    throw ValidationError("the Karlin-McGregor density needs distinct start and end points");
  const int n = config.paths();
  const auto a = expand(config.starts), b = expand(config.ends);
  PartitionFunction z;
  // \int P(t, a, x) P(1 - t, b, x) dx = P(1, a, b)
  const double s = config.scale();
  Eigen::MatrixXd B(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const double d = a[j] - b[k];
      B(j, k) = std::sqrt(s / (2 * std::numbers::pi)) * std::exp(-s * d * d / 2);
    }
  z.andreief = factorial(n) * B.determinant();
  if (n > 4)
    throw AccuracyFailure("tensor quadrature for Z_n is limited to n <= 4 (n = " +
                              std::to_string(n) + ")",
                          std::numeric_limits<double>::infinity());

  const Interval box = bridge_box(config, 8.0);
  const int panels = std::max(8, static_cast<int>(std::ceil((box.hi - box.lo) / (2.0 * bridge_sd(config)))));
  int coarse_nodes = 0, fine_nodes = 0;
  const double coarse = tensor_quadrature(config, a, b, box, panels, 10, coarse_nodes);
  const double fine = tensor_quadrature(config, a, b, box, panels, 14, fine_nodes);
  // mass of every signed term outside the box: n * erfc(8 / sqrt 2) * n! perm(B)
  const double tail = n * boost::math::erfc(8.0 / std::numbers::sqrt2) * factorial(n) * permanent(B);
  z.value = fine;
  z.error_bound = std::abs(fine - coarse) + tail;
  z.nodes_per_axis = fine_nodes;
  return z;
}

KarlinMcGregorDensity::KarlinMcGregorDensity(const BrownianConfig& config)
    : config_(config), n_(config.paths()), z_(km_normalization(config)) {}

Interval KarlinMcGregorDensity::box() const { return bridge_box(config_, 8.0); }

double KarlinMcGregorDensity::unnormalised(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw ValidationError("position vector has the wrong length");
  Eigen::MatrixXd F, G;
  transition_matrices(config_, expand(config_.starts), expand(config_.ends), x, F, G);
  return F.determinant() * G.determinant();
}

double KarlinMcGregorDensity::log_eval(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw ValidationError("position vector has the wrong length");
  for (int i = 0; i < n_; ++i)
    for (int k = i + 1; k < n_; ++k)
      if (x(i) == x(k)) return -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd F, G;
  transition_matrices(config_, expand(config_.starts), expand(config_.ends), x, F, G);
  double log_abs = 0.0;
  int sign = 1;
  for (const auto* M : {&F, &G}) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(*M);
    const Eigen::MatrixXd& U = lu.matrixLU();
    for (int i = 0; i < n_; ++i) {
      const double d = U(i, i);
      if (d == 0.0) return -std::numeric_limits<double>::infinity();
      log_abs += std::log(std::abs(d));
      if (d < 0) sign = -sign;
    }
    sign *= static_cast<int>(lu.permutationP().determinant());
  }
  if (sign < 0) return -std::numeric_limits<double>::infinity();
  return log_abs - std::log(z_.value);
}

double KarlinMcGregorDensity::eval(const Eigen::VectorXd& x) const { return std::exp(log_eval(x)); }

CorrelationKernel::CorrelationKernel(const BrownianConfig& config, Precision precision)
    : config_(config) {
  const auto bw = config_to_weights(config);
  const auto table = build_moment_table(bw.w1, bw.w2, kernel_moment_order(bw.pair),
                                        {.basis = std::nullopt, .precision = precision});
  sys_ = build_biorthogonal(bw.pair, table);
}

CorrelationKernel correlation_kernel(const BrownianConfig& config, Precision precision) {
  return CorrelationKernel(config, precision);
}

double r_m(const CorrelationKernel& kernel, const std::vector<double>& points) {
  const int m = static_cast<int>(points.size());
  if (m < 1 || m > kernel.paths())
    throw ValidationError("r_m needs 1 <= m <= n points, got " + std::to_string(m));
  Eigen::MatrixXd K(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) K(i, j) = kernel(points[i], points[j]);
  return K.determinant();
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// split-chain potential scale reduction of one scalar series per chain
double split_r_hat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    const std::size_t h = c.size() / 2;
    if (h < 2) return std::numeric_limits<double>::infinity();
    halves.emplace_back(c.begin(), c.begin() + h);
    halves.emplace_back(c.begin() + h, c.begin() + 2 * h);
  }
  const double L = static_cast<double>(halves.front().size());
  const double M = static_cast<double>(halves.size());
  std::vector<double> means, vars;
  for (const auto& h : halves) {
    const double mean = std::accumulate(h.begin(), h.end(), 0.0) / L;
    double v = 0.0;
    for (double x : h) v += (x - mean) * (x - mean);
    means.push_back(mean);
    vars.push_back(v / (L - 1));
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / M;
  double B = 0.0;
  for (double m : means) B += (m - grand) * (m - grand);
  B *= L / (M - 1);
  const double W = std::accumulate(vars.begin(), vars.end(), 0.0) / M;
  if (W <= 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(((L - 1) / L * W + B / L) / W);
}

}  // namespace

double integrated_autocorrelation(const std::vector<double>& series) {
  const int len = static_cast<int>(series.size());
  if (len < 4) return 1.0;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= len;
  double c0 = 0.0;
  for (double v : series) c0 += (v - mean) * (v - mean);
  c0 /= len;
  if (c0 <= 0) return 1.0;
  double tau = 1.0;
  for (int lag = 1; lag < len / 2; ++lag) {
    double c = 0.0;
    for (int i = 0; i + lag < len; ++i) c += (series[i] - mean) * (series[i + lag] - mean);
    tau += 2.0 * c / (len * c0);
    if (lag >= 5.0 * tau) break;
  }
  return std::max(tau, 1.0 / len);
}

SampleSet sample_positions(const KarlinMcGregorDensity& density, int count, std::uint64_t seed,
                           const SamplerOptions& options) {
  if (count < 1) throw ValidationError("sample count must be positive");
  if (options.chains < 1 || options.thinning < 0 || options.burn_in < 0 ||
      (options.thinning == 0 && options.pilot_steps < 100))
    throw ValidationError("invalid sampler options");
  const auto& c = density.config();
  const int n = density.dimension();
  const int chains = options.chains;
  const int per_chain = (count + chains - 1) / chains;

  Eigen::VectorXd start(n);
  {
    const auto a = expand(c.starts), b = expand(c.ends);
    for (int j = 0; j < n; ++j) start(j) = (1.0 - c.t) * a[j] + c.t * b[j];
  }
  const double scale0 = 2.38 / std::sqrt(n) * bridge_sd(c);

  std::vector<std::vector<Eigen::VectorXd>> out(chains);
  std::vector<double> acceptance(chains), scales(chains);
  std::vector<int> thinning(chains, options.thinning);
  parallel_for(chains, [&](int ch) {
    std::mt19937_64 rng(stream_seed(seed, ch));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    Eigen::VectorXd x = start;
    double logp = density.log_eval(x);
    double scale = scale0;
    auto step = [&]() {
      Eigen::VectorXd y(n);
      for (int i = 0; i < n; ++i) y(i) = x(i) + scale * normal(rng);
      const double lq = density.log_eval(y);
      if (std::log(unif(rng)) < lq - logp) {
        x = y;
        logp = lq;
        return true;
      }
      return false;
    };
    int window_accept = 0, window = 0;
    for (int it = 0; it < options.burn_in; ++it) {
      window_accept += step();
      if (++window == 100) {
        const double rate = window_accept / 100.0;
        if (rate < options.target_low) scale *= 0.8;
        if (rate > options.target_high) scale *= 1.25;
        window = window_accept = 0;
      }
    }
    if (options.thinning == 0) {
      std::vector<std::vector<double>> pilot(n);
      for (int it = 0; it < options.pilot_steps; ++it) {
        step();
        Eigen::VectorXd s = x;
        std::sort(s.data(), s.data() + n);
        for (int i = 0; i < n; ++i) pilot[i].push_back(s(i));
      }
      double tau = 1.0;
      for (const auto& series : pilot) tau = std::max(tau, integrated_autocorrelation(series));
      thinning[ch] = static_cast<int>(std::ceil(5.0 * tau));
    }
    long long accepted = 0, total = 0;
    out[ch].reserve(per_chain);
    for (int d = 0; d < per_chain; ++d) {
      for (int k = 0; k < thinning[ch]; ++k) {
        accepted += step();
        ++total;
      }
      Eigen::VectorXd s = x;
      std::sort(s.data(), s.data() + n);
      out[ch].push_back(s);
    }
    acceptance[ch] = static_cast<double>(accepted) / static_cast<double>(total);
    scales[ch] = scale;
  });

  SampleSet set;
  set.chains = chains;
  set.acceptance = acceptance;
  set.proposal_scale = scales;
  set.thinning = thinning;
  for (int i = 0; i < n; ++i) {
    std::vector<std::vector<double>> series(chains);
    for (int ch = 0; ch < chains; ++ch) {
      for (const auto& v : out[ch]) series[ch].push_back(v(i));
      set.autocorrelation_time =
          std::max(set.autocorrelation_time, integrated_autocorrelation(series[ch]));
    }
    set.r_hat = std::max(set.r_hat, split_r_hat(series));
  }
  set.converged = set.r_hat <= 1.05;
  for (auto& chain : out)
    for (auto& v : chain)
      if (static_cast<int>(set.draws.size()) < count) set.draws.push_back(std::move(v));
  return set;
}

PathBundles sample_paths(const BrownianConfig& config, int resolution, int count,
                         std::uint64_t seed) {
  config.validate();
  if (!config.distinct_points())
    throw ValidationError("path sampling needs distinct start and end points");
  const int n = config.paths();
  if (n > 4) throw ValidationError("path sampling is limited to n <= 4");
  if (resolution < 64) throw ValidationError("time grid resolution must be at least 64");
  if (count < 1) throw ValidationError("bundle count must be positive");

  PathBundles out;
  for (int k = 0; k <= resolution; ++k) out.times.push_back(static_cast<double>(k) / resolution);
  out.times.push_back(config.t);
  std::sort(out.times.begin(), out.times.end());
  out.times.erase(std::unique(out.times.begin(), out.times.end(),
                              [](double u, double v) { return std::abs(u - v) < 1e-12; }),
                  out.times.end());
  const int T = static_cast<int>(out.times.size());
  const int obs = static_cast<int>(
      std::min_element(out.times.begin(), out.times.end(),
                       [&](double u, double v) { return std::abs(u - config.t) < std::abs(v - config.t); }) -
      out.times.begin());

  const auto a = expand(config.starts), b = expand(config.ends);
  const double var_rate = 1.0 / config.scale();
  std::mt19937_64 rng(stream_seed(seed, 0));
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(n, T);
  Eigen::VectorXd W(T);
  while (static_cast<int>(out.bundles.size()) < count) {
    ++out.attempts;
    for (int j = 0; j < n; ++j) {
      W(0) = 0.0;
      for (int k = 1; k < T; ++k)
        W(k) = W(k - 1) + std::sqrt(var_rate * (out.times[k] - out.times[k - 1])) * normal(rng);
      for (int k = 0; k < T; ++k) {
        const double s = out.times[k];
        X(j, k) = a[j] + W(k) - s * W(T - 1) + s * (b[j] - a[j]);
      }
    }
    bool ordered = true;
    for (int k = 0; k < T && ordered; ++k)
      for (int j = 0; j + 1 < n; ++j)
        if (!(X(j, k) < X(j + 1, k))) {
          ordered = false;
          break;
        }
    if (ordered) {
      out.bundles.push_back(X);
      out.positions_at_t.push_back(X.col(obs));
    }
    if (out.attempts % 100000 == 0 &&
        static_cast<double>(out.bundles.size()) / static_cast<double>(out.attempts) < 1e-5)
      throw NumericalError("low_acceptance",
                           "path acceptance rate below 1e-5 after " +
                               std::to_string(out.attempts) +
                               " attempts; start or end points are too close together");
  }
  out.acceptance_rate = static_cast<double>(out.bundles.size()) / static_cast<double>(out.attempts);
  return out;
}

ChiSquare chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.size() < 2)
    throw ValidationError("chi-square needs matching observed/expected of length >= 2");
  ChiSquare r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0)) throw ValidationError("chi-square expected counts must be positive");
    r.statistic += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  r.dof = static_cast<int>(observed.size()) - 1;
  r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  return r;
}

HistogramTest position_histogram_test(const std::vector<Eigen::VectorXd>& draws,
                                      const CorrelationKernel& kernel, int bins, double lo,
                                      double hi) {
  if (bins < 2 || !(hi > lo)) throw ValidationError("histogram needs >= 2 bins and lo < hi");
  HistogramTest h;
  for (int i = 0; i <= bins; ++i) h.edges.push_back(lo + (hi - lo) * i / bins);
  h.observed.assign(bins, 0.0);
  for (const auto& d : draws)
    for (int i = 0; i < d.size(); ++i) {
      int k = static_cast<int>(std::floor((d(i) - lo) / (hi - lo) * bins));
      h.observed[std::clamp(k, 0, bins - 1)] += 1.0;
    }
  const auto support = kernel.system().support();
  auto r1 = [&](double x) { return kernel(x, x); };
  const double N = static_cast<double>(draws.size());
  for (int k = 0; k < bins; ++k) {
    const double a = k == 0 ? std::min(support.lo, lo) : h.edges[k];
    const double b = k == bins - 1 ? std::max(support.hi, hi) : h.edges[k + 1];
    h.expected.push_back(N * integrate_interval(r1, a, b, 1e-13, 1e-11).value);
  }
  h.chi2 = chi_square(h.observed, h.expected);
  return h;
}

}  // namespace mixedmop
