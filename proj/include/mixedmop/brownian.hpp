#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <vector>

#include "mixedmop/kernel.hpp"
#include "mixedmop/weights.hpp"

namespace mixedmop {

struct PointMultiplicity {
  double point = 0.0;
  int multiplicity = 1;
};

/// n non-intersecting Brownian paths from `starts` at time 0 to `ends` at time 1,
/// observed at time t. With variance_scaling the transition density has variance
/// t / n instead of t.
struct BrownianConfig {
  std::vector<PointMultiplicity> starts;
  std::vector<PointMultiplicity> ends;
  double t = 0.5;
  bool variance_scaling = false;

  /// Number of paths (sum of the start multiplicities).
  int paths() const;
  bool distinct_points() const;
  /// Throws ValidationError unless points increase strictly, multiplicities are
  /// positive, both sides carry the same number of paths and 0 < t < 1.
  void validate() const;
  /// 1 or n, the factor in the transition density.
  int scale() const { return variance_scaling ? paths() : 1; }
};

struct BrownianWeights {
  WeightFamily w1;
  WeightFamily w2;
  MultiIndexPair pair = MultiIndexPair::balanced({1}, {1});
};

/// w1_j = P(t, a_j, .), w2_j = P(1 - t, b_j, .), n = start multiplicities, m = end ones.
BrownianWeights config_to_weights(const BrownianConfig& config);

/// Z_n with the error bound of its quadrature and the closed-form cross-check.
struct PartitionFunction {
  double value = 0.0;
  double error_bound = 0.0;  // |Z(rule) - Z(refined rule)| + box truncation bound
  double andreief = 0.0;     // n! det[\int P(t,a_j,x) P(1-t,b_k,x) dx]
  int nodes_per_axis = 0;
};

/// The Karlin-McGregor density of the positions at time t (distinct points).
/// Evaluated on all of R^n as the symmetrised density, so it integrates to 1 over
/// R^n: p(x) = det P(t, a_j, x_k) det P(1 - t, b_j, x_k) / Z_n.
class KarlinMcGregorDensity {
 public:
  explicit KarlinMcGregorDensity(const BrownianConfig& config);

  const BrownianConfig& config() const { return config_; }
  int dimension() const { return n_; }
  const PartitionFunction& normalization() const { return z_; }

  /// log p(x); -inf where the density vanishes (coincident points).
  double log_eval(const Eigen::VectorXd& x) const;
  double eval(const Eigen::VectorXd& x) const;
  /// The unnormalised product det P(t) det P(1 - t).
  double unnormalised(const Eigen::VectorXd& x) const;

  /// Box of +-8 bridge standard deviations around the bridge means.
  Interval box() const;

 private:
  BrownianConfig config_;
  int n_ = 0;
  PartitionFunction z_;
};

/// Z_n by tensor Gauss-Legendre quadrature over box()^n (n <= 4). Because the
/// integrand is symmetric and vanishes on repeated nodes, only strictly increasing
/// node tuples are summed (times n!). Two rules of different order certify the bound.
PartitionFunction km_normalization(const BrownianConfig& config);

/// K_n and its correlation functions for a (possibly confluent) configuration.
class CorrelationKernel {
 public:
  CorrelationKernel(const BrownianConfig& config, Precision precision = Precision::Double);

  const BrownianConfig& config() const { return config_; }
  const BiorthogonalSystem& system() const { return sys_; }
  double operator()(double x, double y) const { return kernel_direct(sys_, x, y); }
  int paths() const { return config_.paths(); }

 private:
  BrownianConfig config_;
  BiorthogonalSystem sys_;
};

CorrelationKernel correlation_kernel(const BrownianConfig& config,
                                     Precision precision = Precision::Double);

/// r_m(x_1..x_m) = det K_n(x_i, x_j); requires m <= n.
double r_m(const CorrelationKernel& kernel, const std::vector<double>& points);

/// Seed of the stream-th independent generator derived from a master seed
/// (splitmix64 of seed + (stream + 1) * golden gamma).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

struct SamplerOptions {
  int chains = 4;
  int burn_in = 10000;
  /// Steps between stored draws; 0 picks ceil(5 tau) per chain from a pilot run of
  /// pilot_steps steps after burn-in, tau the integrated autocorrelation time.
  int thinning = 10;
  int pilot_steps = 20000;
  double target_low = 0.23;
  double target_high = 0.40;
};

struct SampleSet {
  std::vector<Eigen::VectorXd> draws;  // sorted positions, chains concatenated
  int chains = 0;
  std::vector<double> acceptance;      // per chain, after burn-in
  std::vector<double> proposal_scale;  // per chain, after adaptation
  std::vector<int> thinning;           // per chain
  double r_hat = 0.0;                  // max split-chain R-hat over sorted coordinates
  double autocorrelation_time = 0.0;   // max over chains and coordinates, in draws
  bool converged = true;               // r_hat <= 1.05
};

/// Integrated autocorrelation time 1 + 2 sum rho(k) with Sokal's adaptive window
/// (smallest M with M >= 5 tau(M)).
double integrated_autocorrelation(const std::vector<double>& series);

/// Random-walk Metropolis on the symmetrised density, `count` draws split evenly
/// over the chains. Chain c uses stream_seed(seed, c). Deterministic given seed.
SampleSet sample_positions(const KarlinMcGregorDensity& density, int count, std::uint64_t seed,
                           const SamplerOptions& options = {});

struct PathBundles {
  std::vector<double> times;
  /// bundles[b](path, time index)
  std::vector<Eigen::MatrixXd> bundles;
  std::vector<Eigen::VectorXd> positions_at_t;  // column at the observation time
  long long attempts = 0;
  double acceptance_rate = 0.0;
};

/// n independent Brownian bridges a_j -> b_j on a uniform grid of `resolution`
/// steps (plus the observation time), keeping bundles strictly ordered at every
/// grid time. This approximates continuous-time non-intersection from the grid.
/// Throws NumericalError("low_acceptance") if the acceptance rate drops below 1e-5.
PathBundles sample_paths(const BrownianConfig& config, int resolution, int count,
                         std::uint64_t seed);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

/// Pearson statistic of observed counts against expected counts (same total).
ChiSquare chi_square(const std::vector<double>& observed, const std::vector<double>& expected);

struct HistogramTest {
  std::vector<double> edges;
  std::vector<double> observed;
  std::vector<double> expected;
  ChiSquare chi2;
};

/// Pools all coordinates of the draws into `bins` equal bins over [lo, hi] (the
/// outer bins also collect the tails) and compares with draws.size() * \int r_1.
HistogramTest position_histogram_test(const std::vector<Eigen::VectorXd>& draws,
                                      const CorrelationKernel& kernel, int bins, double lo,
                                      double hi);

}  // namespace mixedmop
