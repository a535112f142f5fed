#include "mixedmop/rh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mixedmop/parallel.hpp"

namespace mixedmop {

namespace {

constexpr cplx kTwoPiI{0.0, 2.0 * std::numbers::pi};

Interval hull_of_overlaps(const WeightFamily& a, const Weight& b) {
  Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const auto wb = b.window();
  for (const auto& w : a) {
    const auto wa = w.window();
    const double lo = std::max(wa.lo, wb.lo), hi = std::min(wa.hi, wb.hi);
    if (hi > lo) {
      out.lo = std::min(out.lo, lo);
      out.hi = std::max(out.hi, hi);
    }
  }
  return out;
}

// \int Q(x) w(x) / (x - z) dx for a solved form Q.
ComplexEstimate cauchy_of_form(const MixedMopSolution& s, const Weight& w, cplx z, Side side,
                               const RhOptions& o) {
  const auto win = hull_of_overlaps(s.weights(), w);
  if (!(win.hi > win.lo)) return {0.0, 0.0, true};
  const double band = o.near_band_fraction * s.basis().scale;
  auto est = cauchy_transform([&](double x) { return s.form(x) * w(x); }, z, side, win.lo, win.hi,
                              band, o.rel_tol);
  if (!est.converged)
    throw AccuracyFailure("Cauchy transform at z = (" + std::to_string(z.real()) + ", " +
                              std::to_string(z.imag()) + ") did not converge, achieved bound " +
                              std::to_string(est.error),
                          est.error);
  return est;
}

void check_side(cplx z, Side side) {
  if (side == Side::Off && z.imag() == 0.0)
    throw ValidationError("real z needs a boundary side (plus or minus)");
  if (side != Side::Off && z.imag() != 0.0)
    throw ValidationError("a boundary side needs a real z");
}

// Shared assembly: Y uses (w1,w2) solutions with polynomial columns first; X uses the
// swapped ones with polynomial columns last.
RhEvaluation assemble(const CdKernelData& d, cplx z, Side side, const RhOptions& o, RhMatrix which) {
  check_side(z, side);
  const int p = d.pair.n().length(), q = d.pair.m().length();
  const int size = p + q;
  RhEvaluation out;
  out.z = z;
  out.side = side;
  out.matrix = Eigen::MatrixXcd::Zero(size, size);
  out.accuracy = Eigen::MatrixXd::Zero(size, size);

  // each row r of the matrix comes from one solution; its polynomial entries fill
  // the poly columns and its Cauchy transforms against the other family fill the rest
  struct Row {
    const MixedMopSolution* s;
    cplx poly_factor;
    cplx cauchy_factor;
  };
  std::vector<Row> rows;
  int poly_offset = 0, cauchy_offset = 0;
  const WeightFamily* other = nullptr;
  if (which == RhMatrix::Y) {
    for (int k = 0; k < p; ++k) rows.push_back({&d.type2_plus[k], 1.0, 1.0 / kTwoPiI});
    for (int k = 0; k < q; ++k) rows.push_back({&d.type1_minus[k], -kTwoPiI, -1.0});
    poly_offset = 0;
    cauchy_offset = p;
    other = &d.type1_minus_swapped.front().weights();
  } else {
    for (int k = 0; k < p; ++k) rows.push_back({&d.type1_minus_swapped[k], kTwoPiI, -1.0});
    for (int k = 0; k < q; ++k) rows.push_back({&d.type2_plus_swapped[k], 1.0, -1.0 / kTwoPiI});
    poly_offset = p;
    cauchy_offset = 0;
    other = &d.type2_plus.front().weights();
  }

  for (int r = 0; r < size; ++r) {
    const auto& s = *rows[r].s;
    for (int l = 0; l < s.weights().size(); ++l)
      out.matrix(r, poly_offset + l) = rows[r].poly_factor * s.polynomial(l, z);
  }
  const int cols = other->size();
  parallel_for(size * cols, [&](int idx) {
    const int r = idx / cols, l = idx % cols;
    const auto est = cauchy_of_form(*rows[r].s, (*other)[l], z, side, o);
    out.matrix(r, cauchy_offset + l) = rows[r].cauchy_factor * est.value;
    out.accuracy(r, cauchy_offset + l) = std::abs(rows[r].cauchy_factor) * est.error;
  });
  return out;
}

double inf_norm(const Eigen::MatrixXcd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

// Neville extrapolation to h = 0 of values known at the nodes h.
Eigen::MatrixXcd extrapolate(const std::vector<double>& h, std::vector<Eigen::MatrixXcd> t) {
  const int n = static_cast<int>(h.size());
  for (int level = 1; level < n; ++level)
    for (int i = n - 1; i >= level; --i)
      t[i] = (h[i - level] * t[i] - h[i] * t[i - 1]) / (h[i - level] - h[i]);
  return t[n - 1];
}

}  // namespace

Eigen::MatrixXd JumpMatrix::inverse_transpose() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(p + q, p + q);
  out.bottomLeftCorner(q, p) = -W().transpose();
  return out;
}

JumpMatrix jump_matrix(const WeightFamily& w1, const WeightFamily& w2, double x) {
  JumpMatrix j;
  j.x = x;
  j.p = w1.size();
  j.q = w2.size();
  j.value = Eigen::MatrixXd::Identity(j.p + j.q, j.p + j.q);
  for (int a = 0; a < j.p; ++a)
    for (int b = 0; b < j.q; ++b) j.value(a, j.p + b) = w1[a](x) * w2[b](x);
  return j;
}

RhEvaluation eval_Y(const CdKernelData& data, cplx z, Side side, const RhOptions& options) {
  return assemble(data, z, side, options, RhMatrix::Y);
}

RhEvaluation eval_X(const CdKernelData& data, cplx z, Side side, const RhOptions& options) {
  return assemble(data, z, side, options, RhMatrix::X);
}

RhEvaluation eval_Y(const MultiIndexPair& pair, const ProductMomentTable& table, cplx z, Side side) {
  return eval_Y(build_cd_data(pair, table), z, side);
}

RhEvaluation eval_X(const MultiIndexPair& pair, const ProductMomentTable& table, cplx z, Side side) {
  return eval_X(build_cd_data(pair, table), z, side);
}

double det_residual(const RhEvaluation& e) { return std::abs(e.matrix.determinant() - 1.0); }

double xy_residual(const RhEvaluation& x, const RhEvaluation& y) {
  const Eigen::MatrixXcd r =
      x.matrix.transpose() * y.matrix - Eigen::MatrixXcd::Identity(y.matrix.rows(), y.matrix.cols());
  return r.cwiseAbs().maxCoeff();
}

JumpReport verify_jump(const CdKernelData& data, double x, const std::vector<double>& deltas,
                       RhMatrix which, const RhOptions& options) {
  if (deltas.empty()) throw ValidationError("verify_jump needs at least one delta");
  for (std::size_t i = 0; i < deltas.size(); ++i)
    if (!(deltas[i] > 0) || (i > 0 && !(deltas[i] < deltas[i - 1])))
      throw ValidationError("deltas must be positive and strictly decreasing");
  const auto J = jump_matrix(data.type2_plus.front().weights(),
                             data.type1_minus_swapped.front().weights(), x);
  const Eigen::MatrixXcd jump =
      (which == RhMatrix::Y ? J.value : J.inverse_transpose()).cast<cplx>();
  JumpReport rep;
  rep.which = which;
  rep.x = x;
  rep.deltas = deltas;
  std::vector<Eigen::MatrixXcd> diffs;
  Eigen::MatrixXcd upper_last;
  for (double d : deltas) {
    const auto up = assemble(data, cplx(x, d), Side::Off, options, which);
    const auto down = assemble(data, cplx(x, -d), Side::Off, options, which);
    diffs.push_back(up.matrix - down.matrix * jump);
    rep.residuals.push_back(inf_norm(diffs.back()));
    upper_last = up.matrix;
  }
  rep.extrapolated = inf_norm(extrapolate(deltas, diffs));
  rep.scale = inf_norm(upper_last);
  rep.passed = rep.extrapolated < 1e-6 * rep.scale;
  return rep;
}

double asymptotic_error(const CdKernelData& data, cplx z, RhMatrix which, const RhOptions& options) {
  const auto e = assemble(data, z, Side::Off, options, which);
  const auto& n = data.pair.n();
  const auto& m = data.pair.m();
  const int p = n.length(), q = m.length();
  const double sign = which == RhMatrix::Y ? 1.0 : -1.0;
  const cplx logz = std::log(z);
  Eigen::VectorXcd scale(p + q);
  for (int k = 0; k < p; ++k) scale(k) = std::exp(-sign * n[k] * logz);
  for (int k = 0; k < q; ++k) scale(p + k) = std::exp(sign * m[k] * logz);
  const Eigen::MatrixXcd r = e.matrix * scale.asDiagonal();
  return inf_norm(r - Eigen::MatrixXcd::Identity(p + q, p + q));
}

AsymptoticReport verify_asymptotics(const CdKernelData& data, const std::vector<double>& radii,
                                    RhMatrix which, const RhOptions& options) {
  AsymptoticReport rep;
  rep.which = which;
  rep.radii = radii;
  for (double R : radii) rep.errors.push_back(asymptotic_error(data, cplx(0.0, R), which, options));
  rep.passed = radii.size() >= 2;
  for (std::size_t i = 0; i + 1 < rep.errors.size(); ++i) {
    rep.ratios.push_back(rep.errors[i] / rep.errors[i + 1]);
    if (!(rep.ratios.back() >= 1.8)) rep.passed = false;
  }
  return rep;
}

RhKernelValue kernel_rh(const CdKernelData& data, double x, double y) {
  if (std::abs(x - y) <= data.diagonal_band)
    throw DiagonalRegion("|x - y| = " + std::to_string(std::abs(x - y)) +
                         " is inside the diagonal band; use the diagonal formula");
  const int p = data.pair.n().length(), q = data.pair.m().length();
  const WeightFamily& w1 = data.type2_plus.front().weights();
  const WeightFamily& w2 = data.type1_minus_swapped.front().weights();
  const cplx zx(x, 0.0), zy(y, 0.0);

  // row vector [0, w2(y)] Y^{-1}(y): entry k is sum_l X_{k, p+l}(y) w_{2,l}(y)
  Eigen::VectorXcd row(p + q);
  for (int k = 0; k < p; ++k) {
    cplx s = 0.0;
    for (int l = 0; l < q; ++l) s += kTwoPiI * data.type1_minus_swapped[k].polynomial(l, zy) * w2[l](y);
    row(k) = s;
  }
  for (int k = 0; k < q; ++k) {
    cplx s = 0.0;
    for (int l = 0; l < q; ++l) s += data.type2_plus_swapped[k].polynomial(l, zy) * w2[l](y);
    row(p + k) = s;
  }
  // column Y(x) [w1(x), 0]^t: first p columns of Y against w1(x)
  Eigen::VectorXcd col(p + q);
  for (int k = 0; k < p; ++k) {
    cplx s = 0.0;
    for (int l = 0; l < p; ++l) s += data.type2_plus[k].polynomial(l, zx) * w1[l](x);
    col(k) = s;
  }
  for (int k = 0; k < q; ++k) {
    cplx s = 0.0;
    for (int l = 0; l < p; ++l) s += -kTwoPiI * data.type1_minus[k].polynomial(l, zx) * w1[l](x);
    col(p + k) = s;
  }
  const cplx v = row.cwiseProduct(col).sum() / (kTwoPiI * (x - y));
  return {v.real(), v.imag()};
}

double RhVerifyReport::max_det() const {
  double r = 0.0;
  for (double v : det_residuals) r = std::max(r, v);
  for (double v : det_residuals_x) r = std::max(r, v);
  return r;
}

double RhVerifyReport::max_xy() const {
  double r = 0.0;
  for (double v : xy_residuals) r = std::max(r, v);
  return r;
}

double RhVerifyReport::max_jump() const {
  double r = 0.0;
  for (const auto& j : jumps) r = std::max(r, j.extrapolated / j.scale);
  return r;
}

RhVerifyReport rh_verify(const CdKernelData& data, const RhVerifyOptions& options) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* fam : {&data.type2_plus.front().weights(),
                          &data.type1_minus_swapped.front().weights()})
    for (const auto& w : *fam) {
      lo = std::min(lo, w.center());
      hi = std::max(hi, w.center());
    }
  const double pad = 0.5 * data.basis.scale;
  lo -= pad;
  hi += pad;

  RhVerifyReport rep;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> ux(lo, hi), uy(0.1, 1.0);
  for (int i = 0; i < options.det_points; ++i) {
    const double im = uy(rng) * (i % 2 == 0 ? 1.0 : -1.0);
    rep.points.emplace_back(ux(rng), im);
  }
  for (const auto& z : rep.points) {
    const auto Y = eval_Y(data, z, Side::Off, options.rh);
    const auto X = eval_X(data, z, Side::Off, options.rh);
    rep.det_residuals.push_back(det_residual(Y));
    rep.det_residuals_x.push_back(det_residual(X));
    rep.xy_residuals.push_back(xy_residual(X, Y));
  }
  for (int i = 0; i < options.jump_points; ++i) {
    const double x = lo + (hi - lo) * (i + 0.5) / options.jump_points;
    rep.jumps.push_back(verify_jump(data, x, options.deltas, RhMatrix::Y, options.rh));
    rep.jumps.push_back(verify_jump(data, x, options.deltas, RhMatrix::X, options.rh));
  }
  rep.asymptotics_y = verify_asymptotics(data, options.radii, RhMatrix::Y, options.rh);
  rep.asymptotics_x = verify_asymptotics(data, options.radii, RhMatrix::X, options.rh);
  return rep;
}

}  // namespace mixedmop
