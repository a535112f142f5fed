#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mixedmop/brownian.hpp"
#include "mixedmop/io.hpp"
#include "mixedmop/kernel.hpp"
#include "mixedmop/mop.hpp"
#include "mixedmop/rh.hpp"

namespace py = pybind11;
using namespace mixedmop;

namespace {

Precision parse_precision(const std::string& p) {
  if (p == "double") return Precision::Double;
  if (p == "extended") return Precision::Extended;
  throw ValidationError("precision must be \"double\" or \"extended\"");
}

Normalization parse_normalization(const std::string& type, int index) {
  if (type == "I") return Normalization::type_one(index);
  if (type == "II") return Normalization::type_two(index);
  throw ValidationError("normalization type must be \"I\" or \"II\"");
}

py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

ProductMomentTable table_for(const WeightFamily& w1, const WeightFamily& w2, int order,
                             const std::string& precision) {
  return build_moment_table(w1, w2, order, {.basis = std::nullopt, .precision = parse_precision(precision)});
}

std::vector<PointMultiplicity> points(const std::vector<std::pair<double, int>>& v) {
  std::vector<PointMultiplicity> out;
  for (const auto& [x, k] : v) out.push_back({x, k});
  return out;
}

std::vector<std::pair<double, int>> pairs(const std::vector<PointMultiplicity>& v) {
  std::vector<std::pair<double, int>> out;
  for (const auto& p : v) out.emplace_back(p.point, p.multiplicity);
  return out;
}

class Kernel {
 public:
  Kernel(std::vector<Weight> w1, std::vector<Weight> w2, std::vector<int> n, std::vector<int> m,
         const std::string& precision)
      : pair_(MultiIndexPair::balanced(MultiIndex(std::move(n)), MultiIndex(std::move(m)))),
        table_(table_for(WeightFamily(std::move(w1)), WeightFamily(std::move(w2)),
                         kernel_moment_order(pair_), precision)),
        sys_(build_biorthogonal(pair_, table_)),
        cd_(build_cd_data(pair_, table_)) {}

  double direct(double x, double y) const { return kernel_direct(sys_, x, y); }
  double cd(double x, double y) const { return kernel_cd(cd_, x, y); }
  double cd_diagonal(double x) const { return kernel_cd_diagonal(cd_, x); }
  double rh(double x, double y) const { return kernel_rh(cd_, x, y).value; }

  Eigen::MatrixXd grid(const std::vector<double>& xs, const std::vector<double>& ys) const {
    Eigen::MatrixXd out(xs.size(), ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < ys.size(); ++j) out(i, j) = kernel_direct(sys_, xs[i], ys[j]);
    return out;
  }

  std::pair<double, double> trace() const {
    const auto e = kernel_trace(sys_);
    return {e.value, e.error};
  }

  double idempotence(const std::vector<double>& xs, const std::vector<double>& ys) const {
    return idempotence_residual(sys_, xs, ys);
  }

  Eigen::MatrixXcd Y(cplx z) const { return eval_Y(cd_, z).matrix; }
  Eigen::MatrixXcd X(cplx z) const { return eval_X(cd_, z).matrix; }

  py::object verify(std::uint64_t seed) const {
    RhVerifyOptions o;
    o.seed = seed;
    RhVerifyReport r;
    {
      py::gil_scoped_release release;
      r = rh_verify(cd_, o);
    }
    return to_python(to_json(r));
  }

  const BiorthogonalSystem& system() const { return sys_; }
  int dimension() const { return sys_.dimension(); }

 private:
  MultiIndexPair pair_;
  ProductMomentTable table_;
  BiorthogonalSystem sys_;
  CdKernelData cd_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mixed-type multiple orthogonal polynomials and non-intersecting Brownian motions";
  m.attr("__version__") = version();

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<AccuracyFailure>(m, "AccuracyFailure", numerical.ptr());
  py::register_exception<DiagonalRegion>(m, "DiagonalRegion", numerical.ptr());
  py::register_exception<NotNormalizable>(m, "NotNormalizable", numerical.ptr());
  py::register_exception<DegeneratePair>(m, "DegeneratePair", numerical.ptr());

  py::class_<Weight>(m, "Weight")
      .def_static("gaussian", &Weight::gaussian, py::arg("center"), py::arg("variance"),
                  py::arg("amplitude") = 1.0)
      .def("__call__", py::overload_cast<double>(&Weight::operator(), py::const_), py::arg("x"))
      .def_property_readonly("center", &Weight::center)
      .def_property_readonly("width", &Weight::width)
      .def("__repr__", [](const Weight& w) { return "Weight(" + to_json(w).dump() + ")"; });

  m.def("transition_weight", &transition_weight, py::arg("t"), py::arg("a"), py::arg("scale") = 1,
        "Gaussian transition density P(t, a, x) as a weight");

  py::class_<MixedMopSolution>(m, "Solution")
      .def("polynomial", py::overload_cast<int, double>(&MixedMopSolution::polynomial, py::const_),
           py::arg("j"), py::arg("x"))
      .def("form", &MixedMopSolution::form, py::arg("x"))
      .def_property_readonly("monomial_coefficients", &MixedMopSolution::monomial_coefficients)
      .def_property_readonly("residual", &MixedMopSolution::residual);

  m.def(
      "solve",
      [](std::vector<Weight> w1, std::vector<Weight> w2, std::vector<int> n, std::vector<int> mm,
         const std::string& type, int index, const std::string& precision) {
        const MultiIndex ni(std::move(n)), mi(std::move(mm));
        const auto t = table_for(WeightFamily(std::move(w1)), WeightFamily(std::move(w2)),
                                 required_moment_order(ni, mi), precision);
        return solve_mixed(MultiIndexPair::mop(ni, mi), t, parse_normalization(type, index));
      },
      py::arg("w1"), py::arg("w2"), py::arg("n"), py::arg("m"), py::arg("type") = "II",
      py::arg("index") = 0, py::arg("precision") = "double",
      "Mixed-type polynomials A_1..A_p for |n| = |m| + 1 (0-based normalisation index)");

  m.def(
      "check_normality",
      [](std::vector<Weight> w1, std::vector<Weight> w2, std::vector<int> n, std::vector<int> mm) {
        const MultiIndex ni(std::move(n)), mi(std::move(mm));
        const auto t = table_for(WeightFamily(std::move(w1)), WeightFamily(std::move(w2)),
                                 required_moment_order(ni, mi), "double");
        return to_python(to_json(check_normality(MultiIndexPair::mop(ni, mi), t)));
      },
      py::arg("w1"), py::arg("w2"), py::arg("n"), py::arg("m"));

  py::class_<Kernel>(m, "Kernel")
      .def(py::init<std::vector<Weight>, std::vector<Weight>, std::vector<int>, std::vector<int>,
                    const std::string&>(),
           py::arg("w1"), py::arg("w2"), py::arg("n"), py::arg("m"), py::arg("precision") = "double")
      .def("__call__", &Kernel::direct, py::arg("x"), py::arg("y"))
      .def("direct", &Kernel::direct, py::arg("x"), py::arg("y"))
      .def("cd", &Kernel::cd, py::arg("x"), py::arg("y"))
      .def("cd_diagonal", &Kernel::cd_diagonal, py::arg("x"))
      .def("rh", &Kernel::rh, py::arg("x"), py::arg("y"))
      .def("grid", &Kernel::grid, py::arg("xs"), py::arg("ys"))
      .def("trace", &Kernel::trace, "(value, error) of the integral of K(x, x)")
      .def("idempotence_residual", &Kernel::idempotence, py::arg("xs"), py::arg("ys"))
      .def("Y", &Kernel::Y, py::arg("z"))
      .def("X", &Kernel::X, py::arg("z"))
      .def("rh_verify", &Kernel::verify, py::arg("seed") = 1)
      .def_property_readonly("dimension", &Kernel::dimension)
      .def_property_readonly("condition", [](const Kernel& k) { return k.system().condition(); })
      .def_property_readonly("inverse_residual",
                             [](const Kernel& k) { return k.system().inverse_residual(); });

  py::class_<BrownianConfig>(m, "BrownianConfig")
      .def(py::init([](const std::vector<std::pair<double, int>>& starts,
                       const std::vector<std::pair<double, int>>& ends, double t, bool n_scaling) {
             BrownianConfig c;
             c.starts = points(starts);
             c.ends = points(ends);
             c.t = t;
             c.variance_scaling = n_scaling;
             c.validate();
             return c;
           }),
           py::arg("starts"), py::arg("ends"), py::arg("t"), py::arg("n_scaling") = false)
      .def_property_readonly("starts", [](const BrownianConfig& c) { return pairs(c.starts); })
      .def_property_readonly("ends", [](const BrownianConfig& c) { return pairs(c.ends); })
      .def_readonly("t", &BrownianConfig::t)
      .def_readonly("n_scaling", &BrownianConfig::variance_scaling)
      .def_property_readonly("paths", &BrownianConfig::paths);

  py::class_<CorrelationKernel>(m, "CorrelationKernel")
      .def(py::init([](const BrownianConfig& c, const std::string& precision) {
             return CorrelationKernel(c, parse_precision(precision));
           }),
           py::arg("config"), py::arg("precision") = "double")
      .def("__call__", &CorrelationKernel::operator(), py::arg("x"), py::arg("y"))
      .def("r", [](const CorrelationKernel& k, const std::vector<double>& x) { return r_m(k, x); },
           py::arg("points"), "det K(x_i, x_j)")
      .def_property_readonly("paths", &CorrelationKernel::paths);

  py::class_<KarlinMcGregorDensity>(m, "KarlinMcGregorDensity")
      .def(py::init<const BrownianConfig&>(), py::arg("config"))
      .def("__call__", &KarlinMcGregorDensity::eval, py::arg("x"))
      .def("log", &KarlinMcGregorDensity::log_eval, py::arg("x"))
      .def_property_readonly("dimension", &KarlinMcGregorDensity::dimension);

  m.def(
      "partition_function",
      [](const BrownianConfig& c) {
        const auto z = km_normalization(c);
        py::dict d;
        d["value"] = z.value;
        d["error_bound"] = z.error_bound;
        d["closed_form"] = z.andreief;
        d["nodes_per_axis"] = z.nodes_per_axis;
        return d;
      },
      py::arg("config"));

  m.def(
      "sample_positions",
      [](const BrownianConfig& c, int count, std::uint64_t seed, int thinning, int chains) {
        SamplerOptions o;
        o.thinning = thinning;
        o.chains = chains;
        SampleSet s;
        {
          py::gil_scoped_release release;
          s = sample_positions(KarlinMcGregorDensity(c), count, seed, o);
        }
        Eigen::MatrixXd draws(s.draws.size(), c.paths());
        for (std::size_t i = 0; i < s.draws.size(); ++i) draws.row(i) = s.draws[i].transpose();
        py::dict d;
        d["draws"] = draws;
        d["acceptance"] = s.acceptance;
        d["thinning"] = s.thinning;
        d["r_hat"] = s.r_hat;
        d["autocorrelation_time"] = s.autocorrelation_time;
        d["converged"] = s.converged;
        return d;
      },
      py::arg("config"), py::arg("count"), py::arg("seed") = 42, py::arg("thinning") = 10,
      py::arg("chains") = 4, "Metropolis draws of the sorted positions; thinning 0 picks it from a pilot run");
}
