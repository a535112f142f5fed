#include "mixedmop/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#ifndef MIXEDMOP_VERSION_STRING
#define MIXEDMOP_VERSION_STRING "0.0.0"
#endif

namespace mixedmop {

const char* version() { return MIXEDMOP_VERSION_STRING; }

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + " is missing \"" + key + "\"");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(where + " must be finite");
  return x;
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ValidationError(where + " must be an integer");
  return v.get<int>();
}

Weight weight_from_json(const json& v, const std::string& where) {
  const json& kind = field(v, "kind", where);
  if (!kind.is_string() || kind.get<std::string>() != "gaussian")
    throw ValidationError(where + ".kind must be \"gaussian\"");
  const double c = number(field(v, "center", where), where + ".center");
  const double var = number(field(v, "variance", where), where + ".variance");
  const double amp = v.contains("amplitude") ? number(v["amplitude"], where + ".amplitude") : 1.0;
  if (var <= 0) throw ValidationError(where + ".variance must be positive");
  if (amp <= 0) throw ValidationError(where + ".amplitude must be positive");
  return Weight::gaussian(c, var, amp);
}

WeightFamily family_from_json(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ValidationError(where + " must be a nonempty array");
  std::vector<Weight> ws;
  for (std::size_t i = 0; i < v.size(); ++i)
    ws.push_back(weight_from_json(v[i], where + "[" + std::to_string(i) + "]"));
  return WeightFamily(std::move(ws));
}

MultiIndex index_from_json(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ValidationError(where + " must be a nonempty array");
  std::vector<int> parts;
  for (std::size_t i = 0; i < v.size(); ++i)
    parts.push_back(integer(v[i], where + "[" + std::to_string(i) + "]"));
  return MultiIndex(std::move(parts));
}

std::vector<PointMultiplicity> points_from_json(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ValidationError(where + " must be a nonempty array");
  std::vector<PointMultiplicity> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != 2) throw ValidationError(w + " must be [point, multiplicity]");
    out.push_back({number(v[i][0], w + "[0]"), integer(v[i][1], w + "[1]")});
  }
  return out;
}

json points_to_json(const std::vector<PointMultiplicity>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back({p.point, p.multiplicity});
  return out;
}

json complex_list(const std::vector<cplx>& zs) {
  json out = json::array();
  for (auto z : zs) out.push_back({z.real(), z.imag()});
  return out;
}

}  // namespace

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str());
}

MopConfig mop_config_from_json(const json& doc) {
  MopConfig c;
  c.w1 = family_from_json(field(doc, "w1", "config"), "w1");
  c.w2 = family_from_json(field(doc, "w2", "config"), "w2");
  if (doc.contains("n")) c.n = index_from_json(doc["n"], "n");
  if (doc.contains("m")) c.m = index_from_json(doc["m"], "m");
  if (c.n && c.n->length() != c.w1.size()) throw ValidationError("n must have one part per w1 weight");
  if (c.m && c.m->length() != c.w2.size()) throw ValidationError("m must have one part per w2 weight");
  if (doc.contains("normalization")) {
    const json& v = doc["normalization"];
    const json& type = field(v, "type", "normalization");
    const int index = integer(field(v, "index", "normalization"), "normalization.index");
    if (!type.is_string()) throw ValidationError("normalization.type must be \"I\" or \"II\"");
    const auto t = type.get<std::string>();
    if (t == "I")
      c.normalization = Normalization::type_one(index - 1);
    else if (t == "II")
      c.normalization = Normalization::type_two(index - 1);
    else
      throw ValidationError("normalization.type must be \"I\" or \"II\"");
  }
  return c;
}

json to_json(const Weight& w) {
  if (!w.is_gaussian()) return {{"kind", "tabulated"}};
  const auto& g = w.as_gaussian();
  return {{"kind", "gaussian"}, {"center", g.center}, {"variance", g.variance}, {"amplitude", g.amplitude}};
}

json to_json(const MultiIndex& n) { return n.parts(); }

json to_json(const MopConfig& c) {
  json out;
  out["w1"] = json::array();
  for (const auto& w : c.w1) out["w1"].push_back(to_json(w));
  out["w2"] = json::array();
  for (const auto& w : c.w2) out["w2"].push_back(to_json(w));
  if (c.n) out["n"] = to_json(*c.n);
  if (c.m) out["m"] = to_json(*c.m);
  if (c.normalization)
    out["normalization"] = {
        {"type", c.normalization->kind == Normalization::Kind::TypeI ? "I" : "II"},
        {"index", c.normalization->index + 1}};
  return out;
}

BrownianConfig brownian_config_from_json(const json& doc) {
  BrownianConfig c;
  c.starts = points_from_json(field(doc, "starts", "config"), "starts");
  c.ends = points_from_json(field(doc, "ends", "config"), "ends");
  c.t = number(field(doc, "t", "config"), "t");
  if (doc.contains("n_scaling")) {
    if (!doc["n_scaling"].is_boolean()) throw ValidationError("n_scaling must be a boolean");
    c.variance_scaling = doc["n_scaling"].get<bool>();
  }
  c.validate();
  return c;
}

json to_json(const BrownianConfig& c) {
  return {{"starts", points_to_json(c.starts)},
          {"ends", points_to_json(c.ends)},
          {"t", c.t},
          {"n_scaling", c.variance_scaling}};
}

json to_json(const NormalityReport& r) {
  return {{"pair", {{"n", to_json(r.pair.n())}, {"m", to_json(r.pair.m())}}},
          {"normal", r.normal()},
          {"f_dimension_ok", r.f_dimension_ok},
          {"kernel_dimension", r.kernel_dimension},
          {"typeI_admissible", r.typeI_admissible},
          {"typeII_admissible", r.typeII_admissible},
          {"condition_estimate", r.condition_estimate}};
}

json to_json(const MixedMopSolution& s) {
  json polys = json::array();
  const auto coeffs = s.monomial_coefficients();
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    polys.push_back({{"j", j + 1}, {"coefficients", coeffs[j]}});
  return {{"pair", {{"n", to_json(s.pair().n())}, {"m", to_json(s.pair().m())}}},
          {"normalization",
           {{"type", s.normalization().kind == Normalization::Kind::TypeI ? "I" : "II"},
            {"index", s.normalization().index + 1}}},
          {"polynomials", polys},
          {"residual", s.residual()}};
}

json to_json(const RhVerifyReport& r) {
  json jumps = json::array();
  for (const auto& j : r.jumps)
    jumps.push_back({{"matrix", j.which == RhMatrix::Y ? "Y" : "X"},
                     {"x", j.x},
                     {"deltas", j.deltas},
                     {"residuals", j.residuals},
                     {"extrapolated", j.extrapolated},
                     {"relative", j.scale > 0 ? j.extrapolated / j.scale : j.extrapolated},
                     {"passed", j.passed}});
  auto asym = [](const AsymptoticReport& a) {
    return json{{"radii", a.radii}, {"errors", a.errors}, {"ratios", a.ratios}, {"passed", a.passed}};
  };
  return {{"points", complex_list(r.points)},
          {"det_residuals", r.det_residuals},
          {"det_residuals_x", r.det_residuals_x},
          {"x_y_consistency", r.xy_residuals},
          {"jump_residuals", jumps},
          {"asymptotic_ratios", {{"Y", asym(r.asymptotics_y)}, {"X", asym(r.asymptotics_x)}}},
          {"max_det_residual", r.max_det()},
          {"max_x_y_residual", r.max_xy()},
          {"max_jump_residual", r.max_jump()}};
}

std::string format_double(double v) {
  if (v == 0) return std::signbit(v) ? "-0" : "0";
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != header_.size()) throw ValidationError("CSV row width does not match the header");
  rows_.push_back(row);
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

CsvTable moment_table_csv(const ProductMomentTable& t) {
  CsvTable csv({"j", "l", "k", "value", "error_bound"});
  for (int j = 0; j < t.first_size(); ++j)
    for (int l = 0; l < t.second_size(); ++l)
      for (int k = 0; k <= t.max_order(); ++k)
        csv.add_row({double(j + 1), double(l + 1), double(k), t(j, l, k), t.error_bound(j, l, k)});
  return csv;
}

std::vector<double> GridSpec::points() const {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = i == count - 1 ? max : min + (max - min) * i / (count - 1);
  return out;
}

GridSpec GridSpec::parse(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos) throw ValidationError("grid must be min:max:count, got " + text);
  auto num = [&](const std::string& s) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
      throw ValidationError("grid bound is not a number: " + s);
    return v;
  };
  GridSpec g;
  g.min = num(text.substr(0, a));
  g.max = num(text.substr(a + 1, b - a - 1));
  const auto cs = text.substr(b + 1);
  auto r = std::from_chars(cs.data(), cs.data() + cs.size(), g.count);
  if (r.ec != std::errc() || r.ptr != cs.data() + cs.size())
    throw ValidationError("grid count is not an integer: " + cs);
  if (g.count < 2 || g.count > 2000) throw ValidationError("grid count must lie in [2, 2000]");
  if (!(g.min < g.max)) throw ValidationError("grid needs min < max");
  return g;
}

}  // namespace mixedmop
