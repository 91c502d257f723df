#include "affine/model_io.hpp"

#include "affine/detail/overloaded.hpp"

#include <algorithm>
#include <fstream>

namespace affine::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ParseError(where + ": " + what); }

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

Vec vec(const json& j, const std::string& where, int expected = -1) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = number(j[k], where + "[" + std::to_string(k) + "]");
  if (expected >= 0 && v.size() != expected) {
    fail(where, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  }
  return v;
}

Mat mat(const json& j, const std::string& where, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) fail(where, "expected " + std::to_string(rows) + " rows");
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) m.row(r) = vec(j[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]", cols).transpose();
  return m;
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail(where, std::string("missing \"") + key + "\"");
  return obj.at(key);
}

JumpMeasure jump(const json& j, const std::string& where, int dim) {
  if (!j.is_object()) fail(where, "expected a jump spec object");
  const std::string type = j.value("type", "");
  if (type == "zero") return JumpMeasure::zero();
  if (type == "point_masses") {
    std::vector<PointMass> atoms;
    const json& arr = field(j, "atoms", where);
    if (!arr.is_array()) fail(where + ".atoms", "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string w = where + ".atoms[" + std::to_string(k) + "]";
      atoms.push_back({vec(field(arr[k], "location", w), w + ".location", dim), number(field(arr[k], "weight", w), w + ".weight")});
    }
    return JumpMeasure::point_masses(std::move(atoms));
  }
  if (type == "one_sided_exponential") {
    return JumpMeasure::one_sided_exponential(integer(field(j, "coordinate", where), where + ".coordinate"),
                                              number(field(j, "rate", where), where + ".rate"),
                                              number(field(j, "intensity", where), where + ".intensity"));
  }
  if (type == "gaussian") {
    return JumpMeasure::gaussian(integer(field(j, "coordinate", where), where + ".coordinate"),
                                 number(field(j, "mean", where), where + ".mean"),
                                 number(field(j, "stddev", where), where + ".stddev"),
                                 number(field(j, "intensity", where), where + ".intensity"));
  }
  fail(where, "unknown jump type \"" + type + "\"");
}

json jump_json(const JumpMeasure& m) {
  return std::visit(
      detail::overloaded{
          [](const ZeroMeasure&) { return json{{"type", "zero"}}; },
          [](const PointMassMixture& pm) {
            json atoms = json::array();
            for (const auto& a : pm.atoms) atoms.push_back({{"location", to_json(a.location)}, {"weight", a.weight}});
            return json{{"type", "point_masses"}, {"atoms", atoms}};
          },
          [](const OneSidedExponential& e) {
            return json{{"type", "one_sided_exponential"}, {"coordinate", e.coordinate}, {"rate", e.rate}, {"intensity", e.intensity}};
          },
          [](const GaussianFactor& g) {
            return json{{"type", "gaussian"}, {"coordinate", g.coordinate}, {"mean", g.mean}, {"stddev", g.stddev},
                        {"intensity", g.intensity}};
          },
          [](const NumericDensity&) -> json {
            throw ParseError("NumericDensity jump measures have no JSON representation");
          },
      },
      m.variant());
}

Vec flatten(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }
Mat unflatten(const Vec& v, int d) { return Eigen::Map<const Mat>(v.data(), d, d); }

AffineParams parse_canonical(const json& doc, int m, int n) {
  const int d = m + n;
  if (m < 0 || n < 0 || d < 1) fail("space.canonical", "need m, n >= 0 and m + n >= 1");
  AffineParams p;
  p.space = StateSpace::canonical(m, n);
  CanonicalParams c;
  c.a = doc.contains("a") ? mat(doc["a"], "a", d, d) : Mat::Zero(d, d);
  c.b = doc.contains("b") ? vec(doc["b"], "b", d) : Vec::Zero(d);
  c.alpha.assign(static_cast<std::size_t>(d), Mat::Zero(d, d));
  c.beta.assign(static_cast<std::size_t>(d), Vec::Zero(d));
  c.mu.assign(static_cast<std::size_t>(d), JumpMeasure::zero());
  auto list = [&](const char* key) -> const json* {
    if (!doc.contains(key)) return nullptr;
    const json& j = doc[key];
    if (!j.is_array() || static_cast<int>(j.size()) != d) fail(key, "expected one entry per coordinate (" + std::to_string(d) + ")");
    return &j;
  };
  if (const json* al = list("alpha")) {
    for (int i = 0; i < d; ++i) c.alpha[static_cast<std::size_t>(i)] = mat((*al)[static_cast<std::size_t>(i)], "alpha[" + std::to_string(i) + "]", d, d);
  }
  if (const json* be = list("beta")) {
    for (int i = 0; i < d; ++i) c.beta[static_cast<std::size_t>(i)] = vec((*be)[static_cast<std::size_t>(i)], "beta[" + std::to_string(i) + "]", d);
  }
  if (doc.contains("jumps")) {
    const json& jm = doc["jumps"];
    if (!jm.is_object()) fail("jumps", "expected an object");
    if (jm.contains("m")) c.m = jump(jm["m"], "jumps.m", d);
    if (jm.contains("mu")) {
      const json& mu = jm["mu"];
      if (!mu.is_array() || static_cast<int>(mu.size()) != d) fail("jumps.mu", "expected one spec per coordinate");
      for (int i = 0; i < d; ++i) c.mu[static_cast<std::size_t>(i)] = jump(mu[static_cast<std::size_t>(i)], "jumps.mu[" + std::to_string(i) + "]", d);
    }
  }
  p.coefficients = std::move(c);
  return p;
}

AffineParams parse_matrix(const json& doc, int d) {
  if (d < 2) fail("space.matrix", "d must be at least 2; use {\"canonical\": {\"m\": 1, \"n\": 0}} for d = 1");
  const int N = d * d;
  AffineParams p;
  p.space = StateSpace::matrix_cone(d);
  MatrixParams mp;
  mp.alpha = doc.contains("alpha") ? mat(doc["alpha"], "alpha", d, d) : Mat::Zero(d, d);
  mp.b = doc.contains("b") ? mat(doc["b"], "b", d, d) : Mat::Zero(d, d);
  mp.B = doc.contains("beta") ? mat(doc["beta"], "beta", N, N) : Mat::Zero(N, N);
  if (doc.contains("a")) fail("a", "the matrix cone has no separate constant diffusion; use alpha");
  if (doc.contains("jumps")) {
    const json& jm = doc["jumps"];
    if (jm.contains("m")) {
      std::vector<PointMass> atoms;
      const json& arr = field(jm["m"], "atoms", "jumps.m");
      for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string w = "jumps.m.atoms[" + std::to_string(k) + "]";
        atoms.push_back({flatten(mat(field(arr[k], "location", w), w + ".location", d, d)), number(field(arr[k], "weight", w), w + ".weight")});
      }
      if (!atoms.empty()) mp.m = JumpMeasure::point_masses(std::move(atoms));
    }
    if (jm.contains("mu")) {
      const json& arr = field(jm["mu"], "atoms", "jumps.mu");
      for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string w = "jumps.mu.atoms[" + std::to_string(k) + "]";
        mp.mu.atoms.push_back({mat(field(arr[k], "location", w), w + ".location", d, d), mat(field(arr[k], "weight", w), w + ".weight", d, d)});
      }
    }
  }
  p.coefficients = std::move(mp);
  return p;
}

}  // namespace

json to_json(const Vec& v) {
  json j = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v[k]);
  return j;
}

json to_json(const Mat& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(to_json(Vec(m.row(r).transpose())));
  return j;
}

json to_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json to_json(const AffineParams& params) {
  json doc;
  if (params.is_canonical()) {
    const auto& cs = params.space.canonical_space();
    const auto& c = params.canonical();
    doc["space"] = {{"canonical", {{"m", cs.m}, {"n", cs.n}}}};
    doc["a"] = to_json(c.a);
    doc["b"] = to_json(c.b);
    doc["alpha"] = json::array();
    for (const auto& al : c.alpha) doc["alpha"].push_back(to_json(al));
    doc["beta"] = json::array();
    for (const auto& be : c.beta) doc["beta"].push_back(to_json(be));
    json mu = json::array();
    for (const auto& j : c.mu) mu.push_back(jump_json(j));
    doc["jumps"] = {{"m", jump_json(c.m)}, {"mu", mu}};
  } else {
    const int d = params.space.matrix_space().d;
    const auto& mp = params.matrix();
    doc["space"] = {{"matrix", {{"d", d}}}};
    doc["alpha"] = to_json(mp.alpha);
    doc["b"] = to_json(mp.b);
    doc["beta"] = to_json(mp.B);
    json m_atoms = json::array();
    if (const auto* pm = std::get_if<PointMassMixture>(&mp.m.variant())) {
      for (const auto& a : pm->atoms) m_atoms.push_back({{"location", to_json(unflatten(a.location, d))}, {"weight", a.weight}});
    } else if (!mp.m.is_zero()) {
      throw ParseError("matrix-cone m must be a point-mass mixture");
    }
    json mu_atoms = json::array();
    for (const auto& a : mp.mu.atoms) mu_atoms.push_back({{"location", to_json(a.location)}, {"weight", to_json(a.weight)}});
    doc["jumps"] = {{"m", {{"atoms", m_atoms}}}, {"mu", {{"atoms", mu_atoms}}}};
  }
  return doc;
}

ModelSpecFile parse_model(const json& doc) {
  if (!doc.is_object()) fail("model", "expected a JSON object");
  const json& space = field(doc, "space", "model");
  ModelSpecFile spec;
  if (space.contains("canonical")) {
    const json& cs = space["canonical"];
    spec.params = parse_canonical(doc, integer(field(cs, "m", "space.canonical"), "space.canonical.m"),
                                  integer(field(cs, "n", "space.canonical"), "space.canonical.n"));
  } else if (space.contains("matrix")) {
    spec.params = parse_matrix(doc, integer(field(space["matrix"], "d", "space.matrix"), "space.matrix.d"));
  } else {
    fail("space", "expected \"canonical\" or \"matrix\"");
  }
  const int dim = spec.params.space.dimension();
  if (doc.contains("rate")) {
    const json& r = doc["rate"];
    spec.rate = ShortRateSpec{number(field(r, "l", "rate"), "rate.l"),
                              r.contains("lambda") ? vec(r["lambda"], "rate.lambda", dim) : Vec(Vec::Zero(dim))};
  }
  if (doc.contains("asset")) spec.theta = vec(field(doc["asset"], "theta", "asset"), "asset.theta", dim);
  if (doc.contains("scenarios")) {
    if (!doc["scenarios"].is_object()) fail("scenarios", "expected an object of named blocks");
    spec.scenarios = doc["scenarios"];
  }
  for (const auto& [key, value] : doc.items()) {
    static const std::vector<std::string> known = {"space", "a", "alpha", "b", "beta", "jumps", "rate", "asset", "scenarios"};
    if (std::find(known.begin(), known.end(), key) == known.end()) fail("model", "unknown key \"" + key + "\"");
  }
  return spec;
}

ModelSpecFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON in " + path + ": " + e.what());
  }
  return parse_model(doc);
}

json to_json(const ModelSpecFile& spec) {
  json doc = to_json(spec.params);
  if (spec.rate) doc["rate"] = {{"l", spec.rate->l}, {"lambda", to_json(spec.rate->lambda)}};
  if (spec.theta) doc["asset"] = {{"theta", to_json(*spec.theta)}};
  if (!spec.scenarios.empty()) doc["scenarios"] = spec.scenarios;
  return doc;
}

}  // namespace affine::io
