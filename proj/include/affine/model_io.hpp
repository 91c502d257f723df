#pragma once

// JSON model files:
//   {"space": {"canonical": {"m": 1, "n": 1}} | {"matrix": {"d": 2}},
//    "a": [[...]], "alpha": [...], "b": [...], "beta": [...],
//    "jumps": {"m": {...}, "mu": [...]},
//    "rate": {"l": 0.0, "lambda": [...]}, "asset": {"theta": [...]},
//    "scenarios": {"name": {...}}}
// Canonical spaces take alpha as a list of d matrices, beta as a list of d
// vectors and mu as a list of d jump specs. The matrix cone takes alpha and b
// as d x d matrices, beta as the (d*d) x (d*d) matrix on column-major vec,
// m as {"atoms": [{"location": [[...]], "weight": w}]} and mu as
// {"atoms": [{"location": [[...]], "weight": [[...]]}]}.
//
// Jump specs: {"type": "zero"}, {"type": "point_masses", "atoms": [{"location": [...], "weight": w}]},
// {"type": "one_sided_exponential", "coordinate": k, "rate": r, "intensity": c},
// {"type": "gaussian", "coordinate": k, "mean": mu, "stddev": s, "intensity": c}.

#include "affine/pricing.hpp"
#include "affine/state_space.hpp"

#include "json.hpp"

#include <optional>
#include <string>

namespace affine::io {

struct ModelSpecFile {
  AffineParams params;
  std::optional<ShortRateSpec> rate;
  std::optional<Vec> theta;
  /// Named blocks of default flag values, kept verbatim.
  nlohmann::json scenarios = nlohmann::json::object();
};

/// Throws ParseError on schema violations; admissibility is not checked here.
ModelSpecFile parse_model(const nlohmann::json& doc);
ModelSpecFile load_model(const std::string& path);

/// Canonical form: parse_model(to_json(s)) reproduces s and to_json is a fixed point.
nlohmann::json to_json(const ModelSpecFile& spec);
nlohmann::json to_json(const AffineParams& params);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const Vec& v);
nlohmann::json to_json(const Mat& m);
nlohmann::json to_json(Complex z);

}  // namespace affine::io
