#include "affine/cli.hpp"

#include "affine/detail/overloaded.hpp"
#include "affine/mc_oracle.hpp"
#include "affine/model_io.hpp"
#include "affine/pricing.hpp"
#include "affine/transform.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace affine::cli {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: \"" + s + "\"");
  }
  if (used != s.size()) throw UsageError("not a number: \"" + s + "\"");
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  if (out.empty()) throw UsageError("empty vector");
  return out;
}

Vec parse_vec(const std::string& s) {
  const auto toks = split(s);
  Vec v(static_cast<Eigen::Index>(toks.size()));
  for (std::size_t k = 0; k < toks.size(); ++k) v[static_cast<Eigen::Index>(k)] = parse_real(toks[k]);
  return v;
}

// "re", "re+imi", "re-imi", "imi", "i", "-i".
Complex parse_complex(const std::string& s) {
  if (s.empty()) throw UsageError("empty complex token");
  if (s.back() != 'i') return {parse_real(s), 0.0};
  const std::string body = s.substr(0, s.size() - 1);
  std::size_t split_at = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split_at = k;
      break;
    }
  }
  auto imag = [](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return parse_real(t);
  };
  if (split_at == std::string::npos) return {0.0, imag(body)};
  return {parse_real(body.substr(0, split_at)), imag(body.substr(split_at))};
}

CVec parse_cvec(const std::string& s) {
  const auto toks = split(s);
  CVec v(static_cast<Eigen::Index>(toks.size()));
  for (std::size_t k = 0; k < toks.size(); ++k) v[static_cast<Eigen::Index>(k)] = parse_complex(toks[k]);
  return v;
}

json cjson(const CVec& v) {
  json j = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(io::to_json(v[k]));
  return j;
}

json status_json(const SolveStatus& s) {
  return std::visit(detail::overloaded{
                        [](const Completed&) { return json{{"kind", "completed"}}; },
                        [](const BlowUp& b) { return json{{"kind", "blow_up"}, {"t_star", b.t_star}, {"bracket", b.bracket}}; },
                        [](const BoundaryContact& b) {
                          return json{{"kind", "boundary_contact"}, {"t", b.t}, {"boundary", b.boundary}};
                        },
                        [](const DomainExit& e) { return json{{"kind", "domain_exit"}, {"t", e.t}, {"boundary", e.boundary}}; },
                    },
                    s);
}

json verdict_json(const ExplosionVerdict& v) {
  return std::visit(detail::overloaded{
                        [](const FiniteTime& f) {
                          return json{{"verdict", "finite"}, {"t_plus", f.t_plus}, {"tolerance", f.tolerance}};
                        },
                        [](const ExceedsHorizon& e) { return json{{"verdict", "exceeds_horizon"}, {"t_max", e.t_max}}; },
                        [](const IndeterminateTime& i) { return json{{"verdict", "indeterminate"}, {"reason", i.reason}}; },
                    },
                    v);
}

// --- CSV rendering: one header row of leaf paths and one row of values. ---

std::string csv_cell(const json& leaf) {
  if (!leaf.is_string()) return leaf.dump();
  const std::string s = leaf.get<std::string>();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void flatten(const json& j, const std::string& prefix, std::vector<std::string>& keys, std::vector<std::string>& vals) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, keys, vals);
  } else if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) flatten(j[k], prefix + "[" + std::to_string(k) + "]", keys, vals);
  } else {
    keys.push_back(prefix);
    vals.push_back(csv_cell(j));
  }
}

void emit(const json& doc, const std::string& format, std::ostream& out) {
  if (format == "csv") {
    std::vector<std::string> keys, vals;
    flatten(doc, "", keys, vals);
    for (std::size_t k = 0; k < keys.size(); ++k) out << (k ? "," : "") << keys[k];
    out << "\n";
    for (std::size_t k = 0; k < vals.size(); ++k) out << (k ? "," : "") << vals[k];
    out << "\n";
  } else {
    out << doc.dump(2) << "\n";
  }
}

struct Flags {
  std::string model, x, y, u, theta, out, format = "json", scenario, type = "call";
  double T = 0.0, t = 0.0, tol = 1e-8, strike = 1.0, damping = 0.0, horizon = 0.0;
  int asset = -1;
  std::uint64_t seed = 1;
  long paths = 100'000;
  int steps = 200;
};

struct Context {
  Flags f;
  io::ModelSpecFile spec;
  CLI::App* sub = nullptr;

  bool given(const std::string& name) const { return sub->count("--" + name) > 0; }

  // Flag value, else the scenario default, else an error.
  std::string text(const std::string& name, const std::string& value) const {
    if (given(name)) return value;
    if (const json* sc = scenario(); sc != nullptr && sc->contains(name)) {
      const json& v = (*sc)[name];
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number()) return v.dump();
      if (v.is_array()) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + (v[k].is_string() ? v[k].get<std::string>() : v[k].dump());
        return s;
      }
    }
    throw UsageError("missing --" + name);
  }
  bool has(const std::string& name) const {
    if (given(name)) return true;
    const json* sc = scenario();
    return sc != nullptr && sc->contains(name);
  }
  double real(const std::string& name, double value) const { return given(name) ? value : parse_real(text(name, "")); }

  const json* scenario() const {
    if (f.scenario.empty()) return nullptr;
    if (!spec.scenarios.contains(f.scenario)) throw UsageError("no scenario named \"" + f.scenario + "\"");
    return &spec.scenarios[f.scenario];
  }

  int dim() const { return spec.params.space.dimension(); }
  ShortRateSpec rate() const { return spec.rate.value_or(ShortRateSpec::constant(0.0, dim())); }
  Vec theta() const {
    if (has("theta")) return parse_vec(text("theta", f.theta));
    if (spec.theta) return *spec.theta;
    throw UsageError("missing --theta (or an \"asset\" block in the model)");
  }
};

int cmd_validate(Context& c, std::ostream& out) {
  const ValidationReport rep = validate(c.spec.params);
  json v = json::array();
  for (const auto& viol : rep.violations) v.push_back({{"id", viol.id}, {"message", viol.message}});
  json doc{{"passed", rep.passed}, {"violations", v}};
  if (std::isfinite(rep.inward_margin)) doc["inward_margin"] = rep.inward_margin;
  emit(doc, c.f.format, out);
  return rep.passed ? kOk : kValidation;
}

json moment_json(const MomentResult& m) {
  json doc = std::visit(detail::overloaded{
                            [](const FiniteMoment& f) {
                              return json{{"verdict", "finite"}, {"value", f.value}, {"p", f.p}, {"q", io::to_json(f.q)}};
                            },
                            [](const InfiniteMoment& i) { return json{{"verdict", "infinite"}, {"t_plus", i.t_plus}}; },
                            [](const IndeterminateMoment& i) { return json{{"verdict", "indeterminate"}, {"reason", i.reason}}; },
                        },
                        m.verdict);
  doc["certificate"] = to_string(m.certificate);
  doc["status"] = status_json(m.status);
  return doc;
}

int cmd_moment(Context& c, std::ostream& out) {
  const auto fam = build_family(c.spec.params);
  const auto m = exp_moment(fam, parse_vec(c.text("x", c.f.x)), parse_vec(c.text("y", c.f.y)), c.real("T", c.f.T));
  emit(moment_json(m), c.f.format, out);
  return kOk;
}

int cmd_cf(Context& c, std::ostream& out) {
  const auto fam = build_family(c.spec.params);
  const auto r = char_function(fam, parse_vec(c.text("x", c.f.x)), parse_cvec(c.text("u", c.f.u)), c.real("T", c.f.T));
  json doc;
  if (const auto* v = std::get_if<CFValue>(&r)) {
    doc = {{"verdict", "value"}, {"value", io::to_json(v->value)}, {"phi", io::to_json(v->phi)}, {"psi", cjson(v->psi)},
           {"modulus_slack", v->modulus_slack}};
  } else {
    const auto& un = std::get<CFUnsupported>(r);
    doc = {{"verdict", "unsupported"}, {"clause", un.clause}, {"reason", un.reason}};
  }
  emit(doc, c.f.format, out);
  return kOk;
}

template <class S>
void write_trajectory(const Trajectory<S>& tr, const std::string& format, std::ostream& out) {
  constexpr bool cplx = !std::is_same_v<S, double>;
  json status{{"status", status_json(tr.status)}, {"certificate", to_string(tr.certificate)},
              {"error_estimate", tr.error_estimate}, {"steps", tr.times.size() - 1}};
  const auto d = tr.q.front().size();
  if (format == "csv") {
    out << "t";
    if constexpr (cplx) {
      out << ",re_p,im_p";
      for (Eigen::Index k = 0; k < d; ++k) out << ",re_q_" << k + 1 << ",im_q_" << k + 1;
    } else {
      out << ",p";
      for (Eigen::Index k = 0; k < d; ++k) out << ",q_" << k + 1;
    }
    out << "\n";
    auto cell = [&](double v) { out << "," << json(v).dump(); };
    for (std::size_t r = 0; r < tr.times.size(); ++r) {
      out << json(tr.times[r]).dump();
      if constexpr (cplx) {
        cell(tr.p[r].real());
        cell(tr.p[r].imag());
        for (Eigen::Index k = 0; k < d; ++k) {
          cell(tr.q[r][k].real());
          cell(tr.q[r][k].imag());
        }
      } else {
        cell(tr.p[r]);
        for (Eigen::Index k = 0; k < d; ++k) cell(tr.q[r][k]);
      }
      out << "\n";
    }
    out << "# " << status.dump() << "\n";
    return;
  }
  json doc = status;
  doc["t"] = tr.times;
  json p = json::array(), q = json::array();
  for (std::size_t r = 0; r < tr.times.size(); ++r) {
    if constexpr (cplx) {
      p.push_back(io::to_json(tr.p[r]));
      q.push_back(cjson(tr.q[r]));
    } else {
      p.push_back(tr.p[r]);
      q.push_back(io::to_json(tr.q[r]));
    }
  }
  doc["p"] = p;
  doc["q"] = q;
  out << doc.dump(2) << "\n";
}

int cmd_solve(Context& c, std::ostream& out) {
  const auto fam = build_family(c.spec.params);
  SolveOptions opts;
  if (c.given("tol")) opts.rel_tol = c.f.tol;
  const double T = c.real("T", c.f.T);
  if (c.has("u")) {
    write_trajectory(solve_complex(fam, parse_cvec(c.text("u", c.f.u)), T, opts), c.f.format, out);
  } else {
    write_trajectory(solve_extended(fam, parse_vec(c.text("y", c.f.y)), T, opts), c.f.format, out);
  }
  return kOk;
}

int cmd_explosion(Context& c, std::ostream& out) {
  const auto fam = build_family(c.spec.params);
  const Vec y = parse_vec(c.text("y", c.f.y));
  const double t_max = c.real("T", c.f.T);
  const double tol = c.given("tol") ? c.f.tol : 1e-8;
  const ExplosionVerdict v = c.has("theta") || c.spec.theta ? asset_explosion_time(fam, c.theta(), y, t_max, tol)
                                                             : explosion_time(fam, y, t_max, tol);
  emit(verdict_json(v), c.f.format, out);
  return kOk;
}

int cmd_bond(Context& c, std::ostream& out) {
  if (!c.spec.rate) throw UsageError("bond needs a \"rate\" block in the model");
  const auto fam = build_family(c.spec.params);
  const Vec x = parse_vec(c.text("x", c.f.x));
  const auto r = bond_price(fam, *c.spec.rate, x, c.given("t") ? c.f.t : 0.0, c.real("T", c.f.T));
  json doc;
  if (const auto* b = std::get_if<BondPrice>(&r)) {
    doc = {{"value", b->price},
           {"error_estimate", b->error_estimate},
           {"diagnostics", {{"A", b->A}, {"B", io::to_json(b->B)}, {"certificate", to_string(b->certificate)}}}};
  } else {
    doc = {{"verdict", "infinite_discount"}, {"reason", std::get<InfiniteDiscount>(r).reason}};
  }
  emit(doc, c.f.format, out);
  return kOk;
}

int cmd_martingale(Context& c, std::ostream& out) {
  const auto fam = build_family(c.spec.params);
  double horizon = 1.0;
  if (c.given("horizon")) {
    horizon = c.f.horizon;
  } else if (c.has("T")) {
    horizon = std::max(1.0, c.real("T", c.f.T));
  }
  const auto rep = martingale_check(fam, c.theta(), c.rate(), horizon);
  json diag = json::array();
  for (const auto& d : rep.necessary_conditions) diag.push_back({{"clause", d.clause}, {"pass", d.pass}, {"detail", d.detail}});
  emit({{"sufficient", rep.sufficient}, {"necessary_conditions", diag}, {"horizon", rep.horizon},
        {"horizon_limited", rep.horizon_limited}},
       c.f.format, out);
  return kOk;
}

int cmd_fourier(Context& c, std::ostream& out) {
  const auto fam = build_family(c.spec.params);
  const int d = c.dim();
  const int asset = c.given("asset") ? c.f.asset : d - 1;
  const double strike = c.real("strike", c.f.strike);
  PayoffTransform payoff;
  if (c.f.type == "call") {
    payoff = c.given("damping") ? PayoffTransform::call(d, asset, strike, c.f.damping) : PayoffTransform::call(d, asset, strike);
  } else if (c.f.type == "put") {
    payoff = c.given("damping") ? PayoffTransform::put(d, asset, strike, c.f.damping) : PayoffTransform::put(d, asset, strike);
  } else {
    throw UsageError("--type must be call or put");
  }
  QuadOptions quad;
  if (c.given("tol")) quad.rel_tol = c.f.tol;
  const auto r = fourier_price(fam, c.rate(), payoff, parse_vec(c.text("x", c.f.x)), c.given("t") ? c.f.t : 0.0,
                               c.real("T", c.f.T), quad);
  if (const auto* un = std::get_if<FourierUnsupported>(&r)) {
    emit({{"verdict", "unsupported"}, {"clause", un->clause}, {"reason", un->reason}}, c.f.format, out);
    return kDomain;
  }
  const auto& p = std::get<FourierPrice>(r);
  emit({{"value", p.value},
        {"error_estimate", p.error_estimate},
        {"diagnostics", {{"cutoff", p.cutoff}, {"evaluations", p.evaluations}, {"asset", asset}, {"damping", payoff.v[asset]}}}},
       c.f.format, out);
  return kOk;
}

int cmd_mc_verify(Context& c, std::ostream& out) {
  const CVec u = c.has("u") ? parse_cvec(c.text("u", c.f.u)) : CVec(parse_vec(c.text("y", c.f.y)).cast<Complex>());
  mc::SimOptions o;
  o.seed = c.f.seed;
  o.n_paths = c.f.paths;
  o.n_steps = c.f.steps;
  const auto rep = mc::compare(c.spec.params, parse_vec(c.text("x", c.f.x)), u, c.real("T", c.f.T), o);
  json doc{{"skipped", rep.skipped}};
  if (rep.skipped) {
    doc["reason"] = rep.reason;
  } else {
    doc["analytic"] = io::to_json(rep.analytic);
    doc["empirical"] = io::to_json(rep.empirical);
    doc["std_error"] = {{"re", rep.se_re}, {"im", rep.se_im}};
    doc["z"] = {{"re", rep.z_re}, {"im", rep.z_im}};
    doc["max_abs_z"] = rep.max_abs_z();
    doc["half_step"] = io::to_json(rep.half_step);
    doc["bias_estimate"] = rep.bias_estimate;
    doc["heavy_tail"] = rep.heavy_tail;
  }
  doc["simulation"] = {{"scheme", mc::PathEnsemble{}.scheme}, {"bias_note", mc::PathEnsemble{}.bias_note},
                       {"seed", o.seed}, {"paths", o.n_paths}, {"steps", o.n_steps}};
  emit(doc, c.f.format, out);
  return kOk;
}

// CLI11 does not take "-5,1" as the value of an option; glue such values to
// their flag as --flag=value.
std::vector<std::string> glue_values(const std::vector<std::string>& args) {
  static const std::vector<std::string> valued = {"--model", "--x", "--y", "--u", "--theta", "--T", "--t", "--tol",
                                                  "--out", "--format", "--seed", "--scenario", "--strike", "--type",
                                                  "--asset", "--damping", "--horizon", "--paths", "--steps"};
  std::vector<std::string> out;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (k + 1 < args.size() && std::find(valued.begin(), valued.end(), args[k]) != valued.end() &&
        !args[k + 1].empty() && args[k + 1][0] == '-') {
      out.push_back(args[k] + "=" + args[k + 1]);
      ++k;
    } else {
      out.push_back(args[k]);
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Affine transform, moment explosion and pricing toolkit"};
  app.require_subcommand(1);
  Context c;
  Flags& f = c.f;

  using Handler = int (*)(Context&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"validate", "check admissibility of the model", cmd_validate},
      {"solve", "solve the Riccati system from --y (real) or --u (complex)", cmd_solve},
      {"moment", "exponential moment E[exp(<y, X_T>)]", cmd_moment},
      {"cf", "characteristic function E[exp(<u, X_T>)]", cmd_cf},
      {"explosion", "moment explosion time from --y (plus --theta for asset moments)", cmd_explosion},
      {"bond", "zero-coupon bond under the model's short rate", cmd_bond},
      {"martingale", "check that exp(<theta, X> - int L) is a martingale", cmd_martingale},
      {"fourier", "European call or put by Fourier inversion", cmd_fourier},
      {"mc-verify", "Monte Carlo z-scores against the transform formula", cmd_mc_verify},
  };
  std::map<CLI::App*, Handler> handlers;
  for (const auto& [name, help, handler] : commands) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--model", f.model, "model JSON file")->required();
    s->add_option("--x", f.x, "state, comma separated");
    s->add_option("--y", f.y, "real exponent, comma separated");
    s->add_option("--u", f.u, "complex exponent, tokens like 1.5-2i");
    s->add_option("--theta", f.theta, "asset exponent");
    s->add_option("--T", f.T, "horizon");
    s->add_option("--t", f.t, "valuation time");
    s->add_option("--tol", f.tol, "tolerance");
    s->add_option("--out", f.out, "write the result to this file");
    s->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    s->add_option("--seed", f.seed, "Monte Carlo seed");
    s->add_option("--scenario", f.scenario, "named block of defaults in the model file");
    if (name == "fourier") {
      s->add_option("--strike", f.strike, "strike");
      s->add_option("--type", f.type, "call or put");
      s->add_option("--asset", f.asset, "log-price coordinate (default: last)");
      s->add_option("--damping", f.damping, "damping on the asset coordinate");
    }
    if (name == "martingale") s->add_option("--horizon", f.horizon, "stationarity horizon");
    if (name == "mc-verify") {
      s->add_option("--paths", f.paths, "number of paths");
      s->add_option("--steps", f.steps, "time steps");
    }
    handlers[s] = handler;
  }

  std::vector<std::string> args = glue_values(raw_args);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    c.sub = app.get_subcommands().front();
    c.spec = io::load_model(f.model);
    std::ofstream file;
    if (!f.out.empty()) {
      file.open(f.out);
      if (!file) throw UsageError("cannot open " + f.out);
    }
    std::ostream& dest = f.out.empty() ? out : file;
    dest.precision(17);
    return handlers.at(c.sub)(c, dest);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "validation failed: " << e.what() << "\n";
    return kValidation;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << " (achieved " << e.achieved() << ")\n";
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace affine::cli
