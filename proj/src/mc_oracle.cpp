#include "affine/mc_oracle.hpp"

#include "affine/detail/overloaded.hpp"
#include "affine/transform.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

namespace affine::mc {

int default_threads() {
  if (const char* env = std::getenv("AFFINE_MOMENTS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

using Rng = std::mt19937_64;

// Draws jump sizes from the normalized version of one finite-activity measure.
class Sampler {
 public:
  explicit Sampler(const JumpMeasure& m) : measure_(&m), mass_(m.total_mass()) {
    if (const auto* pm = std::get_if<PointMassMixture>(&m.variant())) {
      std::vector<double> w;
      for (const auto& a : pm->atoms) w.push_back(a.weight);
      atoms_ = std::discrete_distribution<int>(w.begin(), w.end());
    }
  }

  double mass() const { return mass_; }

  void add_jump(Rng& rng, Vec& x) {
    std::visit(detail::overloaded{
                   [](const ZeroMeasure&) {},
                   [&](const PointMassMixture& pm) { x += pm.atoms[static_cast<std::size_t>(atoms_(rng))].location; },
                   [&](const OneSidedExponential& e) { x[e.coordinate] += std::exponential_distribution<double>(e.rate)(rng); },
                   [&](const GaussianFactor& g) { x[g.coordinate] += std::normal_distribution<double>(g.mean, g.stddev)(rng); },
                   [](const NumericDensity&) {},
               },
               measure_->variant());
  }

 private:
  const JumpMeasure* measure_;
  double mass_;
  std::discrete_distribution<int> atoms_;
};

// Lower factor L with L L^T = A for positive semidefinite A; zero pivots
// leave their column empty.
void psd_factor(const Mat& A, Mat& L) {
  const auto n = A.rows();
  L.setZero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = A(j, j);
    for (Eigen::Index k = 0; k < j; ++k) diag -= L(j, k) * L(j, k);
    if (diag <= 1e-14 * std::max(1.0, std::abs(A(j, j)))) continue;
    L(j, j) = std::sqrt(diag);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = A(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
}

struct Model {
  int m = 0;
  int d = 0;
  Mat a;
  std::vector<Mat> alpha;
  std::vector<bool> alpha_nonzero;
  bool constant_cov = true;
  Vec b;
  std::vector<Vec> beta;
  // Compensator of the small jumps, subtracted because the arrivals below
  // include them in full.
  Vec comp_m;
  std::vector<Vec> comp_mu;
  const JumpMeasure* jm = nullptr;
  std::vector<const JumpMeasure*> jmu;
};

Vec truncated_mean_vec(const JumpMeasure& j, int d) {
  Vec v = Vec::Zero(d);
  if (j.is_zero()) return v;
  for (int k = 0; k < d; ++k) v[k] = j.truncated_mean(k);
  return v;
}

Model prepare(const AffineParams& params) {
  if (!params.is_canonical()) throw UnsupportedError("Monte Carlo simulation supports the canonical state space only");
  const auto& c = params.canonical();
  auto simulable = [](const JumpMeasure& j) {
    if (std::holds_alternative<NumericDensity>(j.variant())) {
      throw UnsupportedError("NumericDensity jumps are not supported by the Monte Carlo oracle");
    }
    if (!j.is_zero() && !j.finite_activity()) throw UnsupportedError("infinite-activity jumps cannot be simulated");
  };
  simulable(c.m);
  for (const auto& j : c.mu) simulable(j);
  const auto report = validate(params);
  if (!report.passed) throw ValidationError("parameters are not admissible: " + report.violations.front().id);
  Model md;
  md.m = params.space.canonical_space().m;
  md.d = params.space.dimension();
  md.a = c.a;
  md.alpha = c.alpha;
  md.b = c.b;
  md.beta = c.beta;
  md.comp_m = truncated_mean_vec(c.m, md.d);
  md.jm = &c.m;
  for (int i = 0; i < md.m; ++i) {
    const bool nz = md.alpha[i].cwiseAbs().maxCoeff() > 0.0;
    md.alpha_nonzero.push_back(nz);
    md.constant_cov = md.constant_cov && !nz;
    md.comp_mu.push_back(truncated_mean_vec(c.mu[i], md.d));
    md.jmu.push_back(&c.mu[i]);
  }
  return md;
}

void clip(const Model& md, Vec& x) {
  for (int i = 0; i < md.m; ++i) x[i] = std::max(0.0, x[i]);
}

}  // namespace

PathEnsemble simulate(const AffineParams& params, const Vec& x0, double T, const SimOptions& opts) {
  if (opts.n_steps < 1 || opts.n_paths < 1 || opts.block_size < 1) {
    throw std::invalid_argument("n_steps, n_paths and block_size must be positive");
  }
  if (!(T >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
  const Model md = prepare(params);
  const int d = md.d;
  if (x0.size() != d) throw StructuralError("initial state has the wrong dimension");
  if (!params.space.contains(x0)) throw DomainError("initial state is not in the state space");
  if (opts.rate) opts.rate->check(d);

  PathEnsemble ens;
  ens.n_paths = opts.n_paths;
  ens.n_steps = opts.n_steps;
  ens.horizon = T;
  ens.seed = opts.seed;
  ens.terminal.resize(d, opts.n_paths);
  ens.log_discount = Vec::Zero(opts.n_paths);
  ens.jump_counts.assign(static_cast<std::size_t>(opts.n_paths), 0);

  const double dt = T / opts.n_steps;
  const double sdt = std::sqrt(dt);
  std::vector<int> snap_steps;
  for (double ts : opts.snapshot_times) {
    const int k = std::clamp(static_cast<int>(std::lround(ts / dt)), 0, opts.n_steps);
    snap_steps.push_back(k);
    ens.snapshot_times.push_back(k * dt);
    ens.snapshots.emplace_back(d, opts.n_paths);
  }

  Mat L_const;
  if (md.constant_cov) psd_factor(md.a, L_const);

  const long n_blocks = (opts.n_paths + opts.block_size - 1) / opts.block_size;
  std::atomic<long> next_block{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run_block = [&](long blk) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32), 0x6a09e667u};
    Rng rng(seq);
    std::normal_distribution<double> normal;
    Sampler s_m(*md.jm);
    std::vector<Sampler> s_mu;
    for (const auto* j : md.jmu) s_mu.emplace_back(*j);

    Vec x(d), xp(d), drift(d), z(d);
    Mat cov(d, d), L(d, d);
    const long first = blk * opts.block_size;
    const long last = std::min(opts.n_paths, first + opts.block_size);
    for (long path = first; path < last; ++path) {
      x = x0;
      double log_disc = 0.0;
      int jumps = 0;
      for (int step = 0; step <= opts.n_steps; ++step) {
        for (std::size_t k = 0; k < snap_steps.size(); ++k) {
          if (snap_steps[k] == step) {
            xp = x;
            clip(md, xp);
            ens.snapshots[k].col(path) = xp;
          }
        }
        if (step == opts.n_steps) break;

        xp = x;
        clip(md, xp);
        drift = md.b - md.comp_m;
        for (int i = 0; i < md.m; ++i) {
          if (xp[i] != 0.0) drift += xp[i] * (md.beta[i] - md.comp_mu[i]);
        }
        if (opts.rate) log_disc -= (opts.rate->l + opts.rate->lambda.dot(xp)) * dt;

        for (int k = 0; k < d; ++k) z[k] = normal(rng);
        if (md.constant_cov) {
          x += drift * dt + L_const * (sdt * z);
        } else {
          cov = md.a;
          for (int i = 0; i < md.m; ++i) {
            if (md.alpha_nonzero[i] && xp[i] != 0.0) cov += xp[i] * md.alpha[i];
          }
          psd_factor(cov, L);
          x += drift * dt + L * (sdt * z);
        }

        // Arrivals use the intensity at the left endpoint; jumps are added after the diffusion move.
        auto arrivals = [&](Sampler& s, double intensity) {
          if (intensity <= 0.0) return;
          const int n = std::poisson_distribution<int>(intensity * dt)(rng);
          for (int k = 0; k < n; ++k) s.add_jump(rng, x);
          jumps += n;
        };
        arrivals(s_m, s_m.mass());
        for (int i = 0; i < md.m; ++i) arrivals(s_mu[static_cast<std::size_t>(i)], xp[i] * s_mu[static_cast<std::size_t>(i)].mass());
      }
      clip(md, x);
      ens.terminal.col(path) = x;
      ens.log_discount[path] = log_disc;
      ens.jump_counts[static_cast<std::size_t>(path)] = jumps;
    }
  };

  auto worker = [&] {
    try {
      for (long blk = next_block++; blk < n_blocks; blk = next_block++) run_block(blk);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next_block = n_blocks;
    }
  };

  const int threads = std::max(1, std::min<int>(opts.threads > 0 ? opts.threads : default_threads(),
                                                static_cast<int>(n_blocks)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return ens;
}

namespace {

// Mean and standard error, summed in path order so the result does not
// depend on scheduling. Shifting by the first sample keeps a constant
// sample exactly constant.
Estimate mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double shift = v.front();
  double s = 0.0;
  for (double x : v) s += x - shift;
  const double mean_shifted = s / n;
  double ss = 0.0;
  for (double x : v) ss += (x - shift - mean_shifted) * (x - shift - mean_shifted);
  const double var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {shift + mean_shifted, std::sqrt(var / n)};
}

}  // namespace

MGFEstimate empirical_mgf(const PathEnsemble& ens, const Vec& y) {
  if (y.size() != ens.terminal.rows()) throw StructuralError("y has the wrong dimension");
  std::vector<double> v(static_cast<std::size_t>(ens.n_paths));
  for (long p = 0; p < ens.n_paths; ++p) v[static_cast<std::size_t>(p)] = std::exp(y.dot(ens.terminal.col(p)));
  const Estimate e = mean_se(v);

  const std::size_t top = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.001 * static_cast<double>(v.size()))));
  std::vector<double> sorted = v;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(top - 1), sorted.end(), std::greater<>());
  std::sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(top), std::greater<>());
  double top_sum = 0.0;
  for (std::size_t k = 0; k < top; ++k) top_sum += sorted[k];
  const double total = e.estimate * static_cast<double>(v.size());
  return {e.estimate, e.std_error, total > 0.0 && top_sum > 0.2 * total};
}

CFEstimate empirical_cf(const PathEnsemble& ens, const CVec& u) {
  if (u.size() != ens.terminal.rows()) throw StructuralError("u has the wrong dimension");
  std::vector<double> re(static_cast<std::size_t>(ens.n_paths)), im(re.size());
  for (long p = 0; p < ens.n_paths; ++p) {
    const Complex w = std::exp((u.transpose() * ens.terminal.col(p).cast<Complex>())(0, 0));
    re[static_cast<std::size_t>(p)] = w.real();
    im[static_cast<std::size_t>(p)] = w.imag();
  }
  const Estimate r = mean_se(re), i = mean_se(im);
  return {Complex(r.estimate, i.estimate), r.std_error, i.std_error};
}

Estimate discounted_expectation(const PathEnsemble& ens, const std::function<double(const Vec&)>& payoff) {
  std::vector<double> v(static_cast<std::size_t>(ens.n_paths));
  for (long p = 0; p < ens.n_paths; ++p) {
    v[static_cast<std::size_t>(p)] = std::exp(ens.log_discount[p]) * payoff(ens.terminal.col(p));
  }
  return mean_se(v);
}

Estimate snapshot_expectation(const PathEnsemble& ens, std::size_t k, const std::function<double(const Vec&)>& f) {
  if (k >= ens.snapshots.size()) throw std::out_of_range("no such snapshot");
  std::vector<double> v(static_cast<std::size_t>(ens.n_paths));
  for (long p = 0; p < ens.n_paths; ++p) v[static_cast<std::size_t>(p)] = f(ens.snapshots[k].col(p));
  return mean_se(v);
}

namespace {

double z_score(double diff, double se, double scale) {
  if (se > 0.0) return diff / se;
  // A degenerate ensemble: agreement up to rounding counts as exact.
  return std::abs(diff) <= 1e-12 * std::max(1.0, scale) ? 0.0 : std::copysign(kInf, diff);
}

}  // namespace

ComparisonReport compare(const AffineParams& params, const Vec& x, const CVec& u, double T, const SimOptions& opts) {
  ComparisonReport rep;
  const auto family = build_family(params);
  const bool real = u.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real) {
    const MomentResult m = exp_moment(family, x, real_part(u), T);
    if (!m.finite()) {
      rep.skipped = true;
      rep.reason = std::holds_alternative<InfiniteMoment>(m.verdict)
                       ? "moment is infinite"
                       : "moment is indeterminate: " + std::get<IndeterminateMoment>(m.verdict).reason;
      return rep;
    }
    rep.analytic = m.value();
  } else {
    const CFResult cf = char_function(family, x, u, T);
    if (const auto* un = std::get_if<CFUnsupported>(&cf)) {
      rep.skipped = true;
      rep.reason = "characteristic function unsupported (" + un->clause + "): " + un->reason;
      return rep;
    }
    rep.analytic = std::get<CFValue>(cf).value;
  }

  const PathEnsemble ens = simulate(params, x, T, opts);
  const CFEstimate e = empirical_cf(ens, u);
  rep.empirical = e.estimate;
  rep.se_re = e.se_re;
  rep.se_im = e.se_im;
  const double scale = std::abs(rep.analytic);
  rep.z_re = z_score(rep.analytic.real() - e.estimate.real(), e.se_re, scale);
  rep.z_im = z_score(rep.analytic.imag() - e.estimate.imag(), e.se_im, scale);
  if (real) rep.heavy_tail = empirical_mgf(ens, real_part(u)).heavy_tail;

  SimOptions half = opts;
  half.n_steps = 2 * opts.n_steps;
  half.snapshot_times.clear();
  rep.half_step = empirical_cf(simulate(params, x, T, half), u).estimate;
  rep.bias_estimate = std::abs(rep.half_step - rep.empirical);
  return rep;
}

}  // namespace affine::mc
