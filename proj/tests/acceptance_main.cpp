// Acceptance checks for the estimator. Each criterion prints one
// [PASS]/[FAIL] line with the measured numbers; the process exits 0 only if
// every executed criterion passed.
//
// Usage: acceptance [--cli PATH] [criterion numbers ...]
//   --cli PATH  path to the command-line binary (needed by criterion 12)
//   numbers     subset of 1..12 to run (default: all)

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "svardag/defaults.hpp"
#include "svardag/svardag.hpp"

using namespace svardag;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// small helpers
// ---------------------------------------------------------------------------

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double x, int digits = 3) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << x;
  return ss.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// benchmark suites shared by criteria 1-5, 10 and 11: ten replicates of one
// (setting, normalization, prior fraction) cell at n = 200, mirroring the
// command-line bench pipeline.
// ---------------------------------------------------------------------------

constexpr int kN = 200;
constexpr int kD = 2;
constexpr int kBurnIn = 1000;
constexpr int kSeeds = 10;
constexpr std::uint64_t kSimSeedOffset = 1000000;
constexpr std::uint64_t kPriorSeedOffset = 2000000;

struct CellOutcome {
  double tp = 0, tn = 0, b1tp = 0, b1tn = 0, b2tp = 0, b2tn = 0, rel_l2 = 0;
  bool projection_applied = false;
  bool acyclic = false;
  bool forbidden_zero = true;
};

struct Suite {
  std::vector<CellOutcome> cells;
  std::vector<double> get(double CellOutcome::* field) const {
    std::vector<double> v;
    for (const auto& c : cells) v.push_back(c.*field);
    return v;
  }
  double med(double CellOutcome::* field) const { return median_of(get(field)); }
};

const GenerationResult& cached_generation(const std::string& setting, std::uint64_t seed) {
  static std::map<std::pair<std::string, std::uint64_t>, GenerationResult> cache;
  const auto key = std::make_pair(setting, seed);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, generate_parameters(builtin_setting(setting), seed)).first;
  }
  return it->second;
}

CellOutcome run_cell(const std::string& setting, std::uint64_t seed, bool normalize,
                     double fraction) {
  const GenerationResult& gen = cached_generation(setting, seed);
  const TimeSeriesSample full =
      simulate(gen.A, gen.B, gen.noise, kN + 1, kBurnIn, seed + kSimSeedOffset);

  TimeSeriesSample train(full.data.topRows(kN));
  train.demean();
  Vector sds;
  if (normalize) {
    sds = column_sds(train.data);
    train = normalize_columns(train);
  }

  const int p = static_cast<int>(train.cols());
  const PartialOrdering prior =
      fraction > 0.0 ? random_nonsupport_mask(gen.A, fraction, seed + kPriorSeedOffset)
                     : PartialOrdering(p);

  Hyperparams h;
  const PinnedWeights pinned = pinned_weights(setting, normalize);
  h.mu_A = pinned.mu_A;
  h.mu_B = pinned.mu_B;
  // At p = 100 an inner round needs ~500 sweeps to hit the absolute-residual
  // stopping rule; the default cap would truncate rounds mid-flight, so the
  // benchmark fits raise it and let every round run to convergence.
  h.max_inner = 2000;

  const FitResult fr = fit(train, kD, prior, h);

  CellOutcome out;
  SkeletonOptions a_opts;
  const SkeletonMetrics a_m = skeleton_metrics(fr.A_hat.entries, gen.A.entries, &prior, a_opts);
  SkeletonOptions b_opts;
  b_opts.include_diagonal = true;
  const SkeletonMetrics b1 = skeleton_metrics(fr.B_hat.blocks[0], gen.B.blocks[0], nullptr, b_opts);
  const SkeletonMetrics b2 = skeleton_metrics(fr.B_hat.blocks[1], gen.B.blocks[1], nullptr, b_opts);

  Matrix centered = full.data;
  centered.rowwise() -= train.column_means.transpose();
  if (normalize) {
    for (Eigen::Index j = 0; j < centered.cols(); ++j) centered.col(j) /= sds(j);
  }
  const Matrix history = centered.middleRows(kN - kD, kD);
  const Vector pred = one_step_forecast(fr.A_hat, fr.B_hat, history);
  out.rel_l2 = relative_l2_error(pred, centered.row(kN).transpose());

  out.tp = a_m.tp_rate;
  out.tn = a_m.tn_rate;
  out.b1tp = b1.tp_rate;
  out.b1tn = b1.tn_rate;
  out.b2tp = b2.tp_rate;
  out.b2tn = b2.tn_rate;
  out.projection_applied = fr.projection_applied;
  out.acyclic = fr.acyclic_after_projection && is_acyclic(fr.A_hat.entries, 0.0);
  for (auto [child, parent] : prior.forbidden_pairs()) {
    if (fr.A_hat.entries(child, parent) != 0.0) out.forbidden_zero = false;
  }
  return out;
}

const Suite& suite(const std::string& setting, bool normalize, double fraction) {
  static std::map<std::string, Suite> cache;
  const std::string key =
      setting + (normalize ? "/norm" : "/raw") + "/f" + fmt(fraction, 2);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  Suite s;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    s.cells.push_back(run_cell(setting, seed, normalize, fraction));
    const auto& c = s.cells.back();
    std::cerr << "  [" << key << "] seed " << seed << "/" << kSeeds << ": TP=" << fmt(c.tp)
              << " TN=" << fmt(c.tn) << " B1_TP=" << fmt(c.b1tp) << " rel_l2=" << fmt(c.rel_l2)
              << " (" << fmt(elapsed_s(t0), 1) << "s)\n";
  }
  return cache.emplace(key, std::move(s)).first->second;
}

// ---------------------------------------------------------------------------
// criteria 1-6, 10, 11: benchmark statistics
// ---------------------------------------------------------------------------

Outcome criterion_1() {
  const Suite& s = suite("S1", false, 0.0);
  const double tp = s.med(&CellOutcome::tp), tn = s.med(&CellOutcome::tn);
  return {tp >= 0.82 && tn >= 0.84,
          "S1 raw no prior: median TP=" + fmt(tp) + " (need >=0.82), median TN=" + fmt(tn) +
              " (need >=0.84)"};
}

Outcome criterion_2() {
  const Suite& base = suite("S1", false, 0.0);
  const Suite& s = suite("S1", false, 0.5);
  const double tp = s.med(&CellOutcome::tp), tn = s.med(&CellOutcome::tn);
  const double tp0 = base.med(&CellOutcome::tp), tn0 = base.med(&CellOutcome::tn);
  return {tp >= 0.90 && tn >= 0.88 && tp >= tp0 && tn >= tn0,
          "S1 prior 0.5: median TP=" + fmt(tp) + " (need >=0.90 and >=" + fmt(tp0) +
              "), median TN=" + fmt(tn) + " (need >=0.88 and >=" + fmt(tn0) + ")"};
}

Outcome criterion_3() {
  const double s1 = suite("S1", false, 0.0).med(&CellOutcome::tp);
  const double s3 = suite("S3", false, 0.0).med(&CellOutcome::tp);
  return {s3 >= s1, "Laplace vs Gaussian: S3 median TP=" + fmt(s3) +
                        " must be >= S1 median TP=" + fmt(s1)};
}

Outcome criterion_4() {
  const double err = suite("S1", false, 0.0).med(&CellOutcome::rel_l2);
  return {err <= 0.10,
          "S1 one-step forecast: median relative l2 error=" + fmt(err) + " (need <=0.10)"};
}

Outcome criterion_5() {
  const Suite& s = suite("S1", true, 0.0);
  const double tp = s.med(&CellOutcome::tp), tn = s.med(&CellOutcome::tn);
  return {tp >= 0.88 && tn >= 0.93,
          "S1 normalized: median TP=" + fmt(tp) + " (need >=0.88), median TN=" + fmt(tn) +
              " (need >=0.93)"};
}

Outcome criterion_6() {
  double raw_sum = 0.0, norm_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const GenerationResult& gen = cached_generation("S1", seed);
    const TimeSeriesSample sample =
        simulate(gen.A, gen.B, gen.noise, kN, kBurnIn, seed + kSimSeedOffset);
    raw_sum += varsortability(gen.A, sample);
    norm_sum += varsortability(gen.A, normalize_columns(sample));
  }
  const double raw = raw_sum / kSeeds, norm = norm_sum / kSeeds;
  return {raw >= 0.90 && raw <= 1.0 && std::abs(norm - 0.5) <= 0.02,
          "mean varsortability: raw=" + fmt(raw) + " (need in [0.90,1.0]), standardized=" +
              fmt(norm) + " (need 0.5 +/- 0.02)"};
}

Outcome criterion_10() {
  const Suite& base = suite("S1", false, 0.0);
  const Suite& prior = suite("S1", false, 0.5);
  const Suite& laplace = suite("S3", false, 0.0);
  const Suite& norm = suite("S1", true, 0.0);

  bool all_acyclic = true;
  for (const Suite* s : {&base, &prior, &laplace, &norm}) {
    for (const auto& c : s->cells) all_acyclic = all_acyclic && c.acyclic;
  }
  bool forbidden_ok = true;
  for (const auto& c : prior.cells) forbidden_ok = forbidden_ok && c.forbidden_zero;
  int projections = 0;
  for (const auto& c : base.cells) projections += c.projection_applied ? 1 : 0;
  int projections_prior = 0;
  for (const auto& c : prior.cells) projections_prior += c.projection_applied ? 1 : 0;

  return {all_acyclic && forbidden_ok && projections <= 2,
          std::string("forbidden cells bitwise zero: ") + (forbidden_ok ? "yes" : "NO") +
              "; all estimates acyclic: " + (all_acyclic ? "yes" : "NO") +
              "; projection fired in " + std::to_string(projections) +
              "/10 S1 seeds (need <=2; prior runs: " + std::to_string(projections_prior) +
              "/10)"};
}

Outcome criterion_11() {
  const Suite& s = suite("S1", false, 0.0);
  const double b1tp = s.med(&CellOutcome::b1tp), b1tn = s.med(&CellOutcome::b1tn);
  const double b2tp = s.med(&CellOutcome::b2tp), b2tn = s.med(&CellOutcome::b2tn);
  return {b1tp >= 0.74 && b1tn >= 0.76 && b2tp >= 0.79 && b2tn >= 0.75,
          "lag recovery: B1 TP=" + fmt(b1tp) + "/TN=" + fmt(b1tn) +
              " (need >=0.74/>=0.76), B2 TP=" + fmt(b2tp) + "/TN=" + fmt(b2tn) +
              " (need >=0.79/>=0.75)"};
}

// ---------------------------------------------------------------------------
// criterion 7: recorded objective never increases within an inner run
// ---------------------------------------------------------------------------

Outcome criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  const int ps[3] = {5, 10, 20};
  const NoiseFamily fams[3] = {NoiseFamily::Gaussian, NoiseFamily::Laplace,
                               NoiseFamily::StudentT};
  int violations = 0;
  int sweeps_checked = 0;
  for (int inst = 0; inst < 20; ++inst) {
    SettingSpec spec;
    spec.name = "descent";
    spec.p = ps[inst % 3];
    spec.s_A = 0.2;
    spec.s_B1 = 0.2;
    spec.s_B2 = 0.1;
    spec.l_A = 0.25;
    spec.u_A = 0.9;
    spec.family = fams[(inst / 3) % 3];
    if (spec.family == NoiseFamily::Laplace) spec.sigma_fixed = 1.0;
    // Small graphs can draw an all-zero lag pattern; step the seed until the
    // draw is usable so every instance exercises a genuine fit.
    GenerationResult gen;
    for (std::uint64_t attempt = 0;; ++attempt) {
      try {
        gen = generate_parameters(spec, 900 + static_cast<std::uint64_t>(inst) + 10000 * attempt);
        break;
      } catch (const generation_failure_error&) {
        if (attempt >= 20) throw;
      }
    }
    TimeSeriesSample sample = simulate(gen.A, gen.B, gen.noise, 120, 100,
                                       1900 + static_cast<std::uint64_t>(inst));
    sample.demean();

    Hyperparams h;
    h.mu_A = 0.1;
    h.mu_B = 0.05;
    // Sweep-level monotonicity is an empirical regime, not a theorem: every
    // primal block update is an exact minimizer of the objective, but the
    // dual ascent adds rho*(||r_A||^2 + ||r_B||^2 + sum m^2) back each sweep.
    // The consensus part shrinks quadratically with the gaps, so rho large
    // enough to dominate the data curvature keeps it net non-increasing
    // (rho in [5, 20] is clean on these instances; rho = 1 is not). The
    // certificate part is monotone only in the single-scale configuration
    // cert_scale == tau; an enlarged certificate scale makes re-truncation
    // between outer rounds ring the certificate residual, and the upswings
    // (~ residual^2) exceed the 1e-8 tolerance even though sweeps converge.
    h.rho = 10.0;
    h.cert_scale = h.tau;
    const FitResult fr = fit(sample, kD, PartialOrdering(spec.p), h);
    for (std::size_t r = 1; r < fr.objective_trace.size(); ++r) {
      const TraceRow& prev = fr.objective_trace[r - 1];
      const TraceRow& cur = fr.objective_trace[r];
      if (cur.outer_iter != prev.outer_iter) continue;
      ++sweeps_checked;
      if (cur.lagrangian > prev.lagrangian + 1e-8 * (1.0 + std::abs(prev.lagrangian))) {
        ++violations;
      }
    }
  }
  const double secs = elapsed_s(t0);
  return {violations == 0 && secs < 120.0,
          std::to_string(sweeps_checked) + " consecutive sweep pairs over 20 instances: " +
              std::to_string(violations) + " objective increases (need 0) in " + fmt(secs, 1) +
              "s (need <120s)"};
}

// ---------------------------------------------------------------------------
// criterion 8: block-update optimality oracles on randomized states
// ---------------------------------------------------------------------------

struct OracleProblem {
  SolverWorkspace ws;
  Hyperparams h;
};

OracleProblem oracle_problem(std::uint64_t seed) {
  const Eigen::Index n = 40, p = 6, d = 2;
  Rng rng(seed);
  Matrix data(n + d, p);
  for (Eigen::Index i = 0; i < n + d; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) data(i, j) = rng.normal();
  }
  Matrix Xn, Xl;
  build_lag_views(data, d, Xn, Xl);
  OracleProblem prob{make_workspace(std::move(Xn), std::move(Xl), d,
                                    PartialOrdering::from_pairs(static_cast<int>(p),
                                                                {{0, 3}, {4, 1}}),
                                    1.3),
                     Hyperparams{}};
  prob.h.mu_A = 0.25;
  prob.h.mu_B = 0.15;
  prob.h.cert_scale = 0.3;
  prob.h.rho = 1.3;
  return prob;
}

SolverState random_oracle_state(const SolverWorkspace& ws, Rng& rng) {
  SolverState s = init_solver_state(ws.p, ws.d);
  for (int i = 0; i < static_cast<int>(ws.p); ++i) {
    for (int j : ws.S[static_cast<std::size_t>(i)]) {
      s.A(i, j) = 0.5 * rng.normal();
      s.A_tilde(i, j) = 0.5 * rng.normal();
      s.U_A(i, j) = 0.5 * rng.normal();
      s.w(i, j) = rng.uniform01() < 0.5 ? 0.0 : 1.0;
    }
  }
  for (Eigen::Index i = 0; i < ws.p; ++i) {
    for (Eigen::Index j = 0; j < ws.d * ws.p; ++j) {
      s.B(i, j) = 0.5 * rng.normal();
      s.B_tilde(i, j) = 0.5 * rng.normal();
      s.U_B(i, j) = 0.5 * rng.normal();
    }
  }
  for (Eigen::Index i = 0; i < ws.p; ++i) {
    for (Eigen::Index j = 0; j < ws.p; ++j) s.lambda(i, j) = 0.4 * rng.normal();
  }
  for (std::size_t k = 0; k < s.xi.size(); ++k) {
    for (Eigen::Index i = 0; i < ws.p; ++i) {
      for (Eigen::Index j = 0; j < ws.p; ++j) {
        if (i == j) continue;
        s.xi[k](i, j) = std::abs(0.3 * rng.normal());
        s.y[k](i, j) = 0.3 * rng.normal();
      }
    }
  }
  return s;
}

// scalar objective of one indicator-active structural cell as a function of
// its thresholded value t, all other blocks held fixed
double cell_objective(const SolverState& s, const Hyperparams& h, int i, int j, double t) {
  const double v = s.A(i, j) + s.U_A(i, j);
  double val = h.mu_A * std::abs(t) + 0.5 * h.rho * (t - v) * (t - v);
  for (std::size_t k = 0; k < s.xi.size(); ++k) {
    const double ck = s.xi[k](i, j) -
                      h.cert_scale * s.lambda(i, static_cast<Eigen::Index>(k)) -
                      ((static_cast<Eigen::Index>(k) != j) ? h.cert_scale : 0.0) +
                      h.cert_scale * s.lambda(j, static_cast<Eigen::Index>(k));
    const double r = std::abs(t) + ck;
    val += 0.5 * h.rho * r * r + h.rho * s.y[k](i, j) * r;
  }
  return val;
}

Outcome criterion_8() {
  Rng rng(2024);
  double worst_ridge = 0.0, worst_grid = 0.0, worst_grad = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    OracleProblem prob = oracle_problem(3000 + static_cast<std::uint64_t>(trial));
    const SolverWorkspace& ws = prob.ws;
    const Hyperparams& h = prob.h;
    SolverState s = random_oracle_state(ws, rng);

    // (a) ridge normal equations after update_A
    update_A(s, ws, h);
    const Matrix M = ws.Gnn - ws.Cnl * s.B.transpose();
    for (int i = 0; i < static_cast<int>(ws.p); ++i) {
      const auto& Si = ws.S[static_cast<std::size_t>(i)];
      if (Si.empty()) continue;
      const Eigen::Index m = static_cast<Eigen::Index>(Si.size());
      Vector rhs(m), lhs(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        const int ja = Si[static_cast<std::size_t>(a)];
        rhs(a) = M(ja, i) + h.rho * (s.A_tilde(i, ja) - s.U_A(i, ja));
        double acc = h.rho * s.A(i, ja);
        for (Eigen::Index b = 0; b < m; ++b) {
          acc += ws.Gnn(ja, Si[static_cast<std::size_t>(b)]) *
                 s.A(i, Si[static_cast<std::size_t>(b)]);
        }
        lhs(a) = acc;
      }
      worst_ridge = std::max(worst_ridge, (lhs - rhs).norm() / (1.0 + rhs.norm()));
    }

    // (b) indicator-active structural cell vs a dense one-dimensional grid
    update_A_tilde(s, ws, h);
    int gi = -1, gj = -1;
    for (int i = 0; i < static_cast<int>(ws.p) && gi < 0; ++i) {
      for (int j : ws.S[static_cast<std::size_t>(i)]) {
        if (s.w(i, j) == 1.0 && std::abs(s.A_tilde(i, j)) <= 1.8) {
          gi = i;
          gj = j;
          break;
        }
      }
    }
    if (gi >= 0) {
      const double closed = s.A_tilde(gi, gj);
      double best_t = -2.0, best_val = cell_objective(s, h, gi, gj, -2.0);
      for (long step = 1; step <= 400000; ++step) {
        const double t = -2.0 + 1e-5 * static_cast<double>(step);
        const double val = cell_objective(s, h, gi, gj, t);
        if (val < best_val) {
          best_val = val;
          best_t = t;
        }
      }
      worst_grid = std::max(worst_grid, std::abs(closed - best_t));
    }

    // (c) certificate block stationarity via central differences
    update_lambda(s, h);
    const double eps = 1e-2;
    for (Eigen::Index i = 0; i < ws.p; ++i) {
      for (Eigen::Index k = 0; k < ws.p; ++k) {
        const double keep = s.lambda(i, k);
        s.lambda(i, k) = keep + eps;
        const double up = augmented_lagrangian(s, ws, h);
        s.lambda(i, k) = keep - eps;
        const double down = augmented_lagrangian(s, ws, h);
        s.lambda(i, k) = keep;
        worst_grad = std::max(worst_grad, std::abs((up - down) / (2.0 * eps)));
      }
    }
  }
  return {worst_ridge < 1e-8 && worst_grid < 1e-4 && worst_grad < 1e-6,
          "50 randomized states: max ridge residual=" + fmt(worst_ridge, 12) +
              " (need <1e-8), max |closed-form - grid argmin|=" + fmt(worst_grid, 7) +
              " (need <1e-4), max certificate gradient=" + fmt(worst_grad, 9) +
              " (need <1e-6)"};
}

// ---------------------------------------------------------------------------
// criterion 9: certificate feasibility coincides with acyclicity on all
// four-node digraphs
// ---------------------------------------------------------------------------

Matrix digraph_from_mask(unsigned mask) {
  Matrix A = Matrix::Zero(4, 4);
  int bit = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      if (mask & (1u << bit)) A(i, j) = 1.0;
      ++bit;
    }
  }
  return A;
}

// brute-force feasibility of the certificate system: columns are independent,
// so search each lambda column over {0,1,2}^4
bool certificate_feasible(const Matrix& A) {
  const int p = 4;
  for (int k = 0; k < p; ++k) {
    bool found = false;
    for (int code = 0; code < 81 && !found; ++code) {
      int c = code;
      double lam[4];
      for (int v = 0; v < p; ++v) {
        lam[v] = static_cast<double>(c % 3);
        c /= 3;
      }
      bool ok = true;
      for (int i = 0; i < p && ok; ++i) {
        for (int j = 0; j < p && ok; ++j) {
          if (i == j) continue;
          const double lhs = lam[i] + ((j != k) ? 1.0 : 0.0) - lam[j];
          if (A(i, j) != 0.0 && lhs < 1.0 - 1e-12) ok = false;
        }
      }
      found = ok;
    }
    if (!found) return false;
  }
  return true;
}

Outcome criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  int dag_count = 0, disagreements = 0;
  std::vector<unsigned> cyclic_masks;
  for (unsigned mask = 0; mask < 4096; ++mask) {
    const Matrix A = digraph_from_mask(mask);
    const bool acyclic = is_acyclic(A, 0.0);
    if (acyclic) {
      ++dag_count;
      if (!certificate_feasible(A)) ++disagreements;
    } else {
      cyclic_masks.push_back(mask);
    }
  }
  Rng rng(4242);
  int cyclic_checked = 0;
  for (int i = 0; i < 500; ++i) {
    const unsigned mask = cyclic_masks[static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::uint64_t>(cyclic_masks.size())))];
    const Matrix A = digraph_from_mask(mask);
    if (certificate_feasible(A)) ++disagreements;
    ++cyclic_checked;
  }
  const double secs = elapsed_s(t0);
  return {dag_count == 543 && disagreements == 0 && secs < 300.0,
          std::to_string(dag_count) + " labeled DAGs (expected 543) and " +
              std::to_string(cyclic_checked) + " cyclic digraphs: " +
              std::to_string(disagreements) + " certificate/acyclicity disagreements (need 0) in " +
              fmt(secs, 1) + "s (need <300s)"};
}

// ---------------------------------------------------------------------------
// criterion 12: aggregate CSV bytes are independent of the thread count
// ---------------------------------------------------------------------------

std::string g_cli_path;

int run_command(const std::string& cmd) {
  const int st = std::system(cmd.c_str());
  if (st == -1) return -1;
  return WIFEXITED(st) ? WEXITSTATUS(st) : -2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_12() {
  if (g_cli_path.empty()) {
    return {false, "no --cli path given; cannot exercise the command-line bench"};
  }
  const fs::path dir = fs::temp_directory_path() /
                       ("svardag_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string common = "\"" + g_cli_path +
                             "\" bench --settings S1 --n-list 60 --prior-fractions 0,0.5"
                             " --seed-list 1,2 --d 2 --burn-in 200 --mu-a 0.3 --mu-b 0.3"
                             " --max-inner 20 --max-outer 2";
  const std::string log = " >> \"" + (dir / "bench.log").string() + "\" 2>&1";
  const int rc1 = run_command(common + " --threads 1 --outdir \"" + (dir / "out1").string() +
                              "\" --aggregate \"" + (dir / "agg1.csv").string() + "\"" + log);
  const int rc2 = run_command(common + " --threads 4 --outdir \"" + (dir / "out4").string() +
                              "\" --aggregate \"" + (dir / "agg4.csv").string() + "\"" + log);
  if (rc1 != 0 || rc2 != 0) {
    return {false, "bench runs exited with " + std::to_string(rc1) + " and " +
                       std::to_string(rc2) + " (want 0); log at " + (dir / "bench.log").string()};
  }
  const std::string a1 = slurp(dir / "agg1.csv");
  const std::string a4 = slurp(dir / "agg4.csv");
  const bool same = !a1.empty() && a1 == a4;
  std::error_code ec;
  fs::remove_all(dir, ec);
  return {same, std::string("aggregate CSVs across --threads 1 and --threads 4 are ") +
                    (same ? "byte-identical" : "DIFFERENT") + " (" +
                    std::to_string(a1.size()) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--cli" && a + 1 < argc) {
      g_cli_path = argv[++a];
    } else {
      try {
        selected.insert(std::stoi(arg));
      } catch (...) {
        std::cerr << "unrecognized argument: " << arg << "\n";
        return 2;
      }
    }
  }
  if (selected.empty()) {
    for (int c = 1; c <= 12; ++c) selected.insert(c);
  }

  using Fn = Outcome (*)();
  const std::pair<int, Fn> checks[] = {
      {1, criterion_1}, {2, criterion_2},   {3, criterion_3},   {4, criterion_4},
      {5, criterion_5}, {6, criterion_6},   {7, criterion_7},   {8, criterion_8},
      {9, criterion_9}, {10, criterion_10}, {11, criterion_11}, {12, criterion_12}};

  int failures = 0;
  for (const auto& [number, fn] : checks) {
    if (selected.find(number) == selected.end()) continue;
    Outcome r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << r.detail
              << std::endl;
    if (!r.pass) ++failures;
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all selected criteria passed" << std::endl;
  return 0;
}
