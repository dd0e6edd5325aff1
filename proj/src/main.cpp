// Command-line front end: simulate / fit / evaluate / gridsearch / bench.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "svardag/defaults.hpp"
#include "svardag/svardag.hpp"

namespace {

using namespace svardag;
using nlohmann::json;

// Deterministic seed derivation for one replicate id: parameter generation
// uses the id itself, trajectory simulation and prior-mask drawing use fixed
// offsets so the three streams never alias.
constexpr std::uint64_t kSimSeedOffset = 1000000;
constexpr std::uint64_t kPriorSeedOffset = 2000000;

// ---------------------------------------------------------------------------
// small utilities
// ---------------------------------------------------------------------------

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> split_list_double(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) {
    out.push_back(detail::parse_double(tok, what));
  }
  return out;
}

std::vector<int> split_list_int(const std::string& s, const char* what) {
  std::vector<int> out;
  for (double v : split_list_double(s, what)) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw invalid_input_error("grid size must be >= 1");
  std::vector<double> v;
  if (count == 1) {
    v.push_back(lo);
    return v;
  }
  for (int i = 0; i < count; ++i) {
    v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return v;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("SVARDAG_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string default_outdir(const std::string& flag_value, bool flag_given) {
  if (flag_given) return flag_value;
  if (const char* env = std::getenv("SVARDAG_TMPDIR")) {
    if (*env != '\0') return std::string(env) + "/bench_out";
  }
  return flag_value;
}

json load_config_or_empty(const std::string& path) {
  if (path.empty()) return json::object();
  json j = read_json(path);
  if (!j.is_object()) throw invalid_input_error("--config file must hold a JSON object");
  return j;
}

// Flags override config-file values: a key is taken from the config only
// when the matching option was not given on the command line.
template <typename T>
void merge_key(const json& cfg, const CLI::Option* opt, const char* key, T& value) {
  if (opt != nullptr && opt->count() > 0) return;
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

NoiseFamily parse_family(const std::string& s) {
  if (s == "gaussian") return NoiseFamily::Gaussian;
  if (s == "laplace") return NoiseFamily::Laplace;
  if (s == "student_t") return NoiseFamily::StudentT;
  throw invalid_input_error("unknown noise family '" + s +
                            "' (expected gaussian, laplace or student_t)");
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// SettingSpec <-> JSON
// ---------------------------------------------------------------------------

json spec_to_json(const SettingSpec& s) {
  return json{{"name", s.name},
              {"p", s.p},
              {"s_A", s.s_A},
              {"s_B1", s.s_B1},
              {"s_B2", s.s_B2},
              {"l_A", s.l_A},
              {"u_A", s.u_A},
              {"l_B", s.l_B},
              {"u_B", s.u_B},
              {"family", to_string(s.family)},
              {"sigma_lo", s.sigma_lo},
              {"sigma_hi", s.sigma_hi},
              {"sigma_fixed", s.sigma_fixed},
              {"df", s.df},
              {"target_rho_B", s.target_rho_B},
              {"max_redraws", s.max_redraws},
              {"permute", s.permute}};
}

SettingSpec setting_from_json(const json& j) {
  SettingSpec s;
  if (j.contains("name") && j["name"].is_string() &&
      j["name"].get<std::string>().size() == 2 && j["name"].get<std::string>()[0] == 'S' &&
      !j.contains("p")) {
    s = builtin_setting(j["name"].get<std::string>());
  }
  s.name = j.value("name", s.name);
  s.p = j.value("p", s.p);
  s.s_A = j.value("s_A", s.s_A);
  s.s_B1 = j.value("s_B1", s.s_B1);
  s.s_B2 = j.value("s_B2", s.s_B2);
  s.l_A = j.value("l_A", s.l_A);
  s.u_A = j.value("u_A", s.u_A);
  s.l_B = j.value("l_B", s.l_B);
  s.u_B = j.value("u_B", s.u_B);
  if (j.contains("family")) s.family = parse_family(j["family"].get<std::string>());
  s.sigma_lo = j.value("sigma_lo", s.sigma_lo);
  s.sigma_hi = j.value("sigma_hi", s.sigma_hi);
  s.sigma_fixed = j.value("sigma_fixed", s.sigma_fixed);
  s.df = j.value("df", s.df);
  s.target_rho_B = j.value("target_rho_B", s.target_rho_B);
  s.max_redraws = j.value("max_redraws", s.max_redraws);
  s.permute = j.value("permute", s.permute);
  return s;
}

// ---------------------------------------------------------------------------
// shared hyperparameter flags
// ---------------------------------------------------------------------------

struct HyperFlags {
  double mu_A = -1.0;  // < 0: fall back to the pinned defaults
  double mu_B = -1.0;
  double tau = 1e-6;
  double cert_scale = 0.3;
  double rho = 1.0;
  int max_outer = 10;
  int max_inner = 500;
  double tol_inner = 0.0;  // 0 = auto by sample size
  double tol_outer = 0.0;
  bool warm_start_B = false;

  CLI::Option* o_mu_A = nullptr;
  CLI::Option* o_mu_B = nullptr;
  CLI::Option* o_tau = nullptr;
  CLI::Option* o_cert = nullptr;
  CLI::Option* o_rho = nullptr;
  CLI::Option* o_max_outer = nullptr;
  CLI::Option* o_max_inner = nullptr;
  CLI::Option* o_tol_inner = nullptr;
  CLI::Option* o_tol_outer = nullptr;
  CLI::Option* o_warm = nullptr;
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& hf) {
  hf.o_mu_A = cmd->add_option("--mu-a", hf.mu_A, "structural l1 weight (default: pinned)");
  hf.o_mu_B = cmd->add_option("--mu-b", hf.mu_B, "lag l1 weight (default: pinned)");
  hf.o_tau = cmd->add_option("--tau", hf.tau, "support-detection threshold (default 1e-6)");
  hf.o_cert = cmd->add_option("--cert-scale", hf.cert_scale,
                              "acyclicity-certificate magnitude scale (default 0.3)");
  hf.o_rho = cmd->add_option("--rho", hf.rho, "augmented-Lagrangian scale (default 1)");
  hf.o_max_outer = cmd->add_option("--max-outer", hf.max_outer, "outer iteration cap");
  hf.o_max_inner = cmd->add_option("--max-inner", hf.max_inner, "inner sweep cap");
  hf.o_tol_inner =
      cmd->add_option("--tol-inner", hf.tol_inner, "inner tolerance (0 = auto by n)");
  hf.o_tol_outer = cmd->add_option("--tol-outer", hf.tol_outer,
                                   "fraction of indicator flips tolerated at outer stop");
  hf.o_warm = cmd->add_flag("--warm-start-b", hf.warm_start_B,
                            "initialize B from a sparse lag-only regression");
}

void merge_hyper(const json& cfg, HyperFlags& hf) {
  merge_key(cfg, hf.o_mu_A, "mu_A", hf.mu_A);
  merge_key(cfg, hf.o_mu_B, "mu_B", hf.mu_B);
  merge_key(cfg, hf.o_tau, "tau", hf.tau);
  merge_key(cfg, hf.o_cert, "cert_scale", hf.cert_scale);
  merge_key(cfg, hf.o_rho, "rho", hf.rho);
  merge_key(cfg, hf.o_max_outer, "max_outer", hf.max_outer);
  merge_key(cfg, hf.o_max_inner, "max_inner", hf.max_inner);
  merge_key(cfg, hf.o_tol_inner, "tol_inner", hf.tol_inner);
  merge_key(cfg, hf.o_tol_outer, "tol_outer", hf.tol_outer);
  merge_key(cfg, hf.o_warm, "warm_start_B", hf.warm_start_B);
}

Hyperparams resolve_hyper(const HyperFlags& hf, const PinnedWeights& pinned) {
  Hyperparams h;
  h.mu_A = hf.mu_A >= 0 ? hf.mu_A : pinned.mu_A;
  h.mu_B = hf.mu_B >= 0 ? hf.mu_B : pinned.mu_B;
  h.tau = hf.tau;
  h.cert_scale = hf.cert_scale;
  h.rho = hf.rho;
  h.max_outer = hf.max_outer;
  h.max_inner = hf.max_inner;
  h.tol_inner = hf.tol_inner;
  h.tol_outer = hf.tol_outer;
  h.warm_start_B = hf.warm_start_B;
  h.validate();
  return h;
}

json hyper_echo(const Hyperparams& h) {
  return json{{"mu_A", h.mu_A},       {"mu_B", h.mu_B},
              {"tau", h.tau},         {"cert_scale", h.cert_scale},
              {"rho", h.rho},
              {"max_outer", h.max_outer}, {"max_inner", h.max_inner},
              {"tol_inner", h.tol_inner}, {"tol_outer", h.tol_outer},
              {"warm_start_B", h.warm_start_B}};
}

// ---------------------------------------------------------------------------
// shared prior flags
// ---------------------------------------------------------------------------

struct PriorFlags {
  std::string tiers_path;
  std::string pairs_path;
  std::string gold_path;

  CLI::Option* o_tiers = nullptr;
  CLI::Option* o_pairs = nullptr;
  CLI::Option* o_gold = nullptr;
};

void add_prior_flags(CLI::App* cmd, PriorFlags& pf) {
  pf.o_tiers = cmd->add_option("--prior-tiers", pf.tiers_path,
                               "tier CSV (variable,tier): later tiers cannot parent earlier");
  pf.o_pairs = cmd->add_option("--prior-pairs", pf.pairs_path,
                               "pair CSV (child,parent) of forbidden cells");
  pf.o_gold = cmd->add_option("--prior-gold", pf.gold_path,
                              "0/1 adjacency CSV; pure regulators/targets imply forbidden cells");
}

void merge_prior(const json& cfg, PriorFlags& pf) {
  merge_key(cfg, pf.o_tiers, "prior_tiers", pf.tiers_path);
  merge_key(cfg, pf.o_pairs, "prior_pairs", pf.pairs_path);
  merge_key(cfg, pf.o_gold, "prior_gold", pf.gold_path);
}

PartialOrdering resolve_prior(const PriorFlags& pf, int p, json* echo) {
  int given = 0;
  given += pf.tiers_path.empty() ? 0 : 1;
  given += pf.pairs_path.empty() ? 0 : 1;
  given += pf.gold_path.empty() ? 0 : 1;
  if (given > 1) {
    throw invalid_input_error("give at most one of --prior-tiers/--prior-pairs/--prior-gold");
  }
  if (echo != nullptr) {
    (*echo)["prior_tiers"] = pf.tiers_path;
    (*echo)["prior_pairs"] = pf.pairs_path;
    (*echo)["prior_gold"] = pf.gold_path;
  }
  if (!pf.tiers_path.empty()) {
    TierAssignment t = read_tier_csv(pf.tiers_path);
    if (static_cast<int>(t.tiers.size()) != p) {
      throw invalid_input_error("tier file covers " + std::to_string(t.tiers.size()) +
                                " variables but the data has " + std::to_string(p));
    }
    return from_tiers(t);
  }
  if (!pf.pairs_path.empty()) {
    return PartialOrdering::from_pairs(p, read_pairs_csv(pf.pairs_path));
  }
  if (!pf.gold_path.empty()) {
    const Matrix gold = read_matrix_csv(pf.gold_path);
    if (gold.rows() != p || gold.cols() != p) {
      throw invalid_input_error("gold adjacency must be p x p");
    }
    return from_regulator_target(gold);
  }
  return PartialOrdering(p);
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::string setting = "S1";
  std::string spec_path;
  int n = 200;
  std::uint64_t seed = 1;
  int burn_in = 500;
  bool no_permute = false;
  std::string out_data = "data.csv";
  std::string out_truth = "truth.json";
  std::string out_meta = "meta.json";
  std::string config_path;

  CLI::Option *o_setting{}, *o_spec{}, *o_n{}, *o_seed{}, *o_burn{}, *o_noperm{}, *o_data{},
      *o_truth{}, *o_meta{};
};

int cmd_simulate(SimulateOpts& o) {
  const json cfg = load_config_or_empty(o.config_path);
  merge_key(cfg, o.o_setting, "setting", o.setting);
  merge_key(cfg, o.o_spec, "spec", o.spec_path);
  merge_key(cfg, o.o_n, "n", o.n);
  merge_key(cfg, o.o_seed, "seed", o.seed);
  merge_key(cfg, o.o_burn, "burn_in", o.burn_in);
  merge_key(cfg, o.o_noperm, "no_permute", o.no_permute);
  merge_key(cfg, o.o_data, "out_data", o.out_data);
  merge_key(cfg, o.o_truth, "out_truth", o.out_truth);
  merge_key(cfg, o.o_meta, "out_meta", o.out_meta);

  SettingSpec spec =
      o.spec_path.empty() ? builtin_setting(o.setting) : setting_from_json(read_json(o.spec_path));
  if (o.no_permute) spec.permute = false;
  if (o.n < 1) throw invalid_input_error("--n must be >= 1");
  if (o.burn_in < 0) throw invalid_input_error("--burn-in must be >= 0");

  const GenerationResult gen = generate_parameters(spec, o.seed);
  const TimeSeriesSample sample =
      simulate(gen.A, gen.B, gen.noise, o.n, o.burn_in, o.seed + kSimSeedOffset);

  write_data_csv(o.out_data, sample.data);

  json truth_meta = {{"noise",
                      {{"family", to_string(gen.noise.family)},
                       {"df", gen.noise.df},
                       {"sigmas", vector_to_json(gen.noise.sigmas)}}},
                     {"seed", o.seed},
                     {"setting", spec.name}};
  write_model_json(o.out_truth, gen.A, gen.B, &truth_meta);

  const json resolved = {{"command", "simulate"}, {"setting", o.setting},
                         {"spec_file", o.spec_path}, {"n", o.n},
                         {"seed", o.seed},          {"burn_in", o.burn_in},
                         {"no_permute", o.no_permute}, {"out_data", o.out_data},
                         {"out_truth", o.out_truth}, {"out_meta", o.out_meta}};
  const json meta = {{"command", "simulate"},
                     {"seed", o.seed},
                     {"n", o.n},
                     {"burn_in", o.burn_in},
                     {"simulation_seed", o.seed + kSimSeedOffset},
                     {"setting", spec_to_json(spec)},
                     {"realized",
                      {{"spectral_radius", gen.spectral_radius},
                       {"lag_only_radius", gen.lag_only_radius},
                       {"scale_c", gen.scale_c},
                       {"density_A", gen.density_A},
                       {"density_B1", gen.density_B1},
                       {"density_B2", gen.density_B2},
                       {"redraws", gen.redraws}}},
                     {"config", resolved}};
  write_json(o.out_meta, meta);

  std::cerr << "simulate: setting=" << spec.name << " n=" << o.n << " seed=" << o.seed
            << " spectral_radius=" << gen.spectral_radius << " redraws=" << gen.redraws
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitOpts {
  std::string data_path;
  int d = 2;
  bool no_demean = false;
  bool normalize = false;
  std::string output = "model.json";
  std::string trace_path;
  std::string skeleton_path;
  std::string heatmap_path;
  std::string config_path;
  HyperFlags hyper;
  PriorFlags prior;

  CLI::Option *o_data{}, *o_d{}, *o_nodemean{}, *o_norm{}, *o_output{}, *o_trace{}, *o_skel{},
      *o_heat{};
};

int cmd_fit(FitOpts& o) {
  const json cfg = load_config_or_empty(o.config_path);
  merge_key(cfg, o.o_data, "data", o.data_path);
  merge_key(cfg, o.o_d, "d", o.d);
  merge_key(cfg, o.o_nodemean, "no_demean", o.no_demean);
  merge_key(cfg, o.o_norm, "normalize", o.normalize);
  merge_key(cfg, o.o_output, "output", o.output);
  merge_key(cfg, o.o_trace, "trace", o.trace_path);
  merge_key(cfg, o.o_skel, "skeleton", o.skeleton_path);
  merge_key(cfg, o.o_heat, "heatmap", o.heatmap_path);
  merge_hyper(cfg, o.hyper);
  merge_prior(cfg, o.prior);
  if (o.data_path.empty()) throw invalid_input_error("fit: --data is required");
  if (o.d < 1) throw invalid_input_error("fit: --d must be >= 1");

  const NamedData nd = read_data_csv(o.data_path);
  TimeSeriesSample sample(nd.data);
  const int p = static_cast<int>(sample.cols());

  json prior_echo = json::object();
  const PartialOrdering prior = resolve_prior(o.prior, p, &prior_echo);
  const Hyperparams h = resolve_hyper(o.hyper, pinned_weights("S1", o.normalize));

  json meta = json::object();
  if (!o.no_demean) {
    sample.demean();
    meta["column_means"] = vector_to_json(sample.column_means);
  }
  if (o.normalize) {
    const Vector sds = column_sds(sample.data);
    sample = normalize_columns(sample);
    meta["column_sds"] = vector_to_json(sds);
  }

  const FitResult fr = fit(sample, o.d, prior, h);

  json resolved = {{"command", "fit"},       {"data", o.data_path}, {"d", o.d},
                   {"no_demean", o.no_demean}, {"normalize", o.normalize},
                   {"output", o.output},     {"trace", o.trace_path},
                   {"skeleton", o.skeleton_path}, {"heatmap", o.heatmap_path},
                   {"hyperparams", hyper_echo(h)}};
  for (auto& [k, v] : prior_echo.items()) resolved[k] = v;
  meta["config"] = resolved;
  meta["diagnostics"] = {{"outer_iters", fr.outer_iters},
                         {"inner_sweeps", fr.inner_iters},
                         {"inner_converged", fr.inner_converged},
                         {"projection_applied", fr.projection_applied},
                         {"acyclic", fr.acyclic_after_projection}};

  const json model = model_to_json(fr.A_hat, fr.B_hat, &meta);
  if (o.output == "-") {
    std::cout << model.dump(2) << '\n';
  } else {
    write_json(o.output, model);
  }
  if (!o.trace_path.empty()) write_trace_csv(o.trace_path, fr.objective_trace);
  if (!o.skeleton_path.empty()) {
    Matrix support = (fr.A_hat.entries.array() != 0.0).cast<double>().matrix();
    write_matrix_csv(o.skeleton_path, support);
  }
  if (!o.heatmap_path.empty()) write_long_csv(o.heatmap_path, fr.A_hat.entries);

  std::cerr << "fit: p=" << p << " d=" << o.d << " outer=" << fr.outer_iters
            << " sweeps=" << fr.inner_iters << " converged=" << (fr.inner_converged ? "yes" : "no")
            << " projected=" << (fr.projection_applied ? "yes" : "no") << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOpts {
  std::string model_path;
  std::string truth_path;
  std::string data_path;
  std::string output = "-";
  bool exclude_forbidden = false;
  std::string setting;
  std::uint64_t seed = 0;
  double prior_fraction = 0.0;
  int forecast_rows = 1;
  std::string config_path;
  PriorFlags prior;

  CLI::Option *o_model{}, *o_truth{}, *o_data{}, *o_output{}, *o_excl{}, *o_setting{}, *o_seed{},
      *o_frac{}, *o_frows{};
};

json metrics_to_json(const SkeletonMetrics& m) {
  return json{{"tp", m.tp},           {"fp", m.fp},           {"tn", m.tn}, {"fn", m.fn},
              {"tp_rate", m.tp_rate}, {"tn_rate", m.tn_rate}};
}

int cmd_evaluate(EvaluateOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const json cfg = load_config_or_empty(o.config_path);
  merge_key(cfg, o.o_model, "model", o.model_path);
  merge_key(cfg, o.o_truth, "truth", o.truth_path);
  merge_key(cfg, o.o_data, "data", o.data_path);
  merge_key(cfg, o.o_output, "output", o.output);
  merge_key(cfg, o.o_excl, "exclude_forbidden", o.exclude_forbidden);
  merge_key(cfg, o.o_setting, "setting", o.setting);
  merge_key(cfg, o.o_seed, "seed", o.seed);
  merge_key(cfg, o.o_frac, "prior_fraction", o.prior_fraction);
  merge_key(cfg, o.o_frows, "forecast_rows", o.forecast_rows);
  merge_prior(cfg, o.prior);
  if (o.model_path.empty() || o.truth_path.empty()) {
    throw invalid_input_error("evaluate: --model and --truth are required");
  }

  const ModelFile model = read_model_json(o.model_path);
  const ModelFile truth = read_model_json(o.truth_path);
  const int p = static_cast<int>(truth.A.dimension());
  if (model.A.dimension() != p || model.B.lag_order() != truth.B.lag_order()) {
    throw invalid_input_error("evaluate: model and truth shapes disagree");
  }

  const PartialOrdering prior = resolve_prior(o.prior, p, nullptr);
  SkeletonOptions a_opts;
  a_opts.exclude_forbidden = o.exclude_forbidden;
  const SkeletonMetrics a_m =
      skeleton_metrics(model.A.entries, truth.A.entries, &prior, a_opts);
  SkeletonOptions b_opts;
  b_opts.include_diagonal = true;
  std::vector<SkeletonMetrics> b_m;
  for (std::size_t k = 0; k < truth.B.blocks.size(); ++k) {
    b_m.push_back(skeleton_metrics(model.B.blocks[k], truth.B.blocks[k], nullptr, b_opts));
  }

  json report = {{"setting", o.setting},
                 {"seed", o.seed},
                 {"prior_fraction", o.prior_fraction},
                 {"TP", a_m.tp_rate},
                 {"TN", a_m.tn_rate},
                 {"A_metrics", metrics_to_json(a_m)}};
  if (!b_m.empty()) {
    report["B1_TP"] = b_m[0].tp_rate;
    report["B1_TN"] = b_m[0].tn_rate;
    report["B1_metrics"] = metrics_to_json(b_m[0]);
  }
  if (b_m.size() > 1) {
    report["B2_TP"] = b_m[1].tp_rate;
    report["B2_TN"] = b_m[1].tn_rate;
    report["B2_metrics"] = metrics_to_json(b_m[1]);
  }

  if (!o.data_path.empty()) {
    const NamedData nd = read_data_csv(o.data_path);
    Matrix data = nd.data;
    if (data.cols() != p) throw invalid_input_error("evaluate: data width disagrees with model");
    // Map the holdout into the model's training space (same centering and
    // scaling the fit saw), so the forecast compares like with like.
    if (model.meta.contains("column_means")) {
      const auto& means = model.meta["column_means"];
      for (Eigen::Index j = 0; j < data.cols(); ++j) {
        data.col(j).array() -= means[static_cast<std::size_t>(j)].get<double>();
      }
    }
    if (model.meta.contains("column_sds")) {
      const auto& sds = model.meta["column_sds"];
      for (Eigen::Index j = 0; j < data.cols(); ++j) {
        data.col(j) /= sds[static_cast<std::size_t>(j)].get<double>();
      }
    }
    const int d = static_cast<int>(model.B.lag_order());
    if (o.forecast_rows < 1) throw invalid_input_error("evaluate: --forecast-rows must be >= 1");
    if (data.rows() < d + o.forecast_rows) {
      throw invalid_input_error("evaluate: data has too few rows for the forecast");
    }
    double sum = 0.0;
    for (int r = 0; r < o.forecast_rows; ++r) {
      const Eigen::Index target = data.rows() - 1 - r;
      const Matrix history = data.middleRows(target - d, d);
      const Vector pred = one_step_forecast(model.A, model.B, history);
      sum += relative_l2_error(pred, data.row(target).transpose());
    }
    report["rel_l2"] = sum / static_cast<double>(o.forecast_rows);
    report["forecast_rows"] = o.forecast_rows;
  }

  report["runtime_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.output == "-") {
    std::cout << report.dump(2) << '\n';
  } else {
    write_json(o.output, report);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gridsearch
// ---------------------------------------------------------------------------

struct GridOpts {
  std::string data_path;
  int d = 2;
  bool no_demean = false;
  bool normalize = false;
  double mu_a_min = 0.01, mu_a_max = 0.3;
  int mu_a_count = 8;
  double c_min = 0.05, c_max = 0.5;
  int c_count = 8;
  double split = 0.8;
  int kfold = 0;
  std::uint64_t split_seed = 1;
  bool no_refine = false;
  std::string output = "grid.json";
  std::string config_path;
  HyperFlags hyper;
  PriorFlags prior;

  CLI::Option *o_data{}, *o_d{}, *o_nodemean{}, *o_norm{}, *o_amin{}, *o_amax{}, *o_acount{},
      *o_cmin{}, *o_cmax{}, *o_ccount{}, *o_split{}, *o_kfold{}, *o_sseed{}, *o_norefine{},
      *o_output{};
};

json grid_report_to_json(const GridSearchReport& r) {
  json cells = json::array();
  for (const auto& c : r.grid) {
    cells.push_back({{"mu_A", c.mu_A}, {"mu_B", c.mu_B}, {"rmse", c.rmse}});
  }
  return json{{"grid", std::move(cells)},
              {"best", {{"mu_A", r.best_mu_A}, {"mu_B", r.best_mu_B}, {"rmse", r.best_rmse}}}};
}

// 5-point window around the coarse best, one coarse step wide on each side,
// clipped to the coarse bounds, always containing the best value itself.
std::vector<double> refine_grid(double best, double lo, double hi, double step) {
  std::vector<double> v = linspace(std::max(lo, best - step), std::min(hi, best + step), 5);
  v.push_back(best);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

int cmd_gridsearch(GridOpts& o) {
  const json cfg = load_config_or_empty(o.config_path);
  merge_key(cfg, o.o_data, "data", o.data_path);
  merge_key(cfg, o.o_d, "d", o.d);
  merge_key(cfg, o.o_nodemean, "no_demean", o.no_demean);
  merge_key(cfg, o.o_norm, "normalize", o.normalize);
  merge_key(cfg, o.o_amin, "mu_a_min", o.mu_a_min);
  merge_key(cfg, o.o_amax, "mu_a_max", o.mu_a_max);
  merge_key(cfg, o.o_acount, "mu_a_count", o.mu_a_count);
  merge_key(cfg, o.o_cmin, "c_min", o.c_min);
  merge_key(cfg, o.o_cmax, "c_max", o.c_max);
  merge_key(cfg, o.o_ccount, "c_count", o.c_count);
  merge_key(cfg, o.o_split, "split", o.split);
  merge_key(cfg, o.o_kfold, "kfold", o.kfold);
  merge_key(cfg, o.o_sseed, "split_seed", o.split_seed);
  merge_key(cfg, o.o_norefine, "no_refine", o.no_refine);
  merge_key(cfg, o.o_output, "output", o.output);
  merge_hyper(cfg, o.hyper);
  merge_prior(cfg, o.prior);
  if (o.data_path.empty()) throw invalid_input_error("gridsearch: --data is required");

  const NamedData nd = read_data_csv(o.data_path);
  TimeSeriesSample sample(nd.data);
  const int p = static_cast<int>(sample.cols());
  if (!o.no_demean) sample.demean();
  if (o.normalize) sample = normalize_columns(sample);

  json prior_echo = json::object();
  const PartialOrdering prior = resolve_prior(o.prior, p, &prior_echo);
  Hyperparams base = resolve_hyper(o.hyper, pinned_weights("S1", o.normalize));

  const int n_pairs = static_cast<int>(sample.rows()) - o.d;
  if (n_pairs < 2) throw invalid_input_error("gridsearch: too few rows for the lag order");
  const double scale = lag_penalty_scale(p, o.d, n_pairs);

  const std::vector<double> muA = linspace(o.mu_a_min, o.mu_a_max, o.mu_a_count);
  std::vector<double> muB;
  for (double c : linspace(o.c_min, o.c_max, o.c_count)) muB.push_back(c * scale);

  const GridSearchReport coarse =
      grid_search(sample, o.d, prior, muA, muB, o.split, base, o.split_seed, o.kfold);

  json out = {{"lag_penalty_scale", scale}, {"coarse", grid_report_to_json(coarse)}};
  GridSearchReport best = coarse;
  if (!o.no_refine) {
    const double a_step =
        o.mu_a_count > 1 ? (o.mu_a_max - o.mu_a_min) / (o.mu_a_count - 1) : 0.0;
    const double c_step = o.c_count > 1 ? (o.c_max - o.c_min) / (o.c_count - 1) : 0.0;
    const double best_c = coarse.best_mu_B / scale;
    std::vector<double> muA2 = o.mu_a_count > 1
                                   ? refine_grid(coarse.best_mu_A, o.mu_a_min, o.mu_a_max, a_step)
                                   : muA;
    std::vector<double> muB2;
    if (o.c_count > 1) {
      for (double c : refine_grid(best_c, o.c_min, o.c_max, c_step)) muB2.push_back(c * scale);
    } else {
      muB2 = muB;
    }
    const GridSearchReport refined =
        grid_search(sample, o.d, prior, muA2, muB2, o.split, base, o.split_seed, o.kfold);
    out["refined"] = grid_report_to_json(refined);
    best = refined;  // the refined grid contains the coarse best cell
  }
  out["best"] = {{"mu_A", best.best_mu_A}, {"mu_B", best.best_mu_B}, {"rmse", best.best_rmse}};

  json resolved = {{"command", "gridsearch"}, {"data", o.data_path},   {"d", o.d},
                   {"no_demean", o.no_demean}, {"normalize", o.normalize},
                   {"mu_a_min", o.mu_a_min},  {"mu_a_max", o.mu_a_max},
                   {"mu_a_count", o.mu_a_count}, {"c_min", o.c_min},
                   {"c_max", o.c_max},        {"c_count", o.c_count},
                   {"split", o.split},        {"kfold", o.kfold},
                   {"split_seed", o.split_seed}, {"no_refine", o.no_refine},
                   {"hyperparams", hyper_echo(base)}};
  for (auto& [k, v] : prior_echo.items()) resolved[k] = v;
  out["config"] = resolved;

  if (o.output == "-") {
    std::cout << out.dump(2) << '\n';
  } else {
    write_json(o.output, out);
  }
  std::cerr << "gridsearch: best mu_A=" << best.best_mu_A << " mu_B=" << best.best_mu_B
            << " rmse=" << best.best_rmse << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchOpts {
  std::string settings = "S1";
  std::string n_list = "200";
  std::string prior_fractions = "0";
  int seeds = 10;
  std::string seed_list;
  int d = 2;
  int burn_in = 1000;
  bool normalize = false;
  std::string outdir = "bench_out";
  std::string aggregate = "aggregate.csv";
  int threads = 0;
  std::string config_path;
  HyperFlags hyper;

  CLI::Option *o_settings{}, *o_nlist{}, *o_fracs{}, *o_seeds{}, *o_seedlist{}, *o_d{},
      *o_burn{}, *o_norm{}, *o_outdir{}, *o_agg{}, *o_threads{};
};

struct BenchCell {
  std::string setting;
  int n = 0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

struct BenchOutcome {
  bool ok = false;
  std::string error;
  double tp = 0, tn = 0, b1_tp = 0, b1_tn = 0, b2_tp = 0, b2_tn = 0, rel_l2 = 0;
  double runtime_s = 0;
  int outer_iters = 0, inner_sweeps = 0;
  bool converged = false, projection_applied = false;
  double mu_A = 0, mu_B = 0;
};

BenchOutcome run_bench_cell(const BenchCell& c, const BenchOpts& o,
                            const GenerationResult& gen) {
  BenchOutcome r;
  const auto t0 = std::chrono::steady_clock::now();
  const SettingSpec spec = builtin_setting(c.setting);
  const TimeSeriesSample full =
      simulate(gen.A, gen.B, gen.noise, c.n + 1, o.burn_in, c.seed + kSimSeedOffset);

  TimeSeriesSample train(full.data.topRows(c.n));
  train.demean();
  Vector sds;
  if (o.normalize) {
    sds = column_sds(train.data);
    train = normalize_columns(train);
  }

  const int p = spec.p;
  const PartialOrdering prior =
      c.fraction > 0.0 ? random_nonsupport_mask(gen.A, c.fraction, c.seed + kPriorSeedOffset)
                       : PartialOrdering(p);

  const Hyperparams h = resolve_hyper(o.hyper, pinned_weights(c.setting, o.normalize));
  r.mu_A = h.mu_A;
  r.mu_B = h.mu_B;

  const FitResult fr = fit(train, o.d, prior, h);
  r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  SkeletonOptions a_opts;  // forbidden cells stay in the TN denominator
  const SkeletonMetrics a_m = skeleton_metrics(fr.A_hat.entries, gen.A.entries, &prior, a_opts);
  SkeletonOptions b_opts;
  b_opts.include_diagonal = true;
  const SkeletonMetrics b1 =
      skeleton_metrics(fr.B_hat.blocks[0], gen.B.blocks[0], nullptr, b_opts);
  const SkeletonMetrics b2 =
      skeleton_metrics(fr.B_hat.blocks[1], gen.B.blocks[1], nullptr, b_opts);

  // One-step forecast of the held-out row n, evaluated in the training space.
  Matrix centered = full.data;
  centered.rowwise() -= train.column_means.transpose();
  if (o.normalize) {
    for (Eigen::Index j = 0; j < centered.cols(); ++j) centered.col(j) /= sds(j);
  }
  const Matrix history = centered.middleRows(c.n - o.d, o.d);
  const Vector pred = one_step_forecast(fr.A_hat, fr.B_hat, history);
  r.rel_l2 = relative_l2_error(pred, centered.row(c.n).transpose());

  r.tp = a_m.tp_rate;
  r.tn = a_m.tn_rate;
  r.b1_tp = b1.tp_rate;
  r.b1_tn = b1.tn_rate;
  r.b2_tp = b2.tp_rate;
  r.b2_tn = b2.tn_rate;
  r.outer_iters = fr.outer_iters;
  r.inner_sweeps = fr.inner_iters;
  r.converged = fr.inner_converged;
  r.projection_applied = fr.projection_applied;
  r.ok = true;
  return r;
}

int cmd_bench(BenchOpts& o) {
  const json cfg = load_config_or_empty(o.config_path);
  merge_key(cfg, o.o_settings, "settings", o.settings);
  merge_key(cfg, o.o_nlist, "n_list", o.n_list);
  merge_key(cfg, o.o_fracs, "prior_fractions", o.prior_fractions);
  merge_key(cfg, o.o_seeds, "seeds", o.seeds);
  merge_key(cfg, o.o_seedlist, "seed_list", o.seed_list);
  merge_key(cfg, o.o_d, "d", o.d);
  merge_key(cfg, o.o_burn, "burn_in", o.burn_in);
  merge_key(cfg, o.o_norm, "normalize", o.normalize);
  merge_key(cfg, o.o_outdir, "outdir", o.outdir);
  merge_key(cfg, o.o_agg, "aggregate", o.aggregate);
  merge_key(cfg, o.o_threads, "threads", o.threads);
  merge_hyper(cfg, o.hyper);

  o.outdir = default_outdir(o.outdir, o.o_outdir->count() > 0 || cfg.contains("outdir"));

  const std::vector<std::string> settings = split_list(o.settings);
  const std::vector<int> ns = split_list_int(o.n_list, "--n-list");
  const std::vector<double> fractions = split_list_double(o.prior_fractions, "--prior-fractions");
  std::vector<std::uint64_t> seeds;
  if (!o.seed_list.empty()) {
    for (double v : split_list_double(o.seed_list, "--seed-list")) {
      seeds.push_back(static_cast<std::uint64_t>(v));
    }
  } else {
    for (int s = 1; s <= o.seeds; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (settings.empty() || ns.empty() || fractions.empty() || seeds.empty()) {
    throw invalid_input_error("bench: settings, n-list, prior-fractions and seeds must be non-empty");
  }
  for (const auto& s : settings) builtin_setting(s);  // validate ids up front

  std::vector<BenchCell> cells;
  for (const auto& s : settings) {
    for (int n : ns) {
      for (double f : fractions) {
        for (std::uint64_t seed : seeds) cells.push_back({s, n, f, seed});
      }
    }
  }

  const int nthreads = std::min<int>(resolve_threads(o.threads), static_cast<int>(cells.size()));
  std::filesystem::create_directories(o.outdir);

  // Several cells (different n / prior fraction) share one ground-truth
  // model; generate each distinct (setting, seed) once, in parallel.
  std::vector<std::pair<std::string, std::uint64_t>> gen_keys;
  std::vector<std::size_t> cell_gen(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::pair<std::string, std::uint64_t> key{cells[i].setting, cells[i].seed};
    const auto it = std::find(gen_keys.begin(), gen_keys.end(), key);
    if (it == gen_keys.end()) {
      cell_gen[i] = gen_keys.size();
      gen_keys.push_back(key);
    } else {
      cell_gen[i] = static_cast<std::size_t>(it - gen_keys.begin());
    }
  }
  std::vector<GenerationResult> generations(gen_keys.size());
  std::vector<std::string> gen_errors(gen_keys.size());
  {
    std::atomic<std::size_t> next_gen{0};
    auto gen_worker = [&]() {
      while (true) {
        const std::size_t idx = next_gen.fetch_add(1);
        if (idx >= gen_keys.size()) return;
        try {
          generations[idx] =
              generate_parameters(builtin_setting(gen_keys[idx].first), gen_keys[idx].second);
        } catch (const std::exception& e) {
          gen_errors[idx] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min<int>(nthreads, static_cast<int>(gen_keys.size())); ++t) {
      pool.emplace_back(gen_worker);
    }
    gen_worker();
    for (auto& t : pool) t.join();
  }

  std::vector<BenchOutcome> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const std::string& gen_error = gen_errors[cell_gen[idx]];
      if (!gen_error.empty()) {
        results[idx].ok = false;
        results[idx].error = gen_error;
      } else {
        try {
          results[idx] = run_bench_cell(cells[idx], o, generations[cell_gen[idx]]);
        } catch (const std::exception& e) {
          results[idx].ok = false;
          results[idx].error = e.what();
        }
      }
      const std::size_t d = done.fetch_add(1) + 1;
      std::cerr << "bench: " << d << "/" << cells.size() << " done\n";
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Per-run reports, written in deterministic cell order.
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto& r = results[i];
    json run = {{"setting", c.setting},
                {"seed", c.seed},
                {"prior_fraction", c.fraction},
                {"n", c.n},
                {"normalize", o.normalize}};
    if (r.ok) {
      run["TP"] = r.tp;
      run["TN"] = r.tn;
      run["B1_TP"] = r.b1_tp;
      run["B1_TN"] = r.b1_tn;
      run["B2_TP"] = r.b2_tp;
      run["B2_TN"] = r.b2_tn;
      run["rel_l2"] = r.rel_l2;
      run["runtime_s"] = r.runtime_s;
      run["mu_A"] = r.mu_A;
      run["mu_B"] = r.mu_B;
      run["diagnostics"] = {{"outer_iters", r.outer_iters},
                            {"inner_sweeps", r.inner_sweeps},
                            {"inner_converged", r.converged},
                            {"projection_applied", r.projection_applied}};
    } else {
      run["error"] = r.error;
    }
    const std::string name = "run_" + c.setting + "_n" + std::to_string(c.n) + "_f" +
                             detail::format_double(c.fraction) + "_s" + std::to_string(c.seed) +
                             ".json";
    write_json(o.outdir + "/" + name, run);
  }

  // Aggregate CSV: one row per (setting, n, fraction) in input order; median
  // and seed-to-seed standard deviation per metric. Runtimes deliberately
  // stay out so reruns and thread counts cannot perturb the bytes.
  auto agg = detail::open_out(o.aggregate);
  agg << "setting,n,prior_fraction,seeds,tp_med,tp_sd,tn_med,tn_sd,"
         "b1_tp_med,b1_tp_sd,b1_tn_med,b1_tn_sd,b2_tp_med,b2_tp_sd,b2_tn_med,b2_tn_sd,"
         "rel_l2_med,rel_l2_sd,failures\n";
  for (const auto& s : settings) {
    for (int n : ns) {
      for (double f : fractions) {
        std::vector<double> tp, tn, b1tp, b1tn, b2tp, b2tn, rl2;
        int failures = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
          const auto& c = cells[i];
          if (c.setting != s || c.n != n || c.fraction != f) continue;
          if (!results[i].ok) {
            ++failures;
            continue;
          }
          tp.push_back(results[i].tp);
          tn.push_back(results[i].tn);
          b1tp.push_back(results[i].b1_tp);
          b1tn.push_back(results[i].b1_tn);
          b2tp.push_back(results[i].b2_tp);
          b2tn.push_back(results[i].b2_tn);
          rl2.push_back(results[i].rel_l2);
        }
        agg << s << ',' << n << ',' << detail::format_double(f) << ',' << tp.size() << ','
            << detail::format_double(median_of(tp)) << ',' << detail::format_double(sd_of(tp))
            << ',' << detail::format_double(median_of(tn)) << ','
            << detail::format_double(sd_of(tn)) << ',' << detail::format_double(median_of(b1tp))
            << ',' << detail::format_double(sd_of(b1tp)) << ','
            << detail::format_double(median_of(b1tn)) << ',' << detail::format_double(sd_of(b1tn))
            << ',' << detail::format_double(median_of(b2tp)) << ','
            << detail::format_double(sd_of(b2tp)) << ',' << detail::format_double(median_of(b2tn))
            << ',' << detail::format_double(sd_of(b2tn)) << ','
            << detail::format_double(median_of(rl2)) << ',' << detail::format_double(sd_of(rl2))
            << ',' << failures << '\n';
      }
    }
  }
  std::cerr << "bench: wrote " << o.aggregate << " (" << cells.size() << " cells, threads="
            << nthreads << ")\n";
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"sparse structural VAR estimation with DAG-constrained "
               "contemporaneous effects"};
  app.require_subcommand(1);

  SimulateOpts so;
  auto* sim = app.add_subcommand("simulate", "generate synthetic model parameters and data");
  so.o_setting = sim->add_option("--setting", so.setting, "built-in setting id S1..S6");
  so.o_spec = sim->add_option("--spec", so.spec_path, "explicit setting spec JSON file");
  so.o_n = sim->add_option("--n", so.n, "number of retained time points");
  so.o_seed = sim->add_option("--seed", so.seed, "replicate seed");
  so.o_burn = sim->add_option("--burn-in", so.burn_in, "discarded leading time points");
  so.o_noperm = sim->add_flag("--no-permute", so.no_permute,
                              "keep the raw lower-triangular variable order");
  so.o_data = sim->add_option("--out-data", so.out_data, "data CSV path");
  so.o_truth = sim->add_option("--out-truth", so.out_truth, "ground-truth model JSON path");
  so.o_meta = sim->add_option("--out-meta", so.out_meta, "metadata JSON path");
  sim->add_option("--config", so.config_path, "JSON config file (flags override)");

  FitOpts fo;
  auto* fitc = app.add_subcommand("fit", "estimate the structural and lag coefficients");
  fo.o_data = fitc->add_option("--data", fo.data_path, "input data CSV (header row required)");
  fo.o_d = fitc->add_option("--d", fo.d, "lag order");
  fo.o_nodemean = fitc->add_flag("--no-demean", fo.no_demean, "skip column centering");
  fo.o_norm = fitc->add_flag("--normalize", fo.normalize, "scale columns to unit variance");
  fo.o_output = fitc->add_option("--output", fo.output, "model JSON path, or - for stdout");
  fo.o_trace = fitc->add_option("--trace", fo.trace_path, "convergence trace CSV path");
  fo.o_skel = fitc->add_option("--skeleton", fo.skeleton_path, "0/1 support CSV path");
  fo.o_heat = fitc->add_option("--heatmap", fo.heatmap_path, "long-format coefficient CSV path");
  add_hyper_flags(fitc, fo.hyper);
  add_prior_flags(fitc, fo.prior);
  fitc->add_option("--config", fo.config_path, "JSON config file (flags override)");

  EvaluateOpts eo;
  auto* evalc = app.add_subcommand("evaluate", "score an estimate against the ground truth");
  eo.o_model = evalc->add_option("--model", eo.model_path, "estimated model JSON");
  eo.o_truth = evalc->add_option("--truth", eo.truth_path, "ground-truth model JSON");
  eo.o_data = evalc->add_option("--data", eo.data_path,
                                "holdout data CSV for the one-step forecast (optional)");
  eo.o_output = evalc->add_option("--output", eo.output, "report JSON path, or - for stdout");
  eo.o_excl = evalc->add_flag("--exclude-forbidden", eo.exclude_forbidden,
                              "drop prior-forbidden cells from the metric denominators");
  eo.o_setting = evalc->add_option("--setting", eo.setting, "setting label for the report");
  eo.o_seed = evalc->add_option("--seed", eo.seed, "seed label for the report");
  eo.o_frac = evalc->add_option("--prior-fraction", eo.prior_fraction,
                                "prior-fraction label for the report");
  eo.o_frows = evalc->add_option("--forecast-rows", eo.forecast_rows,
                                 "average the forecast error over this many trailing rows");
  add_prior_flags(evalc, eo.prior);
  evalc->add_option("--config", eo.config_path, "JSON config file (flags override)");

  GridOpts go;
  auto* grid = app.add_subcommand("gridsearch", "out-of-sample hyperparameter search");
  go.o_data = grid->add_option("--data", go.data_path, "input data CSV (header row required)");
  go.o_d = grid->add_option("--d", go.d, "lag order");
  go.o_nodemean = grid->add_flag("--no-demean", go.no_demean, "skip column centering");
  go.o_norm = grid->add_flag("--normalize", go.normalize, "scale columns to unit variance");
  go.o_amin = grid->add_option("--mu-a-min", go.mu_a_min, "coarse mu_A lower bound");
  go.o_amax = grid->add_option("--mu-a-max", go.mu_a_max, "coarse mu_A upper bound");
  go.o_acount = grid->add_option("--mu-a-count", go.mu_a_count, "coarse mu_A grid size");
  go.o_cmin = grid->add_option("--c-min", go.c_min, "coarse lag-penalty factor lower bound");
  go.o_cmax = grid->add_option("--c-max", go.c_max, "coarse lag-penalty factor upper bound");
  go.o_ccount = grid->add_option("--c-count", go.c_count, "coarse factor grid size");
  go.o_split = grid->add_option("--split", go.split, "train fraction of the pair split");
  go.o_kfold = grid->add_option("--kfold", go.kfold, "0 = single split, K >= 2 = K-fold");
  go.o_sseed = grid->add_option("--split-seed", go.split_seed, "pair-shuffle seed");
  go.o_norefine = grid->add_flag("--no-refine", go.no_refine, "skip the 5x5 refinement pass");
  go.o_output = grid->add_option("--output", go.output, "report JSON path, or - for stdout");
  add_hyper_flags(grid, go.hyper);
  add_prior_flags(grid, go.prior);
  grid->add_option("--config", go.config_path, "JSON config file (flags override)");

  BenchOpts bo;
  auto* bench = app.add_subcommand("bench", "factorial benchmark with aggregate table");
  bo.o_settings = bench->add_option("--settings", bo.settings, "comma list of setting ids");
  bo.o_nlist = bench->add_option("--n-list", bo.n_list, "comma list of sample sizes");
  bo.o_fracs = bench->add_option("--prior-fractions", bo.prior_fractions,
                                 "comma list of prior fractions in [0,1]");
  bo.o_seeds = bench->add_option("--seeds", bo.seeds, "replicates per cell (seeds 1..k)");
  bo.o_seedlist = bench->add_option("--seed-list", bo.seed_list, "explicit comma list of seeds");
  bo.o_d = bench->add_option("--d", bo.d, "lag order used by the fits");
  bo.o_burn = bench->add_option("--burn-in", bo.burn_in, "simulation burn-in");
  bo.o_norm = bench->add_flag("--normalize", bo.normalize, "fit on variance-normalized data");
  bo.o_outdir = bench->add_option("--outdir", bo.outdir,
                                  "directory for per-run JSONs (env SVARDAG_TMPDIR default)");
  bo.o_agg = bench->add_option("--aggregate", bo.aggregate, "aggregate CSV path");
  bo.o_threads = bench->add_option("--threads", bo.threads,
                                   "worker threads (0 = env SVARDAG_THREADS or all cores)");
  add_hyper_flags(bench, bo.hyper);
  bench->add_option("--config", bo.config_path, "JSON config file (flags override)");

  int rc = 0;
  sim->callback([&] { rc = cmd_simulate(so); });
  fitc->callback([&] { rc = cmd_fit(fo); });
  evalc->callback([&] { rc = cmd_evaluate(eo); });
  grid->callback([&] { rc = cmd_gridsearch(go); });
  bench->callback([&] { rc = cmd_bench(bo); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const invalid_input_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
