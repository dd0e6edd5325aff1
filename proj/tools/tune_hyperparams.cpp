// Hyperparameter tuning harness: sweeps candidate (mu_A, mu_B) pairs over
// tuning replicates (seeds 101+, disjoint from the benchmark seeds 1..10) and
// prints one metric row per pair. Used to choose the pinned weights in
// include/svardag/defaults.hpp; not part of the test suite.
//
// Usage: tune_hyperparams [--setting S1] [--normalize] [--n 200] [--seeds 3]
//                         [--first-seed 101] [--mu-a 0.06,0.1] [--mu-b 0.05,0.08]
//                         [--max-inner 500] [--prior-fraction 0] [--cert-scale 0.3]

#include <chrono>
#include <cstdint>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "svardag/svardag.hpp"

using namespace svardag;

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

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

struct CellMetrics {
  double tp, tn, b1tp, b1tn, b2tp, b2tn, rel_l2;
  bool projected;
  int sweeps;
  bool converged;
};

}  // namespace

int main(int argc, char** argv) {
  std::string setting = "S1";
  bool normalize = false;
  int n = 200, seeds = 3, first_seed = 101, max_inner = 500, d = 2, burn_in = 1000;
  double prior_fraction = 0.0;
  double cert_scale = -1.0;  // < 0: library default
  std::vector<double> mu_a_grid{0.06, 0.08, 0.10, 0.14};
  std::vector<double> mu_b_grid{0.04, 0.05, 0.065, 0.08};

  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    auto next = [&]() -> std::string {
      if (a + 1 >= argc) {
        std::cerr << "missing value for " << arg << "\n";
        std::exit(2);
      }
      return argv[++a];
    };
    if (arg == "--setting") {
      setting = next();
    } else if (arg == "--normalize") {
      normalize = true;
    } else if (arg == "--n") {
      n = std::stoi(next());
    } else if (arg == "--seeds") {
      seeds = std::stoi(next());
    } else if (arg == "--first-seed") {
      first_seed = std::stoi(next());
    } else if (arg == "--mu-a") {
      mu_a_grid = parse_list(next());
    } else if (arg == "--mu-b") {
      mu_b_grid = parse_list(next());
    } else if (arg == "--max-inner") {
      max_inner = std::stoi(next());
    } else if (arg == "--cert-scale") {
      cert_scale = std::stod(next());
    } else if (arg == "--prior-fraction") {
      prior_fraction = std::stod(next());
    } else {
      std::cerr << "unknown argument: " << arg << "\n";
      return 2;
    }
  }

  const SettingSpec spec = builtin_setting(setting);
  std::cout << "tuning " << setting << (normalize ? " normalized" : " raw") << ", n=" << n
            << ", seeds " << first_seed << ".." << (first_seed + seeds - 1)
            << ", prior fraction " << prior_fraction << "\n";

  // Ground truths and trajectories are shared across candidate pairs.
  struct Replicate {
    GenerationResult gen;
    TimeSeriesSample train;
    Matrix centered_full;  // train-space view of all n+1 rows, for the forecast
    PartialOrdering prior;
    Replicate() : train(Matrix::Zero(2, 2)), prior(2) {}
  };
  std::vector<Replicate> reps;
  for (int r = 0; r < seeds; ++r) {
    const std::uint64_t seed = static_cast<std::uint64_t>(first_seed + r);
    Replicate rep;
    rep.gen = generate_parameters(spec, seed);
    const TimeSeriesSample full =
        simulate(rep.gen.A, rep.gen.B, rep.gen.noise, n + 1, burn_in, seed + 1000000);
    TimeSeriesSample train(full.data.topRows(n));
    train.demean();
    Matrix centered = full.data;
    centered.rowwise() -= train.column_means.transpose();
    if (normalize) {
      const Vector sds = column_sds(train.data);
      train = normalize_columns(train);
      for (Eigen::Index j = 0; j < centered.cols(); ++j) centered.col(j) /= sds(j);
    }
    rep.train = train;
    rep.centered_full = centered;
    rep.prior = prior_fraction > 0.0
                    ? random_nonsupport_mask(rep.gen.A, prior_fraction, seed + 2000000)
                    : PartialOrdering(spec.p);
    std::cerr << "prepared seed " << seed << " (spectral radius "
              << fmt(rep.gen.spectral_radius) << ")\n";
    reps.push_back(std::move(rep));
  }

  std::cout << "mu_A    mu_B    | TP     TN     B1_TP  B1_TN  B2_TP  B2_TN  rel_l2 | proj sweeps conv time\n";
  for (double mu_a : mu_a_grid) {
    for (double mu_b : mu_b_grid) {
      Hyperparams h;
      h.mu_A = mu_a;
      h.mu_B = mu_b;
      h.max_inner = max_inner;
      if (cert_scale > 0) h.cert_scale = cert_scale;

      std::vector<double> tp, tn, b1tp, b1tn, b2tp, b2tn, rl2;
      int projected = 0, sweeps = 0, converged = 0;
      const auto t0 = std::chrono::steady_clock::now();
      for (const Replicate& rep : reps) {
        const FitResult fr = fit(rep.train, d, rep.prior, h);
        SkeletonOptions a_opts;
        const SkeletonMetrics a_m =
            skeleton_metrics(fr.A_hat.entries, rep.gen.A.entries, &rep.prior, a_opts);
        SkeletonOptions b_opts;
        b_opts.include_diagonal = true;
        const SkeletonMetrics b1 =
            skeleton_metrics(fr.B_hat.blocks[0], rep.gen.B.blocks[0], nullptr, b_opts);
        const SkeletonMetrics b2 =
            skeleton_metrics(fr.B_hat.blocks[1], rep.gen.B.blocks[1], nullptr, b_opts);
        const Matrix history = rep.centered_full.middleRows(n - d, d);
        const Vector pred = one_step_forecast(fr.A_hat, fr.B_hat, history);
        tp.push_back(a_m.tp_rate);
        tn.push_back(a_m.tn_rate);
        b1tp.push_back(b1.tp_rate);
        b1tn.push_back(b1.tn_rate);
        b2tp.push_back(b2.tp_rate);
        b2tn.push_back(b2.tn_rate);
        rl2.push_back(relative_l2_error(pred, rep.centered_full.row(n).transpose()));
        projected += fr.projection_applied ? 1 : 0;
        sweeps += fr.inner_iters;
        converged += fr.inner_converged ? 1 : 0;
      }
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << fmt(mu_a) << "  " << fmt(mu_b) << "  | " << fmt(median_of(tp)) << "  "
                << fmt(median_of(tn)) << "  " << fmt(median_of(b1tp)) << "  "
                << fmt(median_of(b1tn)) << "  " << fmt(median_of(b2tp)) << "  "
                << fmt(median_of(b2tn)) << "  " << fmt(median_of(rl2)) << "  | " << projected
                << "/" << seeds << " " << sweeps << " " << converged << "/" << seeds << " "
                << fmt(secs, 0) << "s" << std::endl;
    }
  }
  return 0;
}
