#ifndef SVARDAG_EVALUATION_HPP
#define SVARDAG_EVALUATION_HPP

#include <Eigen/Dense>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "svardag/model_core.hpp"
#include "svardag/partial_order.hpp"
#include "svardag/rng.hpp"
#include "svardag/solver.hpp"
#include "svardag/types.hpp"

namespace svardag {

// ---------------------------------------------------------------------------
// SkeletonMetrics: confusion counts over support cells plus the two rates.
// Rates use the vacuous-truth convention: an empty denominator scores 1.
// ---------------------------------------------------------------------------
struct SkeletonMetrics {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  double tp_rate = 1.0;
  double tn_rate = 1.0;
};

struct SkeletonOptions {
  // A-matrices compare off-diagonal cells only; lag blocks use every cell.
  bool include_diagonal = false;
  // Prior-forbidden cells are guaranteed true negatives and count toward TN
  // by default; set true to drop them from the denominators instead.
  bool exclude_forbidden = false;
  // Support = |entry| > threshold. The default 0 means the exact nonzero
  // pattern (the sparse solve produces hard zeros, so no threshold is
  // needed unless the caller wants one).
  double threshold = 0.0;
};

inline SkeletonMetrics skeleton_metrics(const Matrix& estimate, const Matrix& truth,
                                        const PartialOrdering* prior = nullptr,
                                        const SkeletonOptions& opts = {}) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw invalid_input_error("skeleton_metrics: shape mismatch");
  }
  if (prior != nullptr && prior->dimension() != static_cast<int>(truth.rows())) {
    throw invalid_input_error("skeleton_metrics: prior dimension mismatch");
  }
  SkeletonMetrics m;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) {
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
      if (!opts.include_diagonal && i == j) continue;
      if (opts.exclude_forbidden && prior != nullptr &&
          prior->is_forbidden(static_cast<int>(i), static_cast<int>(j))) {
        continue;
      }
      const bool est = std::abs(estimate(i, j)) > opts.threshold;
      const bool tru = std::abs(truth(i, j)) > opts.threshold;
      if (tru) {
        est ? ++m.tp : ++m.fn;
      } else {
        est ? ++m.fp : ++m.tn;
      }
    }
  }
  if (m.tp + m.fn > 0) m.tp_rate = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.tn + m.fp > 0) m.tn_rate = static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp);
  return m;
}

inline SkeletonMetrics skeleton_metrics(const StructuralMatrix& estimate,
                                        const StructuralMatrix& truth,
                                        const PartialOrdering* prior = nullptr,
                                        const SkeletonOptions& opts = {}) {
  return skeleton_metrics(estimate.entries, truth.entries, prior, opts);
}

// ---------------------------------------------------------------------------
// one_step_forecast: zero-noise reduced-form step
//   x_hat = (I - A)^{-1} sum_j B_j x_{last+1-j}.
// history rows are in time order: row 0 is the oldest of the d conditioning
// observations, row d-1 the most recent. Acyclic A makes I - A invertible by
// construction; any other input must at least keep it nonsingular.
// ---------------------------------------------------------------------------
inline Vector one_step_forecast(const StructuralMatrix& A, const LagStack& B,
                                const Matrix& history) {
  const Eigen::Index p = A.dimension();
  const Eigen::Index d = B.lag_order();
  B.validate();
  if (B.dimension() != p) {
    throw invalid_input_error("one_step_forecast: A and B dimensions disagree");
  }
  if (history.rows() != d || history.cols() != p) {
    throw invalid_input_error("one_step_forecast: history must be d rows of p columns");
  }
  Vector drive = Vector::Zero(p);
  for (Eigen::Index j = 1; j <= d; ++j) {
    drive.noalias() += B.blocks[static_cast<std::size_t>(j - 1)] * history.row(d - j).transpose();
  }
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(p, p) - A.entries);
  if (!lu.isInvertible()) {
    throw structural_singularity_error("one_step_forecast: I - A is singular");
  }
  return lu.solve(drive);
}

inline double relative_l2_error(const Vector& forecast, const Vector& actual) {
  if (forecast.size() != actual.size()) {
    throw invalid_input_error("relative_l2_error: size mismatch");
  }
  const double denom = actual.norm();
  if (denom == 0.0) {
    throw invalid_input_error("relative_l2_error: actual vector is zero, ratio undefined");
  }
  return (forecast - actual).norm() / denom;
}

// ---------------------------------------------------------------------------
// varsortability: over every ordered pair (ancestor, descendant) connected by
// a directed path in the support of truth, the fraction whose sample marginal
// variance strictly increases along the path; ties (equal within 1e-9
// relative) count one half. Returns the neutral 0.5 when the graph has no
// path pairs at all. Temporal dependence in the rows is deliberately ignored:
// variances are plain column sample variances.
// ---------------------------------------------------------------------------
inline double varsortability(const StructuralMatrix& truth, const TimeSeriesSample& sample,
                             double zero_tol = 0.0) {
  const int p = static_cast<int>(truth.dimension());
  if (sample.cols() != p) {
    throw invalid_input_error("varsortability: data dimension disagrees with truth");
  }
  if (sample.rows() < 2) {
    throw invalid_input_error("varsortability: need at least 2 rows");
  }
  validate_structural(truth, zero_tol);

  // reach[a] = set of nodes with a directed path a ~> x (a excluded unless
  // cyclic, which validate_structural already excluded).
  std::vector<std::vector<bool>> reach(static_cast<std::size_t>(p),
                                       std::vector<bool>(static_cast<std::size_t>(p), false));
  const auto children = detail::children_lists(truth.entries, zero_tol);
  for (int a = 0; a < p; ++a) {
    std::vector<int> stack{a};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : children[static_cast<std::size_t>(u)]) {
        if (!reach[static_cast<std::size_t>(a)][static_cast<std::size_t>(v)]) {
          reach[static_cast<std::size_t>(a)][static_cast<std::size_t>(v)] = true;
          stack.push_back(v);
        }
      }
    }
  }

  Vector var(p);
  const Eigen::Index n = sample.rows();
  for (int j = 0; j < p; ++j) {
    const double mean = sample.data.col(j).mean();
    var(j) = (sample.data.col(j).array() - mean).square().sum() / static_cast<double>(n - 1);
  }

  double score = 0.0;
  long pairs = 0;
  const double tie_tol = 1e-9;
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      if (!reach[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) continue;
      ++pairs;
      const double va = var(a), vb = var(b);
      const double scale = std::max({std::abs(va), std::abs(vb), 1e-300});
      if (std::abs(va - vb) <= tie_tol * scale) {
        score += 0.5;
      } else if (va < vb) {
        score += 1.0;
      }
    }
  }
  if (pairs == 0) return 0.5;
  return score / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------
// normalize_columns: divide each column by its sample standard deviation
// (computed about the column mean, n-1 denominator). The mean itself is not
// subtracted here - centering is a separate, independent step - so data that
// already have unit variance pass through unchanged.
// ---------------------------------------------------------------------------
inline TimeSeriesSample normalize_columns(const TimeSeriesSample& sample) {
  require_finite(sample.data, "normalize_columns");
  if (sample.rows() < 2) {
    throw invalid_input_error("normalize_columns: need at least 2 rows");
  }
  TimeSeriesSample out = sample;
  for (Eigen::Index j = 0; j < sample.cols(); ++j) {
    const double mean = sample.data.col(j).mean();
    const double ss = (sample.data.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(sample.rows() - 1));
    if (sd <= 0.0) {
      throw invalid_input_error("normalize_columns: zero-variance column");
    }
    out.data.col(j) /= sd;
  }
  return out;
}

// Column standard deviations with the same convention, for metadata output.
inline Vector column_sds(const Matrix& data) {
  Vector sds(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const double mean = data.col(j).mean();
    sds(j) = std::sqrt((data.col(j).array() - mean).square().sum() /
                       static_cast<double>(data.rows() - 1));
  }
  return sds;
}

// ---------------------------------------------------------------------------
// Hyperparameter grid search. The series is cut into lag-aligned
// (target-row, predictor-row) pairs; pairs are shuffled once with the given
// seed and split train/validation (the pairing keeps each target aligned
// with its own lags, which is what preserves the temporal structure). Every
// (mu_A, mu_B) cell fits on the train pairs and scores root-mean-square error
// of the reduced-form prediction (I - A)^{-1} B xl on the validation pairs.
// kfold = 0 runs the single split; kfold = K >= 2 averages the RMSE over K
// shuffled folds instead.
// ---------------------------------------------------------------------------
struct GridCell {
  double mu_A = 0.0;
  double mu_B = 0.0;
  double rmse = 0.0;
};

struct GridSearchReport {
  std::vector<GridCell> grid;
  double best_mu_A = 0.0;
  double best_mu_B = 0.0;
  double best_rmse = 0.0;
};

namespace detail {

inline std::vector<int> shuffled_indices(int n, std::uint64_t seed) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

inline Matrix take_rows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  }
  return out;
}

inline double reduced_form_rmse(const FitResult& fit, const Matrix& Xn_val,
                                const Matrix& Xl_val) {
  const Eigen::Index p = Xn_val.cols();
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(p, p) - fit.A_hat.entries);
  if (!lu.isInvertible()) {
    throw structural_singularity_error("grid_search: fitted I - A is singular");
  }
  // Row r of the prediction is ((I-A)^{-1} B xl_r)'.
  const Matrix pred = lu.solve(fit.B_hat.stacked() * Xl_val.transpose()).transpose();
  return std::sqrt((pred - Xn_val).squaredNorm() /
                   static_cast<double>(Xn_val.rows() * Xn_val.cols()));
}

}  // namespace detail

inline GridSearchReport grid_search(const TimeSeriesSample& sample, Eigen::Index d,
                                    const PartialOrdering& prior,
                                    const std::vector<double>& mu_A_grid,
                                    const std::vector<double>& mu_B_grid,
                                    double train_fraction, const Hyperparams& base,
                                    std::uint64_t split_seed = 1, int kfold = 0) {
  if (mu_A_grid.empty() || mu_B_grid.empty()) {
    throw invalid_input_error("grid_search: grids must be non-empty");
  }
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw invalid_input_error("grid_search: train fraction must lie in (0,1)");
  }
  if (kfold == 1 || kfold < 0) {
    throw invalid_input_error("grid_search: kfold must be 0 (single split) or >= 2");
  }
  Matrix Xn, Xl;
  build_lag_views(sample.data, d, Xn, Xl);
  const int n_pairs = static_cast<int>(Xn.rows());

  const std::vector<int> order = detail::shuffled_indices(n_pairs, split_seed);

  // Each entry: (train row indices, validation row indices), ascending within
  // each side so the assembled matrices are independent of shuffle internals.
  std::vector<std::pair<std::vector<int>, std::vector<int>>> folds;
  if (kfold == 0) {
    const int n_train = static_cast<int>(std::floor(train_fraction * n_pairs));
    if (n_train < 1 || n_train >= n_pairs) {
      throw invalid_input_error("grid_search: too few pairs for the requested split");
    }
    std::vector<int> train(order.begin(), order.begin() + n_train);
    std::vector<int> val(order.begin() + n_train, order.end());
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
    folds.emplace_back(std::move(train), std::move(val));
  } else {
    if (n_pairs < kfold) {
      throw invalid_input_error("grid_search: too few pairs for the requested fold count");
    }
    for (int f = 0; f < kfold; ++f) {
      std::vector<int> train, val;
      for (int r = 0; r < n_pairs; ++r) {
        (r % kfold == f ? val : train).push_back(order[static_cast<std::size_t>(r)]);
      }
      std::sort(train.begin(), train.end());
      std::sort(val.begin(), val.end());
      folds.emplace_back(std::move(train), std::move(val));
    }
  }

  struct FoldData {
    Matrix Xn_tr, Xl_tr, Xn_va, Xl_va;
  };
  std::vector<FoldData> data;
  data.reserve(folds.size());
  for (const auto& [train, val] : folds) {
    data.push_back({detail::take_rows(Xn, train), detail::take_rows(Xl, train),
                    detail::take_rows(Xn, val), detail::take_rows(Xl, val)});
  }

  GridSearchReport report;
  bool have_best = false;
  for (double mu_A : mu_A_grid) {
    for (double mu_B : mu_B_grid) {
      Hyperparams h = base;
      h.mu_A = mu_A;
      h.mu_B = mu_B;
      double rmse_sum = 0.0;
      for (const auto& fd : data) {
        const FitResult fr = fit_matrices(fd.Xn_tr, fd.Xl_tr, d, prior, h);
        rmse_sum += detail::reduced_form_rmse(fr, fd.Xn_va, fd.Xl_va);
      }
      const double rmse = rmse_sum / static_cast<double>(data.size());
      report.grid.push_back({mu_A, mu_B, rmse});
      // Ties break toward the sparser model: larger mu_A, then larger mu_B.
      const bool better =
          !have_best || rmse < report.best_rmse ||
          (rmse == report.best_rmse &&
           (mu_A > report.best_mu_A ||
            (mu_A == report.best_mu_A && mu_B > report.best_mu_B)));
      if (better) {
        report.best_mu_A = mu_A;
        report.best_mu_B = mu_B;
        report.best_rmse = rmse;
        have_best = true;
      }
    }
  }
  return report;
}

// The lag-penalty scale the default grids are built around: mu_B = c *
// sqrt(log(p*q) / N) with q the lag order and N the number of usable pairs.
inline double lag_penalty_scale(int p, int q, int n_pairs) {
  return std::sqrt(std::log(static_cast<double>(p) * static_cast<double>(q)) /
                   static_cast<double>(n_pairs));
}

}  // namespace svardag

#endif  // SVARDAG_EVALUATION_HPP
