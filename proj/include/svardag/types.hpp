#ifndef SVARDAG_TYPES_HPP
#define SVARDAG_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace svardag {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;

// ---------------------------------------------------------------------------
// Error taxonomy. Usage errors surface as invalid_input_error; structural
// problems (cyclic A where a DAG is required, singular I - A) get their own
// types so callers can map them to exit codes and messages.
// ---------------------------------------------------------------------------
struct invalid_input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct structural_singularity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct cycle_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct generation_failure_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    throw invalid_input_error(std::string(what) + ": non-finite entries");
  }
}

// ---------------------------------------------------------------------------
// StructuralMatrix: p x p contemporaneous coefficients. Edge convention used
// everywhere in this library: entries(i, j) != 0 means j is a parent of i
// (column index = parent, row index = child). Invariants: zero diagonal and
// an acyclic support graph; validation lives in model_core.hpp because it
// needs the topological sort.
// ---------------------------------------------------------------------------
template <typename Scalar = double>
struct StructuralMatrixT {
  DenseMatrix<Scalar> entries;

  StructuralMatrixT() = default;
  explicit StructuralMatrixT(DenseMatrix<Scalar> e) : entries(std::move(e)) {}

  Eigen::Index dimension() const { return entries.rows(); }
};
using StructuralMatrix = StructuralMatrixT<double>;

// ---------------------------------------------------------------------------
// LagStack: the d lag-coefficient matrices B_1..B_d, each p x p. Also usable
// in stacked form [B_1 | ... | B_d] (p x dp), which is the layout the solver
// works in.
// ---------------------------------------------------------------------------
template <typename Scalar = double>
struct LagStackT {
  std::vector<DenseMatrix<Scalar>> blocks;

  LagStackT() = default;
  explicit LagStackT(std::vector<DenseMatrix<Scalar>> b) : blocks(std::move(b)) {
    validate();
  }

  Eigen::Index lag_order() const { return static_cast<Eigen::Index>(blocks.size()); }
  Eigen::Index dimension() const { return blocks.empty() ? 0 : blocks.front().rows(); }

  void validate() const {
    if (blocks.empty()) {
      throw invalid_input_error("LagStack: lag order d must be >= 1");
    }
    const Eigen::Index p = blocks.front().rows();
    for (const auto& b : blocks) {
      if (b.rows() != p || b.cols() != p) {
        throw invalid_input_error("LagStack: all blocks must be p x p with a shared p");
      }
    }
  }

  DenseMatrix<Scalar> stacked() const {
    const Eigen::Index p = dimension();
    DenseMatrix<Scalar> s(p, p * lag_order());
    for (Eigen::Index j = 0; j < lag_order(); ++j) {
      s.middleCols(j * p, p) = blocks[static_cast<std::size_t>(j)];
    }
    return s;
  }

  static LagStackT from_stacked(const DenseMatrix<Scalar>& s, Eigen::Index d) {
    if (d < 1 || s.cols() != s.rows() * d) {
      throw invalid_input_error("LagStack::from_stacked: expected a p x (d*p) matrix");
    }
    std::vector<DenseMatrix<Scalar>> blocks;
    blocks.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
      blocks.push_back(s.middleCols(j * s.rows(), s.rows()));
    }
    LagStackT out;
    out.blocks = std::move(blocks);
    return out;
  }
};
using LagStack = LagStackT<double>;

// ---------------------------------------------------------------------------
// CompanionMatrix: the (d*p) x (d*p) transition matrix of the lag-1
// representation. Top block row carries (I-A)^{-1}B_j; block row r > 1 has an
// identity in block column r-1 and zeros elsewhere.
// ---------------------------------------------------------------------------
template <typename Scalar = double>
struct CompanionMatrixT {
  DenseMatrix<Scalar> entries;
};
using CompanionMatrix = CompanionMatrixT<double>;

// ---------------------------------------------------------------------------
// TimeSeriesSample: n x p observations, one time point per row (ascending in
// time). De-meaning is recorded so downstream consumers (forecast evaluation,
// normalization) can map back to the original scale.
// ---------------------------------------------------------------------------
template <typename Scalar = double>
struct TimeSeriesSampleT {
  DenseMatrix<Scalar> data;
  DenseVector<Scalar> column_means;  // zero length until demean() runs
  bool demeaned = false;

  TimeSeriesSampleT() = default;
  explicit TimeSeriesSampleT(DenseMatrix<Scalar> d) : data(std::move(d)) {}

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }

  void demean() {
    require_finite(data, "TimeSeriesSample");
    column_means = data.colwise().mean();
    data.rowwise() -= column_means.transpose();
    demeaned = true;
  }
};
using TimeSeriesSample = TimeSeriesSampleT<double>;

// ---------------------------------------------------------------------------
// NoiseSpec: the innovation distribution. sigmas are per-coordinate standard
// deviations (not scale parameters): Laplace draws use scale sigma/sqrt(2)
// and Student-t draws are scaled by sigma/sqrt(df/(df-2)) so the stated
// sigmas are the actual standard deviations in every family.
// ---------------------------------------------------------------------------
enum class NoiseFamily { Gaussian, Laplace, StudentT };

inline const char* to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::Gaussian: return "gaussian";
    case NoiseFamily::Laplace: return "laplace";
    case NoiseFamily::StudentT: return "student_t";
  }
  return "unknown";
}

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Gaussian;
  Vector sigmas;
  int df = 4;  // Student-t degrees of freedom; unused for other families

  void validate() const {
    // sigma = 0 is allowed: it makes that coordinate's innovation
    // deterministic zero (useful for exact-recursion checks).
    if (sigmas.size() == 0 || (sigmas.array() < 0).any()) {
      throw invalid_input_error("NoiseSpec: all sigmas must be >= 0");
    }
    if (family == NoiseFamily::StudentT && df <= 2) {
      throw invalid_input_error("NoiseSpec: Student-t df must exceed 2 so the variance exists");
    }
  }
};

}  // namespace svardag

#endif  // SVARDAG_TYPES_HPP
