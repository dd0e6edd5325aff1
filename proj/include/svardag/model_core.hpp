#ifndef SVARDAG_MODEL_CORE_HPP
#define SVARDAG_MODEL_CORE_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "svardag/types.hpp"

namespace svardag {

// Default tolerance below which a coefficient is treated as structurally
// zero when reading off a support graph. Soft-thresholded estimates carry
// exact zeros, so anything this small is noise, not an edge.
inline constexpr double kDefaultZeroTol = 1e-8;

namespace detail {

// Adjacency lists of the support graph of M: edge j -> i iff |M(i,j)| >
// zero_tol (row = child, column = parent), self-loops ignored by callers
// that require a zero diagonal.
template <typename Derived>
std::vector<std::vector<int>> children_lists(const Eigen::MatrixBase<Derived>& M,
                                             double zero_tol) {
  const int p = static_cast<int>(M.rows());
  std::vector<std::vector<int>> children(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      if (i != j && std::abs(static_cast<double>(M(i, j))) > zero_tol) {
        children[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  return children;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// topological_order: Kahn's algorithm over the support graph of M. Among the
// currently source-free nodes the smallest index is emitted first, so the
// order is deterministic. Parents precede children in the returned order.
// Throws cycle_error naming one offending cycle when none exists.
// ---------------------------------------------------------------------------
template <typename Derived>
std::vector<int> topological_order(const Eigen::MatrixBase<Derived>& M,
                                   double zero_tol = kDefaultZeroTol) {
  if (M.rows() != M.cols()) {
    throw invalid_input_error("topological_order: matrix must be square");
  }
  const int p = static_cast<int>(M.rows());
  const auto children = detail::children_lists(M, zero_tol);
  std::vector<int> in_degree(static_cast<std::size_t>(p), 0);
  for (const auto& ch : children) {
    for (int i : ch) ++in_degree[static_cast<std::size_t>(i)];
  }

  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(p));
  std::vector<bool> emitted(static_cast<std::size_t>(p), false);
  for (int step = 0; step < p; ++step) {
    int next = -1;
    for (int v = 0; v < p; ++v) {
      if (!emitted[static_cast<std::size_t>(v)] && in_degree[static_cast<std::size_t>(v)] == 0) {
        next = v;
        break;
      }
    }
    if (next < 0) {
      // Every remaining node has an incoming edge: walk parents until a node
      // repeats to report one concrete cycle.
      std::vector<int> parent_of(static_cast<std::size_t>(p), -1);
      for (int j = 0; j < p; ++j) {
        for (int i : children[static_cast<std::size_t>(j)]) {
          if (!emitted[static_cast<std::size_t>(i)] && !emitted[static_cast<std::size_t>(j)]) {
            parent_of[static_cast<std::size_t>(i)] = j;
          }
        }
      }
      int v = 0;
      while (emitted[static_cast<std::size_t>(v)] || parent_of[static_cast<std::size_t>(v)] < 0) ++v;
      std::vector<bool> seen(static_cast<std::size_t>(p), false);
      while (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        v = parent_of[static_cast<std::size_t>(v)];
      }
      std::ostringstream msg;
      msg << "topological_order: support graph has a directed cycle:";
      int u = v;
      do {
        msg << ' ' << (u + 1);
        u = parent_of[static_cast<std::size_t>(u)];
      } while (u != v);
      msg << " -> " << (v + 1) << " (1-based)";
      throw cycle_error(msg.str());
    }
    emitted[static_cast<std::size_t>(next)] = true;
    order.push_back(next);
    for (int i : children[static_cast<std::size_t>(next)]) {
      --in_degree[static_cast<std::size_t>(i)];
    }
  }
  return order;
}

// ---------------------------------------------------------------------------
// is_acyclic: whether the support graph of M (|entry| > zero_tol) admits a
// topological order.
// ---------------------------------------------------------------------------
template <typename Derived>
bool is_acyclic(const Eigen::MatrixBase<Derived>& M, double zero_tol = kDefaultZeroTol) {
  try {
    topological_order(M, zero_tol);
    return true;
  } catch (const cycle_error&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// spectral_radius: max |eigenvalue| via the dense (real Schur based)
// eigensolver; accuracy is far inside the 1e-8 relative contract.
// ---------------------------------------------------------------------------
template <typename Derived>
double spectral_radius(const Eigen::MatrixBase<Derived>& M) {
  if (M.rows() != M.cols()) {
    throw invalid_input_error("spectral_radius: matrix must be square");
  }
  require_finite(M, "spectral_radius");
  if (M.rows() == 0) return 0.0;
  if (M.rows() == 1) return std::abs(static_cast<double>(M(0, 0)));
  Eigen::EigenSolver<Matrix> es(M.template cast<double>(), /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// companion_matrix: the (d*p) x (d*p) transition matrix of the stacked lag-1
// representation,
//   [ (I-A)^{-1}B_1  ...  (I-A)^{-1}B_{d-1}  (I-A)^{-1}B_d ]
//   [      I_p       ...        0                 0        ]
//   [      ...                 ...               ...       ]
//   [       0        ...       I_p                0        ]
// Throws structural_singularity_error when I - A is singular (a cyclic or
// otherwise invalid A; for any acyclic A, I - A is a permuted unit-triangular
// matrix and always invertible).
// ---------------------------------------------------------------------------
template <typename Scalar>
CompanionMatrixT<Scalar> companion_matrix(const StructuralMatrixT<Scalar>& A,
                                          const LagStackT<Scalar>& B) {
  B.validate();
  const Eigen::Index p = B.dimension();
  const Eigen::Index d = B.lag_order();
  if (A.entries.rows() != p || A.entries.cols() != p) {
    throw invalid_input_error("companion_matrix: A and B dimensions disagree");
  }
  DenseMatrix<Scalar> ImA = DenseMatrix<Scalar>::Identity(p, p) - A.entries;
  Eigen::FullPivLU<DenseMatrix<Scalar>> lu(ImA);
  if (!lu.isInvertible()) {
    throw structural_singularity_error(
        "companion_matrix: I - A is singular (support of A is not a DAG)");
  }
  CompanionMatrixT<Scalar> phi;
  phi.entries = DenseMatrix<Scalar>::Zero(d * p, d * p);
  for (Eigen::Index j = 0; j < d; ++j) {
    phi.entries.block(0, j * p, p, p) = lu.solve(B.blocks[static_cast<std::size_t>(j)]);
  }
  for (Eigen::Index r = 1; r < d; ++r) {
    phi.entries.block(r * p, (r - 1) * p, p, p) = DenseMatrix<Scalar>::Identity(p, p);
  }
  return phi;
}

template <typename Scalar>
bool is_stable(const StructuralMatrixT<Scalar>& A, const LagStackT<Scalar>& B) {
  return spectral_radius(companion_matrix(A, B).entries) < 1.0;
}

// ---------------------------------------------------------------------------
// verify_acyclicity_certificate: checks the p^3 - p^2 polyhedral inequalities
//   lambda(i,k) + 1(j != k) - lambda(j,k) >= 1(|M(i,j)| > zero_tol)
// for all i != j and all k. A feasible lambda exists iff the support of M is
// acyclic.
// ---------------------------------------------------------------------------
template <typename DerivedM, typename DerivedL>
bool verify_acyclicity_certificate(const Eigen::MatrixBase<DerivedM>& M,
                                   const Eigen::MatrixBase<DerivedL>& lambda,
                                   double zero_tol = kDefaultZeroTol) {
  const int p = static_cast<int>(M.rows());
  if (M.cols() != p || lambda.rows() != p || lambda.cols() != p) {
    throw invalid_input_error("verify_acyclicity_certificate: shape mismatch");
  }
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      const double rhs = (std::abs(static_cast<double>(M(i, j))) > zero_tol) ? 1.0 : 0.0;
      for (int k = 0; k < p; ++k) {
        const double lhs = static_cast<double>(lambda(i, k)) + ((j != k) ? 1.0 : 0.0) -
                           static_cast<double>(lambda(j, k));
        if (lhs < rhs) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// acyclicity_certificate_for: a canonical feasible certificate for an acyclic
// support, lambda(j,k) = 1 if j is reachable from k by a directed path (and 0
// otherwise, in particular lambda(k,k) = 0). Edges inside column k then rise
// by at least the required amount: an edge k -> i gives lambda(i,k) = 1 >=
// lambda(k,k) + 1, any other edge j -> i keeps reachability monotone, and no
// value exceeds lambda(k,k) + 1. Throws cycle_error on cyclic input.
// ---------------------------------------------------------------------------
template <typename Derived>
Matrix acyclicity_certificate_for(const Eigen::MatrixBase<Derived>& M,
                                  double zero_tol = kDefaultZeroTol) {
  if (!is_acyclic(M, zero_tol)) {
    throw cycle_error("acyclicity_certificate_for: support graph is cyclic");
  }
  const int p = static_cast<int>(M.rows());
  const auto children = detail::children_lists(M, zero_tol);
  Matrix lambda = Matrix::Zero(p, p);
  for (int k = 0; k < p; ++k) {
    std::vector<int> stack{k};
    std::vector<bool> reach(static_cast<std::size_t>(p), false);
    reach[static_cast<std::size_t>(k)] = true;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int c : children[static_cast<std::size_t>(v)]) {
        if (!reach[static_cast<std::size_t>(c)]) {
          reach[static_cast<std::size_t>(c)] = true;
          stack.push_back(c);
        }
      }
    }
    for (int j = 0; j < p; ++j) {
      lambda(j, k) = (j != k && reach[static_cast<std::size_t>(j)]) ? 1.0 : 0.0;
    }
  }
  return lambda;
}

// ---------------------------------------------------------------------------
// Validation for StructuralMatrix invariants (zero diagonal, acyclic
// support). Lives here rather than in types.hpp because it needs the sort.
// ---------------------------------------------------------------------------
template <typename Scalar>
void validate_structural(const StructuralMatrixT<Scalar>& A,
                         double zero_tol = kDefaultZeroTol) {
  if (A.entries.rows() != A.entries.cols() || A.entries.rows() < 1) {
    throw invalid_input_error("StructuralMatrix: must be square with p >= 1");
  }
  if (A.entries.diagonal().cwiseAbs().maxCoeff() != Scalar(0)) {
    throw invalid_input_error("StructuralMatrix: diagonal must be exactly zero (no self-loops)");
  }
  topological_order(A.entries, zero_tol);  // throws cycle_error when cyclic
}

}  // namespace svardag

#endif  // SVARDAG_MODEL_CORE_HPP
