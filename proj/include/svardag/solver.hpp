#ifndef SVARDAG_SOLVER_HPP
#define SVARDAG_SOLVER_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "svardag/io.hpp"
#include "svardag/model_core.hpp"
#include "svardag/partial_order.hpp"
#include "svardag/types.hpp"

namespace svardag {

// p x p x p tensors are stored as p slices of p x p matrices, slice index =
// k (the third constraint index). The (i, j) diagonals of every slice are
// unused and kept at exactly 0, which lets row/column reductions run over
// whole slices without masking.
using Tensor3 = std::vector<Matrix>;

inline Tensor3 zero_tensor(Eigen::Index p) {
  return Tensor3(static_cast<std::size_t>(p), Matrix::Zero(p, p));
}

inline double tensor_squared_norm(const Tensor3& t) {
  double s = 0.0;
  for (const auto& m : t) s += m.squaredNorm();
  return s;
}

// ---------------------------------------------------------------------------
// Hyperparams: regularization weights, scales, iteration caps and tolerances.
//
// tau is the support-detection threshold: the truncation indicator w flips on
// entries with |A_tilde| >= tau, and tau doubles as the zero tolerance for
// acyclicity checks of the reported estimate. It is kept tiny (1e-6) because
// the A_tilde update soft-thresholds, so "nonzero" is an exact statement.
//
// cert_scale is the magnitude scale of the acyclicity-certificate
// constraints: every constraint term (the lambda potentials, the slack floor
// for still-capped entries, the slack xi and the dual tensor y) is expressed
// in units of cert_scale. Entries whose indicator is still 1 are confined to
// a ball of radius ~cert_scale, so it must sit at signal scale: far above
// tau (or nothing ever clears the detection threshold and the first round
// collapses to zero) and below typical true edge magnitudes (so the cap
// bites only on noise). Freed entries (w = 0) face no magnitude cap; the
// certificate then only forbids cycles among them.
//
// tol_inner <= 0 means "resolve from the sample size": 1e-4 when the
// effective sample size is at least 100, 1e-5 below that (tighter tolerance
// pays off when data are scarce). tol_outer is the fraction of indicator
// entries allowed to change while still declaring the outer loop stable
// (0 = require exact equality).
// ---------------------------------------------------------------------------
struct Hyperparams {
  double mu_A = 0.1;
  double mu_B = 0.1;
  double tau = 1e-6;
  double cert_scale = 0.3;
  double rho = 1.0;
  int max_outer = 10;
  int max_inner = 500;
  double tol_inner = 0.0;  // <= 0: auto by sample size
  double tol_outer = 0.0;
  bool warm_start_B = false;  // optional sparse-regression initialization of B

  void validate() const {
    if (mu_A < 0 || mu_B < 0) throw invalid_input_error("Hyperparams: mu_A, mu_B must be >= 0");
    if (tau <= 0) throw invalid_input_error("Hyperparams: tau must be > 0");
    if (cert_scale <= 0) throw invalid_input_error("Hyperparams: cert_scale must be > 0");
    if (rho <= 0) throw invalid_input_error("Hyperparams: rho must be > 0");
    if (max_outer < 1 || max_inner < 1) {
      throw invalid_input_error("Hyperparams: iteration caps must be >= 1");
    }
  }

  double resolved_tol_inner(Eigen::Index n_effective) const {
    if (tol_inner > 0) return tol_inner;
    return n_effective >= 100 ? 1e-4 : 1e-5;
  }
};

// ---------------------------------------------------------------------------
// SolverState: all primal blocks (A, A_tilde, B, B_tilde, lambda, xi), dual
// blocks (U_A, U_B, y) and the truncation indicator w for one run. A and
// A_tilde stay bitwise zero on the diagonal and on every a-priori-forbidden
// cell at every iteration: those cells are simply never written.
// ---------------------------------------------------------------------------
struct SolverState {
  Matrix A, A_tilde;    // p x p
  Matrix B, B_tilde;    // p x (d*p), stacked lag blocks
  Matrix lambda;        // p x p certificate variable
  Tensor3 xi;           // p x p x p slack, >= 0 off-diagonal
  Matrix U_A;           // p x p dual
  Matrix U_B;           // p x (d*p) dual
  Tensor3 y;            // p x p x p dual
  Matrix w;             // p x p 0/1 indicator, diagonal kept at 1

  Eigen::Index p = 0;
  Eigen::Index d = 0;
};

inline SolverState init_solver_state(Eigen::Index p, Eigen::Index d) {
  SolverState s;
  s.p = p;
  s.d = d;
  s.A = Matrix::Zero(p, p);
  s.A_tilde = Matrix::Zero(p, p);
  s.B = Matrix::Zero(p, d * p);
  s.B_tilde = Matrix::Zero(p, d * p);
  s.lambda = Matrix::Zero(p, p);
  s.xi = zero_tensor(p);
  s.U_A = Matrix::Zero(p, p);
  s.U_B = Matrix::Zero(p, d * p);
  s.y = zero_tensor(p);
  s.w = Matrix::Ones(p, p);
  return s;
}

// ---------------------------------------------------------------------------
// SolverWorkspace: everything that stays constant across sweeps of one fit -
// lag-aligned data views, Gram matrices, and the SPD factorizations of the
// per-row A systems and of the shared B system (their matrices do not depend
// on the iterates, only on the data, the prior and rho).
// ---------------------------------------------------------------------------
struct SolverWorkspace {
  Matrix Xn;   // n x p targets
  Matrix Xl;   // n x (d*p) stacked lag predictors [lag1 | ... | lagd]
  Eigen::Index n = 0, p = 0, d = 0;

  Matrix Gnn;  // (1/n) Xn' Xn, p x p
  Matrix Cnl;  // (1/n) Xn' Xl, p x (d*p)
  Matrix Gll;  // (1/n) Xl' Xl, (d*p) x (d*p)

  std::vector<std::vector<int>> S;              // allowed parents per row
  std::vector<Eigen::LLT<Matrix>> row_factors;  // of Gnn[S_i, S_i] + rho I
  Eigen::LLT<Matrix> B_factor;                  // of Gll + rho I
};

inline SolverWorkspace make_workspace(Matrix Xn, Matrix Xl, Eigen::Index d,
                                      const PartialOrdering& prior, double rho) {
  SolverWorkspace ws;
  ws.Xn = std::move(Xn);
  ws.Xl = std::move(Xl);
  ws.n = ws.Xn.rows();
  ws.p = ws.Xn.cols();
  ws.d = d;
  if (ws.Xl.rows() != ws.n || ws.Xl.cols() != d * ws.p) {
    throw invalid_input_error("make_workspace: lag matrix must be n x (d*p)");
  }
  if (prior.dimension() != static_cast<int>(ws.p)) {
    throw invalid_input_error("make_workspace: prior dimension disagrees with data");
  }
  require_finite(ws.Xn, "solver data");
  require_finite(ws.Xl, "solver lag data");
  const double inv_n = 1.0 / static_cast<double>(ws.n);
  ws.Gnn = inv_n * (ws.Xn.transpose() * ws.Xn);
  ws.Cnl = inv_n * (ws.Xn.transpose() * ws.Xl);
  ws.Gll = inv_n * (ws.Xl.transpose() * ws.Xl);

  ws.S.resize(static_cast<std::size_t>(ws.p));
  ws.row_factors.resize(static_cast<std::size_t>(ws.p));
  for (int i = 0; i < static_cast<int>(ws.p); ++i) {
    auto& Si = ws.S[static_cast<std::size_t>(i)];
    Si = allowed_parents(prior, i);
    const Eigen::Index m = static_cast<Eigen::Index>(Si.size());
    if (m == 0) continue;
    Matrix sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        sub(a, b) = ws.Gnn(Si[static_cast<std::size_t>(a)], Si[static_cast<std::size_t>(b)]);
      }
    }
    sub.diagonal().array() += rho;
    ws.row_factors[static_cast<std::size_t>(i)].compute(sub);
  }
  Matrix KB = ws.Gll;
  KB.diagonal().array() += rho;
  ws.B_factor.compute(KB);
  return ws;
}

// ---------------------------------------------------------------------------
// update_w: entrywise indicator w(i,j) = 1(|A(i,j)| < tau), strict
// inequality; the (unused) diagonal is forced to 1. Forbidden cells carry
// A = 0 bitwise, so they come out as 1 automatically, which is exactly the
// relaxed form of their constraint.
// ---------------------------------------------------------------------------
inline Matrix update_w(const Matrix& A, double tau) {
  Matrix w = (A.array().abs() < tau).cast<double>().matrix();
  w.diagonal().setOnes();
  return w;
}

// ---------------------------------------------------------------------------
// update_A: row-separable ridge-regularized least squares. For each row i
// with V = Xn - Xl B', solve
//   ((1/n) Xn[:,S_i]' Xn[:,S_i] + rho I) A[i,S_i]
//       = (1/n) Xn[:,S_i]' V[:,i] + rho (A_tilde[i,S_i] - U_A[i,S_i]).
// The left side is SPD for rho > 0, factored once per fit. The first
// right-hand term for all rows at once is M = Gnn - Cnl B', column i sliced
// at S_i. Entries outside S_i stay zero.
// ---------------------------------------------------------------------------
inline void update_A(SolverState& s, const SolverWorkspace& ws, const Hyperparams& h) {
  const Matrix M = ws.Gnn - ws.Cnl * s.B.transpose();
  for (int i = 0; i < static_cast<int>(ws.p); ++i) {
    const auto& Si = ws.S[static_cast<std::size_t>(i)];
    const Eigen::Index m = static_cast<Eigen::Index>(Si.size());
    if (m == 0) continue;
    Vector rhs(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const int j = Si[static_cast<std::size_t>(a)];
      rhs(a) = M(j, i) + h.rho * (s.A_tilde(i, j) - s.U_A(i, j));
    }
    const Vector sol = ws.row_factors[static_cast<std::size_t>(i)].solve(rhs);
    for (Eigen::Index a = 0; a < m; ++a) {
      s.A(i, Si[static_cast<std::size_t>(a)]) = sol(a);
    }
  }
}

namespace detail {
inline double soft_threshold(double v, double t) {
  const double m = std::abs(v) - t;
  if (m <= 0) return 0.0;
  return (v < 0 ? -1.0 : 1.0) * m;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// update_A_tilde: entrywise. For j outside S_i the entry stays 0. With
// w(i,j) = 0 the entry is the plain soft-threshold of A + U_A at mu_A/rho.
// With w(i,j) = 1 the scalar subproblem
//   min (rho/2)(1+p) t^2 - rho (A+U) t + (mu_A + rho sum_k pi_ijk) |t|
// has the closed-form minimizer
//   sign(A+U) * ( (rho|A+U| - rho sum_k pi_ijk - mu_A) / (rho (1+p)) )^+,
// where, writing c for cert_scale,
// pi_ijk = xi_ijk - c lambda_ik - c 1(j != k) + c lambda_jk + y_ijk, so
// sum_k pi_ijk = Sxi(i,j) + Sy(i,j) - c rowsum(lambda)_i
// + c rowsum(lambda)_j - c (p - 1).
// ---------------------------------------------------------------------------
inline void update_A_tilde(SolverState& s, const SolverWorkspace& ws, const Hyperparams& h) {
  const Eigen::Index p = s.p;
  Matrix Sxi = Matrix::Zero(p, p);
  Matrix Sy = Matrix::Zero(p, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    Sxi += s.xi[static_cast<std::size_t>(k)];
    Sy += s.y[static_cast<std::size_t>(k)];
  }
  const Vector lrow = s.lambda.rowwise().sum();
  for (int i = 0; i < static_cast<int>(p); ++i) {
    for (int j : ws.S[static_cast<std::size_t>(i)]) {
      const double v = s.A(i, j) + s.U_A(i, j);
      if (s.w(i, j) == 0.0) {
        s.A_tilde(i, j) = detail::soft_threshold(v, h.mu_A / h.rho);
      } else {
        const double sum_pi = Sxi(i, j) + Sy(i, j) - h.cert_scale * lrow(i) +
                              h.cert_scale * lrow(j) -
                              h.cert_scale * static_cast<double>(p - 1);
        const double numer = h.rho * std::abs(v) - h.rho * sum_pi - h.mu_A;
        const double mag = numer / (h.rho * (1.0 + static_cast<double>(p)));
        s.A_tilde(i, j) = (mag <= 0 || v == 0.0) ? 0.0 : (v < 0 ? -mag : mag);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// update_B: row-separable with a shared SPD system. With W = Xn - Xn A',
//   ((1/n) Xl' Xl + rho I) B[i,:] = (1/n) Xl' W[:,i] + rho (B_tilde - U_B)[i,:].
// All p right-hand sides are solved together: (1/n) Xl' W = Cnl' (I - A'),
// so B' = solve(K, Cnl' - (A Cnl)' + rho (B_tilde - U_B)').
// ---------------------------------------------------------------------------
inline void update_B(SolverState& s, const SolverWorkspace& ws, const Hyperparams& h) {
  Matrix rhs = ws.Cnl.transpose() - (s.A * ws.Cnl).transpose() +
               h.rho * (s.B_tilde - s.U_B).transpose();  // (d*p) x p
  s.B = ws.B_factor.solve(rhs).transpose();
}

// update_B_tilde: entrywise soft-thresholding of B + U_B at mu_B/rho.
inline void update_B_tilde(SolverState& s, const Hyperparams& h) {
  const double t = h.mu_B / h.rho;
  s.B_tilde = (s.B + s.U_B).unaryExpr([t](double v) { return detail::soft_threshold(v, t); });
}

namespace detail {

// g(i,j) = |A_tilde(i,j)| w(i,j) + c (1 - w(i,j)) for i != j, 0 on the
// diagonal, with c = cert_scale: the truncation-linearized edge weight
// entering every constraint.
inline Matrix constraint_edge_weight(const SolverState& s, double cert_scale) {
  Matrix g = s.A_tilde.cwiseAbs().cwiseProduct(s.w) +
             cert_scale * (Matrix::Ones(s.p, s.p) - s.w);
  g.diagonal().setZero();
  return g;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// update_lambda: closed-form minimizer of the quadratic constraint coupling,
//   lambda <- -(1/(2 c p)) [I + (1/(2p)) 11'] psi,   c = cert_scale,
// the limit of the ridge-stabilized problem as the ridge vanishes. psi is
// assembled literally:
//   psi(i,k) = sum_{j!=i} (|At_ji| w_ji - |At_ij| w_ij)
//            - c sum_{j!=i} (w_ji - w_ij)
//            + sum_{j!=i} (xi_jik - xi_ijk) + sum_{j!=i} (y_jik - y_ijk)
//            - c ( sum_{j!=i} 1(i != k) - sum_{j!=i} 1(j != k) ).
// Column-minus-row sums over whole slices realize the j != i sums because
// the j = i terms cancel pairwise (slices keep zero diagonals; w's diagonal
// ones cancel between the two orientations).
// ---------------------------------------------------------------------------
inline void update_lambda(SolverState& s, const Hyperparams& h) {
  const Eigen::Index p = s.p;
  const Matrix gw = s.A_tilde.cwiseAbs().cwiseProduct(s.w);  // diagonal already zero
  const Vector base = (gw.colwise().sum() - gw.rowwise().sum().transpose()).transpose() -
                      h.cert_scale *
                          (s.w.colwise().sum() - s.w.rowwise().sum().transpose()).transpose();
  Matrix psi(p, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Matrix& xik = s.xi[static_cast<std::size_t>(k)];
    const Matrix& yk = s.y[static_cast<std::size_t>(k)];
    Vector col = base + (xik.colwise().sum() - xik.rowwise().sum().transpose()).transpose() +
                 (yk.colwise().sum() - yk.rowwise().sum().transpose()).transpose();
    for (Eigen::Index i = 0; i < p; ++i) {
      const double count_ik = (i != k) ? static_cast<double>(p - 1) : 0.0;
      const double count_jk =
          static_cast<double>(p - 1) - ((k != i) ? 1.0 : 0.0);  // #{j != i : j != k}
      col(i) -= h.cert_scale * (count_ik - count_jk);
    }
    psi.col(k) = col;
  }
  const Eigen::RowVectorXd colsums = psi.colwise().sum();
  s.lambda = -(psi + (Vector::Ones(p) * colsums) / (2.0 * static_cast<double>(p))) /
             (2.0 * h.cert_scale * static_cast<double>(p));
}

// ---------------------------------------------------------------------------
// update_xi: with c = cert_scale,
// xi_ijk = max{0, c lambda_ik + c 1(j != k) - c lambda_jk - |At_ij| w_ij
// - y_ijk - c (1 - w_ij)} for i != j; diagonal slices stay 0. Returns
// (squared change, new squared norm) so the solve loop can track the
// block's relative movement without copying the tensor.
// ---------------------------------------------------------------------------
inline std::pair<double, double> update_xi(SolverState& s, const Hyperparams& h) {
  const Matrix g = detail::constraint_edge_weight(s, h.cert_scale);
  const Eigen::Index p = s.p;
  double delta_sq = 0.0;
  double norm_sq = 0.0;
  for (Eigen::Index k = 0; k < p; ++k) {
    Matrix& xik = s.xi[static_cast<std::size_t>(k)];
    const Matrix& yk = s.y[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        if (i == j) continue;
        const double head = h.cert_scale * s.lambda(i, k) + ((j != k) ? h.cert_scale : 0.0) -
                            h.cert_scale * s.lambda(j, k) - g(i, j) - yk(i, j);
        const double v = head > 0.0 ? head : 0.0;
        const double old = xik(i, j);
        delta_sq += (v - old) * (v - old);
        norm_sq += v * v;
        xik(i, j) = v;
      }
    }
  }
  return {delta_sq, norm_sq};
}

// ---------------------------------------------------------------------------
// constraint residual, with c = cert_scale:
// r_ijk = |At_ij| w_ij + c (1 - w_ij) + xi_ijk - c lambda_ik - c 1(j != k)
// + c lambda_jk  (i != j; diagonal 0). This is the quantity inside the
// quadratic constraint terms of the augmented Lagrangian and the increment
// of the dual tensor y.
// ---------------------------------------------------------------------------
inline void compute_constraint_residuals(const SolverState& s, const Hyperparams& h,
                                         Tensor3& r) {
  const Matrix g = detail::constraint_edge_weight(s, h.cert_scale);
  const Eigen::Index p = s.p;
  if (r.size() != static_cast<std::size_t>(p)) r = zero_tensor(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    Matrix& rk = r[static_cast<std::size_t>(k)];
    rk.resize(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        if (i == j) {
          rk(i, j) = 0.0;
          continue;
        }
        rk(i, j) = g(i, j) + s.xi[static_cast<std::size_t>(k)](i, j) -
                   h.cert_scale * s.lambda(i, k) - ((j != k) ? h.cert_scale : 0.0) +
                   h.cert_scale * s.lambda(j, k);
      }
    }
  }
}

// dual_ascent: U_A += A - A_tilde, U_B += B - B_tilde, y_ijk += r_ijk with r
// evaluated at the just-updated primal blocks.
inline void dual_ascent_with(SolverState& s, const Tensor3& r) {
  s.U_A += s.A - s.A_tilde;
  s.U_B += s.B - s.B_tilde;
  for (std::size_t k = 0; k < s.y.size(); ++k) s.y[k] += r[k];
}

inline void dual_ascent(SolverState& s, const Hyperparams& h) {
  Tensor3 r;
  compute_constraint_residuals(s, h, r);
  dual_ascent_with(s, r);
}

// ---------------------------------------------------------------------------
// augmented_lagrangian: the full objective
//   (1/2n)||Xn - Xn A' - Xl B'||_F^2 + mu_A ||At||_1 + mu_B ||Bt||_1
//   + (rho/2)||A - At||^2 + rho <A - At, U_A>
//   + (rho/2)||B - Bt||^2 + rho <B - Bt, U_B>
//   + (rho/2) sum r^2 + rho sum y r.
// The quadratic loss is evaluated through the cached Gram matrices,
//   (1/2)[ tr(X Gnn X') - 2 tr(X Cnl B') + tr(B Gll B') ],  X = I - A,
// which equals the direct residual form up to rounding.
// ---------------------------------------------------------------------------
inline double augmented_lagrangian_with(const SolverState& s, const SolverWorkspace& ws,
                                        const Hyperparams& h, const Tensor3& r) {
  const Matrix X = Matrix::Identity(s.p, s.p) - s.A;
  const double loss = 0.5 * ((X * ws.Gnn).cwiseProduct(X).sum() -
                             2.0 * (X * ws.Cnl).cwiseProduct(s.B).sum() +
                             (s.B * ws.Gll).cwiseProduct(s.B).sum());
  double L = loss + h.mu_A * s.A_tilde.lpNorm<1>() + h.mu_B * s.B_tilde.lpNorm<1>();
  const Matrix dA = s.A - s.A_tilde;
  const Matrix dB = s.B - s.B_tilde;
  L += 0.5 * h.rho * dA.squaredNorm() + h.rho * dA.cwiseProduct(s.U_A).sum();
  L += 0.5 * h.rho * dB.squaredNorm() + h.rho * dB.cwiseProduct(s.U_B).sum();
  for (std::size_t k = 0; k < r.size(); ++k) {
    L += 0.5 * h.rho * r[k].squaredNorm() + h.rho * s.y[k].cwiseProduct(r[k]).sum();
  }
  return L;
}

inline double augmented_lagrangian(const SolverState& s, const SolverWorkspace& ws,
                                   const Hyperparams& h) {
  Tensor3 r;
  compute_constraint_residuals(s, h, r);
  return augmented_lagrangian_with(s, ws, h, r);
}

// ---------------------------------------------------------------------------
// admm_solve: cyclic primal sweeps (A, A_tilde, B, B_tilde, lambda, xi) plus
// dual ascent, recording the augmented Lagrangian and residual norms once per
// sweep, until every primal block's relative change, both primal residual
// norms and the constraint residual norm drop below the tolerance (or
// max_inner is hit). Returns the number of sweeps and whether the stopping
// rule fired.
// ---------------------------------------------------------------------------
struct InnerResult {
  int sweeps = 0;
  bool converged = false;
};

inline double relative_change(const Matrix& now, const Matrix& before) {
  return (now - before).norm() / (1.0 + before.norm());
}

inline InnerResult admm_solve(SolverState& s, const SolverWorkspace& ws, const Hyperparams& h,
                              int outer_iter, std::vector<TraceRow>& trace) {
  const double tol = h.resolved_tol_inner(ws.n);
  InnerResult res;
  Matrix prevA = s.A, prevAt = s.A_tilde, prevB = s.B, prevBt = s.B_tilde,
         prevLambda = s.lambda;
  double xi_norm = std::sqrt(tensor_squared_norm(s.xi));
  Tensor3 r = zero_tensor(s.p);
  for (int sweep = 1; sweep <= h.max_inner; ++sweep) {
    prevA = s.A;
    prevAt = s.A_tilde;
    prevB = s.B;
    prevBt = s.B_tilde;
    prevLambda = s.lambda;

    update_A(s, ws, h);
    update_A_tilde(s, ws, h);
    update_B(s, ws, h);
    update_B_tilde(s, h);
    update_lambda(s, h);
    const auto [xi_delta_sq, xi_norm_sq] = update_xi(s, h);
    compute_constraint_residuals(s, h, r);
    dual_ascent_with(s, r);

    const double L = augmented_lagrangian_with(s, ws, h, r);
    const double resA = (s.A - s.A_tilde).norm();
    const double resB = (s.B - s.B_tilde).norm();
    const double resC = std::sqrt(tensor_squared_norm(r));
    trace.push_back({outer_iter, sweep, L, resA, resB, resC});
    res.sweeps = sweep;

    const double change = std::max({relative_change(s.A, prevA),
                                    relative_change(s.A_tilde, prevAt),
                                    relative_change(s.B, prevB),
                                    relative_change(s.B_tilde, prevBt),
                                    relative_change(s.lambda, prevLambda),
                                    std::sqrt(xi_delta_sq) / (1.0 + xi_norm)});
    xi_norm = std::sqrt(xi_norm_sq);
    if (std::max({change, resA, resB, resC}) < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// project_to_dag: if the support (|entry| > zero_tol, off-diagonal) is
// already acyclic, identity. Otherwise repeatedly zero the smallest-magnitude
// entry lying inside a strongly connected component (every such edge sits on
// a cycle) until acyclic; ties break lexicographically by (row, column).
// Returns the projected matrix and whether anything was removed.
// ---------------------------------------------------------------------------
namespace detail {

// Tarjan's strongly-connected-components over the support graph, iterative.
inline std::vector<int> strongly_connected_components(const std::vector<std::vector<int>>& adj) {
  const int p = static_cast<int>(adj.size());
  std::vector<int> comp(static_cast<std::size_t>(p), -1), low(static_cast<std::size_t>(p)),
      disc(static_cast<std::size_t>(p), -1);
  std::vector<bool> on_stack(static_cast<std::size_t>(p), false);
  std::vector<int> stack;
  int timer = 0, ncomp = 0;
  struct Frame {
    int v;
    std::size_t child;
  };
  for (int root = 0; root < p; ++root) {
    if (disc[static_cast<std::size_t>(root)] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    while (!call.empty()) {
      auto& [v, child] = call.back();
      if (child == 0) {
        disc[static_cast<std::size_t>(v)] = low[static_cast<std::size_t>(v)] = timer++;
        stack.push_back(v);
        on_stack[static_cast<std::size_t>(v)] = true;
      }
      if (child < adj[static_cast<std::size_t>(v)].size()) {
        const int u = adj[static_cast<std::size_t>(v)][child++];
        if (disc[static_cast<std::size_t>(u)] == -1) {
          call.push_back({u, 0});
        } else if (on_stack[static_cast<std::size_t>(u)]) {
          low[static_cast<std::size_t>(v)] =
              std::min(low[static_cast<std::size_t>(v)], disc[static_cast<std::size_t>(u)]);
        }
      } else {
        if (low[static_cast<std::size_t>(v)] == disc[static_cast<std::size_t>(v)]) {
          while (true) {
            const int u = stack.back();
            stack.pop_back();
            on_stack[static_cast<std::size_t>(u)] = false;
            comp[static_cast<std::size_t>(u)] = ncomp;
            if (u == v) break;
          }
          ++ncomp;
        }
        call.pop_back();
        if (!call.empty()) {
          const int parent = call.back().v;
          low[static_cast<std::size_t>(parent)] =
              std::min(low[static_cast<std::size_t>(parent)], low[static_cast<std::size_t>(v)]);
        }
      }
    }
  }
  return comp;
}

}  // namespace detail

inline std::pair<Matrix, bool> project_to_dag_matrix(Matrix A, double zero_tol = 0.0) {
  const int p = static_cast<int>(A.rows());
  bool removed_any = false;
  while (true) {
    // Graph in parent -> child direction for SCC purposes (direction choice
    // does not affect the components).
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
      for (int i = 0; i < p; ++i) {
        if (i != j && std::abs(A(i, j)) > zero_tol) adj[static_cast<std::size_t>(j)].push_back(i);
      }
    }
    const auto comp = detail::strongly_connected_components(adj);
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        if (i == j || std::abs(A(i, j)) <= zero_tol) continue;
        if (comp[static_cast<std::size_t>(i)] != comp[static_cast<std::size_t>(j)]) continue;
        const double mag = std::abs(A(i, j));
        if (mag < best) {
          best = mag;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) break;  // no intra-component edge left: acyclic
    A(bi, bj) = 0.0;
    removed_any = true;
  }
  return {std::move(A), removed_any};
}

inline StructuralMatrix project_to_dag(const Matrix& A, double zero_tol = 0.0) {
  auto [projected, removed] = project_to_dag_matrix(A, zero_tol);
  (void)removed;
  return StructuralMatrix(std::move(projected));
}

// ---------------------------------------------------------------------------
// FitResult: final estimates plus run diagnostics. The reported skeleton is
// the exact support of the soft-thresholded blocks; A_hat has been projected
// to a DAG whenever the raw support was cyclic (projection_applied records
// whether that fired).
// ---------------------------------------------------------------------------
struct FitResult {
  StructuralMatrix A_hat;
  LagStack B_hat;
  std::vector<TraceRow> objective_trace;
  int outer_iters = 0;
  int inner_iters = 0;               // total sweeps across all outer rounds
  bool acyclic_after_projection = false;
  bool projection_applied = false;
  bool inner_converged = false;      // last inner run hit its stopping rule
};

// ---------------------------------------------------------------------------
// Optional sparse-regression warm start for B: with A = 0 held fixed, run a
// two-block ADMM (B, B_tilde, U_B only) to approximate
//   argmin_B (1/2n)||Xn - Xl B'||^2 + mu_B ||B||_1
// and seed the main loop's B blocks with the result.
// ---------------------------------------------------------------------------
inline void warm_start_B_blocks(SolverState& s, const SolverWorkspace& ws,
                                const Hyperparams& h) {
  for (int sweep = 0; sweep < 200; ++sweep) {
    const Matrix prevBt = s.B_tilde;
    update_B(s, ws, h);
    update_B_tilde(s, h);
    s.U_B += s.B - s.B_tilde;
    if (relative_change(s.B_tilde, prevBt) < 1e-6) break;
  }
}

// ---------------------------------------------------------------------------
// fit on pre-built (target, lagged-predictor) matrices. Rows need not come
// from a contiguous series (hyperparameter search fits on pair subsets), so
// no de-meaning happens here: callers center the data.
// ---------------------------------------------------------------------------
inline FitResult fit_matrices(const Matrix& Xn, const Matrix& Xl, Eigen::Index d,
                              const PartialOrdering& prior, const Hyperparams& h) {
  h.validate();
  if (Xn.cols() < 2) throw invalid_input_error("fit: p must be >= 2");
  SolverWorkspace ws = make_workspace(Xn, Xl, d, prior, h.rho);
  SolverState s = init_solver_state(ws.p, d);
  if (h.warm_start_B) warm_start_B_blocks(s, ws, h);

  FitResult out;
  Matrix w_prev = s.w;
  bool have_prev_w = false;
  InnerResult last_inner;
  for (int outer = 1; outer <= h.max_outer; ++outer) {
    // Truncation rule: free exactly the detected support of A_tilde, visited
    // largest-first and skipping entries that would close a cycle among the
    // freed set (the DAG projection of A_tilde at threshold tau). Freeing a
    // cyclic set would make the certificate constraints infeasible and the
    // inner loop could never converge again; the cycle-closing entries stay
    // capped instead and the l1 penalty removes them in later rounds.
    const Matrix w_new = update_w(project_to_dag_matrix(s.A_tilde, h.tau).first, h.tau);
    if (have_prev_w) {
      const double changed = (w_new.array() != w_prev.array()).count();
      if (changed <= h.tol_outer * static_cast<double>(s.p * s.p)) break;
    }
    s.w = w_new;
    w_prev = w_new;
    have_prev_w = true;
    last_inner = admm_solve(s, ws, h, outer, out.objective_trace);
    out.outer_iters = outer;
    out.inner_iters += last_inner.sweeps;
  }
  out.inner_converged = last_inner.converged;

  auto [projected, removed] = project_to_dag_matrix(s.A_tilde, h.tau);
  out.projection_applied = removed;
  out.A_hat = StructuralMatrix(std::move(projected));
  out.acyclic_after_projection = is_acyclic(out.A_hat.entries, h.tau);
  out.B_hat = LagStack::from_stacked(s.B_tilde, d);
  return out;
}

// Lag-align a contiguous series: targets are rows d..n-1; predictor block
// for lag j holds rows shifted back by j.
inline void build_lag_views(const Matrix& data, Eigen::Index d, Matrix& Xn, Matrix& Xl) {
  const Eigen::Index n_eff = data.rows() - d;
  const Eigen::Index p = data.cols();
  if (n_eff < 1) throw invalid_input_error("fit: need more rows than lags (n > d)");
  Xn = data.bottomRows(n_eff);
  Xl.resize(n_eff, d * p);
  for (Eigen::Index j = 1; j <= d; ++j) {
    Xl.middleCols((j - 1) * p, p) = data.middleRows(d - j, n_eff);
  }
}

inline FitResult fit(const TimeSeriesSample& sample, Eigen::Index d,
                     const PartialOrdering& prior, const Hyperparams& h) {
  require_finite(sample.data, "fit data");
  Matrix Xn, Xl;
  build_lag_views(sample.data, d, Xn, Xl);
  return fit_matrices(Xn, Xl, d, prior, h);
}

}  // namespace svardag

#endif  // SVARDAG_SOLVER_HPP
