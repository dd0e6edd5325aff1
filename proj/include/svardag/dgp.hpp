#ifndef SVARDAG_DGP_HPP
#define SVARDAG_DGP_HPP

#include <Eigen/Dense>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "svardag/model_core.hpp"
#include "svardag/rng.hpp"
#include "svardag/types.hpp"

namespace svardag {

// ---------------------------------------------------------------------------
// SettingSpec: one synthetic-experiment configuration. Densities s_* are hit
// in expectation by Bernoulli skeleton draws; (l,u) pairs bound the magnitude
// of the initial signal draws (lag coefficients are rescaled afterwards by a
// common factor, so (l_B, u_B) only shapes the initial draw). For Gaussian
// noise the per-coordinate standard deviations are drawn Unif[sigma_lo,
// sigma_hi] and sorted ascending along the causal order of A; other families
// use the constant sigma_fixed.
// ---------------------------------------------------------------------------
struct SettingSpec {
  std::string name = "custom";
  int p = 100;
  double s_A = 0.05;
  double s_B1 = 0.05;
  double s_B2 = 0.02;
  double l_A = 0.25, u_A = 0.9;
  double l_B = 1.0, u_B = 3.0;
  NoiseFamily family = NoiseFamily::Gaussian;
  double sigma_lo = 0.8, sigma_hi = 2.0;  // Gaussian heteroscedastic band
  double sigma_fixed = 1.0;               // Laplace / Student-t
  int df = 4;
  double target_rho_B = 0.5;  // lag-only companion spectral radius after rescaling
  int max_redraws = 50;
  // The strictly-lower-triangular draw has a visible causal order 1..p; a
  // symmetric random permutation hides it from the estimator. Switch off to
  // keep the raw triangular layout.
  bool permute = true;

  void validate() const {
    if (p < 2) throw invalid_input_error("SettingSpec: p must be >= 2");
    if (s_A < 0 || s_A >= 1 || s_B1 <= 0 || s_B1 >= 1 || s_B2 <= 0 || s_B2 >= 1) {
      throw invalid_input_error("SettingSpec: densities must lie in (0,1) (s_A may be 0)");
    }
    if (!(l_A < u_A) || l_A < 0 || !(l_B < u_B) || l_B <= 0) {
      throw invalid_input_error("SettingSpec: need 0 <= l_A < u_A and 0 < l_B < u_B");
    }
    if (target_rho_B <= 0 || target_rho_B >= 1) {
      throw invalid_input_error("SettingSpec: target lag radius must lie in (0,1)");
    }
    if (max_redraws < 1) throw invalid_input_error("SettingSpec: max_redraws must be >= 1");
    if (family == NoiseFamily::Gaussian) {
      if (!(sigma_lo > 0) || !(sigma_lo < sigma_hi)) {
        throw invalid_input_error("SettingSpec: need 0 < sigma_lo < sigma_hi");
      }
    } else if (!(sigma_fixed > 0)) {
      throw invalid_input_error("SettingSpec: sigma_fixed must be > 0");
    }
    if (family == NoiseFamily::StudentT && df <= 2) {
      throw invalid_input_error("SettingSpec: Student-t df must exceed 2");
    }
  }
};

// The six built-in benchmark rows. S1/S3/S5 are the sparser structural graph
// (5%, signals up to 0.9); S2/S4/S6 the denser one (10%, signals up to 0.7).
// Noise: Gaussian with sorted heteroscedastic sigmas (S1, S2), Laplace unit
// sigma (S3, S4), Student-t df=4 unit sigma (S5, S6).
inline SettingSpec builtin_setting(const std::string& id) {
  SettingSpec s;
  s.name = id;
  if (id == "S1" || id == "S3" || id == "S5") {
    s.s_A = 0.05;
    s.l_A = 0.25;
    s.u_A = 0.9;
  } else if (id == "S2" || id == "S4" || id == "S6") {
    s.s_A = 0.10;
    s.l_A = 0.25;
    s.u_A = 0.7;
  } else {
    throw invalid_input_error("unknown setting id '" + id + "' (expected S1..S6)");
  }
  if (id == "S1" || id == "S2") {
    s.family = NoiseFamily::Gaussian;
  } else if (id == "S3" || id == "S4") {
    s.family = NoiseFamily::Laplace;
  } else {
    s.family = NoiseFamily::StudentT;
  }
  return s;
}

// ---------------------------------------------------------------------------
// GenerationResult: the model parameters plus realized diagnostics that feed
// the simulate command's metadata output.
// ---------------------------------------------------------------------------
struct GenerationResult {
  StructuralMatrix A;
  LagStack B;
  NoiseSpec noise;
  double spectral_radius = 0.0;      // rho(Phi(A, B_1, B_2))
  double lag_only_radius = 0.0;      // rho(Phi(0, B_1, B_2)) after rescaling
  double scale_c = 0.0;              // common factor applied to the lag draws
  double density_A = 0.0;            // realized off-diagonal densities
  double density_B1 = 0.0;
  double density_B2 = 0.0;
  int redraws = 0;                   // extra attempts beyond the first
};

namespace detail {

inline double offdiag_density(const Matrix& m) {
  const Eigen::Index p = m.rows();
  if (p < 2) return 0.0;
  Eigen::Index nz = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i != j && m(i, j) != 0.0) ++nz;
    }
  }
  return static_cast<double>(nz) / static_cast<double>(p * (p - 1));
}

inline double full_density(const Matrix& m) {
  Eigen::Index nz = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) ++nz;
    }
  }
  return static_cast<double>(nz) / static_cast<double>(m.rows() * m.cols());
}

// One lag block: full row-major Bernoulli skeleton pass with signed uniform
// magnitudes drawn immediately for each realized edge (single deterministic
// stream pass).
inline Matrix draw_lag_block(int p, double density, double lo, double hi, Rng& rng) {
  Matrix b = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (rng.uniform01() < density) {
        b(i, j) = rng.sign() * rng.uniform(lo, hi);
      }
    }
  }
  return b;
}

inline double lag_radius(const Matrix& b1, const Matrix& b2) {
  const Eigen::Index p = b1.rows();
  Matrix phi = Matrix::Zero(2 * p, 2 * p);
  phi.topLeftCorner(p, p) = b1;
  phi.topRightCorner(p, p) = b2;
  phi.block(p, 0, p, p).setIdentity();
  return spectral_radius(phi);
}

// Common rescaling factor for the lag blocks: bracket by doubling, then
// bisect until the lag-only companion radius sits within radius_tol of the
// target. The radius is continuous in the factor and zero at 0, so a
// crossing exists whenever any entry is nonzero.
inline double bisect_lag_scale(const Matrix& b1, const Matrix& b2, double target,
                               double radius_tol) {
  const double base = lag_radius(b1, b2);
  if (base <= 0.0) {
    throw generation_failure_error(
        "lag rescaling: drawn lag blocks are all zero; increase the lag densities");
  }
  double hi = target / base;  // exact for VAR(1); a starting guess otherwise
  double rho_hi = lag_radius(hi * b1, hi * b2);
  int guard = 0;
  while (rho_hi < target) {
    hi *= 2.0;
    rho_hi = lag_radius(hi * b1, hi * b2);
    if (++guard > 200) {
      throw generation_failure_error("lag rescaling: failed to bracket the target radius");
    }
  }
  double lo = 0.0;
  double mid = hi;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double rho = lag_radius(mid * b1, mid * b2);
    if (std::abs(rho - target) <= radius_tol) return mid;
    if (rho < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate_parameters: the three-step synthetic model draw.
//   1. Lag blocks: Bernoulli skeletons at s_B1/s_B2 with +-Unif(l_B, u_B)
//      magnitudes, then both blocks multiplied by one common factor chosen by
//      bisection so the lag-only companion radius equals target_rho_B (within
//      1e-6).
//   2. Structural matrix: strictly-lower-triangular Bernoulli(s_A) skeleton
//      with +-Unif(l_A, u_A) magnitudes, then (optionally) one uniformly
//      random permutation applied symmetrically to rows and columns so the
//      causal order is not simply 1..p.
//   3. If the full companion radius is not < 1, redraw steps 1-2; give up
//      after max_redraws attempts.
// Gaussian sigmas are drawn last - Unif[sigma_lo, sigma_hi], sorted ascending
// and assigned along A's topological order, making the noise scale weakly
// increasing downstream (the identifiability device for the Gaussian rows).
// ---------------------------------------------------------------------------
inline GenerationResult generate_parameters(const SettingSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const int p = spec.p;
  const double radius_tol = 1e-6;

  GenerationResult out;
  bool ok = false;
  for (int attempt = 0; attempt <= spec.max_redraws; ++attempt) {
    // Step 1: lag blocks and their common rescaling.
    Matrix b1 = detail::draw_lag_block(p, spec.s_B1, spec.l_B, spec.u_B, rng);
    Matrix b2 = detail::draw_lag_block(p, spec.s_B2, spec.l_B, spec.u_B, rng);
    const double c = detail::bisect_lag_scale(b1, b2, spec.target_rho_B, radius_tol);
    b1 *= c;
    b2 *= c;

    // Step 2: strictly-lower-triangular structural draw, then the symmetric
    // permutation (perm[i] = original label placed at position i).
    Matrix a = Matrix::Zero(p, p);
    for (int i = 1; i < p; ++i) {
      for (int j = 0; j < i; ++j) {
        if (rng.uniform01() < spec.s_A) {
          a(i, j) = rng.sign() * rng.uniform(spec.l_A, spec.u_A);
        }
      }
    }
    if (spec.permute) {
      std::vector<int> perm(static_cast<std::size_t>(p));
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = p - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
      }
      Matrix ap(p, p);
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
          ap(i, j) = a(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
      }
      a = std::move(ap);
    }

    // Step 3: stability screen on the full companion matrix.
    StructuralMatrix A(a);
    LagStack B(std::vector<Matrix>{b1, b2});
    const Matrix phi = companion_matrix(A, B).entries;
    const double rho = spectral_radius(phi);
    if (rho < 1.0) {
      out.A = std::move(A);
      out.B = std::move(B);
      out.spectral_radius = rho;
      out.lag_only_radius = detail::lag_radius(b1, b2);
      out.scale_c = c;
      out.redraws = attempt;
      ok = true;
      break;
    }
  }
  if (!ok) {
    throw generation_failure_error(
        "generate_parameters: no stable draw within max_redraws attempts; "
        "reduce the signal bounds or densities");
  }

  out.density_A = detail::offdiag_density(out.A.entries);
  out.density_B1 = detail::full_density(out.B.blocks[0]);
  out.density_B2 = detail::full_density(out.B.blocks[1]);

  NoiseSpec noise;
  noise.family = spec.family;
  noise.df = spec.df;
  noise.sigmas = Vector::Constant(p, spec.sigma_fixed);
  if (spec.family == NoiseFamily::Gaussian) {
    std::vector<double> draws(static_cast<std::size_t>(p));
    for (auto& v : draws) v = rng.uniform(spec.sigma_lo, spec.sigma_hi);
    std::sort(draws.begin(), draws.end());
    const std::vector<int> order = topological_order(out.A.entries, 0.0);
    for (int r = 0; r < p; ++r) {
      noise.sigmas(order[static_cast<std::size_t>(r)]) = draws[static_cast<std::size_t>(r)];
    }
  }
  noise.validate();
  out.noise = std::move(noise);
  return out;
}

// ---------------------------------------------------------------------------
// simulate: iterate x_t = (I - A)^{-1}(sum_j B_j x_{t-j} + eps_t) from zero
// initial conditions, drop burn_in rows, return the next n rows. Noise
// coordinates are drawn independently in index order each step; Laplace and
// Student-t draws are rescaled so sigmas stay standard deviations.
// ---------------------------------------------------------------------------
inline TimeSeriesSample simulate(const StructuralMatrix& A, const LagStack& B,
                                 const NoiseSpec& noise, Eigen::Index n,
                                 Eigen::Index burn_in, std::uint64_t seed) {
  const Eigen::Index p = A.dimension();
  B.validate();
  noise.validate();
  if (noise.sigmas.size() != p) {
    throw invalid_input_error("simulate: noise dimension disagrees with A");
  }
  if (n < 1) throw invalid_input_error("simulate: n must be >= 1");
  if (burn_in < 0) throw invalid_input_error("simulate: burn_in must be >= 0");
  if (!is_stable(A, B)) {
    throw invalid_input_error("simulate: (A, B) is not a stable model");
  }
  const Eigen::Index d = B.lag_order();
  Matrix IA = Matrix::Identity(p, p) - A.entries;
  Eigen::FullPivLU<Matrix> lu(IA);
  if (!lu.isInvertible()) {
    throw structural_singularity_error("simulate: I - A is singular");
  }

  Rng rng(seed);
  const double t_scale =
      noise.family == NoiseFamily::StudentT
          ? std::sqrt(static_cast<double>(noise.df) / static_cast<double>(noise.df - 2))
          : 1.0;
  auto draw_eps = [&](Vector& eps) {
    for (Eigen::Index i = 0; i < p; ++i) {
      switch (noise.family) {
        case NoiseFamily::Gaussian:
          eps(i) = noise.sigmas(i) * rng.normal();
          break;
        case NoiseFamily::Laplace:
          eps(i) = rng.laplace(noise.sigmas(i) / std::sqrt(2.0));
          break;
        case NoiseFamily::StudentT:
          eps(i) = noise.sigmas(i) / t_scale * rng.student_t(noise.df);
          break;
      }
    }
  };

  std::vector<Vector> history(static_cast<std::size_t>(d), Vector::Zero(p));  // newest first
  Matrix out(n, p);
  Vector eps(p), drive(p);
  for (Eigen::Index t = 0; t < burn_in + n; ++t) {
    draw_eps(eps);
    drive = eps;
    for (Eigen::Index j = 0; j < d; ++j) {
      drive.noalias() += B.blocks[static_cast<std::size_t>(j)] * history[static_cast<std::size_t>(j)];
    }
    Vector x = lu.solve(drive);
    for (Eigen::Index j = d - 1; j > 0; --j) {
      history[static_cast<std::size_t>(j)] = history[static_cast<std::size_t>(j - 1)];
    }
    history[0] = x;
    if (t >= burn_in) out.row(t - burn_in) = x.transpose();
  }
  return TimeSeriesSample(std::move(out));
}

}  // namespace svardag

#endif  // SVARDAG_DGP_HPP
