#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "svardag/dgp.hpp"

using namespace svardag;

namespace {

SettingSpec small_spec() {
  SettingSpec s;
  s.name = "unit";
  s.p = 30;
  s.s_A = 0.2;
  s.s_B1 = 0.10;
  s.s_B2 = 0.05;
  s.l_A = 0.25;
  s.u_A = 0.9;
  s.family = NoiseFamily::Gaussian;
  return s;
}

double column_kurtosis(const Vector& x) {
  const double mean = x.mean();
  const Eigen::ArrayXd c = x.array() - mean;
  const double m2 = c.square().mean();
  const double m4 = c.square().square().mean();
  return m4 / (m2 * m2);
}

}  // namespace

TEST_CASE("builtin settings carry the benchmark configurations") {
  for (const char* id : {"S1", "S2", "S3", "S4", "S5", "S6"}) {
    const SettingSpec s = builtin_setting(id);
    CHECK(s.name == id);
    CHECK(s.p == 100);
    CHECK(s.s_B1 == 0.05);
    CHECK(s.s_B2 == 0.02);
    CHECK(s.l_B == 1.0);
    CHECK(s.u_B == 3.0);
    CHECK(s.target_rho_B == 0.5);
    CHECK_NOTHROW(s.validate());
  }
  for (const char* id : {"S1", "S3", "S5"}) {
    const SettingSpec s = builtin_setting(id);
    CHECK(s.s_A == 0.05);
    CHECK(s.l_A == 0.25);
    CHECK(s.u_A == 0.9);
  }
  for (const char* id : {"S2", "S4", "S6"}) {
    const SettingSpec s = builtin_setting(id);
    CHECK(s.s_A == 0.10);
    CHECK(s.l_A == 0.25);
    CHECK(s.u_A == 0.7);
  }
  CHECK(builtin_setting("S1").family == NoiseFamily::Gaussian);
  CHECK(builtin_setting("S2").family == NoiseFamily::Gaussian);
  CHECK(builtin_setting("S1").sigma_lo == 0.8);
  CHECK(builtin_setting("S1").sigma_hi == 2.0);
  CHECK(builtin_setting("S3").family == NoiseFamily::Laplace);
  CHECK(builtin_setting("S4").family == NoiseFamily::Laplace);
  CHECK(builtin_setting("S3").sigma_fixed == 1.0);
  CHECK(builtin_setting("S5").family == NoiseFamily::StudentT);
  CHECK(builtin_setting("S6").family == NoiseFamily::StudentT);
  CHECK(builtin_setting("S5").df == 4);
  CHECK_THROWS_AS(builtin_setting("S7"), invalid_input_error);
  CHECK_THROWS_AS(builtin_setting(""), invalid_input_error);
}

TEST_CASE("setting validation rejects out-of-range fields") {
  SettingSpec s = small_spec();
  s.p = 1;
  CHECK_THROWS_AS(s.validate(), invalid_input_error);
  s = small_spec();
  s.s_A = 0.0;  // an empty contemporaneous graph is a legitimate design
  CHECK_NOTHROW(s.validate());
  s.s_A = 1.0;
  CHECK_THROWS_AS(s.validate(), invalid_input_error);
  s = small_spec();
  s.s_B1 = 0.0;
  CHECK_THROWS_AS(s.validate(), invalid_input_error);
  s = small_spec();
  s.l_A = 0.9;
  s.u_A = 0.25;
  CHECK_THROWS_AS(s.validate(), invalid_input_error);
  s = small_spec();
  s.l_B = 0.0;
  CHECK_THROWS_AS(s.validate(), invalid_input_error);
  s = small_spec();
  s.target_rho_B = 1.0;
  CHECK_THROWS_AS(s.validate(), invalid_input_error);
  s = small_spec();
  s.sigma_lo = 0.0;
  CHECK_THROWS_AS(s.validate(), invalid_input_error);
  s = small_spec();
  s.family = NoiseFamily::Laplace;
  s.sigma_fixed = 0.0;
  CHECK_THROWS_AS(s.validate(), invalid_input_error);
  s = small_spec();
  s.family = NoiseFamily::StudentT;
  s.df = 2;
  CHECK_THROWS_AS(s.validate(), invalid_input_error);
  s = small_spec();
  s.max_redraws = 0;
  CHECK_THROWS_AS(s.validate(), invalid_input_error);
}

TEST_CASE("generated parameters satisfy the structural contracts") {
  const SettingSpec spec = small_spec();
  const GenerationResult g = generate_parameters(spec, 7);
  const int p = spec.p;

  CHECK(is_acyclic(g.A.entries, 0.0));
  CHECK(g.spectral_radius < 1.0);
  CHECK(g.spectral_radius ==
        doctest::Approx(spectral_radius(companion_matrix(g.A, g.B).entries)).epsilon(1e-12));
  CHECK(std::abs(g.lag_only_radius - 0.5) < 1e-5);
  CHECK(g.scale_c > 0.0);
  REQUIRE(g.B.blocks.size() == 2);

  // magnitude windows: structural signals in [l_A, u_A], lag signals in the
  // commonly rescaled window c*[l_B, u_B]
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const double a = std::abs(g.A.entries(i, j));
      if (a != 0.0) {
        CHECK(a >= spec.l_A);
        CHECK(a <= spec.u_A);
      }
      for (const auto& blk : g.B.blocks) {
        const double b = std::abs(blk(i, j));
        if (b != 0.0) {
          CHECK(b >= g.scale_c * spec.l_B - 1e-12);
          CHECK(b <= g.scale_c * spec.u_B + 1e-12);
        }
      }
    }
  }

  // realized edge counts stay within four binomial standard deviations
  const auto count_nz = [](const Matrix& m) {
    int c = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (m(i, j) != 0.0) ++c;
      }
    }
    return c;
  };
  const double cells_A = p * (p - 1) / 2.0;  // strictly lower triangle
  const double mean_A = cells_A * spec.s_A;
  const double sd_A = std::sqrt(cells_A * spec.s_A * (1 - spec.s_A));
  CHECK(std::abs(count_nz(g.A.entries) - mean_A) < 4.0 * sd_A);
  const double cells_B = static_cast<double>(p) * p;
  CHECK(std::abs(count_nz(g.B.blocks[0]) - cells_B * spec.s_B1) <
        4.0 * std::sqrt(cells_B * spec.s_B1 * (1 - spec.s_B1)));
  CHECK(std::abs(count_nz(g.B.blocks[1]) - cells_B * spec.s_B2) <
        4.0 * std::sqrt(cells_B * spec.s_B2 * (1 - spec.s_B2)));
  CHECK(g.density_A == doctest::Approx(count_nz(g.A.entries) /
                                       static_cast<double>(p * (p - 1))));

  // Gaussian noise scales are weakly increasing along the causal order
  const auto order = topological_order(g.A.entries, 0.0);
  for (int r = 1; r < p; ++r) {
    CHECK(g.noise.sigmas(order[static_cast<std::size_t>(r)]) >=
          g.noise.sigmas(order[static_cast<std::size_t>(r - 1)]));
  }
  CHECK(g.noise.sigmas.minCoeff() >= spec.sigma_lo);
  CHECK(g.noise.sigmas.maxCoeff() <= spec.sigma_hi);
}

TEST_CASE("generation is seed-deterministic and permutation is optional") {
  const SettingSpec spec = small_spec();
  const GenerationResult a = generate_parameters(spec, 11);
  const GenerationResult b = generate_parameters(spec, 11);
  CHECK((a.A.entries - b.A.entries).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.B.stacked() - b.B.stacked()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.noise.sigmas - b.noise.sigmas).cwiseAbs().maxCoeff() == 0.0);

  const GenerationResult c = generate_parameters(spec, 12);
  CHECK((a.A.entries - c.A.entries).cwiseAbs().maxCoeff() > 0.0);

  SettingSpec plain = spec;
  plain.permute = false;
  const GenerationResult t = generate_parameters(plain, 11);
  for (int i = 0; i < plain.p; ++i) {
    for (int j = i; j < plain.p; ++j) {
      CHECK(t.A.entries(i, j) == 0.0);  // strictly lower triangular
    }
  }
}

TEST_CASE("a benchmark-sized draw passes the same contracts") {
  const SettingSpec spec = builtin_setting("S1");
  const GenerationResult g = generate_parameters(spec, 1);
  CHECK(is_acyclic(g.A.entries, 0.0));
  CHECK(g.spectral_radius < 1.0);
  CHECK(std::abs(g.lag_only_radius - 0.5) < 1e-5);
  const auto order = topological_order(g.A.entries, 0.0);
  for (int r = 1; r < spec.p; ++r) {
    CHECK(g.noise.sigmas(order[static_cast<std::size_t>(r)]) >=
          g.noise.sigmas(order[static_cast<std::size_t>(r - 1)]));
  }
  const TimeSeriesSample sample = simulate(g.A, g.B, g.noise, 50, 100, 2);
  CHECK(sample.data.rows() == 50);
  CHECK(sample.data.cols() == 100);
  CHECK(sample.data.allFinite());
}

TEST_CASE("all-zero noise gives the all-zero trajectory") {
  StructuralMatrix A(Matrix::Zero(2, 2));
  A.entries(1, 0) = 0.5;
  LagStack B(std::vector<Matrix>{0.4 * Matrix::Identity(2, 2)});
  NoiseSpec noise;
  noise.family = NoiseFamily::Gaussian;
  noise.sigmas = Vector::Zero(2);
  const TimeSeriesSample s = simulate(A, B, noise, 25, 10, 3);
  CHECK(s.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("burn-in is a pure prefix drop of the same stream") {
  StructuralMatrix A(Matrix::Zero(3, 3));
  A.entries(2, 0) = 0.6;
  LagStack B(std::vector<Matrix>{0.3 * Matrix::Identity(3, 3),
                                 0.1 * Matrix::Identity(3, 3)});
  NoiseSpec noise;
  noise.family = NoiseFamily::Gaussian;
  noise.sigmas = Vector::Ones(3);
  const TimeSeriesSample with_burn = simulate(A, B, noise, 20, 30, 17);
  const TimeSeriesSample no_burn = simulate(A, B, noise, 50, 0, 17);
  CHECK((with_burn.data - no_burn.data.bottomRows(20)).cwiseAbs().maxCoeff() == 0.0);

  const TimeSeriesSample again = simulate(A, B, noise, 20, 30, 17);
  CHECK((with_burn.data - again.data).cwiseAbs().maxCoeff() == 0.0);
  const TimeSeriesSample other = simulate(A, B, noise, 20, 30, 18);
  CHECK((with_burn.data - other.data).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("stationary moments match the linear-systems oracle") {
  // Small structural model with heteroscedastic Gaussian noise: the sample
  // covariance and lag-1 autocovariance must match the fixed-point solution
  // of the reduced-form recursion.
  const int p = 3;
  Matrix a = Matrix::Zero(p, p);
  a(1, 0) = 0.5;
  a(2, 1) = -0.4;
  StructuralMatrix A(a);
  Matrix b1(p, p);
  b1 << 0.3, 0.1, 0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.4;
  LagStack B(std::vector<Matrix>{b1});
  NoiseSpec noise;
  noise.family = NoiseFamily::Gaussian;
  noise.sigmas = Vector(p);
  noise.sigmas << 1.0, 0.5, 2.0;

  const Matrix IAinv = (Matrix::Identity(p, p) - a).inverse();
  const Matrix Phi = IAinv * b1;
  const Matrix Omega =
      IAinv * noise.sigmas.array().square().matrix().asDiagonal() * IAinv.transpose();
  Matrix Sigma0 = Matrix::Zero(p, p);
  for (int it = 0; it < 2000; ++it) Sigma0 = Phi * Sigma0 * Phi.transpose() + Omega;
  const Matrix Sigma1 = Phi * Sigma0;

  const Eigen::Index n = 50000;
  TimeSeriesSample s = simulate(A, B, noise, n, 500, 29);
  Matrix X = s.data;
  X.rowwise() -= s.data.colwise().mean();
  const Matrix S0_hat = X.transpose() * X / static_cast<double>(n);
  const Matrix S1_hat = X.bottomRows(n - 1).transpose() * X.topRows(n - 1) /
                        static_cast<double>(n - 1);
  CHECK((S0_hat - Sigma0).norm() / Sigma0.norm() < 0.05);
  CHECK((S1_hat - Sigma1).norm() / Sigma1.norm() < 0.05);
}

TEST_CASE("noise scales are standard deviations in every family") {
  // With A = 0 and B = 0 the trajectory is the raw noise; each family must
  // deliver Var = sigma^2 and its signature tail weight.
  StructuralMatrix A(Matrix::Zero(2, 2));
  LagStack B(std::vector<Matrix>{Matrix::Zero(2, 2)});
  const Eigen::Index n = 50000;

  NoiseSpec noise;
  noise.sigmas = Vector::Constant(2, 2.0);

  SUBCASE("Gaussian") {
    noise.family = NoiseFamily::Gaussian;
    const TimeSeriesSample s = simulate(A, B, noise, n, 0, 31);
    for (int j = 0; j < 2; ++j) {
      const Vector col = s.data.col(j);
      const double var = (col.array() - col.mean()).square().mean();
      CHECK(var == doctest::Approx(4.0).epsilon(0.05));
      const double kurt = column_kurtosis(col);
      CHECK(kurt > 2.8);
      CHECK(kurt < 3.2);
    }
  }

  SUBCASE("Laplace") {
    noise.family = NoiseFamily::Laplace;
    const TimeSeriesSample s = simulate(A, B, noise, n, 0, 37);
    for (int j = 0; j < 2; ++j) {
      const Vector col = s.data.col(j);
      const double var = (col.array() - col.mean()).square().mean();
      CHECK(var == doctest::Approx(4.0).epsilon(0.05));
      const double kurt = column_kurtosis(col);
      CHECK(kurt > 5.0);  // population kurtosis 6
      CHECK(kurt < 7.0);
    }
  }

  SUBCASE("Student-t with 4 degrees of freedom") {
    noise.family = NoiseFamily::StudentT;
    noise.df = 4;
    const TimeSeriesSample s = simulate(A, B, noise, n, 0, 41);
    for (int j = 0; j < 2; ++j) {
      const Vector col = s.data.col(j);
      const double var = (col.array() - col.mean()).square().mean();
      // the fourth moment is infinite at df = 4, so the variance estimate
      // converges slowly: allow a wider band than the light-tailed families
      CHECK(var == doctest::Approx(4.0).epsilon(0.15));
      CHECK(column_kurtosis(col) > 4.0);  // visibly heavier than Gaussian
    }
  }
}

TEST_CASE("simulation rejects inconsistent or unstable inputs") {
  StructuralMatrix A(Matrix::Zero(2, 2));
  LagStack B(std::vector<Matrix>{0.5 * Matrix::Identity(2, 2)});
  NoiseSpec noise;
  noise.family = NoiseFamily::Gaussian;
  noise.sigmas = Vector::Ones(2);

  CHECK_THROWS_AS(simulate(A, B, noise, 0, 0, 1), invalid_input_error);
  CHECK_THROWS_AS(simulate(A, B, noise, 10, -1, 1), invalid_input_error);

  NoiseSpec shortnoise = noise;
  shortnoise.sigmas = Vector::Ones(3);
  CHECK_THROWS_AS(simulate(A, B, shortnoise, 10, 0, 1), invalid_input_error);

  LagStack unstable(std::vector<Matrix>{1.1 * Matrix::Identity(2, 2)});
  CHECK_THROWS_AS(simulate(A, unstable, noise, 10, 0, 1), invalid_input_error);

  Matrix sing = Matrix::Zero(2, 2);
  sing(0, 1) = 1.0;
  sing(1, 0) = 1.0;
  CHECK_THROWS_AS(simulate(StructuralMatrix(sing), B, noise, 10, 0, 1),
                  structural_singularity_error);

  NoiseSpec negative = noise;
  negative.sigmas(0) = -1.0;
  CHECK_THROWS_AS(simulate(A, B, negative, 10, 0, 1), invalid_input_error);
}

TEST_CASE("generation failure surfaces as its own error type") {
  // An explosive contemporaneous design: dense strong triangular signals can
  // still be stable, so force failure through an unbracketable lag target:
  // all-zero lag draws (density cannot be zero by validation, so use a
  // minuscule density and a seed that realizes zero edges).
  SettingSpec s = small_spec();
  s.p = 4;
  s.s_B1 = 1e-9;
  s.s_B2 = 1e-9;
  CHECK_THROWS_AS(generate_parameters(s, 5), generation_failure_error);
}
