#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "sepcov/covariance_models.hpp"

using namespace sepcov;

namespace {

Grid<double> lattice_grid(std::vector<int> lattice, Eigen::Index q) {
  return Grid<double>(unit_time_points<double>(q), unit_lattice<double>(lattice));
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// 1-D factors of a separable model: spatial block at time lag 0 and temporal
// block at distance 0, rescaled so that their product reproduces the model.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> margins(const CovModel& m, const Grid<double>& g) {
  Eigen::MatrixXd s(g.p(), g.p()), t(g.q(), g.q());
  for (Eigen::Index k = 0; k < g.p(); ++k)
    for (Eigen::Index k2 = 0; k2 < g.p(); ++k2) s(k, k2) = cov_entry(m, g, k, 0, k2, 0);
  for (Eigen::Index l = 0; l < g.q(); ++l)
    for (Eigen::Index l2 = 0; l2 < g.q(); ++l2) t(l, l2) = cov_entry(m, g, 0, l, 0, l2);
  return {s, t / cov_entry(m, g, 0, 0, 0, 0)};
}

Eigen::Vector2d point(double x, double y) { return Eigen::Vector2d(x, y); }

}  // namespace

TEST_CASE("cov_eval at coincident points is sigma2") {
  Gneiting gn;
  gn.sigma2 = 2.5;
  gn.beta = 0.7;
  CressieHuang ch;
  ch.sigma2 = 1.7;
  ch.c0 = 6.0;
  const auto s = point(0.3, 0.8);
  CHECK(cov_eval(gn, s, 0.4, s, 0.4) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(cov_eval(ch, s, 0.4, s, 0.4) == doctest::Approx(1.7).epsilon(1e-15));
}

TEST_CASE("Gneiting defaults at unit lags") {
  Gneiting gn;
  CHECK(cov_eval(gn, point(0, 0), 0.0, point(1, 0), 1.0) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(cov_eval(gn, point(0, 0), 0.0, point(1, 0), 1.0) == doctest::Approx(0.1839397).epsilon(1e-7));
}

TEST_CASE("separable members factorize at arbitrary arguments") {
  std::mt19937_64 engine(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Gneiting gn;
  gn.sigma2 = 1.3;
  gn.a = 2.0;
  gn.c = 0.7;
  gn.alpha = 0.8;
  gn.gamma = 0.6;
  CressieHuang ch;
  ch.sigma2 = 0.9;
  ch.a0 = 1.5;
  ch.b0 = 2.0;
  for (int it = 0; it < 100; ++it) {
    const double h = std::sqrt(2.0) * u(engine), dt = u(engine);
    const double g_time = gn.sigma2 / std::pow(gn.a * std::pow(dt, 2 * gn.alpha) + 1.0, gn.tau);
    const double g_space = std::exp(-gn.c * std::pow(h, 2 * gn.gamma));
    CHECK(gn(h, dt) == doctest::Approx(g_time * g_space).epsilon(1e-14));
    const double u2 = ch.a0 * ch.a0 * dt * dt;
    const double c_time = ch.sigma2 / std::pow(u2 + 1.0, 0.5 + ch.d / 2.0);
    CHECK(ch(h, dt) == doctest::Approx(c_time * std::exp(-ch.b0 * h)).epsilon(1e-14));
  }
}

TEST_CASE("both families are stationary") {
  std::mt19937_64 engine(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Gneiting gn;
  gn.beta = 1.0;
  CressieHuang ch;
  ch.c0 = 10.0;
  for (int it = 0; it < 100; ++it) {
    const auto s = point(u(engine), u(engine));
    const auto s2 = point(u(engine), u(engine));
    const Eigen::Vector2d shift = point(u(engine), u(engine));
    const double t = u(engine), t2 = u(engine), dt = u(engine);
    for (const CovModel& m : {CovModel(gn), CovModel(ch)}) {
      const double base = cov_eval(m, s, t, s2, t2);
      CHECK(cov_eval(m, s + shift, t + dt, s2 + shift, t2 + dt) == doctest::Approx(base).epsilon(1e-12));
      CHECK(cov_eval(m, s2, t2, s, t) == doctest::Approx(base).epsilon(1e-15));
    }
  }
}

TEST_CASE("parameter validation") {
  Gneiting gn;
  gn.alpha = 0.0;
  CHECK_THROWS_AS(validate(gn), InputError);
  gn = Gneiting{};
  gn.beta = 1.0;
  gn.tau = 0.9;  // below beta * d / 2
  CHECK_THROWS_AS(validate(gn), InputError);
  gn.d = 1;
  CHECK_NOTHROW(validate(gn));
  CressieHuang ch;
  ch.c0 = 0.0;
  CHECK_THROWS_AS(validate(ch), InputError);
  CHECK_THROWS_AS(cov_matrix(ch, lattice_grid({2}, 3)), InputError);
  KroneckerProduct kp{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)};
  CHECK_THROWS_AS(cov_eval(kp, point(0, 0), 0.0, point(0, 0), 0.0), InputError);
  CHECK_THROWS_AS(cov_matrix(kp, lattice_grid({3}, 3)), InputError);
}

TEST_CASE("cov_matrix: diagonal, symmetry, Kronecker layout") {
  const auto g = lattice_grid({3, 2}, 4);
  Gneiting gn;
  gn.sigma2 = 3.0;
  gn.beta = 0.5;
  const auto c = cov_matrix(gn, g);
  CHECK(c.rows() == 24);
  CHECK((c.diagonal().array() - 3.0).abs().maxCoeff() <= 1e-15);
  CHECK(c == c.transpose());
  CHECK(c(1, 0) == doctest::Approx(cov_entry(gn, g, 0, 1, 0, 0)));  // (k=0, l=1) has index 1
  CHECK(c(4, 0) == doctest::Approx(cov_entry(gn, g, 1, 0, 0, 0)));  // (k=1, l=0) has index q

  Eigen::MatrixXd sp(2, 2), tm(3, 3);
  sp << 2.0, 0.5, 0.5, 1.0;
  tm << 1.0, 0.3, 0.1, 0.3, 1.0, 0.3, 0.1, 0.3, 1.0;
  CHECK(cov_matrix(KroneckerProduct{sp, tm}, lattice_grid({2}, 3)) == kron(sp, tm));
}

TEST_CASE("separable members give Kronecker matrices") {
  Gneiting gn;
  CressieHuang ch;
  for (const auto& g : {lattice_grid({2}, 2), lattice_grid({3, 3}, 6)}) {
    for (const CovModel& m : {CovModel(gn), CovModel(ch)}) {
      const auto [s, t] = margins(m, g);
      const auto c = cov_matrix(m, g);
      CHECK((c - kron(s, t)).norm() <= 1e-12 * c.norm());
    }
  }
}

TEST_CASE("cov_matrix is positive semidefinite") {
  const auto g = lattice_grid({3, 3}, 20);
  Gneiting gn;
  gn.beta = 1.0;
  CressieHuang ch;
  ch.c0 = 10.0;
  for (const CovModel& m : {CovModel(gn), CovModel(ch)}) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_matrix(m, g));
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("cov_matrix refuses grids above the cap") {
  const auto g = lattice_grid({3, 3}, 20);
  CHECK_THROWS_AS(cov_matrix(Gneiting{}, g, 100), SizeCapError);
  CHECK_THROWS_AS(GaussianSampler(Gneiting{}, g, 100), SizeCapError);
}

TEST_CASE("sampling: empty, deterministic, seed sensitive") {
  const auto g = lattice_grid({2, 2}, 5);
  CHECK(sample_gp(Gneiting{}, g, 0, 1).data.empty());
  const auto a = sample_gp(Gneiting{}, g, 2, 42);
  const auto b = sample_gp(Gneiting{}, g, 2, 42);
  REQUIRE(a.data.size() == 2);
  CHECK(a.data[0] == b.data[0]);
  CHECK(a.data[1] == b.data[1]);
  CHECK(a.data[0] != sample_gp(Gneiting{}, g, 2, 43).data[0]);
  // surface i depends on (seed, i) only, so a longer draw extends a shorter one
  const auto longer = GaussianSampler(Gneiting{}, g).sample(5, 42);
  CHECK(longer.data[1] == a.data[1]);
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("jitter escalation and factorization failure") {
  const auto g = lattice_grid({2}, 3);
  KroneckerProduct singular{Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(3, 3)};
  const GaussianSampler s(singular, g);
  CHECK(s.jitter() >= 0.0);
  CHECK(s.factor().allFinite());
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  try {
    GaussianSampler bad(KroneckerProduct{indefinite, Eigen::MatrixXd::Identity(3, 3)}, g);
    FAIL("expected a factorization failure");
  } catch (const DegenerateError& e) {
    CHECK(std::string(e.what()).find("kronecker") != std::string::npos);
  }
}

TEST_CASE("empirical covariance of many draws approaches the model") {
  const auto g = lattice_grid({2}, 3);
  Gneiting gn;
  const auto sigma = cov_matrix(gn, g);
  const std::size_t n = 2000;
  const auto s = sample_gp(gn, g, n, 2024);
  const auto flat = flatten(s.data, g.p(), g.q());
  const Eigen::MatrixXd emp = flat.transpose() * flat / static_cast<double>(n);
  for (Eigen::Index i = 0; i < sigma.rows(); ++i)
    for (Eigen::Index j = 0; j < sigma.cols(); ++j) {
      // Var(x_i x_j) = sigma_ii sigma_jj + sigma_ij^2 for Gaussian vectors
      const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / static_cast<double>(n));
      CHECK(std::abs(emp(i, j) - sigma(i, j)) <= 5.0 * se);
    }
}
