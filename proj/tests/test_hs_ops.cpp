#include <doctest.h>

#include "fixtures.hpp"
#include "sepcov/hs_ops.hpp"
#include "sepcov/oracle.hpp"
#include "sepcov/separability_test.hpp"

using namespace sepcov;
using sepcov::testing::random_samples;
using sepcov::testing::rel_diff;
using sepcov::testing::small_grid;

namespace {

constexpr KernelKind kBuiltin[] = {KernelKind::Const, KernelKind::AbsDiff, KernelKind::Min, KernelKind::GaussSq};

CenteredSampleSet<double> rank_one_residuals(const Eigen::VectorXd& a, const Eigen::VectorXd& f,
                                             const Eigen::VectorXd& g) {
  const Grid<double> grid = small_grid(f.size(), g.size());
  CenteredSampleSet<double> c{grid, {}, Eigen::MatrixXd::Zero(f.size(), g.size())};
  for (double ai : a) c.data.push_back(ai * f * g.transpose());
  return c;
}

}  // namespace

TEST_CASE("delta_matrix evaluates the four kernels") {
  Eigen::VectorXd t(4);
  t << 0.0, 0.25, 0.75, 1.0;
  const Grid<double> g(t, unit_lattice<double>({1}));
  CHECK(delta_matrix(KernelKind::Const, g).matrix.isOnes());
  CHECK(delta_matrix(KernelKind::AbsDiff, g).matrix(1, 2) == 0.5);
  CHECK(delta_matrix(KernelKind::Min, g).matrix(1, 2) == 0.25);
  CHECK(delta_matrix(KernelKind::Min, g).matrix(2, 1) == 0.25);
  CHECK(delta_matrix(KernelKind::GaussSq, g).matrix(0, 0) == 1.0);
  CHECK(delta_matrix(KernelKind::GaussSq, g).matrix(1, 3) ==
        doctest::Approx(std::exp(-std::numbers::pi * (0.0625 + 1.0))));
  for (auto k : kBuiltin) {
    const auto m = delta_matrix(k, g).matrix;
    CHECK(m == m.transpose());
  }
}

TEST_CASE("custom kernels must be symmetric and nonzero") {
  const auto g = small_grid(2, 3);
  Eigen::MatrixXd m(3, 3);
  m << 1, 2, 0, 2, 1, 0, 0, 0, 1;
  CHECK(custom_delta(m, g).kind == KernelKind::Custom);
  Eigen::MatrixXd asym = m;
  asym(0, 2) = 1.0;
  CHECK_THROWS_AS(custom_delta(asym, g), InputError);
  CHECK_THROWS_AS(custom_delta(Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 3)), g), InputError);
  CHECK_THROWS_AS(custom_delta(Eigen::MatrixXd(Eigen::MatrixXd::Ones(2, 2)), g), InputError);
  CHECK(parse_kernel("gauss") == KernelKind::GaussSq);
  CHECK_FALSE(parse_kernel("nope").has_value());
}

TEST_CASE("hs_norm_sq_mat on small matrices") {
  CHECK(hs_norm_sq_mat(Eigen::MatrixXd::Zero(3, 3), 1.0) == 0.0);
  CHECK(hs_norm_sq_mat(Eigen::MatrixXd::Identity(2, 2), 1.0) == 2.0);
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 1;
  CHECK(hs_norm_sq_mat(m, 0.5) == 2.5);
}

TEST_CASE("hs_norm_sq_cov: trivial cases and dense oracle") {
  CHECK(hs_norm_sq_cov(Eigen::MatrixXd::Zero(4, 4)) == 0.0);
  Eigen::MatrixXd one(1, 1);
  one << 3.0;
  CHECK(hs_norm_sq_cov(one) == 9.0);
  const auto c = center(random_samples(5, 3, 4, 7));
  CHECK(rel_diff(hs_norm_sq_cov(inner_gram(c)), oracle::dense_hs_norm_sq(oracle::dense_cov(c))) <= 1e-12);
}

TEST_CASE("c1_hat: zero residuals, too few samples, rank-one factorization") {
  const auto g = small_grid(3, 4);
  const auto d = delta_matrix(KernelKind::AbsDiff, g);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 4);
  CHECK(c1_hat(CenteredSampleSet<double>{g, {zero, zero}, zero}, d).isZero());
  CHECK_THROWS_AS(c1_hat(CenteredSampleSet<double>{g, {zero}, zero}, d), DegenerateError);

  Eigen::VectorXd a(3), f(3), gv(4);
  a << 1.0, -2.0, 0.5;
  f << 1.0, 0.3, -0.7;
  gv << 0.2, 1.0, 0.4, -0.6;
  const auto c = rank_one_residuals(a, f, gv);
  for (auto kind : kBuiltin) {
    const auto dk = delta_matrix(kind, c.grid);
    const double wt = c.grid.w_t();
    const double m2 = a.squaredNorm() / 3.0;
    const Eigen::MatrixXd expected = m2 * (gv.transpose() * (wt * wt * dk.matrix) * gv).value() * f * f.transpose();
    CHECK(rel_diff(c1_hat(c, dk), expected) <= 1e-13);
  }
}

TEST_CASE("c1_hat and t1_hat agree with the dense quadrature oracle") {
  const auto c = center(random_samples(4, 3, 4, 11));
  const auto dc = oracle::dense_cov(c);
  for (auto kind : kBuiltin) {
    const auto d = delta_matrix(kind, c.grid);
    const auto c1 = c1_hat(c, d);
    CHECK(rel_diff(c1, oracle::dense_t2(dc, d)) <= 1e-12);
    CHECK(rel_diff(t1_hat(c, c1), oracle::dense_t1(dc, c1)) <= 1e-12);
  }
}

TEST_CASE("t1_hat: zero margin, rank-one factorization, dimension mismatch") {
  Eigen::VectorXd a(4), f(2), gv(3);
  a << 0.5, 1.5, -1.0, 2.0;
  f << 0.8, -1.1;
  gv << 1.0, 0.5, 0.25;
  const auto c = rank_one_residuals(a, f, gv);
  CHECK(t1_hat(c, Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 2))).isZero());
  const double ws = c.grid.w_s();
  const double m2 = a.squaredNorm() / 4.0;
  const Eigen::MatrixXd expected = m2 * ws * ws * std::pow(f.squaredNorm(), 2) * gv * gv.transpose();
  CHECK(rel_diff(t1_hat(c, Eigen::MatrixXd(f * f.transpose())), expected) <= 1e-13);
  CHECK_THROWS_AS(t1_hat(c, Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 3))), InputError);
}

TEST_CASE("b_matrix: trivial cases and quadruple-loop oracle") {
  const auto c = center(random_samples(5, 3, 4, 3));
  const auto d = delta_matrix(KernelKind::Min, c.grid);
  CHECK(b_matrix(c, Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 3)), d).isZero());
  CHECK_THROWS_AS(b_matrix(c, Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 2)), d), InputError);

  const auto c1 = c1_hat(c, d);
  const auto b = b_matrix(c, c1, d);
  CHECK(b == b.transpose());
  const double ws = c.grid.w_s(), wt = c.grid.w_t();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < 3; ++k)
        for (Eigen::Index l = 0; l < 4; ++l)
          for (Eigen::Index k2 = 0; k2 < 3; ++k2)
            for (Eigen::Index l2 = 0; l2 < 4; ++l2)
              acc += c.data[i](k, l) * ws * ws * c1(k, k2) * c.data[j](k2, l2) * wt * wt * d.matrix(l2, l);
      CHECK(b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == doctest::Approx(acc).epsilon(1e-12));
    }

  CenteredSampleSet<double> single{c.grid, {c.data[0]}, c.mean};
  const auto b1 = b_matrix(single, c1, d);
  REQUIRE(b1.rows() == 1);
  const double trace =
      (c.data[0].transpose() * (ws * ws * c1) * c.data[0] * (wt * wt * d.matrix)).trace();
  CHECK(b1(0, 0) == doctest::Approx(trace).epsilon(1e-13));
}

TEST_CASE("separable_approx reconstructs exactly separable covariances") {
  Eigen::VectorXd a(5), f(3), gv(4);
  a << 1.0, -0.5, 2.0, 0.1, -1.6;
  f << 1.0, 2.0, -0.5;
  gv << 0.3, 1.0, 0.8, 0.2;
  const auto c = rank_one_residuals(a, f, gv);
  const auto dc = oracle::dense_cov(c);
  for (auto kind : kBuiltin) {
    const auto d = delta_matrix(kind, c.grid);
    const auto [c1, c2] = separable_approx(c, d);
    CHECK(oracle::dense_distance_sq(dc, c1, c2) <= 1e-20 * oracle::dense_hs_norm_sq(dc));
    for (Eigen::Index i = 0; i < dc.tensor.rows(); ++i)
      for (Eigen::Index j = 0; j < dc.tensor.cols(); ++j) {
        const double recon = c1(i / 4, j / 4) * c2(i % 4, j % 4);
        CHECK(std::abs(recon - dc.tensor(i, j)) <= 1e-10 * dc.tensor.cwiseAbs().maxCoeff());
      }
  }
}

TEST_CASE("separable_approx: scaling and reconstruction error equals the distance") {
  const auto s = random_samples(6, 3, 4, 21);
  const auto c = center(s);
  CenteredSampleSet<double> scaled = c;
  for (auto& y : scaled.data) y *= 3.0;
  const auto dc = oracle::dense_cov(c);
  for (auto kind : kBuiltin) {
    const auto d = delta_matrix(kind, c.grid);
    const auto [c1, c2] = separable_approx(c, d);
    const auto [c1s, c2s] = separable_approx(scaled, d);
    CHECK(rel_diff(c1s, 9.0 * c1) <= 1e-13);
    CHECK(rel_diff(c2s, c2) <= 1e-13);
    CHECK(rel_diff(oracle::dense_distance_sq(dc, c1, c2), oracle::dense_D(dc, d)) <= 1e-10);
    CHECK(rel_diff(oracle::dense_distance_sq(dc, c1, c2), dhat(c, d)) <= 1e-10);
  }
}

TEST_CASE("separable_approx rejects a vanishing margin") {
  Eigen::VectorXd a(3), f(2), gv(3), h(3);
  a << 1.0, -1.0, 0.5;
  f << 1.0, 1.0;
  gv << 1.0, -1.0, 0.0;
  h << 1.0, 1.0, 3.0;  // h . g = 0, so g^T (h h^T) g = 0
  const auto c = rank_one_residuals(a, f, gv);
  const auto d = custom_delta(Eigen::MatrixXd(h * h.transpose()), c.grid);
  CHECK_THROWS_AS(separable_approx(c, d), DegenerateError);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(separable_approx(CenteredSampleSet<double>{c.grid, {zero, zero}, zero},
                                   delta_matrix(KernelKind::Const, c.grid)),
                  DegenerateError);
}

TEST_CASE("properties on random fixtures") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 2 + seed % 5;
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(seed % 3);
    const Eigen::Index q = 2 + static_cast<Eigen::Index>(seed % 4);
    const auto c = center(random_samples(n, p, q, 500 + seed));
    const auto dc = oracle::dense_cov(c);
    const double ws = c.grid.w_s(), wt = c.grid.w_t();
    const double cov_sq = hs_norm_sq_cov(inner_gram(c));
    for (auto kind : kBuiltin) {
      const auto d = delta_matrix(kind, c.grid);
      const auto c1 = c1_hat(c, d);
      const auto k = t1_hat(c, c1);
      const auto b = b_matrix(c, c1, d);
      CHECK(c1 == c1.transpose());
      CHECK(k == k.transpose());
      CHECK(b == b.transpose());
      // Cauchy-Schwarz bound on T1
      CHECK(hs_norm_sq_mat(k, wt) <= cov_sq * hs_norm_sq_mat(c1, ws) * (1.0 + 1e-12));
      // <C, c1 (x) T1(C, c1)> = ||T1(C, c1)||^2
      CHECK(rel_diff(oracle::dense_inner_separable(dc, c1, k), hs_norm_sq_mat(k, wt)) <= 1e-10);
    }
    // additivity in psi
    const auto d_sum = custom_delta(Eigen::MatrixXd(delta_matrix(KernelKind::AbsDiff, c.grid).matrix +
                                                    delta_matrix(KernelKind::Min, c.grid).matrix),
                                    c.grid);
    CHECK(rel_diff(c1_hat(c, d_sum), Eigen::MatrixXd(c1_hat(c, delta_matrix(KernelKind::AbsDiff, c.grid)) +
                                                     c1_hat(c, delta_matrix(KernelKind::Min, c.grid)))) <=
          1e-12);
  }
}

TEST_CASE("c1_hat is linear in the empirical covariance (sample concatenation)") {
  auto c = center(random_samples(4, 3, 4, 91));
  auto other = center(random_samples(3, 3, 4, 92));
  CenteredSampleSet<double> joined = c;
  for (const auto& y : other.data) joined.data.push_back(y);
  const auto d = delta_matrix(KernelKind::GaussSq, c.grid);
  const Eigen::MatrixXd weighted = (4.0 * c1_hat(c, d) + 3.0 * c1_hat(other, d)) / 7.0;
  CHECK(rel_diff(c1_hat(joined, d), weighted) <= 1e-12);
  // same identity through the dense route
  const auto dj = oracle::dense_cov(joined);
  CHECK(rel_diff(oracle::dense_t2(dj, d), weighted) <= 1e-12);
}
