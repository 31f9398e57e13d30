#pragma once

#include <string>
#include <utility>

#include "sepcov/delta_kernel.hpp"
#include "sepcov/grid.hpp"

namespace sepcov {

// Discrete realizations of the partial projections and Hilbert-Schmidt
// norms. Nothing here forms the (p*q) x (p*q) covariance: every quantity is
// a contraction of the N residual surfaces against a small matrix.

template <typename Scalar>
struct CovEstimates {
  Matrix<Scalar> gram;  // N x N
  Matrix<Scalar> c1;    // p x p spatial margin
  Matrix<Scalar> t1k;   // q x q temporal projection
  Matrix<Scalar> b;     // N x N contractions against c1 (x) psi
};

namespace detail {
template <typename Scalar>
Matrix<Scalar> symmetrized(const Matrix<Scalar>& m) {
  return Scalar(0.5) * (m + m.transpose());
}
}  // namespace detail

/// Squared HS norm of the empirical covariance: (1/N^2) sum_ij G_ij^2.
template <typename Derived>
typename Derived::Scalar hs_norm_sq_cov(const Eigen::MatrixBase<Derived>& gram) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<Scalar>(gram.rows());
  if (gram.rows() == 0) return Scalar(0);
  return gram.squaredNorm() / (n * n);
}

/// w^2 * sum_ij M_ij^2 : the discrete double integral of M^2 with weight w per axis.
template <typename Derived>
typename Derived::Scalar hs_norm_sq_mat(const Eigen::MatrixBase<Derived>& m,
                                        typename Derived::Scalar w) {
  return w * w * m.squaredNorm();
}

/// Spatial margin (1/N) sum_i Y_i (w_t^2 Psi) Y_i^T.
template <typename Scalar>
Matrix<Scalar> c1_hat(const CenteredSampleSet<Scalar>& c, const DeltaKernel<Scalar>& d) {
  if (c.size() < 2) throw DegenerateError("spatial margin needs at least 2 samples");
  if (d.matrix.rows() != c.q() || d.matrix.cols() != c.q())
    throw InputError("kernel matrix does not match the time grid");
  const Scalar wt = c.grid.w_t();
  const Matrix<Scalar> psi_w = (wt * wt) * d.matrix;
  Matrix<Scalar> acc = Matrix<Scalar>::Zero(c.p(), c.p());
  for (const auto& y : c.data) acc.noalias() += y * psi_w * y.transpose();
  acc /= static_cast<Scalar>(c.size());
  return detail::symmetrized(acc);
}

/// Temporal projection (1/N) sum_i Y_i^T (w_s^2 c1) Y_i.
template <typename Scalar>
Matrix<Scalar> t1_hat(const CenteredSampleSet<Scalar>& c, const Matrix<Scalar>& c1) {
  if (c1.rows() != c.p() || c1.cols() != c.p())
    throw InputError("spatial factor does not match the space grid");
  if (c.size() == 0) throw DegenerateError("temporal projection of an empty sample");
  const Scalar ws = c.grid.w_s();
  const Matrix<Scalar> c1_w = (ws * ws) * c1;
  Matrix<Scalar> acc = Matrix<Scalar>::Zero(c.q(), c.q());
  for (const auto& y : c.data) acc.noalias() += y.transpose() * c1_w * y;
  acc /= static_cast<Scalar>(c.size());
  return detail::symmetrized(acc);
}

/// b_ij = trace(Y_i^T (w_s^2 c1) Y_j (w_t^2 Psi)), i.e. the discrete
/// <Y_i (x) Y_j, c1 (x) psi>. Enters the variance only through sums of b.
template <typename Scalar>
Matrix<Scalar> b_matrix(const CenteredSampleSet<Scalar>& c, const Matrix<Scalar>& c1,
                        const DeltaKernel<Scalar>& d) {
  if (c1.rows() != c.p() || c1.cols() != c.p())
    throw InputError("spatial factor does not match the space grid");
  if (d.matrix.rows() != c.q() || d.matrix.cols() != c.q())
    throw InputError("kernel matrix does not match the time grid");
  const Scalar ws = c.grid.w_s();
  const Scalar wt = c.grid.w_t();
  const Matrix<Scalar> c1_w = (ws * ws) * c1;
  const Matrix<Scalar> psi_w = (wt * wt) * d.matrix;
  std::vector<Matrix<Scalar>> z;
  z.reserve(c.size());
  for (const auto& y : c.data) z.push_back(c1_w * y * psi_w);
  const Matrix<Scalar> yf = flatten(c.data, c.p(), c.q());
  const Matrix<Scalar> zf = flatten(z, c.p(), c.q());
  return detail::symmetrized(Matrix<Scalar>(yf * zf.transpose()));
}

/// Relative floor on ||c1||^2 below which the margin is treated as zero.
/// Compared against ||C||^2 * ||Psi||^2, the Cauchy-Schwarz bound for ||c1||^2.
inline constexpr double kDegenerateMarginTol = 1e-12;

template <typename Scalar>
void check_margin(Scalar c1_norm_sq, Scalar cov_norm_sq, const DeltaKernel<Scalar>& d, Scalar wt) {
  const Scalar bound = cov_norm_sq * hs_norm_sq_mat(d.matrix, wt);
  if (!(cov_norm_sq > Scalar(0)))
    throw DegenerateError("empirical covariance is zero (all residuals vanish)");
  if (!(c1_norm_sq > Scalar(kDegenerateMarginTol) * bound))
    throw DegenerateError("spatial margin T2(C, psi) vanishes for kernel '" +
                          std::string(kernel_name(d.kind)) + "'; try a different psi");
}

template <typename Scalar>
CovEstimates<Scalar> cov_estimates(const CenteredSampleSet<Scalar>& c, const DeltaKernel<Scalar>& d) {
  CovEstimates<Scalar> e;
  e.gram = inner_gram(c);
  e.c1 = c1_hat(c, d);
  e.t1k = t1_hat(c, e.c1);
  e.b = b_matrix(c, e.c1, d);
  return e;
}

/// Best separable approximation with spatial factor c1: returns
/// (c1, K / ||c1||^2) where K = t1_hat(c, c1).
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> separable_approx(const CenteredSampleSet<Scalar>& c,
                                                           const DeltaKernel<Scalar>& d) {
  Matrix<Scalar> c1 = c1_hat(c, d);
  const Scalar c1_sq = hs_norm_sq_mat(c1, c.grid.w_s());
  check_margin(c1_sq, hs_norm_sq_cov(inner_gram(c)), d, c.grid.w_t());
  Matrix<Scalar> c2 = t1_hat(c, c1) / c1_sq;
  return {std::move(c1), std::move(c2)};
}

}  // namespace sepcov
