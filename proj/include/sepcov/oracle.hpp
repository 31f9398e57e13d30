#pragma once

#include "sepcov/covariance_models.hpp"
#include "sepcov/delta_kernel.hpp"
#include "sepcov/grid.hpp"

namespace sepcov::oracle {

// Slow reference implementations. Every quantity is a literal weighted sum
// over the full covariance kernel; used to certify the fast contractions.

inline constexpr Eigen::Index kDefaultCellCap = 64;

/// Full kernel c(s,t,s',t') stored as a (p*q) x (p*q) matrix with cell
/// (k, l) at index k*q + l.
struct DenseCov {
  Eigen::MatrixXd tensor;
  Grid<double> grid;

  double operator()(Eigen::Index k, Eigen::Index l, Eigen::Index k2, Eigen::Index l2) const {
    const Eigen::Index q = grid.q();
    return tensor(k * q + l, k2 * q + l2);
  }
};

/// tensor[k,l,k',l'] = (1/N) sum_i Y_i(k,l) Y_i(k',l').
DenseCov dense_cov(const CenteredSampleSet<double>& c, Eigen::Index cap = kDefaultCellCap);

/// Population kernel of a covariance model on a grid.
DenseCov population_cov(const CovModel& m, const Grid<double>& g, Eigen::Index cap = kDefaultCellCap);

/// w_s^2 w_t^2 sum c^2.
double dense_hs_norm_sq(const DenseCov& dc);

/// Kernel of T2(C, psi): w_t^2 sum_{l,l'} c(k,l,k',l') psi(l,l').
Eigen::MatrixXd dense_t2(const DenseCov& dc, const DeltaKernel<double>& d);

/// Kernel of T1(C, c1): w_s^2 sum_{k,k'} c(k,l,k',l') c1(k,k').
Eigen::MatrixXd dense_t1(const DenseCov& dc, const Eigen::MatrixXd& c1);

/// <C, A (x) B>_HS.
double dense_inner_separable(const DenseCov& dc, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// ||C - A (x) B||_HS^2 summed cell by cell.
double dense_distance_sq(const DenseCov& dc, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Minimum distance with spatial factor T2(C, psi), written out in kernel form.
double dense_D(const DenseCov& dc, const DeltaKernel<double>& d);

/// <Gamma_N F, F> with F = T2(C_N, psi) (x) psi by literal summation over
/// four grid cells (eight coordinates), the fourth-moment kernel evaluated
/// on the fly.
double dense_gamma_quadform(const CenteredSampleSet<double>& c, const DeltaKernel<double>& d,
                            Eigen::Index cap = kDefaultCellCap);

/// 16 ||C||^4 / ||T2||^4 * dense_gamma_quadform.
double dense_variance(const CenteredSampleSet<double>& c, const DeltaKernel<double>& d,
                      Eigen::Index cap = kDefaultCellCap);

}  // namespace sepcov::oracle
