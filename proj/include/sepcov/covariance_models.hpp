#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "sepcov/grid.hpp"

namespace sepcov {

/// Gneiting's nonseparable space-time family; separable when beta = 0.
///   c = sigma2 / psi^tau * exp(-c ||h||^(2 gamma) / psi^(beta gamma)),
///   psi = a |u|^(2 alpha) + 1.
struct Gneiting {
  double sigma2 = 1.0;
  double a = 1.0;
  double c = 1.0;
  double alpha = 0.5;
  double gamma = 1.0;
  double beta = 0.0;
  double tau = 1.0;
  int d = 2;

  void validate() const;
  double operator()(double space_dist, double time_lag) const;
};

/// Cressie-Huang family; separable when c0 = 1.
struct CressieHuang {
  double sigma2 = 1.0;
  double a0 = 2.0;
  double b0 = 1.0;
  double c0 = 1.0;
  int d = 2;

  void validate() const;
  double operator()(double space_dist, double time_lag) const;
};

/// Exactly separable covariance given by explicit factors:
/// entry ((k,l),(k',l')) = space(k,k') * time(l,l').
struct KroneckerProduct {
  Eigen::MatrixXd space;
  Eigen::MatrixXd time;

  void validate() const;
};

using CovModel = std::variant<Gneiting, CressieHuang, KroneckerProduct>;

void validate(const CovModel& m);
std::string model_name(const CovModel& m);

/// Literal evaluation at coordinates. KroneckerProduct is index-based and
/// cannot be evaluated here; use cov_entry.
double cov_eval(const CovModel& m, const Eigen::Ref<const Eigen::VectorXd>& s, double t,
                const Eigen::Ref<const Eigen::VectorXd>& s2, double t2);

/// Covariance between grid cells (k, l) and (k2, l2).
double cov_entry(const CovModel& m, const Grid<double>& g, Eigen::Index k, Eigen::Index l,
                 Eigen::Index k2, Eigen::Index l2);

inline constexpr Eigen::Index kDefaultSamplingCap = 4096;

/// (p*q) x (p*q) covariance in space-major, time-minor order (cell (k, l)
/// has index k*q + l, the same layout used by flatten and the CSV files).
Eigen::MatrixXd cov_matrix(const CovModel& m, const Grid<double>& g,
                           Eigen::Index cap = kDefaultSamplingCap);

/// Draws mean-zero Gaussian surfaces from a fixed covariance. The Cholesky
/// factor is computed once at construction; jitter eps * trace / (p*q) is
/// added with eps escalating through {0, 1e-12, 1e-10, 1e-8}.
class GaussianSampler {
 public:
  GaussianSampler(const CovModel& m, const Grid<double>& g, Eigen::Index cap = kDefaultSamplingCap);

  /// n surfaces; surface i uses its own normal stream derived from (seed, i).
  SampleSet<double> sample(std::size_t n, std::uint64_t seed) const;

  const Eigen::MatrixXd& factor() const { return lower_; }
  double jitter() const { return jitter_; }
  const Grid<double>& grid() const { return grid_; }

 private:
  Grid<double> grid_;
  Eigen::MatrixXd lower_;
  double jitter_ = 0.0;
};

SampleSet<double> sample_gp(const CovModel& m, const Grid<double>& g, std::size_t n,
                            std::uint64_t seed);

/// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

}  // namespace sepcov
