#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sepcov/grid.hpp"

namespace sepcov::testing {

inline Grid<double> small_grid(Eigen::Index p, Eigen::Index q) {
  return Grid<double>(unit_time_points<double>(q), unit_lattice<double>({static_cast<int>(p)}));
}

inline std::vector<Eigen::MatrixXd> random_surfaces(std::size_t n, Eigen::Index p, Eigen::Index q,
                                                    std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::MatrixXd x(p, q);
    for (Eigen::Index k = 0; k < p; ++k)
      for (Eigen::Index l = 0; l < q; ++l) x(k, l) = normal(engine);
    out.push_back(x);
  }
  return out;
}

inline SampleSet<double> random_samples(std::size_t n, Eigen::Index p, Eigen::Index q, std::uint64_t seed) {
  return SampleSet<double>(small_grid(p, q), random_surfaces(n, p, q, seed));
}

/// X_i = a_i f g^T: an exactly separable sample.
inline SampleSet<double> separable_samples(std::size_t n, Eigen::Index p, Eigen::Index q, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd f(p), g(q);
  for (auto& x : f) x = normal(engine);
  for (auto& x : g) x = 1.0 + 0.5 * normal(engine);
  std::vector<Eigen::MatrixXd> data;
  for (std::size_t i = 0; i < n; ++i) data.push_back(normal(engine) * f * g.transpose());
  return SampleSet<double>(small_grid(p, q), std::move(data));
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0 ? std::abs(a - b) / scale : 0.0;
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale > 0 ? (a - b).norm() / scale : 0.0;
}

}  // namespace sepcov::testing
