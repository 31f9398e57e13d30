#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sepcov/grid.hpp"

namespace sepcov {

struct InstanceSize {
  std::size_t n;
  Eigen::Index p;
  Eigen::Index q;
};

/// Random non-separable residual fixture: iid normals plus a seeded
/// space-time interaction term, centered. Deterministic in (size, seed).
CenteredSampleSet<double> random_fixture(const InstanceSize& size, std::uint64_t seed);

struct EquivalenceReport {
  std::size_t checks = 0;
  std::size_t failures = 0;
  double worst_rel_error = 0.0;
  bool passed() const { return failures == 0; }
};

/// Compares every fast estimator (c1_hat, t1_hat, ||C||^2, b-matrix,
/// dhat, variance_hat) against the dense oracle for each size and each of
/// the four built-in kernels. One line per comparison goes to `log`.
EquivalenceReport run_equivalence_suite(const std::vector<InstanceSize>& sizes, std::uint64_t seed,
                                        double tolerance, Eigen::Index cap, std::ostream& log);

/// Default sweep: 50 instances with N in 2..6, p in 2..4, q in 2..5.
std::vector<InstanceSize> default_instance_sizes(std::uint64_t seed, std::size_t count = 50);

double relative_error(double value, double reference);

}  // namespace sepcov
