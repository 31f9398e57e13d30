#include "sepcov/equivalence.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "sepcov/oracle.hpp"
#include "sepcov/separability_test.hpp"

namespace sepcov {

namespace {

std::uint64_t instance_seed(std::uint64_t seed, const InstanceSize& s, std::size_t idx) {
  return derive_seed(seed, idx, (s.n << 16) ^ (static_cast<std::uint64_t>(s.p) << 8) ^ static_cast<std::uint64_t>(s.q));
}

/// Relative error of a matrix against its reference in Frobenius norm.
double matrix_rel_error(const Eigen::MatrixXd& value, const Eigen::MatrixXd& reference) {
  const double scale = reference.norm();
  const double diff = (value - reference).norm();
  return scale > 0 ? diff / scale : diff;
}

/// b_ij by explicit summation over (k, l, k', l').
Eigen::MatrixXd dense_b(const CenteredSampleSet<double>& c, const Eigen::MatrixXd& c1, const DeltaKernel<double>& d) {
  const Eigen::Index n = static_cast<Eigen::Index>(c.size());
  const double ws = c.grid.w_s(), wt = c.grid.w_t();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < c.p(); ++k)
        for (Eigen::Index l = 0; l < c.q(); ++l)
          for (Eigen::Index k2 = 0; k2 < c.p(); ++k2)
            for (Eigen::Index l2 = 0; l2 < c.q(); ++l2)
              acc += c.data[i](k, l) * c1(k, k2) * d.matrix(l, l2) * c.data[j](k2, l2);
      b(i, j) = ws * ws * wt * wt * acc;
    }
  return b;
}

}  // namespace

double relative_error(double value, double reference) {
  const double diff = std::abs(value - reference);
  const double scale = std::abs(reference);
  return scale > 0 ? diff / scale : diff;
}

CenteredSampleSet<double> random_fixture(const InstanceSize& size, std::uint64_t seed) {
  std::mt19937_64 engine(mix_seed(seed));
  std::normal_distribution<double> normal;
  const Grid<double> grid(unit_time_points<double>(size.q), unit_lattice<double>({static_cast<int>(size.p)}));
  Eigen::VectorXd u(size.p);
  Eigen::VectorXd v(size.q);
  for (auto& x : u) x = normal(engine);
  for (auto& x : v) x = normal(engine);
  std::vector<Eigen::MatrixXd> data;
  for (std::size_t i = 0; i < size.n; ++i) {
    Eigen::MatrixXd x(size.p, size.q);
    for (Eigen::Index k = 0; k < size.p; ++k)
      for (Eigen::Index l = 0; l < size.q; ++l) x(k, l) = normal(engine);
    const double a = normal(engine);
    x += a * a * u * v.transpose();
    data.push_back(std::move(x));
  }
  return center(SampleSet<double>(grid, std::move(data)));
}

std::vector<InstanceSize> default_instance_sizes(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 engine(mix_seed(seed ^ 0x5eedULL));
  std::uniform_int_distribution<int> nd(2, 6), pd(2, 4), qd(2, 5);
  std::vector<InstanceSize> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back({static_cast<std::size_t>(nd(engine)), pd(engine), qd(engine)});
  return out;
}

EquivalenceReport run_equivalence_suite(const std::vector<InstanceSize>& sizes, std::uint64_t seed,
                                        double tolerance, Eigen::Index cap, std::ostream& log) {
  for (const auto& s : sizes) {
    if (s.n < 2 || s.p < 1 || s.q < 2) throw InputError("instance sizes need N >= 2, p >= 1, q >= 2");
    if (s.p * s.q > cap)
      throw SizeCapError("instance " + std::to_string(s.n) + "," + std::to_string(s.p) + "," +
                         std::to_string(s.q) + " exceeds the oracle cap of " + std::to_string(cap) + " cells");
  }
  EquivalenceReport report;
  auto record = [&](const std::string& what, double err) {
    ++report.checks;
    const bool ok = err <= tolerance;
    if (!ok) ++report.failures;
    report.worst_rel_error = std::max(report.worst_rel_error, err);
    log << (ok ? "ok   " : "FAIL ") << what << " rel_err=" << err << '\n';
  };
  for (std::size_t idx = 0; idx < sizes.size(); ++idx) {
    const auto& s = sizes[idx];
    const auto c = random_fixture(s, instance_seed(seed, s, idx));
    const auto dc = oracle::dense_cov(c, cap);
    for (auto kind : {KernelKind::Const, KernelKind::AbsDiff, KernelKind::Min, KernelKind::GaussSq}) {
      const auto d = delta_matrix(kind, c.grid);
      const std::string tag = "instance " + std::to_string(idx) + " N=" + std::to_string(s.n) +
                              " p=" + std::to_string(s.p) + " q=" + std::to_string(s.q) + " kernel=" +
                              std::string(kernel_name(kind)) + " ";
      const Eigen::MatrixXd c1 = c1_hat(c, d);
      record(tag + "c1_hat", matrix_rel_error(c1, oracle::dense_t2(dc, d)));
      record(tag + "t1_hat", matrix_rel_error(t1_hat(c, c1), oracle::dense_t1(dc, c1)));
      record(tag + "hs_norm_sq_cov", relative_error(hs_norm_sq_cov(inner_gram(c)), oracle::dense_hs_norm_sq(dc)));
      record(tag + "dhat", relative_error(dhat(c, d), oracle::dense_D(dc, d)));
      const double dense_var = oracle::dense_variance(c, d, cap);
      // Compared in signed form: on a handful of tiny samples the quadratic
      // form is legitimately negative, and both routes must agree on that too.
      record(tag + "variance_hat", relative_error(variance_hat_signed(c, d), dense_var));
      record(tag + "b_matrix", matrix_rel_error(b_matrix(c, c1, d), dense_b(c, c1, d)));
    }
  }
  log << report.checks - report.failures << "/" << report.checks
      << " comparisons within tolerance " << tolerance << " (worst " << report.worst_rel_error << ")\n";
  return report;
}

}  // namespace sepcov
