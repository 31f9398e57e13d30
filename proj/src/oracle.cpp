#include "sepcov/oracle.hpp"

#include <sstream>

namespace sepcov::oracle {

namespace {

void check_cap(Eigen::Index p, Eigen::Index q, Eigen::Index cap) {
  if (p * q > cap) {
    std::ostringstream os;
    os << "dense oracle refuses p*q = " << p * q << " (cap " << cap << ")";
    throw SizeCapError(os.str());
  }
}

}  // namespace

DenseCov dense_cov(const CenteredSampleSet<double>& c, Eigen::Index cap) {
  const Eigen::Index p = c.p();
  const Eigen::Index q = c.q();
  check_cap(p, q, cap);
  if (c.size() == 0) throw InputError("dense covariance of an empty sample");
  DenseCov dc{Eigen::MatrixXd::Zero(p * q, p * q), c.grid};
  const double inv_n = 1.0 / static_cast<double>(c.size());
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index l = 0; l < q; ++l)
      for (Eigen::Index k2 = 0; k2 < p; ++k2)
        for (Eigen::Index l2 = 0; l2 < q; ++l2) {
          double acc = 0.0;
          for (const auto& y : c.data) acc += y(k, l) * y(k2, l2);
          dc.tensor(k * q + l, k2 * q + l2) = inv_n * acc;
        }
  return dc;
}

DenseCov population_cov(const CovModel& m, const Grid<double>& g, Eigen::Index cap) {
  check_cap(g.p(), g.q(), cap);
  return DenseCov{cov_matrix(m, g, cap), g};
}

double dense_hs_norm_sq(const DenseCov& dc) {
  const double ws = dc.grid.w_s();
  const double wt = dc.grid.w_t();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < dc.tensor.rows(); ++i)
    for (Eigen::Index j = 0; j < dc.tensor.cols(); ++j) acc += dc.tensor(i, j) * dc.tensor(i, j);
  return ws * ws * wt * wt * acc;
}

Eigen::MatrixXd dense_t2(const DenseCov& dc, const DeltaKernel<double>& d) {
  const Eigen::Index p = dc.grid.p();
  const Eigen::Index q = dc.grid.q();
  const double wt = dc.grid.w_t();
  Eigen::MatrixXd out(p, p);
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index k2 = 0; k2 < p; ++k2) {
      double acc = 0.0;
      for (Eigen::Index l = 0; l < q; ++l)
        for (Eigen::Index l2 = 0; l2 < q; ++l2) acc += dc(k, l, k2, l2) * d.matrix(l, l2);
      out(k, k2) = wt * wt * acc;
    }
  return out;
}

Eigen::MatrixXd dense_t1(const DenseCov& dc, const Eigen::MatrixXd& c1) {
  const Eigen::Index p = dc.grid.p();
  const Eigen::Index q = dc.grid.q();
  if (c1.rows() != p || c1.cols() != p) throw InputError("spatial factor does not match the grid");
  const double ws = dc.grid.w_s();
  Eigen::MatrixXd out(q, q);
  for (Eigen::Index l = 0; l < q; ++l)
    for (Eigen::Index l2 = 0; l2 < q; ++l2) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < p; ++k)
        for (Eigen::Index k2 = 0; k2 < p; ++k2) acc += dc(k, l, k2, l2) * c1(k, k2);
      out(l, l2) = ws * ws * acc;
    }
  return out;
}

double dense_inner_separable(const DenseCov& dc, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index p = dc.grid.p();
  const Eigen::Index q = dc.grid.q();
  const double ws = dc.grid.w_s();
  const double wt = dc.grid.w_t();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index l = 0; l < q; ++l)
      for (Eigen::Index k2 = 0; k2 < p; ++k2)
        for (Eigen::Index l2 = 0; l2 < q; ++l2) acc += dc(k, l, k2, l2) * a(k, k2) * b(l, l2);
  return ws * ws * wt * wt * acc;
}

double dense_distance_sq(const DenseCov& dc, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index p = dc.grid.p();
  const Eigen::Index q = dc.grid.q();
  const double ws = dc.grid.w_s();
  const double wt = dc.grid.w_t();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index l = 0; l < q; ++l)
      for (Eigen::Index k2 = 0; k2 < p; ++k2)
        for (Eigen::Index l2 = 0; l2 < q; ++l2) {
          const double r = dc(k, l, k2, l2) - a(k, k2) * b(l, l2);
          acc += r * r;
        }
  return ws * ws * wt * wt * acc;
}

double dense_D(const DenseCov& dc, const DeltaKernel<double>& d) {
  const Eigen::Index p = dc.grid.p();
  const Eigen::Index q = dc.grid.q();
  const double ws = dc.grid.w_s();
  const double wt = dc.grid.w_t();
  const Eigen::MatrixXd c1 = dense_t2(dc, d);

  double denom = 0.0;
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index k2 = 0; k2 < p; ++k2) denom += c1(k, k2) * c1(k, k2);
  denom *= ws * ws;
  if (!(denom > 0.0)) throw DegenerateError("dense oracle: spatial margin has zero norm");

  double numer = 0.0;
  for (Eigen::Index l = 0; l < q; ++l)
    for (Eigen::Index l2 = 0; l2 < q; ++l2) {
      double inner = 0.0;
      for (Eigen::Index k = 0; k < p; ++k)
        for (Eigen::Index k2 = 0; k2 < p; ++k2) inner += dc(k, l, k2, l2) * c1(k, k2);
      inner *= ws * ws;
      numer += inner * inner;
    }
  numer *= wt * wt;
  return dense_hs_norm_sq(dc) - numer / denom;
}

double dense_gamma_quadform(const CenteredSampleSet<double>& c, const DeltaKernel<double>& d,
                            Eigen::Index cap) {
  const Eigen::Index p = c.p();
  const Eigen::Index q = c.q();
  const Eigen::Index cells = p * q;
  check_cap(p, q, cap);
  const DenseCov dc = dense_cov(c, cap);
  const Eigen::MatrixXd c1 = dense_t2(dc, d);
  const double n = static_cast<double>(c.size());
  const double w = c.grid.w_s() * c.grid.w_t();

  auto f = [&](Eigen::Index x, Eigen::Index y) {
    return c1(x / q, y / q) * d.matrix(x % q, y % q);
  };
  auto y_at = [&](std::size_t i, Eigen::Index x) { return c.data[i](x / q, x % q); };
  const Eigen::MatrixXd& cov = dc.tensor;

  double total = 0.0;
  for (Eigen::Index x1 = 0; x1 < cells; ++x1)
    for (Eigen::Index x2 = 0; x2 < cells; ++x2) {
      const double f12 = f(x1, x2);
      double partial = 0.0;
      for (Eigen::Index x3 = 0; x3 < cells; ++x3)
        for (Eigen::Index x4 = 0; x4 < cells; ++x4) {
          double fourth = 0.0;
          for (std::size_t i = 0; i < c.size(); ++i)
            fourth += y_at(i, x1) * y_at(i, x2) * y_at(i, x3) * y_at(i, x4);
          fourth /= n;
          const double gamma = fourth + cov(x1, x3) * cov(x2, x4) + cov(x1, x4) * cov(x2, x3) -
                               2.0 * cov(x1, x2) * cov(x3, x4);
          partial += gamma * f(x3, x4);
        }
      total += partial * f12;
    }
  return w * w * w * w * total;
}

double dense_variance(const CenteredSampleSet<double>& c, const DeltaKernel<double>& d, Eigen::Index cap) {
  const DenseCov dc = dense_cov(c, cap);
  const Eigen::MatrixXd c1 = dense_t2(dc, d);
  const double ws = c.grid.w_s();
  const double cov_sq = dense_hs_norm_sq(dc);
  const double c1_sq = ws * ws * c1.squaredNorm();
  const double ratio = cov_sq / c1_sq;
  return 16.0 * ratio * ratio * dense_gamma_quadform(c, d, cap);
}

}  // namespace sepcov::oracle
