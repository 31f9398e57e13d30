#include "sepcov/covariance_models.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>

namespace sepcov {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw InputError(msg);
}

}  // namespace

void Gneiting::validate() const {
  require(sigma2 > 0, "gneiting: sigma2 must be positive");
  require(a >= 0 && c >= 0, "gneiting: a and c must be nonnegative");
  require(alpha > 0 && alpha <= 1, "gneiting: alpha must lie in (0, 1]");
  require(gamma > 0 && gamma <= 1, "gneiting: gamma must lie in (0, 1]");
  require(beta >= 0 && beta <= 1, "gneiting: beta must lie in [0, 1]");
  require(d >= 1 && d <= 3, "gneiting: spatial dimension must be 1, 2 or 3");
  require(tau >= beta * d / 2.0, "gneiting: tau must be at least beta * d / 2");
}

double Gneiting::operator()(double space_dist, double time_lag) const {
  const double psi = a * std::pow(std::abs(time_lag), 2.0 * alpha) + 1.0;
  const double spatial = c * std::pow(space_dist, 2.0 * gamma);
  return sigma2 / std::pow(psi, tau) * std::exp(-spatial / std::pow(psi, beta * gamma));
}

void CressieHuang::validate() const {
  require(sigma2 > 0, "cressie-huang: sigma2 must be positive");
  require(a0 >= 0 && b0 >= 0, "cressie-huang: a0 and b0 must be nonnegative");
  require(c0 > 0, "cressie-huang: c0 must be positive");
  require(d >= 1 && d <= 3, "cressie-huang: spatial dimension must be 1, 2 or 3");
}

double CressieHuang::operator()(double space_dist, double time_lag) const {
  const double u2 = a0 * a0 * time_lag * time_lag;
  const double half_d = d / 2.0;
  const double scale = sigma2 * std::pow(c0, half_d) /
                       (std::sqrt(u2 + 1.0) * std::pow(u2 + c0, half_d));
  return scale * std::exp(-b0 * space_dist * std::sqrt((u2 + 1.0) / (u2 + c0)));
}

void KroneckerProduct::validate() const {
  require(space.rows() == space.cols() && space.rows() > 0, "kronecker: space factor must be square");
  require(time.rows() == time.cols() && time.rows() > 0, "kronecker: time factor must be square");
  require(space.allFinite() && time.allFinite(), "kronecker: factors must be finite");
  require(space.isApprox(space.transpose(), 1e-12) || space.isZero(), "kronecker: space factor must be symmetric");
  require(time.isApprox(time.transpose(), 1e-12) || time.isZero(), "kronecker: time factor must be symmetric");
}

void validate(const CovModel& m) {
  std::visit([](const auto& model) { model.validate(); }, m);
}

std::string model_name(const CovModel& m) {
  return std::visit(overloaded{[](const Gneiting&) { return std::string("gneiting"); },
                               [](const CressieHuang&) { return std::string("cressie_huang"); },
                               [](const KroneckerProduct&) { return std::string("kronecker"); }},
                    m);
}

double cov_eval(const CovModel& m, const Eigen::Ref<const Eigen::VectorXd>& s, double t,
                const Eigen::Ref<const Eigen::VectorXd>& s2, double t2) {
  return std::visit(
      overloaded{[&](const Gneiting& g) { return g((s - s2).norm(), t - t2); },
                 [&](const CressieHuang& ch) { return ch((s - s2).norm(), t - t2); },
                 [](const KroneckerProduct&) -> double {
                   throw InputError("kronecker model is defined on grid indices, not coordinates");
                 }},
      m);
}

double cov_entry(const CovModel& m, const Grid<double>& g, Eigen::Index k, Eigen::Index l, Eigen::Index k2,
                 Eigen::Index l2) {
  if (const auto* kp = std::get_if<KroneckerProduct>(&m)) return kp->space(k, k2) * kp->time(l, l2);
  return cov_eval(m, g.space_points().col(k), g.time_points()[l], g.space_points().col(k2),
                  g.time_points()[l2]);
}

Eigen::MatrixXd cov_matrix(const CovModel& m, const Grid<double>& g, Eigen::Index cap) {
  validate(m);
  const Eigen::Index p = g.p();
  const Eigen::Index q = g.q();
  if (const auto* kp = std::get_if<KroneckerProduct>(&m)) {
    if (kp->space.rows() != p || kp->time.rows() != q)
      throw InputError("kronecker factors do not match the grid");
  }
  if (p * q > cap) {
    std::ostringstream os;
    os << "grid has " << p * q << " cells, above the sampling cap of " << cap;
    throw SizeCapError(os.str());
  }
  Eigen::MatrixXd cov(p * q, p * q);
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index l = 0; l < q; ++l)
      for (Eigen::Index k2 = 0; k2 < p; ++k2)
        for (Eigen::Index l2 = 0; l2 < q; ++l2) cov(k * q + l, k2 * q + l2) = cov_entry(m, g, k, l, k2, l2);
  return 0.5 * (cov + cov.transpose());
}

GaussianSampler::GaussianSampler(const CovModel& m, const Grid<double>& g, Eigen::Index cap) : grid_(g) {
  const Eigen::MatrixXd cov = cov_matrix(m, g, cap);
  const double base = cov.trace() / static_cast<double>(cov.rows());
  for (double eps : {0.0, 1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += eps * base;
    Eigen::LLT<Eigen::MatrixXd> llt(jittered);
    if (llt.info() == Eigen::Success) {
      lower_ = llt.matrixL();
      jitter_ = eps * base;
      return;
    }
  }
  std::ostringstream os;
  os << "cholesky factorization failed for " << model_name(m) << " on a " << g.p() << " x " << g.q()
     << " grid even with jitter 1e-8";
  throw DegenerateError(os.str());
}

SampleSet<double> GaussianSampler::sample(std::size_t n, std::uint64_t seed) const {
  const Eigen::Index p = grid_.p();
  const Eigen::Index q = grid_.q();
  std::vector<Eigen::MatrixXd> surfaces;
  surfaces.reserve(n);
  Eigen::VectorXd z(p * q);
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 engine(derive_seed(seed, i));
    std::normal_distribution<double> normal;
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = normal(engine);
    const Eigen::VectorXd x = lower_.triangularView<Eigen::Lower>() * z;
    Eigen::MatrixXd surface(p, q);
    for (Eigen::Index k = 0; k < p; ++k)
      for (Eigen::Index l = 0; l < q; ++l) surface(k, l) = x[k * q + l];
    surfaces.push_back(std::move(surface));
  }
  return SampleSet<double>(grid_, std::move(surfaces));
}

SampleSet<double> sample_gp(const CovModel& m, const Grid<double>& g, std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    validate(m);
    return SampleSet<double>(g, {});
  }
  return GaussianSampler(m, g).sample(n, seed);
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(mix_seed(a) ^ b) ^ c);
}

}  // namespace sepcov
