#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "sepcov/grid.hpp"

namespace sepcov {

/// Temporal weight kernels psi(t, t') used to collapse the time factor.
enum class KernelKind { Const, AbsDiff, Min, GaussSq, Custom };

inline std::string_view kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::Const: return "const";
    case KernelKind::AbsDiff: return "absdiff";
    case KernelKind::Min: return "min";
    case KernelKind::GaussSq: return "gauss";
    case KernelKind::Custom: return "custom";
  }
  return "custom";
}

inline std::optional<KernelKind> parse_kernel(std::string_view name) {
  if (name == "const") return KernelKind::Const;
  if (name == "absdiff") return KernelKind::AbsDiff;
  if (name == "min") return KernelKind::Min;
  if (name == "gauss") return KernelKind::GaussSq;
  return std::nullopt;
}

template <typename Scalar>
Scalar psi(KernelKind kind, Scalar t, Scalar u) {
  using std::abs;
  using std::exp;
  switch (kind) {
    case KernelKind::Const: return Scalar(1);
    case KernelKind::AbsDiff: return abs(t - u);
    case KernelKind::Min: return t < u ? t : u;
    case KernelKind::GaussSq: return exp(-std::numbers::pi_v<Scalar> * (t * t + u * u));
    case KernelKind::Custom: break;
  }
  throw InputError("custom kernel has no closed form; supply a matrix");
}

/// psi evaluated on the time grid: matrix(j, l) = psi(t_j, t_l).
template <typename Scalar>
struct DeltaKernel {
  KernelKind kind = KernelKind::Const;
  Matrix<Scalar> matrix;
};

template <typename Scalar>
DeltaKernel<Scalar> delta_matrix(KernelKind kind, const Grid<Scalar>& grid) {
  const auto& t = grid.time_points();
  const Eigen::Index q = grid.q();
  DeltaKernel<Scalar> d{kind, Matrix<Scalar>(q, q)};
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index l = 0; l < q; ++l) d.matrix(j, l) = psi(kind, t[j], t[l]);
  return d;
}

/// Wraps a pre-evaluated q x q matrix. Must be symmetric and not all zero.
template <typename Scalar>
DeltaKernel<Scalar> custom_delta(Matrix<Scalar> m, const Grid<Scalar>& grid) {
  if (m.rows() != grid.q() || m.cols() != grid.q())
    throw InputError("custom kernel must be q x q");
  if (!m.allFinite()) throw InputError("custom kernel contains non-finite entries");
  const Scalar scale = m.cwiseAbs().maxCoeff();
  if (scale == Scalar(0)) throw InputError("custom kernel is identically zero");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
    throw InputError("custom kernel must be symmetric");
  return DeltaKernel<Scalar>{KernelKind::Custom, std::move(m)};
}

}  // namespace sepcov
