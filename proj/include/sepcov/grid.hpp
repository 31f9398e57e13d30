#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sepcov/errors.hpp"

namespace sepcov {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Discretized space-time domain. Spatial points are stored flattened as the
/// columns of a d x p matrix, so lattices and scattered stations look alike.
/// Quadrature is a weighted sum with one weight per axis.
template <typename Scalar>
class Grid {
 public:
  Grid() = default;

  Grid(Vector<Scalar> time_points, Matrix<Scalar> space_points, Scalar w_t, Scalar w_s)
      : time_(std::move(time_points)), space_(std::move(space_points)), w_t_(w_t), w_s_(w_s) {
    validate();
  }

  /// Plain grid average: w_t = 1/q, w_s = 1/p.
  Grid(Vector<Scalar> time_points, Matrix<Scalar> space_points)
      : time_(std::move(time_points)), space_(std::move(space_points)) {
    w_t_ = Scalar(1) / static_cast<Scalar>(time_.size());
    w_s_ = Scalar(1) / static_cast<Scalar>(space_.cols() > 0 ? space_.cols() : 1);
    validate();
  }

  Eigen::Index q() const { return time_.size(); }
  Eigen::Index p() const { return space_.cols(); }
  Eigen::Index dim() const { return space_.rows(); }
  const Vector<Scalar>& time_points() const { return time_; }
  const Matrix<Scalar>& space_points() const { return space_; }
  Scalar w_t() const { return w_t_; }
  Scalar w_s() const { return w_s_; }

  Grid with_weights(Scalar w_t, Scalar w_s) const { return Grid(time_, space_, w_t, w_s); }

 private:
  void validate() const {
    if (time_.size() < 2) throw InputError("grid needs at least 2 time points");
    if (space_.cols() < 1) throw InputError("grid needs at least 1 space point");
    if (space_.rows() < 1 || space_.rows() > 3)
      throw InputError("spatial dimension must be 1, 2 or 3");
    for (Eigen::Index l = 1; l < time_.size(); ++l)
      if (!(time_[l] > time_[l - 1])) throw InputError("time points must be strictly increasing");
    if (!(w_t_ > 0) || !(w_s_ > 0)) throw InputError("quadrature weights must be positive");
    if (!time_.allFinite() || !space_.allFinite()) throw InputError("grid coordinates must be finite");
  }

  Vector<Scalar> time_;
  Matrix<Scalar> space_;
  Scalar w_t_ = 0;
  Scalar w_s_ = 0;
};

/// q equally spaced time points on [0,1] including both endpoints.
template <typename Scalar>
Vector<Scalar> unit_time_points(Eigen::Index q) {
  if (q < 2) throw InputError("need at least 2 time points");
  return Vector<Scalar>::LinSpaced(q, Scalar(0), Scalar(1));
}

/// Regular lattice in [0,1]^d with counts[j] points along axis j. The first
/// axis varies fastest. An axis with a single point sits at 0.5.
template <typename Scalar>
Matrix<Scalar> unit_lattice(const std::vector<int>& counts) {
  if (counts.empty() || counts.size() > 3) throw InputError("lattice must have 1 to 3 axes");
  Eigen::Index total = 1;
  for (int c : counts) {
    if (c < 1) throw InputError("lattice axis count must be positive");
    total *= c;
  }
  const auto d = static_cast<Eigen::Index>(counts.size());
  Matrix<Scalar> pts(d, total);
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::Index rem = k;
    for (Eigen::Index j = 0; j < d; ++j) {
      const int c = counts[static_cast<std::size_t>(j)];
      const Eigen::Index idx = rem % c;
      rem /= c;
      pts(j, k) = c == 1 ? Scalar(0.5) : static_cast<Scalar>(idx) / static_cast<Scalar>(c - 1);
    }
  }
  return pts;
}

/// N surfaces observed on a common grid. Surface i is a p x q matrix with
/// rows indexed by space point and columns by time point.
template <typename Scalar>
struct SampleSet {
  Grid<Scalar> grid;
  std::vector<Matrix<Scalar>> data;
  /// Optional per-sample group tag; empty vector means unlabelled.
  std::vector<std::string> labels;

  SampleSet() = default;
  SampleSet(Grid<Scalar> g, std::vector<Matrix<Scalar>> d, std::vector<std::string> l = {})
      : grid(std::move(g)), data(std::move(d)), labels(std::move(l)) {
    validate();
  }

  std::size_t size() const { return data.size(); }

  void validate() const {
    if (!labels.empty() && labels.size() != data.size())
      throw InputError("label count does not match sample count");
    for (const auto& x : data) {
      if (x.rows() != grid.p() || x.cols() != grid.q())
        throw InputError("sample shape does not match grid");
      if (!x.allFinite()) throw InputError("sample contains non-finite values");
    }
  }
};

/// Residuals Y_i = X_i - mean.
template <typename Scalar>
struct CenteredSampleSet {
  Grid<Scalar> grid;
  std::vector<Matrix<Scalar>> data;
  Matrix<Scalar> mean;

  std::size_t size() const { return data.size(); }
  Eigen::Index p() const { return grid.p(); }
  Eigen::Index q() const { return grid.q(); }
};

template <typename Scalar>
CenteredSampleSet<Scalar> center(const SampleSet<Scalar>& s) {
  if (s.data.empty()) throw InputError("cannot center an empty sample set");
  CenteredSampleSet<Scalar> out;
  out.grid = s.grid;
  out.mean = Matrix<Scalar>::Zero(s.grid.p(), s.grid.q());
  for (const auto& x : s.data) out.mean += x;
  out.mean /= static_cast<Scalar>(s.data.size());
  out.data.reserve(s.data.size());
  for (const auto& x : s.data) out.data.push_back(x - out.mean);
  return out;
}

/// N x (p*q) matrix whose row i is Y_i flattened space-major, time-minor
/// (cell (k, l) lands in column k*q + l).
template <typename Scalar>
Matrix<Scalar> flatten(const std::vector<Matrix<Scalar>>& surfaces, Eigen::Index p, Eigen::Index q) {
  Matrix<Scalar> flat(static_cast<Eigen::Index>(surfaces.size()), p * q);
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < p; ++k)
      for (Eigen::Index l = 0; l < q; ++l) flat(row, k * q + l) = surfaces[i](k, l);
  }
  return flat;
}

/// Discrete inner products G_ij = w_s * w_t * sum_{k,l} Y_i(k,l) Y_j(k,l).
template <typename Scalar>
Matrix<Scalar> inner_gram(const CenteredSampleSet<Scalar>& c) {
  const Matrix<Scalar> flat = flatten(c.data, c.p(), c.q());
  Matrix<Scalar> g = c.grid.w_s() * c.grid.w_t() * (flat * flat.transpose());
  return Scalar(0.5) * (g + g.transpose());
}

}  // namespace sepcov
