#pragma once

#include <Eigen/Core>

#include <functional>

namespace mixop {

/// Spatial points live in d <= 3 dimensions. The fixed max size keeps them
/// off the heap inside the path-simulation hot loop.
template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

template <typename Scalar>
using CovarianceT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

using Point = PointT<double>;
using Covariance = CovarianceT<double>;

using PointRef = Eigen::Ref<const Point>;

/// Scalar field over R^d, used for running costs f and exterior data g.
using Field = std::function<double(const Point&)>;

constexpr int kMaxDimension = 3;

inline Field constant_field(double value) {
  return [value](const Point&) { return value; };
}

}  // namespace mixop
