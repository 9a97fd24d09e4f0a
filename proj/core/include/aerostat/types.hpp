#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace aerostat {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using VecX = Eigen::VectorXd;

/// Invalid or inconsistent user input (bad config field, mode mismatch, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Geometry construction failure (degenerate facet, infeasible lobe, tube fold).
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runtime numerical failure (tension underflow, non-finite energy, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shooting method did not converge; message carries the residual vector.
struct ShootingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic pairwise summation. Result depends only on element order,
/// so assembled quantities are bit-reproducible for a fixed facet order.
double pairwise_sum(const std::vector<double>& v);

constexpr double kPi = 3.14159265358979323846;

}  // namespace aerostat
