#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace pcdg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

} // namespace pcdg
