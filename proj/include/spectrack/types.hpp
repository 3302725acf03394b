#pragma once

#include <Eigen/Dense>

namespace spectrack {

using Index = Eigen::Index;
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

} // namespace spectrack
