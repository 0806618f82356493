#pragma once

#include <Eigen/Dense>

namespace sacd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace sacd
