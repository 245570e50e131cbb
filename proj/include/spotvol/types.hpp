#pragma once

#include <Eigen/Dense>

namespace spotvol {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace spotvol
