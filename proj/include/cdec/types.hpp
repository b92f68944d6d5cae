#pragma once

#include <Eigen/Dense>

namespace cdec {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace cdec
