#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace discforge {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Sorted list of column indices.
using IndexSet = std::vector<int>;

}  // namespace discforge
