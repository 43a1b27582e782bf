// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

namespace lhnn {

/// Dense row-major fp64 matrix used for features, activations and weights.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace lhnn
