#ifndef ACTIVEVIEW_NUMCORE_TYPES_HPP_
#define ACTIVEVIEW_NUMCORE_TYPES_HPP_

#include <Eigen/Dense>

namespace activeview {

// Batched quantities are stored one sample per row; biases are 1 x n rows.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using Index = Eigen::Index;

}  // namespace activeview

#endif  // ACTIVEVIEW_NUMCORE_TYPES_HPP_
