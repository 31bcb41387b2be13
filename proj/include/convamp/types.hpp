#pragma once

#include <complex>
#include <Eigen/Dense>

namespace convamp {

using Real = double;
using Complex = std::complex<Real>;

using Mat = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using RowVecC = Eigen::RowVectorXcd;

inline constexpr Complex I{0.0, 1.0};

} // namespace convamp
