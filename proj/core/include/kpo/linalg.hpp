#pragma once

#include <Eigen/Dense>

namespace kpo {

/// Matrix exponential (scaling and squaring, Pade order chosen from the 1-norm).
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& m);

/// max |M - M^dagger| entrywise.
double hermiticity_error(const Eigen::MatrixXcd& m);

/// (M + M^dagger) / 2
Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for PSD inputs.
double state_fidelity(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma);

/// Principal square root of a Hermitian PSD matrix; negative eigenvalues are clipped.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m);

}  // namespace kpo
