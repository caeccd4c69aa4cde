#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mrtkit {

// row-major so a row of basis values can be filled through a raw pointer
using DesignMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EstimationError : std::runtime_error {
    explicit EstimationError(int step_index)
        : std::runtime_error("regression design is rank-deficient at step " +
                             std::to_string(step_index)),
          step(step_index) {}
    int step;
};

// OLS through the normal equations; on a numerically singular design a
// ridge penalty of 1e-8 * trace/dim is added once. Throws EstimationError
// if the system is still unusable.
Eigen::VectorXd least_squares(const DesignMatrix& design, const Eigen::VectorXd& target,
                              int step_index);

// monomial columns {1, x, ..., x^degree}
void fill_monomials(double x, int degree, double* row);

// tensor monomials in (x, y) with total degree <= degree, graded order
int tensor_basis_size(int degree);
void fill_tensor_monomials(double x, double y, int degree, double* row);

}  // namespace mrtkit
