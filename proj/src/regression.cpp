#include "mrtkit/regression.hpp"

namespace mrtkit {

Eigen::VectorXd least_squares(const DesignMatrix& design, const Eigen::VectorXd& target,
                              int step_index) {
    if (design.rows() != target.size() || design.rows() < design.cols())
        throw EstimationError(step_index);

    const Eigen::MatrixXd normal = design.transpose() * design;
    const Eigen::VectorXd rhs = design.transpose() * target;

    Eigen::LDLT<Eigen::MatrixXd> solver(normal);
    Eigen::VectorXd beta;
    bool ok = solver.info() == Eigen::Success;
    if (ok) {
        beta = solver.solve(rhs);
        ok = beta.allFinite() && (normal * beta - rhs).norm() <=
                                     1e-6 * (rhs.norm() + 1.0);
    }
    if (!ok) {
        const double ridge = 1e-8 * normal.trace() / normal.cols();
        Eigen::MatrixXd damped = normal;
        damped.diagonal().array() += ridge;
        beta = damped.ldlt().solve(rhs);
        if (!beta.allFinite()) throw EstimationError(step_index);
    }
    return beta;
}

void fill_monomials(double x, int degree, double* row) {
    row[0] = 1.0;
    for (int d = 1; d <= degree; ++d) row[d] = row[d - 1] * x;
}

int tensor_basis_size(int degree) { return (degree + 1) * (degree + 2) / 2; }

void fill_tensor_monomials(double x, double y, int degree, double* row) {
    int c = 0;
    double xp = 1.0;
    for (int i = 0; i <= degree; ++i) {
        double yp = 1.0;
        for (int j = 0; i + j <= degree; ++j) {
            row[c++] = xp * yp;
            yp *= y;
        }
        xp *= x;
    }
}

}  // namespace mrtkit
