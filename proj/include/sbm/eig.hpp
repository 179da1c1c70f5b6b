#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace sbm {

// Full decomposition of a symmetric matrix, eigenvalues ascending.
// Backed by Eigen's self-adjoint solver (Householder tridiagonalization
// followed by implicit QL/QR): dense, single-threaded, and bitwise
// reproducible for identical inputs.
struct SymmetricEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // column j pairs with values(j)
};

inline SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("symmetric_eigen: matrix not square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("symmetric_eigen: decomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

// Singular values of a symmetric matrix: |eigenvalues|, descending.
inline std::vector<double> symmetric_singular_values(const Eigen::MatrixXd& m) {
    const SymmetricEigen es = symmetric_eigen(m);
    std::vector<double> s(static_cast<size_t>(es.values.size()));
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
        s[static_cast<size_t>(i)] = std::abs(es.values(i));
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
}

}  // namespace sbm
