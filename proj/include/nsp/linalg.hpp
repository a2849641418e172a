#pragma once

#include <cstddef>
#include <vector>

namespace nsp::linalg {

using Matrix = std::vector<std::vector<double>>;

Matrix zeros(std::size_t rows, std::size_t cols);
Matrix identity(std::size_t n);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // vectors[i] is the unit eigenvector for values[i]
  int sweeps = 0;
  bool converged = false;
};

// Cyclic Jacobi rotations; stops when the off-diagonal Frobenius norm falls
// below tol times the matrix norm.
SymmetricEigen jacobi_eigen(Matrix a, double tol = 1e-10, int max_sweeps = 100);

// Inverse of a symmetric positive definite matrix via Cholesky. Throws
// Errc::invalid_argument if the matrix is not positive definite.
Matrix invert_spd(const Matrix& a);

// Row -> column assignment maximizing the summed score of a rectangular
// matrix; rows left unassigned (more rows than columns) map to -1.
std::vector<int> max_weight_assignment(const Matrix& score);

}  // namespace nsp::linalg
