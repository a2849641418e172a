#include "nsp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nsp/core.hpp"

namespace nsp::linalg {

Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, std::vector<double>(cols, 0.0)); }

Matrix identity(std::size_t n) {
  auto m = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

SymmetricEigen jacobi_eigen(Matrix a, double tol, int max_sweeps) {
  const std::size_t n = a.size();
  auto v = identity(n);
  double norm = 0.0;
  for (const auto& row : a)
    for (double x : row) norm += x * x;
  norm = std::sqrt(norm);

  SymmetricEigen out;
  for (; out.sweeps <= max_sweeps; ++out.sweeps) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a[p][q] * a[p][q];
    if (std::sqrt(off) <= tol * norm || norm == 0.0) {
      out.converged = true;
      break;
    }
    if (out.sweeps == max_sweeps) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a[i][i] > a[j][j]; });
  for (auto i : order) {
    out.values.push_back(a[i][i]);
    std::vector<double> vec(n);
    for (std::size_t k = 0; k < n; ++k) vec[k] = v[k][i];
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

Matrix invert_spd(const Matrix& a) {
  const std::size_t n = a.size();
  auto l = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i][j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(sum > 0.0)) throw Error(Errc::invalid_argument, "matrix is not positive definite");
        l[i][i] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  // Solve L L^T X = I column by column.
  auto inv = zeros(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = (i == col) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) sum -= l[i][k] * y[k];
      y[i] = sum / l[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double sum = y[i];
      for (std::size_t k = i + 1; k < n; ++k) sum -= l[k][i] * inv[k][col];
      inv[i][col] = sum / l[i][i];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) inv[i][j] = inv[j][i] = 0.5 * (inv[i][j] + inv[j][i]);
  return inv;
}

std::vector<int> max_weight_assignment(const Matrix& score) {
  const std::size_t rows = score.size();
  const std::size_t cols = rows ? score[0].size() : 0;
  const std::size_t n = std::max(rows, cols);
  if (n == 0) return {};
  double top = 0.0;
  for (const auto& r : score)
    for (double x : r) top = std::max(top, x);
  // Square cost matrix, padded with zero-score cells.
  auto cost = [&](std::size_t i, std::size_t j) {
    const double s = (i < rows && j < cols) ? score[i][j] : 0.0;
    return top - s;
  };

  // Shortest augmenting path Hungarian algorithm, 1-based potentials.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(rows, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = match[j];
    if (i >= 1 && i <= rows && j <= cols) assignment[i - 1] = static_cast<int>(j - 1);
  }
  return assignment;
}

}  // namespace nsp::linalg
