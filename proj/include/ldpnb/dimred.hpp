#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ldpnb/errors.hpp"
#include "ldpnb/linalg.hpp"

namespace ldpnb {

enum class DimredMethod { kPca, kDca };

// A fitted linear projection: y = rows * (x - feature_means), with each
// output dimension affinely renormalized onto [-1, 1] using the training
// split's projected min/max (empty out_min/out_max skips renormalization).
// Rows are unit norm, ordered by descending eigenvalue, and sign-fixed so the
// largest-magnitude component of each row is positive.
struct ProjectionMatrix {
  DimredMethod method = DimredMethod::kPca;
  Matrix rows;                        // r x n
  std::vector<double> feature_means;  // length n
  std::vector<double> eigenvalues;    // length r, descending
  std::vector<double> out_min;        // length r or empty
  std::vector<double> out_max;        // length r or empty

  std::size_t input_dims() const { return rows.cols(); }
  std::size_t output_dims() const { return rows.rows(); }
};

namespace detail {

inline Matrix as_matrix(std::span<const std::vector<double>> data) {
  if (data.empty()) throw EmptyInputError("projection fit needs data");
  const std::size_t n = data[0].size();
  if (n == 0) throw InvalidInputError("projection fit needs at least one column");
  Matrix m(data.size(), n);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].size() != n) throw InvalidInputError("rows have inconsistent widths");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = data[i][j];
  }
  return m;
}

inline std::vector<double> column_means(const Matrix& x) {
  std::vector<double> mu(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) mu[j] += x(i, j);
  for (double& v : mu) v /= static_cast<double>(x.rows());
  return mu;
}

inline void fix_row_sign(Matrix& rows, std::size_t r) {
  std::size_t arg = 0;
  for (std::size_t j = 1; j < rows.cols(); ++j)
    if (std::abs(rows(r, j)) > std::abs(rows(r, arg))) arg = j;
  if (rows(r, arg) < 0.0) {
    for (std::size_t j = 0; j < rows.cols(); ++j) rows(r, j) = -rows(r, j);
  }
}

inline void fit_output_range(ProjectionMatrix& p, const Matrix& x) {
  const std::size_t r = p.output_dims();
  p.out_min.assign(r, 0.0);
  p.out_max.assign(r, 0.0);
  for (std::size_t d = 0; d < r; ++d) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double y = 0.0;
      for (std::size_t j = 0; j < x.cols(); ++j) y += p.rows(d, j) * (x(i, j) - p.feature_means[j]);
      if (i == 0) {
        lo = hi = y;
      } else {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
    p.out_min[d] = lo;
    p.out_max[d] = hi;
  }
}

}  // namespace detail

// Principal components of the sample covariance of centered data.
inline ProjectionMatrix fit_pca(std::span<const std::vector<double>> data, int output_dims) {
  Matrix x = detail::as_matrix(data);
  const std::size_t n = x.cols();
  if (output_dims < 1 || static_cast<std::size_t>(output_dims) > n) {
    throw InvalidInputError("output dimension count must lie in [1, n]");
  }
  if (x.rows() < 2) throw InvalidInputError("projection fit needs at least two rows");

  ProjectionMatrix p;
  p.method = DimredMethod::kPca;
  p.feature_means = detail::column_means(x);

  Matrix cov(n, n);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t a = 0; a < n; ++a) {
      const double da = x(i, a) - p.feature_means[a];
      for (std::size_t b = a; b < n; ++b) cov(a, b) += da * (x(i, b) - p.feature_means[b]);
    }
  }
  double trace = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      cov(a, b) /= static_cast<double>(x.rows() - 1);
      cov(b, a) = cov(a, b);
    }
    trace += cov(a, a);
  }
  if (!(trace > 1e-12)) throw DegenerateDataError("data has no variance to project");

  EigenDecomposition eig = jacobi_eigen(cov);
  p.rows = Matrix(static_cast<std::size_t>(output_dims), n);
  p.eigenvalues.assign(eig.values.begin(), eig.values.begin() + output_dims);
  for (int r = 0; r < output_dims; ++r) {
    for (std::size_t j = 0; j < n; ++j) p.rows(static_cast<std::size_t>(r), j) = eig.vectors(static_cast<std::size_t>(r), j);
    detail::fix_row_sign(p.rows, static_cast<std::size_t>(r));
  }
  detail::fit_output_range(p, x);
  return p;
}

// Fisher-style discriminant projection: top eigenvectors of
// (S_w + ridge * I)^-1 * S_b, where S_w and S_b are the within- and
// between-class scatter matrices. Solved as a symmetric problem through the
// Cholesky factor of the regularized S_w. Rows are scaled to unit norm.
inline ProjectionMatrix fit_dca(std::span<const std::vector<double>> data, std::span<const int> labels,
                                int output_dims, double ridge = 1e-3) {
  Matrix x = detail::as_matrix(data);
  const std::size_t n = x.cols();
  if (labels.size() != x.rows()) throw InvalidInputError("label count must match row count");
  if (output_dims < 1 || static_cast<std::size_t>(output_dims) > n) {
    throw InvalidInputError("output dimension count must lie in [1, n]");
  }
  if (!(ridge > 0.0)) throw InvalidInputError("ridge must be positive");

  int k = 0;
  for (int label : labels) {
    if (label < 1) throw InvalidInputError("labels must be 1-based");
    k = std::max(k, label);
  }
  std::vector<std::size_t> class_sizes(static_cast<std::size_t>(k), 0);
  for (int label : labels) class_sizes[static_cast<std::size_t>(label - 1)] += 1;
  int present = 0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c)
    if (class_sizes[c] > 0) ++present;
  if (present < 2) throw DegenerateDataError("discriminant fit needs at least two classes present");

  ProjectionMatrix p;
  p.method = DimredMethod::kDca;
  p.feature_means = detail::column_means(x);

  Matrix class_means(static_cast<std::size_t>(k), n);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t c = static_cast<std::size_t>(labels[i] - 1);
    for (std::size_t j = 0; j < n; ++j) class_means(c, j) += x(i, j);
  }
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
    if (class_sizes[c] == 0) continue;
    for (std::size_t j = 0; j < n; ++j) class_means(c, j) /= static_cast<double>(class_sizes[c]);
  }

  Matrix sw(n, n), sb(n, n);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t c = static_cast<std::size_t>(labels[i] - 1);
    for (std::size_t a = 0; a < n; ++a) {
      const double da = x(i, a) - class_means(c, a);
      for (std::size_t b = a; b < n; ++b) sw(a, b) += da * (x(i, b) - class_means(c, b));
    }
  }
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
    if (class_sizes[c] == 0) continue;
    for (std::size_t a = 0; a < n; ++a) {
      const double da = class_means(c, a) - p.feature_means[a];
      for (std::size_t b = a; b < n; ++b) {
        sb(a, b) += static_cast<double>(class_sizes[c]) * da * (class_means(c, b) - p.feature_means[b]);
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < a; ++b) {
      sw(a, b) = sw(b, a);
      sb(a, b) = sb(b, a);
    }
  for (std::size_t a = 0; a < n; ++a) sw(a, a) += ridge;

  // (S_w + ridge I) = L L^T; eigenvectors y of L^-1 S_b L^-T map back via
  // w = L^-T y, turning the generalized problem into a symmetric one.
  const Matrix l = cholesky(sw);
  const Matrix half = forward_solve(l, sb);                     // L^-1 S_b
  const Matrix sym = forward_solve(l, half.transposed());      // L^-1 S_b^T L^-T
  EigenDecomposition eig = jacobi_eigen(sym);

  p.rows = Matrix(static_cast<std::size_t>(output_dims), n);
  p.eigenvalues.assign(eig.values.begin(), eig.values.begin() + output_dims);
  for (int r = 0; r < output_dims; ++r) {
    std::vector<double> y(n);
    for (std::size_t j = 0; j < n; ++j) y[j] = eig.vectors(static_cast<std::size_t>(r), j);
    std::vector<double> w = back_solve_transposed(l, y);
    double norm = 0.0;
    for (double v : w) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) throw DegenerateDataError("discriminant direction collapsed to zero");
    for (std::size_t j = 0; j < n; ++j) p.rows(static_cast<std::size_t>(r), j) = w[j] / norm;
    detail::fix_row_sign(p.rows, static_cast<std::size_t>(r));
  }
  detail::fit_output_range(p, x);
  return p;
}

// Projection without the output renormalization step.
inline std::vector<double> project_raw(const ProjectionMatrix& p, std::span<const double> x) {
  if (x.size() != p.input_dims()) throw InvalidInputError("input length does not match the projection");
  std::vector<double> y(p.output_dims(), 0.0);
  for (std::size_t d = 0; d < p.output_dims(); ++d) {
    for (std::size_t j = 0; j < p.input_dims(); ++j) y[d] += p.rows(d, j) * (x[j] - p.feature_means[j]);
  }
  return y;
}

// Projection followed by the per-dimension affine map onto [-1, 1] fitted on
// the training split; out-of-range values clip. Dimensions that were constant
// on the training split map to 0.
inline std::vector<double> project(const ProjectionMatrix& p, std::span<const double> x) {
  std::vector<double> y = project_raw(p, x);
  if (p.out_min.empty()) return y;
  if (p.out_min.size() != y.size() || p.out_max.size() != y.size()) {
    throw InvalidInputError("projection renormalization ranges have the wrong length");
  }
  for (std::size_t d = 0; d < y.size(); ++d) {
    const double lo = p.out_min[d], hi = p.out_max[d];
    if (!(hi > lo)) {
      y[d] = 0.0;
      continue;
    }
    y[d] = std::clamp(-1.0 + 2.0 * (y[d] - lo) / (hi - lo), -1.0, 1.0);
  }
  return y;
}

}  // namespace ldpnb
