// Copyright 2026 The airmarket Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "airmarket/nnls.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace airmarket {
namespace {

// Least squares restricted to the passive columns; other entries are zero.
Eigen::VectorXd passive_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              const std::vector<char>& passive) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    if (passive[j]) cols.push_back(j);
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(A.cols());
  if (cols.empty()) return out;
  Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) Ap.col(k) = A.col(cols[k]);
  const Eigen::VectorXd s = Ap.completeOrthogonalDecomposition().solve(b);
  for (std::size_t k = 0; k < cols.size(); ++k) out[cols[k]] = s[k];
  return out;
}

}  // namespace

NnlsResult solve_nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                      int max_iterations) {
  const Eigen::Index n = A.cols();
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * n + 10);
  NnlsResult r;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<char> passive(n, 0);
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff()) *
                       std::max(1.0, b.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale * std::max<double>(1.0, static_cast<double>(n));

  for (r.iterations = 0; r.iterations < max_iterations; ++r.iterations) {
    const Eigen::VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) {
      r.converged = true;
      break;
    }
    passive[best] = 1;
    // Inner loop: step back toward feasibility until the passive solution
    // is strictly positive.
    while (true) {
      const Eigen::VectorXd s = passive_solve(A, b, passive);
      bool positive = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && s[j] <= 0.0) positive = false;
      }
      if (positive) {
        x = s;
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && s[j] <= 0.0) {
          alpha = std::min(alpha, x[j] / (x[j] - s[j]));
        }
      }
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && x[j] <= tol) {
          passive[j] = 0;
          x[j] = 0.0;
        }
      }
    }
  }
  r.solution = x;
  r.residual = (A * x - b).norm();
  return r;
}

}  // namespace airmarket
