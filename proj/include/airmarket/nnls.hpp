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

// Nonnegative least squares, min ||A g - b|| subject to g >= 0, by the
// active-set method of Lawson and Hanson.

#ifndef AIRMARKET_NNLS_HPP_
#define AIRMARKET_NNLS_HPP_

#include <Eigen/Dense>

namespace airmarket {

struct NnlsResult {
  Eigen::VectorXd solution;
  double residual = 0.0;  // ||A g - b||
  int iterations = 0;
  bool converged = false;
};

NnlsResult solve_nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                      int max_iterations = 0);

}  // namespace airmarket

#endif  // AIRMARKET_NNLS_HPP_
