// Copyright 2026 The segsynth Authors.
//
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

#pragma once

#include <vector>

#include "segsynth/types.hpp"

namespace segsynth {

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues are sorted in descending order (stable for ties); column j
/// of `vectors` is the unit eigenvector for values[j].
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};

SymmetricEigen symmetric_eigen(const Matrix& symmetric, int max_sweeps = 100);

}  // namespace segsynth
