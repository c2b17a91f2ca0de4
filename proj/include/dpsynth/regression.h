//
// Copyright 2026 The dpsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPSYNTH_REGRESSION_H_
#define DPSYNTH_REGRESSION_H_

#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "dpsynth/budget.h"
#include "dpsynth/dataset.h"
#include "dpsynth/noise.h"

namespace dpsynth {

// Numeric value of a bin, clipped to the column's public bounds.
double NumericValue(const ColumnSpec& column, BinIndex bin);

// Feature columns are every column except the target, in domain order.
struct RegressionDesign {
  std::vector<int> features;
  int target = -1;
};

absl::StatusOr<RegressionDesign> MakeDesign(const Domain& domain,
                                            const std::string& target);

// Sufficient statistics of the squared loss in the bounds-scaled basis:
// every feature and the target mapped affinely from [L, U] to [-1, 1],
// plus a leading intercept feature fixed at 1. The loss is
// const + b'w + w'Mw with b = -2 sum y x and M = sum x x'.
struct QuadraticObjective {
  Eigen::VectorXd linear;
  Eigen::MatrixXd quadratic;
};

QuadraticObjective ScaledObjective(const Dataset& data,
                                   const RegressionDesign& design);

// Replacement sensitivity, in L1, of the full coefficient vector (constant,
// linear and all ordered quadratic terms) for d' = features + 1 inputs in
// [-1, 1]: 2(1 + 2d' + d'^2).
double FunctionalSensitivity(int num_features);

// Minimizer of b'w + w'Mw after symmetrizing M and discarding eigenvalues
// at or below `floor` relative to the largest one.
absl::StatusOr<Eigen::VectorXd> MinimizeObjective(const QuadraticObjective& obj,
                                                  double floor = 1e-8,
                                                  int* trimmed = nullptr);

struct FunctionalFit {
  std::vector<std::string> feature_names;
  std::string target;
  // Intercept first; bounds-scaled basis.
  std::vector<double> coefficients;
  std::vector<std::pair<double, double>> feature_bounds;
  std::pair<double, double> target_bounds;
  double sensitivity = 0.0;
  double scale = 0.0;
  int trimmed = 0;
};

// Perturbs every linear and quadratic coefficient with Lap(sensitivity/eps)
// and minimizes the noisy objective. Charges `epsilon` under `label`.
absl::StatusOr<FunctionalFit> FitFunctionalMechanism(
    const Dataset& data, const std::string& target, const Epsilon& epsilon,
    const std::string& label, bool inside_selection, NoiseSource& noise,
    BudgetLedger& ledger);

// Feature means and standard deviations taken from `data`; a zero
// deviation is replaced by 1.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> sd;
};

Standardization StandardizationOf(const Dataset& data,
                                  const RegressionDesign& design);

// Coefficients (intercept first) on standardized features, target in the
// column's own units.
std::vector<double> ToStandardized(const FunctionalFit& fit,
                                   const Standardization& standardization);

// Least squares on standardized features; minimum-norm when rank deficient.
absl::StatusOr<std::vector<double>> OrdinaryLeastSquares(
    const Dataset& data, const RegressionDesign& design,
    const Standardization& standardization);

// (1/n) sum |y - clip(prediction, L, U)| with standardized coefficients.
double ClippedMae(const Dataset& data, const RegressionDesign& design,
                  const Standardization& standardization,
                  const std::vector<double>& coefficients);

}  // namespace dpsynth

#endif  // DPSYNTH_REGRESSION_H_
