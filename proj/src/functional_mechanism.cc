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

#include <cmath>

#include "absl/strings/str_cat.h"
#include "dpsynth/laplace.h"
#include "dpsynth/regression.h"

namespace dpsynth {
namespace {

double Scaled(double x, double lower, double upper) {
  return (2.0 * x - lower - upper) / (upper - lower);
}

// Row of the scaled design: intercept, then features; and the target.
void ScaledRow(const Domain& domain, const RegressionDesign& design,
               const Record& r, Eigen::VectorXd& x, double& y) {
  x(0) = 1.0;
  for (size_t j = 0; j < design.features.size(); ++j) {
    const ColumnSpec& col = domain[design.features[j]];
    x(j + 1) = Scaled(NumericValue(col, r[design.features[j]]),
                      col.lower_bound, col.upper_bound);
  }
  const ColumnSpec& t = domain[design.target];
  y = Scaled(NumericValue(t, r[design.target]), t.lower_bound, t.upper_bound);
}

}  // namespace

double NumericValue(const ColumnSpec& column, BinIndex bin) {
  return ClipUnchecked(BinToNumeric(column.bins[bin]), column.lower_bound,
                       column.upper_bound);
}

absl::StatusOr<RegressionDesign> MakeDesign(const Domain& domain,
                                            const std::string& target) {
  RegressionDesign design;
  design.target = ColumnIndex(domain, target);
  if (design.target < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("regression target '", target, "' is not a column"));
  }
  for (int c = 0; c < static_cast<int>(domain.size()); ++c) {
    if (c != design.target) design.features.push_back(c);
  }
  return design;
}

QuadraticObjective ScaledObjective(const Dataset& data,
                                   const RegressionDesign& design) {
  const int d = static_cast<int>(design.features.size()) + 1;
  QuadraticObjective obj{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  Eigen::VectorXd x(d);
  double y = 0.0;
  for (const auto& [r, c] : data.counts()) {
    ScaledRow(data.domain(), design, r, x, y);
    obj.linear += (-2.0 * y * static_cast<double>(c)) * x;
    obj.quadratic += static_cast<double>(c) * (x * x.transpose());
  }
  return obj;
}

double FunctionalSensitivity(int num_features) {
  const double d = num_features + 1;
  return 2.0 * (1.0 + 2.0 * d + d * d);
}

absl::StatusOr<Eigen::VectorXd> MinimizeObjective(const QuadraticObjective& obj,
                                                  double floor, int* trimmed) {
  const Eigen::MatrixXd sym = 0.5 * (obj.quadratic + obj.quadratic.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    return absl::InternalError("eigendecomposition failed");
  }
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = values.cwiseAbs().maxCoeff();
  // w = -1/2 M^+ b over the kept eigenspace.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(obj.linear.size());
  int dropped = 0;
  for (int i = 0; i < values.size(); ++i) {
    if (!(values(i) > floor * top)) {
      ++dropped;
      continue;
    }
    const Eigen::VectorXd v = eig.eigenvectors().col(i);
    w -= 0.5 * (v.dot(obj.linear) / values(i)) * v;
  }
  if (trimmed != nullptr) *trimmed = dropped;
  if (dropped == values.size()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "regression objective has no positive curvature after trimming; "
        "largest |eigenvalue| ",
        top));
  }
  return w;
}

absl::StatusOr<FunctionalFit> FitFunctionalMechanism(
    const Dataset& data, const std::string& target, const Epsilon& epsilon,
    const std::string& label, bool inside_selection, NoiseSource& noise,
    BudgetLedger& ledger) {
  if (epsilon <= 0) return absl::InvalidArgumentError("epsilon must be positive");
  if (data.empty()) return absl::InvalidArgumentError("regression on no data");
  absl::StatusOr<RegressionDesign> design = MakeDesign(data.domain(), target);
  if (!design.ok()) return design.status();
  QuadraticObjective obj = ScaledObjective(data, *design);

  FunctionalFit fit;
  fit.target = target;
  for (int c : design->features) {
    const ColumnSpec& col = data.domain()[c];
    fit.feature_names.push_back(col.name);
    fit.feature_bounds.emplace_back(col.lower_bound, col.upper_bound);
  }
  const ColumnSpec& t = data.domain()[design->target];
  fit.target_bounds = {t.lower_bound, t.upper_bound};
  fit.sensitivity =
      FunctionalSensitivity(static_cast<int>(design->features.size()));
  fit.scale = fit.sensitivity / ToDouble(epsilon);

  const std::string purpose = absl::StrCat(label, "/objective");
  for (int j = 0; j < obj.linear.size(); ++j) {
    obj.linear(j) += noise.Laplace(fit.scale, purpose);
  }
  for (int j = 0; j < obj.quadratic.rows(); ++j) {
    for (int l = 0; l < obj.quadratic.cols(); ++l) {
      obj.quadratic(j, l) += noise.Laplace(fit.scale, purpose);
    }
  }
  if (absl::Status s = ledger.Charge(
          {label, epsilon,
           {fit.sensitivity, "L1 of per-record objective coefficients, x in "
                             "[-1,1]^d'"},
           "functional",
           inside_selection});
      !s.ok()) {
    return s;
  }
  absl::StatusOr<Eigen::VectorXd> w = MinimizeObjective(obj, 1e-8, &fit.trimmed);
  if (!w.ok()) return w.status();
  fit.coefficients.assign(w->data(), w->data() + w->size());
  return fit;
}

Standardization StandardizationOf(const Dataset& data,
                                  const RegressionDesign& design) {
  const size_t k = design.features.size();
  Standardization st{std::vector<double>(k, 0.0), std::vector<double>(k, 1.0)};
  const double n = static_cast<double>(data.size());
  if (n == 0) return st;
  std::vector<double> sum(k, 0.0), sq(k, 0.0);
  for (const auto& [r, c] : data.counts()) {
    for (size_t j = 0; j < k; ++j) {
      double x = NumericValue(data.domain()[design.features[j]],
                              r[design.features[j]]);
      sum[j] += c * x;
      sq[j] += c * x * x;
    }
  }
  for (size_t j = 0; j < k; ++j) {
    st.mean[j] = sum[j] / n;
    double var = sq[j] / n - st.mean[j] * st.mean[j];
    st.sd[j] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
  return st;
}

std::vector<double> ToStandardized(const FunctionalFit& fit,
                                   const Standardization& st) {
  const auto [lt, ut] = fit.target_bounds;
  const double a_y = 0.5 * (ut - lt);
  const double b_y = 0.5 * (lt + ut);
  std::vector<double> out(fit.coefficients.size());
  double intercept = fit.coefficients[0];
  for (size_t j = 0; j + 1 < fit.coefficients.size(); ++j) {
    const auto [l, u] = fit.feature_bounds[j];
    const double a = 2.0 / (u - l);
    const double c = -(l + u) / (u - l);
    const double w = fit.coefficients[j + 1];
    intercept += w * (a * st.mean[j] + c);
    out[j + 1] = a_y * w * a * st.sd[j];
  }
  out[0] = a_y * intercept + b_y;
  return out;
}

absl::StatusOr<std::vector<double>> OrdinaryLeastSquares(
    const Dataset& data, const RegressionDesign& design,
    const Standardization& st) {
  if (data.empty()) return absl::InvalidArgumentError("regression on no data");
  const int d = static_cast<int>(design.features.size()) + 1;
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd x(d);
  for (const auto& [r, c] : data.counts()) {
    x(0) = 1.0;
    for (int j = 0; j + 1 < d; ++j) {
      int col = design.features[j];
      x(j + 1) = (NumericValue(data.domain()[col], r[col]) - st.mean[j]) /
                 st.sd[j];
    }
    double y = NumericValue(data.domain()[design.target], r[design.target]);
    xtx += static_cast<double>(c) * (x * x.transpose());
    xty += (static_cast<double>(c) * y) * x;
  }
  Eigen::VectorXd w = xtx.completeOrthogonalDecomposition().solve(xty);
  if (!w.allFinite()) return absl::InternalError("least squares diverged");
  return std::vector<double>(w.data(), w.data() + w.size());
}

double ClippedMae(const Dataset& data, const RegressionDesign& design,
                  const Standardization& st,
                  const std::vector<double>& coefficients) {
  if (data.empty()) return 0.0;
  const ColumnSpec& t = data.domain()[design.target];
  double total = 0.0;
  for (const auto& [r, c] : data.counts()) {
    double pred = coefficients[0];
    for (size_t j = 0; j < design.features.size(); ++j) {
      int col = design.features[j];
      pred += coefficients[j + 1] *
              (NumericValue(data.domain()[col], r[col]) - st.mean[j]) / st.sd[j];
    }
    pred = ClipUnchecked(pred, t.lower_bound, t.upper_bound);
    total += c * std::abs(NumericValue(t, r[design.target]) - pred);
  }
  return total / static_cast<double>(data.size());
}

}  // namespace dpsynth
