#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "netsem/dataset.hpp"

namespace netsem {

// "Y ~ X1 + X2" or "A + sumA ~ X1 + X2": '+'-separated names on both sides.
// "Z ~ 1" (or "Z ~") has no covariates.
struct RegressionSpec {
  std::vector<std::string> outcomes;
  std::vector<std::string> covariates;

  friend bool operator==(const RegressionSpec&, const RegressionSpec&) = default;
};

RegressionSpec ParseRegression(std::string_view text);
std::string ToString(const RegressionSpec& spec);

// n x (1 + |columns|) matrix: an intercept column followed by the columns.
Eigen::MatrixXd DesignWithIntercept(const Dataset& data, const std::vector<std::string>& columns);

struct LogisticFit {
  Eigen::VectorXd coefficients;
  std::int32_t iterations = 0;
  bool converged = false;
  double max_score = 0.0;
  // Set when y is constant or the coefficients diverge; predictions from a
  // constant response are exactly that response.
  bool separated = false;
  double constant_response = -1.0;  // 0 or 1 when y is constant, else -1
};

struct LogisticOptions {
  double tolerance = 1e-8;  // on max |score|
  std::int32_t max_iterations = 100;
};

// Maximum likelihood by Newton / IRLS with step halving.
LogisticFit FitLogistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const LogisticOptions& options = {});

Eigen::VectorXd PredictLogistic(const LogisticFit& fit, const Eigen::MatrixXd& x);

}  // namespace netsem
