#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netsem/dataset.hpp"
#include "netsem/regression.hpp"

namespace netsem {

struct BinningConfig {
  std::int32_t max_per_bin = 50;  // bin count is ceil(n / max_per_bin)
};

// Bin edges c_0 < ... < c_K over the sample. Interior edges sit midway
// between the order statistics at round(k n / K); tied edges merge.
std::vector<double> EqualMassEdges(std::span<const double> values, std::int32_t max_per_bin);

// Widens the outer edges to cover `values`.
void ExtendEdges(std::vector<double>& edges, std::span<const double> values);

// 0-based bin of x, bins closed on the left and the last bin closed on both
// sides; -1 outside the edges.
std::int32_t BinOf(const std::vector<double>& edges, double x);

// Pooled hazard logistic regression: row r asks "does the value stop in bin
// bin[r] given it reached it", with one intercept per bin (no common
// intercept) and shared slopes on z.
LogisticFit FitPooledHazard(const std::vector<std::int32_t>& bin, const Eigen::MatrixXd& z,
                            const Eigen::VectorXd& y, std::int32_t hazard_bins,
                            const LogisticOptions& options = {});

struct DensityComponent {
  std::string name;
  std::vector<std::string> conditioning;
  std::vector<double> edges;
  LogisticFit hazard;  // K - 1 bin intercepts, then one slope per conditioning column

  std::int32_t bins() const { return static_cast<std::int32_t>(edges.size()) - 1; }
  // Density of the component at x given conditioning values.
  double Density(double x, std::span<const double> conditioning_values) const;
  // Draw: u_bin picks the bin through the hazards, u_within the position
  // inside it (uniform within the bin).
  double Sample(std::span<const double> conditioning_values, double u_bin, double u_within) const;
};

// Conditional density of (outcomes...) given covariates, factorised left to
// right: component j conditions on the covariates and components before j.
class BinnedDensity {
 public:
  // With edges given (one vector per component) the same bins are reused,
  // otherwise they are computed from the data.
  static BinnedDensity Fit(const Dataset& data, const RegressionSpec& hform,
                           const BinningConfig& config,
                           const std::vector<std::vector<double>>* edges = nullptr,
                           const LogisticOptions& options = {});

  const std::vector<DensityComponent>& components() const { return components_; }
  // Joint conditional density at every unit of data.
  std::vector<double> Evaluate(const Dataset& data) const;

 private:
  std::vector<DensityComponent> components_;
};

}  // namespace netsem
