#include "netsem/density.hpp"

#include <algorithm>
#include <cmath>

#include "netsem/error.hpp"
#include "netsem/value.hpp"

namespace netsem {
namespace {

double LogLikelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y[i] * e - softplus;
  }
  return ll;
}

Eigen::VectorXd HazardEta(const std::vector<std::int32_t>& bin, const Eigen::MatrixXd& z,
                          const Eigen::VectorXd& coef) {
  Eigen::VectorXd eta = z.cols() > 0 ? Eigen::VectorXd(z * coef.tail(z.cols()))
                                     : Eigen::VectorXd::Zero(z.rows());
  for (Eigen::Index r = 0; r < eta.size(); ++r) eta[r] += coef[bin[r]];
  return eta;
}

}  // namespace

std::vector<double> EqualMassEdges(std::span<const double> values, std::int32_t max_per_bin) {
  if (max_per_bin < 1) throw ParameterError("max_per_bin must be positive");
  std::vector<double> x(values.begin(), values.end());
  for (double v : x) {
    if (!std::isfinite(v)) throw ParameterError("binned density needs finite values");
  }
  const auto n = static_cast<std::int64_t>(x.size());
  if (n < 2) throw ParameterError("binned density needs at least two values");
  std::sort(x.begin(), x.end());
  const std::int64_t k = (n + max_per_bin - 1) / max_per_bin;
  std::vector<double> edges{x.front()};
  for (std::int64_t j = 1; j < k; ++j) {
    const auto idx = static_cast<std::int64_t>(std::llround(static_cast<double>(j * n) / k));
    if (idx <= 0 || idx >= n) continue;
    const double cut = 0.5 * (x[idx - 1] + x[idx]);
    if (cut > edges.back()) edges.push_back(cut);
  }
  if (x.back() > edges.back()) {
    edges.push_back(x.back());
  } else if (edges.size() > 1) {
    // The last cut landed on the maximum: fold the empty top bin away.
    edges.back() = x.back();
  }
  if (edges.size() < 3) throw ParameterError("binned density has fewer than 2 distinct bins");
  return edges;
}

void ExtendEdges(std::vector<double>& edges, std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ParameterError("binned density needs finite values");
    edges.front() = std::min(edges.front(), v);
    edges.back() = std::max(edges.back(), v);
  }
}

std::int32_t BinOf(const std::vector<double>& edges, double x) {
  if (!(x >= edges.front() && x <= edges.back())) return -1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const auto k = static_cast<std::int32_t>(it - edges.begin()) - 1;
  return std::min(k, static_cast<std::int32_t>(edges.size()) - 2);
}

LogisticFit FitPooledHazard(const std::vector<std::int32_t>& bin, const Eigen::MatrixXd& z,
                            const Eigen::VectorXd& y, std::int32_t hazard_bins,
                            const LogisticOptions& options) {
  const Eigen::Index rows = z.rows();
  const Eigen::Index q = z.cols();
  const Eigen::Index p = hazard_bins + q;
  if (static_cast<Eigen::Index>(bin.size()) != rows || y.size() != rows) {
    throw ParameterError("hazard design sizes disagree");
  }
  LogisticFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = HazardEta(bin, z, fit.coefficients);
  double ll = LogLikelihood(eta, y);

  for (fit.iterations = 0; fit.iterations < options.max_iterations; ++fit.iterations) {
    Eigen::VectorXd resid(rows), w(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double mu = Logistic(eta[r]);
      resid[r] = y[r] - mu;
      w[r] = mu * (1.0 - mu);
    }
    Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto j = bin[r];
      score[j] += resid[r];
      h(j, j) += w[r];
      if (q > 0) h.block(j, hazard_bins, 1, q) += w[r] * z.row(r);
    }
    if (q > 0) {
      score.tail(q) = z.transpose() * resid;
      h.block(hazard_bins, 0, q, hazard_bins) = h.block(0, hazard_bins, hazard_bins, q).transpose();
      h.block(hazard_bins, hazard_bins, q, q) = z.transpose() * w.asDiagonal() * z;
    }
    fit.max_score = score.cwiseAbs().maxCoeff();
    if (fit.max_score < options.tolerance) {
      fit.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) step = ldlt.solve(score);
    if (step.size() != p || !step.allFinite() || (h * step - score).norm() > 1e-6 * (1.0 + score.norm())) {
      step = h.completeOrthogonalDecomposition().solve(score);
    }
    double scale = 1.0;
    for (int halving = 0; halving < 30; ++halving) {
      const Eigen::VectorXd candidate = fit.coefficients + scale * step;
      const Eigen::VectorXd cand_eta = HazardEta(bin, z, candidate);
      const double cand_ll = LogLikelihood(cand_eta, y);
      if (cand_ll >= ll - 1e-12 * std::abs(ll)) {
        fit.coefficients = candidate;
        eta = cand_eta;
        ll = cand_ll;
        break;
      }
      scale *= 0.5;
    }
    if (!fit.coefficients.allFinite()) throw Error("hazard fit diverged");
  }
  if (fit.coefficients.size() > 0 && fit.coefficients.cwiseAbs().maxCoeff() > 30.0) {
    fit.separated = true;
  }
  return fit;
}

double DensityComponent::Density(double x, std::span<const double> conditioning_values) const {
  const std::int32_t k = BinOf(edges, x);
  if (k < 0) return 0.0;
  const std::int32_t hb = bins() - 1;
  double slope_part = 0.0;
  for (std::size_t c = 0; c < conditioning_values.size(); ++c) {
    slope_part += hazard.coefficients[hb + static_cast<Eigen::Index>(c)] * conditioning_values[c];
  }
  double prob = 1.0;
  for (std::int32_t j = 0; j < std::min(k, hb); ++j) {
    prob *= 1.0 - Logistic(hazard.coefficients[j] + slope_part);
  }
  if (k < hb) prob *= Logistic(hazard.coefficients[k] + slope_part);
  return prob / (edges[k + 1] - edges[k]);
}

double DensityComponent::Sample(std::span<const double> conditioning_values, double u_bin,
                                double u_within) const {
  const std::int32_t hb = bins() - 1;
  double slope_part = 0.0;
  for (std::size_t c = 0; c < conditioning_values.size(); ++c) {
    slope_part += hazard.coefficients[hb + static_cast<Eigen::Index>(c)] * conditioning_values[c];
  }
  std::int32_t k = hb;
  double reach = 1.0;
  double cumulative = 0.0;
  for (std::int32_t j = 0; j < hb; ++j) {
    const double stop = reach * Logistic(hazard.coefficients[j] + slope_part);
    cumulative += stop;
    if (u_bin < cumulative) {
      k = j;
      break;
    }
    reach -= stop;
  }
  return edges[k] + u_within * (edges[k + 1] - edges[k]);
}

BinnedDensity BinnedDensity::Fit(const Dataset& data, const RegressionSpec& hform,
                                 const BinningConfig& config,
                                 const std::vector<std::vector<double>>* edges,
                                 const LogisticOptions& options) {
  if (data.n() < 2 * static_cast<std::int64_t>(config.max_per_bin)) {
    throw ParameterError("binned density needs n >= 2 * max_per_bin");
  }
  if (edges != nullptr && edges->size() != hform.outcomes.size()) {
    throw ParameterError("one edge vector per density component is required");
  }
  BinnedDensity out;
  std::vector<std::string> conditioning = hform.covariates;
  for (std::size_t c = 0; c < hform.outcomes.size(); ++c) {
    DensityComponent comp;
    comp.name = hform.outcomes[c];
    comp.conditioning = conditioning;
    const auto x = data.Values(comp.name);
    comp.edges = edges != nullptr ? (*edges)[c] : EqualMassEdges(x, config.max_per_bin);
    const std::int32_t k_bins = comp.bins();
    if (k_bins < 2) throw ParameterError("binned density has fewer than 2 bins");

    Eigen::MatrixXd cov(data.n(), static_cast<Eigen::Index>(conditioning.size()));
    for (std::size_t j = 0; j < conditioning.size(); ++j) {
      const auto v = data.Values(conditioning[j]);
      for (std::int32_t i = 0; i < data.n(); ++i) {
        if (IsMissing(v[i])) throw EvalError("column '" + conditioning[j] + "' has missing values");
        cov(i, static_cast<Eigen::Index>(j)) = v[i];
      }
    }
    std::vector<std::int32_t> unit_bin(data.n());
    std::int64_t rows = 0;
    for (std::int32_t i = 0; i < data.n(); ++i) {
      unit_bin[i] = BinOf(comp.edges, x[i]);
      if (unit_bin[i] < 0) {
        throw ParameterError("value of '" + comp.name + "' at unit " + std::to_string(i + 1) +
                             " lies outside the bin edges");
      }
      rows += std::min(unit_bin[i], k_bins - 2) + 1;
    }
    std::vector<std::int32_t> row_bin(rows);
    Eigen::MatrixXd z(rows, cov.cols());
    Eigen::VectorXd y(rows);
    std::int64_t r = 0;
    for (std::int32_t i = 0; i < data.n(); ++i) {
      for (std::int32_t j = 0; j <= std::min(unit_bin[i], k_bins - 2); ++j, ++r) {
        row_bin[r] = j;
        z.row(r) = cov.row(i);
        y[r] = j == unit_bin[i] ? 1.0 : 0.0;
      }
    }
    comp.hazard = FitPooledHazard(row_bin, z, y, k_bins - 1, options);
    out.components_.push_back(std::move(comp));
    conditioning.push_back(hform.outcomes[c]);
  }
  return out;
}

std::vector<double> BinnedDensity::Evaluate(const Dataset& data) const {
  std::vector<double> out(data.n(), 1.0);
  for (const auto& comp : components_) {
    std::vector<std::span<const double>> cols;
    for (const auto& name : comp.conditioning) cols.push_back(data.Values(name));
    const auto x = data.Values(comp.name);
    std::vector<double> z(cols.size());
    for (std::int32_t i = 0; i < data.n(); ++i) {
      for (std::size_t c = 0; c < cols.size(); ++c) z[c] = cols[c][i];
      out[i] *= comp.Density(x[i], z);
    }
  }
  return out;
}

}  // namespace netsem
