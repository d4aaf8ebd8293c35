#include "netsem/regression.hpp"

#include <cctype>
#include <cmath>

#include "netsem/error.hpp"
#include "netsem/value.hpp"

namespace netsem {
namespace {

std::string Trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool ValidName(const std::string& name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0]))) return false;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_') return false;
  }
  return true;
}

std::vector<std::string> SplitTerms(std::string_view side, std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto plus = side.find('+', start);
    std::string term = Trim(side.substr(start, plus == std::string_view::npos ? plus : plus - start));
    if (!ValidName(term)) {
      throw ParseError("invalid term '" + term + "' in regression formula '" + std::string(text) + "'",
                       start);
    }
    for (const auto& seen : out) {
      if (seen == term) throw ParseError("repeated term '" + term + "'", start);
    }
    out.push_back(std::move(term));
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return out;
}

double LogLikelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // log(1 + exp(eta)) computed without overflow.
    const double e = eta[i];
    const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y[i] * e - softplus;
  }
  return ll;
}

Eigen::VectorXd Solve(const Eigen::MatrixXd& h, const Eigen::VectorXd& g) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Eigen::VectorXd step = ldlt.solve(g);
    if (step.allFinite() && (h * step - g).norm() <= 1e-6 * (1.0 + g.norm())) return step;
  }
  return h.completeOrthogonalDecomposition().solve(g);
}

}  // namespace

RegressionSpec ParseRegression(std::string_view text) {
  const auto tilde = text.find('~');
  if (tilde == std::string_view::npos) throw ParseError("regression formula needs '~'", 0);
  if (text.find('~', tilde + 1) != std::string_view::npos) {
    throw ParseError("regression formula has more than one '~'", text.find('~', tilde + 1));
  }
  RegressionSpec spec;
  spec.outcomes = SplitTerms(text.substr(0, tilde), text);
  const std::string rhs = Trim(text.substr(tilde + 1));
  if (!rhs.empty() && rhs != "1") spec.covariates = SplitTerms(text.substr(tilde + 1), text);
  return spec;
}

std::string ToString(const RegressionSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.outcomes.size(); ++i) out += (i ? " + " : "") + spec.outcomes[i];
  out += " ~ ";
  if (spec.covariates.empty()) out += "1";
  for (std::size_t i = 0; i < spec.covariates.size(); ++i) {
    out += (i ? " + " : "") + spec.covariates[i];
  }
  return out;
}

Eigen::MatrixXd DesignWithIntercept(const Dataset& data, const std::vector<std::string>& columns) {
  Eigen::MatrixXd x(data.n(), static_cast<Eigen::Index>(columns.size()) + 1);
  x.col(0).setOnes();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto values = data.Values(columns[c]);
    for (std::int32_t i = 0; i < data.n(); ++i) {
      if (IsMissing(values[i])) {
        throw EvalError("column '" + columns[c] + "' is missing at unit " + std::to_string(i + 1));
      }
      x(i, static_cast<Eigen::Index>(c) + 1) = values[i];
    }
  }
  return x;
}

LogisticFit FitLogistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const LogisticOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw ParameterError("design and response lengths differ");
  if (n <= p) throw ParameterError("logistic fit needs more rows than coefficients");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) throw ParameterError("logistic response must be 0 or 1");
  }

  LogisticFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  if (y.minCoeff() == y.maxCoeff()) {
    fit.separated = true;
    fit.converged = true;
    fit.constant_response = y[0];
    return fit;
  }

  Eigen::VectorXd eta = x * fit.coefficients;
  double ll = LogLikelihood(eta, y);
  for (fit.iterations = 0; fit.iterations < options.max_iterations; ++fit.iterations) {
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = Logistic(eta[i]);
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    const Eigen::VectorXd score = x.transpose() * (y - mu);
    fit.max_score = score.cwiseAbs().maxCoeff();
    if (fit.max_score < options.tolerance) {
      fit.converged = true;
      break;
    }
    const Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    Eigen::VectorXd step = Solve(h, score);
    double scale = 1.0;
    for (int halving = 0; halving < 30; ++halving) {
      const Eigen::VectorXd candidate = fit.coefficients + scale * step;
      const Eigen::VectorXd cand_eta = x * candidate;
      const double cand_ll = LogLikelihood(cand_eta, y);
      if (cand_ll >= ll - 1e-12 * std::abs(ll)) {
        fit.coefficients = candidate;
        eta = cand_eta;
        ll = cand_ll;
        break;
      }
      scale *= 0.5;
    }
    if (!fit.coefficients.allFinite()) throw Error("logistic fit diverged");
  }
  if (fit.iterations == options.max_iterations) {
    Eigen::VectorXd mu(n);
    for (Eigen::Index i = 0; i < n; ++i) mu[i] = Logistic(eta[i]);
    fit.max_score = (x.transpose() * (y - mu)).cwiseAbs().maxCoeff();
    fit.converged = fit.max_score < options.tolerance;
  }
  if (fit.coefficients.cwiseAbs().maxCoeff() > 30.0) fit.separated = true;
  return fit;
}

Eigen::VectorXd PredictLogistic(const LogisticFit& fit, const Eigen::MatrixXd& x) {
  if (fit.constant_response >= 0.0) return Eigen::VectorXd::Constant(x.rows(), fit.constant_response);
  if (x.cols() != fit.coefficients.size()) throw ParameterError("design width does not match fit");
  const Eigen::VectorXd eta = x * fit.coefficients;
  Eigen::VectorXd out(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) out[i] = Logistic(eta[i]);
  return out;
}

}  // namespace netsem
