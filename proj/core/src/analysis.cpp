#include "frest/analysis.hpp"

#include <cmath>

#include "frest/errors.hpp"
#include "frest/rng.hpp"
#include "frest/transforms.hpp"

namespace frest {

void SampleEnsemble::validate() const {
  if (samples.size() < 2) {
    throw InvalidInputError("ensemble must contain at least two samples");
  }
  const Eigen::Index t = samples.front().rows();
  const Eigen::Index n = samples.front().cols();
  if (t < 1 || n < 1) {
    throw InvalidInputError("ensemble samples must be at least 1 x 1");
  }
  for (const auto& s : samples) {
    if (s.rows() != t || s.cols() != n) {
      throw InvalidInputError("ensemble samples have mismatched shapes");
    }
    if (!s.allFinite()) {
      throw InvalidInputError("ensemble sample contains non-finite entries");
    }
  }
}

std::string to_string(CorrelationView view) {
  switch (view) {
    case CorrelationView::Temporal: return "temporal";
    case CorrelationView::Spatial: return "spatial";
    case CorrelationView::Joint: return "joint";
  }
  return "?";
}

std::string to_string(SpectralDomain domain) {
  switch (domain) {
    case SpectralDomain::Raw: return "raw";
    case SpectralDomain::Fft: return "fft";
    case SpectralDomain::Gft: return "gft";
    case SpectralDomain::Jft: return "jft";
  }
  return "?";
}

namespace {

// Mean |rho| over distinct variable pairs from accumulated first and second
// moments. Variables whose standard deviation is negligible relative to
// their mean contribute rho = 0 (constant sensors occur in real data).
double rho_bar_from_moments(const Eigen::VectorXd& sum,
                            const Eigen::MatrixXd& cross,
                            double n_obs) {
  const Eigen::Index v = sum.size();
  if (v < 2) return 0.0;
  const Eigen::VectorXd mean = sum / n_obs;
  Eigen::MatrixXd cov = cross / n_obs - mean * mean.transpose();
  Eigen::VectorXd sd(v);
  std::vector<bool> degenerate(static_cast<std::size_t>(v), false);
  for (Eigen::Index i = 0; i < v; ++i) {
    const double var = std::max(0.0, cov(i, i));
    sd(i) = std::sqrt(var);
    degenerate[static_cast<std::size_t>(i)] =
        sd(i) <= 1e-12 * std::max(1.0, std::abs(mean(i)));
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < v; ++i) {
    for (Eigen::Index j = i + 1; j < v; ++j) {
      if (degenerate[static_cast<std::size_t>(i)] ||
          degenerate[static_cast<std::size_t>(j)]) {
        continue;
      }
      const double rho = cov(i, j) / (sd(i) * sd(j));
      total += std::min(1.0, std::abs(rho));
    }
  }
  const double n_pairs = static_cast<double>(v) * static_cast<double>(v - 1) / 2.0;
  return total / n_pairs;
}

double correlation_of_reals(const std::vector<Eigen::MatrixXd>& samples,
                            CorrelationView view) {
  if (samples.size() < 3) {
    throw InsufficientSamplesError("correlation estimate requires at least 3 samples");
  }
  const Eigen::Index t = samples.front().rows();
  const Eigen::Index n = samples.front().cols();

  switch (view) {
    case CorrelationView::Temporal: {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(t);
      Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(t, t);
      for (const auto& s : samples) {
        sum += s.rowwise().sum();
        cross.selfadjointView<Eigen::Lower>().rankUpdate(s);
      }
      cross.triangularView<Eigen::StrictlyUpper>() =
          cross.transpose().triangularView<Eigen::StrictlyUpper>();
      return rho_bar_from_moments(sum, cross,
                                  static_cast<double>(samples.size()) * static_cast<double>(n));
    }
    case CorrelationView::Spatial: {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
      Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(n, n);
      for (const auto& s : samples) {
        sum += s.colwise().sum().transpose();
        cross.selfadjointView<Eigen::Lower>().rankUpdate(s.transpose());
      }
      cross.triangularView<Eigen::StrictlyUpper>() =
          cross.transpose().triangularView<Eigen::StrictlyUpper>();
      return rho_bar_from_moments(sum, cross,
                                  static_cast<double>(samples.size()) * static_cast<double>(t));
    }
    case CorrelationView::Joint: {
      const Eigen::Index v = t * n;
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(v);
      Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(v, v);
      for (const auto& s : samples) {
        const Eigen::VectorXd flat = s.reshaped();
        sum += flat;
        cross.selfadjointView<Eigen::Lower>().rankUpdate(flat);
      }
      cross.triangularView<Eigen::StrictlyUpper>() =
          cross.transpose().triangularView<Eigen::StrictlyUpper>();
      return rho_bar_from_moments(sum, cross, static_cast<double>(samples.size()));
    }
  }
  return 0.0;
}

}  // namespace

double mean_offdiag_abs_correlation(const std::vector<Eigen::MatrixXd>& samples,
                                    CorrelationView view) {
  return correlation_of_reals(samples, view);
}

double mean_offdiag_abs_correlation(const std::vector<Eigen::MatrixXcd>& samples,
                                    CorrelationView view) {
  bool all_real = true;
  for (const auto& s : samples) {
    if (!(s.imag().array() == 0.0).all()) {
      all_real = false;
      break;
    }
  }
  std::vector<Eigen::MatrixXd> reduced;
  reduced.reserve(samples.size());
  for (const auto& s : samples) {
    reduced.push_back(all_real ? Eigen::MatrixXd(s.real()) : Eigen::MatrixXd(s.cwiseAbs()));
  }
  return correlation_of_reals(reduced, view);
}

double mean_offdiag_abs_correlation(const SampleEnsemble& ensemble,
                                    CorrelationView view) {
  ensemble.validate();
  return correlation_of_reals(ensemble.samples, view);
}

std::array<CorrelationReport, 4> decorrelation_table(const SampleEnsemble& ensemble,
                                                     const GraphSpectrum& spectrum) {
  ensemble.validate();
  if (ensemble.n_nodes() != spectrum.n_nodes()) {
    throw InvalidInputError("decorrelation_table: ensemble and spectrum disagree on N");
  }

  std::array<CorrelationReport, 4> table;
  const std::array<SpectralDomain, 4> domains = {
      SpectralDomain::Raw, SpectralDomain::Fft, SpectralDomain::Gft, SpectralDomain::Jft};

  for (std::size_t d = 0; d < domains.size(); ++d) {
    std::vector<Eigen::MatrixXcd> transformed;
    transformed.reserve(ensemble.samples.size());
    for (const auto& s : ensemble.samples) {
      SpatioTemporalSignal sig{s};
      switch (domains[d]) {
        case SpectralDomain::Raw:
          transformed.push_back(as_spectral(sig).values);
          break;
        case SpectralDomain::Fft:
          transformed.push_back(fft_time(sig).values);
          break;
        case SpectralDomain::Gft:
          transformed.push_back(gft_space(sig, spectrum).values);
          break;
        case SpectralDomain::Jft:
          transformed.push_back(jft(sig, spectrum).values);
          break;
      }
    }
    table[d].domain = domains[d];
    table[d].rho_temporal = mean_offdiag_abs_correlation(transformed, CorrelationView::Temporal);
    table[d].rho_spatial = mean_offdiag_abs_correlation(transformed, CorrelationView::Spatial);
    table[d].rho_joint = mean_offdiag_abs_correlation(transformed, CorrelationView::Joint);
  }
  return table;
}

std::vector<int> raster_ordering(Eigen::Index t_len, Eigen::Index n_nodes) {
  std::vector<int> order(static_cast<std::size_t>(t_len * n_nodes));
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  return order;
}

namespace {

// Plain Cholesky; throws DecompositionError on a non-positive pivot.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& spd) {
  const Eigen::Index k = spd.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    double diag = spd(j, j);
    for (Eigen::Index m = 0; m < j; ++m) diag -= l(j, m) * l(j, m);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw DecompositionError("covariance is not positive definite");
    }
    l(j, j) = std::sqrt(diag);
    for (Eigen::Index i = j + 1; i < k; ++i) {
      double v = spd(i, j);
      for (Eigen::Index m = 0; m < j; ++m) v -= l(i, m) * l(j, m);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

}  // namespace

GaussianFactorization gaussian_factorize(const Eigen::MatrixXd& covariance,
                                         const std::vector<int>& ordering) {
  const Eigen::Index k = covariance.rows();
  if (k < 1 || covariance.cols() != k) {
    throw InvalidInputError("gaussian_factorize: covariance must be square");
  }
  if (!covariance.allFinite()) {
    throw InvalidInputError("gaussian_factorize: covariance has non-finite entries");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw InvalidInputError("gaussian_factorize: covariance not symmetric within 1e-8");
  }
  if (static_cast<Eigen::Index>(ordering.size()) != k) {
    throw InvalidInputError("gaussian_factorize: ordering size mismatch");
  }
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (int idx : ordering) {
    if (idx < 0 || idx >= k || seen[static_cast<std::size_t>(idx)]) {
      throw InvalidInputError("gaussian_factorize: ordering is not a permutation");
    }
    seen[static_cast<std::size_t>(idx)] = true;
  }

  Eigen::MatrixXd permuted(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      permuted(a, b) = covariance(ordering[static_cast<std::size_t>(a)],
                                  ordering[static_cast<std::size_t>(b)]);
    }
  }

  GaussianFactorization fact;
  fact.ordering = ordering;
  fact.cholesky_lower = cholesky_lower(permuted);
  fact.residual_variances.resize(k);
  fact.marginal_variances.resize(k);
  fact.cumulative_strengths.resize(k);
  fact.parent_coefficients.resize(static_cast<std::size_t>(k));

  const Eigen::MatrixXd& l = fact.cholesky_lower;
  for (Eigen::Index idx = 0; idx < k; ++idx) {
    const double resid = l(idx, idx) * l(idx, idx);
    const double marginal = permuted(idx, idx);
    fact.residual_variances(idx) = resid;
    fact.marginal_variances(idx) = marginal;
    fact.cumulative_strengths(idx) = std::max(0.0, 1.0 - resid / marginal);

    // Regression of variable idx on its predecessors: two triangular solves
    // against the leading idx x idx Cholesky block.
    Eigen::VectorXd coeffs(idx);
    if (idx > 0) {
      const Eigen::VectorXd rhs = permuted.block(0, idx, idx, 1);
      const auto lead = l.topLeftCorner(idx, idx);
      const Eigen::VectorXd u = lead.triangularView<Eigen::Lower>().solve(rhs);
      coeffs = lead.triangularView<Eigen::Lower>().transpose().solve(u);
    }
    fact.parent_coefficients[static_cast<std::size_t>(idx)] = std::move(coeffs);
  }
  return fact;
}

BiasEstimate estimate_df_bias(const Eigen::MatrixXd& covariance,
                              const std::vector<int>& ordering,
                              int n_samples, double sigma_sq, std::uint64_t seed,
                              const Eigen::VectorXd* predictor) {
  if (n_samples < 100) {
    throw InsufficientSamplesError("estimate_df_bias: need at least 100 samples");
  }
  if (!(sigma_sq > 0.0)) {
    throw InvalidParameterError("estimate_df_bias: sigma_sq must be positive");
  }
  const GaussianFactorization fact = gaussian_factorize(covariance, ordering);
  const Eigen::Index k = covariance.rows();

  Eigen::VectorXd yhat = Eigen::VectorXd::Zero(k);
  if (predictor != nullptr) {
    if (predictor->size() != k) {
      throw InvalidInputError("estimate_df_bias: predictor size mismatch");
    }
    for (Eigen::Index a = 0; a < k; ++a) {
      yhat(a) = (*predictor)(fact.ordering[static_cast<std::size_t>(a)]);
    }
  }

  // Gaussian log-variance normalizers; the exact expectation of the bias.
  double log_gap = 0.0;
  for (Eigen::Index a = 0; a < k; ++a) {
    log_gap -= 0.5 * std::log1p(-fact.cumulative_strengths(a));
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  Eigen::VectorXd z(k), y(k);
  for (int m = 0; m < n_samples; ++m) {
    CounterRng rng(seed, static_cast<std::uint64_t>(m));
    for (Eigen::Index a = 0; a < k; ++a) z(a) = rng.normal();
    y.noalias() = fact.cholesky_lower.template triangularView<Eigen::Lower>() * z;

    double mse_term = 0.0;
    double nll_term = 0.0;
    for (Eigen::Index a = 0; a < k; ++a) {
      const double e = y(a) - yhat(a);
      mse_term += e * e / (2.0 * sigma_sq);
      double resid = e;
      const Eigen::VectorXd& b = fact.parent_coefficients[static_cast<std::size_t>(a)];
      for (Eigen::Index p = 0; p < a; ++p) resid -= b(p) * (y(p) - yhat(p));
      nll_term += resid * resid /
                  (2.0 * sigma_sq * (1.0 - fact.cumulative_strengths(a)));
    }
    const double bias = mse_term - nll_term + log_gap;
    sum += bias;
    sum_sq += bias * bias;
  }

  BiasEstimate est;
  const double n = static_cast<double>(n_samples);
  est.bias_mean = sum / n;
  const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
  est.bias_stderr = std::sqrt(var / n);
  est.analytic_mean = log_gap;
  est.cumulative_strengths = fact.cumulative_strengths;
  return est;
}

}  // namespace frest
