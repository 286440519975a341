#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "frest/graph.hpp"

namespace frest {

/// Collection of equally shaped T x N sample matrices.
struct SampleEnsemble {
  std::vector<Eigen::MatrixXd> samples;

  Eigen::Index size() const { return static_cast<Eigen::Index>(samples.size()); }
  Eigen::Index t_len() const { return samples.empty() ? 0 : samples.front().rows(); }
  Eigen::Index n_nodes() const { return samples.empty() ? 0 : samples.front().cols(); }

  /// Throws InvalidInputError unless M >= 2, shapes are uniform and finite.
  void validate() const;
};

enum class CorrelationView { Temporal, Spatial, Joint };
enum class SpectralDomain { Raw, Fft, Gft, Jft };

std::string to_string(CorrelationView view);
std::string to_string(SpectralDomain domain);

/// Mean off-diagonal absolute Pearson correlation over the view's variables.
///
/// Views: Temporal treats the T rows as variables with observations pooled
/// over samples and nodes; Spatial treats the N columns as variables pooled
/// over samples and time steps; Joint flattens all T*N entries with one
/// observation per sample. Zero-variance variables contribute 0 to their
/// pairs, and a single-variable view is 0 by definition. Requires M >= 3.
double mean_offdiag_abs_correlation(const std::vector<Eigen::MatrixXd>& samples,
                                    CorrelationView view);

/// Complex overload. Genuinely complex spectra are reduced to their modulus;
/// when every imaginary part is exactly zero (e.g. the GFT of a real signal)
/// the signed real values are used, matching a real-domain analysis.
double mean_offdiag_abs_correlation(const std::vector<Eigen::MatrixXcd>& samples,
                                    CorrelationView view);

double mean_offdiag_abs_correlation(const SampleEnsemble& ensemble,
                                    CorrelationView view);

/// One row of the 4 x 3 decorrelation table.
struct CorrelationReport {
  SpectralDomain domain = SpectralDomain::Raw;
  double rho_temporal = 0.0;
  double rho_spatial = 0.0;
  double rho_joint = 0.0;
};

/// Applies {identity, FFT, GFT, JFT} to every sample and computes all three
/// correlation views per domain: the 12-cell table of the correlation study.
std::array<CorrelationReport, 4> decorrelation_table(const SampleEnsemble& ensemble,
                                                     const GraphSpectrum& spectrum);

/// Sequential Gaussian factorization of a covariance matrix: for each
/// variable in `ordering`, the regression coefficients on its predecessors
/// ("parents"), the residual variance, and the cumulative correlation
/// strength P^2 = 1 - residual/marginal. Computed via a Cholesky
/// factorization of the permuted covariance.
struct GaussianFactorization {
  std::vector<int> ordering;
  std::vector<Eigen::VectorXd> parent_coefficients;  // k-th has length k
  Eigen::VectorXd residual_variances;
  Eigen::VectorXd marginal_variances;
  Eigen::VectorXd cumulative_strengths;  // P^2 per ordered index, in [0, 1)
  Eigen::MatrixXd cholesky_lower;        // L with permuted_cov = L L^T
};

GaussianFactorization gaussian_factorize(const Eigen::MatrixXd& covariance,
                                         const std::vector<int>& ordering);

/// Time-major ordering of the T*N space-time indices: (i, n) precedes
/// (i', n') iff i < i' or (i == i' and n < n'). For a covariance laid out
/// time-major this is the identity permutation.
std::vector<int> raster_ordering(Eigen::Index t_len, Eigen::Index n_nodes);

struct BiasEstimate {
  double bias_mean = 0.0;
  double bias_stderr = 0.0;
  /// Exact expectation of the estimator: -1/2 sum log(1 - P^2_k).
  double analytic_mean = 0.0;
  Eigen::VectorXd cumulative_strengths;
};

/// Monte-Carlo estimate of the gap between the isotropic-Gaussian objective
/// implied by pointwise MSE training and the sequentially factorized
/// negative log-likelihood of correlated data.
///
/// Draws `n_samples` zero-mean Gaussians with the given covariance and
/// evaluates, per sample, the difference of the two per-variable NLLs: the
/// MSE-style term sums (y_k - yhat_k)^2 / (2 sigma_sq) and the factorized
/// term sums (y_k - mu_k|parents)^2 / (2 sigma_sq (1 - P^2_k)), each with its
/// Gaussian log-variance normalizer (the normalizers contribute the strictly
/// positive -1/2 sum log(1 - P^2_k) whenever any correlation is present).
/// `predictor`, when given, replaces the zero unconditional mean.
BiasEstimate estimate_df_bias(const Eigen::MatrixXd& covariance,
                              const std::vector<int>& ordering,
                              int n_samples, double sigma_sq, std::uint64_t seed,
                              const Eigen::VectorXd* predictor = nullptr);

}  // namespace frest
