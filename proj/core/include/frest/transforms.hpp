#pragma once

#include <Eigen/Dense>

#include "frest/graph.hpp"

namespace frest {

/// Real T x N signal: rows are time steps, columns are nodes.
struct SpatioTemporalSignal {
  Eigen::MatrixXd values;

  Eigen::Index t_len() const { return values.rows(); }
  Eigen::Index n_nodes() const { return values.cols(); }

  /// Throws InvalidInputError unless all entries are finite and T, N >= 1.
  void validate() const;
};

/// Complex T x N signal carrying explicit transform state, so applying the
/// same transform twice is a detectable error instead of silent corruption.
struct SpectralSignal {
  Eigen::MatrixXcd values;
  bool time_transformed = false;
  bool graph_transformed = false;

  Eigen::Index t_len() const { return values.rows(); }
  Eigen::Index n_nodes() const { return values.cols(); }
};

/// Lift a real signal into spectral form with no axis transformed.
SpectralSignal as_spectral(const SpatioTemporalSignal& sig);

/// Unnormalized temporal DFT: each column is multiplied by F with entries
/// F(k, n) = exp(-i 2 pi k n / T). A radix-2 path is used for power-of-two T;
/// both paths match the matrix definition.
SpectralSignal fft_time(const SpectralSignal& sig);
SpectralSignal fft_time(const SpatioTemporalSignal& sig);

/// Inverse of fft_time: applies (1/T) F^H per column.
SpectralSignal ifft_time(const SpectralSignal& sig);

/// Graph Fourier transform: each time slice y (a row, read as a column
/// vector of node values) becomes U^T y, i.e. values -> values * U.
SpectralSignal gft_space(const SpectralSignal& sig, const GraphSpectrum& spectrum);
SpectralSignal gft_space(const SpatioTemporalSignal& sig, const GraphSpectrum& spectrum);

/// Inverse graph Fourier transform: values -> values * U^T.
SpectralSignal igft_space(const SpectralSignal& sig, const GraphSpectrum& spectrum);

/// Joint transform F * Y * U; equal to fft_time(gft_space(Y)) and to
/// gft_space(fft_time(Y)) because the two operators act on different axes.
SpectralSignal jft(const SpatioTemporalSignal& sig, const GraphSpectrum& spectrum);

/// Dense DFT matrix, entries exp(-i 2 pi k n / T); the reference definition
/// all fast paths are required to match.
Eigen::MatrixXcd dft_matrix(Eigen::Index t_len);

namespace detail {

/// Forward DFT applied to every column of a bare matrix (no state tracking).
Eigen::MatrixXcd dft_columns(const Eigen::MatrixXcd& m);

/// Inverse DFT, (1/T) F^H, applied to every column of a bare matrix.
Eigen::MatrixXcd idft_columns(const Eigen::MatrixXcd& m);

}  // namespace detail

}  // namespace frest
