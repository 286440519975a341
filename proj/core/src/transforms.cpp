#include "frest/transforms.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "frest/errors.hpp"

namespace frest {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place, unnormalized forward transform.
void fft_radix2_inplace(Eigen::Ref<Eigen::VectorXcd> a) {
  const Eigen::Index n = a.size();
  for (Eigen::Index i = 1, j = 0; i < n; ++i) {
    Eigen::Index bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a(i), a(j));
  }
  std::vector<std::complex<double>> twiddle;
  for (Eigen::Index len = 2; len <= n; len <<= 1) {
    const Eigen::Index half = len / 2;
    twiddle.resize(static_cast<std::size_t>(half));
    for (Eigen::Index j = 0; j < half; ++j) {
      twiddle[static_cast<std::size_t>(j)] =
          std::polar(1.0, -kTwoPi * static_cast<double>(j) / static_cast<double>(len));
    }
    for (Eigen::Index i = 0; i < n; i += len) {
      for (Eigen::Index j = 0; j < half; ++j) {
        const std::complex<double> u = a(i + j);
        const std::complex<double> v = a(i + j + half) * twiddle[static_cast<std::size_t>(j)];
        a(i + j) = u + v;
        a(i + j + half) = u - v;
      }
    }
  }
}

void require_dimension_match(Eigen::Index signal_nodes, const GraphSpectrum& spectrum) {
  if (signal_nodes != spectrum.n_nodes()) {
    throw InvalidInputError("graph transform: signal has " +
                            std::to_string(signal_nodes) + " nodes but spectrum has " +
                            std::to_string(spectrum.n_nodes()));
  }
}

// Right-multiplication by a real matrix, keeping exactly-zero imaginary parts
// exact (so real-valued spectra stay recognizably real).
Eigen::MatrixXcd right_multiply_real(const Eigen::MatrixXcd& m, const Eigen::MatrixXd& r) {
  Eigen::MatrixXcd out(m.rows(), r.cols());
  out.real() = m.real() * r;
  out.imag() = m.imag() * r;
  return out;
}

}  // namespace

void SpatioTemporalSignal::validate() const {
  if (values.rows() < 1 || values.cols() < 1) {
    throw InvalidInputError("signal must have T >= 1 and N >= 1");
  }
  if (!values.allFinite()) {
    throw InvalidInputError("signal contains non-finite entries");
  }
}

SpectralSignal as_spectral(const SpatioTemporalSignal& sig) {
  sig.validate();
  SpectralSignal out;
  out.values = Eigen::MatrixXcd::Zero(sig.t_len(), sig.n_nodes());
  out.values.real() = sig.values;
  return out;
}

Eigen::MatrixXcd dft_matrix(Eigen::Index t_len) {
  Eigen::MatrixXcd f(t_len, t_len);
  for (Eigen::Index k = 0; k < t_len; ++k) {
    for (Eigen::Index n = 0; n < t_len; ++n) {
      // Reduce k*n mod T before forming the angle to keep large products accurate.
      const Eigen::Index kn = (k * n) % t_len;
      f(k, n) = std::polar(1.0, -kTwoPi * static_cast<double>(kn) / static_cast<double>(t_len));
    }
  }
  return f;
}

namespace detail {

namespace {

// Training evaluates the same-length DFT thousands of times; memoize the
// dense matrix for the non-power-of-two path.
const Eigen::MatrixXcd& cached_dft_matrix(Eigen::Index t) {
  static std::mutex mutex;
  static std::unordered_map<Eigen::Index, Eigen::MatrixXcd> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(t);
  if (it == cache.end()) {
    it = cache.emplace(t, dft_matrix(t)).first;
  }
  return it->second;
}

}  // namespace

Eigen::MatrixXcd dft_columns(const Eigen::MatrixXcd& m) {
  const Eigen::Index t = m.rows();
  if (t == 1) return m;
  if (is_power_of_two(t)) {
    Eigen::MatrixXcd out = m;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      fft_radix2_inplace(out.col(c));
    }
    return out;
  }
  return cached_dft_matrix(t) * m;
}

Eigen::MatrixXcd idft_columns(const Eigen::MatrixXcd& m) {
  // (1/T) F^H x = conj(F conj(x)) / T
  Eigen::MatrixXcd out = dft_columns(m.conjugate()).conjugate();
  out /= static_cast<double>(m.rows());
  return out;
}

}  // namespace detail

SpectralSignal fft_time(const SpectralSignal& sig) {
  if (sig.time_transformed) {
    throw StateError("fft_time: time axis is already transformed");
  }
  SpectralSignal out;
  out.values = detail::dft_columns(sig.values);
  out.time_transformed = true;
  out.graph_transformed = sig.graph_transformed;
  return out;
}

SpectralSignal fft_time(const SpatioTemporalSignal& sig) {
  return fft_time(as_spectral(sig));
}

SpectralSignal ifft_time(const SpectralSignal& sig) {
  if (!sig.time_transformed) {
    throw StateError("ifft_time: time axis is not transformed");
  }
  SpectralSignal out;
  out.values = detail::idft_columns(sig.values);
  out.time_transformed = false;
  out.graph_transformed = sig.graph_transformed;
  return out;
}

SpectralSignal gft_space(const SpectralSignal& sig, const GraphSpectrum& spectrum) {
  if (sig.graph_transformed) {
    throw StateError("gft_space: graph axis is already transformed");
  }
  require_dimension_match(sig.n_nodes(), spectrum);
  SpectralSignal out;
  out.values = right_multiply_real(sig.values, spectrum.eigenvectors);
  out.time_transformed = sig.time_transformed;
  out.graph_transformed = true;
  return out;
}

SpectralSignal gft_space(const SpatioTemporalSignal& sig, const GraphSpectrum& spectrum) {
  return gft_space(as_spectral(sig), spectrum);
}

SpectralSignal igft_space(const SpectralSignal& sig, const GraphSpectrum& spectrum) {
  if (!sig.graph_transformed) {
    throw StateError("igft_space: graph axis is not transformed");
  }
  require_dimension_match(sig.n_nodes(), spectrum);
  SpectralSignal out;
  out.values = right_multiply_real(sig.values, spectrum.eigenvectors.transpose());
  out.time_transformed = sig.time_transformed;
  out.graph_transformed = false;
  return out;
}

SpectralSignal jft(const SpatioTemporalSignal& sig, const GraphSpectrum& spectrum) {
  return fft_time(gft_space(sig, spectrum));
}

}  // namespace frest
