#include "frest/loss.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "frest/errors.hpp"
#include "frest/transforms.hpp"

namespace frest {

void LossConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidParameterError("loss config: alpha must lie in [0, 1]");
  }
  if (!(epsilon > 0.0)) {
    throw InvalidParameterError("loss config: epsilon must be positive");
  }
  if (normalization == NormalizationMode::EmaStopgrad &&
      !(ema_decay > 0.0 && ema_decay < 1.0)) {
    throw InvalidParameterError("loss config: ema decay must lie in (0, 1)");
  }
  if (!mixing_logits.allFinite()) {
    throw InvalidParameterError("loss config: mixing logits must be finite");
  }
  const bool any = components[0] || components[1] || components[2];
  if (alpha > 0.0 && !any) {
    throw InvalidParameterError("loss config: alpha > 0 requires at least one spectral component");
  }
}

namespace {

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInputError("loss: prediction and target shapes differ");
  }
  if (a.rows() < 1 || a.cols() < 1) {
    throw InvalidInputError("loss: matrices must be at least 1 x 1");
  }
}

Eigen::MatrixXcd apply_component(const Eigen::MatrixXd& delta,
                                 SpectralComponent component,
                                 const GraphSpectrum* spectrum) {
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(delta.rows(), delta.cols());
  z.real() = delta;
  switch (component) {
    case SpectralComponent::Fft:
      return detail::dft_columns(z);
    case SpectralComponent::Gft: {
      Eigen::MatrixXcd out(z.rows(), z.cols());
      out.real() = delta * spectrum->eigenvectors;
      out.imag().setZero();
      return out;
    }
    case SpectralComponent::Jft: {
      Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(delta.rows(), delta.cols());
      g.real() = delta * spectrum->eigenvectors;
      return detail::dft_columns(g);
    }
  }
  return z;
}

double complex_l1_value(const Eigen::MatrixXcd& z, ComplexL1 convention) {
  if (convention == ComplexL1::Modulus) {
    return z.cwiseAbs().sum();
  }
  return z.real().cwiseAbs().sum() + z.imag().cwiseAbs().sum();
}

// Unit-phase (or per-part sign) field: the derivative of the complex l1 norm
// at each spectral entry, zero where the entry is exactly zero.
Eigen::MatrixXcd l1_phase_field(const Eigen::MatrixXcd& z, ComplexL1 convention) {
  Eigen::MatrixXcd w(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const std::complex<double> v = z(i, j);
      if (convention == ComplexL1::Modulus) {
        const double mag = std::abs(v);
        w(i, j) = mag == 0.0 ? std::complex<double>(0.0, 0.0) : v / mag;
      } else {
        const double re = v.real() == 0.0 ? 0.0 : (v.real() > 0.0 ? 1.0 : -1.0);
        const double im = v.imag() == 0.0 ? 0.0 : (v.imag() > 0.0 ? 1.0 : -1.0);
        w(i, j) = std::complex<double>(re, im);
      }
    }
  }
  return w;
}

// Adjoint of the transform applied to the phase field: F^H W is T times the
// inverse DFT, and the graph factor transposes to U^T on the right.
Eigen::MatrixXd adjoint_to_prediction(const Eigen::MatrixXcd& w,
                                      SpectralComponent component,
                                      const GraphSpectrum* spectrum) {
  switch (component) {
    case SpectralComponent::Fft:
      return static_cast<double>(w.rows()) * detail::idft_columns(w).real();
    case SpectralComponent::Gft:
      return w.real() * spectrum->eigenvectors.transpose();
    case SpectralComponent::Jft: {
      const Eigen::MatrixXd fh = static_cast<double>(w.rows()) * detail::idft_columns(w).real();
      return fh * spectrum->eigenvectors.transpose();
    }
  }
  return Eigen::MatrixXd::Zero(w.rows(), w.cols());
}

void require_spectrum(SpectralComponent component, const GraphSpectrum* spectrum,
                      Eigen::Index n_nodes) {
  if (component == SpectralComponent::Fft) return;
  if (spectrum == nullptr) {
    throw InvalidInputError("spectral_l1: graph spectrum required for GFT/JFT");
  }
  if (spectrum->n_nodes() != n_nodes) {
    throw InvalidInputError("spectral_l1: spectrum and signal disagree on N");
  }
}

}  // namespace

double l_time(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred) {
  require_same_shape(y_true, y_pred);
  const double scale = static_cast<double>(y_true.rows()) * static_cast<double>(y_true.cols());
  return (y_true - y_pred).squaredNorm() / scale;
}

Eigen::MatrixXd l_time_gradient(const Eigen::MatrixXd& y_true,
                                const Eigen::MatrixXd& y_pred) {
  require_same_shape(y_true, y_pred);
  const double scale = static_cast<double>(y_true.rows()) * static_cast<double>(y_true.cols());
  return (2.0 / scale) * (y_pred - y_true);
}

double spectral_l1(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred,
                   SpectralComponent component, const GraphSpectrum* spectrum,
                   ComplexL1 convention) {
  require_same_shape(y_true, y_pred);
  require_spectrum(component, spectrum, y_true.cols());
  const Eigen::MatrixXd delta = y_pred - y_true;
  return complex_l1_value(apply_component(delta, component, spectrum), convention);
}

Eigen::MatrixXd spectral_l1_gradient(const Eigen::MatrixXd& y_true,
                                     const Eigen::MatrixXd& y_pred,
                                     SpectralComponent component,
                                     const GraphSpectrum* spectrum,
                                     ComplexL1 convention) {
  require_same_shape(y_true, y_pred);
  require_spectrum(component, spectrum, y_true.cols());
  const Eigen::MatrixXd delta = y_pred - y_true;
  const Eigen::MatrixXcd z = apply_component(delta, component, spectrum);
  return adjoint_to_prediction(l1_phase_field(z, convention), component, spectrum);
}

LossEvaluation frest_loss(const Eigen::MatrixXd& y_true,
                          const Eigen::MatrixXd& y_pred,
                          const LossConfig& cfg, const GraphSpectrum& spectrum,
                          const std::optional<Eigen::Vector3d>& stopgrad_values) {
  cfg.validate();
  require_same_shape(y_true, y_pred);
  if ((cfg.component_enabled(SpectralComponent::Gft) ||
       cfg.component_enabled(SpectralComponent::Jft)) &&
      spectrum.n_nodes() != y_true.cols()) {
    throw InvalidInputError("frest_loss: spectrum and signal disagree on N");
  }

  LossEvaluation eval;
  eval.l_time = l_time(y_true, y_pred);
  eval.grad_prediction = (1.0 - cfg.alpha) * l_time_gradient(y_true, y_pred);

  const Eigen::MatrixXd delta = y_pred - y_true;
  std::array<double, 3> values{0.0, 0.0, 0.0};
  std::array<Eigen::MatrixXcd, 3> phase_fields;
  for (int k = 0; k < 3; ++k) {
    const auto component = static_cast<SpectralComponent>(k);
    if (!cfg.component_enabled(component)) continue;
    const Eigen::MatrixXcd z = apply_component(delta, component, &spectrum);
    values[static_cast<std::size_t>(k)] = complex_l1_value(z, cfg.complex_l1);
    phase_fields[static_cast<std::size_t>(k)] = l1_phase_field(z, cfg.complex_l1);
  }
  eval.l_fft = values[0];
  eval.l_gft = values[1];
  eval.l_jft = values[2];

  // Softmax over the enabled logits; masked components keep weight zero.
  double max_logit = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (cfg.components[static_cast<std::size_t>(k)]) {
      max_logit = std::max(max_logit, cfg.mixing_logits(k));
    }
  }
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  double denom = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (!cfg.components[static_cast<std::size_t>(k)]) continue;
    w(k) = std::exp(cfg.mixing_logits(k) - max_logit);
    denom += w(k);
  }
  if (denom > 0.0) w /= denom;
  eval.weights_w = w;

  // Normalized components with the detached magnitudes held constant.
  Eigen::Vector3d normalized = Eigen::Vector3d::Zero();
  double l_freq = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (!cfg.components[static_cast<std::size_t>(k)]) continue;
    const double raw = values[static_cast<std::size_t>(k)];
    const double s = stopgrad_values ? (*stopgrad_values)(k) : raw;
    normalized(k) = raw / (s + cfg.epsilon);
    l_freq += w(k) * normalized(k);
  }

  eval.total = (1.0 - cfg.alpha) * eval.l_time;
  if (cfg.alpha != 0.0) {
    eval.total += cfg.alpha * l_freq;
    for (int k = 0; k < 3; ++k) {
      if (!cfg.components[static_cast<std::size_t>(k)]) continue;
      const double raw = values[static_cast<std::size_t>(k)];
      const double s = stopgrad_values ? (*stopgrad_values)(k) : raw;
      const double coeff = cfg.alpha * w(k) / (s + cfg.epsilon);
      eval.grad_prediction.noalias() +=
          coeff * adjoint_to_prediction(phase_fields[static_cast<std::size_t>(k)],
                                        static_cast<SpectralComponent>(k), &spectrum);
    }
    // Exact softmax Jacobian applied to alpha * normalized values.
    for (int k = 0; k < 3; ++k) {
      if (!cfg.components[static_cast<std::size_t>(k)]) continue;
      eval.grad_mixing(k) = cfg.alpha * w(k) * (normalized(k) - l_freq);
    }
  }
  return eval;
}

std::string to_string(NormalizationMode mode) {
  return mode == NormalizationMode::PerStepStopgrad ? "per-step-stopgrad" : "ema-stopgrad";
}

std::string to_string(ComplexL1 convention) {
  return convention == ComplexL1::Modulus ? "modulus" : "real-imag";
}

std::string to_string(SpectralComponent component) {
  switch (component) {
    case SpectralComponent::Fft: return "fft";
    case SpectralComponent::Gft: return "gft";
    case SpectralComponent::Jft: return "jft";
  }
  return "?";
}

}  // namespace frest
