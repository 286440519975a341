#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>

#include "frest/graph.hpp"

namespace frest {

enum class SpectralComponent { Fft = 0, Gft = 1, Jft = 2 };

/// How the detached magnitude s_k in L~_k = L_k / (s_k + epsilon) is formed:
/// the component's current value each step, or a running average kept by the
/// training loop and passed in through `stopgrad_values`.
enum class NormalizationMode { PerStepStopgrad, EmaStopgrad };

/// l1 norm of a complex entry: |z|, or |Re z| + |Im z|. The modulus is the
/// default; since published descriptions leave complex l1 ambiguous, the
/// alternative is kept behind this switch (it changes loss values).
enum class ComplexL1 { Modulus, RealImag };

struct LossConfig {
  double alpha = 0.5;                       // time/frequency balance, in [0, 1]
  Eigen::Vector3d mixing_logits{0.0, 0.0, 0.0};  // softmax gives component weights
  double epsilon = 1e-8;                    // guard in the stop-grad normalizer
  NormalizationMode normalization = NormalizationMode::PerStepStopgrad;
  double ema_decay = 0.99;                  // used by EmaStopgrad only
  ComplexL1 complex_l1 = ComplexL1::Modulus;
  std::array<bool, 3> components{true, true, true};  // fft, gft, jft mask

  bool component_enabled(SpectralComponent c) const {
    return components[static_cast<std::size_t>(c)];
  }
  /// Throws InvalidParameterError on out-of-range values, or when alpha > 0
  /// with every spectral component masked out.
  void validate() const;
};

struct LossEvaluation {
  double total = 0.0;
  double l_time = 0.0;
  double l_fft = 0.0;
  double l_gft = 0.0;
  double l_jft = 0.0;
  Eigen::Vector3d weights_w{0.0, 0.0, 0.0};  // softmax weights, zero where masked
  Eigen::MatrixXd grad_prediction;            // d total / d y_pred
  Eigen::Vector3d grad_mixing{0.0, 0.0, 0.0};

  Eigen::Vector3d component_values() const { return {l_fft, l_gft, l_jft}; }
};

/// Pointwise MSE over the horizon: |Y - Yhat|_F^2 / (N * H).
double l_time(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred);

/// Gradient of l_time with respect to the prediction: (2 / (N H)) (Yhat - Y).
Eigen::MatrixXd l_time_gradient(const Eigen::MatrixXd& y_true,
                                const Eigen::MatrixXd& y_pred);

/// Spectral discrepancy: sum over all entries of the complex l1 norm of
/// Transform(Yhat) - Transform(Y). No size normalization; the stop-grad
/// normalization in the combined loss makes absolute scale irrelevant.
/// The spectrum may be null for the FFT component.
double spectral_l1(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred,
                   SpectralComponent component, const GraphSpectrum* spectrum,
                   ComplexL1 convention = ComplexL1::Modulus);

/// Exact subgradient of spectral_l1 with respect to the prediction, obtained
/// by pushing the unit-phase field through the adjoint of the transform.
/// Entries whose spectral difference is exactly zero get subgradient zero.
Eigen::MatrixXd spectral_l1_gradient(const Eigen::MatrixXd& y_true,
                                     const Eigen::MatrixXd& y_pred,
                                     SpectralComponent component,
                                     const GraphSpectrum* spectrum,
                                     ComplexL1 convention = ComplexL1::Modulus);

/// Full composite objective
///
///   total = (1 - alpha) * l_time + alpha * sum_k w_k * L_k / (s_k + eps),
///   w = softmax(mixing_logits) over the enabled components,
///
/// with exact analytic gradients for the prediction and the mixing logits.
/// The detached magnitudes s_k are the current component values under
/// per-step normalization, or `stopgrad_values` when provided (the EMA mode);
/// they are held constant during differentiation.
LossEvaluation frest_loss(const Eigen::MatrixXd& y_true,
                          const Eigen::MatrixXd& y_pred,
                          const LossConfig& cfg, const GraphSpectrum& spectrum,
                          const std::optional<Eigen::Vector3d>& stopgrad_values = std::nullopt);

std::string to_string(NormalizationMode mode);
std::string to_string(ComplexL1 convention);
std::string to_string(SpectralComponent component);

}  // namespace frest
