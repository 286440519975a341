#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "frest/analysis.hpp"
#include "frest/graph.hpp"

namespace frest {

/// Scalar spectral profile over graph frequencies; must be positive on every
/// eigenvalue it is evaluated at.
using SpectralProfile = std::function<double(double lambda)>;

/// Joint profile over (temporal frequency index k, graph frequency lambda).
/// Real output signals force p(k, .) == p(T-k, .); generators evaluate the
/// profile at the folded index min(k, T-k) so symmetry holds by construction.
using JointProfile = std::function<double(int folded_k, double lambda)>;

struct Ar1Spec {
  double rho = 0.0;  // |rho| < 1; rho = 0 is white noise
  Eigen::Index t_len = 1;
  Eigen::Index n_nodes = 1;
  Eigen::Index n_samples = 1;
  std::uint64_t seed = 0;
};

/// Independent per-node AR(1) columns with unit-variance innovations and the
/// stationary initialization Var(y_1) = 1 / (1 - rho^2).
SampleEnsemble gen_temporal_ar1(const Ar1Spec& spec);

struct StationarySpec {
  Eigen::Index t_len = 1;
  Eigen::Index n_samples = 1;
  std::uint64_t seed = 0;
};

/// Time slices drawn independently as y = U diag(sqrt(h(lambda))) w with
/// standard normal w: the population spatial covariance is U diag(h) U^T, so
/// the GFT diagonalizes it exactly (not just asymptotically).
SampleEnsemble gen_graph_stationary(const StationarySpec& spec,
                                    const SpectralProfile& profile,
                                    const GraphSpectrum& spectrum);

/// Samples the joint spectrum directly: independent complex-normal entries
/// of variance p(k, lambda) under the conjugate-symmetry constraint in k
/// (k = 0 and k = T/2 forced real), inverted back to a real T x N signal.
/// The population joint covariance is diagonal in the JFT basis by
/// construction.
SampleEnsemble gen_joint_stationary(const StationarySpec& spec,
                                    const JointProfile& profile,
                                    const GraphSpectrum& spectrum);

struct Impulse {
  Eigen::Index time = 0;
  Eigen::Index node = 0;
  double magnitude = 1.0;
};

struct DiffusionWaveSpec {
  double eta = 0.1;       // diffusion rate; requires eta * lambda_max < 1
  double noise_std = 0.0; // innovation noise per step
  std::vector<Impulse> impulses;
  Eigen::Index t_len = 1;
  Eigen::Index n_samples = 1;
  std::uint64_t seed = 0;
};

/// Graph diffusion y_t = (I - eta L) y_{t-1} + impulses_t + noise: a
/// non-stationary stressor with strong cross-spatio-temporal correlation.
/// Impulses scheduled at time t enter the state at time t, so an impulse at
/// node v reaches its 2-hop neighbours exactly two rows later.
SampleEnsemble gen_diffusion_wave(const DiffusionWaveSpec& spec, const Graph& graph);

/// Convenience for training data: a single long diffusion-wave run with an
/// impulse of the given magnitude at a pseudo-random node every
/// `impulse_period` steps.
Eigen::MatrixXd gen_diffusion_series(const Graph& graph, Eigen::Index length,
                                     double eta, double noise_std,
                                     Eigen::Index impulse_period,
                                     double impulse_magnitude, std::uint64_t seed);

}  // namespace frest
