#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "frest/graph.hpp"
#include "frest/loss.hpp"

namespace frest {

enum class WeightSharing { SharedAcrossNodes, PerNode };

/// Direct linear forecaster: an H x T map (plus bias) from the history
/// window to the full future block, either shared across nodes or one copy
/// per node.
struct LinearForecaster {
  WeightSharing sharing = WeightSharing::SharedAcrossNodes;
  std::vector<Eigen::MatrixXd> weights;  // H x T; one entry, or N in per-node mode
  std::vector<Eigen::VectorXd> biases;   // length H, matching weights

  Eigen::Index horizon() const { return weights.empty() ? 0 : weights.front().rows(); }
  Eigen::Index history_len() const { return weights.empty() ? 0 : weights.front().cols(); }

  /// Yhat = W X + b broadcast over columns (or W_n x_n + b_n per node).
  Eigen::MatrixXd forecast(const Eigen::MatrixXd& history) const;
};

/// Per-node z-score statistics, computed on the training split only.
struct NormalizationStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // floored so constant nodes stay finite

  Eigen::MatrixXd normalize(const Eigen::MatrixXd& raw) const;
  Eigen::MatrixXd denormalize(const Eigen::MatrixXd& normalized) const;
};

struct SignalWindow {
  Eigen::MatrixXd history;  // T x N
  Eigen::MatrixXd future;   // H x N
};

struct WindowedDataset {
  Eigen::Index history_len = 0;
  Eigen::Index horizon = 0;
  Eigen::Index n_nodes = 0;
  std::vector<SignalWindow> train;
  std::vector<SignalWindow> val;
  std::vector<SignalWindow> test;
  NormalizationStats stats;
};

/// Slices a long series (rows = time) into stride-1 windows and splits them
/// chronologically by the given ratios (which must sum to 1 within 1e-9).
/// At least one training window is always kept.
WindowedDataset make_windowed_dataset(const Eigen::MatrixXd& series,
                                      Eigen::Index history_len, Eigen::Index horizon,
                                      std::array<double, 3> split_ratios = {0.6, 0.2, 0.2});

struct Metrics {
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
};

enum class OptimizerKind { Sgd, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

enum class TrainingObjective { Mse, Frest };

struct TrainReport {
  std::vector<double> train_loss;  // per epoch, training objective
  std::vector<double> val_loss;    // per epoch; empty when there is no val split
  Metrics test;                    // denormalized; NaN when there is no test split
  int best_epoch = 0;              // 0-based epoch whose parameters were kept
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  /// FNV-1a checksum of all parameters after each epoch; equal sequences
  /// certify bit-identical trajectories.
  std::vector<std::uint64_t> parameter_checksums;
  Eigen::Vector3d mixing_logits_final{0.0, 0.0, 0.0};
  Eigen::Vector3d weights_final{0.0, 0.0, 0.0};
};

struct TrainResult {
  LinearForecaster model;
  TrainReport report;
};

/// Mini-batch training of the linear forecaster in normalized space.
///
/// Deterministic given (seed, configs, dataset): shuffling uses the counter
/// RNG and per-window gradients are reduced in ascending window order. With
/// the Frest objective the mixing logits are updated by the same optimizer
/// as the model weights; with alpha = 0 the parameter trajectory is
/// bit-identical to Mse training under the same seed.
TrainResult train(const WindowedDataset& dataset, TrainingObjective objective,
                  const LossConfig& loss_cfg, const OptimizerConfig& opt_cfg,
                  const GraphSpectrum& spectrum,
                  WeightSharing sharing = WeightSharing::SharedAcrossNodes);

/// MAE / MSE / RMSE over a window list, in denormalized units.
Metrics evaluate(const LinearForecaster& model, const std::vector<SignalWindow>& windows,
                 const NormalizationStats& stats);

struct SweepRow {
  std::string label;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  Metrics test;
};

/// Trains once per alpha with a fixed seed and reports test metrics per row.
std::vector<SweepRow> alpha_sweep(const WindowedDataset& dataset,
                                  const std::vector<double>& alphas,
                                  const LossConfig& base_cfg,
                                  const OptimizerConfig& opt_cfg,
                                  const GraphSpectrum& spectrum,
                                  WeightSharing sharing = WeightSharing::SharedAcrossNodes);

struct AblationRow {
  std::string label;
  TrainingObjective objective = TrainingObjective::Frest;
  LossConfig cfg;
};

/// The six standard component configurations: MSE, single components, the
/// FFT+GFT pair, and the full composite loss.
std::vector<AblationRow> standard_ablation_rows(const LossConfig& base_cfg);

}  // namespace frest
