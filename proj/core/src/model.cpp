#include "frest/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <optional>

#include "frest/errors.hpp"
#include "frest/rng.hpp"

namespace frest {

Eigen::MatrixXd LinearForecaster::forecast(const Eigen::MatrixXd& history) const {
  if (weights.empty()) {
    throw InvalidInputError("forecast: model has no parameters");
  }
  if (history.rows() != history_len()) {
    throw InvalidInputError("forecast: history has wrong number of rows");
  }
  if (sharing == WeightSharing::SharedAcrossNodes) {
    Eigen::MatrixXd out = weights.front() * history;
    out.colwise() += biases.front();
    return out;
  }
  if (static_cast<Eigen::Index>(weights.size()) != history.cols()) {
    throw InvalidInputError("forecast: per-node model does not match node count");
  }
  Eigen::MatrixXd out(horizon(), history.cols());
  for (Eigen::Index n = 0; n < history.cols(); ++n) {
    out.col(n) = weights[static_cast<std::size_t>(n)] * history.col(n) +
                 biases[static_cast<std::size_t>(n)];
  }
  return out;
}

Eigen::MatrixXd NormalizationStats::normalize(const Eigen::MatrixXd& raw) const {
  Eigen::MatrixXd out = raw;
  out.rowwise() -= mean.transpose();
  out.array().rowwise() /= stddev.transpose().array();
  return out;
}

Eigen::MatrixXd NormalizationStats::denormalize(const Eigen::MatrixXd& normalized) const {
  Eigen::MatrixXd out = normalized;
  out.array().rowwise() *= stddev.transpose().array();
  out.rowwise() += mean.transpose();
  return out;
}

WindowedDataset make_windowed_dataset(const Eigen::MatrixXd& series,
                                      Eigen::Index history_len, Eigen::Index horizon,
                                      std::array<double, 3> split_ratios) {
  if (history_len < 1 || horizon < 1) {
    throw InvalidParameterError("windowed dataset: T and H must be >= 1");
  }
  if (!series.allFinite()) {
    throw InvalidInputError("windowed dataset: series contains non-finite values");
  }
  const double ratio_sum = split_ratios[0] + split_ratios[1] + split_ratios[2];
  if (std::abs(ratio_sum - 1.0) > 1e-9 || split_ratios[0] < 0.0 ||
      split_ratios[1] < 0.0 || split_ratios[2] < 0.0) {
    throw InvalidParameterError("windowed dataset: split ratios must be >= 0 and sum to 1");
  }
  const Eigen::Index window_len = history_len + horizon;
  if (series.rows() < window_len) {
    throw InvalidInputError("windowed dataset: series shorter than one window");
  }

  const Eigen::Index total = series.rows() - window_len + 1;
  Eigen::Index n_train = static_cast<Eigen::Index>(
      std::floor(split_ratios[0] * static_cast<double>(total)));
  Eigen::Index n_val = static_cast<Eigen::Index>(
      std::floor(split_ratios[1] * static_cast<double>(total)));
  n_train = std::max<Eigen::Index>(1, n_train);
  n_val = std::min(n_val, total - n_train);
  const Eigen::Index n_test = total - n_train - n_val;

  WindowedDataset ds;
  ds.history_len = history_len;
  ds.horizon = horizon;
  ds.n_nodes = series.cols();
  for (Eigen::Index s = 0; s < total; ++s) {
    SignalWindow w{series.middleRows(s, history_len),
                   series.middleRows(s + history_len, horizon)};
    if (s < n_train) {
      ds.train.push_back(std::move(w));
    } else if (s < n_train + n_val) {
      ds.val.push_back(std::move(w));
    } else {
      ds.test.push_back(std::move(w));
    }
  }
  (void)n_test;

  // Per-node stats over the rows any training window can see.
  const Eigen::Index train_rows = (n_train - 1) + window_len;
  const auto train_block = series.topRows(train_rows);
  ds.stats.mean = train_block.colwise().mean().transpose();
  ds.stats.stddev.resize(series.cols());
  for (Eigen::Index n = 0; n < series.cols(); ++n) {
    const double var =
        (train_block.col(n).array() - ds.stats.mean(n)).square().mean();
    const double sd = std::sqrt(std::max(0.0, var));
    ds.stats.stddev(n) = sd < 1e-12 ? 1.0 : sd;
  }
  return ds;
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw InvalidParameterError("optimizer: learning rate must be positive");
  }
  if (epochs < 1) {
    throw InvalidParameterError("optimizer: epochs must be >= 1");
  }
  if (batch_size < 1) {
    throw InvalidParameterError("optimizer: batch size must be >= 1");
  }
}

namespace {

struct ParamBlock {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

struct AdamSlot {
  ParamBlock m;
  ParamBlock v;
  Eigen::Vector3d logits_m = Eigen::Vector3d::Zero();
  Eigen::Vector3d logits_v = Eigen::Vector3d::Zero();
};

std::uint64_t fnv1a_update(std::uint64_t h, const double* data, std::size_t count) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < count * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t checksum_params(const ParamBlock& p) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& w : p.w) {
    h = fnv1a_update(h, w.data(), static_cast<std::size_t>(w.size()));
  }
  for (const auto& b : p.b) {
    h = fnv1a_update(h, b.data(), static_cast<std::size_t>(b.size()));
  }
  return h;
}

void fisher_yates(std::vector<Eigen::Index>& indices, CounterRng& rng) {
  for (std::size_t i = indices.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(indices[i - 1], indices[j]);
  }
}

}  // namespace

TrainResult train(const WindowedDataset& dataset, TrainingObjective objective,
                  const LossConfig& loss_cfg, const OptimizerConfig& opt_cfg,
                  const GraphSpectrum& spectrum, WeightSharing sharing) {
  loss_cfg.validate();
  opt_cfg.validate();
  if (dataset.train.empty()) {
    throw InvalidInputError("train: training split is empty");
  }
  const auto start = std::chrono::steady_clock::now();

  const Eigen::Index t_len = dataset.history_len;
  const Eigen::Index horizon = dataset.horizon;
  const Eigen::Index n_nodes = dataset.n_nodes;
  const std::size_t n_param_sets =
      sharing == WeightSharing::SharedAcrossNodes ? 1 : static_cast<std::size_t>(n_nodes);

  // Small random weights so descent has somewhere to go; biases start at zero.
  ParamBlock params;
  params.w.resize(n_param_sets);
  params.b.resize(n_param_sets);
  {
    CounterRng init_rng(opt_cfg.seed, 0x1217u);
    for (auto& w : params.w) {
      w.resize(horizon, t_len);
      for (Eigen::Index j = 0; j < t_len; ++j) {
        for (Eigen::Index i = 0; i < horizon; ++i) {
          w(i, j) = 0.01 * init_rng.normal();
        }
      }
    }
    for (auto& b : params.b) b = Eigen::VectorXd::Zero(horizon);
  }
  Eigen::Vector3d logits = loss_cfg.mixing_logits;

  AdamSlot adam;
  adam.m.w.assign(n_param_sets, Eigen::MatrixXd::Zero(horizon, t_len));
  adam.m.b.assign(n_param_sets, Eigen::VectorXd::Zero(horizon));
  adam.v = adam.m;
  long adam_step = 0;

  // Pre-normalized copies of every split.
  auto normalize_windows = [&](const std::vector<SignalWindow>& src) {
    std::vector<SignalWindow> out;
    out.reserve(src.size());
    for (const auto& w : src) {
      out.push_back({dataset.stats.normalize(w.history), dataset.stats.normalize(w.future)});
    }
    return out;
  };
  const std::vector<SignalWindow> train_w = normalize_windows(dataset.train);
  const std::vector<SignalWindow> val_w = normalize_windows(dataset.val);

  std::optional<Eigen::Vector3d> ema;
  const bool use_ema = loss_cfg.normalization == NormalizationMode::EmaStopgrad;

  auto forecast_with = [&](const ParamBlock& p, const Eigen::MatrixXd& x) {
    if (sharing == WeightSharing::SharedAcrossNodes) {
      Eigen::MatrixXd out = p.w.front() * x;
      out.colwise() += p.b.front();
      return out;
    }
    Eigen::MatrixXd out(horizon, x.cols());
    for (Eigen::Index n = 0; n < x.cols(); ++n) {
      out.col(n) = p.w[static_cast<std::size_t>(n)] * x.col(n) +
                   p.b[static_cast<std::size_t>(n)];
    }
    return out;
  };

  auto window_loss = [&](const SignalWindow& w, Eigen::MatrixXd* grad_out,
                         Eigen::Vector3d* grad_logits_out,
                         Eigen::Vector3d* components_out) -> double {
    const Eigen::MatrixXd pred = forecast_with(params, w.history);
    if (objective == TrainingObjective::Mse) {
      if (grad_out != nullptr) *grad_out = l_time_gradient(w.future, pred);
      return l_time(w.future, pred);
    }
    LossConfig cfg = loss_cfg;
    cfg.mixing_logits = logits;
    const std::optional<Eigen::Vector3d> stopgrad = use_ema ? ema : std::nullopt;
    LossEvaluation eval = frest_loss(w.future, pred, cfg, spectrum, stopgrad);
    if (grad_out != nullptr) *grad_out = std::move(eval.grad_prediction);
    if (grad_logits_out != nullptr) *grad_logits_out = eval.grad_mixing;
    if (components_out != nullptr) *components_out = eval.component_values();
    return eval.total;
  };

  TrainReport report;
  report.seed = opt_cfg.seed;

  ParamBlock best_params = params;
  Eigen::Vector3d best_logits = logits;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  std::vector<Eigen::Index> order(train_w.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  ParamBlock grad;
  grad.w.assign(n_param_sets, Eigen::MatrixXd::Zero(horizon, t_len));
  grad.b.assign(n_param_sets, Eigen::VectorXd::Zero(horizon));

  for (int epoch = 0; epoch < opt_cfg.epochs; ++epoch) {
    CounterRng shuffle_rng(opt_cfg.seed, 0x5481u + static_cast<std::uint64_t>(epoch));
    fisher_yates(order, shuffle_rng);

    double epoch_loss_sum = 0.0;
    for (std::size_t head = 0; head < order.size();
         head += static_cast<std::size_t>(opt_cfg.batch_size)) {
      const std::size_t tail =
          std::min(order.size(), head + static_cast<std::size_t>(opt_cfg.batch_size));
      std::vector<Eigen::Index> batch(order.begin() + static_cast<std::ptrdiff_t>(head),
                                      order.begin() + static_cast<std::ptrdiff_t>(tail));
      std::sort(batch.begin(), batch.end());  // fixed reduction order
      const double inv_batch = 1.0 / static_cast<double>(batch.size());

      for (auto& g : grad.w) g.setZero();
      for (auto& g : grad.b) g.setZero();
      Eigen::Vector3d grad_logits = Eigen::Vector3d::Zero();
      Eigen::Vector3d component_sum = Eigen::Vector3d::Zero();

      double batch_loss = 0.0;
      for (const Eigen::Index idx : batch) {
        const SignalWindow& w = train_w[static_cast<std::size_t>(idx)];
        Eigen::MatrixXd grad_pred;
        Eigen::Vector3d g_logits = Eigen::Vector3d::Zero();
        Eigen::Vector3d comps = Eigen::Vector3d::Zero();
        batch_loss += window_loss(w, &grad_pred, &g_logits, &comps);
        grad_logits += g_logits;
        component_sum += comps;
        if (sharing == WeightSharing::SharedAcrossNodes) {
          grad.w.front().noalias() += grad_pred * w.history.transpose();
          grad.b.front() += grad_pred.rowwise().sum();
        } else {
          for (Eigen::Index n = 0; n < n_nodes; ++n) {
            grad.w[static_cast<std::size_t>(n)].noalias() +=
                grad_pred.col(n) * w.history.col(n).transpose();
            grad.b[static_cast<std::size_t>(n)] += grad_pred.col(n);
          }
        }
      }
      batch_loss *= inv_batch;
      if (!std::isfinite(batch_loss)) {
        throw TrainingFailureError("train: loss became non-finite", epoch);
      }
      epoch_loss_sum += batch_loss * static_cast<double>(batch.size());
      for (auto& g : grad.w) g *= inv_batch;
      for (auto& g : grad.b) g *= inv_batch;
      grad_logits *= inv_batch;

      // Parameter update.
      if (opt_cfg.kind == OptimizerKind::Sgd) {
        for (std::size_t s = 0; s < n_param_sets; ++s) {
          params.w[s] -= opt_cfg.learning_rate * grad.w[s];
          params.b[s] -= opt_cfg.learning_rate * grad.b[s];
        }
        if (objective == TrainingObjective::Frest) {
          logits -= opt_cfg.learning_rate * grad_logits;
        }
      } else {
        ++adam_step;
        const double b1 = opt_cfg.adam_beta1;
        const double b2 = opt_cfg.adam_beta2;
        const double corr1 = 1.0 - std::pow(b1, static_cast<double>(adam_step));
        const double corr2 = 1.0 - std::pow(b2, static_cast<double>(adam_step));
        const double step_scale = opt_cfg.learning_rate / corr1;
        for (std::size_t s = 0; s < n_param_sets; ++s) {
          adam.m.w[s] = b1 * adam.m.w[s] + (1.0 - b1) * grad.w[s];
          adam.v.w[s] = b2 * adam.v.w[s] + (1.0 - b2) * grad.w[s].cwiseProduct(grad.w[s]);
          params.w[s].array() -=
              step_scale * adam.m.w[s].array() /
              ((adam.v.w[s].array() / corr2).sqrt() + opt_cfg.adam_epsilon);
          adam.m.b[s] = b1 * adam.m.b[s] + (1.0 - b1) * grad.b[s];
          adam.v.b[s] = b2 * adam.v.b[s] + (1.0 - b2) * grad.b[s].cwiseProduct(grad.b[s]);
          params.b[s].array() -=
              step_scale * adam.m.b[s].array() /
              ((adam.v.b[s].array() / corr2).sqrt() + opt_cfg.adam_epsilon);
        }
        if (objective == TrainingObjective::Frest) {
          adam.logits_m = b1 * adam.logits_m + (1.0 - b1) * grad_logits;
          adam.logits_v = b2 * adam.logits_v + (1.0 - b2) * grad_logits.cwiseProduct(grad_logits);
          logits.array() -= step_scale * adam.logits_m.array() /
                            ((adam.logits_v.array() / corr2).sqrt() + opt_cfg.adam_epsilon);
        }
      }

      if (objective == TrainingObjective::Frest && use_ema) {
        const Eigen::Vector3d batch_mean = component_sum * inv_batch;
        if (!ema) {
          ema = batch_mean;
        } else {
          *ema = loss_cfg.ema_decay * *ema + (1.0 - loss_cfg.ema_decay) * batch_mean;
        }
      }
    }

    report.train_loss.push_back(epoch_loss_sum / static_cast<double>(train_w.size()));

    if (!val_w.empty()) {
      double val_sum = 0.0;
      for (const auto& w : val_w) {
        val_sum += window_loss(w, nullptr, nullptr, nullptr);
      }
      const double val_loss = val_sum / static_cast<double>(val_w.size());
      if (!std::isfinite(val_loss)) {
        throw TrainingFailureError("train: validation loss became non-finite", epoch);
      }
      report.val_loss.push_back(val_loss);
      if (val_loss < best_val) {
        best_val = val_loss;
        best_params = params;
        best_logits = logits;
        best_epoch = epoch;
      }
    }

    std::uint64_t h = checksum_params(params);
    report.parameter_checksums.push_back(h);
  }

  if (val_w.empty()) {
    best_params = params;
    best_logits = logits;
    best_epoch = opt_cfg.epochs - 1;
  }
  report.best_epoch = best_epoch;

  TrainResult result;
  result.model.sharing = sharing;
  result.model.weights = best_params.w;
  result.model.biases = best_params.b;

  if (!dataset.test.empty()) {
    report.test = evaluate(result.model, dataset.test, dataset.stats);
  } else {
    report.test = {std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN()};
  }
  report.mixing_logits_final = best_logits;
  {
    LossConfig cfg = loss_cfg;
    cfg.mixing_logits = best_logits;
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      if (cfg.components[static_cast<std::size_t>(k)]) {
        max_logit = std::max(max_logit, best_logits(k));
      }
    }
    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    double denom = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (!cfg.components[static_cast<std::size_t>(k)]) continue;
      w(k) = std::exp(best_logits(k) - max_logit);
      denom += w(k);
    }
    if (denom > 0.0) w /= denom;
    report.weights_final = w;
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.report = std::move(report);
  return result;
}

Metrics evaluate(const LinearForecaster& model, const std::vector<SignalWindow>& windows,
                 const NormalizationStats& stats) {
  if (windows.empty()) {
    throw InvalidInputError("evaluate: split is empty");
  }
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double count = 0.0;
  for (const auto& w : windows) {
    const Eigen::MatrixXd pred =
        stats.denormalize(model.forecast(stats.normalize(w.history)));
    const Eigen::MatrixXd err = pred - w.future;
    abs_sum += err.cwiseAbs().sum();
    sq_sum += err.squaredNorm();
    count += static_cast<double>(err.size());
  }
  Metrics m;
  m.mae = abs_sum / count;
  m.mse = sq_sum / count;
  m.rmse = std::sqrt(m.mse);
  return m;
}

std::vector<SweepRow> alpha_sweep(const WindowedDataset& dataset,
                                  const std::vector<double>& alphas,
                                  const LossConfig& base_cfg,
                                  const OptimizerConfig& opt_cfg,
                                  const GraphSpectrum& spectrum,
                                  WeightSharing sharing) {
  std::vector<SweepRow> rows;
  rows.reserve(alphas.size());
  for (const double alpha : alphas) {
    LossConfig cfg = base_cfg;
    cfg.alpha = alpha;
    const TrainResult result =
        train(dataset, TrainingObjective::Frest, cfg, opt_cfg, spectrum, sharing);
    rows.push_back({"alpha=" + std::to_string(alpha), alpha, opt_cfg.seed,
                    result.report.test});
  }
  return rows;
}

std::vector<AblationRow> standard_ablation_rows(const LossConfig& base_cfg) {
  auto with_components = [&](bool fft, bool gft, bool jft) {
    LossConfig cfg = base_cfg;
    cfg.components = {fft, gft, jft};
    return cfg;
  };
  LossConfig mse_cfg = base_cfg;
  mse_cfg.alpha = 0.0;
  return {
      {"mse", TrainingObjective::Mse, mse_cfg},
      {"fft", TrainingObjective::Frest, with_components(true, false, false)},
      {"gft", TrainingObjective::Frest, with_components(false, true, false)},
      {"jft", TrainingObjective::Frest, with_components(false, false, true)},
      {"fft+gft", TrainingObjective::Frest, with_components(true, true, false)},
      {"frest", TrainingObjective::Frest, with_components(true, true, true)},
  };
}

}  // namespace frest
