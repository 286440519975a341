#include <cmath>
#include <cstring>

#include "doctest.h"
#include "frest/errors.hpp"
#include "frest/graph.hpp"
#include "frest/model.hpp"
#include "frest/rng.hpp"
#include "frest/synth.hpp"

using namespace frest;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) {
      m(i, j) = rng.normal();
    }
  }
  return m;
}

NormalizationStats identity_stats(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

WindowedDataset manual_dataset(const std::vector<SignalWindow>& train,
                               const std::vector<SignalWindow>& val,
                               const std::vector<SignalWindow>& test) {
  WindowedDataset ds;
  ds.history_len = train.front().history.rows();
  ds.horizon = train.front().future.rows();
  ds.n_nodes = train.front().history.cols();
  ds.train = train;
  ds.val = val;
  ds.test = test;
  ds.stats = identity_stats(ds.n_nodes);
  return ds;
}

GraphSpectrum spectrum_for(Eigen::Index n, std::uint64_t seed) {
  return graph_spectrum(random_geometric_graph(static_cast<int>(n), seed),
                        LaplacianKind::Combinatorial);
}

}  // namespace

TEST_CASE("forecast basics") {
  LinearForecaster model;
  model.weights = {Eigen::MatrixXd::Zero(3, 4)};
  model.biases = {Eigen::VectorXd::Zero(3)};
  CHECK(model.forecast(random_matrix(4, 2, 1)).isZero(0.0));

  // Identity weights give the persistence forecast.
  model.weights = {Eigen::MatrixXd::Identity(4, 4)};
  model.biases = {Eigen::VectorXd::Zero(4)};
  const Eigen::MatrixXd x = random_matrix(4, 3, 2);
  CHECK((model.forecast(x) - x).cwiseAbs().maxCoeff() == 0.0);

  // Random instance against an explicit loop.
  model.weights = {random_matrix(3, 4, 3)};
  model.biases = {random_matrix(3, 1, 4).col(0)};
  const Eigen::MatrixXd hist = random_matrix(4, 2, 5);
  const Eigen::MatrixXd got = model.forecast(hist);
  for (Eigen::Index n = 0; n < 2; ++n) {
    for (Eigen::Index i = 0; i < 3; ++i) {
      double acc = model.biases.front()(i);
      for (Eigen::Index t = 0; t < 4; ++t) {
        acc += model.weights.front()(i, t) * hist(t, n);
      }
      CHECK(got(i, n) == doctest::Approx(acc).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(model.forecast(random_matrix(5, 2, 6)), InvalidInputError);
}

TEST_CASE("per-node forecast") {
  LinearForecaster model;
  model.sharing = WeightSharing::PerNode;
  model.weights = {random_matrix(2, 3, 7), random_matrix(2, 3, 8)};
  model.biases = {random_matrix(2, 1, 9).col(0), random_matrix(2, 1, 10).col(0)};
  const Eigen::MatrixXd hist = random_matrix(3, 2, 11);
  const Eigen::MatrixXd got = model.forecast(hist);
  for (Eigen::Index n = 0; n < 2; ++n) {
    const Eigen::VectorXd expected =
        model.weights[static_cast<std::size_t>(n)] * hist.col(n) +
        model.biases[static_cast<std::size_t>(n)];
    CHECK((got.col(n) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("normalization round trip") {
  NormalizationStats stats;
  stats.mean = random_matrix(4, 1, 12).col(0);
  stats.stddev = random_matrix(4, 1, 13).col(0).cwiseAbs().array() + 0.5;
  const Eigen::MatrixXd x = random_matrix(6, 4, 14);
  CHECK((stats.denormalize(stats.normalize(x)) - x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("windowed dataset construction") {
  const Eigen::MatrixXd series = random_matrix(40, 3, 15);
  const WindowedDataset ds = make_windowed_dataset(series, 4, 2, {0.6, 0.2, 0.2});
  const Eigen::Index total = 40 - 6 + 1;  // 35
  CHECK(static_cast<Eigen::Index>(ds.train.size()) == 21);
  CHECK(static_cast<Eigen::Index>(ds.val.size()) == 7);
  CHECK(static_cast<Eigen::Index>(ds.test.size()) == total - 28);
  CHECK(ds.train.front().history == series.topRows(4));
  CHECK(ds.train.front().future == series.middleRows(4, 2));

  // Stats come from the training region only.
  Eigen::MatrixXd shifted = series;
  shifted.bottomRows(8).array() += 100.0;
  const WindowedDataset ds2 = make_windowed_dataset(shifted, 4, 2, {0.6, 0.2, 0.2});
  CHECK(ds2.stats.mean == ds.stats.mean);

  CHECK_THROWS_AS(make_windowed_dataset(series, 4, 2, {0.5, 0.2, 0.2}),
                  InvalidParameterError);
  CHECK_THROWS_AS(make_windowed_dataset(series.topRows(5), 4, 2, {0.6, 0.2, 0.2}),
                  InvalidInputError);

  // A 1-window series trains with everything in the train split.
  const WindowedDataset tiny = make_windowed_dataset(series.topRows(6), 4, 2, {1.0, 0.0, 0.0});
  CHECK(tiny.train.size() == 1);
  CHECK(tiny.val.empty());
  CHECK(tiny.test.empty());
}

TEST_CASE("evaluate metrics") {
  LinearForecaster zero;
  zero.weights = {Eigen::MatrixXd::Zero(2, 3)};
  zero.biases = {Eigen::VectorXd::Zero(2)};

  std::vector<SignalWindow> windows;
  windows.push_back({random_matrix(3, 2, 16), Eigen::MatrixXd::Constant(2, 2, -2.0)});
  const Metrics m = evaluate(zero, windows, identity_stats(2));
  CHECK(m.mae == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.mse == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(m.rmse == doctest::Approx(2.0).epsilon(1e-12));

  // Perfect predictions via identity persistence and future == history.
  LinearForecaster persist;
  persist.weights = {Eigen::MatrixXd::Identity(3, 3)};
  persist.biases = {Eigen::VectorXd::Zero(3)};
  const Eigen::MatrixXd h = random_matrix(3, 2, 17);
  std::vector<SignalWindow> perfect{{h, h}};
  const Metrics p = evaluate(persist, perfect, identity_stats(2));
  CHECK(p.mae == 0.0);
  CHECK(p.mse == 0.0);
  CHECK(p.rmse == 0.0);

  CHECK_THROWS_AS(evaluate(zero, {}, identity_stats(2)), InvalidInputError);
}

TEST_CASE("training reduces the loss toward zero targets") {
  std::vector<SignalWindow> train_windows;
  for (int i = 0; i < 6; ++i) {
    train_windows.push_back({random_matrix(3, 2, 100 + static_cast<std::uint64_t>(i)),
                             Eigen::MatrixXd::Zero(2, 2)});
  }
  const WindowedDataset ds = manual_dataset(train_windows, {}, {});
  const GraphSpectrum spectrum = spectrum_for(2, 18);
  OptimizerConfig opt;
  opt.epochs = 40;
  opt.learning_rate = 0.05;
  opt.seed = 5;
  LossConfig cfg;
  const TrainResult res = train(ds, TrainingObjective::Mse, cfg, opt, spectrum);
  CHECK(res.report.train_loss.back() < res.report.train_loss.front());
}

TEST_CASE("training solves an exactly realizable one-window problem") {
  const Eigen::MatrixXd w_star = random_matrix(2, 3, 19);
  const Eigen::MatrixXd x = random_matrix(3, 2, 20);
  std::vector<SignalWindow> train_windows{{x, w_star * x}};
  const WindowedDataset ds = manual_dataset(train_windows, {}, {});
  const GraphSpectrum spectrum = spectrum_for(2, 21);
  OptimizerConfig opt;
  opt.epochs = 3000;
  opt.learning_rate = 0.02;
  opt.batch_size = 1;
  LossConfig cfg;
  const TrainResult res = train(ds, TrainingObjective::Mse, cfg, opt, spectrum);
  CHECK(res.report.train_loss.back() < 1e-6);
}

TEST_CASE("alpha zero training is bit-identical to mse training") {
  const Graph g = random_geometric_graph(4, 22);
  const GraphSpectrum spectrum = graph_spectrum(g, LaplacianKind::Combinatorial);
  const Eigen::MatrixXd series = gen_diffusion_series(g, 60, 0.05, 0.2, 6, 1.5, 23);
  const WindowedDataset ds = make_windowed_dataset(series, 6, 4);

  OptimizerConfig opt;
  opt.epochs = 5;
  opt.seed = 77;
  LossConfig frest_cfg;
  frest_cfg.alpha = 0.0;
  LossConfig mse_cfg;

  const TrainResult a = train(ds, TrainingObjective::Frest, frest_cfg, opt, spectrum);
  const TrainResult b = train(ds, TrainingObjective::Mse, mse_cfg, opt, spectrum);

  REQUIRE(a.report.parameter_checksums.size() == b.report.parameter_checksums.size());
  for (std::size_t e = 0; e < a.report.parameter_checksums.size(); ++e) {
    CHECK(a.report.parameter_checksums[e] == b.report.parameter_checksums[e]);
  }
  CHECK(std::memcmp(a.model.weights.front().data(), b.model.weights.front().data(),
                    sizeof(double) * static_cast<std::size_t>(
                                         a.model.weights.front().size())) == 0);
  CHECK(a.report.test.mse == b.report.test.mse);
}

TEST_CASE("training is deterministic given the seed") {
  const Graph g = random_geometric_graph(3, 24);
  const GraphSpectrum spectrum = graph_spectrum(g, LaplacianKind::Combinatorial);
  const Eigen::MatrixXd series = gen_diffusion_series(g, 50, 0.05, 0.2, 5, 1.0, 25);
  const WindowedDataset ds = make_windowed_dataset(series, 5, 3);
  OptimizerConfig opt;
  opt.epochs = 4;
  opt.seed = 11;
  LossConfig cfg;
  cfg.alpha = 0.5;
  const TrainResult a = train(ds, TrainingObjective::Frest, cfg, opt, spectrum);
  const TrainResult b = train(ds, TrainingObjective::Frest, cfg, opt, spectrum);
  CHECK(a.report.parameter_checksums == b.report.parameter_checksums);
  CHECK(a.report.train_loss == b.report.train_loss);
  CHECK(a.report.val_loss == b.report.val_loss);
}

TEST_CASE("divergence raises a training failure with the epoch") {
  const Eigen::MatrixXd x = random_matrix(3, 2, 26);
  std::vector<SignalWindow> train_windows{{x, 2.0 * x.topRows(2)}};
  const WindowedDataset ds = manual_dataset(train_windows, {}, {});
  const GraphSpectrum spectrum = spectrum_for(2, 27);
  OptimizerConfig opt;
  opt.kind = OptimizerKind::Sgd;
  opt.learning_rate = 1e12;
  opt.epochs = 30;
  LossConfig cfg;
  try {
    train(ds, TrainingObjective::Mse, cfg, opt, spectrum);
    FAIL("expected TrainingFailureError");
  } catch (const TrainingFailureError& err) {
    CHECK(err.epoch() >= 0);
  }
}

TEST_CASE("end-to-end weight gradient matches finite differences") {
  const Graph g = random_geometric_graph(3, 28);
  const GraphSpectrum spectrum = graph_spectrum(g, LaplacianKind::Combinatorial);

  std::vector<SignalWindow> windows;
  for (int i = 0; i < 3; ++i) {
    windows.push_back({random_matrix(4, 3, 300 + static_cast<std::uint64_t>(i)),
                       random_matrix(3, 3, 400 + static_cast<std::uint64_t>(i))});
  }
  LossConfig cfg;
  cfg.alpha = 0.5;
  cfg.mixing_logits << 0.2, -0.3, 0.4;

  Eigen::MatrixXd w = 0.1 * random_matrix(3, 4, 29);
  const Eigen::VectorXd b = Eigen::VectorXd::Zero(3);

  // Frozen stop-grad magnitudes from the base point, per window.
  std::vector<Eigen::Vector3d> frozen;
  for (const auto& win : windows) {
    Eigen::MatrixXd pred = w * win.history;
    pred.colwise() += b;
    frozen.push_back(frest_loss(win.future, pred, cfg, spectrum).component_values());
  }

  auto batch_loss = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      Eigen::MatrixXd pred = w * windows[i].history;
      pred.colwise() += b;
      total += frest_loss(windows[i].future, pred, cfg, spectrum, frozen[i]).total;
    }
    return total / 3.0;
  };

  Eigen::MatrixXd analytic = Eigen::MatrixXd::Zero(3, 4);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    Eigen::MatrixXd pred = w * windows[i].history;
    pred.colwise() += b;
    const LossEvaluation eval =
        frest_loss(windows[i].future, pred, cfg, spectrum, frozen[i]);
    analytic.noalias() += eval.grad_prediction * windows[i].history.transpose() / 3.0;
  }

  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double saved = w(i, j);
      w(i, j) = saved + 1e-5;
      const double up = batch_loss();
      w(i, j) = saved - 1e-5;
      const double down = batch_loss();
      w(i, j) = saved;
      const double fd = (up - down) / 2e-5;
      CHECK(analytic(i, j) == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("alpha sweep rows") {
  const Graph g = random_geometric_graph(3, 30);
  const GraphSpectrum spectrum = graph_spectrum(g, LaplacianKind::Combinatorial);
  const Eigen::MatrixXd series = gen_diffusion_series(g, 40, 0.05, 0.2, 5, 1.0, 31);
  const WindowedDataset ds = make_windowed_dataset(series, 4, 2);
  OptimizerConfig opt;
  opt.epochs = 3;
  opt.seed = 13;
  LossConfig cfg;

  const auto rows = alpha_sweep(ds, {0.0, 0.5, 0.5}, cfg, opt, spectrum);
  REQUIRE(rows.size() == 3);

  // alpha = 0 reproduces the MSE baseline exactly.
  const TrainResult mse = train(ds, TrainingObjective::Mse, cfg, opt, spectrum);
  CHECK(rows[0].test.mse == mse.report.test.mse);
  CHECK(rows[0].test.mae == mse.report.test.mae);

  // Duplicate alphas give identical rows.
  CHECK(rows[1].test.mse == rows[2].test.mse);
  CHECK(rows[1].test.rmse == rows[2].test.rmse);
}

TEST_CASE("standard ablation rows cover the six configurations") {
  LossConfig base;
  base.alpha = 0.5;
  const auto rows = standard_ablation_rows(base);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].label == "mse");
  CHECK(rows[0].objective == TrainingObjective::Mse);
  CHECK(rows[0].cfg.alpha == 0.0);
  CHECK(rows[1].cfg.components == std::array<bool, 3>{true, false, false});
  CHECK(rows[2].cfg.components == std::array<bool, 3>{false, true, false});
  CHECK(rows[3].cfg.components == std::array<bool, 3>{false, false, true});
  CHECK(rows[4].cfg.components == std::array<bool, 3>{true, true, false});
  CHECK(rows[5].cfg.components == std::array<bool, 3>{true, true, true});
}

TEST_CASE("per-node training smoke test") {
  const Graph g = random_geometric_graph(3, 32);
  const GraphSpectrum spectrum = graph_spectrum(g, LaplacianKind::Combinatorial);
  const Eigen::MatrixXd series = gen_diffusion_series(g, 40, 0.05, 0.2, 5, 1.0, 33);
  const WindowedDataset ds = make_windowed_dataset(series, 4, 2);
  OptimizerConfig opt;
  opt.epochs = 4;
  LossConfig cfg;
  cfg.alpha = 0.5;
  const TrainResult res = train(ds, TrainingObjective::Frest, cfg, opt, spectrum,
                                WeightSharing::PerNode);
  CHECK(res.model.weights.size() == 3);
  CHECK(res.report.train_loss.back() <= res.report.train_loss.front());
}

TEST_CASE("ema normalization trains and updates the mixing weights") {
  const Graph g = random_geometric_graph(3, 34);
  const GraphSpectrum spectrum = graph_spectrum(g, LaplacianKind::Combinatorial);
  const Eigen::MatrixXd series = gen_diffusion_series(g, 50, 0.05, 0.2, 5, 1.0, 35);
  const WindowedDataset ds = make_windowed_dataset(series, 5, 3);
  OptimizerConfig opt;
  opt.epochs = 6;
  LossConfig cfg;
  cfg.alpha = 0.5;
  cfg.normalization = NormalizationMode::EmaStopgrad;
  const TrainResult res = train(ds, TrainingObjective::Frest, cfg, opt, spectrum);
  CHECK(res.report.weights_final.sum() == doctest::Approx(1.0).epsilon(1e-9));
  // Under EMA normalization the mixing logits receive informative gradients.
  CHECK(res.report.mixing_logits_final.cwiseAbs().maxCoeff() > 0.0);
}
