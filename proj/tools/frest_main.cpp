// frest: command-line front end for the joint frequency-domain loss toolkit.
//
// Subcommands: graph, transform, analyze, bias, synth, train, sweep.
// Exit codes: 0 success, 1 validation/usage error, 2 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "frest/analysis.hpp"
#include "frest/errors.hpp"
#include "frest/graph.hpp"
#include "frest/io.hpp"
#include "frest/rng.hpp"
#include "frest/loss.hpp"
#include "frest/model.hpp"
#include "frest/synth.hpp"
#include "frest/transforms.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// small parsing helpers

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw frest::InvalidParameterError(std::string("cannot parse ") + what + ": '" +
                                         item + "'");
    }
  }
  if (out.empty()) {
    throw frest::InvalidParameterError(std::string(what) + " must not be empty");
  }
  return out;
}

json metrics_json(const frest::Metrics& m) {
  return json{{"mae", m.mae}, {"mse", m.mse}, {"rmse", m.rmse}};
}

// ---------------------------------------------------------------------------
// graph source shared by most subcommands

struct GraphOptions {
  std::string adjacency_file;
  std::string coords_file;
  std::string metric = "euclidean";
  double sigma_sq = 1.0;
  double epsilon = 0.0;
  std::string laplacian = "normalized";
  int rgg_nodes = 0;
  std::uint64_t rgg_seed = 0;
  CLI::Option* sigma_opt = nullptr;
  CLI::Option* epsilon_opt = nullptr;

  void add_to(CLI::App* cmd, bool allow_rgg) {
    cmd->add_option("--adjacency,--graph", adjacency_file, "adjacency matrix CSV (N x N)");
    cmd->add_option("--coords", coords_file, "node coordinates CSV (N rows of lat,lon or x,y)");
    cmd->add_option("--metric", metric, "distance metric: euclidean|haversine")
        ->check(CLI::IsMember({"euclidean", "haversine"}));
    // No published kernel parameters generalize across datasets, so both are
    // required whenever a kernel graph is built from coordinates.
    sigma_opt = cmd->add_option("--sigma-sq", sigma_sq,
                                "Gaussian kernel bandwidth (required with --coords)");
    epsilon_opt = cmd->add_option(
        "--epsilon", epsilon, "kernel sparsity threshold in [0,1] (required with --coords)");
    cmd->add_option("--laplacian", laplacian, "laplacian kind: combinatorial|normalized")
        ->check(CLI::IsMember({"combinatorial", "normalized"}));
    if (allow_rgg) {
      cmd->add_option("--rgg", rgg_nodes,
                      "generate a connected random geometric graph with this many nodes");
      cmd->add_option("--graph-seed", rgg_seed, "seed for --rgg (default 0)");
    }
  }

  bool any_source() const {
    return !adjacency_file.empty() || !coords_file.empty() || rgg_nodes > 0;
  }

  frest::LaplacianKind laplacian_kind() const {
    return laplacian == "combinatorial" ? frest::LaplacianKind::Combinatorial
                                        : frest::LaplacianKind::SymmetricNormalized;
  }

  frest::Graph resolve() const {
    const int sources = (!adjacency_file.empty() ? 1 : 0) +
                        (!coords_file.empty() ? 1 : 0) + (rgg_nodes > 0 ? 1 : 0);
    if (sources != 1) {
      throw frest::InvalidParameterError(
          "exactly one graph source is required: --adjacency, --coords or --rgg");
    }
    if (!adjacency_file.empty()) {
      frest::Graph g;
      g.adjacency = frest::load_csv_matrix(adjacency_file).values;
      g.validate();
      return g;
    }
    if (rgg_nodes > 0) {
      return frest::random_geometric_graph(rgg_nodes, rgg_seed);
    }
    if (sigma_opt == nullptr || sigma_opt->count() == 0 || epsilon_opt == nullptr ||
        epsilon_opt->count() == 0) {
      throw frest::InvalidParameterError(
          "--coords requires explicit --sigma-sq and --epsilon");
    }
    const frest::CsvMatrix coords = frest::load_csv_matrix(coords_file);
    if (coords.values.cols() != 2) {
      throw frest::InvalidInputError("coordinates CSV must have exactly 2 columns");
    }
    std::vector<std::array<double, 2>> pts;
    pts.reserve(static_cast<std::size_t>(coords.values.rows()));
    for (Eigen::Index i = 0; i < coords.values.rows(); ++i) {
      pts.push_back({coords.values(i, 0), coords.values(i, 1)});
    }
    const auto m = metric == "haversine" ? frest::DistanceMetric::Haversine
                                         : frest::DistanceMetric::Euclidean;
    return frest::build_gaussian_kernel_graph(pts, m, sigma_sq, epsilon);
  }

  json describe() const {
    json j;
    if (!adjacency_file.empty()) {
      j["source"] = "adjacency";
      j["file"] = adjacency_file;
    } else if (!coords_file.empty()) {
      j["source"] = "coords";
      j["file"] = coords_file;
      j["metric"] = metric;
      j["sigma_sq"] = sigma_sq;
      j["epsilon"] = epsilon;
    } else {
      j["source"] = "rgg";
      j["nodes"] = rgg_nodes;
      j["seed"] = rgg_seed;
    }
    j["laplacian"] = laplacian;
    return j;
  }
};

// ---------------------------------------------------------------------------
// loss/optimizer option bundles shared by train and sweep

struct LossOptions {
  double alpha = 0.5;
  std::string beta_init = "0,0,0";
  double epsilon = 1e-8;
  std::string normalization = "per-step-stopgrad";
  double ema_decay = 0.99;
  std::string complex_l1 = "modulus";
  std::string components = "fft,gft,jft";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "time/frequency balance in [0,1] (default 0.5)");
    cmd->add_option("--beta-init", beta_init, "initial mixing logits, e.g. 0,0,0");
    cmd->add_option("--epsilon-loss", epsilon, "stop-grad normalizer guard (default 1e-8)");
    cmd->add_option("--normalization", normalization,
                    "per-step-stopgrad|ema-stopgrad")
        ->check(CLI::IsMember({"per-step-stopgrad", "ema-stopgrad"}));
    cmd->add_option("--ema-decay", ema_decay, "decay for ema-stopgrad (default 0.99)");
    cmd->add_option("--complex-l1", complex_l1, "modulus|real-imag")
        ->check(CLI::IsMember({"modulus", "real-imag"}));
    cmd->add_option("--components", components,
                    "enabled spectral components, subset of fft,gft,jft");
  }

  frest::LossConfig resolve() const {
    frest::LossConfig cfg;
    cfg.alpha = alpha;
    const auto beta = parse_double_list(beta_init, "--beta-init");
    if (beta.size() != 3) {
      throw frest::InvalidParameterError("--beta-init needs exactly 3 values");
    }
    cfg.mixing_logits << beta[0], beta[1], beta[2];
    cfg.epsilon = epsilon;
    cfg.normalization = normalization == "ema-stopgrad"
                            ? frest::NormalizationMode::EmaStopgrad
                            : frest::NormalizationMode::PerStepStopgrad;
    cfg.ema_decay = ema_decay;
    cfg.complex_l1 = complex_l1 == "real-imag" ? frest::ComplexL1::RealImag
                                               : frest::ComplexL1::Modulus;
    cfg.components = {false, false, false};
    std::stringstream ss(components);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "fft") {
        cfg.components[0] = true;
      } else if (item == "gft") {
        cfg.components[1] = true;
      } else if (item == "jft") {
        cfg.components[2] = true;
      } else if (!item.empty()) {
        throw frest::InvalidParameterError("unknown component '" + item + "'");
      }
    }
    cfg.validate();
    return cfg;
  }

  json describe(const frest::LossConfig& cfg, const std::string& loss_kind) const {
    json j;
    j["loss"] = loss_kind;
    j["alpha"] = cfg.alpha;
    j["beta_init"] = {cfg.mixing_logits(0), cfg.mixing_logits(1), cfg.mixing_logits(2)};
    j["epsilon"] = cfg.epsilon;
    j["normalization_mode"] = to_string(cfg.normalization);
    if (cfg.normalization == frest::NormalizationMode::EmaStopgrad) {
      j["ema_decay"] = cfg.ema_decay;
    }
    j["complex_l1_convention"] = to_string(cfg.complex_l1);
    json comps = json::array();
    const char* names[3] = {"fft", "gft", "jft"};
    for (int k = 0; k < 3; ++k) {
      if (cfg.components[static_cast<std::size_t>(k)]) comps.push_back(names[k]);
    }
    j["components"] = comps;
    return j;
  }
};

struct OptimizerOptions {
  std::string optimizer = "adam";
  double lr = 1e-3;
  int epochs = 50;
  int batch = 32;
  std::uint64_t seed = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--optimizer", optimizer, "adam|sgd")
        ->check(CLI::IsMember({"adam", "sgd"}));
    cmd->add_option("--lr", lr, "learning rate (default 1e-3)");
    cmd->add_option("--epochs", epochs, "training epochs (default 50)");
    cmd->add_option("--batch", batch, "mini-batch size (default 32)");
    cmd->add_option("--seed", seed, "random seed (default 0)");
  }

  frest::OptimizerConfig resolve() const {
    frest::OptimizerConfig cfg;
    cfg.kind = optimizer == "sgd" ? frest::OptimizerKind::Sgd : frest::OptimizerKind::Adam;
    cfg.learning_rate = lr;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }

  json describe() const {
    return json{{"optimizer", optimizer}, {"lr", lr},     {"epochs", epochs},
                {"batch", batch},         {"seed", seed}};
  }
};

struct DataOptions {
  std::string data_file;
  Eigen::Index history_len = 48;
  Eigen::Index horizon = 96;
  std::string split = "0.6,0.2,0.2";
  std::string sharing = "shared";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--data", data_file, "long series CSV (rows = time, columns = nodes)")
        ->required();
    cmd->add_option("--t", history_len, "history window length (default 48)");
    cmd->add_option("--h", horizon, "forecast horizon (default 96)");
    cmd->add_option("--split", split, "train,val,test ratios (default 0.6,0.2,0.2)");
    cmd->add_option("--sharing", sharing, "weight sharing: shared|per-node")
        ->check(CLI::IsMember({"shared", "per-node"}));
  }

  std::array<double, 3> split_ratios() const {
    const auto r = parse_double_list(split, "--split");
    if (r.size() != 3) {
      throw frest::InvalidParameterError("--split needs exactly 3 ratios");
    }
    return {r[0], r[1], r[2]};
  }

  frest::WeightSharing sharing_mode() const {
    return sharing == "per-node" ? frest::WeightSharing::PerNode
                                 : frest::WeightSharing::SharedAcrossNodes;
  }

  frest::WindowedDataset load() const {
    const Eigen::MatrixXd series = frest::load_csv_matrix(data_file).values;
    return frest::make_windowed_dataset(series, history_len, horizon, split_ratios());
  }

  json describe() const {
    return json{{"data", data_file},
                {"t", history_len},
                {"h", horizon},
                {"split", split},
                {"sharing", sharing}};
  }
};

// ---------------------------------------------------------------------------
// subcommand payloads

struct GraphCmd {
  GraphOptions graph;
  std::string out_adjacency, out_laplacian, out_eigenvalues, out_eigenvectors;

  int run() const {
    const frest::Graph g = graph.resolve();
    const frest::LaplacianKind kind = graph.laplacian_kind();
    const Eigen::MatrixXd lap = frest::laplacian(g, kind);

    if (!out_adjacency.empty()) frest::write_csv_matrix(out_adjacency, g.adjacency);
    if (!out_laplacian.empty()) frest::write_csv_matrix(out_laplacian, lap);
    if (!out_eigenvalues.empty() || !out_eigenvectors.empty()) {
      const frest::GraphSpectrum spectrum = frest::eigendecompose(lap, kind);
      if (!out_eigenvalues.empty()) {
        frest::write_csv_matrix(out_eigenvalues, spectrum.eigenvalues);
      }
      if (!out_eigenvectors.empty()) {
        // Column j holds the j-th eigenvector.
        frest::write_csv_matrix(out_eigenvectors, spectrum.eigenvectors);
      }
    }
    Eigen::Index edges = 0;
    for (Eigen::Index i = 0; i < g.n_nodes(); ++i) {
      for (Eigen::Index j = i + 1; j < g.n_nodes(); ++j) {
        if (g.adjacency(i, j) > 0.0) ++edges;
      }
    }
    std::cout << "nodes=" << g.n_nodes() << " edges=" << edges
              << " connected=" << (frest::is_connected(g) ? "yes" : "no")
              << " laplacian=" << graph.laplacian << "\n";
    return 0;
  }
};

struct TransformCmd {
  GraphOptions graph;
  std::string input;
  std::string kind = "fft";
  std::string out;

  int run() const {
    const Eigen::MatrixXd values = frest::load_csv_matrix(input).values;
    const frest::SpatioTemporalSignal sig{values};
    frest::SpectralSignal result;
    if (kind == "fft") {
      result = frest::fft_time(sig);
    } else {
      const frest::GraphSpectrum spectrum =
          frest::graph_spectrum(graph.resolve(), graph.laplacian_kind());
      result = kind == "gft" ? frest::gft_space(sig, spectrum) : frest::jft(sig, spectrum);
    }
    frest::write_csv_complex(out, result.values);
    return 0;
  }
};

struct AnalyzeCmd {
  GraphOptions graph;
  std::vector<std::string> inputs;
  std::string series_file;
  Eigen::Index window = 0;
  Eigen::Index stride = 1;
  std::string out_csv, out_json;
  bool json_stdout = false;

  frest::SampleEnsemble load_ensemble() const {
    frest::SampleEnsemble ens;
    if (!series_file.empty()) {
      if (window < 1 || stride < 1) {
        throw frest::InvalidParameterError("--series requires --window >= 1 and --stride >= 1");
      }
      const Eigen::MatrixXd series = frest::load_csv_matrix(series_file).values;
      for (Eigen::Index s = 0; s + window <= series.rows(); s += stride) {
        ens.samples.push_back(series.middleRows(s, window));
      }
    } else {
      if (inputs.empty()) {
        throw frest::InvalidParameterError("analyze needs --inputs or --series");
      }
      for (const auto& f : inputs) {
        ens.samples.push_back(frest::load_csv_matrix(f).values);
      }
    }
    ens.validate();
    return ens;
  }

  int run() const {
    const frest::SampleEnsemble ens = load_ensemble();
    const frest::GraphSpectrum spectrum =
        frest::graph_spectrum(graph.resolve(), graph.laplacian_kind());
    const auto table = frest::decorrelation_table(ens, spectrum);

    json j;
    j["samples"] = ens.samples.size();
    j["t"] = ens.t_len();
    j["n"] = ens.n_nodes();
    j["graph"] = graph.describe();
    for (const auto& row : table) {
      j["table"][to_string(row.domain)] = {{"temporal", row.rho_temporal},
                                           {"spatial", row.rho_spatial},
                                           {"joint", row.rho_joint}};
    }

    if (!out_csv.empty()) {
      std::ostringstream csv;
      csv << "domain,temporal,spatial,joint\n";
      for (const auto& row : table) {
        csv << to_string(row.domain) << ',' << frest::format_double(row.rho_temporal)
            << ',' << frest::format_double(row.rho_spatial) << ','
            << frest::format_double(row.rho_joint) << '\n';
      }
      frest::atomic_write_text(out_csv, csv.str());
    }
    if (!out_json.empty()) frest::atomic_write_text(out_json, j.dump(2) + "\n");

    if (json_stdout) {
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "domain    temporal  spatial   joint\n";
      for (const auto& row : table) {
        std::printf("%-8s  %.6f  %.6f  %.6f\n", to_string(row.domain).c_str(),
                    row.rho_temporal, row.rho_spatial, row.rho_joint);
      }
    }
    return 0;
  }
};

struct BiasCmd {
  std::string covariance_file;
  std::string ordering_file;
  double sigma_sq = 1.0;
  int samples = 10000;
  std::uint64_t seed = 0;
  std::string out_json;
  bool json_stdout = false;

  int run() const {
    const Eigen::MatrixXd cov = frest::load_csv_matrix(covariance_file).values;
    std::vector<int> ordering;
    if (ordering_file.empty()) {
      ordering = frest::raster_ordering(cov.rows(), 1);
    } else {
      const Eigen::MatrixXd raw = frest::load_csv_matrix(ordering_file).values;
      if (raw.cols() != 1) {
        throw frest::InvalidInputError("--ordering file must have a single column");
      }
      for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        ordering.push_back(static_cast<int>(raw(i, 0)));
      }
    }
    const frest::BiasEstimate est =
        frest::estimate_df_bias(cov, ordering, samples, sigma_sq, seed);

    json j;
    j["bias_mean"] = est.bias_mean;
    j["bias_stderr"] = est.bias_stderr;
    j["analytic_mean"] = est.analytic_mean;
    json strengths = json::array();
    for (Eigen::Index i = 0; i < est.cumulative_strengths.size(); ++i) {
      strengths.push_back(est.cumulative_strengths(i));
    }
    j["cumulative_strengths"] = strengths;
    j["samples"] = samples;
    j["sigma_sq"] = sigma_sq;
    j["seed"] = seed;
    j["ordering"] = ordering_file.empty() ? "raster" : ordering_file;

    if (!out_json.empty()) frest::atomic_write_text(out_json, j.dump(2) + "\n");
    if (json_stdout) {
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "bias_mean=" << frest::format_double(est.bias_mean)
                << " bias_stderr=" << frest::format_double(est.bias_stderr)
                << " analytic_mean=" << frest::format_double(est.analytic_mean) << "\n";
    }
    return 0;
  }
};

struct SynthCmd {
  GraphOptions graph;
  std::string kind = "white";
  Eigen::Index t_len = 8;
  Eigen::Index n_nodes = 8;
  Eigen::Index n_samples = 1;
  std::uint64_t seed = 0;
  double rho = 0.8;
  double profile_decay = 2.0;
  double eta = 0.05;
  double noise_std = 0.1;
  Eigen::Index impulse_period = 12;
  double impulse_mag = 3.0;
  std::string out_dir;
  std::string long_file;
  std::string out_graph;

  int run() const {
    const bool needs_graph =
        kind == "graph-stationary" || kind == "joint-stationary" || kind == "diffusion-wave";
    std::optional<frest::Graph> g;
    if (needs_graph) {
      GraphOptions src = graph;
      if (!src.any_source()) {
        // Default test graph: connected random geometric graph.
        src.rgg_nodes = static_cast<int>(n_nodes);
        src.rgg_seed = seed;
      }
      g = src.resolve();
      if (g->n_nodes() != n_nodes && graph.any_source()) {
        // A supplied graph pins N.
      }
    }

    frest::SampleEnsemble ens;
    if (kind == "white" || kind == "ar1") {
      frest::Ar1Spec spec;
      spec.rho = kind == "white" ? 0.0 : rho;
      spec.t_len = t_len;
      spec.n_nodes = n_nodes;
      spec.n_samples = long_file.empty() ? n_samples : 1;
      spec.seed = seed;
      ens = frest::gen_temporal_ar1(spec);
    } else {
      const frest::GraphSpectrum spectrum =
          frest::graph_spectrum(*g, graph.laplacian_kind());
      if (kind == "graph-stationary") {
        frest::StationarySpec spec{t_len, long_file.empty() ? n_samples : 1, seed};
        const double q = profile_decay;
        ens = frest::gen_graph_stationary(
            spec, [q](double lambda) { return std::pow(1.0 + lambda, -q); }, spectrum);
      } else if (kind == "joint-stationary") {
        frest::StationarySpec spec{t_len, long_file.empty() ? n_samples : 1, seed};
        const double q = profile_decay;
        ens = frest::gen_joint_stationary(
            spec,
            [q](int k, double lambda) {
              return std::pow(1.0 + k, -q) * std::pow(1.0 + lambda, -q);
            },
            spectrum);
      } else if (kind == "diffusion-wave") {
        if (!long_file.empty()) {
          ens.samples.push_back(frest::gen_diffusion_series(
              *g, t_len, eta, noise_std, impulse_period, impulse_mag, seed));
        } else {
          frest::DiffusionWaveSpec spec;
          spec.eta = eta;
          spec.noise_std = noise_std;
          spec.t_len = t_len;
          spec.n_samples = n_samples;
          spec.seed = seed;
          frest::CounterRng node_rng(seed, 0xd1f5u);
          for (Eigen::Index t = 0; t < t_len; t += impulse_period) {
            frest::Impulse imp;
            imp.time = t;
            imp.node = static_cast<Eigen::Index>(
                node_rng.next_below(static_cast<std::uint64_t>(g->n_nodes())));
            imp.magnitude = impulse_mag;
            spec.impulses.push_back(imp);
          }
          ens = frest::gen_diffusion_wave(spec, *g);
        }
      } else {
        throw frest::InvalidParameterError("unknown synth kind '" + kind + "'");
      }
    }

    json manifest;
    manifest["kind"] = kind;
    manifest["t"] = t_len;
    manifest["n"] = ens.samples.front().cols();
    manifest["m"] = ens.samples.size();
    manifest["seed"] = seed;
    if (kind == "ar1") manifest["rho"] = rho;
    if (kind == "graph-stationary" || kind == "joint-stationary") {
      manifest["profile_decay"] = profile_decay;
    }
    if (kind == "diffusion-wave") {
      manifest["eta"] = eta;
      manifest["noise_std"] = noise_std;
      manifest["impulse_period"] = impulse_period;
      manifest["impulse_mag"] = impulse_mag;
    }
    if (needs_graph) {
      GraphOptions src = graph;
      if (!src.any_source()) {
        src.rgg_nodes = static_cast<int>(n_nodes);
        src.rgg_seed = seed;
      }
      manifest["graph"] = src.describe();
      if (!out_graph.empty()) {
        frest::write_csv_matrix(out_graph, g->adjacency);
        manifest["graph"]["saved_adjacency"] = out_graph;
      }
    }

    if (!long_file.empty()) {
      frest::write_csv_matrix(long_file, ens.samples.front());
      manifest["outputs"] = {long_file};
      frest::atomic_write_text(long_file + ".manifest.json", manifest.dump(2) + "\n");
    } else {
      if (out_dir.empty()) {
        throw frest::InvalidParameterError("synth needs --out DIR or --long FILE");
      }
      fs::create_directories(out_dir);
      json outputs = json::array();
      for (std::size_t m = 0; m < ens.samples.size(); ++m) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%05zu.csv", m);
        const std::string path = (fs::path(out_dir) / name).string();
        frest::write_csv_matrix(path, ens.samples[m]);
        outputs.push_back(name);
      }
      manifest["outputs"] = outputs;
      frest::atomic_write_text((fs::path(out_dir) / "manifest.json").string(),
                               manifest.dump(2) + "\n");
    }
    return 0;
  }
};

json report_json(const frest::TrainReport& report) {
  json j;
  j["epochs"] = report.train_loss.size();
  j["train_loss"] = report.train_loss;
  j["val_loss"] = report.val_loss;
  j["best_epoch"] = report.best_epoch;
  j["test"] = metrics_json(report.test);
  j["wall_seconds"] = report.wall_seconds;
  j["seed"] = report.seed;
  j["param_checksums"] = report.parameter_checksums;
  j["beta_final"] = {report.mixing_logits_final(0), report.mixing_logits_final(1),
                     report.mixing_logits_final(2)};
  j["weights_final"] = {report.weights_final(0), report.weights_final(1),
                        report.weights_final(2)};
  return j;
}

struct TrainCmd {
  GraphOptions graph;
  DataOptions data;
  LossOptions loss;
  OptimizerOptions optimizer;
  std::string loss_kind = "frest";
  std::string out_report;
  std::string out_curve;

  int run() const {
    const frest::WindowedDataset ds = data.load();
    const frest::GraphSpectrum spectrum =
        frest::graph_spectrum(graph.resolve(), graph.laplacian_kind());
    if (spectrum.n_nodes() != ds.n_nodes) {
      throw frest::InvalidInputError("graph and series disagree on the node count");
    }
    const frest::LossConfig loss_cfg = loss.resolve();
    const frest::OptimizerConfig opt_cfg = optimizer.resolve();
    const auto objective = loss_kind == "mse" ? frest::TrainingObjective::Mse
                                              : frest::TrainingObjective::Frest;

    const frest::TrainResult result =
        frest::train(ds, objective, loss_cfg, opt_cfg, spectrum, data.sharing_mode());

    json j;
    j["command"] = "train";
    j["config"] = {{"data", data.describe()},
                   {"graph", graph.describe()},
                   {"loss", loss.describe(loss_cfg, loss_kind)},
                   {"optimizer", optimizer.describe()}};
    j["report"] = report_json(result.report);
    if (!out_report.empty()) frest::atomic_write_text(out_report, j.dump(2) + "\n");

    if (!out_curve.empty()) {
      std::ostringstream csv;
      csv << "epoch,train_loss,val_loss\n";
      for (std::size_t e = 0; e < result.report.train_loss.size(); ++e) {
        csv << e << ',' << frest::format_double(result.report.train_loss[e]) << ',';
        if (e < result.report.val_loss.size()) {
          csv << frest::format_double(result.report.val_loss[e]);
        }
        csv << '\n';
      }
      frest::atomic_write_text(out_curve, csv.str());
    }

    std::cout << "loss=" << loss_kind;
    if (loss_kind == "frest") std::cout << " alpha=" << loss_cfg.alpha;
    std::cout << " seed=" << opt_cfg.seed
              << " test_mae=" << frest::format_double(result.report.test.mae)
              << " test_mse=" << frest::format_double(result.report.test.mse)
              << " test_rmse=" << frest::format_double(result.report.test.rmse) << "\n";
    return 0;
  }
};

struct SweepCmd {
  GraphOptions graph;
  DataOptions data;
  LossOptions loss;
  OptimizerOptions optimizer;
  std::string alphas = "0,0.25,0.5,0.75,0.9";
  std::string seeds;
  bool ablation = false;
  std::string out_csv;
  std::string out_json;

  int run() const {
    const frest::WindowedDataset ds = data.load();
    const frest::GraphSpectrum spectrum =
        frest::graph_spectrum(graph.resolve(), graph.laplacian_kind());
    const frest::LossConfig base_cfg = loss.resolve();
    frest::OptimizerConfig opt_cfg = optimizer.resolve();

    std::vector<std::uint64_t> seed_list{opt_cfg.seed};
    if (!seeds.empty()) {
      seed_list.clear();
      for (double s : parse_double_list(seeds, "--seeds")) {
        seed_list.push_back(static_cast<std::uint64_t>(s));
      }
    }

    std::ostringstream csv;
    csv << "row,alpha,seed,mae,mse,rmse\n";
    json rows = json::array();

    if (ablation) {
      for (const auto& row : frest::standard_ablation_rows(base_cfg)) {
        for (const std::uint64_t seed : seed_list) {
          opt_cfg.seed = seed;
          const frest::TrainResult res =
              frest::train(ds, row.objective, row.cfg, opt_cfg, spectrum, data.sharing_mode());
          csv << row.label << ',' << frest::format_double(row.cfg.alpha) << ',' << seed
              << ',' << frest::format_double(res.report.test.mae) << ','
              << frest::format_double(res.report.test.mse) << ','
              << frest::format_double(res.report.test.rmse) << '\n';
          rows.push_back({{"row", row.label},
                          {"alpha", row.cfg.alpha},
                          {"seed", seed},
                          {"test", metrics_json(res.report.test)}});
        }
      }
    } else {
      const auto alpha_list = parse_double_list(alphas, "--alphas");
      for (const std::uint64_t seed : seed_list) {
        opt_cfg.seed = seed;
        for (const auto& row : frest::alpha_sweep(ds, alpha_list, base_cfg, opt_cfg,
                                                  spectrum, data.sharing_mode())) {
          csv << row.label << ',' << frest::format_double(row.alpha) << ',' << row.seed
              << ',' << frest::format_double(row.test.mae) << ','
              << frest::format_double(row.test.mse) << ','
              << frest::format_double(row.test.rmse) << '\n';
          rows.push_back({{"row", row.label},
                          {"alpha", row.alpha},
                          {"seed", row.seed},
                          {"test", metrics_json(row.test)}});
        }
      }
    }

    if (!out_csv.empty()) frest::atomic_write_text(out_csv, csv.str());
    if (!out_json.empty()) {
      json j;
      j["command"] = ablation ? "sweep-ablation" : "sweep-alpha";
      j["config"] = {{"data", data.describe()},
                     {"graph", graph.describe()},
                     {"loss", loss.describe(base_cfg, "frest")},
                     {"optimizer", optimizer.describe()}};
      j["rows"] = rows;
      frest::atomic_write_text(out_json, j.dump(2) + "\n");
    }
    std::cout << csv.str();
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frest: joint frequency-domain loss toolkit for spatio-temporal forecasting"};
  app.require_subcommand(1);
  // --h is the forecast horizon, so help lives on --help only.
  app.set_help_flag("--help", "print help and exit");

  GraphCmd graph_cmd;
  auto* graph_sub = app.add_subcommand("graph", "build a graph, its Laplacian and spectrum");
  graph_sub->set_help_flag("--help", "print help and exit");
  graph_cmd.graph.add_to(graph_sub, true);
  graph_sub->add_option("--out-adjacency", graph_cmd.out_adjacency, "adjacency CSV output");
  graph_sub->add_option("--out-laplacian", graph_cmd.out_laplacian, "laplacian CSV output");
  graph_sub->add_option("--out-eigenvalues", graph_cmd.out_eigenvalues,
                        "eigenvalue vector CSV output");
  graph_sub->add_option("--out-eigenvectors", graph_cmd.out_eigenvectors,
                        "eigenvector matrix CSV output (column j = eigenvector j)");

  TransformCmd transform_cmd;
  auto* transform_sub = app.add_subcommand("transform", "apply fft/gft/jft to a signal CSV");
  transform_sub->set_help_flag("--help", "print help and exit");
  transform_cmd.graph.add_to(transform_sub, true);
  transform_sub->add_option("--input", transform_cmd.input, "signal CSV (T rows x N columns)")
      ->required();
  transform_sub->add_option("--kind", transform_cmd.kind, "fft|gft|jft")
      ->required()
      ->check(CLI::IsMember({"fft", "gft", "jft"}));
  transform_sub->add_option("--out", transform_cmd.out, "output CSV with re/im columns")
      ->required();

  AnalyzeCmd analyze_cmd;
  auto* analyze_sub =
      app.add_subcommand("analyze", "decorrelation table across raw/fft/gft/jft domains");
  analyze_sub->set_help_flag("--help", "print help and exit");
  analyze_cmd.graph.add_to(analyze_sub, true);
  analyze_sub->add_option("--inputs", analyze_cmd.inputs, "sample CSV files (one per sample)");
  analyze_sub->add_option("--series", analyze_cmd.series_file, "long series CSV to window");
  analyze_sub->add_option("--window", analyze_cmd.window, "window length for --series");
  analyze_sub->add_option("--stride", analyze_cmd.stride, "window stride (default 1)");
  analyze_sub->add_option("--out-csv", analyze_cmd.out_csv, "table CSV output");
  analyze_sub->add_option("--out-json", analyze_cmd.out_json, "table JSON output");
  analyze_sub->add_flag("--json", analyze_cmd.json_stdout, "print JSON instead of a table");

  BiasCmd bias_cmd;
  auto* bias_sub = app.add_subcommand(
      "bias", "Monte-Carlo gap between pointwise-MSE and factorized Gaussian objectives");
  bias_sub->set_help_flag("--help", "print help and exit");
  bias_sub->add_option("--covariance", bias_cmd.covariance_file, "covariance CSV (K x K)")
      ->required();
  bias_sub->add_option("--ordering", bias_cmd.ordering_file,
                       "optional permutation file (one index per row; default raster)");
  bias_sub->add_option("--sigma-sq", bias_cmd.sigma_sq, "noise variance (default 1)");
  bias_sub->add_option("--samples", bias_cmd.samples, "Monte-Carlo samples (default 10000)");
  bias_sub->add_option("--seed", bias_cmd.seed, "random seed");
  bias_sub->add_option("--out-json", bias_cmd.out_json, "JSON output path");
  bias_sub->add_flag("--json", bias_cmd.json_stdout, "print JSON instead of a summary line");

  SynthCmd synth_cmd;
  auto* synth_sub = app.add_subcommand("synth", "generate synthetic ensembles or series");
  synth_sub->set_help_flag("--help", "print help and exit");
  synth_cmd.graph.add_to(synth_sub, true);
  synth_sub
      ->add_option("--kind", synth_cmd.kind,
                   "white|ar1|graph-stationary|joint-stationary|diffusion-wave")
      ->check(CLI::IsMember(
          {"white", "ar1", "graph-stationary", "joint-stationary", "diffusion-wave"}));
  synth_sub->add_option("--t", synth_cmd.t_len, "time steps per sample");
  synth_sub->add_option("--n", synth_cmd.n_nodes, "node count");
  synth_sub->add_option("--m", synth_cmd.n_samples, "sample count");
  synth_sub->add_option("--seed", synth_cmd.seed, "random seed");
  synth_sub->add_option("--rho", synth_cmd.rho, "AR(1) coefficient (kind ar1)");
  synth_sub->add_option("--profile-decay", synth_cmd.profile_decay,
                        "spectral profile decay exponent (stationary kinds)");
  synth_sub->add_option("--eta", synth_cmd.eta, "diffusion rate (kind diffusion-wave)");
  synth_sub->add_option("--noise-std", synth_cmd.noise_std, "innovation noise std");
  synth_sub->add_option("--impulse-period", synth_cmd.impulse_period,
                        "steps between impulses (diffusion-wave)");
  synth_sub->add_option("--impulse-mag", synth_cmd.impulse_mag, "impulse magnitude");
  synth_sub->add_option("--out", synth_cmd.out_dir, "output directory (one CSV per sample)");
  synth_sub->add_option("--long", synth_cmd.long_file, "write a single long-series CSV");
  synth_sub->add_option("--out-graph", synth_cmd.out_graph,
                        "also save the generated graph adjacency CSV");

  TrainCmd train_cmd;
  auto* train_sub = app.add_subcommand("train", "train the linear forecaster");
  train_sub->set_help_flag("--help", "print help and exit");
  train_cmd.graph.add_to(train_sub, true);
  train_cmd.data.add_to(train_sub);
  train_cmd.loss.add_to(train_sub);
  train_cmd.optimizer.add_to(train_sub);
  train_sub->add_option("--loss", train_cmd.loss_kind, "mse|frest (default frest)")
      ->check(CLI::IsMember({"mse", "frest"}));
  train_sub->add_option("--out", train_cmd.out_report, "training report JSON");
  train_sub->add_option("--curve", train_cmd.out_curve, "per-epoch loss curve CSV");

  SweepCmd sweep_cmd;
  auto* sweep_sub = app.add_subcommand("sweep", "alpha sweeps and component ablations");
  sweep_sub->set_help_flag("--help", "print help and exit");
  sweep_cmd.graph.add_to(sweep_sub, true);
  sweep_cmd.data.add_to(sweep_sub);
  sweep_cmd.loss.add_to(sweep_sub);
  sweep_cmd.optimizer.add_to(sweep_sub);
  sweep_sub->add_option("--alphas", sweep_cmd.alphas, "comma-separated alpha grid");
  sweep_sub->add_option("--seeds", sweep_cmd.seeds, "comma-separated seeds (optional)");
  sweep_sub->add_flag("--ablation", sweep_cmd.ablation,
                      "run the six standard component rows instead of an alpha grid");
  sweep_sub->add_option("--out", sweep_cmd.out_csv, "metric table CSV");
  sweep_sub->add_option("--out-json", sweep_cmd.out_json, "metric table JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*graph_sub) return graph_cmd.run();
    if (*transform_sub) return transform_cmd.run();
    if (*analyze_sub) return analyze_cmd.run();
    if (*bias_sub) return bias_cmd.run();
    if (*synth_sub) return synth_cmd.run();
    if (*train_sub) return train_cmd.run();
    if (*sweep_sub) return sweep_cmd.run();
  } catch (const frest::ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const frest::DecompositionError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const frest::TrainingFailureError& e) {
    std::cerr << "numerical failure: " << e.what() << " (epoch " << e.epoch() << ")\n";
    return 2;
  } catch (const frest::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
