#include <cmath>
#include <complex>

#include "doctest.h"
#include "frest/errors.hpp"
#include "frest/graph.hpp"
#include "frest/loss.hpp"
#include "frest/rng.hpp"

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

GraphSpectrum spectrum_for(Eigen::Index n, std::uint64_t seed) {
  return graph_spectrum(random_geometric_graph(static_cast<int>(n), seed),
                        LaplacianKind::Combinatorial);
}

// Central finite difference of a scalar function of one matrix entry.
template <typename F>
double central_difference(F&& f, Eigen::MatrixXd& x, Eigen::Index i, Eigen::Index j,
                          double h) {
  const double saved = x(i, j);
  x(i, j) = saved + h;
  const double up = f();
  x(i, j) = saved - h;
  const double down = f();
  x(i, j) = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST_CASE("l_time basics") {
  Eigen::MatrixXd y(1, 1), p(1, 1);
  y << 2.0;
  p << 0.0;
  CHECK(l_time(y, y) == 0.0);
  CHECK(l_time(y, p) == 4.0);

  const Eigen::MatrixXd a = random_matrix(4, 3, 1);
  const Eigen::MatrixXd b = random_matrix(4, 3, 2);
  double oracle = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      oracle += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    }
  }
  oracle /= 12.0;
  CHECK(l_time(a, b) == doctest::Approx(oracle).epsilon(1e-12));

  CHECK_THROWS_AS(l_time(a, random_matrix(3, 3, 3)), InvalidInputError);
}

TEST_CASE("spectral_l1 values") {
  const GraphSpectrum spectrum = spectrum_for(4, 5);
  const Eigen::MatrixXd y = random_matrix(8, 4, 7);

  SUBCASE("equal inputs vanish for every transform") {
    CHECK(spectral_l1(y, y, SpectralComponent::Fft, nullptr) == 0.0);
    CHECK(spectral_l1(y, y, SpectralComponent::Gft, &spectrum) == 0.0);
    CHECK(spectral_l1(y, y, SpectralComponent::Jft, &spectrum) == 0.0);
  }

  SUBCASE("1x1 signals reduce to the absolute difference") {
    const GraphSpectrum one = spectrum_for(1, 5);
    Eigen::MatrixXd t(1, 1), p(1, 1);
    t << 0.75;
    p << -0.5;
    CHECK(spectral_l1(t, p, SpectralComponent::Fft, nullptr) == doctest::Approx(1.25));
    CHECK(spectral_l1(t, p, SpectralComponent::Gft, &one) == doctest::Approx(1.25));
    CHECK(spectral_l1(t, p, SpectralComponent::Jft, &one) == doctest::Approx(1.25));
  }

  SUBCASE("matches an explicitly materialized F (delta) U") {
    const Eigen::MatrixXd pred = random_matrix(8, 4, 11);
    Eigen::MatrixXcd f(8, 8);
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (Eigen::Index k = 0; k < 8; ++k) {
      for (Eigen::Index n = 0; n < 8; ++n) {
        const double ang = -two_pi * static_cast<double>(k * n) / 8.0;
        f(k, n) = {std::cos(ang), std::sin(ang)};
      }
    }
    const Eigen::MatrixXcd z =
        f * (pred - y).cast<std::complex<double>>() *
        spectrum.eigenvectors.cast<std::complex<double>>();
    CHECK(spectral_l1(y, pred, SpectralComponent::Jft, &spectrum) ==
          doctest::Approx(z.cwiseAbs().sum()).epsilon(1e-10));
  }

  SUBCASE("missing spectrum is rejected") {
    CHECK_THROWS_AS(spectral_l1(y, y, SpectralComponent::Gft, nullptr), InvalidInputError);
  }
}

TEST_CASE("spectral_l1 gradients match finite differences") {
  const GraphSpectrum spectrum = spectrum_for(3, 13);
  const Eigen::MatrixXd y = random_matrix(6, 3, 17);
  for (const auto component :
       {SpectralComponent::Fft, SpectralComponent::Gft, SpectralComponent::Jft}) {
    for (const auto convention : {ComplexL1::Modulus, ComplexL1::RealImag}) {
      Eigen::MatrixXd pred = random_matrix(6, 3, 19);
      const Eigen::MatrixXd grad =
          spectral_l1_gradient(y, pred, component, &spectrum, convention);
      auto value = [&] { return spectral_l1(y, pred, component, &spectrum, convention); };
      for (Eigen::Index i = 0; i < 6; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
          const double fd = central_difference(value, pred, i, j, 1e-6);
          CHECK(grad(i, j) == doctest::Approx(fd).epsilon(1e-5));
        }
      }
    }
  }
}

TEST_CASE("frest_loss degenerates to l_time at alpha zero") {
  const GraphSpectrum spectrum = spectrum_for(3, 23);
  const Eigen::MatrixXd y = random_matrix(5, 3, 29);
  const Eigen::MatrixXd pred = random_matrix(5, 3, 31);
  LossConfig cfg;
  cfg.alpha = 0.0;
  const LossEvaluation eval = frest_loss(y, pred, cfg, spectrum);
  CHECK(eval.total == l_time(y, pred));
  CHECK((eval.grad_prediction - l_time_gradient(y, pred)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(eval.grad_mixing.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frest_loss vanishes on perfect predictions") {
  const GraphSpectrum spectrum = spectrum_for(4, 37);
  const Eigen::MatrixXd y = random_matrix(6, 4, 41);
  LossConfig cfg;
  const LossEvaluation eval = frest_loss(y, y, cfg, spectrum);
  CHECK(eval.total == 0.0);
  CHECK(eval.grad_prediction.cwiseAbs().maxCoeff() == 0.0);
  CHECK(eval.grad_mixing.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frest_loss total matches a direct scalar evaluation") {
  const GraphSpectrum spectrum = spectrum_for(3, 43);
  const Eigen::MatrixXd y = random_matrix(4, 3, 47);
  const Eigen::MatrixXd pred = random_matrix(4, 3, 53);
  LossConfig cfg;
  cfg.alpha = 0.35;
  cfg.mixing_logits << 0.2, -0.4, 0.9;
  cfg.epsilon = 1e-6;

  const double v_fft = spectral_l1(y, pred, SpectralComponent::Fft, nullptr);
  const double v_gft = spectral_l1(y, pred, SpectralComponent::Gft, &spectrum);
  const double v_jft = spectral_l1(y, pred, SpectralComponent::Jft, &spectrum);
  const double e0 = std::exp(0.2);
  const double e1 = std::exp(-0.4);
  const double e2 = std::exp(0.9);
  const double z = e0 + e1 + e2;
  const double freq = (e0 / z) * v_fft / (v_fft + cfg.epsilon) +
                      (e1 / z) * v_gft / (v_gft + cfg.epsilon) +
                      (e2 / z) * v_jft / (v_jft + cfg.epsilon);
  const double expected = 0.65 * l_time(y, pred) + 0.35 * freq;

  const LossEvaluation eval = frest_loss(y, pred, cfg, spectrum);
  CHECK(eval.total == doctest::Approx(expected).epsilon(1e-12));
  CHECK(eval.l_fft == doctest::Approx(v_fft).epsilon(1e-12));
  CHECK(eval.weights_w.sum() == doctest::Approx(1.0).epsilon(1e-12));

  // Per-step normalization drives every normalized component to 1 as
  // epsilon shrinks, so the mixing gradient collapses toward zero.
  LossConfig tiny = cfg;
  tiny.epsilon = 1e-14;
  const LossEvaluation eval_tiny = frest_loss(y, pred, tiny, spectrum);
  CHECK(eval_tiny.grad_mixing.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("frest_loss prediction gradient matches frozen finite differences") {
  const GraphSpectrum spectrum = spectrum_for(3, 59);
  const Eigen::MatrixXd y = random_matrix(6, 3, 61);
  Eigen::MatrixXd pred = random_matrix(6, 3, 67);
  LossConfig cfg;
  cfg.alpha = 0.5;
  cfg.mixing_logits << 0.1, 0.3, -0.2;

  const LossEvaluation base = frest_loss(y, pred, cfg, spectrum);
  const Eigen::Vector3d frozen = base.component_values();

  auto value = [&] {
    return frest_loss(y, pred, cfg, spectrum, frozen).total;
  };
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double fd = central_difference(value, pred, i, j, 1e-5);
      CHECK(base.grad_prediction(i, j) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("frest_loss mixing gradient matches finite differences") {
  const GraphSpectrum spectrum = spectrum_for(4, 71);
  const Eigen::MatrixXd y = random_matrix(5, 4, 73);
  const Eigen::MatrixXd pred = random_matrix(5, 4, 79);
  LossConfig cfg;
  cfg.alpha = 0.7;
  cfg.epsilon = 0.05;  // sizeable so normalized values differ from 1
  cfg.mixing_logits << 0.4, -0.1, 0.25;

  const LossEvaluation base = frest_loss(y, pred, cfg, spectrum);
  for (int k = 0; k < 3; ++k) {
    const double h = 1e-6;
    LossConfig up = cfg;
    up.mixing_logits(k) += h;
    LossConfig down = cfg;
    down.mixing_logits(k) -= h;
    const double fd = (frest_loss(y, pred, up, spectrum).total -
                       frest_loss(y, pred, down, spectrum).total) /
                      (2.0 * h);
    CHECK(base.grad_mixing(k) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("softmax weights shift invariance") {
  const GraphSpectrum spectrum = spectrum_for(3, 83);
  const Eigen::MatrixXd y = random_matrix(4, 3, 89);
  const Eigen::MatrixXd pred = random_matrix(4, 3, 97);
  LossConfig cfg;
  cfg.mixing_logits << 0.3, -0.7, 1.1;
  const LossEvaluation a = frest_loss(y, pred, cfg, spectrum);
  cfg.mixing_logits.array() += 5.0;
  const LossEvaluation b = frest_loss(y, pred, cfg, spectrum);
  CHECK((a.weights_w - b.weights_w).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));
}

TEST_CASE("component masks") {
  const GraphSpectrum spectrum = spectrum_for(3, 101);
  const Eigen::MatrixXd y = random_matrix(4, 3, 103);
  const Eigen::MatrixXd pred = random_matrix(4, 3, 107);

  LossConfig cfg;
  cfg.alpha = 0.5;
  cfg.components = {true, false, false};
  const LossEvaluation eval = frest_loss(y, pred, cfg, spectrum);
  const double v = spectral_l1(y, pred, SpectralComponent::Fft, nullptr);
  CHECK(eval.weights_w(0) == doctest::Approx(1.0));
  CHECK(eval.weights_w(1) == 0.0);
  CHECK(eval.l_gft == 0.0);
  CHECK(eval.total ==
        doctest::Approx(0.5 * l_time(y, pred) + 0.5 * v / (v + cfg.epsilon)).epsilon(1e-12));

  LossConfig none = cfg;
  none.components = {false, false, false};
  CHECK_THROWS_AS(frest_loss(y, pred, none, spectrum), InvalidParameterError);
  none.alpha = 0.0;
  CHECK_NOTHROW(frest_loss(y, pred, none, spectrum));
}

TEST_CASE("ema stopgrad values rescale components") {
  const GraphSpectrum spectrum = spectrum_for(3, 109);
  const Eigen::MatrixXd y = random_matrix(4, 3, 113);
  const Eigen::MatrixXd pred = random_matrix(4, 3, 127);
  LossConfig cfg;
  cfg.alpha = 1.0;
  cfg.normalization = NormalizationMode::EmaStopgrad;
  const Eigen::Vector3d running{2.0, 4.0, 8.0};
  const LossEvaluation eval = frest_loss(y, pred, cfg, spectrum, running);
  const double expected = (eval.l_fft / (2.0 + cfg.epsilon) +
                           eval.l_gft / (4.0 + cfg.epsilon) +
                           eval.l_jft / (8.0 + cfg.epsilon)) / 3.0;
  CHECK(eval.total == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("losses are invariant under node relabeling") {
  // Distinct eigenvalues keep the permuted eigenbasis comparable.
  GraphSpectrum spectrum;
  Graph g;
  std::uint64_t seed = 131;
  double min_gap = 0.0;
  do {
    g = random_geometric_graph(6, seed++);
    spectrum = graph_spectrum(g, LaplacianKind::Combinatorial);
    min_gap = 1e9;
    for (Eigen::Index i = 1; i < 6; ++i) {
      min_gap = std::min(min_gap, spectrum.eigenvalues(i) - spectrum.eigenvalues(i - 1));
    }
  } while (min_gap < 1e-6);

  const Eigen::MatrixXd y = random_matrix(5, 6, 137);
  const Eigen::MatrixXd pred = random_matrix(5, 6, 139);

  const std::array<Eigen::Index, 6> perm = {3, 0, 5, 1, 4, 2};
  Eigen::MatrixXd yp(5, 6), predp(5, 6);
  Graph gp;
  gp.adjacency.resize(6, 6);
  for (Eigen::Index a = 0; a < 6; ++a) {
    yp.col(a) = y.col(perm[static_cast<std::size_t>(a)]);
    predp.col(a) = pred.col(perm[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < 6; ++b) {
      gp.adjacency(a, b) = g.adjacency(perm[static_cast<std::size_t>(a)],
                                       perm[static_cast<std::size_t>(b)]);
    }
  }
  const GraphSpectrum spectrump = graph_spectrum(gp, LaplacianKind::Combinatorial);

  CHECK(l_time(yp, predp) == doctest::Approx(l_time(y, pred)).epsilon(1e-12));
  CHECK(spectral_l1(yp, predp, SpectralComponent::Fft, nullptr) ==
        doctest::Approx(spectral_l1(y, pred, SpectralComponent::Fft, nullptr)).epsilon(1e-12));
  CHECK(spectral_l1(yp, predp, SpectralComponent::Gft, &spectrump) ==
        doctest::Approx(spectral_l1(y, pred, SpectralComponent::Gft, &spectrum)).epsilon(1e-8));
  CHECK(spectral_l1(yp, predp, SpectralComponent::Jft, &spectrump) ==
        doctest::Approx(spectral_l1(y, pred, SpectralComponent::Jft, &spectrum)).epsilon(1e-8));
}

TEST_CASE("loss config validation") {
  LossConfig cfg;
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameterError);
  cfg.alpha = 0.5;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameterError);
  cfg.epsilon = 1e-8;
  cfg.normalization = NormalizationMode::EmaStopgrad;
  cfg.ema_decay = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameterError);
  cfg.ema_decay = 0.99;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("total is non-negative across random configurations") {
  const GraphSpectrum spectrum = spectrum_for(4, 149);
  CounterRng rng(151);
  for (int trial = 0; trial < 20; ++trial) {
    LossConfig cfg;
    cfg.alpha = rng.uniform01();
    cfg.mixing_logits << rng.normal(), rng.normal(), rng.normal();
    const Eigen::MatrixXd y = random_matrix(5, 4, 1000 + static_cast<std::uint64_t>(trial));
    const Eigen::MatrixXd pred = random_matrix(5, 4, 2000 + static_cast<std::uint64_t>(trial));
    const LossEvaluation eval = frest_loss(y, pred, cfg, spectrum);
    CHECK(eval.total >= 0.0);
    CHECK(eval.l_fft >= 0.0);
    CHECK(eval.l_gft >= 0.0);
    CHECK(eval.l_jft >= 0.0);
  }
}
