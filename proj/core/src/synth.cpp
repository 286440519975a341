#include "frest/synth.hpp"

#include <cmath>
#include <complex>

#include "frest/errors.hpp"
#include "frest/parallel.hpp"
#include "frest/rng.hpp"
#include "frest/transforms.hpp"

namespace frest {

namespace {

void require_counts(Eigen::Index t, Eigen::Index n, Eigen::Index m) {
  if (t < 1 || n < 1 || m < 1) {
    throw InvalidParameterError("generator: T, N and M must all be >= 1");
  }
}

}  // namespace

SampleEnsemble gen_temporal_ar1(const Ar1Spec& spec) {
  require_counts(spec.t_len, spec.n_nodes, spec.n_samples);
  if (!(std::abs(spec.rho) < 1.0)) {
    throw InvalidParameterError("gen_temporal_ar1: |rho| must be < 1");
  }
  const double init_std = 1.0 / std::sqrt(1.0 - spec.rho * spec.rho);

  SampleEnsemble ensemble;
  ensemble.samples.resize(static_cast<std::size_t>(spec.n_samples));
  parallel_for_index(spec.n_samples, [&](Eigen::Index m) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(m));
    Eigen::MatrixXd s(spec.t_len, spec.n_nodes);
    for (Eigen::Index n = 0; n < spec.n_nodes; ++n) {
      s(0, n) = init_std * rng.normal();
      for (Eigen::Index t = 1; t < spec.t_len; ++t) {
        s(t, n) = spec.rho * s(t - 1, n) + rng.normal();
      }
    }
    ensemble.samples[static_cast<std::size_t>(m)] = std::move(s);
  });
  return ensemble;
}

SampleEnsemble gen_graph_stationary(const StationarySpec& spec,
                                    const SpectralProfile& profile,
                                    const GraphSpectrum& spectrum) {
  const Eigen::Index n = spectrum.n_nodes();
  require_counts(spec.t_len, n, spec.n_samples);

  Eigen::VectorXd amplitude(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const double h = profile(spectrum.eigenvalues(l));
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw InvalidParameterError("gen_graph_stationary: profile must be positive and finite");
    }
    amplitude(l) = std::sqrt(h);
  }

  SampleEnsemble ensemble;
  ensemble.samples.resize(static_cast<std::size_t>(spec.n_samples));
  parallel_for_index(spec.n_samples, [&](Eigen::Index m) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(m));
    Eigen::MatrixXd coeffs(spec.t_len, n);
    for (Eigen::Index t = 0; t < spec.t_len; ++t) {
      for (Eigen::Index l = 0; l < n; ++l) {
        coeffs(t, l) = amplitude(l) * rng.normal();
      }
    }
    // Rows are spectral coefficient vectors; y = U c per slice.
    ensemble.samples[static_cast<std::size_t>(m)] =
        coeffs * spectrum.eigenvectors.transpose();
  });
  return ensemble;
}

SampleEnsemble gen_joint_stationary(const StationarySpec& spec,
                                    const JointProfile& profile,
                                    const GraphSpectrum& spectrum) {
  const Eigen::Index n = spectrum.n_nodes();
  const Eigen::Index t = spec.t_len;
  require_counts(t, n, spec.n_samples);

  Eigen::MatrixXd variance(t, n);
  for (Eigen::Index k = 0; k < t; ++k) {
    const int folded = static_cast<int>(std::min(k, t - k));
    for (Eigen::Index l = 0; l < n; ++l) {
      const double p = profile(folded, spectrum.eigenvalues(l));
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw InvalidParameterError("gen_joint_stationary: profile must be positive and finite");
      }
      variance(k, l) = p;
    }
  }

  SampleEnsemble ensemble;
  ensemble.samples.resize(static_cast<std::size_t>(spec.n_samples));
  parallel_for_index(spec.n_samples, [&](Eigen::Index m) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(m));
    Eigen::MatrixXcd joint = Eigen::MatrixXcd::Zero(t, n);
    for (Eigen::Index l = 0; l < n; ++l) {
      // k = 0 (and k = T/2 for even T) are their own conjugates: real draws.
      joint(0, l) = std::sqrt(variance(0, l)) * rng.normal();
      for (Eigen::Index k = 1; 2 * k < t; ++k) {
        const double amp = std::sqrt(variance(k, l) / 2.0);
        const std::complex<double> z(amp * rng.normal(), amp * rng.normal());
        joint(k, l) = z;
        joint(t - k, l) = std::conj(z);
      }
      if (t % 2 == 0 && t > 1) {
        joint(t / 2, l) = std::sqrt(variance(t / 2, l)) * rng.normal();
      }
    }
    SpectralSignal spec_sig{joint, true, true};
    const Eigen::MatrixXcd real_domain =
        ifft_time(igft_space(spec_sig, spectrum)).values;
    if (real_domain.imag().cwiseAbs().maxCoeff() > 1e-10) {
      throw Error("gen_joint_stationary: inverse transform is not real");
    }
    ensemble.samples[static_cast<std::size_t>(m)] = real_domain.real();
  });
  return ensemble;
}

SampleEnsemble gen_diffusion_wave(const DiffusionWaveSpec& spec, const Graph& graph) {
  graph.validate();
  const Eigen::Index n = graph.n_nodes();
  require_counts(spec.t_len, n, spec.n_samples);
  if (!(spec.noise_std >= 0.0)) {
    throw InvalidParameterError("gen_diffusion_wave: noise_std must be >= 0");
  }

  const Eigen::MatrixXd lap = laplacian(graph, LaplacianKind::Combinatorial);
  const GraphSpectrum spectrum = eigendecompose(lap, LaplacianKind::Combinatorial);
  const double lambda_max = spectrum.eigenvalues(spectrum.eigenvalues.size() - 1);
  if (spec.eta < 0.0 || (lambda_max > 0.0 && spec.eta * lambda_max >= 1.0)) {
    throw InvalidParameterError("gen_diffusion_wave: eta must satisfy 0 <= eta < 1/lambda_max");
  }
  for (const auto& imp : spec.impulses) {
    if (imp.time < 0 || imp.time >= spec.t_len || imp.node < 0 || imp.node >= n) {
      throw InvalidParameterError("gen_diffusion_wave: impulse outside the signal");
    }
  }

  Eigen::MatrixXd propagator = -spec.eta * lap;
  propagator.diagonal().array() += 1.0;

  SampleEnsemble ensemble;
  ensemble.samples.resize(static_cast<std::size_t>(spec.n_samples));
  parallel_for_index(spec.n_samples, [&](Eigen::Index m) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(m));
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(spec.t_len, n);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(n);
    for (Eigen::Index t = 0; t < spec.t_len; ++t) {
      if (t > 0) state = propagator * state;
      if (spec.noise_std > 0.0) {
        for (Eigen::Index v = 0; v < n; ++v) {
          state(v) += spec.noise_std * rng.normal();
        }
      }
      for (const auto& imp : spec.impulses) {
        if (imp.time == t) state(imp.node) += imp.magnitude;
      }
      s.row(t) = state.transpose();
    }
    ensemble.samples[static_cast<std::size_t>(m)] = std::move(s);
  });
  return ensemble;
}

Eigen::MatrixXd gen_diffusion_series(const Graph& graph, Eigen::Index length,
                                     double eta, double noise_std,
                                     Eigen::Index impulse_period,
                                     double impulse_magnitude, std::uint64_t seed) {
  if (impulse_period < 1) {
    throw InvalidParameterError("gen_diffusion_series: impulse_period must be >= 1");
  }
  DiffusionWaveSpec spec;
  spec.eta = eta;
  spec.noise_std = noise_std;
  spec.t_len = length;
  spec.n_samples = 1;
  spec.seed = seed;
  CounterRng node_rng(seed, 0xd1f5u);
  for (Eigen::Index t = 0; t < length; t += impulse_period) {
    spec.impulses.push_back(Impulse{
        t, static_cast<Eigen::Index>(node_rng.next_below(
               static_cast<std::uint64_t>(graph.n_nodes()))),
        impulse_magnitude});
  }
  return gen_diffusion_wave(spec, graph).samples.front();
}

}  // namespace frest
