#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace frest {

enum class DistanceMetric { Euclidean, Haversine };
enum class LaplacianKind { Combinatorial, SymmetricNormalized };

/// Undirected weighted graph held as a dense adjacency matrix.
/// Invariants: symmetric, non-negative weights, zero diagonal, N >= 1.
struct Graph {
  Eigen::MatrixXd adjacency;
  std::vector<std::string> node_labels;  // optional, empty when unnamed

  Eigen::Index n_nodes() const { return adjacency.rows(); }

  /// Throws InvalidInputError when any invariant is violated.
  void validate() const;
};

/// Eigendecomposition of a graph Laplacian. Columns of `eigenvectors` are the
/// orthonormal graph Fourier basis, sorted by ascending eigenvalue, each with
/// its first significant component made positive so results are reproducible.
struct GraphSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  LaplacianKind laplacian_kind = LaplacianKind::Combinatorial;

  Eigen::Index n_nodes() const { return eigenvalues.size(); }
};

/// Great-circle distance in kilometers (mean Earth radius 6371.0 km).
/// Inputs are (latitude, longitude) in degrees.
double haversine_distance_km(double lat1_deg, double lon1_deg,
                             double lat2_deg, double lon2_deg);

/// Thresholded Gaussian kernel adjacency: A_ij = exp(-d_ij^2 / sigma_sq) kept
/// when it reaches `epsilon`, zero otherwise; the diagonal is always zero.
Graph build_gaussian_kernel_graph(const std::vector<std::array<double, 2>>& coords,
                                  DistanceMetric metric, double sigma_sq,
                                  double epsilon);

/// Combinatorial (D - A) or symmetric-normalized (I - D^-1/2 A D^-1/2)
/// Laplacian. Zero-degree nodes contribute 0 to D^-1/2, leaving them with a
/// unit diagonal entry and no coupling under the normalized kind.
Eigen::MatrixXd laplacian(const Graph& g, LaplacianKind kind);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm falls below 1e-12 times the
/// matrix norm, capped at 100 sweeps (ConvergenceError carries the residual
/// beyond that). Output order and eigenvector signs are deterministic: two
/// calls on identical input produce bit-identical spectra.
GraphSpectrum eigendecompose(const Eigen::MatrixXd& symmetric,
                             LaplacianKind kind = LaplacianKind::Combinatorial);

/// laplacian() followed by eigendecompose(), tagging the spectrum's kind.
GraphSpectrum graph_spectrum(const Graph& g, LaplacianKind kind);

/// Gaussian-kernel graph over points drawn uniformly in the unit square,
/// resampled (up to 64 attempts) until connected.
Graph random_geometric_graph(int n_nodes, std::uint64_t seed,
                             double sigma_sq = 0.08, double epsilon = 0.25);

bool is_connected(const Graph& g);

}  // namespace frest
