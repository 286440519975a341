#include "frest/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "frest/errors.hpp"
#include "frest/rng.hpp"

namespace frest {

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kPi = 3.141592653589793238462643383279502884;

double euclidean(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  double dx = a[0] - b[0];
  double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

void Graph::validate() const {
  const Eigen::Index n = adjacency.rows();
  if (n < 1 || adjacency.cols() != n) {
    throw InvalidInputError("graph adjacency must be a square matrix with N >= 1");
  }
  if (!adjacency.allFinite()) {
    throw InvalidInputError("graph adjacency contains non-finite entries");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) {
      throw InvalidInputError("graph adjacency has a nonzero diagonal entry");
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (adjacency(i, j) != adjacency(j, i)) {
        throw InvalidInputError("graph adjacency is not symmetric");
      }
      if (adjacency(i, j) < 0.0) {
        throw InvalidInputError("graph adjacency has a negative weight");
      }
    }
  }
  if (!node_labels.empty() && static_cast<Eigen::Index>(node_labels.size()) != n) {
    throw InvalidInputError("node label count does not match node count");
  }
}

double haversine_distance_km(double lat1_deg, double lon1_deg,
                             double lat2_deg, double lon2_deg) {
  if (!std::isfinite(lat1_deg) || !std::isfinite(lon1_deg) ||
      !std::isfinite(lat2_deg) || !std::isfinite(lon2_deg)) {
    throw InvalidInputError("haversine: non-finite coordinate");
  }
  if (std::abs(lat1_deg) > 90.0 || std::abs(lat2_deg) > 90.0) {
    throw InvalidInputError("haversine: latitude outside [-90, 90] degrees");
  }
  const double d2r = kPi / 180.0;
  const double lat1 = lat1_deg * d2r;
  const double lat2 = lat2_deg * d2r;
  const double dlat = (lat2_deg - lat1_deg) * d2r;
  const double dlon = (lon2_deg - lon1_deg) * d2r;
  const double sl = std::sin(dlat / 2.0);
  const double so = std::sin(dlon / 2.0);
  double a = sl * sl + std::cos(lat1) * std::cos(lat2) * so * so;
  a = std::min(1.0, std::max(0.0, a));
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(a));
}

Graph build_gaussian_kernel_graph(const std::vector<std::array<double, 2>>& coords,
                                  DistanceMetric metric, double sigma_sq,
                                  double epsilon) {
  const Eigen::Index n = static_cast<Eigen::Index>(coords.size());
  if (n < 1) {
    throw InvalidInputError("gaussian kernel graph needs at least one node");
  }
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw InvalidParameterError("gaussian kernel graph: sigma_sq must be positive");
  }
  if (!(epsilon >= 0.0) || epsilon > 1.0) {
    // epsilon == 1 is allowed: it keeps coincident-point edges only.
    throw InvalidParameterError("gaussian kernel graph: epsilon must lie in [0, 1]");
  }
  for (const auto& c : coords) {
    if (!std::isfinite(c[0]) || !std::isfinite(c[1])) {
      throw InvalidInputError("gaussian kernel graph: non-finite coordinate");
    }
  }

  Graph g;
  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = metric == DistanceMetric::Haversine
                           ? haversine_distance_km(coords[i][0], coords[i][1],
                                                   coords[j][0], coords[j][1])
                           : euclidean(coords[i], coords[j]);
      const double w = std::exp(-(d * d) / sigma_sq);
      if (w >= epsilon) {
        g.adjacency(i, j) = w;
        g.adjacency(j, i) = w;
      }
    }
  }
  return g;
}

Eigen::MatrixXd laplacian(const Graph& g, LaplacianKind kind) {
  g.validate();
  const Eigen::Index n = g.n_nodes();
  const Eigen::VectorXd degree = g.adjacency.rowwise().sum();
  if (kind == LaplacianKind::Combinatorial) {
    Eigen::MatrixXd l = -g.adjacency;
    l.diagonal() = degree;
    return l;
  }
  Eigen::VectorXd dinv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dinv_sqrt(i) = degree(i) > 0.0 ? 1.0 / std::sqrt(degree(i)) : 0.0;
  }
  Eigen::MatrixXd l =
      -(dinv_sqrt.asDiagonal() * g.adjacency * dinv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  return l;
}

namespace {

// One cyclic Jacobi rotation zeroing A(p, q); V accumulates eigenvectors.
void jacobi_rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v,
                   Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(1.0, theta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const Eigen::Index n = a.rows();
  const double app = a(p, p);
  const double aqq = a(q, q);
  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == p || i == q) continue;
    const double aip = a(i, p);
    const double aiq = a(i, q);
    a(i, p) = c * aip - s * aiq;
    a(p, i) = a(i, p);
    a(i, q) = s * aip + c * aiq;
    a(q, i) = a(i, q);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double vip = v(i, p);
    const double viq = v(i, q);
    v(i, p) = c * vip - s * viq;
    v(i, q) = s * vip + c * viq;
  }
}

double offdiag_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

// First component with magnitude above 1e-12 decides the sign of a column.
void fix_eigenvector_sign(Eigen::Ref<Eigen::VectorXd> column) {
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    if (std::abs(column(i)) > 1e-12) {
      if (column(i) < 0.0) column = -column;
      return;
    }
  }
}

}  // namespace

GraphSpectrum eigendecompose(const Eigen::MatrixXd& symmetric, LaplacianKind kind) {
  const Eigen::Index n = symmetric.rows();
  if (n < 1 || symmetric.cols() != n) {
    throw InvalidInputError("eigendecompose: matrix must be square with N >= 1");
  }
  if (!symmetric.allFinite()) {
    throw InvalidInputError("eigendecompose: matrix contains non-finite entries");
  }
  const double asym = (symmetric - symmetric.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw InvalidInputError("eigendecompose: matrix is not symmetric within 1e-10");
  }

  Eigen::MatrixXd a = symmetric;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double tol = 1e-12 * symmetric.norm();
  constexpr int kMaxSweeps = 100;

  double off = offdiag_norm(a);
  int sweep = 0;
  while (off > tol && sweep < kMaxSweeps) {
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        jacobi_rotate(a, v, p, q);
      }
    }
    off = offdiag_norm(a);
    ++sweep;
  }
  if (off > tol) {
    throw ConvergenceError("eigendecompose: Jacobi sweeps exhausted", off);
  }

  // Sort ascending; exact eigenvalue ties keep the original column order
  // (the stable sort), and every column gets the deterministic sign.
  std::vector<Eigen::VectorXd> columns(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    columns[static_cast<std::size_t>(j)] = v.col(j);
    fix_eigenvector_sign(columns[static_cast<std::size_t>(j)]);
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return a(x, x) < a(y, y);
  });

  GraphSpectrum spectrum;
  spectrum.laplacian_kind = kind;
  spectrum.eigenvalues.resize(n);
  spectrum.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    spectrum.eigenvalues(j) = a(src, src);
    spectrum.eigenvectors.col(j) = columns[static_cast<std::size_t>(src)];
  }
  return spectrum;
}

GraphSpectrum graph_spectrum(const Graph& g, LaplacianKind kind) {
  return eigendecompose(laplacian(g, kind), kind);
}

bool is_connected(const Graph& g) {
  const Eigen::Index n = g.n_nodes();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> stack{0};
  seen[0] = true;
  Eigen::Index visited = 1;
  while (!stack.empty()) {
    const Eigen::Index u = stack.back();
    stack.pop_back();
    for (Eigen::Index w = 0; w < n; ++w) {
      if (g.adjacency(u, w) > 0.0 && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  return visited == n;
}

Graph random_geometric_graph(int n_nodes, std::uint64_t seed,
                             double sigma_sq, double epsilon) {
  if (n_nodes < 1) {
    throw InvalidParameterError("random_geometric_graph: n_nodes must be >= 1");
  }
  constexpr int kMaxAttempts = 64;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    CounterRng rng(seed, static_cast<std::uint64_t>(attempt));
    std::vector<std::array<double, 2>> pts(static_cast<std::size_t>(n_nodes));
    for (auto& p : pts) {
      p[0] = rng.uniform01();
      p[1] = rng.uniform01();
    }
    Graph g = build_gaussian_kernel_graph(pts, DistanceMetric::Euclidean,
                                          sigma_sq, epsilon);
    if (is_connected(g)) return g;
  }
  throw ConvergenceError(
      "random_geometric_graph: no connected sample after 64 attempts", 0.0);
}

}  // namespace frest
