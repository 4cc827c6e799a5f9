#pragma once

// Shared test utilities: finite-difference oracles, random strongly
// connected digraphs, synthetic cost families, scratch directories.

#include <unistd.h>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ranrc/costs.hpp"
#include "ranrc/graph.hpp"
#include "ranrc/rng.hpp"

namespace ranrc::testutil {

inline std::string source_path(const std::string& rel) {
  return std::string(RANRC_SOURCE_DIR) + "/" + rel;
}

inline std::string housing_csv() { return source_path("data/housing.csv"); }

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ranrc_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Central finite differences of the cost value.
inline Vector fd_gradient(const CostFunction& c, const Vector& x, double h = 1e-6) {
  const int n = static_cast<int>(x.size());
  Vector g(n);
  for (int i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (c.value(xp) - c.value(xm)) / (2.0 * h);
  }
  return g;
}

/// Central finite differences of the gradient.
inline Matrix fd_hessian(const CostFunction& c, const Vector& x, double h = 1e-6) {
  const int n = static_cast<int>(x.size());
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    m.col(i) = (c.gradient(xp) - c.gradient(xm)) / (2.0 * h);
  }
  return ((m + m.transpose()) * 0.5).eval();
}

inline bool bitwise_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

inline bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double rel_err(const Vector& got, const Vector& want) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(1.0, want.cwiseAbs().maxCoeff());
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(1.0, want.cwiseAbs().maxCoeff());
}

/// Random strongly connected digraph: a ring over a random node permutation
/// plus independent extra edges.
inline DirectedGraph random_strongly_connected(int n, double extra_edge_prob, Rng& rng) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[static_cast<int>(rng.below(i + 1))]);
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<char>> present(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) {
    const int a = perm[i], b = perm[(i + 1) % n];
    edges.emplace_back(a, b);
    present[a][b] = 1;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && !present[i][j] && rng.uniform01() < extra_edge_prob)
        edges.emplace_back(i, j);
  return DirectedGraph::from_edge_list(n, edges);
}

inline std::unique_ptr<QuadraticCost> random_quadratic(int dim, Rng& rng,
                                                       double w_lo = 0.5, double w_hi = 2.0,
                                                       double a_lo = -5.0, double a_hi = 5.0) {
  Matrix w;
  if (dim == 1) {
    w.resize(1, 1);
    w(0, 0) = rng.uniform(w_lo, w_hi);
  } else {
    Vector lam(dim);
    for (int i = 0; i < dim; ++i) lam(i) = rng.uniform(w_lo, w_hi);
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
    Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
    w = q * lam.asDiagonal() * q.transpose();
    w = ((w + w.transpose()) * 0.5).eval();
  }
  Vector center(dim);
  for (int i = 0; i < dim; ++i) center(i) = rng.uniform(a_lo, a_hi);
  return std::make_unique<QuadraticCost>(std::move(w), std::move(center));
}

/// Well-conditioned synthetic regression rows: bounded features, targets
/// near a planted model so residuals stay O(1).
inline Dataset synthetic_regression(long rows, int nf, Rng& rng) {
  Dataset d;
  d.features.resize(rows, nf);
  d.targets.resize(rows);
  Vector w(nf);
  for (int i = 0; i < nf; ++i) w(i) = rng.uniform(-1.0, 1.0);
  const double intercept = rng.uniform(-1.0, 1.0);
  for (long r = 0; r < rows; ++r) {
    for (int c = 0; c < nf; ++c) d.features(r, c) = rng.uniform(-1.0, 1.0);
    d.targets(r) = d.features.row(r).dot(w) + intercept + rng.uniform(-1.0, 1.0);
  }
  d.provenance = "synthetic";
  return d;
}

inline std::vector<std::unique_ptr<CostFunction>> random_huber_family(int n_agents, int nf,
                                                                      long rows_each,
                                                                      Rng& rng,
                                                                      double beta = 1.0,
                                                                      double gamma = 1.0) {
  std::vector<std::unique_ptr<CostFunction>> costs;
  for (int i = 0; i < n_agents; ++i)
    costs.push_back(std::make_unique<SmoothHuberRegressionCost>(
        synthetic_regression(rows_each, nf, rng), beta, gamma));
  return costs;
}

}  // namespace ranrc::testutil
