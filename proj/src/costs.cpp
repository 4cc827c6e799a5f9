#include "ranrc/costs.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

#include "ranrc/rng.hpp"

namespace ranrc {

QuadraticCost::QuadraticCost(Matrix w, Vector a) : w_(std::move(w)), a_(std::move(a)) {
  if (w_.rows() != w_.cols() || w_.rows() != a_.size())
    throw DimensionError("quadratic cost: W must be n x n matching center size");
  if ((w_ - w_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("quadratic cost: W not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(w_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("quadratic cost: W not positive definite");
}

double QuadraticCost::value(const Vector& x) const {
  check_dimension(x);
  const Vector d = x - a_;
  return 0.5 * d.dot(w_ * d);
}

Vector QuadraticCost::gradient(const Vector& x) const {
  check_dimension(x);
  return w_ * (x - a_);
}

Matrix QuadraticCost::hessian(const Vector& x) const {
  check_dimension(x);
  return w_;
}

void QuadraticCost::gradient_and_hessian(const Vector& x, Vector& grad, Matrix& hess) const {
  check_dimension(x);
  grad.noalias() = w_ * (x - a_);
  hess = w_;
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  size_t i = 0;
  const bool comma = line.find(',') != std::string_view::npos;
  while (i < line.size()) {
    if (comma) {
      size_t j = line.find(',', i);
      if (j == std::string_view::npos) j = line.size();
      std::string_view c = line.substr(i, j - i);
      while (!c.empty() && std::isspace(static_cast<unsigned char>(c.front()))) c.remove_prefix(1);
      while (!c.empty() && std::isspace(static_cast<unsigned char>(c.back()))) c.remove_suffix(1);
      cells.push_back(c);
      i = j + 1;
    } else {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i == line.size()) break;
      size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      cells.push_back(line.substr(i, j - i));
      i = j;
    }
  }
  return cells;
}

}  // namespace

Dataset load_csv_dataset(const std::string& path, const std::vector<int>& feature_columns,
                         int target_column) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path);
  if (feature_columns.empty()) throw CsvError("no feature columns given");

  std::vector<std::vector<double>> feats;
  std::vector<double> targs;
  std::string line;
  long lineno = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cells = split_cells(line);
    if (cells.empty()) continue;

    std::vector<double> row(cells.size());
    bool numeric = true;
    for (size_t k = 0; k < cells.size(); ++k) {
      if (!parse_double(cells[k], row[k])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first_content_line) {  // header line, skipped
        first_content_line = false;
        continue;
      }
      throw CsvError(path + ": non-numeric cell on line " + std::to_string(lineno));
    }
    first_content_line = false;

    const int width = static_cast<int>(row.size());
    for (int c : feature_columns)
      if (c < 0 || c >= width)
        throw CsvError(path + ": missing column " + std::to_string(c) + " on line " +
                       std::to_string(lineno));
    if (target_column < 0 || target_column >= width)
      throw CsvError(path + ": missing column " + std::to_string(target_column) +
                     " on line " + std::to_string(lineno));

    std::vector<double> f(feature_columns.size());
    for (size_t k = 0; k < feature_columns.size(); ++k) f[k] = row[feature_columns[k]];
    feats.push_back(std::move(f));
    targs.push_back(row[target_column]);
  }
  if (feats.empty()) throw CsvError(path + ": no data rows");

  Dataset d;
  d.features.resize(static_cast<long>(feats.size()), static_cast<long>(feature_columns.size()));
  d.targets.resize(static_cast<long>(targs.size()));
  for (size_t r = 0; r < feats.size(); ++r) {
    for (size_t c = 0; c < feats[r].size(); ++c) d.features(r, c) = feats[r][c];
    d.targets(r) = targs[r];
  }
  d.provenance = path;
  return d;
}

std::vector<Dataset> partition_dataset(const Dataset& d, int n_agents, Rng& rng) {
  const long m = d.rows();
  if (n_agents < 1) throw std::invalid_argument("n_agents must be >= 1");
  if (n_agents > m)
    throw std::invalid_argument("n_agents (" + std::to_string(n_agents) +
                                ") exceeds row count (" + std::to_string(m) + ")");

  std::vector<int> owner(m);
  std::vector<long> counts;
  for (;;) {
    counts.assign(n_agents, 0);
    for (long r = 0; r < m; ++r) {
      owner[r] = static_cast<int>(rng.below(n_agents));
      ++counts[owner[r]];
    }
    if (*std::min_element(counts.begin(), counts.end()) > 0) break;
  }

  std::vector<Dataset> parts(n_agents);
  for (int a = 0; a < n_agents; ++a) {
    parts[a].features.resize(counts[a], d.feature_dim());
    parts[a].targets.resize(counts[a]);
    parts[a].provenance = d.provenance + "#part" + std::to_string(a);
  }
  std::vector<long> fill(n_agents, 0);
  for (long r = 0; r < m; ++r) {
    const int a = owner[r];
    parts[a].features.row(fill[a]) = d.features.row(r);
    parts[a].targets(fill[a]) = d.targets(r);
    ++fill[a];
  }
  return parts;
}

SmoothHuberRegressionCost::SmoothHuberRegressionCost(Dataset data, double beta, double gamma,
                                                     bool ridge_intercept)
    : beta_(beta), gamma_(gamma), ridge_intercept_(ridge_intercept) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (data.rows() < 1) throw std::invalid_argument("empty dataset");
  const long m = data.rows();
  const int nf = data.feature_dim();
  xt_.resize(m, nf + 1);
  xt_.leftCols(nf) = data.features;
  xt_.col(nf).setOnes();
  y_ = data.targets;
}

void SmoothHuberRegressionCost::ridge_terms(const Vector& x, bool want_value, bool want_grad,
                                            bool want_hess, double& value, Vector& grad,
                                            Matrix& hess) const {
  const int n = dimension();
  const int nw = ridge_intercept_ ? n : n - 1;  // coordinates the ridge touches
  if (want_value) value += gamma_ * x.head(nw).squaredNorm();
  if (want_grad) grad.head(nw) += 2.0 * gamma_ * x.head(nw);
  if (want_hess)
    for (int k = 0; k < nw; ++k) hess(k, k) += 2.0 * gamma_;
}

void SmoothHuberRegressionCost::eval_blocks(const Vector& x, bool want_value, bool want_grad,
                                            bool want_hess, double& value, Vector& grad,
                                            Matrix& hess) const {
  check_dimension(x);
  const long m = xt_.rows();
  const int n = dimension();
  const long nblocks = (m + kBlockRows - 1) / kBlockRows;

  std::vector<Partial> partials(nblocks);
  // Each block accumulates into its own slot; slots combine in block order
  // below, so results are invariant to the thread count.
#pragma omp parallel for schedule(static) if (m >= 4 * kBlockRows)
  for (long b = 0; b < nblocks; ++b) {
    const long r0 = b * kBlockRows;
    const long rows = std::min(kBlockRows, m - r0);
    const auto xb = xt_.middleRows(r0, rows);
    const Vector r = y_.segment(r0, rows) - xb * x;
    Partial& p = partials[b];
    if (want_value) {
      double v = 0.0;
      for (long k = 0; k < rows; ++k) v += term(r(k), beta_);
      p.value = v;
    }
    if (want_grad) {
      Vector d1(rows);
      for (long k = 0; k < rows; ++k) d1(k) = term_d1(r(k), beta_);
      p.grad_data.noalias() = -xb.transpose() * d1;
    }
    if (want_hess) {
      Vector d2(rows);
      for (long k = 0; k < rows; ++k) d2(k) = term_d2(r(k), beta_);
      p.hess_data.noalias() = xb.transpose() * d2.asDiagonal() * xb;
    }
  }

  if (want_grad) grad = Vector::Zero(n);
  if (want_hess) hess = Matrix::Zero(n, n);
  for (const auto& p : partials) {
    if (want_value) value += p.value;
    if (want_grad) grad += p.grad_data;
    if (want_hess) hess += p.hess_data;
  }
  if (want_hess) hess = ((hess + hess.transpose()) * 0.5).eval();  // exact symmetry
  ridge_terms(x, want_value, want_grad, want_hess, value, grad, hess);
}

double SmoothHuberRegressionCost::value(const Vector& x) const {
  double v = 0.0;
  Vector g;
  Matrix h;
  eval_blocks(x, true, false, false, v, g, h);
  return v;
}

Vector SmoothHuberRegressionCost::gradient(const Vector& x) const {
  double v = 0.0;
  Vector g;
  Matrix h;
  eval_blocks(x, false, true, false, v, g, h);
  return g;
}

Matrix SmoothHuberRegressionCost::hessian(const Vector& x) const {
  double v = 0.0;
  Vector g;
  Matrix h;
  eval_blocks(x, false, false, true, v, g, h);
  return h;
}

void SmoothHuberRegressionCost::gradient_and_hessian(const Vector& x, Vector& grad,
                                                     Matrix& hess) const {
  double v = 0.0;
  eval_blocks(x, false, true, true, v, grad, hess);
}

double SmoothHuberRegressionCost::value_reference(const Vector& x) const {
  check_dimension(x);
  double v = 0.0;
  for (long k = 0; k < xt_.rows(); ++k) v += term(y_(k) - xt_.row(k).dot(x), beta_);
  Vector g;
  Matrix h;
  ridge_terms(x, true, false, false, v, g, h);
  return v;
}

Vector SmoothHuberRegressionCost::gradient_reference(const Vector& x) const {
  check_dimension(x);
  Vector g = Vector::Zero(dimension());
  for (long k = 0; k < xt_.rows(); ++k) {
    const double r = y_(k) - xt_.row(k).dot(x);
    g -= term_d1(r, beta_) * xt_.row(k).transpose();
  }
  double v = 0.0;
  Matrix h;
  ridge_terms(x, false, true, false, v, g, h);
  return g;
}

Matrix SmoothHuberRegressionCost::hessian_reference(const Vector& x) const {
  check_dimension(x);
  const int n = dimension();
  Matrix h = Matrix::Zero(n, n);
  for (long k = 0; k < xt_.rows(); ++k) {
    const double r = y_(k) - xt_.row(k).dot(x);
    h += term_d2(r, beta_) * (xt_.row(k).transpose() * xt_.row(k));
  }
  double v = 0.0;
  Vector g;
  ridge_terms(x, false, false, true, v, g, h);
  return h;
}

}  // namespace ranrc
