#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ranrc {

class Rng;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A C^2, strongly convex local cost with exact gradient and Hessian.
/// Implementations are immutable after construction; concurrent read-only
/// evaluation is safe.
class CostFunction {
 public:
  virtual ~CostFunction() = default;

  virtual int dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Matrix hessian(const Vector& x) const = 0;

  /// Combined evaluation used by the hot simulation loop; overridden where a
  /// shared-residual pass is cheaper than two separate calls.
  virtual void gradient_and_hessian(const Vector& x, Vector& grad, Matrix& hess) const {
    grad = gradient(x);
    hess = hessian(x);
  }

 protected:
  void check_dimension(const Vector& x) const {
    if (x.size() != dimension())
      throw DimensionError("cost expects dimension " + std::to_string(dimension()) +
                           ", got " + std::to_string(x.size()));
  }
};

/// f(x) = 1/2 (x-a)^T W (x-a) with W symmetric positive definite.
class QuadraticCost final : public CostFunction {
 public:
  QuadraticCost(Matrix w, Vector a);

  int dimension() const override { return static_cast<int>(a_.size()); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  void gradient_and_hessian(const Vector& x, Vector& grad, Matrix& hess) const override;

  const Matrix& w() const { return w_; }
  const Vector& center() const { return a_; }

 private:
  Matrix w_;
  Vector a_;
};

/// Rows of (feature vector, target). All rows share the feature dimension.
struct Dataset {
  Matrix features;  // m x n_f
  Vector targets;   // m
  std::string provenance;

  long rows() const { return features.rows(); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
};

/// Numeric CSV reader. Comma- or whitespace-separated; a single leading
/// header line is skipped when it contains any non-numeric cell. Malformed
/// data rows are reported with their 1-based line number.
Dataset load_csv_dataset(const std::string& path, const std::vector<int>& feature_columns,
                         int target_column);

/// Disjoint cover of d's rows over n_agents parts, each row assigned
/// uniformly at random. Redraws the whole assignment until no part is empty.
std::vector<Dataset> partition_dataset(const Dataset& d, int n_agents, Rng& rng);

/// Regression cost with per-residual term r^2 / (|r| + beta) plus a ridge
/// gamma * ||x||^2 on the weights. The decision variable stacks the feature
/// weights and the intercept as the last coordinate; by default the ridge
/// does not touch the intercept (ridge_intercept restores it).
class SmoothHuberRegressionCost final : public CostFunction {
 public:
  SmoothHuberRegressionCost(Dataset data, double beta, double gamma,
                            bool ridge_intercept = false);

  int dimension() const override { return static_cast<int>(xt_.cols()); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  void gradient_and_hessian(const Vector& x, Vector& grad, Matrix& hess) const override;

  /// Plain row-by-row accumulation, kept as the reference the blocked kernel
  /// is tested and benchmarked against.
  double value_reference(const Vector& x) const;
  Vector gradient_reference(const Vector& x) const;
  Matrix hessian_reference(const Vector& x) const;

  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  long rows() const { return xt_.rows(); }

  // Per-residual derivatives of u(r) = r^2 / (|r| + beta).
  static double term(double r, double beta) { return r * r / (std::abs(r) + beta); }
  static double term_d1(double r, double beta) {
    const double d = std::abs(r) + beta;
    return (r * std::abs(r) + 2.0 * beta * r) / (d * d);
  }
  static double term_d2(double r, double beta) {
    const double d = std::abs(r) + beta;
    return 2.0 * beta * beta / (d * d * d);
  }

  /// Fixed row blocking; block results combine in block order, so values do
  /// not depend on the number of OpenMP threads.
  static constexpr long kBlockRows = 256;

 private:
  struct Partial {
    double value = 0.0;
    Vector grad_data;
    Matrix hess_data;
  };
  void eval_blocks(const Vector& x, bool want_value, bool want_grad, bool want_hess,
                   double& value, Vector& grad, Matrix& hess) const;
  void ridge_terms(const Vector& x, bool want_value, bool want_grad, bool want_hess,
                   double& value, Vector& grad, Matrix& hess) const;

  Matrix xt_;  // m x (n_f + 1), last column all ones for the intercept
  Vector y_;
  double beta_;
  double gamma_;
  bool ridge_intercept_;
};

}  // namespace ranrc
