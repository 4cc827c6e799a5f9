#include "ranrc/ranrc.hpp"

#include <algorithm>
#include <cmath>

namespace ranrc {

std::vector<double> serialize(const BroadcastMessage& msg) {
  const int n = static_cast<int>(msg.b_y.size());
  std::vector<double> flat;
  flat.reserve(1 + n + n * (n + 1) / 2);
  flat.push_back(static_cast<double>(msg.sender));
  for (int i = 0; i < n; ++i) flat.push_back(msg.b_y(i));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) flat.push_back(msg.b_z(i, j));
  return flat;
}

BroadcastMessage deserialize_message(const std::vector<double>& flat, int n) {
  const size_t expect = 1 + n + n * (n + 1) / 2;
  if (flat.size() != expect)
    throw std::invalid_argument("message length " + std::to_string(flat.size()) +
                                ", expected " + std::to_string(expect));
  BroadcastMessage msg;
  msg.sender = static_cast<int>(flat[0]);
  msg.b_y.resize(n);
  msg.b_z.resize(n, n);
  size_t k = 1;
  for (int i = 0; i < n; ++i) msg.b_y(i) = flat[k++];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      msg.b_z(i, j) = flat[k];
      msg.b_z(j, i) = flat[k];
      ++k;
    }
  return msg;
}

namespace {

void require_symmetric(const Matrix& z) {
  if (z.rows() != z.cols()) throw std::invalid_argument("threshold: input not square");
  for (long i = 0; i < z.rows(); ++i)
    for (long j = i + 1; j < z.cols(); ++j)
      if (std::abs(z(i, j) - z(j, i)) > 1e-12)
        throw std::invalid_argument("threshold: input not symmetric");
}

}  // namespace

Matrix threshold(const Matrix& z, double c) {
  require_symmetric(z);
  if (z.rows() == 1) {
    Matrix out(1, 1);
    out(0, 0) = std::max(z(0, 0), c);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(z);
  if (es.eigenvalues().minCoeff() >= c) return z;
  Vector lam = es.eigenvalues().cwiseMax(c);
  Matrix out = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return ((out + out.transpose()) * 0.5).eval();
}

Vector solve_thresholded(const Matrix& z, double c, const Vector& y, bool* floored) {
  require_symmetric(z);
  if (z.rows() != y.size()) throw std::invalid_argument("solve: size mismatch");
  if (z.rows() == 1) {
    const double zc = std::max(z(0, 0), c);
    if (floored) *floored = z(0, 0) < c;
    Vector out(1);
    out(0) = y(0) / zc;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(z);
  if (floored) *floored = es.eigenvalues().minCoeff() < c;
  const Vector lam = es.eigenvalues().cwiseMax(c);
  return es.eigenvectors() * lam.cwiseInverse().asDiagonal() *
         (es.eigenvectors().transpose() * y);
}

Vector phi(const std::vector<std::pair<Vector, const CostFunction*>>& states) {
  if (states.empty()) throw std::invalid_argument("phi: empty state list");
  const int n = static_cast<int>(states.front().first.size());
  Matrix hsum = Matrix::Zero(n, n);
  Vector gsum = Vector::Zero(n);
  for (const auto& [x, cost] : states) {
    if (x.size() != n) throw DimensionError("phi: mixed dimensions");
    const Matrix h = cost->hessian(x);
    gsum += h * x - cost->gradient(x);
    hsum += h;
  }
  Eigen::FullPivLU<Matrix> lu(hsum);
  if (!lu.isInvertible()) throw std::runtime_error("phi: singular Hessian sum");
  return lu.solve(gsum);
}

NodeState NodeState::initialize(const CostFunction& cost, const Vector& x0,
                                std::vector<int> in_neighbors) {
  if (!x0.allFinite()) throw std::invalid_argument("initialize: x0 not finite");
  const int n = cost.dimension();
  if (x0.size() != n) throw DimensionError("initialize: x0 dimension mismatch");

  NodeState s;
  s.x = x0;
  s.h = cost.hessian(x0);
  s.g = s.h * x0 - cost.gradient(x0);
  s.g_old = s.g;
  s.h_old = s.h;
  s.y = s.g;
  s.z = s.h;
  s.b_y = Vector::Zero(n);
  s.b_z = Matrix::Zero(n, n);
  std::sort(in_neighbors.begin(), in_neighbors.end());
  s.in_ids = std::move(in_neighbors);
  s.r_y.assign(s.in_ids.size(), Vector::Zero(n));
  s.r_z.assign(s.in_ids.size(), Matrix::Zero(n, n));
  return s;
}

void NodeState::descend_and_refresh(const CostFunction& cost, const RanrcParams& p) {
  // epsilon = 0 leaves x unchanged bitwise, so g - g_old stays exactly zero.
  if (p.epsilon == 0.0) return;
  bool floored = false;
  const Vector direction = solve_thresholded(z, p.c, y, &floored);
  if (floored) ++threshold_hits;
  // The thresholded solve cannot fail on finite input; a diverged run
  // (non-finite y or z) is a recorded outcome, not an error.
  if (!direction.allFinite() && y.allFinite() && z.allFinite())
    throw std::logic_error("ranrc: thresholded solve produced non-finite direction");
  x = (1.0 - p.epsilon) * x + p.epsilon * direction;
  Vector grad;
  cost.gradient_and_hessian(x, grad, h);
  g.noalias() = h * x;
  g -= grad;
}

BroadcastMessage NodeState::wake_up(const CostFunction& cost, const RanrcParams& p,
                                    int out_degree) {
  if (out_degree < 1) throw std::invalid_argument("wake_up: out-degree must be >= 1");
  const double scale = 1.0 / (out_degree + 1);
  y = scale * (y + g - g_old);
  z = scale * (z + h - h_old);
  g_old = g;
  h_old = h;
  descend_and_refresh(cost, p);
  b_y += y;
  b_z += z;
  return BroadcastMessage{/*sender unset by the node*/ -1, b_y, b_z};
}

int NodeState::ledger_index(int sender) const {
  const auto it = std::lower_bound(in_ids.begin(), in_ids.end(), sender);
  if (it == in_ids.end() || *it != sender)
    throw std::invalid_argument("receive: unknown sender " + std::to_string(sender));
  return static_cast<int>(it - in_ids.begin());
}

void NodeState::receive(const CostFunction& cost, const RanrcParams& p,
                        const BroadcastMessage& msg) {
  const int k = ledger_index(msg.sender);
  y += msg.b_y - r_y[k] + g - g_old;
  z += msg.b_z - r_z[k] + h - h_old;
  g_old = g;
  h_old = h;
  descend_and_refresh(cost, p);
  r_y[k] = msg.b_y;
  r_z[k] = msg.b_z;
}

}  // namespace ranrc
