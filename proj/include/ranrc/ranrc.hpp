#pragma once

#include <utility>
#include <vector>

#include "ranrc/costs.hpp"

namespace ranrc {

/// epsilon blends the local estimate toward the network Newton direction;
/// epsilon = 0 freezes the estimates and runs the pure ratio consensus,
/// which the diagnostics rely on. c floors the curvature estimate away
/// from zero before the solve.
struct RanrcParams {
  double epsilon = 1e-2;
  double c = 1e-6;

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
      throw std::invalid_argument("epsilon must be in [0, 1]");
    if (!(c > 0.0)) throw std::invalid_argument("c must be > 0");
  }
};

struct BroadcastMessage {
  int sender = -1;
  Vector b_y;
  Matrix b_z;
};

/// Canonical flat serialization: sender, b_y, then the b_z upper triangle
/// row-major. 1 + n + n(n+1)/2 numbers.
std::vector<double> serialize(const BroadcastMessage& msg);
BroadcastMessage deserialize_message(const std::vector<double>& flat, int n);

/// Eigenvalue flooring: decompose z = Q L Q^T, floor every eigenvalue at c,
/// recompose. Returns z unchanged when nothing is floored; reduces to
/// max(z, c) exactly for 1x1 input. Throws on asymmetric input.
Matrix threshold(const Matrix& z, double c);

/// solve(threshold(z, c), y) computed from one eigendecomposition.
/// `floored` reports whether any eigenvalue was below c.
Vector solve_thresholded(const Matrix& z, double c, const Vector& y,
                         bool* floored = nullptr);

/// The common limit of the ratios y_i/z_i under frozen estimates:
///   (sum_i H_i(x_i))^-1 sum_i (H_i(x_i) x_i - grad_i(x_i)).
/// Diagnostic used by tests, not by the protocol.
Vector phi(const std::vector<std::pair<Vector, const CostFunction*>>& states);

/// Per-node protocol state. Owned by the simulation engine; updates are
/// single-threaded within one run.
class NodeState {
 public:
  Vector x;           // local estimate of the global minimizer
  Vector y;           // estimate (up to push-sum weight) of sum_i g_i
  Matrix z;           // estimate (up to weight) of sum_i h_i
  Vector g, g_old;    // current/previous H(x) x - grad(x)
  Matrix h, h_old;    // current/previous H(x)
  Vector b_y;         // cumulative broadcast mass
  Matrix b_z;
  std::vector<int> in_ids;   // sorted in-neighbor ids
  std::vector<Vector> r_y;   // last received cumulative mass, per in-neighbor
  std::vector<Matrix> r_z;
  long threshold_hits = 0;   // solves where the floor was active

  static NodeState initialize(const CostFunction& cost, const Vector& x0,
                              std::vector<int> in_neighbors);

  /// Wake-up update; returns the message carrying the post-update b_y, b_z.
  BroadcastMessage wake_up(const CostFunction& cost, const RanrcParams& p, int out_degree);

  /// Delivery of a broadcast from an in-neighbor. Throws on unknown sender.
  void receive(const CostFunction& cost, const RanrcParams& p, const BroadcastMessage& msg);

  /// Ledger entries for one in-neighbor (used by the mass audit).
  const Vector& received_y(int sender) const { return r_y[ledger_index(sender)]; }
  const Matrix& received_z(int sender) const { return r_z[ledger_index(sender)]; }

 private:
  void descend_and_refresh(const CostFunction& cost, const RanrcParams& p);
  int ledger_index(int sender) const;
};

}  // namespace ranrc
