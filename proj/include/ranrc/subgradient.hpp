#pragma once

#include "ranrc/costs.hpp"

namespace ranrc {

/// alpha scales the diminishing step alpha / t. literal_update reproduces
/// the additive cost-value rule for comparison; the default is the descent
/// form with gradients and a minus sign.
struct SubgradientParams {
  double alpha = 0.1;
  bool literal_update = false;

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  }
};

/// Payload of one broadcast: the sender's estimate plus its local gradient
/// and cost value at that estimate (2n + 1 numbers).
struct SubgradientMessage {
  int sender = -1;
  Vector x;
  Vector grad;
  double value = 0.0;
};

class SubgradientNodeState {
 public:
  Vector x;
  long t = 1;  // local update counter; increments only on successful receive

  static SubgradientNodeState initialize(const Vector& x0);

  SubgradientMessage broadcast(const CostFunction& cost) const;

  void receive(const CostFunction& cost, const SubgradientParams& p,
               const SubgradientMessage& msg);
};

}  // namespace ranrc
