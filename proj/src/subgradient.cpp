#include "ranrc/subgradient.hpp"

namespace ranrc {

SubgradientNodeState SubgradientNodeState::initialize(const Vector& x0) {
  SubgradientNodeState s;
  s.x = x0;
  s.t = 1;
  return s;
}

SubgradientMessage SubgradientNodeState::broadcast(const CostFunction& cost) const {
  SubgradientMessage msg;
  msg.x = x;
  msg.grad = cost.gradient(x);
  msg.value = cost.value(x);
  return msg;
}

void SubgradientNodeState::receive(const CostFunction& cost, const SubgradientParams& p,
                                   const SubgradientMessage& msg) {
  const double step = p.alpha / static_cast<double>(t);
  if (p.literal_update) {
    // Additive cost-value rule, the scalar sum lifted uniformly across
    // coordinates. Kept only for side-by-side comparison.
    const double v = cost.value(x) + msg.value;
    x = 0.5 * (msg.x + x) + Vector::Constant(x.size(), step * v);
  } else {
    const Vector local_grad = cost.gradient(x);
    x = 0.5 * (msg.x + x) - step * (msg.grad + local_grad);
  }
  t += 1;
}

}  // namespace ranrc
