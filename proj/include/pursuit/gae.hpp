#pragma once
#include <cstddef>
#include <cstdint>
#include <vector>

namespace pursuit {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one rollout:
//   delta_t = r_t + gamma v_{t+1} (1 - done_t) - v_t
//   A_t     = delta_t + gamma lambda (1 - done_t) A_{t+1}
//   R_t     = A_t + v_t
// bootstrap_value stands in for v_T at the end of the rollout.
inline GaeResult compute_gae(const std::vector<double>& rewards,
                             const std::vector<double>& values,
                             const std::vector<std::uint8_t>& dones, double gamma, double lambda,
                             double bootstrap_value) {
  const std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double gae = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double next_value = (t + 1 < n) ? values[t + 1] : bootstrap_value;
    const double delta = rewards[t] + gamma * next_value * not_done - values[t];
    gae = delta + gamma * lambda * not_done * gae;
    out.advantages[t] = gae;
    out.returns[t] = gae + values[t];
  }
  return out;
}

}  // namespace pursuit
