#pragma once
#include <vector>

namespace pursuit {

struct EnvStep {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
};

// Minimal episodic environment surface consumed by the PPO trainer. Actions
// are scalar in [-1, 1].
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual int obs_dim() const = 0;
  virtual std::vector<double> reset() = 0;
  virtual EnvStep step(double action) = 0;
};

}  // namespace pursuit
