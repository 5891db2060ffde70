#pragma once
#include <algorithm>
#include <string>
#include <variant>

#include "pursuit/environment.hpp"
#include "pursuit/ppo.hpp"

namespace pursuit {

// The three lookahead strategies compared by the harness. Every source
// produces values inside the configured bounds.
struct FixedLookahead {
  double L = 1.2;
  double lo = 0.35, hi = 4.0;

  double lookahead(const Observation&) { return std::clamp(L, lo, hi); }
  void reset() {}
};

// L = clip(a + b v, lo, hi)
struct ScheduledLookahead {
  double a = 0.30;  // meters
  double b = 0.25;  // seconds
  double lo = 0.35, hi = 4.0;

  double lookahead(const Observation& obs) { return std::clamp(a + b * obs.v, lo, hi); }
  void reset() {}
};

// Deterministic policy output mapped onto the bounds and exponentially
// smoothed before publishing.
class LearnedLookahead {
 public:
  LearnedLookahead(const PolicyBundle* bundle, double smoothing_alpha, double lo = 0.35,
                   double hi = 4.0)
      : bundle_(bundle), smoother_(smoothing_alpha), lo_(lo), hi_(hi) {}

  double lookahead(const Observation& obs) {
    const double raw = bundle_->act(obs.as_vector());
    const double L = action_to_lookahead(raw, lo_, hi_);
    return std::clamp(smoother_.apply(L), lo_, hi_);
  }
  void reset() { smoother_.reset(); }

 private:
  const PolicyBundle* bundle_;
  LookaheadSmoother smoother_;
  double lo_, hi_;
};

using LookaheadSource = std::variant<FixedLookahead, ScheduledLookahead, LearnedLookahead>;

inline double source_lookahead(LookaheadSource& src, const Observation& obs) {
  return std::visit([&](auto& s) { return s.lookahead(obs); }, src);
}

inline void source_reset(LookaheadSource& src) {
  std::visit([](auto& s) { s.reset(); }, src);
}

inline std::string source_name(const LookaheadSource& src) {
  if (std::holds_alternative<FixedLookahead>(src)) return "fixed";
  if (std::holds_alternative<ScheduledLookahead>(src)) return "scheduled";
  return "learned";
}

}  // namespace pursuit
