#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace pursuit {

// Running first/second moments with the parallel-variance update.
class RunningMeanStd {
 public:
  explicit RunningMeanStd(std::size_t dim = 1)
      : mean_(dim, 0.0), var_(dim, 1.0), count_(1e-4) {}

  void update(const std::vector<double>& x) {
    const double tot = count_ + 1.0;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      const double delta = x[i] - mean_[i];
      const double new_mean = mean_[i] + delta / tot;
      const double m2 = var_[i] * count_ + delta * delta * count_ / tot;
      mean_[i] = new_mean;
      var_[i] = m2 / tot;
    }
    count_ = tot;
  }

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& var() const { return var_; }
  double count() const { return count_; }

  void set(std::vector<double> mean, std::vector<double> var, double count) {
    mean_ = std::move(mean);
    var_ = std::move(var);
    count_ = count;
  }

 private:
  std::vector<double> mean_, var_;
  double count_;
};

// Online observation whitening with clipping; statistics can be frozen for
// deployment.
class ObsNormalizer {
 public:
  explicit ObsNormalizer(std::size_t dim = 1, double clip = 10.0) : rms_(dim), clip_(clip) {}

  std::vector<double> apply(const std::vector<double>& obs) const {
    std::vector<double> out(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const double z = (obs[i] - rms_.mean()[i]) / std::sqrt(rms_.var()[i] + 1e-8);
      out[i] = std::clamp(z, -clip_, clip_);
    }
    return out;
  }

  // Stats update first, then whitening, so the freshest moments are used.
  std::vector<double> normalize(const std::vector<double>& obs, bool update) {
    if (update && !frozen_) rms_.update(obs);
    return apply(obs);
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  RunningMeanStd& rms() { return rms_; }
  const RunningMeanStd& rms() const { return rms_; }
  double clip() const { return clip_; }

 private:
  RunningMeanStd rms_;
  double clip_;
  bool frozen_ = false;
};

// Reward scaling by the running standard deviation of the discounted return.
class ReturnNormalizer {
 public:
  explicit ReturnNormalizer(double gamma = 0.99, double clip = 10.0)
      : rms_(1), gamma_(gamma), clip_(clip) {}

  double normalize(double reward, bool done, bool update) {
    if (update && !frozen_) {
      running_return_ = gamma_ * running_return_ + reward;
      rms_.update({running_return_});
    }
    const double r = reward / std::sqrt(rms_.var()[0] + 1e-8);
    if (done) running_return_ = 0.0;
    return std::clamp(r, -clip_, clip_);
  }

  void reset_return() { running_return_ = 0.0; }
  void freeze() { frozen_ = true; }
  RunningMeanStd& rms() { return rms_; }
  const RunningMeanStd& rms() const { return rms_; }
  double gamma() const { return gamma_; }
  double clip() const { return clip_; }

 private:
  RunningMeanStd rms_;
  double gamma_;
  double clip_;
  double running_return_ = 0.0;
  bool frozen_ = false;
};

}  // namespace pursuit
