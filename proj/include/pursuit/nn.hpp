#pragma once
#include <cmath>
#include <cstddef>
#include <vector>

#include "pursuit/error.hpp"
#include "pursuit/rng.hpp"

namespace pursuit {

// Pointers into a trainable parameter vector and its gradient accumulator.
struct ParamRef {
  std::vector<double>* w;
  std::vector<double>* g;
};

struct MlpCache {
  std::vector<std::vector<double>> act;  // act[0] = input, act[l+1] = layer l output
};

// Fully connected net, tanh hidden activations, linear output. Forward caches
// activations; backward accumulates parameter gradients.
class Mlp {
 public:
  Mlp() = default;

  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    const std::size_t layers = sizes_.size() - 1;
    W_.resize(layers);
    b_.resize(layers);
    gW_.resize(layers);
    gb_.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      W_[l].assign(static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l], 0.0);
      b_[l].assign(sizes_[l + 1], 0.0);
      gW_[l].assign(W_[l].size(), 0.0);
      gb_[l].assign(b_[l].size(), 0.0);
    }
  }

  // Xavier-uniform init; the output layer is scaled down so fresh policies
  // start near the mid-range action.
  void randomize(Rng& rng, double out_scale = 1.0) {
    for (std::size_t l = 0; l < W_.size(); ++l) {
      const double limit = std::sqrt(6.0 / (sizes_[l] + sizes_[l + 1]));
      const double scale = (l + 1 == W_.size()) ? out_scale : 1.0;
      for (double& w : W_[l]) w = rng.uniform(-limit, limit) * scale;
      for (double& b : b_[l]) b = 0.0;
    }
  }

  const std::vector<double>& forward(const std::vector<double>& x, MlpCache& cache) const {
    const std::size_t layers = W_.size();
    cache.act.resize(layers + 1);
    cache.act[0] = x;
    for (std::size_t l = 0; l < layers; ++l) {
      const int in = sizes_[l], out = sizes_[l + 1];
      auto& y = cache.act[l + 1];
      y.assign(out, 0.0);
      const auto& a = cache.act[l];
      for (int o = 0; o < out; ++o) {
        double acc = b_[l][o];
        const double* wrow = &W_[l][static_cast<std::size_t>(o) * in];
        for (int i = 0; i < in; ++i) acc += wrow[i] * a[i];
        y[o] = (l + 1 < layers) ? std::tanh(acc) : acc;
      }
    }
    return cache.act.back();
  }

  // dLdy: gradient w.r.t. the (linear) output. Accumulates into gW/gb.
  void backward(const MlpCache& cache, std::vector<double> dLdy) {
    const std::size_t layers = W_.size();
    for (std::size_t l = layers; l-- > 0;) {
      const int in = sizes_[l], out = sizes_[l + 1];
      const auto& a = cache.act[l];
      std::vector<double> dLda(in, 0.0);
      for (int o = 0; o < out; ++o) {
        const double d = dLdy[o];
        gb_[l][o] += d;
        double* gwrow = &gW_[l][static_cast<std::size_t>(o) * in];
        const double* wrow = &W_[l][static_cast<std::size_t>(o) * in];
        for (int i = 0; i < in; ++i) {
          gwrow[i] += d * a[i];
          dLda[i] += d * wrow[i];
        }
      }
      if (l > 0) {
        // through the tanh of the previous layer's output
        for (int i = 0; i < in; ++i) dLda[i] *= 1.0 - a[i] * a[i];
      }
      dLdy = std::move(dLda);
    }
  }

  void zero_grad() {
    for (auto& g : gW_) std::fill(g.begin(), g.end(), 0.0);
    for (auto& g : gb_) std::fill(g.begin(), g.end(), 0.0);
  }

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    for (std::size_t l = 0; l < W_.size(); ++l) {
      out.push_back({&W_[l], &gW_[l]});
      out.push_back({&b_[l], &gb_[l]});
    }
    return out;
  }

  const std::vector<int>& sizes() const { return sizes_; }
  std::vector<std::vector<double>>& weights() { return W_; }
  std::vector<std::vector<double>>& biases() { return b_; }
  const std::vector<std::vector<double>>& weights() const { return W_; }
  const std::vector<std::vector<double>>& biases() const { return b_; }

 private:
  std::vector<int> sizes_;
  std::vector<std::vector<double>> W_, b_, gW_, gb_;
};

// Global gradient norm over a parameter set; rescales in place when the norm
// exceeds max_norm. Returns the pre-clip norm.
inline double clip_grad_norm(const std::vector<ParamRef>& refs, double max_norm) {
  double total = 0.0;
  for (const auto& r : refs)
    for (double g : *r.g) total += g * g;
  total = std::sqrt(total);
  if (max_norm > 0.0 && total > max_norm) {
    const double scale = max_norm / (total + 1e-12);
    for (const auto& r : refs)
      for (double& g : *r.g) g *= scale;
  }
  return total;
}

// Adam with the usual defaults over a fixed parameter set.
class Adam {
 public:
  explicit Adam(std::vector<ParamRef> refs, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : refs_(std::move(refs)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& r : refs_) {
      m_.emplace_back(r.w->size(), 0.0);
      v_.emplace_back(r.w->size(), 0.0);
    }
  }

  void step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t k = 0; k < refs_.size(); ++k) {
      auto& w = *refs_[k].w;
      const auto& g = *refs_[k].g;
      for (std::size_t i = 0; i < w.size(); ++i) {
        m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g[i];
        v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g[i] * g[i];
        const double mhat = m_[k][i] / bc1;
        const double vhat = v_[k][i] / bc2;
        w[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

 private:
  std::vector<ParamRef> refs_;
  std::vector<std::vector<double>> m_, v_;
  double beta1_, beta2_, eps_;
  long long t_ = 0;
};

}  // namespace pursuit
