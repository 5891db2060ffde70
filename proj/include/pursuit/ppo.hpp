#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"
#include "pursuit/env_interface.hpp"
#include "pursuit/error.hpp"
#include "pursuit/gae.hpp"
#include "pursuit/geometry.hpp"
#include "pursuit/nn.hpp"
#include "pursuit/normalizer.hpp"
#include "pursuit/rng.hpp"

namespace pursuit {

struct PpoConfig {
  int n_steps = 10000;        // rollout length
  int batch_size = 256;
  int epochs = 5;
  double gamma = 0.99;
  double lambda = 0.98;       // GAE
  double clip_eps = 0.2;
  double target_kl = 0.015;   // early stop at 1.5x
  double ent_coef = 0.02;     // c_s
  double vf_coef = 0.6;       // c_v
  double lr0 = 2.3927e-4;     // linearly decayed: lr(f) = lr0 * f
  long long total_steps = 800000;
  double max_grad_norm = 0.5;
  long long eval_every = 10000;
  int eval_episodes = 2;
  int hidden = 64;
  bool normalize_obs = true;
  bool normalize_reward = true;
  double obs_clip = 10.0;
  double reward_clip = 10.0;
};

inline double learning_rate(const PpoConfig& cfg, double remaining_progress) {
  return cfg.lr0 * remaining_progress;
}

// Diagonal Gaussian policy head over one action, tanh-squashed to [-1, 1].
// log_std is state-independent.
struct GaussianPolicy {
  Mlp mean_net;
  std::vector<double> log_std{0.0};
  std::vector<double> g_log_std{0.0};

  double actor_mean(const std::vector<double>& obs, MlpCache& cache) const {
    const double m = mean_net.forward(obs, cache)[0];
    if (!std::isfinite(m))
      throw TrainingFault("actor produced non-finite mean (|params| dump in checkpoint)");
    return m;
  }

  std::vector<ParamRef> params() {
    auto out = mean_net.params();
    out.push_back({&log_std, &g_log_std});
    return out;
  }
};

// log(1 - tanh(u)^2) via the numerically stable sech^2 identity.
inline double squash_log_jacobian(double u) {
  const double au = std::abs(u);
  return std::log(4.0) - 2.0 * (au + std::log1p(std::exp(-2.0 * au)));
}

// Log-density of the squashed action expressed through the pre-squash value u.
inline double policy_log_prob(const GaussianPolicy& pol, double mean, double u) {
  const double log_std = pol.log_std[0];
  const double sigma = std::exp(log_std);
  const double z = (u - mean) / sigma;
  const double log_gauss = -0.5 * z * z - log_std - 0.5 * std::log(2.0 * kPi);
  return log_gauss - squash_log_jacobian(u);
}

// Base-Gaussian entropy (the squash correction has no closed form and is
// omitted, matching common practice for the bonus term).
inline double policy_entropy(const GaussianPolicy& pol) {
  return pol.log_std[0] + 0.5 * std::log(2.0 * kPi * std::exp(1.0));
}

struct ActionSample {
  double u;       // pre-squash
  double action;  // tanh(u)
  double log_prob;
};

inline ActionSample sample_action(const GaussianPolicy& pol, double mean, Rng& rng) {
  const double sigma = std::exp(pol.log_std[0]);
  const double u = mean + sigma * rng.gaussian();
  return {u, std::tanh(u), policy_log_prob(pol, mean, u)};
}

inline double deterministic_action(double mean) { return std::tanh(mean); }

struct RolloutBuffer {
  int obs_dim = 0;
  std::vector<double> obs;  // flattened, size * obs_dim
  std::vector<double> u;
  std::vector<double> logp;
  std::vector<double> value;
  std::vector<double> reward;
  std::vector<std::uint8_t> done;
  std::vector<double> adv;
  std::vector<double> ret;

  int size() const { return static_cast<int>(u.size()); }

  void clear(int dim) {
    obs_dim = dim;
    obs.clear();
    u.clear();
    logp.clear();
    value.clear();
    reward.clear();
    done.clear();
    adv.clear();
    ret.clear();
  }

  void push(const std::vector<double>& o, double u_t, double logp_t, double v_t, double r_t,
            bool done_t) {
    obs.insert(obs.end(), o.begin(), o.end());
    u.push_back(u_t);
    logp.push_back(logp_t);
    value.push_back(v_t);
    reward.push_back(r_t);
    done.push_back(done_t ? 1 : 0);
  }

  void compute_advantages(double gamma, double lambda, double bootstrap_value) {
    const GaeResult g = compute_gae(reward, value, done, gamma, lambda, bootstrap_value);
    adv = g.advantages;
    ret = g.returns;
  }

  std::vector<double> observation(int t) const {
    return {obs.begin() + static_cast<std::ptrdiff_t>(t) * obs_dim,
            obs.begin() + static_cast<std::ptrdiff_t>(t + 1) * obs_dim};
  }
};

struct LossStats {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_frac = 0.0;

  bool finite() const {
    return std::isfinite(total) && std::isfinite(policy) && std::isfinite(value) &&
           std::isfinite(entropy) && std::isfinite(approx_kl);
  }
};

// Full PPO loss (clipped surrogate + value + entropy terms) on a minibatch,
// optionally accumulating analytic gradients. `advantages` must be aligned
// with the buffer; indices pick the minibatch.
inline LossStats ppo_loss(GaussianPolicy& pol, Mlp& critic, const RolloutBuffer& buf,
                          const std::vector<double>& advantages, const std::vector<int>& idx,
                          const PpoConfig& cfg, bool with_grad) {
  LossStats st;
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  MlpCache pc, vc;
  for (const int t : idx) {
    const std::vector<double> o = buf.observation(t);
    const double mean = pol.actor_mean(o, pc);
    const double v_pred = critic.forward(o, vc)[0];

    const double log_std = pol.log_std[0];
    const double sigma = std::exp(log_std);
    const double z = (buf.u[t] - mean) / sigma;
    const double logp_new = -0.5 * z * z - log_std - 0.5 * std::log(2.0 * kPi) -
                            squash_log_jacobian(buf.u[t]);
    const double log_ratio = logp_new - buf.logp[t];
    const double ratio = std::exp(log_ratio);
    const double a_t = advantages[t];

    // clipped surrogate, Eq. semantics: maximize min(r A, clip(r) A)
    const double unclipped = ratio * a_t;
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * a_t;
    const bool take_unclipped = unclipped <= clipped;
    st.policy += -std::min(unclipped, clipped) * inv_n;

    const double v_err = v_pred - buf.ret[t];
    st.value += v_err * v_err * inv_n;
    st.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;
    if (std::abs(ratio - 1.0) > cfg.clip_eps) st.clip_frac += inv_n;

    if (with_grad) {
      // d(-surrogate)/d logp_new = -A r on the unclipped branch, else 0
      if (take_unclipped) {
        const double dmin_dlogp = a_t * ratio;
        const double dloss_dlogp = -dmin_dlogp * inv_n;
        // d logp / d mean = z / sigma ; d logp / d log_std = z^2 - 1
        pol.mean_net.backward(pc, {dloss_dlogp * (z / sigma)});
        pol.g_log_std[0] += dloss_dlogp * (z * z - 1.0);
      }
      critic.backward(vc, {cfg.vf_coef * 2.0 * v_err * inv_n});
    }
  }
  st.entropy = policy_entropy(pol);
  if (with_grad) pol.g_log_std[0] += -cfg.ent_coef;  // d(-c_s H)/d log_std
  st.total = st.policy + cfg.vf_coef * st.value - cfg.ent_coef * st.entropy;
  return st;
}

// Actor, critic, and their optimizer state. One agent per training run.
class PpoAgent {
 public:
  PpoAgent(int obs_dim, int hidden, std::uint64_t seed) {
    policy.mean_net = Mlp({obs_dim, hidden, hidden, 1});
    critic = Mlp({obs_dim, hidden, hidden, 1});
    Rng rng(seed, /*stream=*/41);
    policy.mean_net.randomize(rng, /*out_scale=*/0.01);
    critic.randomize(rng, /*out_scale=*/1.0);
    policy.log_std[0] = 0.0;
  }

  std::vector<ParamRef> params() {
    auto out = policy.params();
    for (auto& r : critic.params()) out.push_back(r);
    return out;
  }

  void zero_grad() {
    policy.mean_net.zero_grad();
    policy.g_log_std[0] = 0.0;
    critic.zero_grad();
  }

  std::vector<std::vector<double>> snapshot() {
    std::vector<std::vector<double>> out;
    for (auto& r : params()) out.push_back(*r.w);
    return out;
  }

  void restore(const std::vector<std::vector<double>>& snap) {
    auto refs = params();
    for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].w = snap[i];
  }

  GaussianPolicy policy;
  Mlp critic;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double explained_variance = 0.0;
  double lr = 0.0;
  int epochs_run = 0;
  bool early_stopped = false;
  bool aborted_non_finite = false;
};

inline double explained_variance(const std::vector<double>& values,
                                 const std::vector<double>& returns) {
  const double n = static_cast<double>(returns.size());
  double mean_r = 0.0;
  for (double r : returns) mean_r += r / n;
  double var_r = 0.0, var_e = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    var_r += (returns[i] - mean_r) * (returns[i] - mean_r) / n;
    const double e = returns[i] - values[i];
    var_e += e * e / n;
  }
  // residual mean is not subtracted, matching the usual diagnostic
  return var_r > 0.0 ? 1.0 - var_e / var_r : std::numeric_limits<double>::quiet_NaN();
}

// One PPO update over a completed rollout: advantage normalization, shuffled
// minibatches for up to `epochs` passes, KL early stop at 1.5x target, global
// gradient-norm clipping, linear learning-rate decay via f. A non-finite loss
// restores the pre-update parameters.
inline UpdateStats ppo_update(PpoAgent& agent, Adam& adam, const RolloutBuffer& buf,
                              const PpoConfig& cfg, double remaining_progress, Rng& rng) {
  UpdateStats stats;
  stats.lr = learning_rate(cfg, remaining_progress);
  const int n = buf.size();

  // advantages normalized once per update
  std::vector<double> adv = buf.adv;
  double mean = 0.0, var = 0.0;
  for (double a : adv) mean += a / n;
  for (double a : adv) var += (a - mean) * (a - mean) / n;
  const double std_dev = std::sqrt(var);
  for (double& a : adv) a = (a - mean) / (std_dev + 1e-8);

  const auto snap = agent.snapshot();
  const auto refs = agent.params();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  double kl_sum = 0.0, clip_sum = 0.0, pl_sum = 0.0, vl_sum = 0.0;
  int minibatches = 0;
  bool stop = false;
  for (int epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int end = std::min(n, start + cfg.batch_size);
      const std::vector<int> idx(order.begin() + start, order.begin() + end);

      agent.zero_grad();
      const LossStats ls =
          ppo_loss(agent.policy, agent.critic, buf, adv, idx, cfg, /*with_grad=*/true);
      if (!ls.finite()) {
        agent.restore(snap);
        stats.aborted_non_finite = true;
        return stats;
      }
      if (cfg.target_kl > 0.0 && ls.approx_kl > 1.5 * cfg.target_kl) {
        stats.early_stopped = true;
        stop = true;
        break;  // skip this minibatch's step and stop the update
      }
      const double gnorm = clip_grad_norm(refs, cfg.max_grad_norm);
      if (!std::isfinite(gnorm)) {
        agent.restore(snap);
        stats.aborted_non_finite = true;
        return stats;
      }
      adam.step(stats.lr);

      kl_sum += ls.approx_kl;
      clip_sum += ls.clip_frac;
      pl_sum += ls.policy;
      vl_sum += ls.value;
      ++minibatches;
    }
    if (!stop) stats.epochs_run = epoch + 1;
  }

  if (minibatches > 0) {
    stats.approx_kl = kl_sum / minibatches;
    stats.clip_fraction = clip_sum / minibatches;
    stats.policy_loss = pl_sum / minibatches;
    stats.value_loss = vl_sum / minibatches;
  }
  stats.entropy = policy_entropy(agent.policy);
  stats.explained_variance = explained_variance(buf.value, buf.ret);
  return stats;
}

// Central finite differences of the full PPO loss over every parameter of
// actor and critic; returns the max relative error against backprop.
inline double gradient_check(PpoAgent& agent, const RolloutBuffer& buf, const PpoConfig& cfg,
                             double eps_fd = 1e-5) {
  std::vector<int> idx(buf.size());
  std::iota(idx.begin(), idx.end(), 0);

  agent.zero_grad();
  ppo_loss(agent.policy, agent.critic, buf, buf.adv, idx, cfg, /*with_grad=*/true);

  // collect analytic gradients aligned with params()
  std::vector<std::vector<double>> analytic;
  for (auto& r : agent.params()) analytic.push_back(*r.g);

  double max_rel = 0.0;
  auto refs = agent.params();
  for (std::size_t k = 0; k < refs.size(); ++k) {
    auto& w = *refs[k].w;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + eps_fd;
      const double lp = ppo_loss(agent.policy, agent.critic, buf, buf.adv, idx, cfg, false).total;
      w[i] = saved - eps_fd;
      const double lm = ppo_loss(agent.policy, agent.critic, buf, buf.adv, idx, cfg, false).total;
      w[i] = saved;
      const double numeric = (lp - lm) / (2.0 * eps_fd);
      const double a = analytic[k][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

// Deployable training artifact: networks, normalizer statistics, config.
struct PolicyBundle {
  int version = 1;
  std::vector<int> arch;
  GaussianPolicy policy;
  Mlp critic;
  ObsNormalizer obs_norm;
  ReturnNormalizer ret_norm;
  nlohmann::json config;

  // Deterministic squashed action in [-1, 1] from a raw observation.
  double act(const std::vector<double>& raw_obs) const {
    MlpCache c;
    return deterministic_action(policy.actor_mean(obs_norm.apply(raw_obs), c));
  }
};

namespace detail {

inline nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json j;
  j["sizes"] = net.sizes();
  j["weights"] = net.weights();
  j["biases"] = net.biases();
  return j;
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net(j.at("sizes").get<std::vector<int>>());
  net.weights() = j.at("weights").get<std::vector<std::vector<double>>>();
  net.biases() = j.at("biases").get<std::vector<std::vector<double>>>();
  return net;
}

}  // namespace detail

inline void save_policy_bundle(const std::string& path, const PolicyBundle& b) {
  nlohmann::json j;
  j["version"] = b.version;
  j["arch"] = b.arch;
  j["actor"] = detail::mlp_to_json(b.policy.mean_net);
  j["log_std"] = b.policy.log_std[0];
  j["critic"] = detail::mlp_to_json(b.critic);
  j["obs_norm"] = {{"mean", b.obs_norm.rms().mean()},
                   {"var", b.obs_norm.rms().var()},
                   {"count", b.obs_norm.rms().count()},
                   {"clip", b.obs_norm.clip()}};
  j["ret_norm"] = {{"var", b.ret_norm.rms().var()},
                   {"count", b.ret_norm.rms().count()},
                   {"gamma", b.ret_norm.gamma()},
                   {"clip", b.ret_norm.clip()}};
  j["config"] = b.config;
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write policy bundle: " + path);
  out << j.dump(2) << "\n";
}

inline PolicyBundle load_policy_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open policy bundle: " + path);
  nlohmann::json j;
  in >> j;

  PolicyBundle b;
  b.version = j.at("version").get<int>();
  b.arch = j.at("arch").get<std::vector<int>>();
  b.policy.mean_net = detail::mlp_from_json(j.at("actor"));
  b.policy.log_std[0] = j.at("log_std").get<double>();
  b.critic = detail::mlp_from_json(j.at("critic"));

  const auto& on = j.at("obs_norm");
  b.obs_norm = ObsNormalizer(b.arch.front(), on.at("clip").get<double>());
  b.obs_norm.rms().set(on.at("mean").get<std::vector<double>>(),
                       on.at("var").get<std::vector<double>>(), on.at("count").get<double>());
  b.obs_norm.freeze();

  const auto& rn = j.at("ret_norm");
  b.ret_norm = ReturnNormalizer(rn.at("gamma").get<double>(), rn.at("clip").get<double>());
  b.ret_norm.rms().set({0.0}, rn.at("var").get<std::vector<double>>(),
                       rn.at("count").get<double>());
  b.ret_norm.freeze();

  b.config = j.value("config", nlohmann::json::object());
  return b;
}

struct TrainLogRow {
  long long step = 0;
  double eval_mean_reward = 0.0;
  double eval_ep_len = 0.0;
  double explained_variance = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_frac = 0.0;
  double lr = 0.0;
};

struct TrainOptions {
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: keep everything in memory
};

struct TrainResult {
  PolicyBundle best;
  PolicyBundle final_bundle;
  std::vector<TrainLogRow> log;
  double best_eval_reward = -std::numeric_limits<double>::infinity();
  long long steps_done = 0;
};

namespace detail {

inline PolicyBundle make_bundle(const PpoAgent& agent, const ObsNormalizer& obs_norm,
                                const ReturnNormalizer& ret_norm, const PpoConfig& cfg,
                                std::uint64_t seed) {
  PolicyBundle b;
  b.arch = agent.policy.mean_net.sizes();
  b.policy = agent.policy;
  b.critic = agent.critic;
  b.obs_norm = obs_norm;
  b.obs_norm.freeze();
  b.ret_norm = ret_norm;
  b.ret_norm.freeze();
  b.config = {{"n_steps", cfg.n_steps},       {"batch_size", cfg.batch_size},
              {"epochs", cfg.epochs},         {"gamma", cfg.gamma},
              {"lambda", cfg.lambda},         {"clip_eps", cfg.clip_eps},
              {"target_kl", cfg.target_kl},   {"ent_coef", cfg.ent_coef},
              {"vf_coef", cfg.vf_coef},       {"lr0", cfg.lr0},
              {"total_steps", cfg.total_steps}, {"max_grad_norm", cfg.max_grad_norm},
              {"eval_every", cfg.eval_every}, {"hidden", cfg.hidden},
              {"normalize_obs", cfg.normalize_obs}, {"normalize_reward", cfg.normalize_reward},
              {"seed", seed}};
  return b;
}

inline std::pair<double, double> evaluate_policy(RolloutEnv& env, const PpoAgent& agent,
                                                 ObsNormalizer& obs_norm, const PpoConfig& cfg,
                                                 int episodes) {
  double reward_sum = 0.0;
  double len_sum = 0.0;
  MlpCache cache;
  for (int e = 0; e < episodes; ++e) {
    std::vector<double> obs = env.reset();
    for (;;) {
      const std::vector<double> o =
          cfg.normalize_obs ? obs_norm.normalize(obs, /*update=*/false) : obs;
      const double a = deterministic_action(agent.policy.actor_mean(o, cache));
      const EnvStep es = env.step(a);
      reward_sum += es.reward;
      len_sum += 1.0;
      if (es.done) break;
      obs = es.obs;
    }
  }
  return {reward_sum / episodes, len_sum / episodes};
}

}  // namespace detail

// Full training loop: rollouts with online normalization, GAE, PPO updates
// with linear learning-rate decay, periodic deterministic evaluation with
// best-model tracking. Deterministic for a fixed seed.
inline TrainResult train(RolloutEnv& env, RolloutEnv& eval_env, const PpoConfig& cfg,
                         const TrainOptions& opts) {
  PpoAgent agent(env.obs_dim(), cfg.hidden, opts.seed);
  Adam adam(agent.params());
  ObsNormalizer obs_norm(env.obs_dim(), cfg.obs_clip);
  ReturnNormalizer ret_norm(cfg.gamma, cfg.reward_clip);
  Rng sample_rng(opts.seed, /*stream=*/101);
  Rng shuffle_rng(opts.seed, /*stream=*/103);

  TrainResult result;
  RolloutBuffer buf;
  UpdateStats last_update;
  MlpCache pc, vc;

  const bool write_files = !opts.out_dir.empty();
  if (write_files) std::filesystem::create_directories(opts.out_dir);
  std::ofstream log_file;
  if (write_files) {
    log_file.open(opts.out_dir + "/train_log.csv");
    log_file << "step,eval_mean_reward,eval_ep_len,explained_variance,entropy,approx_kl,"
                "clip_frac,lr\n";
    log_file.precision(17);
  }

  auto run_eval = [&](long long step) {
    const auto [mean_r, mean_len] =
        detail::evaluate_policy(eval_env, agent, obs_norm, cfg, cfg.eval_episodes);
    TrainLogRow row{step,
                    mean_r,
                    mean_len,
                    last_update.explained_variance,
                    policy_entropy(agent.policy),
                    last_update.approx_kl,
                    last_update.clip_fraction,
                    last_update.lr};
    result.log.push_back(row);
    if (write_files) {
      log_file << row.step << "," << row.eval_mean_reward << "," << row.eval_ep_len << ","
               << row.explained_variance << "," << row.entropy << "," << row.approx_kl << ","
               << row.clip_frac << "," << row.lr << "\n";
      log_file.flush();
    }
    if (mean_r > result.best_eval_reward) {
      result.best_eval_reward = mean_r;
      result.best = detail::make_bundle(agent, obs_norm, ret_norm, cfg, opts.seed);
      if (write_files) save_policy_bundle(opts.out_dir + "/best_policy.json", result.best);
    }
  };

  std::vector<double> obs = env.reset();
  long long steps_done = 0;
  long long next_eval = cfg.eval_every;

  try {
    while (steps_done < cfg.total_steps) {
      buf.clear(env.obs_dim());
      for (int t = 0; t < cfg.n_steps; ++t) {
        const std::vector<double> o =
            cfg.normalize_obs ? obs_norm.normalize(obs, /*update=*/true) : obs;
        const double mean = agent.policy.actor_mean(o, pc);
        const ActionSample as = sample_action(agent.policy, mean, sample_rng);
        const double v_pred = agent.critic.forward(o, vc)[0];

        const EnvStep es = env.step(as.action);
        const double r_train = cfg.normalize_reward
                                   ? ret_norm.normalize(es.reward, es.done, /*update=*/true)
                                   : es.reward;
        buf.push(o, as.u, as.log_prob, v_pred, r_train, es.done);

        obs = es.done ? env.reset() : es.obs;
        ++steps_done;
        if (steps_done >= next_eval || steps_done >= cfg.total_steps) {
          run_eval(steps_done);
          next_eval += cfg.eval_every;
          if (steps_done >= cfg.total_steps) break;
        }
      }

      const std::vector<double> o_boot =
          cfg.normalize_obs ? obs_norm.normalize(obs, /*update=*/false) : obs;
      const double bootstrap = agent.critic.forward(o_boot, vc)[0];
      buf.compute_advantages(cfg.gamma, cfg.lambda, bootstrap);

      const double f = std::max(
          0.0, 1.0 - static_cast<double>(steps_done) / static_cast<double>(cfg.total_steps));
      last_update = ppo_update(agent, adam, buf, cfg, f, shuffle_rng);
    }
  } catch (const TrainingFault&) {
    if (write_files) {
      save_policy_bundle(opts.out_dir + "/crash_checkpoint.json",
                         detail::make_bundle(agent, obs_norm, ret_norm, cfg, opts.seed));
    }
    throw;
  }

  result.final_bundle = detail::make_bundle(agent, obs_norm, ret_norm, cfg, opts.seed);
  if (result.log.empty() ||
      result.best_eval_reward == -std::numeric_limits<double>::infinity()) {
    result.best = result.final_bundle;
  }
  if (write_files)
    save_policy_bundle(opts.out_dir + "/final_policy.json", result.final_bundle);
  result.steps_done = steps_done;
  return result;
}

}  // namespace pursuit
