#include "abrlab/rl.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>
#include <thread>

#include "abrlab/error.hpp"

namespace abrlab {
namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DivergenceError(std::string("non-finite ") + what);
}

struct Minibatch {
  Matrix features;
  std::vector<std::size_t> actions;
  std::vector<double> old_logprobs;
  std::vector<double> advantages;
  std::vector<double> returns;
};

Matrix batch_features(const RolloutBatch& batch) {
  const auto dim = static_cast<Eigen::Index>(batch.transitions.front().features.size());
  Matrix x(dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& f = batch.transitions[j].features;
    x.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Vector>(f.data(), dim);
  }
  return x;
}

Minibatch gather(const RolloutBatch& batch, const Matrix& all_features,
                 std::span<const std::size_t> idx) {
  Minibatch mb;
  mb.features.resize(all_features.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto& t = batch.transitions[idx[j]];
    mb.features.col(static_cast<Eigen::Index>(j)) =
        all_features.col(static_cast<Eigen::Index>(idx[j]));
    mb.actions.push_back(t.action);
    mb.old_logprobs.push_back(t.old_logprob);
    mb.advantages.push_back(t.advantage);
    mb.returns.push_back(t.ret);
  }
  return mb;
}

double batch_kl(const PolicyValueNet& net, const RolloutBatch& batch, const Matrix& features) {
  const Matrix new_probs = softmax(net.actor.forward(features));
  Matrix old_probs(new_probs.rows(), new_probs.cols());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& p = batch.transitions[j].old_probs;
    old_probs.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
  }
  return kl_estimate(old_probs, new_probs);
}

// Entropy bonus -eta*mean(H) and its logit gradient, added into `out`.
void add_entropy_term(const Matrix& log_probs, double entropy_weight, PolicyLoss& out) {
  const auto b = static_cast<double>(log_probs.cols());
  double entropy_sum = 0.0;
  for (Eigen::Index j = 0; j < log_probs.cols(); ++j) {
    const Vector lp = log_probs.col(j);
    const Vector p = lp.array().exp();
    const double h = -(p.array() * lp.array()).sum();
    entropy_sum += h;
    out.grad_logits.col(j).array() += (entropy_weight / b) * p.array() * (lp.array() + h);
  }
  out.entropy = entropy_sum / b;
  out.loss -= entropy_weight * out.entropy;
}

void check_batch_shapes(const Matrix& logits, std::size_t n_actions, std::size_t n_adv) {
  const auto b = static_cast<std::size_t>(logits.cols());
  if (b == 0 || n_actions != b || n_adv != b) {
    throw std::invalid_argument("policy loss: batch sizes disagree");
  }
}

void run_actor(const PolicyValueNet& net, const RolloutSetup& setup, const ActorTask& task,
               std::size_t actor, RolloutBatch& out) {
  const auto& manifest = *setup.manifest;
  std::mt19937_64 rng(task.seed);
  PlayerConfig player = setup.player;
  if (player.start_offset_mode == StartOffsetMode::kRandom) player.start_offset_seed = rng();

  StreamingEnv env;
  StreamObservation obs = env.reset(*task.trace, manifest, setup.link, player);
  EpisodeRecord ep;
  ep.actor = actor;
  ep.trace_id = task.trace->id();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t limit = setup.max_steps == 0 ? manifest.num_chunks() : setup.max_steps;

  for (std::size_t step = 0; step < limit && !env.done(); ++step) {
    Transition t;
    t.features = encode_observation(obs, manifest);
    const Matrix x = column(t.features);
    const Matrix logp = log_softmax(net.actor.forward(x));
    t.old_probs.resize(static_cast<std::size_t>(logp.rows()));
    for (Eigen::Index a = 0; a < logp.rows(); ++a) {
      t.old_probs[static_cast<std::size_t>(a)] = std::exp(logp(a, 0));
    }
    const double u = unit(rng);
    double cumulative = 0.0;
    t.action = t.old_probs.size() - 1;
    for (std::size_t a = 0; a < t.old_probs.size(); ++a) {
      cumulative += t.old_probs[a];
      if (u < cumulative) {
        t.action = a;
        break;
      }
    }
    t.old_logprob = logp(static_cast<Eigen::Index>(t.action), 0);
    t.value_est = net.critic.forward(x)(0, 0);

    auto [next_obs, outcome] = env.step(t.action);
    const double bitrate = manifest.bitrate_kbps(t.action);
    const double prev = ep.bitrates_kbps.empty() ? bitrate : ep.bitrates_kbps.back();
    t.reward = chunk_reward(setup.variant, bitrate, prev, outcome.rebuffer_s);
    t.done = outcome.done;
    ep.bitrates_kbps.push_back(bitrate);
    ep.rebuffers_s.push_back(outcome.rebuffer_s);
    ep.qoe += t.reward;
    out.transitions.push_back(std::move(t));
    obs = std::move(next_obs);
  }
  ep.end = out.transitions.size();
  if (!env.done()) {
    ep.truncated = true;
    ep.bootstrap_value = net.forward_value(encode_observation(obs, manifest));
  }
  out.episodes.push_back(std::move(ep));
}

}  // namespace

Algo parse_algo(const std::string& name) {
  if (name == "ppo") return Algo::kPpo;
  if (name == "a3c") return Algo::kA3c;
  throw ValidationError("unknown learning algorithm '" + name + "' (ppo|a3c)");
}

std::string to_string(Algo algo) { return algo == Algo::kPpo ? "ppo" : "a3c"; }

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ValidationError("clip_eps must lie in (0, 1)");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) throw ValidationError("learning rates must be > 0");
  if (n_actors < 1) throw ValidationError("n_actors must be >= 1");
  if (!(entropy_end > 0.0 && entropy_start >= entropy_end)) {
    throw ValidationError("entropy weights must satisfy start >= end > 0");
  }
  if (epochs_per_update < 1 || minibatches_per_epoch < 1) {
    throw ValidationError("epochs_per_update and minibatches_per_epoch must be >= 1");
  }
  if (!(kl_limit > 0.0)) throw ValidationError("kl_limit must be > 0");
}

double RolloutBatch::mean_episode_qoe() const {
  if (episodes.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ep : episodes) sum += ep.qoe;
  return sum / static_cast<double>(episodes.size());
}

RolloutBatch collect_rollouts(const PolicyValueNet& snapshot, const RolloutSetup& setup,
                              std::span<const ActorTask> tasks) {
  if (setup.manifest == nullptr) throw std::invalid_argument("collect_rollouts: no manifest");
  std::vector<RolloutBatch> parts(tasks.size());
  const std::size_t workers = std::clamp<std::size_t>(setup.threads, 1, std::max<std::size_t>(tasks.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_actor(snapshot, setup, tasks[i], i, parts[i]);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < tasks.size(); i += workers) {
              run_actor(snapshot, setup, tasks[i], i, parts[i]);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  RolloutBatch batch;
  for (auto& part : parts) {
    const std::size_t offset = batch.transitions.size();
    for (auto& ep : part.episodes) {
      ep.begin += offset;
      ep.end += offset;
      batch.episodes.push_back(std::move(ep));
    }
    std::move(part.transitions.begin(), part.transitions.end(),
              std::back_inserter(batch.transitions));
  }
  return batch;
}

void compute_returns_advantages(RolloutBatch& batch, double gamma, bool standardize) {
  if (batch.transitions.empty()) throw std::invalid_argument("compute_returns_advantages: empty batch");
  for (const auto& ep : batch.episodes) {
    double running = ep.truncated ? ep.bootstrap_value : 0.0;
    for (std::size_t i = ep.end; i-- > ep.begin;) {
      auto& t = batch.transitions[i];
      if (t.done) running = 0.0;
      running = t.reward + gamma * running;
      t.ret = running;
      t.advantage = t.ret - t.value_est;
    }
  }
  if (!standardize) return;
  const auto n = static_cast<double>(batch.size());
  double mean = 0.0;
  for (const auto& t : batch.transitions) mean += t.advantage;
  mean /= n;
  double var = 0.0;
  for (const auto& t : batch.transitions) var += (t.advantage - mean) * (t.advantage - mean);
  const double std_dev = std::max(std::sqrt(var / n), 1e-8);
  for (auto& t : batch.transitions) t.advantage = (t.advantage - mean) / std_dev;
}

double clipped_objective(double ratio, double advantage, double clip_eps) {
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_estimate(const Matrix& old_probs, const Matrix& new_probs) {
  if (old_probs.rows() != new_probs.rows() || old_probs.cols() != new_probs.cols()) {
    throw std::invalid_argument("kl_estimate: distribution shapes differ");
  }
  if (new_probs.cols() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < new_probs.cols(); ++j) {
    for (Eigen::Index a = 0; a < new_probs.rows(); ++a) {
      const double p = new_probs(a, j);
      if (p > 0.0) total += p * (std::log(p) - std::log(old_probs(a, j)));
    }
  }
  return std::max(total / static_cast<double>(new_probs.cols()), 0.0);
}

double kl_estimate(std::span<const double> old_probs, std::span<const double> new_probs) {
  if (old_probs.size() != new_probs.size()) {
    throw std::invalid_argument("kl_estimate: distribution sizes differ");
  }
  const auto n = static_cast<Eigen::Index>(old_probs.size());
  return kl_estimate(Matrix(Eigen::Map<const Matrix>(old_probs.data(), n, 1)),
                     Matrix(Eigen::Map<const Matrix>(new_probs.data(), n, 1)));
}

double entropy_schedule(std::size_t epoch, std::size_t total_epochs, double start, double end) {
  const double decay = 0.6 * static_cast<double>(total_epochs);
  const auto e = static_cast<double>(epoch);
  if (e >= decay) return end;
  return start + (end - start) * (e / decay);
}

PolicyLoss ppo_policy_loss(const Matrix& logits, std::span<const std::size_t> actions,
                           std::span<const double> old_logprobs,
                           std::span<const double> advantages, double clip_eps,
                           double entropy_weight) {
  check_batch_shapes(logits, actions.size(), advantages.size());
  if (old_logprobs.size() != actions.size()) {
    throw std::invalid_argument("ppo_policy_loss: batch sizes disagree");
  }
  const auto b = static_cast<double>(logits.cols());
  const Matrix lp = log_softmax(logits);
  PolicyLoss out;
  out.grad_logits = Matrix::Zero(logits.rows(), logits.cols());
  double surrogate = 0.0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const auto i = static_cast<std::size_t>(j);
    const auto a = static_cast<Eigen::Index>(actions[i]);
    const double ratio = std::exp(lp(a, j) - old_logprobs[i]);
    const double adv = advantages[i];
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv;
    surrogate += std::min(unclipped, clipped);
    if (unclipped <= clipped) {
      // d(r A)/d logits = A r (onehot(a) - p); the clipped branch is flat.
      const double scale = -adv * ratio / b;
      out.grad_logits.col(j) = -scale * lp.col(j).array().exp().matrix();
      out.grad_logits(a, j) += scale;
    }
  }
  out.surrogate = surrogate / b;
  out.loss = -out.surrogate;
  add_entropy_term(lp, entropy_weight, out);
  return out;
}

PolicyLoss pg_policy_loss(const Matrix& logits, std::span<const std::size_t> actions,
                          std::span<const double> advantages, double entropy_weight) {
  check_batch_shapes(logits, actions.size(), advantages.size());
  const auto b = static_cast<double>(logits.cols());
  const Matrix lp = log_softmax(logits);
  PolicyLoss out;
  out.grad_logits = Matrix::Zero(logits.rows(), logits.cols());
  double surrogate = 0.0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const auto i = static_cast<std::size_t>(j);
    const auto a = static_cast<Eigen::Index>(actions[i]);
    surrogate += lp(a, j) * advantages[i];
    const double scale = -advantages[i] / b;
    out.grad_logits.col(j) = -scale * lp.col(j).array().exp().matrix();
    out.grad_logits(a, j) += scale;
  }
  out.surrogate = surrogate / b;
  out.loss = -out.surrogate;
  add_entropy_term(lp, entropy_weight, out);
  return out;
}

ValueLoss value_loss(const Matrix& values, std::span<const double> returns) {
  if (values.rows() != 1 || static_cast<std::size_t>(values.cols()) != returns.size() ||
      returns.empty()) {
    throw std::invalid_argument("value_loss: shape mismatch");
  }
  const auto b = static_cast<double>(returns.size());
  ValueLoss out;
  out.grad_values.resize(1, values.cols());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const double diff = returns[static_cast<std::size_t>(j)] - values(0, j);
    out.loss += diff * diff;
    out.grad_values(0, j) = -2.0 * diff / b;
  }
  out.loss /= b;
  return out;
}

TrainStats ppo_update(PolicyValueNet& net, const RolloutBatch& batch, const PpoConfig& config,
                      double entropy_weight, std::mt19937_64& rng) {
  if (batch.transitions.empty()) throw std::invalid_argument("ppo_update: empty batch");
  const Matrix features = batch_features(batch);
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t parts = std::min(config.minibatches_per_epoch, batch.size());

  TrainStats stats;
  stats.entropy_weight = entropy_weight;
  std::size_t steps = 0;
  MlpGrads actor_grads = net.actor.zero_grads();
  MlpGrads critic_grads = net.critic.zero_grads();
  ForwardCache cache;
  for (std::size_t epoch = 0; epoch < config.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t part = 0; part < parts; ++part) {
      const std::size_t lo = part * batch.size() / parts;
      const std::size_t hi = (part + 1) * batch.size() / parts;
      const auto mb = gather(batch, features, std::span(order).subspan(lo, hi - lo));

      const Matrix logits = net.actor.forward(mb.features, &cache);
      const auto pl = ppo_policy_loss(logits, mb.actions, mb.old_logprobs, mb.advantages,
                                      config.clip_eps, entropy_weight);
      require_finite(pl.loss, "policy loss");
      if (steps == 0) {
        const double mean_adv = std::accumulate(mb.advantages.begin(), mb.advantages.end(), 0.0) /
                                static_cast<double>(mb.advantages.size());
        stats.sync_gap = std::abs(pl.surrogate - mean_adv);
      }
      actor_grads.set_zero();
      net.actor.backward(cache, pl.grad_logits, actor_grads);
      adam_step(net.actor, net.actor_opt, actor_grads, config.lr_actor);

      const Matrix values = net.critic.forward(mb.features, &cache);
      const auto vl = value_loss(values, mb.returns);
      require_finite(vl.loss, "value loss");
      critic_grads.set_zero();
      net.critic.backward(cache, vl.grad_values, critic_grads);
      adam_step(net.critic, net.critic_opt, critic_grads, config.lr_critic);

      stats.policy_loss += pl.loss;
      stats.value_loss += vl.loss;
      stats.entropy += pl.entropy;
      ++steps;
    }
  }
  const auto n = static_cast<double>(steps);
  stats.policy_loss /= n;
  stats.value_loss /= n;
  stats.entropy /= n;
  stats.kl = batch_kl(net, batch, features);
  require_finite(stats.kl, "KL estimate");
  stats.kl_exceeded = stats.kl > config.kl_limit;
  return stats;
}

TrainStats a3c_update(PolicyValueNet& net, const RolloutBatch& batch, const PpoConfig& config,
                      double entropy_weight) {
  if (batch.transitions.empty()) throw std::invalid_argument("a3c_update: empty batch");
  const Matrix features = batch_features(batch);
  std::vector<std::size_t> actions;
  std::vector<double> advantages, returns;
  for (const auto& t : batch.transitions) {
    actions.push_back(t.action);
    advantages.push_back(t.advantage);
    returns.push_back(t.ret);
  }
  TrainStats stats;
  stats.entropy_weight = entropy_weight;
  ForwardCache cache;

  const Matrix logits = net.actor.forward(features, &cache);
  const auto pl = pg_policy_loss(logits, actions, advantages, entropy_weight);
  require_finite(pl.loss, "policy loss");
  auto actor_grads = net.actor.zero_grads();
  net.actor.backward(cache, pl.grad_logits, actor_grads);
  adam_step(net.actor, net.actor_opt, actor_grads, config.lr_actor);

  const Matrix values = net.critic.forward(features, &cache);
  const auto vl = value_loss(values, returns);
  require_finite(vl.loss, "value loss");
  auto critic_grads = net.critic.zero_grads();
  net.critic.backward(cache, vl.grad_values, critic_grads);
  adam_step(net.critic, net.critic_opt, critic_grads, config.lr_critic);

  stats.policy_loss = pl.loss;
  stats.value_loss = vl.loss;
  stats.entropy = pl.entropy;
  stats.kl = batch_kl(net, batch, features);
  require_finite(stats.kl, "KL estimate");
  stats.kl_exceeded = stats.kl > config.kl_limit;
  return stats;
}

std::uint64_t actor_seed(std::uint64_t base_seed, std::size_t update, std::size_t actor) {
  std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                    static_cast<std::uint32_t>(update), static_cast<std::uint32_t>(actor)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

TrainResult train(Algo algo, const PpoConfig& config, std::span<const ThroughputTrace> traces,
                  const VideoManifest& manifest, const QoeVariant& variant,
                  const LinkConfig& link, const PlayerConfig& player,
                  const TrainObserver& observer) {
  config.validate();
  if (traces.empty()) throw ValidationError("train: empty trace set");

  RolloutSetup setup;
  setup.manifest = &manifest;
  setup.link = link;
  setup.player = player;
  setup.player.start_offset_mode = StartOffsetMode::kRandom;
  setup.variant = variant;
  setup.threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : config.threads;

  const auto dim = feature_dim(player.history_len_k, manifest.num_levels());
  PolicyValueNet net = PolicyValueNet::create(dim, manifest.num_levels(), config.hidden, config.seed);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5851f42d4c957f2dULL);

  TrainResult result;
  result.best = net;
  result.best_score = -std::numeric_limits<double>::infinity();
  std::deque<double> window;
  const auto started = std::chrono::steady_clock::now();

  for (std::size_t update = 0; update < config.total_epochs; ++update) {
    std::vector<ActorTask> tasks(config.n_actors);
    for (std::size_t i = 0; i < config.n_actors; ++i) {
      std::mt19937_64 pick(actor_seed(config.seed, update, i));
      const auto idx = std::uniform_int_distribution<std::size_t>(0, traces.size() - 1)(pick);
      tasks[i] = {&traces[idx], pick()};
    }
    const double eta = entropy_schedule(update, config.total_epochs, config.entropy_start,
                                        config.entropy_end);
    PolicyValueNet last_good = net;
    try {
      RolloutBatch batch = collect_rollouts(net, setup, tasks);
      const double mean_qoe = batch.mean_episode_qoe();
      require_finite(mean_qoe, "episode QoE");

      window.push_back(mean_qoe);
      if (window.size() > kSelectionWindow) window.pop_front();
      const double rolling = std::accumulate(window.begin(), window.end(), 0.0) /
                             static_cast<double>(window.size());
      if (rolling > result.best_score) {
        result.best_score = rolling;
        result.best = net;
        result.best_update = update + 1;
      }

      compute_returns_advantages(batch, config.gamma);
      TrainStats stats = algo == Algo::kPpo ? ppo_update(net, batch, config, eta, shuffle_rng)
                                            : a3c_update(net, batch, config, eta);
      stats.update = update + 1;
      stats.mean_qoe = mean_qoe;
      stats.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      if (!net.actor.all_finite() || !net.critic.all_finite()) {
        throw DivergenceError("non-finite network parameters");
      }
      if (stats.kl_exceeded) ++result.kl_violations;
      result.curve.push_back(stats);
      if (observer) observer(stats);
    } catch (const DivergenceError& e) {
      result.diverged = true;
      result.error = "update " + std::to_string(update + 1) + ": " + e.what();
      result.last = std::move(last_good);
      return result;
    }
  }
  result.last = std::move(net);
  return result;
}

std::string format_curve_row(const TrainStats& s) {
  char seconds[32];
  std::snprintf(seconds, sizeof(seconds), "%.3f", s.seconds);
  return std::to_string(s.update) + "," + shortest(s.mean_qoe) + "," + shortest(s.policy_loss) +
         "," + shortest(s.value_loss) + "," + shortest(s.entropy) + "," + shortest(s.kl) + "," +
         shortest(s.entropy_weight) + "," + seconds;
}

PolicyController::PolicyController(Mlp actor, const VideoManifest& manifest, std::string name)
    : actor_(std::move(actor)), manifest_(&manifest), name_(std::move(name)) {
  if (actor_.output_dim() != manifest.num_levels()) {
    throw ValidationError("checkpoint has " + std::to_string(actor_.output_dim()) +
                          " actions but the manifest has " +
                          std::to_string(manifest.num_levels()) + " levels");
  }
}

std::size_t PolicyController::next(const StreamObservation& obs) {
  const auto features = encode_observation(obs, *manifest_);
  if (features.size() != actor_.input_dim()) {
    throw ValidationError("checkpoint expects " + std::to_string(actor_.input_dim()) +
                          " features, observation encodes " + std::to_string(features.size()));
  }
  const Matrix logits = actor_.forward(column(features));
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < logits.rows(); ++a) {
    if (logits(a, 0) > logits(best, 0)) best = a;
  }
  return static_cast<std::size_t>(best);
}

}  // namespace abrlab
