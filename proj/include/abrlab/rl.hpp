#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "abrlab/baselines.hpp"
#include "abrlab/env.hpp"
#include "abrlab/nn.hpp"
#include "abrlab/qoe.hpp"

namespace abrlab {

enum class Algo { kPpo, kA3c };
Algo parse_algo(const std::string& name);
std::string to_string(Algo algo);

/// Training hyperparameters. The A3C trainer uses the shared subset and
/// ignores clip_eps, epochs_per_update and minibatches_per_epoch.
struct PpoConfig {
  double gamma = 0.99;
  double clip_eps = 0.2;
  double lr_actor = 1e-4;
  double lr_critic = 1e-3;
  double entropy_start = 6.0;
  double entropy_end = 0.01;
  std::size_t n_actors = 16;
  std::size_t epochs_per_update = 4;
  std::size_t minibatches_per_epoch = 4;
  std::size_t total_epochs = 1000;
  std::uint64_t seed = 42;
  double kl_limit = 0.1;
  std::vector<std::size_t> hidden{128, 128};
  /// Worker threads for rollout collection; 0 picks hardware concurrency.
  std::size_t threads = 0;

  /// Throws ValidationError when an invariant is violated.
  void validate() const;
};

using A3cConfig = PpoConfig;

struct Transition {
  std::vector<double> features;
  std::size_t action = 0;
  double reward = 0.0;
  bool done = false;
  double old_logprob = 0.0;
  double value_est = 0.0;
  std::vector<double> old_probs;  // full distribution, for the KL diagnostic
  double ret = 0.0;
  double advantage = 0.0;
};

struct EpisodeRecord {
  std::size_t actor = 0;
  std::string trace_id;
  std::size_t begin = 0;  // transition range [begin, end)
  std::size_t end = 0;
  bool truncated = false;
  double bootstrap_value = 0.0;  // critic value of the state after a truncation
  std::vector<double> bitrates_kbps;
  std::vector<double> rebuffers_s;
  double qoe = 0.0;  // sum of transition rewards
};

/// Episodes are contiguous and appear in actor-index order.
struct RolloutBatch {
  std::vector<Transition> transitions;
  std::vector<EpisodeRecord> episodes;

  std::size_t size() const { return transitions.size(); }
  double mean_episode_qoe() const;
};

/// What every actor shares during collection.
struct RolloutSetup {
  const VideoManifest* manifest = nullptr;
  LinkConfig link;
  PlayerConfig player;
  QoeVariant variant;
  /// Steps per actor before truncation; 0 runs the whole episode.
  std::size_t max_steps = 0;
  std::size_t threads = 1;
};

/// One actor's assignment: a trace and the seed of its private RNG stream,
/// which draws the random start offset (when enabled) and the actions.
struct ActorTask {
  const ThroughputTrace* trace = nullptr;
  std::uint64_t seed = 0;
};

/// Runs one episode per task with actions sampled from the snapshot policy.
/// Deterministic given the snapshot and seeds, whatever the thread count.
RolloutBatch collect_rollouts(const PolicyValueNet& snapshot, const RolloutSetup& setup,
                              std::span<const ActorTask> tasks);

/// Backward recursion R_t = r_t + gamma R_{t+1}, seeded with 0 at terminal
/// states and with the stored bootstrap value at truncations. A_t = R_t - V_t,
/// then standardized over the batch when `standardize` is set.
void compute_returns_advantages(RolloutBatch& batch, double gamma, bool standardize = true);

/// min(r A, clip(r, 1-eps, 1+eps) A).
double clipped_objective(double ratio, double advantage, double clip_eps);

/// Mean over columns of sum_a p_new log(p_new / p_old), clamped at 0.
double kl_estimate(const Matrix& old_probs, const Matrix& new_probs);
double kl_estimate(std::span<const double> old_probs, std::span<const double> new_probs);

/// Linear from start to end over the first 60% of total_epochs, then end.
double entropy_schedule(std::size_t epoch, std::size_t total_epochs, double start = 6.0,
                        double end = 0.01);

/// Loss value and its gradient with respect to the actor logits.
struct PolicyLoss {
  double loss = 0.0;       // to be minimized, entropy bonus included
  double surrogate = 0.0;  // mean clipped (or plain) surrogate, no entropy
  double entropy = 0.0;    // mean categorical entropy
  Matrix grad_logits;
};

/// -mean(min(r A, clip(r) A)) - eta mean(H).
PolicyLoss ppo_policy_loss(const Matrix& logits, std::span<const std::size_t> actions,
                           std::span<const double> old_logprobs,
                           std::span<const double> advantages, double clip_eps,
                           double entropy_weight);

/// -mean(log pi(a|s) A) - eta mean(H).
PolicyLoss pg_policy_loss(const Matrix& logits, std::span<const std::size_t> actions,
                          std::span<const double> advantages, double entropy_weight);

struct ValueLoss {
  double loss = 0.0;  // mean (R - V)^2
  Matrix grad_values;
};
ValueLoss value_loss(const Matrix& values, std::span<const double> returns);

/// One per update.
struct TrainStats {
  std::size_t update = 0;
  double mean_qoe = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
  double entropy_weight = 0.0;
  double seconds = 0.0;
  /// |clipped surrogate - mean advantage| on the first minibatch (PPO only).
  double sync_gap = 0.0;
  bool kl_exceeded = false;
};

/// Epochs of shuffled minibatch updates with the clipped surrogate; the KL
/// diagnostic is measured on the whole batch after the last step.
TrainStats ppo_update(PolicyValueNet& net, const RolloutBatch& batch, const PpoConfig& config,
                      double entropy_weight, std::mt19937_64& rng);

/// Single pass over the whole batch with the plain policy gradient.
TrainStats a3c_update(PolicyValueNet& net, const RolloutBatch& batch, const PpoConfig& config,
                      double entropy_weight);

struct TrainResult {
  PolicyValueNet best;
  PolicyValueNet last;
  std::size_t best_update = 0;
  double best_score = 0.0;  // rolling mean QoE at best_update
  std::vector<TrainStats> curve;
  std::size_t kl_violations = 0;
  bool diverged = false;
  std::string error;
};

/// Receives each update's stats as soon as they are available.
using TrainObserver = std::function<void(const TrainStats&)>;

inline constexpr std::size_t kSelectionWindow = 100;

/// Snapshot -> rollouts (each actor draws a trace uniformly at random and a
/// random start offset) -> returns/advantages -> update. Keeps the networks
/// with the best rolling mean QoE over the last 100 updates.
TrainResult train(Algo algo, const PpoConfig& config, std::span<const ThroughputTrace> traces,
                  const VideoManifest& manifest, const QoeVariant& variant,
                  const LinkConfig& link = {}, const PlayerConfig& player = {},
                  const TrainObserver& observer = {});

/// Per-actor RNG seed for a given update.
std::uint64_t actor_seed(std::uint64_t base_seed, std::size_t update, std::size_t actor);

inline constexpr const char* kLearningCurveHeader =
    "update,mean_qoe,policy_loss,value_loss,entropy,kl,entropy_weight,seconds";
std::string format_curve_row(const TrainStats& stats);

/// Greedy (argmax) controller backed by a trained actor.
class PolicyController : public AbrController {
 public:
  PolicyController(Mlp actor, const VideoManifest& manifest, std::string name);
  std::string name() const override { return name_; }
  std::size_t next(const StreamObservation& obs) override;

 private:
  Mlp actor_;
  const VideoManifest* manifest_;
  std::string name_;
};

}  // namespace abrlab
