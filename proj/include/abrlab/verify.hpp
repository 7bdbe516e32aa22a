#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abrlab/baselines.hpp"
#include "abrlab/env.hpp"
#include "abrlab/nn.hpp"

namespace abrlab::verify {

/// Reference streaming simulator that integrates the link on a fixed 1 ms
/// grid (with exact partial steps at the ends) instead of walking trace
/// segments. Written independently of StreamingEnv.
class MillisecondSimulator {
 public:
  struct Step {
    double delay_s = 0.0;
    double rebuffer_s = 0.0;
    double sleep_s = 0.0;
  };

  MillisecondSimulator(const ThroughputTrace& trace, const VideoManifest& manifest,
                       const LinkConfig& link, double buffer_cap_s, double start_clock_s);

  Step step(std::size_t level);
  double clock() const { return clock_s_; }

 private:
  double rate_at(double clock_s) const;

  const ThroughputTrace& trace_;
  const VideoManifest& manifest_;
  LinkConfig link_;
  double buffer_cap_s_;
  double clock_s_;
  double buffer_s_ = 0.0;
  std::size_t chunk_ = 0;
  std::vector<double> rel_times_;
};

/// Exhaustive MPC: scores all L^h sequences with mpc_sequence_score and
/// returns the lowest first level among the maximizers.
std::size_t brute_force_mpc(const MpcProblem& problem, std::size_t horizon);

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst error observed
  double tolerance = 0.0;
  std::size_t cases = 0;
};

/// Random (trace, manifest, actions) episodes; compares per-step delay and
/// rebuffer of StreamingEnv against MillisecondSimulator.
Check env_oracle(std::size_t cases = 50, std::uint64_t seed = 7, double tolerance = 1e-6);

/// Random L <= max_levels, h <= max_horizon problems; mpc_search must equal
/// brute_force_mpc exactly. `measured` counts mismatches.
Check mpc_oracle(std::size_t cases = 100, std::size_t max_levels = 3, std::size_t max_horizon = 4,
                 std::uint64_t seed = 11);

/// Floor of the relative-error denominator in gradient checks.
inline constexpr double kGradcheckFloor = 1e-6;
inline constexpr double kGradcheckStep = 1e-5;

/// Central-difference gradient checks over random small networks:
/// log-policy, value MSE, PPO clipped surrogate plus entropy, and the plain
/// policy-gradient loss.
std::vector<Check> gradcheck(std::size_t nets = 100, std::uint64_t seed = 3,
                             double tolerance = 1e-4);

/// Max relative error between the analytic gradient of `loss` and central
/// differences over every parameter of `net`.
template <typename LossFn, typename GradFn>
double max_relative_error(Mlp& net, LossFn&& loss, GradFn&& analytic);

}  // namespace abrlab::verify

#include "abrlab/verify_impl.hpp"
