#include "abrlab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "abrlab/error.hpp"

namespace abrlab {
namespace {

void push_bounded(std::vector<double>& ring, double v) {
  ring.push_back(v);
  if (ring.size() > kControllerWindow) ring.erase(ring.begin());
}

struct HorizonState {
  double buffer_s;
  double score;
  std::size_t prev_level;
};

// One chunk of the MPC model. Shared by the sequence scorer and the search so
// both accumulate identical floating-point operations.
HorizonState horizon_step(const MpcProblem& p, const HorizonState& s, std::size_t chunk,
                          std::size_t level) {
  const auto& m = *p.manifest;
  const double delay = p.rtt_s + m.size_bytes(chunk, level) * 8.0 / (p.rate_mbps * 1e6);
  const double rebuffer = std::max(delay - s.buffer_s, 0.0);
  double buffer = std::max(s.buffer_s - delay, 0.0) + m.chunk_duration_s();
  buffer = std::min(buffer, p.buffer_cap_s);
  const double q = quality(p.variant, m.bitrate_kbps(level));
  const double q_prev = quality(p.variant, m.bitrate_kbps(s.prev_level));
  const double reward = q - p.variant.mu * rebuffer - std::abs(q - q_prev);
  return {buffer, s.score + reward, level};
}

}  // namespace

void ControllerState::observe(const StreamObservation& obs, std::size_t total_chunks) {
  const std::size_t downloaded = total_chunks - obs.chunks_remaining;
  if (downloaded <= chunks_seen) return;
  chunks_seen = downloaded;
  const double actual = obs.throughput_hist_mbps.back();
  if (last_prediction_mbps) {
    push_bounded(prediction_errors, std::abs(*last_prediction_mbps - actual) / actual);
  }
  push_bounded(throughput_history_mbps, actual);
}

std::optional<double> harmonic_mean(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  double inv = 0.0;
  for (double v : values) inv += 1.0 / v;
  return static_cast<double>(values.size()) / inv;
}

std::size_t bb_next(const StreamObservation& obs, std::size_t levels, double reservoir_s,
                    double cushion_s) {
  if (obs.buffer_s <= reservoir_s) return 0;
  if (obs.buffer_s >= reservoir_s + cushion_s) return levels - 1;
  const double frac = (obs.buffer_s - reservoir_s) / cushion_s;
  const auto level = static_cast<std::size_t>(std::floor(frac * static_cast<double>(levels - 1)));
  return std::min(level, levels - 1);
}

std::size_t rb_next(const StreamObservation&, const ControllerState& state,
                    const VideoManifest& manifest) {
  const auto prediction = harmonic_mean(state.throughput_history_mbps);
  if (!prediction) return 0;
  std::size_t level = 0;
  for (std::size_t l = 0; l < manifest.num_levels(); ++l) {
    if (manifest.bitrate_kbps(l) / 1000.0 <= *prediction) level = l;
  }
  return level;
}

double bola_score(const VideoManifest& manifest, std::size_t chunk, std::size_t level,
                  double buffer_s, double v, double gamma_p) {
  const double ratio = manifest.size_bytes(chunk, level) / manifest.size_bytes(chunk, 0);
  const double utility = std::log(ratio);
  return (v * (utility + gamma_p) - buffer_s / manifest.chunk_duration_s()) / ratio;
}

double bola_default_v(const VideoManifest& manifest, std::size_t chunk, double buffer_cap_s,
                      double gamma_p) {
  const auto top = manifest.num_levels() - 1;
  const double u_max = std::log(manifest.size_bytes(chunk, top) / manifest.size_bytes(chunk, 0));
  return (buffer_cap_s / manifest.chunk_duration_s() - 1.0) / (u_max + gamma_p);
}

std::size_t bola_next(const StreamObservation& obs, const VideoManifest& manifest,
                      double buffer_cap_s, const BolaParams& params) {
  const std::size_t chunk =
      std::min(manifest.num_chunks() - obs.chunks_remaining, manifest.num_chunks() - 1);
  const double v = params.v.value_or(bola_default_v(manifest, chunk, buffer_cap_s, params.gamma_p));
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < manifest.num_levels(); ++l) {
    const double score = bola_score(manifest, chunk, l, obs.buffer_s, v, params.gamma_p);
    if (score > best_score) {
      best_score = score;
      best = l;
    }
  }
  return best;
}

double mpc_sequence_score(const MpcProblem& problem, std::span<const std::size_t> levels) {
  HorizonState s{problem.buffer_s, 0.0, problem.last_level};
  for (std::size_t j = 0; j < levels.size(); ++j) {
    s = horizon_step(problem, s, problem.first_chunk + j, levels[j]);
  }
  return s.score;
}

std::size_t mpc_search(const MpcProblem& problem, std::size_t horizon) {
  const auto levels = problem.manifest->num_levels();
  horizon = std::min(horizon, problem.manifest->num_chunks() - problem.first_chunk);
  if (horizon == 0) return 0;

  // Depth-first over the L^h tree in lexicographic order; only a strictly
  // better leaf replaces the incumbent.
  std::vector<HorizonState> stack(horizon + 1);
  std::vector<std::size_t> choice(horizon, 0);
  stack[0] = {problem.buffer_s, 0.0, problem.last_level};
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t best_first = 0;
  std::size_t depth = 0;
  while (true) {
    stack[depth + 1] = horizon_step(problem, stack[depth], problem.first_chunk + depth,
                                    choice[depth]);
    if (depth + 1 < horizon) {
      ++depth;
      choice[depth] = 0;
      continue;
    }
    if (stack[horizon].score > best_score) {
      best_score = stack[horizon].score;
      best_first = choice[0];
    }
    while (++choice[depth] == levels) {
      if (depth == 0) return best_first;
      --depth;
    }
  }
}

double mpc_predicted_rate(const ControllerState& state, const VideoManifest& manifest) {
  const auto hm = harmonic_mean(state.throughput_history_mbps);
  if (!hm) return manifest.bitrate_kbps(0) / 1000.0;
  double max_error = 0.0;
  for (double e : state.prediction_errors) max_error = std::max(max_error, e);
  return *hm / (1.0 + max_error);
}

std::size_t mpc_next(const StreamObservation& obs, ControllerState& state,
                     const VideoManifest& manifest, const QoeVariant& variant, double rtt_s,
                     double buffer_cap_s, std::size_t horizon) {
  if (obs.chunks_remaining == 0) return 0;
  MpcProblem problem;
  problem.manifest = &manifest;
  problem.first_chunk = manifest.num_chunks() - obs.chunks_remaining;
  problem.buffer_s = obs.buffer_s;
  problem.last_level = obs.last_level;
  problem.rate_mbps = mpc_predicted_rate(state, manifest);
  problem.rtt_s = rtt_s;
  problem.buffer_cap_s = buffer_cap_s;
  problem.variant = variant;
  // Errors are measured against the un-discounted harmonic mean.
  state.last_prediction_mbps = harmonic_mean(state.throughput_history_mbps);
  return mpc_search(problem, horizon);
}

namespace {

class BbController : public AbrController {
 public:
  explicit BbController(const SessionContext& ctx) : ctx_(ctx) {}
  std::string name() const override { return "bb"; }
  std::size_t next(const StreamObservation& obs) override {
    return bb_next(obs, ctx_.manifest->num_levels());
  }

 private:
  SessionContext ctx_;
};

class RbController : public AbrController {
 public:
  explicit RbController(const SessionContext& ctx) : ctx_(ctx) {}
  std::string name() const override { return "rb"; }
  void reset() override { state_ = {}; }
  std::size_t next(const StreamObservation& obs) override {
    state_.observe(obs, ctx_.manifest->num_chunks());
    return rb_next(obs, state_, *ctx_.manifest);
  }

 private:
  SessionContext ctx_;
  ControllerState state_;
};

class BolaController : public AbrController {
 public:
  explicit BolaController(const SessionContext& ctx) : ctx_(ctx) {}
  std::string name() const override { return "bola"; }
  std::size_t next(const StreamObservation& obs) override {
    return bola_next(obs, *ctx_.manifest, ctx_.player.buffer_cap_s);
  }

 private:
  SessionContext ctx_;
};

class MpcController : public AbrController {
 public:
  explicit MpcController(const SessionContext& ctx) : ctx_(ctx) {}
  std::string name() const override { return "mpc"; }
  void reset() override { state_ = {}; }
  std::size_t next(const StreamObservation& obs) override {
    state_.observe(obs, ctx_.manifest->num_chunks());
    return mpc_next(obs, state_, *ctx_.manifest, ctx_.variant, ctx_.link.rtt_s,
                    ctx_.player.buffer_cap_s);
  }

 private:
  SessionContext ctx_;
  ControllerState state_;
};

}  // namespace

std::unique_ptr<AbrController> make_baseline(const std::string& name, const SessionContext& ctx) {
  if (name == "bb") return std::make_unique<BbController>(ctx);
  if (name == "rb") return std::make_unique<RbController>(ctx);
  if (name == "bola") return std::make_unique<BolaController>(ctx);
  if (name == "mpc") return std::make_unique<MpcController>(ctx);
  throw ValidationError("unknown baseline '" + name + "' (bb|rb|bola|mpc)");
}

}  // namespace abrlab
