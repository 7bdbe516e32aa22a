#include "abrlab/env.hpp"

#include <algorithm>
#include <random>

#include "abrlab/error.hpp"

namespace abrlab {

StreamObservation StreamingEnv::reset(const ThroughputTrace& trace, const VideoManifest& manifest,
                                      const LinkConfig& link, const PlayerConfig& player) {
  if (!(link.capacity_mbps > 0.0) || !(link.rtt_s >= 0.0)) {
    throw ValidationError("link: capacity must be > 0 and rtt >= 0");
  }
  if (!(player.buffer_cap_s > manifest.chunk_duration_s())) {
    throw ValidationError("player: buffer cap must exceed the chunk duration");
  }
  if (player.history_len_k < 1) throw ValidationError("player: history length must be >= 1");

  trace_ = &trace;
  manifest_ = &manifest;
  link_ = link;
  player_ = player;
  started_ = true;
  next_chunk_ = 0;

  const auto k = player.history_len_k;
  obs_ = StreamObservation{};
  obs_.throughput_hist_mbps.assign(k, 0.0);
  obs_.download_time_hist_s.assign(k, 0.0);
  obs_.chunks_remaining = manifest.num_chunks();
  obs_.last_level = 0;
  obs_.link_capacity_mbps = player.expose_link_stats ? link.capacity_mbps : 0.0;
  obs_.link_rtt_s = player.expose_link_stats ? link.rtt_s : 0.0;
  refresh_next_sizes();

  segment_ = 0;
  position_s_ = trace.start_time();
  clock_s_ = 0.0;
  start_offset_s_ = 0.0;
  if (player.start_offset_mode == StartOffsetMode::kRandom) {
    std::mt19937_64 rng(player.start_offset_seed);
    start_offset_s_ = std::uniform_real_distribution<double>(0.0, trace.span())(rng);
    advance_idle(start_offset_s_);
  }
  return obs_;
}

void StreamingEnv::refresh_next_sizes() {
  const auto levels = manifest_->num_levels();
  if (next_chunk_ < manifest_->num_chunks()) {
    obs_.next_chunk_sizes_bytes = manifest_->sizes_bytes()[next_chunk_];
  } else {
    obs_.next_chunk_sizes_bytes.assign(levels, 0.0);
  }
}

void StreamingEnv::advance_idle(double seconds) {
  const auto& s = trace_->samples();
  clock_s_ += seconds;
  while (seconds > 0.0) {
    const double remain = s[segment_ + 1].time_s - position_s_;
    if (seconds < remain) {
      position_s_ += seconds;
      return;
    }
    seconds -= remain;
    if (++segment_ == s.size() - 1) segment_ = 0;
    position_s_ = s[segment_].time_s;
  }
}

double StreamingEnv::transfer(double megabits) {
  const auto& s = trace_->samples();
  double elapsed = 0.0;
  while (true) {
    const double rate = std::min(s[segment_].bandwidth_mbps, link_.capacity_mbps);
    const double remain = s[segment_ + 1].time_s - position_s_;
    const double fits = rate * remain;
    if (megabits < fits) {
      const double dt = megabits / rate;
      elapsed += dt;
      position_s_ += dt;
      break;
    }
    megabits -= fits;
    elapsed += remain;
    if (++segment_ == s.size() - 1) segment_ = 0;
    position_s_ = s[segment_].time_s;
    if (megabits <= 0.0) break;
  }
  clock_s_ += elapsed;
  return elapsed;
}

StepResult StreamingEnv::step(std::size_t level) {
  if (!started_) throw ContractViolation("step() called before reset()");
  if (done()) throw ContractViolation("step() called after the episode finished");
  if (level >= manifest_->num_levels()) {
    throw ContractViolation("step(): level " + std::to_string(level) + " outside the ladder");
  }

  StepOutcome out;
  out.level = level;
  out.chunk_size_bytes = manifest_->size_bytes(next_chunk_, level);
  out.transfer_s = transfer(out.chunk_size_bytes * 8.0 / 1e6);
  advance_idle(link_.rtt_s);
  out.delay_s = out.transfer_s + link_.rtt_s;

  out.rebuffer_s = std::max(out.delay_s - obs_.buffer_s, 0.0);
  double buffer = std::max(obs_.buffer_s - out.delay_s, 0.0) + manifest_->chunk_duration_s();
  if (buffer > player_.buffer_cap_s) {
    out.sleep_s = buffer - player_.buffer_cap_s;
    buffer = player_.buffer_cap_s;
    advance_idle(out.sleep_s);
  }
  obs_.buffer_s = buffer;

  const double throughput = out.chunk_size_bytes * 8.0 / (out.transfer_s * 1e6);
  auto push = [](std::vector<double>& hist, double v) {
    std::shift_left(hist.begin(), hist.end(), 1);
    hist.back() = v;
  };
  push(obs_.throughput_hist_mbps, throughput);
  push(obs_.download_time_hist_s, out.delay_s);

  obs_.last_level = level;
  --obs_.chunks_remaining;
  ++next_chunk_;
  refresh_next_sizes();
  out.done = obs_.chunks_remaining == 0;
  return {obs_, out};
}

std::vector<double> encode_observation(const StreamObservation& obs,
                                       const VideoManifest& manifest) {
  const auto k = obs.throughput_hist_mbps.size();
  std::vector<double> f;
  f.reserve(feature_dim(k, manifest.num_levels()));
  for (double v : obs.throughput_hist_mbps) f.push_back(v / FeatureScales::kThroughputMbps);
  for (double v : obs.download_time_hist_s) f.push_back(v / FeatureScales::kDownloadTimeS);
  for (double v : obs.next_chunk_sizes_bytes) f.push_back(v / FeatureScales::kChunkSizeBytes);
  f.push_back(obs.buffer_s / FeatureScales::kBufferS);
  f.push_back(static_cast<double>(obs.chunks_remaining) /
              static_cast<double>(manifest.num_chunks()));
  f.push_back(manifest.bitrate_kbps(obs.last_level) / manifest.max_bitrate_kbps());
  f.push_back(obs.link_capacity_mbps / FeatureScales::kCapacityMbps);
  f.push_back(obs.link_rtt_s / FeatureScales::kRttS);
  return f;
}

}  // namespace abrlab
