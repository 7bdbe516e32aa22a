#pragma once

#include <cstdint>
#include <vector>

#include "abrlab/traces.hpp"
#include "abrlab/video.hpp"

namespace abrlab {

/// Bottleneck link between client and server.
struct LinkConfig {
  double capacity_mbps = 12.0;
  double rtt_s = 0.030;
};

enum class StartOffsetMode { kZero, kRandom };

struct PlayerConfig {
  double buffer_cap_s = 60.0;
  std::size_t history_len_k = 8;
  StartOffsetMode start_offset_mode = StartOffsetMode::kZero;
  std::uint64_t start_offset_seed = 0;
  /// When false the link capacity/rtt channels of the observation read 0.
  bool expose_link_stats = true;
};

/// Agent state s_t. Histories are ordered oldest first and zero-padded at
/// the front until k chunks have been downloaded.
struct StreamObservation {
  std::vector<double> throughput_hist_mbps;
  std::vector<double> download_time_hist_s;
  std::vector<double> next_chunk_sizes_bytes;  // zeros once the video is done
  double buffer_s = 0.0;
  std::size_t chunks_remaining = 0;
  std::size_t last_level = 0;
  double link_capacity_mbps = 0.0;
  double link_rtt_s = 0.0;

  friend bool operator==(const StreamObservation&, const StreamObservation&) = default;
};

struct StepOutcome {
  double delay_s = 0.0;     // rtt + transfer
  double transfer_s = 0.0;  // time spent moving payload bytes
  double rebuffer_s = 0.0;
  double sleep_s = 0.0;
  double chunk_size_bytes = 0.0;
  std::size_t level = 0;
  bool done = false;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

struct StepResult {
  StreamObservation observation;
  StepOutcome outcome;
};

/// Chunk-level streaming simulator over a cyclically wrapped trace.
///
/// The payload of each chunk is transferred at min(trace bandwidth, link
/// capacity) starting at the current trace clock, then the clock advances by
/// the rtt and, when the buffer overflows its cap, by the sleep time.
///
/// The environment keeps non-owning pointers to the trace and manifest passed
/// to reset(); both must outlive the episode.
class StreamingEnv {
 public:
  StreamingEnv() = default;

  StreamObservation reset(const ThroughputTrace& trace, const VideoManifest& manifest,
                          const LinkConfig& link, const PlayerConfig& player);

  /// Throws ContractViolation after the episode is done or for a level
  /// outside the ladder.
  StepResult step(std::size_t level);

  const StreamObservation& observation() const { return obs_; }
  bool done() const { return started_ && obs_.chunks_remaining == 0; }
  /// Trace time elapsed since the trace origin, including the start offset.
  double trace_clock() const { return clock_s_; }
  double start_offset() const { return start_offset_s_; }
  std::size_t next_chunk() const { return next_chunk_; }
  const VideoManifest& manifest() const { return *manifest_; }
  const PlayerConfig& player() const { return player_; }
  const LinkConfig& link() const { return link_; }

 private:
  void advance_idle(double seconds);
  double transfer(double megabits);
  void refresh_next_sizes();

  const ThroughputTrace* trace_ = nullptr;
  const VideoManifest* manifest_ = nullptr;
  LinkConfig link_;
  PlayerConfig player_;
  StreamObservation obs_;
  bool started_ = false;
  std::size_t next_chunk_ = 0;
  std::size_t segment_ = 0;     // trace sample holding the current position
  double position_s_ = 0.0;     // absolute trace time in [t_segment, t_segment+1)
  double clock_s_ = 0.0;
  double start_offset_s_ = 0.0;
};

/// Normalization divisors applied by encode_observation.
struct FeatureScales {
  static constexpr double kThroughputMbps = 10.0;
  static constexpr double kDownloadTimeS = 10.0;
  static constexpr double kChunkSizeBytes = 1e6;
  static constexpr double kBufferS = 10.0;
  static constexpr double kCapacityMbps = 10.0;
  static constexpr double kRttS = 1.0;
};

/// Length of the encoded vector: two k-long histories, L next-chunk sizes,
/// then buffer, chunks-remaining fraction, last-level bitrate fraction,
/// capacity and rtt.
constexpr std::size_t feature_dim(std::size_t history_len_k, std::size_t levels) {
  return 2 * history_len_k + levels + 5;
}

std::vector<double> encode_observation(const StreamObservation& obs, const VideoManifest& manifest);

}  // namespace abrlab
