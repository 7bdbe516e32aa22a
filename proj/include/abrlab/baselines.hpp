#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abrlab/env.hpp"
#include "abrlab/qoe.hpp"
#include "abrlab/video.hpp"

namespace abrlab {

inline constexpr std::size_t kControllerWindow = 5;

/// Controller-private history, fed from successive observations.
struct ControllerState {
  std::vector<double> throughput_history_mbps;  // newest last, at most 5
  std::vector<double> prediction_errors;        // newest last, at most 5
  std::optional<double> last_prediction_mbps;
  std::size_t chunks_seen = 0;

  /// Records the newest measured throughput (and, for MPC, the relative error
  /// of the previous prediction) when `obs` reports a newly downloaded chunk.
  void observe(const StreamObservation& obs, std::size_t total_chunks);
};

/// Harmonic mean of the windowed throughput history; nullopt when empty.
std::optional<double> harmonic_mean(std::span<const double> values);

std::size_t bb_next(const StreamObservation& obs, std::size_t levels, double reservoir_s = 5.0,
                    double cushion_s = 10.0);

std::size_t rb_next(const StreamObservation& obs, const ControllerState& state,
                    const VideoManifest& manifest);

struct BolaParams {
  double gamma_p = 5.0;
  /// Unset: (buffer_cap/chunk_duration - 1) / (u_max + gamma_p).
  std::optional<double> v;
};

/// BOLA score of one level: (V (u_l + gamma_p) - Q) / S_l, with Q the buffer
/// in chunks, S_l the size ratio to level 0 and u_l = ln S_l.
double bola_score(const VideoManifest& manifest, std::size_t chunk, std::size_t level,
                  double buffer_s, double v, double gamma_p);
double bola_default_v(const VideoManifest& manifest, std::size_t chunk, double buffer_cap_s,
                      double gamma_p);
std::size_t bola_next(const StreamObservation& obs, const VideoManifest& manifest,
                      double buffer_cap_s, const BolaParams& params = {});

/// Inputs to the MPC horizon simulator.
struct MpcProblem {
  const VideoManifest* manifest = nullptr;
  std::size_t first_chunk = 0;
  double buffer_s = 0.0;
  std::size_t last_level = 0;
  double rate_mbps = 0.0;
  double rtt_s = 0.0;
  double buffer_cap_s = 60.0;
  QoeVariant variant;
};

/// QoE of playing `levels` for the chunks starting at first_chunk under a
/// constant predicted rate, smoothness anchored at last_level.
double mpc_sequence_score(const MpcProblem& problem, std::span<const std::size_t> levels);

/// Best first level over every L^h sequence; ties go to the lexicographically
/// smallest sequence, i.e. the lower first bitrate.
std::size_t mpc_search(const MpcProblem& problem, std::size_t horizon);

/// Robust throughput prediction: harmonic mean / (1 + max recent error),
/// or the lowest ladder rate with no history.
double mpc_predicted_rate(const ControllerState& state, const VideoManifest& manifest);

std::size_t mpc_next(const StreamObservation& obs, ControllerState& state,
                     const VideoManifest& manifest, const QoeVariant& variant, double rtt_s,
                     double buffer_cap_s, std::size_t horizon = 5);

/// Everything a controller may know about the session besides observations.
struct SessionContext {
  const VideoManifest* manifest = nullptr;
  LinkConfig link;
  PlayerConfig player;
  QoeVariant variant;
};

/// Stateful per-episode decision rule.
class AbrController {
 public:
  virtual ~AbrController() = default;
  virtual std::string name() const = 0;
  virtual void reset() {}
  virtual std::size_t next(const StreamObservation& obs) = 0;
};

/// "bb", "rb", "bola" or "mpc". Throws ValidationError for other names.
std::unique_ptr<AbrController> make_baseline(const std::string& name, const SessionContext& ctx);

}  // namespace abrlab
