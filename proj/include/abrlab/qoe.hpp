#pragma once

#include <span>
#include <string>

namespace abrlab {

enum class QoeKind { kLin, kLog };

/// One QoE flavour: utility q(b), rebuffer weight mu, and for the log
/// variant the reference bitrate b_min.
struct QoeVariant {
  QoeKind kind = QoeKind::kLin;
  double mu = 4.3;
  double b_min_kbps = 300.0;

  /// q(b) = b in Mbps, mu = 4.3.
  static QoeVariant lin();
  /// q(b) = ln(b / b_min), mu = 2.66.
  static QoeVariant log(double b_min_kbps);
};

/// "lin" or "log"; b_min applies to the log variant only.
QoeVariant parse_qoe_variant(const std::string& name, double b_min_kbps);
std::string to_string(QoeKind kind);

double quality(const QoeVariant& variant, double bitrate_kbps);

/// q(b) - mu*rebuffer - |q(b) - q(b_prev)|. Pass prev == bitrate for the
/// first chunk of an episode.
double chunk_reward(const QoeVariant& variant, double bitrate_kbps, double prev_bitrate_kbps,
                    double rebuffer_s);

struct QoeComponents {
  double bitrate_sum = 0.0;
  double rebuf_penalty = 0.0;
  double smooth_penalty = 0.0;
};

struct EpisodeQoe {
  /// Running sum of chunk_reward, so it matches the per-step RL rewards.
  double total = 0.0;
  QoeComponents components;
};

EpisodeQoe episode_qoe(const QoeVariant& variant, std::span<const double> bitrates_kbps,
                       std::span<const double> rebuffers_s);

}  // namespace abrlab
