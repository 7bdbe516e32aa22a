#include "abrlab/qoe.hpp"

#include <cmath>

#include "abrlab/error.hpp"

namespace abrlab {

QoeVariant QoeVariant::lin() { return {QoeKind::kLin, 4.3, 0.0}; }

QoeVariant QoeVariant::log(double b_min_kbps) {
  if (!(b_min_kbps > 0.0)) throw ValidationError("QoE log variant needs b_min > 0");
  return {QoeKind::kLog, 2.66, b_min_kbps};
}

QoeVariant parse_qoe_variant(const std::string& name, double b_min_kbps) {
  if (name == "lin") return QoeVariant::lin();
  if (name == "log") return QoeVariant::log(b_min_kbps);
  throw ValidationError("unknown QoE variant '" + name + "' (lin|log)");
}

std::string to_string(QoeKind kind) { return kind == QoeKind::kLin ? "lin" : "log"; }

double quality(const QoeVariant& variant, double bitrate_kbps) {
  if (!(bitrate_kbps > 0.0)) throw ValidationError("quality: bitrate must be positive");
  if (variant.kind == QoeKind::kLin) return bitrate_kbps / 1000.0;
  return std::log(bitrate_kbps / variant.b_min_kbps);
}

double chunk_reward(const QoeVariant& variant, double bitrate_kbps, double prev_bitrate_kbps,
                    double rebuffer_s) {
  if (!(rebuffer_s >= 0.0)) throw ValidationError("chunk_reward: rebuffer must be >= 0");
  const double q = quality(variant, bitrate_kbps);
  const double q_prev = quality(variant, prev_bitrate_kbps);
  return q - variant.mu * rebuffer_s - std::abs(q - q_prev);
}

EpisodeQoe episode_qoe(const QoeVariant& variant, std::span<const double> bitrates_kbps,
                       std::span<const double> rebuffers_s) {
  if (bitrates_kbps.size() != rebuffers_s.size()) {
    throw ValidationError("episode_qoe: bitrate and rebuffer sequences differ in length");
  }
  if (bitrates_kbps.empty()) throw ValidationError("episode_qoe: empty episode");
  EpisodeQoe out;
  double rebuffer_total = 0.0;
  for (std::size_t n = 0; n < bitrates_kbps.size(); ++n) {
    const double prev = n == 0 ? bitrates_kbps[0] : bitrates_kbps[n - 1];
    out.total += chunk_reward(variant, bitrates_kbps[n], prev, rebuffers_s[n]);
    const double q = quality(variant, bitrates_kbps[n]);
    out.components.bitrate_sum += q;
    rebuffer_total += rebuffers_s[n];
    out.components.smooth_penalty += std::abs(q - quality(variant, prev));
  }
  out.components.rebuf_penalty = variant.mu * rebuffer_total;
  return out;
}

}  // namespace abrlab
