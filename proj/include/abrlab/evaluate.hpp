#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "abrlab/baselines.hpp"
#include "abrlab/qoe.hpp"

namespace abrlab {

struct EpisodeResult {
  std::string trace_id;
  std::string algo;
  EpisodeQoe qoe;
  double mean_bitrate_kbps = 0.0;
  double total_rebuffer_s = 0.0;
  std::vector<std::size_t> levels;
};

/// Plays one full episode from trace offset zero.
EpisodeResult run_episode(AbrController& controller, const ThroughputTrace& trace,
                          const SessionContext& ctx);

using ControllerFactory = std::function<std::unique_ptr<AbrController>()>;

/// One episode per trace, each with a fresh controller. Results keep the
/// order of `traces` whatever the thread count.
std::vector<EpisodeResult> evaluate(const ControllerFactory& factory,
                                    std::span<const ThroughputTrace> traces,
                                    const SessionContext& ctx, std::size_t threads = 1);

double mean_qoe(std::span<const EpisodeResult> results);

inline constexpr const char* kEvalHeader =
    "trace_id,algo,qoe_total,bitrate_sum,rebuf_penalty,smooth_penalty,mean_bitrate_kbps,"
    "total_rebuffer_s";

/// Per-trace rows followed by a `mean` summary row.
std::string format_eval_csv(std::span<const EpisodeResult> results);

}  // namespace abrlab
