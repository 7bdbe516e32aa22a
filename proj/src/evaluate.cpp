#include "abrlab/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <thread>

namespace abrlab {
namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string row(const std::string& id, const std::string& algo, const EpisodeQoe& q,
                double mean_bitrate, double rebuffer) {
  return id + "," + algo + "," + shortest(q.total) + "," + shortest(q.components.bitrate_sum) +
         "," + shortest(q.components.rebuf_penalty) + "," +
         shortest(q.components.smooth_penalty) + "," + shortest(mean_bitrate) + "," +
         shortest(rebuffer) + "\n";
}

}  // namespace

EpisodeResult run_episode(AbrController& controller, const ThroughputTrace& trace,
                          const SessionContext& ctx) {
  const auto& manifest = *ctx.manifest;
  PlayerConfig player = ctx.player;
  player.start_offset_mode = StartOffsetMode::kZero;
  StreamingEnv env;
  StreamObservation obs = env.reset(trace, manifest, ctx.link, player);
  controller.reset();

  EpisodeResult result;
  result.trace_id = trace.id();
  result.algo = controller.name();
  std::vector<double> bitrates, rebuffers;
  while (!env.done()) {
    const auto level = controller.next(obs);
    auto [next_obs, outcome] = env.step(level);
    bitrates.push_back(manifest.bitrate_kbps(level));
    rebuffers.push_back(outcome.rebuffer_s);
    result.levels.push_back(level);
    result.total_rebuffer_s += outcome.rebuffer_s;
    obs = std::move(next_obs);
  }
  result.qoe = episode_qoe(ctx.variant, bitrates, rebuffers);
  double sum = 0.0;
  for (double b : bitrates) sum += b;
  result.mean_bitrate_kbps = sum / static_cast<double>(bitrates.size());
  return result;
}

std::vector<EpisodeResult> evaluate(const ControllerFactory& factory,
                                    std::span<const ThroughputTrace> traces,
                                    const SessionContext& ctx, std::size_t threads) {
  std::vector<EpisodeResult> results(traces.size());
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(traces.size(), 1));
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < traces.size(); i += stride) {
      auto controller = factory();
      results[i] = run_episode(*controller, traces[i], ctx);
    }
  };
  if (workers == 1) {
    work(0, 1);
    return results;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w, workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

double mean_qoe(std::span<const EpisodeResult> results) {
  if (results.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : results) sum += r.qoe.total;
  return sum / static_cast<double>(results.size());
}

std::string format_eval_csv(std::span<const EpisodeResult> results) {
  std::string out = std::string(kEvalHeader) + "\n";
  EpisodeQoe mean;
  double bitrate = 0.0, rebuffer = 0.0;
  for (const auto& r : results) {
    out += row(r.trace_id, r.algo, r.qoe, r.mean_bitrate_kbps, r.total_rebuffer_s);
    mean.total += r.qoe.total;
    mean.components.bitrate_sum += r.qoe.components.bitrate_sum;
    mean.components.rebuf_penalty += r.qoe.components.rebuf_penalty;
    mean.components.smooth_penalty += r.qoe.components.smooth_penalty;
    bitrate += r.mean_bitrate_kbps;
    rebuffer += r.total_rebuffer_s;
  }
  if (!results.empty()) {
    const auto n = static_cast<double>(results.size());
    mean.total /= n;
    mean.components.bitrate_sum /= n;
    mean.components.rebuf_penalty /= n;
    mean.components.smooth_penalty /= n;
    out += row("mean", results.front().algo, mean, bitrate / n, rebuffer / n);
  }
  return out;
}

}  // namespace abrlab
