#include "abrlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "abrlab/rl.hpp"

namespace abrlab::verify {

MillisecondSimulator::MillisecondSimulator(const ThroughputTrace& trace,
                                           const VideoManifest& manifest,
                                           const LinkConfig& link, double buffer_cap_s,
                                           double start_clock_s)
    : trace_(trace),
      manifest_(manifest),
      link_(link),
      buffer_cap_s_(buffer_cap_s),
      clock_s_(start_clock_s) {
  for (const auto& s : trace.samples()) rel_times_.push_back(s.time_s - trace.start_time());
}

double MillisecondSimulator::rate_at(double clock_s) const {
  const double pos = std::fmod(clock_s, trace_.span());
  auto it = std::upper_bound(rel_times_.begin(), rel_times_.end(), pos);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - rel_times_.begin() - 1, 0));
  const auto safe = std::min(idx, trace_.size() - 2);
  return std::min(trace_.samples()[safe].bandwidth_mbps, link_.capacity_mbps);
}

MillisecondSimulator::Step MillisecondSimulator::step(std::size_t level) {
  constexpr double kGrid = 1e-3;
  double remaining = manifest_.size_bytes(chunk_, level) * 8.0 / 1e6;
  double transfer = 0.0;
  while (remaining > 0.0) {
    double next = (std::floor(clock_s_ / kGrid + 1e-7) + 1.0) * kGrid;
    double dt = next - clock_s_;
    if (dt <= 0.0) dt = kGrid;
    // Trace changes only on grid points, so the midpoint rate holds for the
    // whole sub-step.
    const double rate = rate_at(clock_s_ + 0.5 * dt);
    if (rate * dt >= remaining) {
      const double need = remaining / rate;
      transfer += need;
      clock_s_ += need;
      remaining = 0.0;
    } else {
      remaining -= rate * dt;
      transfer += dt;
      clock_s_ += dt;
    }
  }
  clock_s_ += link_.rtt_s;
  Step out;
  out.delay_s = transfer + link_.rtt_s;
  out.rebuffer_s = std::max(out.delay_s - buffer_s_, 0.0);
  buffer_s_ = std::max(buffer_s_ - out.delay_s, 0.0) + manifest_.chunk_duration_s();
  if (buffer_s_ > buffer_cap_s_) {
    out.sleep_s = buffer_s_ - buffer_cap_s_;
    buffer_s_ = buffer_cap_s_;
    clock_s_ += out.sleep_s;
  }
  ++chunk_;
  return out;
}

std::size_t brute_force_mpc(const MpcProblem& problem, std::size_t horizon) {
  const auto levels = problem.manifest->num_levels();
  horizon = std::min(horizon, problem.manifest->num_chunks() - problem.first_chunk);
  if (horizon == 0) return 0;
  std::size_t total = 1;
  for (std::size_t j = 0; j < horizon; ++j) total *= levels;

  std::vector<double> scores(total);
  std::vector<std::size_t> firsts(total);
  std::vector<std::size_t> seq(horizon);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (std::size_t j = horizon; j-- > 0;) {
      seq[j] = rest % levels;
      rest /= levels;
    }
    scores[code] = mpc_sequence_score(problem, seq);
    firsts[code] = seq[0];
  }
  const double best = *std::max_element(scores.begin(), scores.end());
  std::size_t level = levels;
  for (std::size_t code = 0; code < total; ++code) {
    if (scores[code] == best) level = std::min(level, firsts[code]);
  }
  return level;
}

namespace {

double ms(std::mt19937_64& rng, double lo_s, double hi_s) {
  std::uniform_int_distribution<long> d(static_cast<long>(lo_s * 1000), static_cast<long>(hi_s * 1000));
  return static_cast<double>(d(rng)) / 1000.0;
}

ThroughputTrace random_trace(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 20);
  std::uniform_real_distribution<double> bw(0.2, 6.0);
  std::vector<TraceSample> samples;
  double t = std::bernoulli_distribution(0.5)(rng) ? 0.0 : ms(rng, 0.0, 10.0);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    samples.push_back({t, bw(rng)});
    t += ms(rng, 0.2, 8.0);
  }
  return ThroughputTrace("random", std::move(samples));
}

VideoManifest random_manifest(std::mt19937_64& rng, std::size_t max_levels, std::size_t max_chunks) {
  std::uniform_int_distribution<std::size_t> levels(2, max_levels);
  std::uniform_int_distribution<std::size_t> chunks(1, max_chunks);
  std::uniform_real_distribution<double> step(100.0, 1500.0);
  std::vector<double> ladder;
  double rate = step(rng);
  const auto l = levels(rng);
  for (std::size_t i = 0; i < l; ++i) {
    ladder.push_back(rate);
    rate += step(rng);
  }
  return synth_manifest(ladder, chunks(rng), ms(rng, 1.0, 4.0), 0.3, rng());
}

}  // namespace

Check env_oracle(std::size_t cases, std::uint64_t seed, double tolerance) {
  std::mt19937_64 rng(seed);
  Check check{"envoracle", true, 0.0, tolerance, cases};
  for (std::size_t c = 0; c < cases; ++c) {
    const auto trace = random_trace(rng);
    const auto manifest = random_manifest(rng, 6, 30);
    LinkConfig link{std::uniform_real_distribution<double>(1.0, 12.0)(rng),
                    std::uniform_real_distribution<double>(0.0, 0.1)(rng)};
    PlayerConfig player;
    player.buffer_cap_s = manifest.chunk_duration_s() *
                          std::uniform_real_distribution<double>(1.5, 15.0)(rng);
    player.start_offset_mode = StartOffsetMode::kRandom;
    player.start_offset_seed = rng();

    StreamingEnv env;
    env.reset(trace, manifest, link, player);
    MillisecondSimulator reference(trace, manifest, link, player.buffer_cap_s, env.trace_clock());
    std::uniform_int_distribution<std::size_t> action(0, manifest.num_levels() - 1);
    while (!env.done()) {
      const auto level = action(rng);
      const auto got = env.step(level).outcome;
      const auto want = reference.step(level);
      check.measured = std::max({check.measured, std::abs(got.delay_s - want.delay_s),
                                 std::abs(got.rebuffer_s - want.rebuffer_s),
                                 std::abs(got.sleep_s - want.sleep_s)});
    }
  }
  check.passed = check.measured <= tolerance;
  return check;
}

Check mpc_oracle(std::size_t cases, std::size_t max_levels, std::size_t max_horizon,
                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Check check{"mpcoracle", true, 0.0, 0.0, cases};
  for (std::size_t c = 0; c < cases; ++c) {
    const auto manifest = random_manifest(rng, max_levels, 8);
    MpcProblem p;
    p.manifest = &manifest;
    p.first_chunk = std::uniform_int_distribution<std::size_t>(0, manifest.num_chunks() - 1)(rng);
    p.buffer_s = std::uniform_real_distribution<double>(0.0, 20.0)(rng);
    p.last_level = std::uniform_int_distribution<std::size_t>(0, manifest.num_levels() - 1)(rng);
    p.rate_mbps = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
    p.rtt_s = std::uniform_real_distribution<double>(0.0, 0.1)(rng);
    p.buffer_cap_s = p.buffer_s + std::uniform_real_distribution<double>(4.0, 40.0)(rng);
    p.variant = std::bernoulli_distribution(0.5)(rng) ? QoeVariant::lin()
                                                       : QoeVariant::log(manifest.bitrate_kbps(0));
    const auto horizon = std::uniform_int_distribution<std::size_t>(1, max_horizon)(rng);
    if (mpc_search(p, horizon) != brute_force_mpc(p, horizon)) check.measured += 1.0;
  }
  check.passed = check.measured == 0.0;
  return check;
}

std::vector<Check> gradcheck(std::size_t nets, std::uint64_t seed, double tolerance) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> width(2, 6);
  std::uniform_int_distribution<std::size_t> batch_size(1, 5);

  auto random_net = [&](std::size_t out, Head head) {
    std::vector<std::size_t> dims{width(rng)};
    const auto hidden = std::uniform_int_distribution<int>(1, 2)(rng);
    for (int h = 0; h < hidden; ++h) dims.push_back(width(rng));
    dims.push_back(out);
    Mlp net(dims, head);
    for (auto& w : net.weights()) w = w.unaryExpr([&](double) { return 0.7 * normal(rng); });
    for (auto& b : net.biases()) b = b.unaryExpr([&](double) { return 0.3 * normal(rng); });
    return net;
  };
  auto random_input = [&](std::size_t dim, std::size_t b) {
    Matrix x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(b));
    return Matrix(x.unaryExpr([&](double) { return normal(rng); }));
  };

  Check logpi{"gradcheck/log-policy", true, 0.0, tolerance, nets};
  Check mse{"gradcheck/value-mse", true, 0.0, tolerance, nets};
  Check ppo{"gradcheck/ppo-clip+entropy", true, 0.0, tolerance, nets};
  Check pg{"gradcheck/policy-gradient+entropy", true, 0.0, tolerance, nets};

  for (std::size_t n = 0; n < nets; ++n) {
    const auto actions_n = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
    const auto b = batch_size(rng);
    std::uniform_int_distribution<std::size_t> pick(0, actions_n - 1);

    {  // sum over the batch of log pi(a|s)
      Mlp net = random_net(actions_n, Head::kSoftmax);
      const Matrix x = random_input(net.input_dim(), b);
      std::vector<std::size_t> actions(b);
      for (auto& a : actions) a = pick(rng);
      auto loss = [&] {
        const Matrix lp = log_softmax(net.forward(x));
        double s = 0.0;
        for (std::size_t j = 0; j < b; ++j) s += lp(static_cast<Eigen::Index>(actions[j]), static_cast<Eigen::Index>(j));
        return s;
      };
      auto analytic = [&] {
        ForwardCache cache;
        const Matrix p = softmax(net.forward(x, &cache));
        Matrix g = -p;
        for (std::size_t j = 0; j < b; ++j) g(static_cast<Eigen::Index>(actions[j]), static_cast<Eigen::Index>(j)) += 1.0;
        auto grads = net.zero_grads();
        net.backward(cache, g, grads);
        return grads;
      };
      logpi.measured = std::max(logpi.measured, max_relative_error(net, loss, analytic));
    }
    {  // mean (R - V)^2
      Mlp net = random_net(1, Head::kLinear);
      const Matrix x = random_input(net.input_dim(), b);
      std::vector<double> returns(b);
      for (auto& r : returns) r = 2.0 * normal(rng);
      auto loss = [&] { return value_loss(net.forward(x), returns).loss; };
      auto analytic = [&] {
        ForwardCache cache;
        const auto vl = value_loss(net.forward(x, &cache), returns);
        auto grads = net.zero_grads();
        net.backward(cache, vl.grad_values, grads);
        return grads;
      };
      mse.measured = std::max(mse.measured, max_relative_error(net, loss, analytic));
    }
    {  // PPO clipped surrogate with entropy bonus; ratios kept off the kinks
      Mlp net = random_net(actions_n, Head::kSoftmax);
      const Matrix x = random_input(net.input_dim(), b);
      const double eps = 0.2;
      const double eta = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
      const Matrix lp = log_softmax(net.forward(x));
      std::vector<std::size_t> actions(b);
      std::vector<double> old_lp(b), adv(b);
      for (std::size_t j = 0; j < b; ++j) {
        actions[j] = pick(rng);
        adv[j] = normal(rng);
        double ratio;
        do {
          ratio = std::exp(0.4 * normal(rng));
        } while (std::abs(ratio - (1.0 - eps)) < 1e-3 || std::abs(ratio - (1.0 + eps)) < 1e-3);
        old_lp[j] = lp(static_cast<Eigen::Index>(actions[j]), static_cast<Eigen::Index>(j)) - std::log(ratio);
      }
      auto loss = [&] { return ppo_policy_loss(net.forward(x), actions, old_lp, adv, eps, eta).loss; };
      auto analytic = [&] {
        ForwardCache cache;
        const auto pl = ppo_policy_loss(net.forward(x, &cache), actions, old_lp, adv, eps, eta);
        auto grads = net.zero_grads();
        net.backward(cache, pl.grad_logits, grads);
        return grads;
      };
      ppo.measured = std::max(ppo.measured, max_relative_error(net, loss, analytic));
    }
    {  // -mean(log pi A) - eta H
      Mlp net = random_net(actions_n, Head::kSoftmax);
      const Matrix x = random_input(net.input_dim(), b);
      const double eta = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
      std::vector<std::size_t> actions(b);
      std::vector<double> adv(b);
      for (std::size_t j = 0; j < b; ++j) {
        actions[j] = pick(rng);
        adv[j] = normal(rng);
      }
      auto loss = [&] { return pg_policy_loss(net.forward(x), actions, adv, eta).loss; };
      auto analytic = [&] {
        ForwardCache cache;
        const auto pl = pg_policy_loss(net.forward(x, &cache), actions, adv, eta);
        auto grads = net.zero_grads();
        net.backward(cache, pl.grad_logits, grads);
        return grads;
      };
      pg.measured = std::max(pg.measured, max_relative_error(net, loss, analytic));
    }
  }
  std::vector<Check> out{logpi, mse, ppo, pg};
  for (auto& c : out) c.passed = c.measured <= c.tolerance;
  return out;
}

}  // namespace abrlab::verify
