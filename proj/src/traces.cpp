#include "abrlab/traces.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "abrlab/error.hpp"

namespace abrlab {
namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

bool parse_double(std::string_view token, double& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

}  // namespace

ThroughputTrace::ThroughputTrace(std::string id, std::vector<TraceSample> samples)
    : id_(std::move(id)), samples_(std::move(samples)) {
  if (samples_.size() < 2) {
    throw ValidationError("trace '" + id_ + "': needs at least 2 samples, got " +
                          std::to_string(samples_.size()));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.time_s) || (i == 0 && s.time_s < 0.0)) {
      throw ValidationError("trace '" + id_ + "': invalid time at sample " + std::to_string(i));
    }
    if (i > 0 && !(s.time_s > samples_[i - 1].time_s)) {
      throw ValidationError("trace '" + id_ + "': non-monotone time at sample " +
                            std::to_string(i));
    }
    if (!std::isfinite(s.bandwidth_mbps) || s.bandwidth_mbps <= 0.0) {
      throw ValidationError("trace '" + id_ + "': non-positive bandwidth at sample " +
                            std::to_string(i));
    }
  }
}

double ThroughputTrace::min_bandwidth() const {
  return std::min_element(samples_.begin(), samples_.end(),
                          [](auto& a, auto& b) { return a.bandwidth_mbps < b.bandwidth_mbps; })
      ->bandwidth_mbps;
}

double ThroughputTrace::max_bandwidth() const {
  return std::max_element(samples_.begin(), samples_.end(),
                          [](auto& a, auto& b) { return a.bandwidth_mbps < b.bandwidth_mbps; })
      ->bandwidth_mbps;
}

ThroughputTrace parse_trace(const std::string& text, std::string id, const std::string& source) {
  std::vector<TraceSample> samples;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    TraceSample s;
    if (tokens.size() != 2 || !parse_double(tokens[0], s.time_s) ||
        !parse_double(tokens[1], s.bandwidth_mbps)) {
      throw ParseError(source + ":" + std::to_string(line_no) +
                       ": expected `time_s bandwidth_mbps`, got '" + line + "'");
    }
    samples.push_back(s);
  }
  return ThroughputTrace(std::move(id), std::move(samples));
}

ThroughputTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str(), path.stem().string(), path.string());
}

std::string format_trace(const ThroughputTrace& trace) {
  std::string out;
  for (const auto& s : trace.samples()) {
    out += shortest(s.time_s);
    out += ' ';
    out += shortest(s.bandwidth_mbps);
    out += '\n';
  }
  return out;
}

void write_trace(const ThroughputTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace file " + path.string());
  out << format_trace(trace);
}

std::vector<ThroughputTrace> load_trace_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ParseError("trace directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext.empty() || ext == ".txt" || ext == ".log") files.push_back(entry.path());
  }
  std::vector<ThroughputTrace> traces;
  traces.reserve(files.size());
  for (const auto& f : files) traces.push_back(load_trace(f));
  std::sort(traces.begin(), traces.end(), [](auto& a, auto& b) { return a.id() < b.id(); });
  return traces;
}

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "constant") return SynthKind::kConstant;
  if (name == "step") return SynthKind::kStep;
  if (name == "markov") return SynthKind::kMarkov;
  throw ValidationError("unknown trace kind '" + name + "' (constant|step|markov)");
}

ThroughputTrace synth_trace(const SynthSpec& spec, std::string id) {
  if (!(spec.duration_s > 0.0) || !(spec.dt_s > 0.0)) {
    throw ValidationError("synth_trace: duration_s and dt_s must be positive");
  }
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  switch (spec.kind) {
    case SynthKind::kConstant:
      if (!positive(spec.constant.level_mbps)) {
        throw ValidationError("synth_trace: constant level must be positive");
      }
      break;
    case SynthKind::kStep:
      if (!positive(spec.step.low_mbps) || !positive(spec.step.high_mbps) ||
          !positive(spec.step.period_s)) {
        throw ValidationError("synth_trace: step levels and period must be positive");
      }
      break;
    case SynthKind::kMarkov:
      if (spec.markov.states_mbps.empty() ||
          !std::all_of(spec.markov.states_mbps.begin(), spec.markov.states_mbps.end(), positive)) {
        throw ValidationError("synth_trace: markov states must be non-empty and positive");
      }
      if (!(spec.markov.p_stay >= 0.0 && spec.markov.p_stay <= 1.0)) {
        throw ValidationError("synth_trace: p_stay must lie in [0, 1]");
      }
      break;
  }

  std::vector<double> times;
  const auto whole = static_cast<std::size_t>(std::floor(spec.duration_s / spec.dt_s + 1e-9));
  for (std::size_t i = 0; i <= whole; ++i) times.push_back(static_cast<double>(i) * spec.dt_s);
  if (times.back() < spec.duration_s - 1e-9 * spec.dt_s) times.push_back(spec.duration_s);
  if (times.size() < 2) times.push_back(spec.duration_s);

  std::mt19937_64 rng(spec.seed);
  const auto& states = spec.markov.states_mbps;
  std::size_t state = 0;
  if (spec.kind == SynthKind::kMarkov) {
    state = std::uniform_int_distribution<std::size_t>(0, states.size() - 1)(rng);
  }

  std::vector<TraceSample> samples;
  samples.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    double bw = 0.0;
    switch (spec.kind) {
      case SynthKind::kConstant:
        bw = spec.constant.level_mbps;
        break;
      case SynthKind::kStep: {
        const auto phase = static_cast<long long>(std::floor(t / spec.step.period_s + 1e-9));
        bw = phase % 2 == 0 ? spec.step.low_mbps : spec.step.high_mbps;
        break;
      }
      case SynthKind::kMarkov:
        if (i > 0 && states.size() > 1) {
          const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
          if (u >= spec.markov.p_stay) {
            auto jump = std::uniform_int_distribution<std::size_t>(0, states.size() - 2)(rng);
            state = jump >= state ? jump + 1 : jump;
          }
        }
        bw = states[state];
        break;
    }
    samples.push_back({t, bw});
  }
  if (id.empty()) id = "synth-" + std::to_string(spec.seed);
  return ThroughputTrace(std::move(id), std::move(samples));
}

}  // namespace abrlab
