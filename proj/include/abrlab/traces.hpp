#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace abrlab {

struct TraceSample {
  double time_s = 0.0;
  double bandwidth_mbps = 0.0;

  friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

/// Timestamped bandwidth record driving the simulated bottleneck link.
///
/// Sample i holds its bandwidth over [time_i, time_{i+1}); the final sample
/// only marks the end of the trace span. Immutable once constructed.
class ThroughputTrace {
 public:
  /// Throws ValidationError unless times are strictly increasing from >= 0,
  /// every bandwidth is finite and positive, and there are >= 2 samples.
  ThroughputTrace(std::string id, std::vector<TraceSample> samples);

  const std::string& id() const { return id_; }
  const std::vector<TraceSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }

  double start_time() const { return samples_.front().time_s; }
  /// Length of the covered interval; the period used for cyclic wrap-around.
  double span() const { return samples_.back().time_s - samples_.front().time_s; }
  double min_bandwidth() const;
  double max_bandwidth() const;

  friend bool operator==(const ThroughputTrace&, const ThroughputTrace&) = default;

 private:
  std::string id_;
  std::vector<TraceSample> samples_;
};

/// Reads the two-column `time_s bandwidth_mbps` text format. The trace id is
/// the file stem.
ThroughputTrace load_trace(const std::filesystem::path& path);

/// Parses the same format from a string; `source` labels error messages.
ThroughputTrace parse_trace(const std::string& text, std::string id,
                            const std::string& source = "<string>");

/// Emits the format read by load_trace, with enough digits to round-trip.
std::string format_trace(const ThroughputTrace& trace);
void write_trace(const ThroughputTrace& trace, const std::filesystem::path& path);

/// Every `*.txt`/`*.log`/extension-less regular file in `dir`, sorted by id.
std::vector<ThroughputTrace> load_trace_dir(const std::filesystem::path& dir);

enum class SynthKind { kConstant, kStep, kMarkov };

struct ConstantParams {
  double level_mbps = 3.0;
};

/// Alternates between `low_mbps` and `high_mbps`, holding each for `period_s`.
struct StepParams {
  double low_mbps = 1.0;
  double high_mbps = 4.0;
  double period_s = 8.0;
};

/// At every sample the chain keeps its state with probability `p_stay`,
/// otherwise jumps to a uniformly chosen different state.
struct MarkovParams {
  std::vector<double> states_mbps{0.5, 1.5, 3.0};
  double p_stay = 0.8;
};

struct SynthSpec {
  SynthKind kind = SynthKind::kConstant;
  ConstantParams constant;
  StepParams step;
  MarkovParams markov;
  double duration_s = 320.0;
  double dt_s = 1.0;
  std::uint64_t seed = 0;
};

/// Deterministic generator: samples at every multiple of dt_s in
/// [0, duration_s]. Throws ValidationError on invalid parameters.
ThroughputTrace synth_trace(const SynthSpec& spec, std::string id = {});

SynthKind parse_synth_kind(const std::string& name);

}  // namespace abrlab
