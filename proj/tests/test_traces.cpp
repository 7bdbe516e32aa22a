#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>

#include "abrlab/error.hpp"
#include "abrlab/traces.hpp"
#include "test_util.hpp"

namespace abrlab {
namespace {

void expect_valid(const ThroughputTrace& t) {
  ASSERT_GE(t.size(), 2u);
  EXPECT_GE(t.samples().front().time_s, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_TRUE(std::isfinite(t.samples()[i].bandwidth_mbps));
    EXPECT_GT(t.samples()[i].bandwidth_mbps, 0.0);
    if (i > 0) EXPECT_GT(t.samples()[i].time_s, t.samples()[i - 1].time_s);
  }
}

TEST(TraceParse, TwoSamples) {
  const auto t = parse_trace("0.0 1.5\n4.0 2.5", "a");
  const std::vector<TraceSample> want{{0.0, 1.5}, {4.0, 2.5}};
  EXPECT_EQ(t.samples(), want);
  EXPECT_EQ(t.id(), "a");
}

TEST(TraceParse, NonMonotoneTimeRejected) {
  EXPECT_THROW(parse_trace("0.0 1.5\n0.0 2.5", "a"), ValidationError);
}

TEST(TraceParse, OffsetStart) {
  const auto t = parse_trace("5.0 1.0\n9.0 1.0\n13.0 2.0", "a");
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.start_time(), 5.0);
  EXPECT_EQ(t.span(), 8.0);
}

TEST(TraceParse, RejectsBadInput) {
  EXPECT_THROW(parse_trace("0.0 1.5", "a"), ValidationError);
  EXPECT_THROW(parse_trace("0.0 1.5\n1.0 0.0", "a"), ValidationError);
  EXPECT_THROW(parse_trace("0.0 1.5\n1.0 -2", "a"), ValidationError);
  EXPECT_THROW(parse_trace("-1.0 1.5\n1.0 2", "a"), ValidationError);
  EXPECT_THROW(parse_trace("0.0 1.5\n1.0 abc", "a"), ParseError);
  EXPECT_THROW(parse_trace("0.0 1.5\n1.0", "a"), ParseError);
}

TEST(TraceParse, ToleratesBlankLinesAndExtraWhitespace) {
  const auto t = parse_trace("\n  0 1\t\n\n2   3\n", "a");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.samples()[1].bandwidth_mbps, 3.0);
}

TEST(TraceIo, LoadUsesFileStemAsId) {
  testing::TempDir dir("traces");
  std::ofstream(dir / "norway_7.log") << "0 1\n1 2\n";
  const auto t = load_trace(dir / "norway_7.log");
  EXPECT_EQ(t.id(), "norway_7");
  EXPECT_THROW(load_trace(dir / "missing.txt"), ParseError);
}

TEST(TraceIo, RoundTripIsExact) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> bw(0.01, 6.0), gap(1e-3, 3.0);
  testing::TempDir dir("roundtrip");
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TraceSample> samples;
    double t = gap(rng);
    for (int i = 0; i < 20; ++i) {
      samples.push_back({t, bw(rng)});
      t += gap(rng);
    }
    const ThroughputTrace trace("rt" + std::to_string(trial), samples);
    const auto path = dir / (trace.id() + ".txt");
    write_trace(trace, path);
    EXPECT_EQ(load_trace(path), trace);
  }
}

TEST(TraceIo, DirectoryIsSortedById) {
  testing::TempDir dir("tracedir");
  for (const char* name : {"b.txt", "a.log", "c"}) std::ofstream(dir / name) << "0 1\n1 1\n";
  std::ofstream(dir / "skip.json") << "{}";
  const auto traces = load_trace_dir(dir.path());
  ASSERT_EQ(traces.size(), 3u);
  EXPECT_EQ(traces[0].id(), "a");
  EXPECT_EQ(traces[1].id(), "b");
  EXPECT_EQ(traces[2].id(), "c");
}

TEST(Synth, Constant) {
  SynthSpec spec;
  spec.kind = SynthKind::kConstant;
  spec.constant.level_mbps = 3.0;
  spec.duration_s = 40;
  spec.dt_s = 4;
  const auto t = synth_trace(spec);
  ASSERT_EQ(t.size(), 11u);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t.samples()[i].time_s, 4.0 * i);
    EXPECT_EQ(t.samples()[i].bandwidth_mbps, 3.0);
  }
}

TEST(Synth, Step) {
  SynthSpec spec;
  spec.kind = SynthKind::kStep;
  spec.step = {1.0, 4.0, 8.0};
  spec.duration_s = 16;
  spec.dt_s = 4;
  const auto t = synth_trace(spec);
  std::vector<double> bw;
  for (const auto& s : t.samples()) bw.push_back(s.bandwidth_mbps);
  EXPECT_EQ(bw, (std::vector<double>{1, 1, 4, 4, 1}));
}

TEST(Synth, MarkovStaysInStateSetAndReproduces) {
  SynthSpec spec;
  spec.kind = SynthKind::kMarkov;
  spec.markov = {{0.5, 1.5, 3.0}, 0.8};
  spec.duration_s = 200;
  spec.dt_s = 1;
  spec.seed = 42;
  const auto a = synth_trace(spec);
  const auto b = synth_trace(spec);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 201u);
  std::set<double> seen;
  for (const auto& s : a.samples()) {
    EXPECT_TRUE(s.bandwidth_mbps == 0.5 || s.bandwidth_mbps == 1.5 || s.bandwidth_mbps == 3.0);
    seen.insert(s.bandwidth_mbps);
  }
  EXPECT_EQ(seen.size(), 3u);
  spec.seed = 43;
  EXPECT_NE(synth_trace(spec), a);
}

TEST(Synth, MarkovStayProbabilityExtremes) {
  SynthSpec spec;
  spec.kind = SynthKind::kMarkov;
  spec.markov = {{1.0, 2.0}, 1.0};
  spec.duration_s = 50;
  spec.seed = 9;
  const auto frozen = synth_trace(spec);
  for (const auto& s : frozen.samples()) {
    EXPECT_EQ(s.bandwidth_mbps, frozen.samples()[0].bandwidth_mbps);
  }
  spec.markov.p_stay = 0.0;
  const auto flipping = synth_trace(spec);
  for (std::size_t i = 1; i < flipping.size(); ++i) {
    EXPECT_NE(flipping.samples()[i].bandwidth_mbps, flipping.samples()[i - 1].bandwidth_mbps);
  }
}

TEST(Synth, PropertyRandomSpecsSatisfyInvariantsAndBounds) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> level(0.1, 6.0), dur(1.0, 300.0), dt(0.1, 5.0),
      unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    SynthSpec spec;
    spec.kind = static_cast<SynthKind>(trial % 3);
    spec.constant.level_mbps = level(rng);
    const double a = level(rng), b = level(rng);
    spec.step = {std::min(a, b), std::max(a, b), dt(rng) * 3};
    spec.markov = {{level(rng), level(rng), level(rng), level(rng)}, unit(rng)};
    spec.duration_s = dur(rng);
    spec.dt_s = dt(rng);
    spec.seed = rng();
    const auto t = synth_trace(spec);
    expect_valid(t);
    EXPECT_EQ(t, synth_trace(spec));
    EXPECT_GE(t.samples().back().time_s, spec.duration_s - 1e-9);
    double lo = 0, hi = 0;
    switch (spec.kind) {
      case SynthKind::kConstant: lo = hi = spec.constant.level_mbps; break;
      case SynthKind::kStep: lo = spec.step.low_mbps; hi = spec.step.high_mbps; break;
      case SynthKind::kMarkov:
        lo = *std::min_element(spec.markov.states_mbps.begin(), spec.markov.states_mbps.end());
        hi = *std::max_element(spec.markov.states_mbps.begin(), spec.markov.states_mbps.end());
        break;
    }
    EXPECT_GE(t.min_bandwidth(), lo);
    EXPECT_LE(t.max_bandwidth(), hi);
  }
}

TEST(Synth, RejectsInvalidParameters) {
  SynthSpec spec;
  spec.duration_s = 0;
  EXPECT_THROW(synth_trace(spec), ValidationError);
  spec = {};
  spec.dt_s = -1;
  EXPECT_THROW(synth_trace(spec), ValidationError);
  spec = {};
  spec.constant.level_mbps = 0;
  EXPECT_THROW(synth_trace(spec), ValidationError);
  spec = {};
  spec.kind = SynthKind::kMarkov;
  spec.markov.p_stay = 1.5;
  EXPECT_THROW(synth_trace(spec), ValidationError);
  EXPECT_THROW(parse_synth_kind("sine"), ValidationError);
  EXPECT_EQ(parse_synth_kind("step"), SynthKind::kStep);
}

}  // namespace
}  // namespace abrlab
