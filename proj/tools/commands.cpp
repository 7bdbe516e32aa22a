#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "abrlab/checkpoint.hpp"
#include "abrlab/error.hpp"
#include "abrlab/evaluate.hpp"
#include "abrlab/io.hpp"
#include "abrlab/verify.hpp"

namespace abrlab::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Bad flags, configs or missing inputs (exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<ThroughputTrace> load_traces_or_fail(const fs::path& dir) {
  if (dir.empty()) throw UsageError("no trace directory given");
  if (!fs::is_directory(dir)) throw UsageError("trace directory not found: " + dir.string());
  auto traces = load_trace_dir(dir);
  if (traces.empty()) throw UsageError("no traces in " + dir.string());
  return traces;
}

VideoManifest load_manifest_or_default(const fs::path& path) {
  if (path.empty()) return default_manifest();
  if (!fs::exists(path)) throw UsageError("manifest not found: " + path.string());
  return load_manifest(path);
}

std::uint64_t seed_fallback(std::uint64_t current) {
  if (const char* env = std::getenv("ABRLAB_SEED")) {
    std::uint64_t v = 0;
    const std::string s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw UsageError("ABRLAB_SEED is not an unsigned integer: '" + s + "'");
    }
    return v;
  }
  return current;
}

/// A checkpoint argument may name an actor file or a training output dir.
fs::path actor_checkpoint_path(const fs::path& p) {
  if (fs::is_directory(p)) return p / "best_actor.json";
  return p;
}

std::unique_ptr<AbrController> make_controller(const std::string& algo, const SessionContext& ctx,
                                               const Mlp* actor) {
  if (algo == "ppo" || algo == "a3c") return std::make_unique<PolicyController>(*actor, *ctx.manifest, algo);
  return make_baseline(algo, ctx);
}

struct Session {
  VideoManifest manifest;
  SessionContext ctx;
  std::optional<Mlp> actor;
};

const std::vector<std::string> kAlgos{"ppo", "a3c", "bb", "rb", "bola", "mpc"};

bool learned(const std::string& algo) { return algo == "ppo" || algo == "a3c"; }

// Loads the checkpoint for learned algorithms and sizes the history window
// to match its input layer.
void attach_policy(Session& s, const std::string& algo, const std::string& checkpoint) {
  if (!learned(algo)) return;
  if (checkpoint.empty()) throw UsageError("--checkpoint is required for " + algo);
  const auto path = actor_checkpoint_path(checkpoint);
  if (!fs::exists(path)) throw UsageError("checkpoint not found: " + path.string());
  auto ckpt = load_checkpoint(path);
  const auto levels = s.manifest.num_levels();
  const auto dim = ckpt.net.input_dim();
  if (ckpt.net.output_dim() != levels || dim < levels + 5 + 2 || (dim - levels - 5) % 2 != 0) {
    throw ValidationError("checkpoint " + path.string() + " (dims " +
                          std::to_string(dim) + " -> " + std::to_string(ckpt.net.output_dim()) +
                          ") is incompatible with a " + std::to_string(levels) + "-level manifest");
  }
  s.ctx.player.history_len_k = (dim - levels - 5) / 2;
  s.actor = std::move(ckpt.net);
}

Session make_session(const std::string& manifest_path, const LinkConfig& link,
                     double buffer_cap_s, const QoeVariant& variant_template) {
  Session s{load_manifest_or_default(manifest_path), {}, std::nullopt};
  s.ctx.link = link;
  s.ctx.player.buffer_cap_s = buffer_cap_s;
  s.ctx.variant = variant_template;
  return s;
}

std::vector<EpisodeResult> evaluate_algo(Session& s, const std::string& algo,
                                         std::span<const ThroughputTrace> traces,
                                         std::size_t threads) {
  s.ctx.manifest = &s.manifest;
  const Mlp* actor = s.actor ? &*s.actor : nullptr;
  return evaluate([&] { return make_controller(algo, s.ctx, actor); }, traces, s.ctx, threads);
}

void check_algo(const std::string& algo) {
  if (std::find(kAlgos.begin(), kAlgos.end(), algo) == kAlgos.end()) {
    throw UsageError("unknown algorithm '" + algo + "'");
  }
}

// ---------------------------------------------------------------- train

int cmd_train(const std::string& config_path, const std::string& algo_flag,
              std::optional<std::uint64_t> seed_flag, const std::string& out_flag,
              std::optional<std::size_t> epochs_flag, bool verbose, std::ostream& out,
              std::ostream& err) {
  if (!fs::exists(config_path)) throw UsageError("config file not found: " + config_path);
  RunConfig cfg = load_run_config(config_path);
  if (!algo_flag.empty()) cfg.algo = parse_algo(algo_flag);
  if (seed_flag) cfg.train.seed = *seed_flag;
  if (!out_flag.empty()) cfg.out_dir = out_flag;
  if (epochs_flag) cfg.train.total_epochs = *epochs_flag;
  if (cfg.out_dir.empty()) throw UsageError("no output directory (--out or out_dir)");
  cfg.train.validate();

  const auto traces = load_traces_or_fail(cfg.trace_dir);
  const auto manifest = load_manifest_or_default(cfg.manifest);
  const auto variant = parse_qoe_variant(cfg.qoe, manifest.bitrate_kbps(0));
  fs::create_directories(cfg.out_dir);

  std::string curve = std::string(kLearningCurveHeader) + "\n";
  auto observer = [&](const TrainStats& s) {
    curve += format_curve_row(s) + "\n";
    if (verbose && (s.update % 50 == 0 || s.update == cfg.train.total_epochs)) {
      err << "update " << s.update << " mean_qoe " << s.mean_qoe << " entropy_weight "
          << s.entropy_weight << " kl " << s.kl << "\n";
    }
  };
  auto result = train(cfg.algo, cfg.train, traces, manifest, variant, cfg.link, cfg.player, observer);

  const auto hash = config_hash(cfg);
  const CheckpointMeta best_meta{result.best_update, cfg.train.seed, hash};
  const CheckpointMeta last_meta{result.curve.size(), cfg.train.seed, hash};
  save_checkpoint(cfg.out_dir / "best_actor.json", result.best.actor, best_meta);
  save_checkpoint(cfg.out_dir / "best_critic.json", result.best.critic, best_meta);
  save_checkpoint(cfg.out_dir / "last_actor.json", result.last.actor, last_meta);
  save_checkpoint(cfg.out_dir / "last_critic.json", result.last.critic, last_meta);
  write_file_atomic(cfg.out_dir / "learning_curve.csv", curve);
  write_file_atomic(cfg.out_dir / "run_config.json", run_config_to_json(cfg).dump(2) + "\n");

  if (result.diverged) {
    err << "error: training diverged at " << result.error << "; last good checkpoint saved to "
        << cfg.out_dir.string() << "\n";
    return kRuntimeError;
  }
  out << "trained " << to_string(cfg.algo) << ": updates=" << result.curve.size()
      << " best_update=" << result.best_update << " best_rolling_qoe=" << result.best_score
      << " kl_violations=" << result.kl_violations << " out=" << cfg.out_dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalFlags {
  std::string algo;
  std::string checkpoint;
  std::string traces;
  std::string qoe = "lin";
  std::string out;
  std::string manifest;
  double capacity_mbps = LinkConfig{}.capacity_mbps;
  double rtt_s = LinkConfig{}.rtt_s;
  double buffer_cap_s = PlayerConfig{}.buffer_cap_s;
  std::size_t threads = 1;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  check_algo(f.algo);
  const auto traces = load_traces_or_fail(f.traces);
  Session s = make_session(f.manifest, {f.capacity_mbps, f.rtt_s}, f.buffer_cap_s, {});
  s.ctx.variant = parse_qoe_variant(f.qoe, s.manifest.bitrate_kbps(0));
  attach_policy(s, f.algo, f.checkpoint);
  const auto results = evaluate_algo(s, f.algo, traces, f.threads);
  const auto csv = format_eval_csv(results);
  if (f.out.empty()) {
    out << csv;
  } else {
    write_file_atomic(f.out, csv);
    out << f.algo << " (" << f.qoe << ") over " << results.size()
        << " traces: mean QoE " << mean_qoe(results) << " -> " << f.out << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------- compare

struct CompareFlags {
  std::vector<std::string> algos;
  std::vector<std::string> qoe{"lin"};
  std::string traces;
  std::string out;
  std::string manifest;
  std::string ppo_checkpoint;
  std::string a3c_checkpoint;
  double capacity_mbps = LinkConfig{}.capacity_mbps;
  double rtt_s = LinkConfig{}.rtt_s;
  double buffer_cap_s = PlayerConfig{}.buffer_cap_s;
  std::size_t threads = 1;
};

int cmd_compare(const CompareFlags& f, std::ostream& out) {
  for (const auto& a : f.algos) check_algo(a);
  const auto traces = load_traces_or_fail(f.traces);
  struct Row {
    std::string algo;
    std::vector<double> means;
  };
  std::vector<Row> rows;
  for (const auto& algo : f.algos) {
    Row row{algo, {}};
    for (const auto& q : f.qoe) {
      Session s = make_session(f.manifest, {f.capacity_mbps, f.rtt_s}, f.buffer_cap_s, {});
      s.ctx.variant = parse_qoe_variant(q, s.manifest.bitrate_kbps(0));
      attach_policy(s, algo, algo == "ppo" ? f.ppo_checkpoint : f.a3c_checkpoint);
      const auto results = evaluate_algo(s, algo, traces, f.threads);
      row.means.push_back(mean_qoe(results));
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.means[0] > b.means[0]; });

  std::string csv = "algo";
  for (const auto& q : f.qoe) csv += ",mean_qoe_" + q;
  csv += "\n";
  std::ostringstream table;
  table << std::left << std::setw(8) << "algo";
  for (const auto& q : f.qoe) table << std::right << std::setw(16) << ("QoE_" + q);
  table << "\n";
  for (const auto& r : rows) {
    csv += r.algo;
    table << std::left << std::setw(8) << r.algo;
    for (double m : r.means) {
      csv += "," + shortest(m);
      table << std::right << std::setw(16) << std::fixed << std::setprecision(3) << m;
    }
    csv += "\n";
    table << "\n";
  }
  if (!f.out.empty()) write_file_atomic(f.out, csv);
  out << table.str();
  return kOk;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const std::string& suite, std::ostream& out) {
  const std::vector<std::string> suites{"gradcheck", "envoracle", "mpcoracle", "all"};
  if (std::find(suites.begin(), suites.end(), suite) == suites.end()) {
    throw UsageError("unknown suite '" + suite + "' (gradcheck|envoracle|mpcoracle|all)");
  }
  std::vector<verify::Check> checks;
  if (suite == "gradcheck" || suite == "all") {
    for (auto& c : verify::gradcheck()) checks.push_back(c);
  }
  if (suite == "envoracle" || suite == "all") checks.push_back(verify::env_oracle());
  if (suite == "mpcoracle" || suite == "all") checks.push_back(verify::mpc_oracle(100, 3, 3));
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " cases=" << c.cases;
    if (c.name == "mpcoracle") {
      out << " mismatches=" << c.measured << "\n";
    } else {
      out << " max_error=" << c.measured << " tolerance=" << c.tolerance << "\n";
    }
  }
  return ok ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------- synth

struct SynthTraceFlags {
  std::string kind = "markov";
  double level = 3.0;
  double low = 1.0;
  double high = 4.0;
  double period = 8.0;
  std::vector<double> states{0.5, 1.5, 3.0};
  double p_stay = 0.8;
  double duration = 320.0;
  double dt = 1.0;
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::string out;
};

int cmd_synth_traces(const SynthTraceFlags& f, std::ostream& out) {
  SynthSpec spec;
  spec.kind = parse_synth_kind(f.kind);
  spec.constant.level_mbps = f.level;
  spec.step = {f.low, f.high, f.period};
  spec.markov = {f.states, f.p_stay};
  spec.duration_s = f.duration;
  spec.dt_s = f.dt;
  fs::create_directories(f.out);
  for (std::size_t i = 0; i < f.count; ++i) {
    spec.seed = f.seed + i;
    const auto id = f.kind + "-" + std::to_string(spec.seed);
    const auto trace = synth_trace(spec, id);
    write_file_atomic(fs::path(f.out) / (id + ".txt"), format_trace(trace));
  }
  out << "wrote " << f.count << " " << f.kind << " traces to " << f.out << "\n";
  return kOk;
}

int cmd_synth_manifest(const std::vector<double>& ladder, std::size_t chunks, double duration,
                       double jitter, std::uint64_t seed, const std::string& path,
                       std::ostream& out) {
  const auto manifest = synth_manifest(ladder, chunks, duration, jitter, seed);
  write_file_atomic(path, format_manifest(manifest));
  out << "wrote manifest (" << chunks << " chunks x " << ladder.size() << " levels) to " << path
      << "\n";
  return kOk;
}

}  // namespace

// ---------------------------------------------------------------- config

RunConfig run_config_from_json(const json& doc, const fs::path& base_dir) {
  static const std::vector<std::string> kKeys{
      "algo", "qoe", "trace_dir", "manifest", "out_dir", "gamma", "clip_eps", "lr_actor",
      "lr_critic", "entropy_start", "entropy_end", "n_actors", "epochs_per_update",
      "minibatches_per_epoch", "total_epochs", "seed", "kl_limit", "hidden", "threads", "link",
      "player"};
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  RunConfig c;
  bool seed_given = doc.contains("seed");
  try {
    if (doc.contains("algo")) c.algo = parse_algo(doc["algo"].get<std::string>());
    c.qoe = doc.value("qoe", c.qoe);
    c.trace_dir = resolve(base_dir, doc.value("trace_dir", std::string{}));
    c.manifest = resolve(base_dir, doc.value("manifest", std::string{}));
    c.out_dir = resolve(base_dir, doc.value("out_dir", std::string{}));
    auto& t = c.train;
    t.gamma = doc.value("gamma", t.gamma);
    t.clip_eps = doc.value("clip_eps", t.clip_eps);
    t.lr_actor = doc.value("lr_actor", t.lr_actor);
    t.lr_critic = doc.value("lr_critic", t.lr_critic);
    t.entropy_start = doc.value("entropy_start", t.entropy_start);
    t.entropy_end = doc.value("entropy_end", t.entropy_end);
    t.n_actors = doc.value("n_actors", t.n_actors);
    t.epochs_per_update = doc.value("epochs_per_update", t.epochs_per_update);
    t.minibatches_per_epoch = doc.value("minibatches_per_epoch", t.minibatches_per_epoch);
    t.total_epochs = doc.value("total_epochs", t.total_epochs);
    t.seed = doc.value("seed", t.seed);
    t.kl_limit = doc.value("kl_limit", t.kl_limit);
    t.hidden = doc.value("hidden", t.hidden);
    t.threads = doc.value("threads", t.threads);
    if (doc.contains("link")) {
      const auto& l = doc["link"];
      c.link.capacity_mbps = l.value("capacity_mbps", c.link.capacity_mbps);
      c.link.rtt_s = l.value("rtt_s", c.link.rtt_s);
    }
    if (doc.contains("player")) {
      const auto& p = doc["player"];
      c.player.buffer_cap_s = p.value("buffer_cap_s", c.player.buffer_cap_s);
      c.player.history_len_k = p.value("history_len_k", c.player.history_len_k);
      c.player.expose_link_stats = p.value("expose_link_stats", c.player.expose_link_stats);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (!seed_given) c.train.seed = seed_fallback(c.train.seed);
  if (c.qoe != "lin" && c.qoe != "log") throw UsageError("config: qoe must be lin or log");
  return c;
}

json run_config_to_json(const RunConfig& c) {
  const auto& t = c.train;
  return json{{"algo", to_string(c.algo)},
              {"qoe", c.qoe},
              {"trace_dir", c.trace_dir.string()},
              {"manifest", c.manifest.string()},
              {"out_dir", c.out_dir.string()},
              {"gamma", t.gamma},
              {"clip_eps", t.clip_eps},
              {"lr_actor", t.lr_actor},
              {"lr_critic", t.lr_critic},
              {"entropy_start", t.entropy_start},
              {"entropy_end", t.entropy_end},
              {"n_actors", t.n_actors},
              {"epochs_per_update", t.epochs_per_update},
              {"minibatches_per_epoch", t.minibatches_per_epoch},
              {"total_epochs", t.total_epochs},
              {"seed", t.seed},
              {"kl_limit", t.kl_limit},
              {"hidden", t.hidden},
              {"threads", t.threads},
              {"link", {{"capacity_mbps", c.link.capacity_mbps}, {"rtt_s", c.link.rtt_s}}},
              {"player",
               {{"buffer_cap_s", c.player.buffer_cap_s},
                {"history_len_k", c.player.history_len_k},
                {"expose_link_stats", c.player.expose_link_stats}}}};
}

RunConfig load_run_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  return run_config_from_json(doc, path.parent_path());
}

std::string config_hash(const RunConfig& config) {
  auto doc = run_config_to_json(config);
  for (const char* key : {"trace_dir", "manifest", "out_dir", "threads"}) doc.erase(key);
  return fnv1a_hex(doc.dump());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"abrlab: trace-driven adaptive-bitrate streaming lab"};
  app.require_subcommand(1);

  auto* train_cmd = app.add_subcommand("train", "train a PPO or A3C agent");
  std::string config_path, train_algo, train_out;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::size_t> train_epochs;
  bool verbose = false;
  train_cmd->add_option("config", config_path, "JSON run configuration")->required();
  train_cmd->add_option("--algo", train_algo, "ppo|a3c (overrides the config)");
  train_cmd->add_option("--seed", train_seed, "random seed (overrides the config)");
  train_cmd->add_option("--out", train_out, "output directory (overrides the config)");
  train_cmd->add_option("--total-epochs", train_epochs, "number of updates");
  train_cmd->add_flag("-v,--verbose", verbose, "progress on stderr");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate one controller over a trace set");
  EvalFlags ef;
  eval_cmd->add_option("--algo", ef.algo, "ppo|a3c|bb|rb|bola|mpc")->required();
  eval_cmd->add_option("--checkpoint", ef.checkpoint, "actor checkpoint file or training dir");
  eval_cmd->add_option("--traces", ef.traces, "trace directory")->required();
  eval_cmd->add_option("--qoe", ef.qoe, "lin|log");
  eval_cmd->add_option("--out", ef.out, "CSV output path (stdout when omitted)");
  eval_cmd->add_option("--manifest", ef.manifest, "manifest JSON (default ladder when omitted)");
  eval_cmd->add_option("--capacity", ef.capacity_mbps, "link capacity, Mbps");
  eval_cmd->add_option("--rtt", ef.rtt_s, "link round-trip time, s");
  eval_cmd->add_option("--buffer-cap", ef.buffer_cap_s, "player buffer cap, s");
  eval_cmd->add_option("--threads", ef.threads, "parallel episodes");

  auto* compare_cmd = app.add_subcommand("compare", "mean QoE table across controllers");
  CompareFlags cf;
  compare_cmd->add_option("--algos", cf.algos, "controllers to compare")->required()->delimiter(',');
  compare_cmd->add_option("--qoe", cf.qoe, "one or more of lin,log")->delimiter(',');
  compare_cmd->add_option("--traces", cf.traces, "trace directory")->required();
  compare_cmd->add_option("--out", cf.out, "CSV output path");
  compare_cmd->add_option("--manifest", cf.manifest, "manifest JSON");
  compare_cmd->add_option("--ppo-checkpoint", cf.ppo_checkpoint, "checkpoint for ppo");
  compare_cmd->add_option("--a3c-checkpoint", cf.a3c_checkpoint, "checkpoint for a3c");
  compare_cmd->add_option("--capacity", cf.capacity_mbps, "link capacity, Mbps");
  compare_cmd->add_option("--rtt", cf.rtt_s, "link round-trip time, s");
  compare_cmd->add_option("--buffer-cap", cf.buffer_cap_s, "player buffer cap, s");
  compare_cmd->add_option("--threads", cf.threads, "parallel episodes");

  auto* verify_cmd = app.add_subcommand("verify", "run the oracle suites");
  std::string suite = "all";
  verify_cmd->add_option("--suite", suite, "gradcheck|envoracle|mpcoracle|all");

  auto* traces_cmd = app.add_subcommand("synth-traces", "generate synthetic traces");
  SynthTraceFlags tf;
  traces_cmd->add_option("--kind", tf.kind, "constant|step|markov");
  traces_cmd->add_option("--level", tf.level, "constant level, Mbps");
  traces_cmd->add_option("--low", tf.low, "step low level, Mbps");
  traces_cmd->add_option("--high", tf.high, "step high level, Mbps");
  traces_cmd->add_option("--period", tf.period, "step hold time, s");
  traces_cmd->add_option("--states", tf.states, "markov rates, Mbps")->delimiter(',');
  traces_cmd->add_option("--p-stay", tf.p_stay, "markov stay probability");
  traces_cmd->add_option("--duration", tf.duration, "trace length, s");
  traces_cmd->add_option("--dt", tf.dt, "sample spacing, s");
  traces_cmd->add_option("--seed", tf.seed, "first seed");
  traces_cmd->add_option("--count", tf.count, "number of traces (seeds seed..seed+count-1)");
  traces_cmd->add_option("--out", tf.out, "output directory")->required();

  auto* manifest_cmd = app.add_subcommand("synth-manifest", "generate a synthetic manifest");
  std::vector<double> ladder = kDefaultLadderKbps;
  std::size_t chunks = kDefaultChunks;
  double chunk_s = kDefaultChunkDurationS, jitter = 0.0;
  std::uint64_t manifest_seed = 0;
  std::string manifest_out;
  manifest_cmd->add_option("--bitrates", ladder, "ladder, kbps")->delimiter(',');
  manifest_cmd->add_option("--chunks", chunks, "number of chunks");
  manifest_cmd->add_option("--chunk-duration", chunk_s, "seconds per chunk");
  manifest_cmd->add_option("--jitter", jitter, "relative size jitter in [0, 1)");
  manifest_cmd->add_option("--seed", manifest_seed, "jitter seed");
  manifest_cmd->add_option("--out", manifest_out, "output JSON path")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsageError;
  }

  try {
    if (*train_cmd) {
      return cmd_train(config_path, train_algo, train_seed, train_out, train_epochs, verbose, out, err);
    }
    if (*eval_cmd) return cmd_eval(ef, out);
    if (*compare_cmd) return cmd_compare(cf, out);
    if (*verify_cmd) return cmd_verify(suite, out);
    if (*traces_cmd) return cmd_synth_traces(tf, out);
    if (*manifest_cmd) {
      return cmd_synth_manifest(ladder, chunks, chunk_s, jitter, manifest_seed, manifest_out, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace abrlab::cli
