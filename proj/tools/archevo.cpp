// Command-line front end: batch and scripted runs, experiments, the HTTP
// service, the model generator and the model linter.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "archevo/errors.hpp"
#include "archevo/experiments.hpp"
#include "archevo/interaction.hpp"
#include "archevo/io.hpp"
#include "archevo/service.hpp"
#include "archevo/session_log.hpp"

namespace fs = std::filesystem;
using namespace archevo;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInvalid = 2;
constexpr int kFailure = 3;

struct RunOptions {
  std::string model;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> evaluations;
  std::string out;
  std::size_t stats_every = 1;
  std::string policy;
};

EngineConfig resolve_config(const RunOptions& o) {
  EngineConfig cfg = o.config.empty() ? EngineConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.evaluations) cfg.max_evaluations = *o.evaluations;
  cfg.validate();
  return cfg;
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--model", o.model, "Class diagram (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", o.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Random seed (overrides the configuration)");
  cmd->add_option("--evaluations", o.evaluations, "Evaluation budget (overrides the configuration)");
  cmd->add_option("--out", o.out, "Output directory")->required();
  cmd->add_option("--stats-every", o.stats_every, "Write generation statistics every N generations")
      ->check(CLI::PositiveNumber);
}

class StatsWriter {
 public:
  StatsWriter(const fs::path& path, std::size_t every) : out_(path, std::ios::binary | std::ios::trunc), every_(every) {
    if (!out_) throw Error("cannot write '" + path.string() + "'");
  }
  void operator()(const Engine& e) {
    if (e.generation() % every_ == 0 || e.finished()) out_ << stats_to_json(e.stats()).dump() << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t every_;
};

int cmd_run(const RunOptions& o) {
  const auto model = std::make_shared<const AnalysisModel>(load_model(o.model));
  const EngineConfig cfg = resolve_config(o);
  const fs::path out = o.out;
  fs::create_directories(out);

  Engine engine(Problem(model, cfg.erp, cfg.bounds()), cfg);
  const GenerationStats initial = engine.stats();
  StatsWriter stats(out / "stats.jsonl", o.stats_every);
  while (!engine.finished()) {
    engine.step();
    stats(engine);
  }
  write_file(out / "archive.json", dump(archive_to_json(engine.archive(), *model)));
  OrderedJson summary = run_summary_to_json(summarize_engine(engine, initial));
  summary["generations"] = engine.generation();
  summary["config"] = config_to_json(cfg);
  write_file(out / "summary.json", dump(summary));
  std::cout << "archive: " << engine.archive().size() << " solutions, hv " << summary["hv"].get<double>()
            << ", " << engine.evaluations_used() << " evaluations -> " << out.string() << '\n';
  return kOk;
}

int cmd_scripted(const RunOptions& o) {
  const auto model = std::make_shared<const AnalysisModel>(load_model(o.model));
  const EngineConfig cfg = resolve_config(o);
  const PolicySpec policy = load_policy(o.policy);
  const fs::path out = o.out;
  fs::create_directories(out);

  EventLog log(out / "events.jsonl");
  StatsWriter stats(out / "stats.jsonl", o.stats_every);
  const ScriptedRun run = record_scripted_session(model, cfg, policy, log, o.stats_every,
                                                  [&](const Engine& e) { stats(e); });
  write_file(out / "archive.json", run.archive);
  OrderedJson summary;
  summary["seed"] = cfg.seed;
  summary["policy"] = policy_to_json(policy);
  summary["finish_reason"] = run.finish_reason;
  summary["generations"] = run.final.generation;
  summary["evaluations"] = run.final.evaluations;
  summary["archive_size"] = run.final.archive_size;
  summary["initial_population_mean"] = objectives_to_json(run.initial.population_mean_normalized);
  summary["final_population_mean"] = objectives_to_json(run.final.population_mean_normalized);
  summary["final_component_histogram"] = run.final.component_histogram;
  summary["config"] = config_to_json(cfg);
  write_file(out / "summary.json", dump(summary));
  std::cout << "archive: " << run.final.archive_size << " solutions (" << run.finish_reason << ") -> "
            << out.string() << '\n';
  return kOk;
}

int cmd_replay(const std::string& log_path, std::optional<std::uint64_t> seed, const std::string& out) {
  const auto records = read_event_file(log_path);
  const std::string archive = replay_archive(parse_session_log(records), seed);
  if (out.empty()) {
    std::cout << archive;
  } else {
    write_file(out, archive);
  }
  return kOk;
}

int cmd_experiment(const std::string& spec_path, const std::string& out) {
  ExperimentSpec spec = load_experiment(spec_path);
  if (!out.empty()) spec.output = fs::path(out);
  const ExperimentReport report = run_experiment(spec);
  const OrderedJson j = report_to_json(report);
  std::cout << "instance\talgorithm\ttau0\tarchive_size\thv\tspacing\n";
  for (const auto& c : j["configurations"]) {
    std::cout << c["instance"].get<std::string>() << '\t' << c["algorithm"].get<std::string>() << '\t'
              << (c["tau0"].is_null() ? std::string("-") : c["tau0"].dump()) << '\t'
              << c["archive_size"]["mean"].get<double>() << '\t' << c["hv"]["mean"].get<double>() << '\t'
              << c["spacing"]["mean"].get<double>() << '\n';
  }
  if (spec.output) std::cout << "report written to " << spec.output->string() << '\n';
  return kOk;
}

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const std::string& host, int port, const std::string& data_dir, std::size_t max_sessions,
              double idle_timeout, bool recover) {
  ServiceOptions opts;
  opts.data_dir = data_dir;
  opts.max_sessions = max_sessions;
  if (idle_timeout > 0) opts.idle_timeout = std::chrono::milliseconds(static_cast<long>(idle_timeout * 1000));
  fs::create_directories(opts.data_dir / "sessions");
  Service service(opts);
  if (recover) std::cout << "recovered " << service.sessions().recover() << " sessions\n";
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on http://" << host << ':' << port << std::endl;
  const bool ok = service.listen(host, port);
  g_service = nullptr;
  if (!ok) {
    std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
    return kFailure;
  }
  return kOk;
}

int cmd_generate(const GeneratorSpec& spec, const std::string& out) {
  const std::string text = serialize_model(generate_model(spec));
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  return kOk;
}

int cmd_validate(const std::string& model_path, const std::string& reference) {
  const AnalysisModel model = load_model(model_path);
  const auto counts = model.kind_counts();
  std::cout << model_path << ": " << model.class_count() << " classes, " << model.relationships().size()
            << " relationships (";
  for (std::size_t k = 0; k < kRelationKindCount; ++k) {
    std::cout << (k ? ", " : "") << to_string(static_cast<RelationKind>(k)) << ' ' << counts[k];
  }
  std::cout << "), " << candidate_interface_count(model) << " candidate interfaces\n";
  if (reference.empty()) return kOk;

  const Json j = Json::parse(read_file(reference));
  const Architecture arch = architecture_from_json(j, model);
  const auto report = check_feasibility(arch, model);
  std::cout << "reference: " << arch.size() << " components, " << (report.feasible ? "feasible" : "infeasible")
            << '\n';
  return report.feasible ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive evolutionary discovery of component architectures"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Non-interactive run; writes archive.json, stats.jsonl and summary.json");
  add_run_options(run, run_opts);

  RunOptions scripted_opts;
  auto* scripted = app.add_subcommand("scripted", "Interactive run driven by a scripted decision maker");
  add_run_options(scripted, scripted_opts);
  scripted->add_option("--policy", scripted_opts.policy, "Decision-maker policy (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string replay_log, replay_out;
  std::optional<std::uint64_t> replay_seed;
  auto* replay = app.add_subcommand("replay", "Re-run a recorded session log and print the final archive");
  replay->add_option("--log", replay_log, "Session event log (JSON lines)")->required()->check(CLI::ExistingFile);
  replay->add_option("--seed", replay_seed, "Expected seed; a mismatch is an error");
  replay->add_option("--out", replay_out, "Write the archive here instead of stdout");

  std::string spec_path, experiment_out;
  auto* experiment = app.add_subcommand("experiment", "Run a batch experiment");
  experiment->add_option("--spec", spec_path, "Experiment file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  experiment->add_option("--out", experiment_out, "Output directory (overrides the experiment file)");

  std::string host = "127.0.0.1", data_dir = "data";
  int port = 8080;
  std::size_t max_sessions = 4;
  double idle_timeout = 0.0;
  bool recover = false;
  auto* serve = app.add_subcommand("serve", "Start the HTTP session service");
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--data-dir", data_dir, "Directory for session logs and the UI bundle");
  serve->add_option("--max-sessions", max_sessions, "Concurrent session cap")->check(CLI::PositiveNumber);
  serve->add_option("--idle-timeout", idle_timeout,
                    "Seconds before an unanswered stop resumes with no preference (0 disables)");
  serve->add_flag("--recover", recover, "Rebuild sessions from logs in the data directory");

  GeneratorSpec gen;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Write a synthetic class diagram");
  generate->add_option("--classes", gen.n_classes, "Number of classes");
  generate->add_option("--as", gen.counts[0], "Associations");
  generate->add_option("--ag", gen.counts[1], "Aggregations");
  generate->add_option("--co", gen.counts[2], "Compositions");
  generate->add_option("--ge", gen.counts[3], "Generalizations");
  generate->add_option("--de", gen.counts[4], "Dependencies");
  generate->add_option("--navigable", gen.navigable_probability, "Navigability probability");
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--out", gen_out, "Output file (stdout when omitted)");

  std::string validate_model, validate_reference;
  auto* validate = app.add_subcommand("validate", "Check a class diagram (and optionally a decomposition)");
  validate->add_option("model", validate_model, "Class diagram (JSON)")->required()->check(CLI::ExistingFile);
  validate->add_option("--reference", validate_reference, "Component decomposition to check (JSON)")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*scripted) return cmd_scripted(scripted_opts);
    if (*replay) return cmd_replay(replay_log, replay_seed, replay_out);
    if (*experiment) return cmd_experiment(spec_path, experiment_out);
    if (*serve) return cmd_serve(host, port, data_dir, max_sessions, idle_timeout, recover);
    if (*generate) return cmd_generate(gen, gen_out);
    if (*validate) return cmd_validate(validate_model, validate_reference);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const ReplayError& e) {
    std::cerr << "replay error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
