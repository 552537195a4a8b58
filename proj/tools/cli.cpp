#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "experiment_config.hpp"
#include "shbuf/analysis.hpp"
#include "shbuf/learner.hpp"
#include "shbuf/random.hpp"
#include "shbuf/svg_chart.hpp"
#include "shbuf/trace_io.hpp"

namespace shbuf::cli {
namespace {

// Files are staged here and written only once the command has succeeded.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string contents) {
    files_[(std::filesystem::path(dir_) / name).string()] = std::move(contents);
  }
  void add_path(const std::string& path, std::string contents) {
    files_[path] = std::move(contents);
  }
  void commit() const {
    for (const auto& [path, contents] : files_) write_file(path, contents);
  }

 private:
  std::string dir_;
  std::map<std::string, std::string> files_;
};

std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string inv_eta_cell(double eta) {
  if (eta == kInfinity) return format_double(0.0);
  return format_double(1.0 / eta);
}

ArrivalSequence load_sequence(const ExperimentConfig& cfg) {
  if (!cfg.trace.empty()) {
    std::istringstream in(read_file(cfg.trace));
    ArrivalSequence seq = read_trace(in);
    seq.validate(cfg.switch_config);
    return seq;
  }
  WorkloadSpec spec = cfg.workload;
  spec.seed = cfg.seed;
  return generate(cfg.switch_config, spec);
}

ForestModel load_model(const std::string& path) {
  if (path.empty()) throw ValidationError("a forest model is required (--model)");
  try {
    return ForestModel::from_json(read_file(path));
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError("cannot load model " + path + ": " + e.what());
  }
}

std::shared_ptr<const Oracle> make_oracle(const ExperimentConfig& cfg,
                                          const ArrivalSequence& seq) {
  if (cfg.oracle == "constant_drop") {
    return std::make_shared<ConstantOracle>(PredictionLabel::Positive);
  }
  if (cfg.oracle == "constant_accept") {
    return std::make_shared<ConstantOracle>(PredictionLabel::Negative);
  }
  if (cfg.oracle == "forest") return std::make_shared<ForestOracle>(load_model(cfg.model));
  auto perfect = std::make_shared<PerfectOracle>(lqd_ground_truth(cfg.switch_config, seq));
  if (cfg.oracle == "flip") {
    return std::make_shared<FlipOracle>(perfect, cfg.flip_p, derive_seed(cfg.seed, 0xf1f));
  }
  return perfect;
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg, const ArrivalSequence& seq) {
  if (cfg.policy == "cs") return std::make_unique<CompleteSharing>();
  if (cfg.policy == "dt") return std::make_unique<DynamicThresholds>(cfg.dt_alpha);
  if (cfg.policy == "followlqd") return std::make_unique<FollowLqd>();
  if (cfg.policy == "credence") {
    Decision fallback = cfg.fallback == "drop" ? Decision::drop() : Decision::accept();
    return std::make_unique<Credence>(make_oracle(cfg, seq), fallback);
  }
  return std::make_unique<LongestQueueDrop>();
}

std::string examples_csv(const std::vector<LabeledExample>& ex) {
  std::ostringstream s;
  write_examples(s, ex);
  return s.str();
}

std::vector<LabeledExample> load_examples(const ExperimentConfig& cfg,
                                          const std::string& examples_path) {
  if (!examples_path.empty()) {
    std::istringstream in(read_file(examples_path));
    return read_examples(in);
  }
  return collect_trace(cfg.switch_config, load_sequence(cfg), cfg.ewma_window);
}

const char* kMetricsHeader = "accuracy,precision,recall,f1";

std::string metrics_cells(const EvaluationReport& r) {
  return opt_cell(r.metrics.accuracy) + "," + opt_cell(r.metrics.precision) + "," +
         opt_cell(r.metrics.recall) + "," + opt_cell(r.metrics.f1);
}

std::string confusion_cells(const ConfusionCounts& c) {
  return std::to_string(c.tp) + "," + std::to_string(c.fp) + "," + std::to_string(c.tn) +
         "," + std::to_string(c.fn);
}

struct Command {
  std::string examples_in;
  std::string examples_out;
  std::string tree_sweep;
  bool chart = false;
  std::size_t cap = kBruteForceCap;
};

int cmd_gen(const ExperimentConfig& cfg, Outputs& files, std::ostream& out) {
  ArrivalSequence seq = load_sequence(cfg);
  WorkloadSpec spec = cfg.workload;
  spec.seed = cfg.seed;
  std::ostringstream s;
  write_trace(s, seq, cfg.trace.empty() ? spec.canonical() : "from " + cfg.trace);
  files.add("trace.csv", s.str());
  out << "slots=" << seq.slots.size() << " packets=" << seq.packet_count() << "\n";
  return kExitOk;
}

int cmd_simulate(const ExperimentConfig& cfg, const Command& cmd, Outputs& files,
                 std::ostream& out) {
  ArrivalSequence seq = load_sequence(cfg);
  auto policy = make_policy(cfg, seq);
  SimOptions opts;
  opts.ewma_window = cfg.ewma_window;
  RunResult r = run_simulation(cfg.switch_config, seq, *policy, opts);

  std::ostringstream outcomes;
  write_outcomes(outcomes, r);
  files.add("outcomes.csv", outcomes.str());
  std::string summary = "policy=" + std::string(policy->name()) +
                        " transmitted=" + std::to_string(r.transmitted) +
                        " dropped=" + std::to_string(r.dropped) +
                        " peak_occupancy=" + std::to_string(r.peak_occupancy) + "\n";
  files.add("summary.txt", summary);
  if (!cmd.examples_out.empty()) {
    files.add_path(cmd.examples_out,
                   examples_csv(collect_trace(cfg.switch_config, seq, cfg.ewma_window)));
  }
  out << summary;
  return kExitOk;
}

int cmd_train(const ExperimentConfig& cfg, const Command& cmd, Outputs& files,
              std::ostream& out) {
  if (!(cfg.split > 0.0)) throw ValidationError("learner.split must be > 0 for training");
  std::vector<std::uint32_t> sweep;
  if (!cmd.tree_sweep.empty()) {
    sweep = parse_uint_list(cmd.tree_sweep);
    for (auto t : sweep) {
      if (t < 1 || t > ForestModel::kMaxTrees) {
        throw ValidationError("tree counts must be in 1..16");
      }
    }
  }
  auto examples = load_examples(cfg, cmd.examples_in);
  Split split = split_examples(examples, cfg.split, cfg.seed);
  if (split.train.empty()) throw ValidationError("no training examples");

  auto train_and_score = [&](std::uint32_t trees) {
    ForestModel m = train_forest(split.train, {trees, cfg.max_depth, cfg.seed});
    EvaluationReport r = evaluate_on(m, split.test);
    return std::pair{std::move(m), r};
  };

  auto [model, report] = train_and_score(cfg.trees);
  files.add("model.json", model.to_json());
  std::string header = std::string("trees,") + kMetricsHeader + ",tp,fp,tn,fn\n";
  auto row = [&](std::uint32_t trees, const EvaluationReport& r) {
    return std::to_string(trees) + "," + metrics_cells(r) + "," + confusion_cells(r.confusion) +
           "\n";
  };
  files.add("train_metrics.csv", header + row(cfg.trees, report));

  if (!sweep.empty()) {
    std::string table = header;
    for (auto t : sweep) table += row(t, train_and_score(t).second);
    files.add("tree_sweep.csv", table);
  }
  out << "trained trees=" << cfg.trees << " depth=" << cfg.max_depth
      << " train=" << split.train.size() << " test=" << split.test.size()
      << " f1=" << opt_cell(report.metrics.f1) << "\n";
  return kExitOk;
}

int cmd_evaluate(const ExperimentConfig& cfg, const Command& cmd, Outputs& files,
                 std::ostream& out) {
  ForestModel model = load_model(cfg.model);

  std::optional<ArrivalSequence> seq;
  std::vector<LabeledExample> examples;
  if (cmd.examples_in.empty()) {
    seq = load_sequence(cfg);
    examples = collect_trace(cfg.switch_config, *seq, cfg.ewma_window);
  } else {
    std::istringstream in(read_file(cmd.examples_in));
    examples = read_examples(in);
  }
  EvaluationReport report = cfg.split > 0.0 ? evaluate(model, examples, cfg.split, cfg.seed)
                                             : evaluate_on(model, examples);

  std::string inv_eta;
  if (seq) {
    ForestOracle oracle(model);
    ErrorReport er = compute_eta(cfg.switch_config, *seq,
                                 record_predictions(oracle, cfg.switch_config, *seq,
                                                    cfg.ewma_window),
                                 lqd_ground_truth(cfg.switch_config, *seq));
    inv_eta = inv_eta_cell(er.eta);
    files.add("error_report.csv",
              "eta,eta_bound,tp,fp,tn,fn,lqd_tx,flqd_reduced_tx\n" + format_double(er.eta) +
                  "," + format_double(er.eta_upper_bound) + "," +
                  confusion_cells(er.confusion) + "," + std::to_string(er.lqd_throughput) +
                  "," + std::to_string(er.followlqd_reduced_throughput) + "\n");
  }
  files.add("metrics.csv", std::string(kMetricsHeader) + ",inv_eta,tp,fp,tn,fn\n" +
                               metrics_cells(report) + "," + inv_eta + "," +
                               confusion_cells(report.confusion) + "\n");
  out << "accuracy=" << opt_cell(report.metrics.accuracy)
      << " f1=" << opt_cell(report.metrics.f1) << " inv_eta=" << inv_eta << "\n";
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& cfg, const Command& cmd, Outputs& files,
              std::ostream& out) {
  SweepParams params;
  params.config = cfg.switch_config;
  params.rate = cfg.workload.rate;
  params.horizon = cfg.workload.horizon;
  params.base_seed = cfg.seed;
  params.seed_count = cfg.sweep_seeds;
  params.p_values = cfg.p_values;
  params.dt_alpha = cfg.dt_alpha;
  auto rows = competitive_sweep(params);

  std::string csv = "p,lqd_throughput,credence_throughput,dt_throughput,ratio_credence,ratio_dt,seed\n";
  ChartSeries credence{"Credence", {}}, dt{"DT", {}};
  for (const auto& r : rows) {
    csv += format_double(r.p) + "," + std::to_string(r.lqd_throughput) + "," +
           std::to_string(r.credence_throughput) + "," + std::to_string(r.dt_throughput) + "," +
           format_double(r.ratio_credence) + "," + format_double(r.ratio_dt) + "," +
           std::to_string(r.seed) + "\n";
    credence.points.emplace_back(r.p, r.ratio_credence);
    dt.points.emplace_back(r.p, r.ratio_dt);
  }
  files.add("sweep.csv", csv);
  if (cmd.chart) {
    files.add("sweep.svg", line_chart_svg("LQD/ALG under flipped predictions",
                                          "false-prediction probability", "LQD/ALG",
                                          {credence, dt}));
  }
  out << csv;
  return kExitOk;
}

int cmd_opt(const ExperimentConfig& cfg, const Command& cmd, Outputs& files,
            std::ostream& out) {
  ArrivalSequence seq = load_sequence(cfg);
  const auto opt = brute_force_opt(cfg.switch_config, seq, cmd.cap);

  std::string csv = "algorithm,throughput,opt_ratio\n";
  csv += "opt," + std::to_string(opt) + ",1\n";
  for (const char* name : {"lqd", "cs", "dt", "followlqd", "credence"}) {
    ExperimentConfig c = cfg;
    c.policy = name;
    auto policy = make_policy(c, seq);
    auto tx = run_simulation(cfg.switch_config, seq, *policy).transmitted;
    csv += std::string(name) + "," + std::to_string(tx) + "," +
           format_double(CompetitiveEstimate{opt, tx}.ratio()) + "\n";
  }
  files.add("opt.csv", csv);
  out << "opt=" << opt << "\n";
  return kExitOk;
}

struct Flag {
  CLI::Option* option;
  std::string key;
  std::string value;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shared-buffer switch simulator: policies, drop predictors and competitive-ratio experiments."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path;
  std::vector<std::string> assignments;
  Command cmd;
  std::vector<std::unique_ptr<Flag>> flags;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "INI config file");
    sub->add_option("--set", assignments, "Override a config key: section.key=value");
    auto flag = [&flags, sub](const std::string& name, const std::string& key,
                               const std::string& help) {
      auto f = std::make_unique<Flag>();
      f->key = key;
      f->option = sub->add_option(name, f->value, help + " [" + key + "]");
      flags.push_back(std::move(f));
    };
    flag("--num-ports", "switch.num_ports", "Number of ports N");
    flag("--buffer-size", "switch.buffer_size", "Shared buffer size B");
    flag("--workload", "workload.kind",
         "single_burst, multi_burst_then_shorts, followlqd_adversary, poisson_bursts or uniform_random");
    flag("--burst", "workload.burst_size", "single_burst size (0 = B)");
    flag("--short-burst", "workload.short_burst", "multi_burst_then_shorts short burst (0 = B/8)");
    flag("--cycles", "workload.cycles", "followlqd_adversary cycles");
    flag("--rate", "workload.rate", "poisson_bursts burst starts per slot");
    flag("--load", "workload.load", "uniform_random arrival probability");
    flag("--horizon", "workload.horizon", "Slots to generate");
    flag("--trace", "workload.trace", "Arrival trace file used instead of the workload");
    flag("--ewma-window", "policy.ewma_window", "EWMA window of the predictor features");
    flag("--seed", "run.seed", "Seed (falls back to $SHBUF_SEED, then 1)");
    flag("-o,--out", "output.dir", "Output directory");
    return flag;
  };

  auto* gen = app.add_subcommand("gen", "Write a workload as an arrival trace");
  common(gen);

  auto* simulate = app.add_subcommand("simulate", "Run one policy over a trace");
  {
    auto flag = common(simulate);
    flag("--policy", "policy.name", "cs, dt, lqd, followlqd or credence");
    flag("--dt-alpha", "policy.dt_alpha", "DT alpha as p/q");
    flag("--oracle", "oracle.kind", "perfect, constant_drop, constant_accept, flip or forest");
    flag("--flip-p", "oracle.flip_p", "Flip probability for the flip oracle");
    flag("--model", "oracle.model", "Forest model file for the forest oracle");
    flag("--fallback", "oracle.fallback", "Decision when the oracle fails: accept or drop");
    simulate->add_option("--examples-out", cmd.examples_out,
                         "Also write LQD-labeled training examples to this file");
  }

  auto* train = app.add_subcommand("train", "Train a drop-prediction forest");
  {
    auto flag = common(train);
    flag("--trees", "learner.trees", "Number of trees (1..16)");
    flag("--depth", "learner.max_depth", "Maximum tree depth");
    flag("--split", "learner.split", "Training fraction");
    train->add_option("--examples", cmd.examples_in, "Labeled examples CSV instead of a trace");
    train->add_option("--sweep-trees", cmd.tree_sweep,
                      "Comma-separated tree counts; writes tree_sweep.csv");
  }

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a trained forest");
  {
    auto flag = common(evaluate_cmd);
    flag("--model", "oracle.model", "Forest model file");
    flag("--split", "learner.split", "Score only the held-out part of this split (0 = all)");
    evaluate_cmd->add_option("--examples", cmd.examples_in,
                             "Labeled examples CSV instead of a trace (no inv_eta)");
  }

  auto* sweep = app.add_subcommand("sweep", "Flip-probability sweep of Credence against DT");
  {
    auto flag = common(sweep);
    flag("--p", "sweep.p_values", "Comma-separated flip probabilities");
    flag("--seeds", "sweep.seeds", "Sequences per p");
    flag("--dt-alpha", "policy.dt_alpha", "DT alpha as p/q");
    sweep->add_flag("--chart", cmd.chart, "Also write sweep.svg");
  }

  auto* opt = app.add_subcommand("opt", "Brute-force offline optimum of a small trace");
  {
    auto flag = common(opt);
    flag("--oracle", "oracle.kind", "Oracle for the Credence row");
    flag("--flip-p", "oracle.flip_p", "Flip probability for the flip oracle");
    opt->add_option("--cap", cmd.cap, "Largest instance, in packets, to search");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  ExperimentConfig cfg;
  try {
    std::vector<std::string> seen;
    if (!config_path.empty()) cfg = load_config(config_path, &seen);
    for (const auto& a : assignments) {
      cfg.set_assignment(a);
      seen.push_back(a.substr(0, a.find('=')));
    }
    for (const auto& f : flags) {
      if (f->option->count() == 0) continue;
      auto dot = f->key.find('.');
      cfg.set(f->key.substr(0, dot), f->key.substr(dot + 1), f->value);
      seen.push_back(f->key);
    }
    bool seed_given = std::find(seen.begin(), seen.end(), "run.seed") != seen.end();
    if (!seed_given) {
      if (const char* env = std::getenv("SHBUF_SEED"); env && *env) cfg.set("run", "seed", env);
    }
    cfg.validate();
    if (cfg.policy == "credence" && cfg.oracle == "forest" && cfg.model.empty()) {
      throw ValidationError("the forest oracle needs --model");
    }
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  Outputs files(cfg.out_dir);
  files.add(sub->get_name() + ".effective.ini", cfg.to_ini());
  try {
    int rc = kExitOk;
    const std::string name = sub->get_name();
    if (name == "gen") rc = cmd_gen(cfg, files, out);
    else if (name == "simulate") rc = cmd_simulate(cfg, cmd, files, out);
    else if (name == "train") rc = cmd_train(cfg, cmd, files, out);
    else if (name == "evaluate") rc = cmd_evaluate(cfg, cmd, files, out);
    else if (name == "sweep") rc = cmd_sweep(cfg, cmd, files, out);
    else if (name == "opt") rc = cmd_opt(cfg, cmd, files, out);
    if (rc == kExitOk) files.commit();
    return rc;
  } catch (const OptRefused& e) {
    err << "refused: " << e.what() << "\n";
    return kExitRefused;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace shbuf::cli
