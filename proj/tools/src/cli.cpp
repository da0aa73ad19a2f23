#include "driftx_cli/cli.hpp"

#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "driftx/error.hpp"
#include "driftx_cli/commands.hpp"

namespace driftx::cli {
namespace {

/// One subcommand: its parser, the flags it cannot run without, and the
/// action to run after parsing.
struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::vector<std::string> required;
  std::function<int(std::ostream&, std::ostream&)> action;
};

std::string json_to_flag_value(const nlohmann::json& value, const std::string& key) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number_integer() || value.is_number_unsigned()) return value.dump();
  if (value.is_number_float()) return fmt::format("{:.17g}", value.get<double>());
  throw UsageError(fmt::format("config key '{}' must be a string, number or boolean", key));
}

// Fills every option not given on the command line from the JSON object at
// `path`. Keys are long flag names without the leading dashes.
void merge_config(CLI::App& app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(fmt::format("config file {}: {}", path, e.what()));
  }
  if (!config.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : config.items()) {
    CLI::Option* opt = key == "config" ? nullptr : app.get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError(fmt::format("unknown config key '{}' for {}", key, app.get_name()));
    if (opt->count() > 0) continue;
    opt->add_result(json_to_flag_value(value, key));
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw UsageError(fmt::format("config key '{}': {}", key, e.what()));
    }
  }
}

void check_required(const Command& cmd) {
  for (const auto& name : cmd.required) {
    if (cmd.app->get_option(name)->count() == 0) throw UsageError("missing required flag " + name);
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Drift-field estimation with exact and Nystrom-projected kernels", "driftx"};
  app.require_subcommand(1);
  std::vector<Command> commands;
  const auto add = [&](const char* name, const char* about) -> Command& {
    Command& cmd = commands.emplace_back();
    cmd.app = app.add_subcommand(name, about);
    cmd.app->add_option("--config", cmd.config_path, "JSON file with default flag values");
    return cmd;
  };
  commands.reserve(6);

  SelectArgs select;
  {
    Command& cmd = add("select-landmarks", "Select landmarks from a dataset");
    auto* a = cmd.app;
    a->add_option("--strategy", select.strategy, "random|kmeans|kcenter|facility")->capture_default_str();
    a->add_option("--budget", select.budget, "Landmarks (per class with --scope per-class)");
    a->add_option("--scope", select.scope, "global|per-class")->capture_default_str();
    a->add_option("--seed", select.seed, "Random seed");
    a->add_option("--tau", select.tau, "Facility-location temperature")->capture_default_str();
    a->add_option("--max-iters", select.max_iters, "k-means Lloyd iterations")->capture_default_str();
    a->add_option("--input", select.input, "Dataset CSV");
    a->add_option("--output", select.output, "Landmark CSV ('-' for stdout)")->capture_default_str();
    cmd.required = {"--budget", "--seed", "--input"};
    cmd.action = [&](std::ostream& o, std::ostream& e) { return select_landmarks_command(select, o, e); };
  }

  PrecomputeArgs precompute;
  {
    Command& cmd = add("precompute", "Build and save attractive summaries");
    auto* a = cmd.app;
    a->add_option("--landmarks", precompute.landmarks, "Landmark CSV");
    a->add_option("--data", precompute.data, "Dataset CSV (positives)");
    a->add_option("--tau", precompute.tau, "Kernel temperature")->capture_default_str();
    a->add_option("--lambda", precompute.lambda, "Gram regularizer")->capture_default_str();
    a->add_option("--epsilon", precompute.epsilon, "Denominator offset")->capture_default_str();
    a->add_flag("--shard-by-class", precompute.shard_by_class, "One shard per class");
    a->add_option("--output", precompute.output, "Summary bank file");
    cmd.required = {"--landmarks", "--data", "--output"};
    cmd.action = [&](std::ostream& o, std::ostream& e) { return precompute_command(precompute, o, e); };
  }

  TrainArgs train;
  {
    Command& cmd = add("train", "Train particles or an MLP generator on a toy distribution");
    auto* a = cmd.app;
    a->add_option("--dist", train.dist, "swissroll|checkerboard|gmm")->capture_default_str();
    a->add_option("--mode", train.mode, "particle|mlp")->capture_default_str();
    a->add_option("--attraction", train.attraction, "exact|projected")->capture_default_str();
    a->add_option("--repulsion", train.repulsion, "exact|projected")->capture_default_str();
    a->add_option("--bank", train.bank, "Summary bank (built from random landmarks when omitted)");
    a->add_option("--steps", train.steps, "Training steps")->capture_default_str();
    a->add_option("--batch", train.batch, "Generator batch size")->capture_default_str();
    a->add_option("--seed", train.seed, "Random seed");
    a->add_option("--out", train.out, "Run directory");
    a->add_option("--tau", train.tau, "Kernel temperature")->capture_default_str();
    a->add_option("--lambda", train.lambda, "Gram regularizer for an on-the-fly bank")->capture_default_str();
    a->add_option("--landmarks", train.landmarks, "Random landmarks for an on-the-fly bank")->capture_default_str();
    a->add_option("--n-data", train.n_data, "Training samples drawn from the distribution")->capture_default_str();
    a->add_option("--positive-batch", train.positive_batch, "Positives per step for exact attraction")
        ->capture_default_str();
    a->add_option("--eval-every", train.eval_every, "Evaluation and snapshot cadence (mlp)")->capture_default_str();
    a->add_option("--eval-samples", train.eval_samples, "Samples per side for energy distance")
        ->capture_default_str();
    a->add_option("--lr", train.lr, "Adam learning rate")->capture_default_str();
    a->add_option("--particles", train.particles, "Particle count (particle mode)")->capture_default_str();
    a->add_option("--init-std", train.init_std, "Initial particle spread")->capture_default_str();
    a->add_option("--step-size", train.step_size, "Particle update scale in (0, 1]")->capture_default_str();
    a->add_option("--snapshot-every", train.snapshot_every, "Snapshot cadence (particle mode)")
        ->capture_default_str();
    a->add_flag("--svg", train.svg, "Also write SVG scatter plots");
    cmd.required = {"--seed", "--out"};
    cmd.action = [&](std::ostream& o, std::ostream& e) { return train_command(train, o, e); };
  }

  FidelityArgs fidelity;
  double fidelity_tau = 0.0;
  {
    Command& cmd = add("fidelity", "Compare projected and exact attractive fields");
    auto* a = cmd.app;
    a->add_option("--data", fidelity.data, "Dataset CSV (positives the bank was built from)");
    a->add_option("--bank", fidelity.bank, "Summary bank file");
    a->add_option("--queries", fidelity.queries, "Query CSV");
    a->add_option("--tau", fidelity_tau, "Kernel temperature (defaults to the bank's)");
    a->add_option("--report", fidelity.report, "Report JSON ('-' for stdout)")->capture_default_str();
    cmd.required = {"--data", "--bank", "--queries"};
    cmd.action = [&](std::ostream& o, std::ostream& e) {
      if (cmd.app->get_option("--tau")->count() > 0) fidelity.tau = fidelity_tau;
      return fidelity_command(fidelity, o, e);
    };
  }

  ComposeCheckArgs compose;
  {
    Command& cmd = add("compose-check", "Check sharded against concatenated summaries");
    auto* a = cmd.app;
    a->add_option("--data", compose.data, "Dataset CSV");
    a->add_option("--shards", compose.shards, "Shard count")->capture_default_str();
    a->add_option("--budget", compose.budget, "Random landmarks per shard")->capture_default_str();
    a->add_option("--seed", compose.seed, "Random seed");
    a->add_option("--tau", compose.tau, "Kernel temperature")->capture_default_str();
    a->add_option("--lambda", compose.lambda, "Gram regularizer")->capture_default_str();
    a->add_option("--queries", compose.queries, "Query count")->capture_default_str();
    cmd.required = {"--data", "--seed"};
    cmd.action = [&](std::ostream& o, std::ostream& e) { return compose_check_command(compose, o, e); };
  }

  BenchArgs bench;
  {
    Command& cmd = add("bench", "Time field estimators against the cost model");
    auto* a = cmd.app;
    a->add_option("--sweep", bench.sweep, "key=v1,v2,... with key in npos|b|r|d")->capture_default_str();
    a->add_option("--b", bench.b, "Batch size B")->capture_default_str();
    a->add_option("--r", bench.r, "Total landmark count r")->capture_default_str();
    a->add_option("--d", bench.d, "Dimension D")->capture_default_str();
    a->add_option("--n-plus", bench.n_plus, "N+ when not swept")->capture_default_str();
    a->add_option("--n-minus", bench.n_minus, "N- (0 means B, self-masked)")->capture_default_str();
    a->add_option("--shards", bench.shards, "Shards in sharded mode")->capture_default_str();
    a->add_option("--mode", bench.mode, "exact|projected|sharded|both|all")->capture_default_str();
    a->add_option("--repeats", bench.repeats, "Timed repeats")->capture_default_str();
    a->add_option("--warmups", bench.warmups, "Untimed warmups")->capture_default_str();
    a->add_option("--seed", bench.seed, "Data seed")->capture_default_str();
    a->add_option("--tau", bench.tau, "Kernel temperature")->capture_default_str();
    a->add_flag("--multithreaded", bench.multithreaded, "Time with all worker threads");
    a->add_option("--out", bench.out, "CSV output ('-' for stdout)")->capture_default_str();
    cmd.action = [&](std::ostream& o, std::ostream& e) { return bench_command(bench, o, e); };
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << '\n' << app.help();
    return kExitValidation;
  }

  for (Command& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      if (!cmd.config_path.empty()) merge_config(*cmd.app, cmd.config_path);
      check_required(cmd);
      return cmd.action(out, err);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n\n" << cmd.app->help();
      return kExitValidation;
    } catch (const Error& e) {
      err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
      return kExitRuntime;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }
  return kExitValidation;
}

}  // namespace driftx::cli
