#include "driftx_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "driftx/cost_model.hpp"
#include "driftx/dataset_io.hpp"
#include "driftx/energy.hpp"
#include "driftx/error.hpp"
#include "driftx/fidelity.hpp"
#include "driftx/field.hpp"
#include "driftx/landmarks.hpp"
#include "driftx/mlp.hpp"
#include "driftx/nystrom.hpp"
#include "driftx/particle.hpp"
#include "driftx/random.hpp"
#include "driftx/summary_io.hpp"
#include "driftx/svg.hpp"
#include "driftx/toy.hpp"
#include "driftx/trainer.hpp"

namespace driftx::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char* kDataColor = "#9e9e9e";
constexpr const char* kGeneratedColor = "#d62728";

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void require_positive(long value, const char* flag) {
  require(value >= 1, fmt::format("--{} must be >= 1", flag));
}

void require_positive(double value, const char* flag) {
  require(std::isfinite(value) && value > 0.0, fmt::format("--{} must be a positive number", flag));
}

template <typename Parse>
auto parse_choice(Parse parse, const std::string& value, const char* flag) {
  try {
    return parse(value);
  } catch (const Error&) {
    throw UsageError(fmt::format("--{}: unsupported value '{}'", flag, value));
  }
}

/// Opens `path` for writing, or returns `fallback` for "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
      return;
    }
    file_.open(path, std::ios::binary);
    if (!file_) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) {
  return Rng(Seed{seed}).fork(stream).next_u64();
}

Matrix first_rows(const Matrix& m, Index n) { return m.topRows(std::min(n, m.rows())); }

void write_snapshot(const fs::path& dir, Index step, const Matrix& points, const Matrix& data, bool svg) {
  std::ofstream csv(dir / fmt::format("step_{}.csv", step), std::ios::binary);
  if (!csv) throw Error(ErrorCode::Io, "cannot write snapshot for step " + std::to_string(step));
  write_points_csv(csv, points);
  if (svg) {
    emit_svg_scatter(dir / fmt::format("step_{}.svg", step),
                     {{data, kDataColor}, {points, kGeneratedColor}});
  }
}

std::string optional_real(std::optional<double> v) { return v ? format_real(*v) : std::string(); }

std::vector<ShardedSummaryBank> train_banks(const TrainArgs& args, const FeatureSet& data, bool needed) {
  std::vector<ShardedSummaryBank> banks;
  if (!needed) return banks;
  if (!args.bank.empty()) {
    banks.push_back(load_summary_bank(args.bank));
    for (const auto& shard : banks.front().shards()) {
      if (shard.basis.tau() != args.tau) {
        throw Error(ErrorCode::BasisMismatch,
                    fmt::format("bank was built at tau={} but --tau is {}", shard.basis.tau(), args.tau));
      }
    }
    if (banks.front().dim() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "bank vs data dimension");
    return banks;
  }
  const LandmarkSet landmarks =
      select_random(data, args.landmarks, SelectionScope::Global, Seed{derived_seed(args.seed, 3)});
  banks.push_back(build_bank(landmarks, data, args.tau, args.lambda, false));
  return banks;
}

int run_particles(const TrainArgs& args, const FeatureSet& data, const DriftFieldConfig& config,
                  std::span<const ShardedSummaryBank> banks, const fs::path& snapshots, const Matrix& eval_data,
                  std::ostream& err) {
  Rng init_rng(Seed{derived_seed(args.seed, 4)});
  const FeatureSet init(init_rng.normal_matrix(args.particles, data.dim(), args.init_std));
  ParticleOptions options;
  options.steps = args.steps;
  options.step_size = args.step_size;
  options.snapshot_every = args.snapshot_every;
  const ParticleTrajectory run = particle_drift_run(init, data, config, banks, options);

  std::map<Index, double> energy;
  for (std::size_t k = 0; k < run.steps.size(); ++k) {
    energy[run.steps[k]] = energy_distance(run.snapshots[k], eval_data);
    write_snapshot(snapshots, run.steps[k], run.snapshots[k], eval_data, args.svg);
  }
  std::ofstream loss(fs::path(args.out) / "loss.csv", std::ios::binary);
  if (!loss) throw Error(ErrorCode::Io, "cannot write loss.csv");
  loss << "step,loss,energy_distance\n";
  loss << "0,," << format_real(energy.at(0)) << '\n';
  for (std::size_t s = 0; s < run.mean_sq_drift.size(); ++s) {
    const auto step = static_cast<Index>(s) + 1;
    const auto it = energy.find(step);
    loss << step << ',' << format_real(run.mean_sq_drift[s]) << ','
         << optional_real(it == energy.end() ? std::nullopt : std::optional<double>(it->second)) << '\n';
  }
  err << fmt::format("particles: energy distance {:.6g} -> {:.6g}\n", energy.at(0), energy.rbegin()->second);
  return 0;
}

int run_mlp(const TrainArgs& args, const FeatureSet& data, const DriftFieldConfig& config,
            std::span<const ShardedSummaryBank> banks, const fs::path& snapshots, const Matrix& svg_data,
            std::ostream& err) {
  Rng init_rng(Seed{derived_seed(args.seed, 5)});
  MlpGenerator generator = MlpGenerator::init(2, data.dim(), init_rng);
  TrainOptions options;
  options.steps = args.steps;
  options.batch_size = args.batch;
  options.positive_batch = args.positive_batch;
  options.eval_every = args.eval_every;
  options.eval_samples = args.eval_samples;
  options.seed = Seed{derived_seed(args.seed, 6)};
  options.adam.learning_rate = args.lr;
  options.on_eval = [&](Index step, const Matrix& samples) {
    write_snapshot(snapshots, step, samples, svg_data, args.svg);
  };
  const TrainResult result = train_generator(std::move(generator), data, config, banks, options);

  std::ofstream loss(fs::path(args.out) / "loss.csv", std::ios::binary);
  if (!loss) throw Error(ErrorCode::Io, "cannot write loss.csv");
  loss << "step,loss,energy_distance\n";
  for (std::size_t s = 0; s < result.loss.size(); ++s) {
    const auto step = static_cast<Index>(s) + 1;
    loss << step << ',' << format_real(result.loss[s]) << ',' << optional_real(result.energy_at(step)) << '\n';
  }
  err << fmt::format("mlp: final energy distance {:.6g}\n", result.evals.back().energy_distance);
  return 0;
}

std::vector<Index> split_rank(Index r, Index shards) {
  std::vector<Index> sizes(static_cast<std::size_t>(shards), r / shards);
  for (Index s = 0; s < r % shards; ++s) ++sizes[static_cast<std::size_t>(s)];
  return sizes;
}

}  // namespace

int select_landmarks_command(const SelectArgs& args, std::ostream& out, std::ostream& err) {
  const auto strategy = parse_choice(parse_strategy, args.strategy, "strategy");
  const auto scope = parse_choice(parse_scope, args.scope, "scope");
  require_positive(args.budget, "budget");
  require_positive(args.tau, "tau");
  require(args.max_iters >= 1, "--max-iters must be >= 1");

  const FeatureSet data = read_dataset_csv(args.input);
  LandmarkOptions options;
  options.seed = Seed{args.seed};
  options.kmeans_max_iters = args.max_iters;
  options.facility_tau = args.tau;
  const LandmarkSet landmarks = select_landmarks(strategy, data, args.budget, scope, options);
  Sink sink(args.output, out);
  write_landmarks_csv(sink.get(), landmarks);
  err << fmt::format("selected {} landmarks ({}, {})\n", landmarks.size(), args.strategy, args.scope);
  return 0;
}

int precompute_command(const PrecomputeArgs& args, std::ostream&, std::ostream& err) {
  require_positive(args.tau, "tau");
  require(std::isfinite(args.lambda) && args.lambda >= 0.0, "--lambda must be >= 0");
  require_positive(args.epsilon, "epsilon");

  const FeatureSet data = read_dataset_csv(args.data);
  const LandmarkSet landmarks = read_landmarks_csv(args.landmarks);
  landmarks.check_against(data);
  const ShardedSummaryBank bank = build_bank(landmarks, data, args.tau, args.lambda, args.shard_by_class, args.epsilon);
  save_summary_bank(bank, args.output);
  err << fmt::format("wrote {} shard(s), total rank {}\n", bank.size(), bank.total_rank());
  return 0;
}

int train_command(const TrainArgs& args, std::ostream&, std::ostream& err) {
  ToyDistribution dist;
  dist.kind = parse_choice(parse_toy_kind, args.dist, "dist");
  require(args.mode == "particle" || args.mode == "mlp", "--mode must be particle or mlp");
  DriftFieldConfig config;
  config.kernel.temperatures = {args.tau};
  config.attraction = parse_choice(parse_estimator, args.attraction, "attraction");
  config.repulsion = parse_choice(parse_estimator, args.repulsion, "repulsion");
  require_positive(args.steps, "steps");
  require(args.batch >= 2, "--batch must be >= 2");
  require_positive(args.tau, "tau");
  require(std::isfinite(args.lambda) && args.lambda >= 0.0, "--lambda must be >= 0");
  require_positive(args.landmarks, "landmarks");
  require_positive(args.n_data, "n-data");
  require_positive(args.positive_batch, "positive-batch");
  require(args.eval_every >= 0, "--eval-every must be >= 0");
  require_positive(args.eval_samples, "eval-samples");
  require_positive(args.lr, "lr");
  require(args.particles >= 2, "--particles must be >= 2");
  require_positive(args.init_std, "init-std");
  require(args.step_size > 0.0 && args.step_size <= 1.0, "--step-size must lie in (0, 1]");
  require(args.snapshot_every >= 0, "--snapshot-every must be >= 0");
  require(!args.out.empty(), "--out is required");

  const FeatureSet data = sample_toy(dist, args.n_data, Seed{derived_seed(args.seed, 1)});
  const bool projected = config.attraction == Estimator::Projected || config.repulsion == Estimator::Projected;
  const auto banks = train_banks(args, data, projected);
  const fs::path snapshots = fs::path(args.out) / "snapshots";
  fs::create_directories(snapshots);

  Rng eval_rng(Seed{derived_seed(args.seed, 2)});
  const Matrix eval_data = data.subset(eval_rng.sample_without_replacement(
                                           data.size(), std::min<Index>(args.eval_samples, data.size())))
                               .points();
  if (args.mode == "particle") return run_particles(args, data, config, banks, snapshots, eval_data, err);
  return run_mlp(args, data, config, banks, snapshots, first_rows(eval_data, 2000), err);
}

int fidelity_command(const FidelityArgs& args, std::ostream& out, std::ostream& err) {
  if (args.tau) require_positive(*args.tau, "tau");
  const FeatureSet data = read_dataset_csv(args.data);
  const FeatureSet queries = read_dataset_csv(args.queries);
  const ShardedSummaryBank bank = load_summary_bank(args.bank);
  const double tau = args.tau.value_or(bank.shards().front().basis.tau());
  for (const auto& shard : bank.shards()) {
    if (shard.basis.tau() != tau) {
      throw Error(ErrorCode::BasisMismatch, fmt::format("bank shard built at tau={}, expected {}", shard.basis.tau(), tau));
    }
  }
  const FidelityReport report = fidelity_report(queries, data, bank, tau);

  Json json;
  json["tau"] = tau;
  json["queries"] = queries.size();
  json["positives"] = data.size();
  json["cosine_similarity"] = report.cosine_similarity;
  json["relative_l2_error"] = report.relative_l2_error;
  json["target_mse"] = report.target_mse;
  json["bound"] = {{"premise_holds", report.premise_holds},
                   {"satisfied", report.bound_satisfied},
                   {"violated", report.bound_violated}};
  Json per_query = Json::array();
  for (const auto& d : report.per_query) {
    per_query.push_back({{"residual_norm", d.residual_norm},
                         {"kernel_mass", d.kernel_mass},
                         {"condition_holds", d.condition_holds},
                         {"bound_value", d.bound_value},
                         {"actual_error", d.actual_error},
                         {"data_radius", d.data_radius}});
  }
  json["per_query"] = std::move(per_query);
  Sink sink(args.report, out);
  sink.get() << json.dump(2) << '\n';
  err << fmt::format("cosine {:.6f}, relative l2 {:.3e}, bound violations {}\n", report.cosine_similarity,
                     report.relative_l2_error, report.bound_violated);
  return 0;
}

int compose_check_command(const ComposeCheckArgs& args, std::ostream& out, std::ostream& err) {
  require_positive(args.shards, "shards");
  require_positive(args.budget, "budget");
  require_positive(args.tau, "tau");
  require(std::isfinite(args.lambda) && args.lambda >= 0.0, "--lambda must be >= 0");
  require_positive(args.queries, "queries");

  const FeatureSet data = read_dataset_csv(args.data);
  std::vector<int> shard_of(static_cast<std::size_t>(data.size()));
  for (Index i = 0; i < data.size(); ++i) {
    const long key = data.has_labels() ? data.label(i) : static_cast<long>(i);
    shard_of[static_cast<std::size_t>(i)] = static_cast<int>(key % args.shards);
  }
  const FeatureSet sharded(data.points(), shard_of, static_cast<int>(args.shards));
  const LandmarkSet landmarks =
      select_random(sharded, args.budget, SelectionScope::PerClass, Seed{derived_seed(args.seed, 1)});
  const ShardedSummaryBank bank = build_bank(landmarks, sharded, args.tau, args.lambda, true);

  Rng query_rng(Seed{derived_seed(args.seed, 2)});
  const auto rows = query_rng.sample_without_replacement(data.size(), std::min<Index>(args.queries, data.size()));
  Matrix queries = data.subset(rows).points();
  queries += query_rng.normal_matrix(queries.rows(), queries.cols(), 0.1 * args.tau);

  const Matrix composed = projected_mean(compose_shards_batch(bank, queries), bank.epsilon());
  const Matrix concatenated = concatenated_projected_mean(bank, queries);
  double deviation = 0.0;
  for (Index b = 0; b < queries.rows(); ++b) {
    const double scale = std::max(concatenated.row(b).norm(), 1e-300);
    deviation = std::max(deviation, (composed.row(b) - concatenated.row(b)).norm() / scale);
  }
  out << format_real(deviation) << '\n';
  const bool ok = deviation <= 1e-10;
  err << fmt::format("{} shards, max relative deviation {:.3e}: {}\n", bank.size(), deviation, ok ? "ok" : "FAILED");
  return ok ? 0 : 2;
}

int bench_command(const BenchArgs& args, std::ostream& out, std::ostream& err) {
  const auto eq = args.sweep.find('=');
  require(eq != std::string::npos, "--sweep must look like key=v1,v2,...");
  const std::string key = args.sweep.substr(0, eq);
  require(key == "npos" || key == "b" || key == "r" || key == "d", "--sweep key must be npos, b, r or d");
  std::vector<long> values;
  std::string rest = args.sweep.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string item = rest.substr(0, comma);
    try {
      std::size_t used = 0;
      values.push_back(std::stol(item, &used));
      require(used == item.size(), "");
    } catch (const std::exception&) {
      throw UsageError("--sweep: bad value '" + item + "'");
    }
    rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
  }
  require(!values.empty(), "--sweep needs at least one value");
  for (long v : values) require(v >= 1, "--sweep values must be >= 1");

  std::vector<CostMode> modes;
  if (args.mode == "exact" || args.mode == "both" || args.mode == "all") modes.push_back(CostMode::Exact);
  if (args.mode == "projected" || args.mode == "both" || args.mode == "all") modes.push_back(CostMode::Projected);
  if (args.mode == "sharded" || args.mode == "all") modes.push_back(CostMode::ProjectedSharded);
  require(!modes.empty(), "--mode must be exact, projected, sharded, both or all");
  require_positive(args.b, "b");
  require_positive(args.r, "r");
  require_positive(args.n_plus, "n-plus");
  require_positive(args.d, "d");
  require(args.n_minus >= 0, "--n-minus must be >= 0");
  require_positive(args.shards, "shards");
  if (std::find(modes.begin(), modes.end(), CostMode::ProjectedSharded) != modes.end()) {
    for (long v : key == "r" ? values : std::vector<long>{args.r}) {
      require(args.shards <= v, "--shards must not exceed --r");
    }
  }
  require(args.repeats >= 5, "--repeats must be >= 5");
  require(args.warmups >= 2, "--warmups must be >= 2");
  require_positive(args.tau, "tau");

  Sink sink(args.out, out);
  auto& csv = sink.get();
  csv << "mode,B,N_plus,N_minus,D,r,shards,predicted_unit_ops,median_ns,p10_ns,p90_ns,peak_summary_bytes,"
         "attract_median_ns,attract_p10_ns,attract_p90_ns\n";
  BenchOptions options;
  options.repeats = args.repeats;
  options.warmups = args.warmups;
  options.tau = args.tau;
  options.multithreaded = args.multithreaded;
  for (long v : values) {
    for (CostMode mode : modes) {
      CostModel model;
      model.batch = key == "b" ? v : args.b;
      model.n_plus = key == "npos" ? v : args.n_plus;
      model.dim = key == "d" ? v : args.d;
      model.rank = key == "r" ? v : args.r;
      model.n_minus = args.n_minus > 0 ? args.n_minus : model.batch;
      model.mode = mode;
      const Index shards = mode == CostMode::ProjectedSharded ? args.shards : 1;
      if (mode == CostMode::ProjectedSharded) model.shard_sizes = split_rank(model.rank, shards);
      const BenchReport r = measure_field_cost(model, Seed{args.seed}, options);
      csv << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(mode), model.batch, model.n_plus,
                         model.n_minus, model.dim, model.rank, shards, r.predicted_unit_ops, r.total.median_ns,
                         r.total.p10_ns, r.total.p90_ns, r.peak_summary_bytes, r.attraction.median_ns,
                         r.attraction.p10_ns, r.attraction.p90_ns);
      csv.flush();
      err << fmt::format("{} {}={}: median {} ns\n", to_string(mode), key, v, r.total.median_ns);
    }
  }
  return 0;
}

}  // namespace driftx::cli
