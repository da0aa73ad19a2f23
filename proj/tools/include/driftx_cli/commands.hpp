#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace driftx::cli {

/// Bad flag values detected before any computation starts (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Paths equal to "-" mean standard output.

struct SelectArgs {
  std::string strategy = "random";
  std::string scope = "global";
  long budget = 0;
  std::uint64_t seed = 0;
  double tau = 0.5;
  int max_iters = 100;
  std::string input;
  std::string output = "-";
};

struct PrecomputeArgs {
  std::string landmarks;
  std::string data;
  double tau = 0.5;
  double lambda = 1e-6;
  double epsilon = 1e-12;
  bool shard_by_class = false;
  std::string output;
};

struct TrainArgs {
  std::string dist = "checkerboard";
  std::string mode = "mlp";
  std::string attraction = "projected";
  std::string repulsion = "exact";
  std::string bank;
  long steps = 5000;
  long batch = 256;
  std::uint64_t seed = 0;
  std::string out;
  double tau = 0.5;
  double lambda = 1e-6;
  long landmarks = 200;
  long n_data = 10000;
  long positive_batch = 256;
  long eval_every = 500;
  long eval_samples = 2000;
  double lr = 1e-3;
  long particles = 500;
  double init_std = 0.1;
  double step_size = 1.0;
  long snapshot_every = 500;
  bool svg = false;
};

struct FidelityArgs {
  std::string data;
  std::string bank;
  std::string queries;
  std::optional<double> tau;
  std::string report = "-";
};

struct ComposeCheckArgs {
  std::string data;
  long shards = 4;
  long budget = 50;
  std::uint64_t seed = 0;
  double tau = 0.5;
  double lambda = 1e-6;
  long queries = 64;
};

struct BenchArgs {
  std::string sweep = "npos=1000,3000,10000,30000,100000";
  long b = 256;
  long r = 200;
  long d = 2;
  long n_plus = 10000;  // used when the sweep key is not npos
  long n_minus = 0;  // 0 means N- = B
  long shards = 10;
  std::string mode = "both";
  int repeats = 5;
  int warmups = 2;
  std::uint64_t seed = 0;
  double tau = 0.5;
  bool multithreaded = false;
  std::string out = "-";
};

/// Each command validates its arguments up front (throwing UsageError), then
/// throws driftx::Error on runtime failure. Returns the exit code.
int select_landmarks_command(const SelectArgs& args, std::ostream& out, std::ostream& err);
int precompute_command(const PrecomputeArgs& args, std::ostream& out, std::ostream& err);
int train_command(const TrainArgs& args, std::ostream& out, std::ostream& err);
int fidelity_command(const FidelityArgs& args, std::ostream& out, std::ostream& err);
int compose_check_command(const ComposeCheckArgs& args, std::ostream& out, std::ostream& err);
int bench_command(const BenchArgs& args, std::ostream& out, std::ostream& err);

}  // namespace driftx::cli
