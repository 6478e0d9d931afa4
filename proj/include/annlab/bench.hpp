#pragma once

// Extrapolation benchmark harness: synthetic elementary-function tasks
// and CSV time series, cumulative evaluation windows beyond the training
// border (in normalized input units), per-seed sweeps with an
// append-only JSONL record store that supports crash resume, and
// summary/trajectory emission for table and figure regeneration.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "annlab/net.hpp"

namespace annlab::bench {

// --- Task construction -------------------------------------------------------

struct SyntheticSpec {
  std::string name;  // sin | complex_periodic | quadratic | tanh
  double a = -2.0 * 3.14159265358979323846;
  double b = 2.0 * 3.14159265358979323846;
  int n_train = 1000;
  double noise_std = 0.0;
};

double synthetic_truth(const std::string& name, double x);
net::Dataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

struct SeriesSpec {
  std::filesystem::path csv_path;
  std::string value_column = "OT";
  int train_length = 0;
};

std::vector<double> load_csv_series(const SeriesSpec& spec);

// A benchmark task: samples over raw inputs plus the training border.
// Points are on one uniform grid; the first n_train belong to training.
struct Task {
  std::string id;
  net::Dataset full;  // raw x, covers training plus the largest window
  int n_train = 0;
  double a = 0.0, b = 0.0;  // training domain in raw units
  net::InputMap input_map;  // raw -> normalized ([a,b] -> [-1,1])
  double window_to_raw(double w) const { return w / input_map.scale; }
};

// Windows are expressed in normalized input units throughout.
Task make_synthetic_task(const SyntheticSpec& spec,
                         std::span<const double> windows, std::uint64_t seed);
Task make_series_task(const SeriesSpec& spec, std::span<const double> windows);

struct Split {
  net::Dataset train;                // raw x
  std::vector<net::Dataset> evals;   // cumulative: evals[k] contains evals[k-1]
};

Split split_extrapolation(const Task& task, std::span<const double> windows);

// --- Records -----------------------------------------------------------------

struct BenchRecord {
  std::string model_tag;  // standard | proposed
  std::string task;
  double window = 0.0;  // normalized units
  std::uint64_t seed = 0;
  double mse = 0.0;
  double runtime_s = 0.0;
  bool diverged = false;

  std::string key() const;  // unique (model, task, window, seed)
};

void append_record(const std::filesystem::path& store, const BenchRecord& rec);
std::vector<BenchRecord> load_records(const std::filesystem::path& store);

// --- Sweep -------------------------------------------------------------------

struct BenchConfig {
  std::vector<std::string> tasks = {"sin", "complex_periodic", "quadratic",
                                    "tanh"};
  std::optional<SeriesSpec> series;  // adds a CSV task when set
  std::vector<double> windows = {0.25 * 3.14159265358979323846,
                                 0.50 * 3.14159265358979323846,
                                 0.75 * 3.14159265358979323846,
                                 3.14159265358979323846};
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  net::TrainConfig train;
  int n_train = 1000;
  double noise_std = 0.0;
  int jobs = 1;
};

// One model on one task across windows and seeds. Records already in the
// store are not recomputed (crash resume); new ones are appended as each
// seed finishes. Training runs on normalized inputs.
std::vector<BenchRecord> run_extrapolation(
    const Task& task, const std::string& model_tag,
    const net::TrainConfig& cfg, std::span<const double> windows,
    std::span<const std::uint64_t> seeds, const std::filesystem::path& store,
    int jobs = 1);

// --- Reporting ---------------------------------------------------------------

// Summary CSV: task,model,window,mean_mse,std_mse,n_seeds.
void write_summary(const std::vector<BenchRecord>& records,
                   const std::filesystem::path& path);

// Trajectory CSV: x,y_true,y_pred,model,task over the full task grid.
void write_trajectories(
    const Task& task,
    const std::vector<std::pair<std::string, net::Checkpoint>>& models,
    const std::filesystem::path& path);

struct BenchOutput {
  std::vector<BenchRecord> records;
  std::filesystem::path record_store;
  std::filesystem::path summary_csv;
  std::filesystem::path trajectories_csv;
};

// Full sweep: every task x {standard, proposed}, records + summary +
// first-seed trajectories under out_dir.
BenchOutput run_bench(const BenchConfig& cfg,
                      const std::filesystem::path& out_dir);

// Model builders shared with the CLI.
net::NetworkParams build_standard_model(std::uint64_t seed);
net::VariedDepthNet build_proposed_model(std::uint64_t seed);

}  // namespace annlab::bench
