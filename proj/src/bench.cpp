#include "annlab/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "annlab/rng.hpp"
#include "json.hpp"

namespace annlab::bench {

using json = nlohmann::ordered_json;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double synthetic_truth(const std::string& name, double x) {
  if (name == "sin") return std::sin(x);
  if (name == "complex_periodic") return std::sin(x) + 0.5 * std::sin(3.0 * x);
  if (name == "quadratic") return 0.1 * x * x;
  if (name == "tanh") return std::tanh(x);
  throw std::invalid_argument("unknown synthetic function: " + name);
}

net::Dataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n_train < 100)
    throw std::invalid_argument("n_train must be >= 100");
  net::Dataset data;
  auto eng = rng::engine(seed, "synthetic-noise");
  std::normal_distribution<double> noise(0.0, 1.0);
  const double h = (spec.b - spec.a) / (spec.n_train - 1);
  for (int i = 0; i < spec.n_train; ++i) {
    const double x = spec.a + h * i;
    double y = synthetic_truth(spec.name, x);
    if (spec.noise_std > 0.0) y += spec.noise_std * noise(eng);
    data.x.push_back(x);
    data.y.push_back(y);
  }
  return data;
}

std::vector<double> load_csv_series(const SeriesSpec& spec) {
  std::ifstream in(spec.csv_path);
  if (!in)
    throw std::runtime_error("cannot open CSV: " + spec.csv_path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty CSV: " + spec.csv_path.string());
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto it = std::find(header.begin(), header.end(), spec.value_column);
  if (it == header.end()) {
    std::string available;
    for (const auto& h : header) available += (available.empty() ? "" : ", ") + h;
    throw std::runtime_error("column '" + spec.value_column +
                             "' not found; available: " + available);
  }
  const std::size_t col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    std::string target;
    bool got = false;
    while (std::getline(ss, cell, ',')) {
      if (c++ == col) {
        target = cell;
        got = true;
        break;
      }
    }
    if (!got)
      throw std::runtime_error("row " + std::to_string(row) +
                               ": missing column " + spec.value_column);
    try {
      std::size_t pos = 0;
      const double v = std::stod(target, &pos);
      if (pos != target.size() || !std::isfinite(v)) throw std::invalid_argument(target);
      values.push_back(v);
    } catch (const std::exception&) {
      throw std::runtime_error("row " + std::to_string(row) +
                               ": cannot parse value '" + target + "'");
    }
  }
  if (static_cast<int>(values.size()) < spec.train_length + 1)
    throw std::runtime_error("series too short: " +
                             std::to_string(values.size()) + " samples for train_length " +
                             std::to_string(spec.train_length));
  return values;
}

Task make_synthetic_task(const SyntheticSpec& spec,
                         std::span<const double> windows, std::uint64_t seed) {
  if (windows.empty()) throw std::invalid_argument("no windows");
  Task task;
  task.id = spec.name;
  task.a = spec.a;
  task.b = spec.b;
  task.n_train = spec.n_train;
  task.input_map = net::normalizing_map(spec.a, spec.b);
  task.full = gen_synthetic(spec, seed);

  const double h = (spec.b - spec.a) / (spec.n_train - 1);
  const double w_raw = task.window_to_raw(windows.back());
  const int extra = static_cast<int>(std::ceil(w_raw / h));
  auto eng = rng::engine(seed, "synthetic-noise-ext");
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 1; i <= extra; ++i) {
    const double x = spec.b + h * i;
    double y = synthetic_truth(spec.name, x);
    if (spec.noise_std > 0.0) y += spec.noise_std * noise(eng);
    task.full.x.push_back(x);
    task.full.y.push_back(y);
  }
  return task;
}

Task make_series_task(const SeriesSpec& spec, std::span<const double> windows) {
  if (spec.train_length < 2)
    throw std::invalid_argument("train_length must be >= 2");
  const auto values = load_csv_series(spec);
  Task task;
  task.id = "series:" + spec.csv_path.filename().string() + ":" +
            spec.value_column;
  task.a = 0.0;
  task.b = static_cast<double>(spec.train_length - 1);
  task.n_train = spec.train_length;
  task.input_map = net::normalizing_map(task.a, task.b);
  const double w_raw = task.window_to_raw(windows.back());
  const std::size_t needed =
      static_cast<std::size_t>(spec.train_length) +
      static_cast<std::size_t>(std::floor(w_raw));
  if (values.size() < needed)
    throw std::runtime_error(
        "series too short for largest window: need " + std::to_string(needed) +
        " samples, have " + std::to_string(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    task.full.x.push_back(static_cast<double>(i));
    task.full.y.push_back(values[i]);
  }
  return task;
}

Split split_extrapolation(const Task& task, std::span<const double> windows) {
  for (std::size_t k = 0; k < windows.size(); ++k) {
    if (windows[k] <= 0.0) throw std::invalid_argument("window must be > 0");
    if (k > 0 && windows[k] <= windows[k - 1])
      throw std::invalid_argument("windows must be ascending");
  }
  Split split;
  for (int i = 0; i < task.n_train; ++i) {
    split.train.x.push_back(task.full.x[static_cast<std::size_t>(i)]);
    split.train.y.push_back(task.full.y[static_cast<std::size_t>(i)]);
  }
  for (double w : windows) {
    const double hi = task.b + task.window_to_raw(w) + 1e-9;
    net::Dataset eval;
    for (std::size_t i = static_cast<std::size_t>(task.n_train);
         i < task.full.size(); ++i) {
      if (task.full.x[i] <= hi) {
        eval.x.push_back(task.full.x[i]);
        eval.y.push_back(task.full.y[i]);
      }
    }
    if (eval.size() == 0)
      throw std::runtime_error("empty evaluation window " + fmt17(w));
    split.evals.push_back(std::move(eval));
  }
  return split;
}

std::string BenchRecord::key() const {
  return model_tag + "|" + task + "|" + fmt17(window) + "|" +
         std::to_string(seed);
}

void append_record(const std::filesystem::path& store,
                   const BenchRecord& rec) {
  json j;
  j["model"] = rec.model_tag;
  j["task"] = rec.task;
  j["window"] = rec.window;
  j["seed"] = rec.seed;
  j["mse"] = rec.mse;
  j["runtime_s"] = rec.runtime_s;
  j["diverged"] = rec.diverged;
  std::ofstream out(store, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + store.string());
  out << j.dump() << "\n";
}

std::vector<BenchRecord> load_records(const std::filesystem::path& store) {
  std::vector<BenchRecord> records;
  std::ifstream in(store);
  if (!in) return records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      continue;  // torn tail line from an interrupted run
    }
    BenchRecord rec;
    rec.model_tag = j.at("model").get<std::string>();
    rec.task = j.at("task").get<std::string>();
    rec.window = j.at("window").get<double>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.mse = j.at("mse").get<double>();
    rec.runtime_s = j.value("runtime_s", 0.0);
    rec.diverged = j.value("diverged", false);
    records.push_back(std::move(rec));
  }
  return records;
}

net::NetworkParams build_standard_model(std::uint64_t seed) {
  return net::random_net({16, 16, 16}, net::Activation::Sigmoid,
                         rng::split(seed, "standard-init"));
}

net::VariedDepthNet build_proposed_model(std::uint64_t seed) {
  return net::build_varied_depth({1, 2, 3}, 16, net::Activation::Sigmoid,
                                 rng::split(seed, "proposed-init"));
}

namespace {

struct SeedResult {
  std::vector<BenchRecord> records;
  net::Checkpoint checkpoint;
};

SeedResult run_one_seed(const Task& task, const Split& split,
                        const std::string& model_tag,
                        const net::TrainConfig& base_cfg,
                        std::span<const double> windows, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  net::TrainConfig cfg = base_cfg;
  cfg.seed = seed;

  net::Dataset train_norm;
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    train_norm.x.push_back(task.input_map(split.train.x[i]));
    train_norm.y.push_back(split.train.y[i]);
  }

  net::Checkpoint ck;
  ck.input_map = task.input_map;
  if (model_tag == "standard") {
    ck.model = net::train(build_standard_model(seed), train_norm, cfg).model;
  } else if (model_tag == "proposed") {
    ck.model = net::train(build_proposed_model(seed), train_norm, cfg).model;
  } else {
    throw std::invalid_argument("unknown model tag: " + model_tag);
  }
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  SeedResult result;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto& eval = split.evals[k];
    double sum = 0.0;
    for (std::size_t i = 0; i < eval.size(); ++i) {
      const double pred = ck.predict_raw(eval.x[i]);
      const double d = pred - eval.y[i];
      sum += d * d;
    }
    BenchRecord rec;
    rec.model_tag = model_tag;
    rec.task = task.id;
    rec.window = windows[k];
    rec.seed = seed;
    rec.mse = sum / static_cast<double>(eval.size());
    rec.runtime_s = runtime;
    rec.diverged = !std::isfinite(rec.mse);
    result.records.push_back(std::move(rec));
  }
  result.checkpoint = std::move(ck);
  return result;
}

}  // namespace

std::vector<BenchRecord> run_extrapolation(
    const Task& task, const std::string& model_tag,
    const net::TrainConfig& cfg, std::span<const double> windows,
    std::span<const std::uint64_t> seeds, const std::filesystem::path& store,
    int jobs) {
  const Split split = split_extrapolation(task, windows);

  std::set<std::string> existing;
  std::vector<BenchRecord> out;
  for (const auto& rec : load_records(store)) {
    existing.insert(rec.key());
    if (rec.model_tag == model_tag && rec.task == task.id) out.push_back(rec);
  }

  // seeds whose records are incomplete get (re)computed
  std::vector<std::uint64_t> todo;
  for (std::uint64_t seed : seeds) {
    bool complete = true;
    for (double w : windows) {
      BenchRecord probe;
      probe.model_tag = model_tag;
      probe.task = task.id;
      probe.window = w;
      probe.seed = seed;
      if (!existing.contains(probe.key())) complete = false;
    }
    if (!complete) todo.push_back(seed);
  }

  std::vector<std::future<SeedResult>> futures;
  const std::size_t width = jobs > 0 ? static_cast<std::size_t>(jobs) : 1;
  std::size_t next = 0, launched = 0;
  auto launch = [&]() {
    while (launched < todo.size() && launched - next < width) {
      const std::uint64_t seed = todo[launched++];
      futures.push_back(std::async(std::launch::async, [&, seed]() {
        return run_one_seed(task, split, model_tag, cfg, windows, seed);
      }));
    }
  };
  launch();
  while (next < todo.size()) {
    SeedResult result = futures[next].get();
    ++next;  // the slot is free before topping the pool back up
    launch();
    for (auto& rec : result.records) {
      if (!existing.contains(rec.key())) {
        append_record(store, rec);
        existing.insert(rec.key());
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

void write_summary(const std::vector<BenchRecord>& records,
                   const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("no records to summarize");
  std::map<std::tuple<std::string, std::string, double>, std::vector<double>>
      groups;
  for (const auto& rec : records)
    groups[{rec.task, rec.model_tag, rec.window}].push_back(rec.mse);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "task,model,window,mean_mse,std_mse,n_seeds\n";
  for (const auto& [key, mses] : groups) {
    const auto& [task, model, window] = key;
    double mean = 0.0;
    for (double m : mses) mean += m;
    mean /= static_cast<double>(mses.size());
    double var = 0.0;
    for (double m : mses) var += (m - mean) * (m - mean);
    var /= static_cast<double>(mses.size());
    out << task << "," << model << "," << fmt17(window) << "," << fmt17(mean)
        << "," << fmt17(std::sqrt(var)) << "," << mses.size() << "\n";
  }
}

void write_trajectories(
    const Task& task,
    const std::vector<std::pair<std::string, net::Checkpoint>>& models,
    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "x,y_true,y_pred,model,task\n";
  for (const auto& [tag, ck] : models) {
    for (std::size_t i = 0; i < task.full.size(); ++i) {
      out << fmt17(task.full.x[i]) << "," << fmt17(task.full.y[i]) << ","
          << fmt17(ck.predict_raw(task.full.x[i])) << "," << tag << ","
          << task.id << "\n";
    }
  }
}

BenchOutput run_bench(const BenchConfig& cfg,
                      const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  BenchOutput output;
  output.record_store = out_dir / "records.jsonl";
  output.summary_csv = out_dir / "summary.csv";
  output.trajectories_csv = out_dir / "trajectories.csv";

  std::vector<Task> tasks;
  for (const auto& name : cfg.tasks) {
    SyntheticSpec spec;
    spec.name = name;
    spec.n_train = cfg.n_train;
    spec.noise_std = cfg.noise_std;
    // data generation is seeded by the first sweep seed
    tasks.push_back(make_synthetic_task(
        spec, cfg.windows, cfg.seeds.empty() ? 0 : cfg.seeds.front()));
  }
  if (cfg.series) tasks.push_back(make_series_task(*cfg.series, cfg.windows));

  std::vector<std::pair<std::string, net::Checkpoint>> trajectory_models;
  std::ofstream(output.trajectories_csv) << "x,y_true,y_pred,model,task\n";
  std::ofstream traj(output.trajectories_csv, std::ios::app);

  for (const auto& task : tasks) {
    for (const std::string model : {"standard", "proposed"}) {
      auto records = run_extrapolation(task, model, cfg.train, cfg.windows,
                                       cfg.seeds, output.record_store,
                                       cfg.jobs);
      output.records.insert(output.records.end(), records.begin(),
                            records.end());
    }
    // first-seed trajectories for figure regeneration (deterministic, so
    // retraining on resume reproduces identical curves)
    if (!cfg.seeds.empty()) {
      const Split split = split_extrapolation(task, cfg.windows);
      for (const std::string model : {"standard", "proposed"}) {
        const auto result = run_one_seed(task, split, model, cfg.train,
                                         cfg.windows, cfg.seeds.front());
        for (std::size_t i = 0; i < task.full.size(); ++i) {
          traj << fmt17(task.full.x[i]) << "," << fmt17(task.full.y[i]) << ","
               << fmt17(result.checkpoint.predict_raw(task.full.x[i])) << ","
               << model << "," << task.id << "\n";
        }
      }
    }
  }
  traj.close();
  write_summary(output.records, output.summary_csv);
  return output;
}

}  // namespace annlab::bench
