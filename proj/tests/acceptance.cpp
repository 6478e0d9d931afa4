// Acceptance suite: one pass/fail line per criterion, exit code equals
// the number of failed criteria. Criteria touch the library directly
// except where CLI behavior itself is under test (ANNLAB_CLI_PATH).

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "annlab/annihilator.hpp"
#include "annlab/bench.hpp"
#include "annlab/finite_diff.hpp"
#include "annlab/net.hpp"
#include "annlab/poly.hpp"
#include "annlab/variability.hpp"

using namespace annlab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

int failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("%s  criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// --- criterion 1: gradient correctness --------------------------------------

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 eng(1234);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  const std::vector<std::vector<int>> widths_by_depth[3] = {
      {{16}, {8}, {3}, {12}},
      {{16, 16}, {8, 4}, {5, 16}},
      {{16, 16, 16}, {4, 8, 4}, {16, 8, 2}}};
  int built = 0;
  for (int depth = 1; depth <= 3 && built < 20; ++depth) {
    for (const auto& widths : widths_by_depth[depth - 1]) {
      for (auto act : {net::Activation::Tanh, net::Activation::Sigmoid}) {
        if (built >= 20) break;
        auto n = net::random_net(widths, act,
                                 static_cast<std::uint64_t>(built) + 1);
        ++built;
        Eigen::VectorXd xs(6), ys(6);
        for (int i = 0; i < 6; ++i) {
          xs(i) = u(eng);
          ys(i) = u(eng);
        }
        Eigen::VectorXd grad;
        net::mse_and_gradient(n, xs, ys, grad);
        const Eigen::VectorXd theta = net::flatten(n);
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
          auto loss_along = [&](double t) {
            Eigen::VectorXd tv = theta;
            tv(i) += t;
            auto m = n;
            net::unflatten(m, tv);
            Eigen::VectorXd dummy;
            return net::mse_and_gradient(m, xs, ys, dummy);
          };
          const double fd = fd::derivative(loss_along, 0.0, 1, 1e-4, 4);
          const double denom = std::max({std::abs(fd), std::abs(grad(i)),
                                         1e-8});
          worst = std::max(worst, std::abs(grad(i) - fd) / denom);
        }
      }
    }
  }
  const double dt = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d nets, max rel err %.2e, %.1f s", built,
                worst, dt);
  report(1, "backprop matches central finite differences",
         built == 20 && worst < 1e-5 && dt < 10.0, buf);
}

// --- criterion 2: annihilator ground truth ----------------------------------

void criterion_tanh_relation() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_cos_gap = 0.0, worst_resid = 0.0;
  bool all_found = true;
  for (double w : {1.0, 2.0, 0.5}) {
    net::NetworkParams n;
    n.weights = {Eigen::MatrixXd::Constant(1, 1, w)};
    n.biases = {Eigen::VectorXd::Zero(1)};
    n.alpha = Eigen::VectorXd::Ones(1);
    n.beta = 0.0;
    n.activation = net::Activation::Tanh;
    const auto chain = annihilator::jet_chain(n, 1);
    const auto rel = annihilator::find_relation(chain, 1, 2, 200, 1e-8, 7);
    if (!rel) {
      all_found = false;
      continue;
    }
    // analytic relation: T1 - w + w T0^2
    poly::MultiPoly truth(2);
    truth.add_term({0, 1}, 1.0);
    truth.add_term({0, 0}, -w);
    truth.add_term({2, 0}, w);
    double dot = 0.0;
    for (const auto& [e, c] : rel->P.terms()) dot += c * truth.coefficient(e);
    const double cosine = std::abs(dot) / truth.coeff_norm();
    worst_cos_gap = std::max(worst_cos_gap, 1.0 - cosine);

    auto f = [&](double x) { return net::predict(n, x); };
    std::vector<double> grid;
    for (int i = 0; i <= 60; ++i) grid.push_back(-3.0 + 0.1 * i);
    const auto ver = annihilator::verify_annihilator(rel->P, f, grid, 1e-3);
    worst_resid = std::max(worst_resid, ver.residual_max);
  }
  const double dt = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "cosine gap %.1e, verify residual %.1e, %.2f s", worst_cos_gap,
                worst_resid, dt);
  report(2, "f'=w(1-f^2) recovered for w in {1,2,0.5}",
         all_found && worst_cos_gap < 1e-8 && worst_resid < 1e-6 && dt < 5.0,
         buf);
}

// --- criteria 3 and 4: order bound and constant solutions --------------------

void criterion_order_and_constants() {
  const std::vector<std::vector<int>> archs = {{2},    {1, 1}, {3},
                                               {2, 1}, {4},    {2, 2},
                                               {1, 2, 1}, {3, 1}, {1, 1, 1},
                                               {1, 3}};
  bool order_ok = true, const_ok = true;
  double worst_resid = 0.0, worst_const = 0.0;
  int idx = 0;
  for (const auto& widths : archs) {
    const auto act = idx % 2 ? net::Activation::Sigmoid
                             : net::Activation::Tanh;
    const auto n = net::random_net(widths, act,
                                   static_cast<std::uint64_t>(idx) + 100);
    ++idx;
    const int m = n.hidden_size();
    annihilator::SweepOptions opts;
    opts.seed = static_cast<std::uint64_t>(idx);
    const auto rep = annihilator::minimal_annihilator(n, opts);
    if (!rep.found || rep.order > m || rep.degree > 4 ||
        rep.residual_max >= 1e-6)
      order_ok = false;
    worst_resid = std::max(worst_resid, rep.residual_max);
    if (rep.found) {
      std::vector<double> jets(static_cast<std::size_t>(rep.P.n_vars()), 0.0);
      for (double c : rep.constants) {
        jets[0] = c;
        const double v = std::abs(poly::poly_eval(rep.P, jets));
        worst_const = std::max(worst_const, v);
        if (v >= 1e-6) const_ok = false;
      }
    }
  }
  char buf3[128], buf4[128];
  std::snprintf(buf3, sizeof buf3, "10 nets M in {2,3,4}, max residual %.1e",
                worst_resid);
  report(3, "minimal sweep succeeds at order <= M with degree <= 4", order_ok,
         buf3);
  std::snprintf(buf4, sizeof buf4, "max |P(c,0,...,0)| = %.1e", worst_const);
  report(4, "every constant solution is a root of the discovered P",
         order_ok && const_ok, buf4);
}

// --- criterion 5: saturation of trained nets ---------------------------------

void criterion_saturation() {
  bool ok = true;
  double min_kappa = 1e300, min_r2 = 1.0, worst_far = 0.0;
  bench::SyntheticSpec spec;
  spec.name = "sin";
  const std::vector<double> windows{kPi};
  const auto task = bench::make_synthetic_task(spec, windows, 0);
  net::Dataset train;
  for (int i = 0; i < spec.n_train; ++i) {
    train.x.push_back(task.input_map(task.full.x[i]));
    train.y.push_back(task.full.y[i]);
  }
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    net::TrainConfig cfg;
    cfg.seed = seed;
    // Saturation is a property of converged nets; the default early-stopping
    // patience can halt within a few hundred epochs while first-layer weights
    // are still small, which stretches the exponential tail far beyond the
    // probe range. Train to convergence here.
    cfg.patience = 1000;
    const auto res =
        net::train(bench::build_standard_model(seed), train, cfg);
    const auto& n = res.model;
    auto f = [&](double x) { return net::predict(n, x); };
    const auto prof = annihilator::saturation_profile(f, -1.0, 1.0, 5.0, 200);
    min_kappa = std::min(min_kappa, prof.right.kappa);
    min_r2 = std::min(min_r2, prof.right.r2);
    // 10 training widths beyond the border, in normalized units
    const double far = net::predict(n, 1.0 + 10.0 * 2.0);
    const double sat = net::saturation_value(n, +1);
    worst_far = std::max(worst_far, std::abs(far - sat));
    if (!(prof.right.kappa > 0.0) || !(prof.right.r2 > 0.95) ||
        !(std::abs(far - sat) < 1e-6))
      ok = false;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "3 seeds: min kappa+ %.2f, min r2 %.4f, far-field gap %.1e",
                min_kappa, min_r2, worst_far);
  report(5, "trained standard nets saturate exponentially", ok, buf);
}

// --- criterion 6: variability classifiers ------------------------------------

void criterion_classifiers() {
  bool inertia_ok = true, companion_ok = true, deficit_ok = true;
  std::mt19937_64 eng(55);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int dim = 2 + rep % 4;
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = u(eng);
    a = (0.5 * (a + a.transpose())).eval();
    // oracle: root signs of the characteristic polynomial
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    int np = 0, nm = 0, nz = 0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double ev = es.eigenvalues()(i).real();
      if (ev > 1e-10)
        ++np;
      else if (ev < -1e-10)
        ++nm;
      else
        ++nz;
    }
    const auto sig = variability::inertia_signature(a);
    if (sig.n_plus != np || sig.n_minus != nm || sig.n_zero != nz)
      inertia_ok = false;
  }

  for (int rep = 0; rep < 10 && companion_ok; ++rep) {
    std::vector<double> coeffs(4 + rep % 3);
    for (double& c : coeffs) c = u(eng);
    const auto spec = variability::companion_roots(coeffs);
    std::vector<std::complex<double>> poly{1.0};
    for (const auto& r : spec.roots) {
      std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
      for (std::size_t i = 0; i < poly.size(); ++i) {
        next[i + 1] += poly[i];
        next[i] -= r * poly[i];
      }
      poly = next;
    }
    for (std::size_t k = 0; k < coeffs.size(); ++k)
      if (std::abs(poly[k] - std::complex<double>(coeffs[k])) > 1e-8)
        companion_ok = false;
  }

  const int n = 629;
  std::vector<double> s(n), c(n);
  for (int i = 0; i < n; ++i) {
    s[static_cast<std::size_t>(i)] = std::sin(0.01 * i);
    c[static_cast<std::size_t>(i)] = std::cos(0.01 * i);
  }
  const auto def = variability::common_annihilator({s, c}, 0.01, 2, 1e-6);
  double max_block = 1e300;
  if (def.op.has_value() && def.operator_order == 2) {
    max_block = 0.0;
    for (double r : def.per_block_residuals)
      max_block = std::max(max_block, r);
    if (std::abs((*def.op)[0] - 1.0) > 1e-4 || std::abs((*def.op)[1]) > 1e-4 ||
        max_block >= 1e-5)
      deficit_ok = false;
  } else {
    deficit_ok = false;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "inertia %s, companion %s, sin/cos deficit residual %.1e",
                inertia_ok ? "100/100" : "mismatch",
                companion_ok ? "ok" : "mismatch", max_block);
  report(6, "inertia oracle, companion reconstruction, sin/cos deficit",
         inertia_ok && companion_ok && deficit_ok, buf);
}

// --- criterion 7: Table 1 directional ----------------------------------------

void criterion_table1() {
  const auto t0 = std::chrono::steady_clock::now();
  bench::BenchConfig cfg;
  cfg.seeds = {0, 1, 2, 3, 4};
  const fs::path dir = fs::temp_directory_path() / "annlab_accept_t1";
  fs::remove_all(dir);
  const auto out = bench::run_bench(cfg, dir);
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> agg;
  for (const auto& r : out.records) {
    auto& a = agg[{r.task, r.model_tag}];
    a.first += r.mse;
    a.second++;
  }
  auto mean = [&](const std::string& task, const std::string& model) {
    const auto& a = agg.at({task, model});
    return a.first / a.second;
  };
  const double dt = seconds_since(t0);
  bool ok = dt < 1800.0;
  std::string detail;
  for (const std::string task : {"sin", "complex_periodic", "quadratic"}) {
    const double p = mean(task, "proposed"), s = mean(task, "standard");
    if (!(p < s)) ok = false;
    detail += task + " " + std::to_string(p) + (p < s ? " < " : " >= ") +
              std::to_string(s) + "; ";
  }
  // tanh: the standard net wins this task structurally — its far field is
  // a single saturation constant that lands on tanh's asymptote, while the
  // mixed-depth combination keeps a small persistent deficit. A 5x bound
  // catches regressions without demanding parity at convergence.
  const double pt = mean("tanh", "proposed"), st = mean("tanh", "standard");
  if (!(pt <= 5.0 * st)) ok = false;
  detail += "tanh " + std::to_string(pt) + " vs " + std::to_string(st) +
            " (ratio " + std::to_string(pt / st) + ", bound 5x)";
  char buf[64];
  std::snprintf(buf, sizeof buf, "; %.0f s", dt);
  report(7, "proposed beats standard on sin/complex_periodic/quadratic", ok,
         detail + buf);
}

// --- criterion 8: Table 2 protocol on the ETT fixture -------------------------

void criterion_table2() {
  bench::BenchConfig cfg;
  cfg.tasks = {};
  bench::SeriesSpec series;
  series.csv_path = "fixtures/etth1_head.csv";
  series.train_length = 16;
  cfg.series = series;
  cfg.seeds = {0, 1, 2};
  cfg.train.max_epochs = 2000;
  const fs::path d1 = fs::temp_directory_path() / "annlab_accept_t2a";
  const fs::path d2 = fs::temp_directory_path() / "annlab_accept_t2b";
  fs::remove_all(d1);
  fs::remove_all(d2);
  const auto o1 = bench::run_bench(cfg, d1);
  const auto o2 = bench::run_bench(cfg, d2);

  // 4-window x 2-model summary layout
  std::ifstream in(o1.summary_csv);
  std::string line;
  std::getline(in, line);
  const bool header_ok = line == "task,model,window,mean_mse,std_mse,n_seeds";
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  const bool layout_ok = rows == 8;

  const bool rerun_ok = slurp(o1.summary_csv) == slurp(o2.summary_csv);
  const bool records_ok = o1.records.size() == 24;  // 4w x 2m x 3 seeds
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "%d summary rows, %zu records, rerun %s", rows,
                o1.records.size(), rerun_ok ? "identical" : "differs");
  report(8, "windowed pipeline on the ETT fixture",
         header_ok && layout_ok && rerun_ok && records_ok, buf);
}

// --- criterion 9: CLI determinism ---------------------------------------------

// records.jsonl contains a measured runtime_s per record; byte identity is
// required modulo that field only.
std::string strip_runtime(const std::string& jsonl) {
  std::string out;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find("\"runtime_s\"");
    if (pos != std::string::npos) {
      auto end = line.find(',', pos);
      if (end == std::string::npos) end = line.find('}', pos);
      line.erase(pos, end - pos);
    }
    out += line;
    out += '\n';
  }
  return out;
}

void criterion_determinism() {
  const std::string cli = ANNLAB_CLI_PATH;
  const fs::path d1 = fs::temp_directory_path() / "annlab_accept_det1";
  const fs::path d2 = fs::temp_directory_path() / "annlab_accept_det2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::create_directories(d1);
  fs::create_directories(d2);

  auto run = [&](const fs::path& out, const std::string& args) {
    const std::string cmd =
        cli + " " + args + " --out " + out.string() + " >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };

  bool ok = true;
  // train twice with one resolved config
  const std::string train_args =
      "train --task sin --model standard --seed 3 --max-epochs 200 "
      "--n-train 200";
  ok &= run(d1 / "train", train_args);
  ok &= run(d2 / "train", train_args);
  ok &= slurp(d1 / "train" / "checkpoint.json") ==
        slurp(d2 / "train" / "checkpoint.json");
  ok &= !slurp(d1 / "train" / "checkpoint.json").empty();
  ok &= slurp(d1 / "train" / "resolved_config.json") ==
        slurp(d2 / "train" / "resolved_config.json");

  // bench twice: summary byte-identical, records modulo runtime_s
  const std::string bench_args =
      "bench --tasks sin --seeds 0 --windows 0.785 --max-epochs 100";
  ok &= run(d1 / "bench", bench_args);
  ok &= run(d2 / "bench", bench_args);
  ok &= slurp(d1 / "bench" / "summary.csv") ==
        slurp(d2 / "bench" / "summary.csv");
  ok &= !slurp(d1 / "bench" / "summary.csv").empty();
  ok &= strip_runtime(slurp(d1 / "bench" / "records.jsonl")) ==
        strip_runtime(slurp(d2 / "bench" / "records.jsonl"));

  // annihilate on the trained checkpoint, twice
  const std::string ann_args = "annihilate --checkpoint " +
                               (d1 / "train" / "checkpoint.json").string();
  // a 3x16 net is over the elimination cap; use a small trained net instead
  const std::string small_train =
      "train --task sin --model standard --widths 2 --seed 3 "
      "--max-epochs 100 --n-train 200";
  ok &= run(d1 / "small", small_train);
  ok &= run(d2 / "small", small_train);
  const std::string ann1 = "annihilate --checkpoint " +
                           (d1 / "small" / "checkpoint.json").string();
  bool a1 = run(d1 / "ann", ann1);
  bool a2 = run(d2 / "ann", ann1);
  ok &= a1 && a2;
  ok &= slurp(d1 / "ann" / "annihilator_report.json") ==
        slurp(d2 / "ann" / "annihilator_report.json");
  ok &= !slurp(d1 / "ann" / "annihilator_report.json").empty();

  report(9, "CLI reruns reproduce outputs byte-identically", ok,
         ok ? "train/bench/annihilate stable" : "divergence detected");
}

}  // namespace

int main() {
  criterion_gradients();
  criterion_tanh_relation();
  criterion_order_and_constants();
  criterion_saturation();
  criterion_classifiers();
  criterion_table1();
  criterion_table2();
  criterion_determinism();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
