#include "annlab/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "annlab/rng.hpp"
#include "json.hpp"

namespace annlab::net {

using json = nlohmann::ordered_json;

const char* activation_name(Activation a) {
  return a == Activation::Tanh ? "tanh" : "sigmoid";
}

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw std::invalid_argument("unknown activation: " + name);
}

namespace {

Eigen::ArrayXXd activate_arr(Activation a, const Eigen::ArrayXXd& z) {
  if (a == Activation::Tanh) return z.tanh();
  return 1.0 / (1.0 + (-z).exp());
}

// derivative expressed through the activation value
Eigen::ArrayXXd activate_deriv_from_value(Activation a,
                                          const Eigen::ArrayXXd& h) {
  if (a == Activation::Tanh) return 1.0 - h.square();
  return h * (1.0 - h);
}

}  // namespace

int NetworkParams::hidden_size() const {
  int m = 0;
  for (const auto& w : weights) m += static_cast<int>(w.rows());
  return m;
}

std::vector<int> NetworkParams::widths() const {
  std::vector<int> ws;
  for (const auto& w : weights) ws.push_back(static_cast<int>(w.rows()));
  return ws;
}

void NetworkParams::validate() const {
  if (weights.empty()) throw std::invalid_argument("network has no layers");
  if (weights.size() != biases.size())
    throw std::invalid_argument("weights/biases layer count mismatch");
  int prev = 1;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].cols() != prev)
      throw std::invalid_argument("layer " + std::to_string(l) +
                                  " input dimension does not chain");
    if (biases[l].size() != weights[l].rows())
      throw std::invalid_argument("layer " + std::to_string(l) +
                                  " bias dimension mismatch");
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw std::invalid_argument("non-finite parameter in layer " +
                                  std::to_string(l));
    prev = static_cast<int>(weights[l].rows());
  }
  if (alpha.size() != prev)
    throw std::invalid_argument("readout dimension mismatch");
  if (!alpha.allFinite() || !std::isfinite(beta))
    throw std::invalid_argument("non-finite readout parameter");
}

NetworkParams random_net(const std::vector<int>& widths, Activation act,
                         std::uint64_t seed) {
  if (widths.empty()) throw std::invalid_argument("widths must be non-empty");
  NetworkParams net;
  net.activation = act;
  auto eng = rng::engine(seed, "net-init");
  int prev = 1;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const int m = widths[l];
    if (m < 1) throw std::invalid_argument("layer width must be >= 1");
    const double bound = std::sqrt(6.0 / (prev + m));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd w(m, prev);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < prev; ++j) w(i, j) = u(eng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(m));
    prev = m;
  }
  const double bound = std::sqrt(6.0 / (prev + 1));
  std::uniform_real_distribution<double> u(-bound, bound);
  net.alpha = Eigen::VectorXd(prev);
  for (int i = 0; i < prev; ++i) net.alpha(i) = u(eng);
  net.beta = 0.0;
  return net;
}

ForwardTrace forward(const NetworkParams& net, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite input");
  net.validate();
  ForwardTrace tr;
  Eigen::VectorXd h = Eigen::VectorXd::Constant(1, x);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Eigen::VectorXd z = net.weights[l] * h + net.biases[l];
    h = activate_arr(net.activation, z.array()).matrix();
    tr.preacts.push_back(std::move(z));
    tr.hidden.push_back(h);
  }
  tr.output = net.alpha.dot(h) + net.beta;
  return tr;
}

double predict(const NetworkParams& net, double x) {
  Eigen::VectorXd h = Eigen::VectorXd::Constant(1, x);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    h = activate_arr(net.activation,
                     (net.weights[l] * h + net.biases[l]).array())
            .matrix();
  }
  return net.alpha.dot(h) + net.beta;
}

Eigen::VectorXd predict_batch(const NetworkParams& net,
                              const Eigen::VectorXd& xs) {
  Eigen::MatrixXd h = xs.transpose();  // 1 x n
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Eigen::MatrixXd z = net.weights[l] * h;
    z.colwise() += net.biases[l];
    h = activate_arr(net.activation, z.array()).matrix();
  }
  return (net.alpha.transpose() * h).transpose().array() + net.beta;
}

double predict(const VariedDepthNet& net, double x) {
  double out = 0.0;
  for (std::size_t j = 0; j < net.subnets.size(); ++j)
    out += net.combination(static_cast<Eigen::Index>(j)) *
           predict(net.subnets[j], x);
  return out;
}

Eigen::VectorXd predict_batch(const VariedDepthNet& net,
                              const Eigen::VectorXd& xs) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(xs.size());
  for (std::size_t j = 0; j < net.subnets.size(); ++j)
    out += net.combination(static_cast<Eigen::Index>(j)) *
           predict_batch(net.subnets[j], xs);
  return out;
}

void VariedDepthNet::validate() const {
  if (subnets.empty()) throw std::invalid_argument("no subnets");
  if (combination.size() != static_cast<Eigen::Index>(subnets.size()))
    throw std::invalid_argument("combination weight count mismatch");
  for (const auto& s : subnets) s.validate();
  for (std::size_t i = 0; i < subnets.size(); ++i)
    for (std::size_t j = i + 1; j < subnets.size(); ++j)
      if (subnets[i].depth() == subnets[j].depth())
        throw std::invalid_argument("subnet depths must be pairwise distinct");
}

VariedDepthNet build_varied_depth(const std::vector<int>& depths, int width,
                                  Activation act, std::uint64_t seed) {
  if (depths.empty()) throw std::invalid_argument("depths must be non-empty");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (depths[i] < 1) throw std::invalid_argument("depths must be >= 1");
    for (std::size_t j = i + 1; j < depths.size(); ++j)
      if (depths[i] == depths[j])
        throw std::invalid_argument("duplicate subnet depth " +
                                    std::to_string(depths[i]));
  }
  VariedDepthNet net;
  for (std::size_t j = 0; j < depths.size(); ++j) {
    std::vector<int> widths(static_cast<std::size_t>(depths[j]), width);
    net.subnets.push_back(
        random_net(widths, act, rng::split(seed, "subnet", j)));
  }
  net.combination = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(depths.size()),
      1.0 / static_cast<double>(depths.size()));
  return net;
}

// ---------------------------------------------------------------------------
// Flat parameter layout: per layer W (row-major) then b, then alpha, beta.
// For the varied-depth net: each subnet's block, then the combination.

namespace {

Eigen::Index param_count(const NetworkParams& net) {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < net.weights.size(); ++l)
    n += net.weights[l].size() + net.biases[l].size();
  return n + net.alpha.size() + 1;
}

Eigen::Index param_count(const VariedDepthNet& net) {
  Eigen::Index n = net.combination.size();
  for (const auto& s : net.subnets) n += param_count(s);
  return n;
}

void write_flat(const NetworkParams& net, Eigen::VectorXd& out,
                Eigen::Index& pos) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto& w = net.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) out(pos++) = w(i, j);
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i)
      out(pos++) = net.biases[l](i);
  }
  for (Eigen::Index i = 0; i < net.alpha.size(); ++i) out(pos++) = net.alpha(i);
  out(pos++) = net.beta;
}

void read_flat(NetworkParams& net, const Eigen::VectorXd& in,
               Eigen::Index& pos) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto& w = net.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = in(pos++);
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i)
      net.biases[l](i) = in(pos++);
  }
  for (Eigen::Index i = 0; i < net.alpha.size(); ++i) net.alpha(i) = in(pos++);
  net.beta = in(pos++);
}

}  // namespace

Eigen::VectorXd flatten(const NetworkParams& net) {
  Eigen::VectorXd out(param_count(net));
  Eigen::Index pos = 0;
  write_flat(net, out, pos);
  return out;
}

Eigen::VectorXd flatten(const VariedDepthNet& net) {
  Eigen::VectorXd out(param_count(net));
  Eigen::Index pos = 0;
  for (const auto& s : net.subnets) write_flat(s, out, pos);
  for (Eigen::Index i = 0; i < net.combination.size(); ++i)
    out(pos++) = net.combination(i);
  return out;
}

void unflatten(NetworkParams& net, const Eigen::VectorXd& theta) {
  Eigen::Index pos = 0;
  read_flat(net, theta, pos);
}

void unflatten(VariedDepthNet& net, const Eigen::VectorXd& theta) {
  Eigen::Index pos = 0;
  for (auto& s : net.subnets) read_flat(s, theta, pos);
  for (Eigen::Index i = 0; i < net.combination.size(); ++i)
    net.combination(i) = theta(pos++);
}

// ---------------------------------------------------------------------------
// Batched reverse mode.

namespace {

struct BatchTrace {
  std::vector<Eigen::MatrixXd> hidden;  // h^(l), m_l x n
  Eigen::RowVectorXd output;
};

BatchTrace forward_batch(const NetworkParams& net, const Eigen::VectorXd& xs) {
  BatchTrace tr;
  Eigen::MatrixXd h = xs.transpose();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Eigen::MatrixXd z = net.weights[l] * h;
    z.colwise() += net.biases[l];
    h = activate_arr(net.activation, z.array()).matrix();
    tr.hidden.push_back(h);
  }
  tr.output = (net.alpha.transpose() * h).array() + net.beta;
  return tr;
}

// Accumulates d(loss)/d(params) given d(loss)/d(output) as a row vector.
// xs is the raw input row; returns nothing, writes into grad at pos using
// the flat layout above.
void backprop_into(const NetworkParams& net, const Eigen::VectorXd& xs,
                   const BatchTrace& tr, const Eigen::RowVectorXd& dout,
                   Eigen::VectorXd& grad, Eigen::Index& pos) {
  const std::size_t L = net.weights.size();
  std::vector<Eigen::MatrixXd> delta(L);
  delta[L - 1] =
      ((net.alpha * dout).array() *
       activate_deriv_from_value(net.activation, tr.hidden[L - 1].array()))
          .matrix();
  for (std::size_t l = L - 1; l > 0; --l) {
    delta[l - 1] =
        ((net.weights[l].transpose() * delta[l]).array() *
         activate_deriv_from_value(net.activation, tr.hidden[l - 1].array()))
            .matrix();
  }
  for (std::size_t l = 0; l < L; ++l) {
    const Eigen::MatrixXd& prev =
        l == 0 ? Eigen::MatrixXd(xs.transpose()) : tr.hidden[l - 1];
    Eigen::MatrixXd gw = delta[l] * prev.transpose();
    Eigen::VectorXd gb = delta[l].rowwise().sum();
    for (Eigen::Index i = 0; i < gw.rows(); ++i)
      for (Eigen::Index j = 0; j < gw.cols(); ++j) grad(pos++) += gw(i, j);
    for (Eigen::Index i = 0; i < gb.size(); ++i) grad(pos++) += gb(i);
  }
  Eigen::VectorXd galpha = tr.hidden[L - 1] * dout.transpose();
  for (Eigen::Index i = 0; i < galpha.size(); ++i) grad(pos++) += galpha(i);
  grad(pos++) += dout.sum();
}

}  // namespace

double mse_and_gradient(const NetworkParams& net, const Eigen::VectorXd& xs,
                        const Eigen::VectorXd& ys, Eigen::VectorXd& grad) {
  const Eigen::Index n = xs.size();
  if (n == 0) throw std::invalid_argument("empty batch");
  BatchTrace tr = forward_batch(net, xs);
  Eigen::RowVectorXd resid = tr.output - ys.transpose();
  const double loss = resid.squaredNorm() / static_cast<double>(n);
  Eigen::RowVectorXd dout = resid * (2.0 / static_cast<double>(n));
  grad = Eigen::VectorXd::Zero(param_count(net));
  Eigen::Index pos = 0;
  backprop_into(net, xs, tr, dout, grad, pos);
  return loss;
}

double mse_and_gradient(const VariedDepthNet& net, const Eigen::VectorXd& xs,
                        const Eigen::VectorXd& ys, Eigen::VectorXd& grad) {
  const Eigen::Index n = xs.size();
  if (n == 0) throw std::invalid_argument("empty batch");
  std::vector<BatchTrace> traces;
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(n);
  for (std::size_t j = 0; j < net.subnets.size(); ++j) {
    traces.push_back(forward_batch(net.subnets[j], xs));
    out += net.combination(static_cast<Eigen::Index>(j)) * traces[j].output;
  }
  Eigen::RowVectorXd resid = out - ys.transpose();
  const double loss = resid.squaredNorm() / static_cast<double>(n);
  Eigen::RowVectorXd dout = resid * (2.0 / static_cast<double>(n));
  grad = Eigen::VectorXd::Zero(param_count(net));
  Eigen::Index pos = 0;
  for (std::size_t j = 0; j < net.subnets.size(); ++j) {
    Eigen::RowVectorXd sub_dout =
        net.combination(static_cast<Eigen::Index>(j)) * dout;
    backprop_into(net.subnets[j], xs, traces[j], sub_dout, grad, pos);
  }
  for (std::size_t j = 0; j < net.subnets.size(); ++j)
    grad(pos++) = dout.dot(traces[j].output);
  return loss;
}

NetGrad gradient(const NetworkParams& net,
                 const std::vector<std::pair<double, double>>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  Eigen::VectorXd xs(batch.size()), ys(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    xs(static_cast<Eigen::Index>(i)) = batch[i].first;
    ys(static_cast<Eigen::Index>(i)) = batch[i].second;
  }
  Eigen::VectorXd flat;
  mse_and_gradient(net, xs, ys, flat);
  NetGrad g;
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Eigen::MatrixXd gw(net.weights[l].rows(), net.weights[l].cols());
    for (Eigen::Index i = 0; i < gw.rows(); ++i)
      for (Eigen::Index j = 0; j < gw.cols(); ++j) gw(i, j) = flat(pos++);
    Eigen::VectorXd gb(net.biases[l].size());
    for (Eigen::Index i = 0; i < gb.size(); ++i) gb(i) = flat(pos++);
    g.weights.push_back(std::move(gw));
    g.biases.push_back(std::move(gb));
  }
  g.alpha = Eigen::VectorXd(net.alpha.size());
  for (Eigen::Index i = 0; i < g.alpha.size(); ++i) g.alpha(i) = flat(pos++);
  g.beta = flat(pos++);
  return g;
}

// ---------------------------------------------------------------------------
// Training: full-batch (or sequential mini-batch) Adam, chronological
// validation split, early stopping on the best validation loss.

namespace {

template <typename ModelT>
TrainResult<ModelT> train_impl(const ModelT& init, const Dataset& data,
                               const TrainConfig& cfg) {
  if (cfg.patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (cfg.validation_fraction <= 0.0 || cfg.validation_fraction >= 1.0)
    throw std::invalid_argument("validation_fraction must be in (0,1)");
  const std::size_t n = data.size();
  if (n != data.y.size()) throw std::invalid_argument("x/y length mismatch");
  std::size_t n_val = static_cast<std::size_t>(
      std::floor(cfg.validation_fraction * static_cast<double>(n)));
  n_val = std::max<std::size_t>(n_val, 1);
  if (n < n_val + 1)
    throw std::invalid_argument("dataset too small for validation split");
  const std::size_t n_tr = n - n_val;

  TrainResult<ModelT> res;
  res.model = init;
  res.degenerate_inputs =
      std::all_of(data.x.begin(), data.x.end(),
                  [&](double v) { return v == data.x.front(); });

  Eigen::VectorXd xtr(n_tr), ytr(n_tr), xval(n_val), yval(n_val);
  for (std::size_t i = 0; i < n_tr; ++i) {
    xtr(static_cast<Eigen::Index>(i)) = data.x[i];
    ytr(static_cast<Eigen::Index>(i)) = data.y[i];
  }
  for (std::size_t i = 0; i < n_val; ++i) {
    xval(static_cast<Eigen::Index>(i)) = data.x[n_tr + i];
    yval(static_cast<Eigen::Index>(i)) = data.y[n_tr + i];
  }

  ModelT model = init;
  Eigen::VectorXd theta = flatten(model);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd grad(theta.size());
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

  Eigen::VectorXd best_theta = theta;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  long step = 0;

  const Eigen::Index bs = cfg.batch_size > 0
                              ? static_cast<Eigen::Index>(cfg.batch_size)
                              : xtr.size();

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double train_loss = 0.0;
    Eigen::Index done = 0;
    while (done < xtr.size()) {
      const Eigen::Index len = std::min(bs, xtr.size() - done);
      const double loss = mse_and_gradient(model, xtr.segment(done, len),
                                           ytr.segment(done, len), grad);
      train_loss += loss * static_cast<double>(len);
      ++step;
      const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step));
      m = b1 * m + (1.0 - b1) * grad;
      v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
      theta.array() -= cfg.learning_rate * (m.array() / corr1) /
                       ((v.array() / corr2).sqrt() + eps);
      unflatten(model, theta);
      done += len;
    }
    train_loss /= static_cast<double>(xtr.size());

    const Eigen::VectorXd pv = predict_batch(model, xval);
    const double val_loss =
        (pv - yval).squaredNorm() / static_cast<double>(n_val);
    res.history.emplace_back(train_loss, val_loss);

    if (val_loss < best_val) {
      best_val = val_loss;
      best_theta = theta;
      res.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
    if (!std::isfinite(train_loss)) break;  // divergence: caller sees history
  }

  unflatten(res.model, best_theta);
  return res;
}

}  // namespace

TrainResult<NetworkParams> train(const NetworkParams& init, const Dataset& data,
                                 const TrainConfig& cfg) {
  return train_impl(init, data, cfg);
}

TrainResult<VariedDepthNet> train(const VariedDepthNet& init,
                                  const Dataset& data, const TrainConfig& cfg) {
  return train_impl(init, data, cfg);
}

// ---------------------------------------------------------------------------
// Saturation limits (sign/threshold propagation).

double saturation_value(const NetworkParams& net, int direction) {
  if (direction != 1 && direction != -1)
    throw std::invalid_argument("direction must be +1 or -1");
  Eigen::VectorXd s(net.weights[0].rows());
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const double w = net.weights[0](j, 0) * direction;
    if (w == 0.0) {
      s(j) = activate(net.activation, net.biases[0](j));
    } else if (net.activation == Activation::Tanh) {
      s(j) = w > 0 ? 1.0 : -1.0;
    } else {
      s(j) = w > 0 ? 1.0 : 0.0;
    }
  }
  for (std::size_t l = 1; l < net.weights.size(); ++l) {
    s = activate_arr(net.activation,
                     (net.weights[l] * s + net.biases[l]).array())
            .matrix();
  }
  return net.alpha.dot(s) + net.beta;
}

double saturation_value(const VariedDepthNet& net, int direction) {
  double out = 0.0;
  for (std::size_t j = 0; j < net.subnets.size(); ++j)
    out += net.combination(static_cast<Eigen::Index>(j)) *
           saturation_value(net.subnets[j], direction);
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization.

InputMap normalizing_map(double a, double b) {
  if (!(b > a)) throw std::invalid_argument("domain must satisfy b > a");
  InputMap m;
  m.scale = 2.0 / (b - a);
  m.shift = -(a + b) / (b - a);
  return m;
}

double Checkpoint::predict_raw(double x_raw) const {
  const double u = input_map(x_raw);
  return std::visit([&](const auto& m) { return predict(m, u); }, model);
}

namespace {

json net_to_json(const NetworkParams& net) {
  json j;
  j["activation"] = activation_name(net.activation);
  j["layers"] = json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    json layer;
    layer["rows"] = net.weights[l].rows();
    layer["cols"] = net.weights[l].cols();
    std::vector<double> w;
    for (Eigen::Index i = 0; i < net.weights[l].rows(); ++i)
      for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c)
        w.push_back(net.weights[l](i, c));
    layer["weights"] = w;
    layer["biases"] = std::vector<double>(
        net.biases[l].data(), net.biases[l].data() + net.biases[l].size());
    j["layers"].push_back(layer);
  }
  j["alpha"] = std::vector<double>(net.alpha.data(),
                                   net.alpha.data() + net.alpha.size());
  j["beta"] = net.beta;
  return j;
}

NetworkParams net_from_json(const json& j) {
  NetworkParams net;
  net.activation = activation_from_name(j.at("activation").get<std::string>());
  for (const auto& layer : j.at("layers")) {
    const Eigen::Index rows = layer.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = layer.at("cols").get<Eigen::Index>();
    const auto w = layer.at("weights").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols)
      throw std::invalid_argument("checkpoint weight count mismatch");
    Eigen::MatrixXd wm(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index c = 0; c < cols; ++c)
        wm(i, c) = w[static_cast<std::size_t>(i * cols + c)];
    const auto b = layer.at("biases").get<std::vector<double>>();
    net.weights.push_back(std::move(wm));
    net.biases.push_back(
        Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
  }
  const auto a = j.at("alpha").get<std::vector<double>>();
  net.alpha = Eigen::Map<const Eigen::VectorXd>(a.data(),
                                                static_cast<Eigen::Index>(a.size()));
  net.beta = j.at("beta").get<double>();
  net.validate();
  return net;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  json j;
  if (std::holds_alternative<NetworkParams>(ck.model)) {
    j["kind"] = "standard";
    j["net"] = net_to_json(std::get<NetworkParams>(ck.model));
  } else {
    const auto& v = std::get<VariedDepthNet>(ck.model);
    j["kind"] = "varied";
    j["subnets"] = json::array();
    for (const auto& s : v.subnets) j["subnets"].push_back(net_to_json(s));
    j["combination"] = std::vector<double>(
        v.combination.data(), v.combination.data() + v.combination.size());
  }
  j["input_map"] = {{"scale", ck.input_map.scale}, {"shift", ck.input_map.shift}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
  json j = json::parse(in);
  Checkpoint ck;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "standard") {
    ck.model = net_from_json(j.at("net"));
  } else if (kind == "varied") {
    VariedDepthNet v;
    for (const auto& s : j.at("subnets")) v.subnets.push_back(net_from_json(s));
    const auto c = j.at("combination").get<std::vector<double>>();
    v.combination = Eigen::Map<const Eigen::VectorXd>(
        c.data(), static_cast<Eigen::Index>(c.size()));
    v.validate();
    ck.model = std::move(v);
  } else {
    throw std::invalid_argument("unknown checkpoint kind: " + kind);
  }
  ck.input_map.scale = j.at("input_map").at("scale").get<double>();
  ck.input_map.shift = j.at("input_map").at("shift").get<double>();
  return ck;
}

}  // namespace annlab::net
