#pragma once

// From-scratch MLP engine: scalar-input networks with tanh/sigmoid
// activations, exact reverse-mode gradients, full-batch Adam training
// with chronological early stopping, and the varied-depth combination
// architecture (a trainable linear mix of subnetworks of distinct
// depths).

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace annlab::net {

enum class Activation { Tanh, Sigmoid };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

inline double activate(Activation a, double z) {
  return a == Activation::Tanh ? std::tanh(z) : 1.0 / (1.0 + std::exp(-z));
}

struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t size() const { return x.size(); }
};

struct NetworkParams {
  std::vector<Eigen::MatrixXd> weights;  // layer l: m_l x m_{l-1}, m_0 = 1
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd alpha;  // readout
  double beta = 0.0;
  Activation activation = Activation::Tanh;

  int depth() const { return static_cast<int>(weights.size()); }
  int hidden_size() const;  // M = sum of layer widths
  std::vector<int> widths() const;
  void validate() const;  // dimension chaining, finiteness
};

// Symmetric uniform init (Glorot bounds), biases zero.
NetworkParams random_net(const std::vector<int>& widths, Activation act,
                         std::uint64_t seed);

struct ForwardTrace {
  std::vector<Eigen::VectorXd> preacts;  // z^(1)..z^(L)
  std::vector<Eigen::VectorXd> hidden;   // h^(1)..h^(L)
  double output = 0.0;
};

ForwardTrace forward(const NetworkParams& net, double x);
double predict(const NetworkParams& net, double x);
Eigen::VectorXd predict_batch(const NetworkParams& net,
                              const Eigen::VectorXd& xs);

struct NetGrad {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd alpha;
  double beta = 0.0;
};

// Exact reverse-mode gradient of mean squared error over the batch.
NetGrad gradient(const NetworkParams& net,
                 const std::vector<std::pair<double, double>>& batch);

struct VariedDepthNet {
  std::vector<NetworkParams> subnets;  // pairwise-distinct depths
  Eigen::VectorXd combination;         // trainable mixing weights

  void validate() const;
};

VariedDepthNet build_varied_depth(const std::vector<int>& depths, int width,
                                  Activation act, std::uint64_t seed);

double predict(const VariedDepthNet& net, double x);
Eigen::VectorXd predict_batch(const VariedDepthNet& net,
                              const Eigen::VectorXd& xs);

struct TrainConfig {
  double learning_rate = 1e-2;
  int max_epochs = 20000;
  int batch_size = 0;  // 0 = full batch
  double validation_fraction = 0.2;
  int patience = 200;
  std::uint64_t seed = 0;
};

template <typename ModelT>
struct TrainResult {
  ModelT model;  // parameters of the best validation epoch
  std::vector<std::pair<double, double>> history;  // (train, val) per epoch
  int best_epoch = 0;
  bool degenerate_inputs = false;  // all training x identical
};

TrainResult<NetworkParams> train(const NetworkParams& init,
                                 const Dataset& data, const TrainConfig& cfg);
TrainResult<VariedDepthNet> train(const VariedDepthNet& init,
                                  const Dataset& data, const TrainConfig& cfg);

// Flat parameter views, used by training and the gradient checks.
Eigen::VectorXd flatten(const NetworkParams& net);
Eigen::VectorXd flatten(const VariedDepthNet& net);
void unflatten(NetworkParams& net, const Eigen::VectorXd& theta);
void unflatten(VariedDepthNet& net, const Eigen::VectorXd& theta);

// MSE over the dataset and its gradient in flat layout.
double mse_and_gradient(const NetworkParams& net, const Eigen::VectorXd& xs,
                        const Eigen::VectorXd& ys, Eigen::VectorXd& grad);
double mse_and_gradient(const VariedDepthNet& net, const Eigen::VectorXd& xs,
                        const Eigen::VectorXd& ys, Eigen::VectorXd& grad);

// Limit value of the network as x -> +inf (direction +1) or -inf (-1),
// by sign/threshold propagation of the first-layer saturation states.
double saturation_value(const NetworkParams& net, int direction);
double saturation_value(const VariedDepthNet& net, int direction);

// Affine input map; training windows are normalized to [-1, 1].
struct InputMap {
  double scale = 1.0;
  double shift = 0.0;
  double operator()(double x) const { return scale * x + shift; }
  double inverse(double u) const { return (u - shift) / scale; }
};

InputMap normalizing_map(double a, double b);

struct Checkpoint {
  std::variant<NetworkParams, VariedDepthNet> model;
  InputMap input_map;

  double predict_raw(double x_raw) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace annlab::net
