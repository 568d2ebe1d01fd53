#ifndef LCDQN_NN_H_
#define LCDQN_NN_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

// Minimal feed-forward network engine: dense and 2D convolution layers,
// a dueling Q head, reverse-mode gradients and Adam. Batches are column
// matrices (features x batch); everything is double precision.
namespace lcdqn::nn {

enum class LayerKind { kDense, kConv, kDuelingHead };
enum class Activation { kRelu, kLinear };

std::string_view ToString(LayerKind kind);
std::string_view ToString(Activation activation);
LayerKind ParseLayerKind(std::string_view name);
Activation ParseActivation(std::string_view name);

// Channel-major (channels, height, width) tensor shape. Flat vectors use
// index c * height * width + h * width + w.
struct Shape3 {
  int channels = 1;
  int height = 1;
  int width = 1;

  int Size() const { return channels * height * width; }
  bool operator==(const Shape3&) const = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  // Dense: units. Conv: filters. Dueling head: action count.
  int units = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride_h = 1;
  int stride_w = 1;
  Activation activation = Activation::kLinear;

  static LayerSpec Dense(int units, Activation activation);
  static LayerSpec Conv(int filters, int kernel_h, int kernel_w, int stride_h,
                        int stride_w, Activation activation);
  static LayerSpec DuelingHead(int actions);

  bool operator==(const LayerSpec&) const = default;
};

struct Architecture {
  Shape3 input;
  std::vector<LayerSpec> layers;

  // Throws UsageError on incompatible consecutive dimensions.
  void Validate() const;
  // Input shape seen by each layer, plus the final output shape at the end.
  std::vector<Shape3> LayerShapes() const;
  int InputSize() const { return input.Size(); }
  int OutputSize() const;
  // Stable hex digest of the canonical description.
  std::string Fingerprint() const;
  std::string Describe() const;

  bool operator==(const Architecture&) const = default;
};

// Three relu layers of `hidden` units and a dueling head.
Architecture MakeListArchitecture(int input_size, int actions, int hidden = 50,
                                  int hidden_layers = 3);
// conv(16, 1x5, stride 2) -> conv(32, 1x3, stride 2) -> dense -> dueling.
Architecture MakeGridArchitecture(int rows, int cols, int actions,
                                  int hidden = 50);

// All trainable tensors of a network, flattened across layers:
//   dense / conv:  W, b
//   dueling head:  W_value (1 x in), b_value, W_adv (A x in), b_adv
// Conv weights are (filters x channels*kh*kw).
struct NetworkParams {
  Architecture arch;
  std::string fingerprint;
  std::vector<Eigen::MatrixXd> tensors;
  std::vector<int> first_tensor;  // per layer index into tensors
  // Incremented on every in-place update; caches remember the version they
  // were produced under.
  std::uint64_t version = 0;

  std::size_t ParameterCount() const;
  bool AllFinite() const;
  // Copies all tensors (and bumps the version) from a matching network.
  void CopyFrom(const NetworkParams& other);
};

using Gradients = std::vector<Eigen::MatrixXd>;

Gradients ZeroGradients(const NetworkParams& params);

// He-uniform weights (bound sqrt(6 / fan_in)) for relu layers, LeCun-uniform
// (sqrt(3 / fan_in)) for linear ones, zero biases.
NetworkParams Init(const Architecture& arch, std::uint64_t seed);

struct ForwardCache {
  std::string fingerprint;
  std::uint64_t version = 0;
  int batch = 0;
  std::vector<Eigen::MatrixXd> inputs;  // input of every layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of every layer
  bool valid = false;
};

struct ForwardResult {
  Eigen::MatrixXd q;  // actions x batch
  ForwardCache cache;
};

// Throws UsageError if input.rows() differs from the architecture input.
ForwardResult Forward(const NetworkParams& params, const Eigen::MatrixXd& input);
// Forward without keeping intermediates.
Eigen::MatrixXd Predict(const NetworkParams& params,
                        const Eigen::MatrixXd& input);
Eigen::VectorXd PredictOne(const NetworkParams& params,
                           const std::vector<double>& input);

// Gradients of a scalar loss whose derivative w.r.t. the outputs is
// `output_grad` (actions x batch). Throws UsageError if the cache does not
// belong to the current parameter version.
Gradients Backward(const NetworkParams& params, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_grad);

// Q = V + A - mean(A) for every column.
Eigen::MatrixXd DuelingCombine(const Eigen::RowVectorXd& value,
                               const Eigen::MatrixXd& advantage);

struct AdamState {
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
  std::uint64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState MakeAdam(const NetworkParams& params, double learning_rate);

// Bias-corrected Adam update. Throws TrainingError on a non-finite gradient,
// leaving params and state untouched.
void AdamStep(NetworkParams& params, const Gradients& grads, AdamState& state);

}  // namespace lcdqn::nn

#endif  // LCDQN_NN_H_
