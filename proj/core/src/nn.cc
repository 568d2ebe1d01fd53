#include "lcdqn/nn.h"

#include <cmath>
#include <sstream>

#include "lcdqn/errors.h"
#include "lcdqn/rng.h"

namespace lcdqn::nn {
namespace {

Shape3 ConvOutput(const Shape3& in, const LayerSpec& spec) {
  return {spec.units, (in.height - spec.kernel_h) / spec.stride_h + 1,
          (in.width - spec.kernel_w) / spec.stride_w + 1};
}

// Patch matrix (positions x channels*kh*kw) of one channel-major sample.
Eigen::MatrixXd Im2Col(const double* x, const Shape3& in, const Shape3& out,
                       const LayerSpec& spec) {
  const int k = in.channels * spec.kernel_h * spec.kernel_w;
  Eigen::MatrixXd patches(out.height * out.width, k);
  for (int oi = 0; oi < out.height; ++oi) {
    for (int oj = 0; oj < out.width; ++oj) {
      const int p = oi * out.width + oj;
      int col = 0;
      for (int c = 0; c < in.channels; ++c) {
        for (int ki = 0; ki < spec.kernel_h; ++ki) {
          const double* row = x + c * in.height * in.width +
                              (oi * spec.stride_h + ki) * in.width +
                              oj * spec.stride_w;
          for (int kj = 0; kj < spec.kernel_w; ++kj) patches(p, col++) = row[kj];
        }
      }
    }
  }
  return patches;
}

void Col2ImAdd(const Eigen::MatrixXd& patches, const Shape3& in,
               const Shape3& out, const LayerSpec& spec, double* dx) {
  for (int oi = 0; oi < out.height; ++oi) {
    for (int oj = 0; oj < out.width; ++oj) {
      const int p = oi * out.width + oj;
      int col = 0;
      for (int c = 0; c < in.channels; ++c) {
        for (int ki = 0; ki < spec.kernel_h; ++ki) {
          double* row = dx + c * in.height * in.width +
                        (oi * spec.stride_h + ki) * in.width +
                        oj * spec.stride_w;
          for (int kj = 0; kj < spec.kernel_w; ++kj) row[kj] += patches(p, col++);
        }
      }
    }
  }
}

Eigen::MatrixXd ApplyActivation(const Eigen::MatrixXd& z, Activation act) {
  if (act == Activation::kRelu) return z.cwiseMax(0.0);
  return z;
}

// Shared forward pass; stores intermediates when `cache` is non-null.
Eigen::MatrixXd RunForward(const NetworkParams& params,
                           const Eigen::MatrixXd& input, ForwardCache* cache) {
  const Architecture& arch = params.arch;
  if (input.rows() != arch.InputSize()) {
    throw UsageError("network input has " + std::to_string(input.rows()) +
                     " features, architecture expects " +
                     std::to_string(arch.InputSize()));
  }
  const auto shapes = arch.LayerShapes();
  const Eigen::Index batch = input.cols();
  if (cache != nullptr) {
    cache->fingerprint = params.fingerprint;
    cache->version = params.version;
    cache->batch = static_cast<int>(batch);
    cache->inputs.clear();
    cache->pre.clear();
    cache->valid = true;
  }

  Eigen::MatrixXd x = input;
  for (size_t l = 0; l < arch.layers.size(); ++l) {
    const LayerSpec& spec = arch.layers[l];
    const Eigen::MatrixXd* t = &params.tensors[params.first_tensor[l]];
    Eigen::MatrixXd z;
    switch (spec.kind) {
      case LayerKind::kDense:
        z = t[0] * x;
        z.colwise() += t[1].col(0);
        break;
      case LayerKind::kConv: {
        const Shape3& in = shapes[l];
        const Shape3& out = shapes[l + 1];
        const int positions = out.height * out.width;
        z.resize(out.Size(), batch);
        for (Eigen::Index b = 0; b < batch; ++b) {
          const Eigen::MatrixXd patches = Im2Col(x.col(b).data(), in, out, spec);
          Eigen::Map<Eigen::MatrixXd> zb(z.col(b).data(), positions, spec.units);
          zb.noalias() = patches * t[0].transpose();
          zb.rowwise() += t[1].col(0).transpose();
        }
        break;
      }
      case LayerKind::kDuelingHead: {
        Eigen::RowVectorXd value = t[0] * x;
        value.array() += t[1](0, 0);
        Eigen::MatrixXd adv = t[2] * x;
        adv.colwise() += t[3].col(0);
        z = DuelingCombine(value, adv);
        break;
      }
    }
    Eigen::MatrixXd y = ApplyActivation(z, spec.activation);
    if (cache != nullptr) {
      cache->inputs.push_back(std::move(x));
      cache->pre.push_back(std::move(z));
    }
    x = std::move(y);
  }
  return x;
}

void Check(bool ok, const std::string& what) {
  if (!ok) throw UsageError("invalid architecture: " + what);
}

}  // namespace

std::string_view ToString(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kConv:
      return "conv";
    case LayerKind::kDuelingHead:
      return "dueling_head";
  }
  return "unknown";
}

std::string_view ToString(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "linear";
}

LayerKind ParseLayerKind(std::string_view name) {
  if (name == "dense") return LayerKind::kDense;
  if (name == "conv") return LayerKind::kConv;
  if (name == "dueling_head") return LayerKind::kDuelingHead;
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

Activation ParseActivation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "linear") return Activation::kLinear;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

LayerSpec LayerSpec::Dense(int units, Activation activation) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.units = units;
  s.activation = activation;
  return s;
}

LayerSpec LayerSpec::Conv(int filters, int kernel_h, int kernel_w, int stride_h,
                          int stride_w, Activation activation) {
  LayerSpec s;
  s.kind = LayerKind::kConv;
  s.units = filters;
  s.kernel_h = kernel_h;
  s.kernel_w = kernel_w;
  s.stride_h = stride_h;
  s.stride_w = stride_w;
  s.activation = activation;
  return s;
}

LayerSpec LayerSpec::DuelingHead(int actions) {
  LayerSpec s;
  s.kind = LayerKind::kDuelingHead;
  s.units = actions;
  s.activation = Activation::kLinear;
  return s;
}

void Architecture::Validate() const {
  Check(input.channels > 0 && input.height > 0 && input.width > 0,
        "input shape must be positive");
  Check(!layers.empty(), "no layers");
  Shape3 shape = input;
  for (size_t l = 0; l < layers.size(); ++l) {
    const LayerSpec& s = layers[l];
    Check(s.units > 0, "layer " + std::to_string(l) + " has no units");
    switch (s.kind) {
      case LayerKind::kDense:
        shape = {s.units, 1, 1};
        break;
      case LayerKind::kConv:
        Check(s.kernel_h > 0 && s.kernel_w > 0 && s.stride_h > 0 &&
                  s.stride_w > 0,
              "conv layer " + std::to_string(l) + " kernel/stride must be > 0");
        Check(shape.height >= s.kernel_h && shape.width >= s.kernel_w,
              "conv layer " + std::to_string(l) + " kernel exceeds its input");
        shape = ConvOutput(shape, s);
        break;
      case LayerKind::kDuelingHead:
        Check(l + 1 == layers.size(), "dueling head must be the last layer");
        Check(s.activation == Activation::kLinear,
              "dueling head must be linear");
        shape = {s.units, 1, 1};
        break;
    }
  }
}

std::vector<Shape3> Architecture::LayerShapes() const {
  std::vector<Shape3> shapes{input};
  for (const LayerSpec& s : layers) {
    const Shape3& in = shapes.back();
    shapes.push_back(s.kind == LayerKind::kConv ? ConvOutput(in, s)
                                                : Shape3{s.units, 1, 1});
  }
  return shapes;
}

int Architecture::OutputSize() const { return LayerShapes().back().Size(); }

std::string Architecture::Describe() const {
  std::ostringstream os;
  os << "in=" << input.channels << 'x' << input.height << 'x' << input.width;
  for (const LayerSpec& s : layers) {
    os << ';' << ToString(s.kind) << '(' << s.units;
    if (s.kind == LayerKind::kConv) {
      os << ',' << s.kernel_h << 'x' << s.kernel_w << ",s" << s.stride_h << 'x'
         << s.stride_w;
    }
    os << ',' << ToString(s.activation) << ')';
  }
  return os.str();
}

std::string Architecture::Fingerprint() const {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : Describe()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

Architecture MakeListArchitecture(int input_size, int actions, int hidden,
                                  int hidden_layers) {
  Architecture arch;
  arch.input = {input_size, 1, 1};
  for (int i = 0; i < hidden_layers; ++i) {
    arch.layers.push_back(LayerSpec::Dense(hidden, Activation::kRelu));
  }
  arch.layers.push_back(LayerSpec::DuelingHead(actions));
  return arch;
}

Architecture MakeGridArchitecture(int rows, int cols, int actions, int hidden) {
  Architecture arch;
  arch.input = {2, rows, cols};
  arch.layers.push_back(LayerSpec::Conv(16, 1, 5, 1, 2, Activation::kRelu));
  arch.layers.push_back(LayerSpec::Conv(32, 1, 3, 1, 2, Activation::kRelu));
  arch.layers.push_back(LayerSpec::Dense(hidden, Activation::kRelu));
  arch.layers.push_back(LayerSpec::DuelingHead(actions));
  return arch;
}

std::size_t NetworkParams::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

bool NetworkParams::AllFinite() const {
  for (const auto& t : tensors) {
    if (!t.allFinite()) return false;
  }
  return true;
}

void NetworkParams::CopyFrom(const NetworkParams& other) {
  if (other.fingerprint != fingerprint) {
    throw UsageError("cannot copy parameters between architectures " +
                     other.fingerprint + " and " + fingerprint);
  }
  tensors = other.tensors;
  ++version;
}

Gradients ZeroGradients(const NetworkParams& params) {
  Gradients g;
  g.reserve(params.tensors.size());
  for (const auto& t : params.tensors) {
    g.push_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));
  }
  return g;
}

NetworkParams Init(const Architecture& arch, std::uint64_t seed) {
  arch.Validate();
  NetworkParams params;
  params.arch = arch;
  params.fingerprint = arch.Fingerprint();
  Rng rng(seed);
  const auto shapes = arch.LayerShapes();

  auto uniform = [&](int rows, int cols, double bound) {
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w.data()[i] = UniformReal(rng, -bound, bound);
    }
    return w;
  };

  for (size_t l = 0; l < arch.layers.size(); ++l) {
    const LayerSpec& s = arch.layers[l];
    const Shape3& in = shapes[l];
    params.first_tensor.push_back(static_cast<int>(params.tensors.size()));
    const int fan_in = s.kind == LayerKind::kConv
                           ? in.channels * s.kernel_h * s.kernel_w
                           : in.Size();
    const double bound = s.activation == Activation::kRelu
                             ? std::sqrt(6.0 / fan_in)
                             : std::sqrt(3.0 / fan_in);
    if (s.kind == LayerKind::kDuelingHead) {
      params.tensors.push_back(uniform(1, fan_in, bound));
      params.tensors.push_back(Eigen::MatrixXd::Zero(1, 1));
      params.tensors.push_back(uniform(s.units, fan_in, bound));
      params.tensors.push_back(Eigen::MatrixXd::Zero(s.units, 1));
    } else {
      params.tensors.push_back(uniform(s.units, fan_in, bound));
      params.tensors.push_back(Eigen::MatrixXd::Zero(s.units, 1));
    }
  }
  return params;
}

Eigen::MatrixXd DuelingCombine(const Eigen::RowVectorXd& value,
                               const Eigen::MatrixXd& advantage) {
  Eigen::MatrixXd q = advantage;
  const Eigen::RowVectorXd mean = advantage.colwise().mean();
  q.rowwise() += value - mean;
  return q;
}

ForwardResult Forward(const NetworkParams& params,
                      const Eigen::MatrixXd& input) {
  ForwardResult r;
  r.q = RunForward(params, input, &r.cache);
  return r;
}

Eigen::MatrixXd Predict(const NetworkParams& params,
                        const Eigen::MatrixXd& input) {
  return RunForward(params, input, nullptr);
}

Eigen::VectorXd PredictOne(const NetworkParams& params,
                           const std::vector<double>& input) {
  const Eigen::Map<const Eigen::MatrixXd> x(input.data(), input.size(), 1);
  return RunForward(params, x, nullptr).col(0);
}

Gradients Backward(const NetworkParams& params, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_grad) {
  if (!cache.valid || cache.fingerprint != params.fingerprint ||
      cache.version != params.version) {
    throw UsageError("stale forward cache: parameters changed since Forward");
  }
  const Architecture& arch = params.arch;
  if (output_grad.rows() != arch.OutputSize() ||
      output_grad.cols() != cache.batch) {
    throw UsageError("output gradient shape does not match the forward pass");
  }
  const auto shapes = arch.LayerShapes();
  Gradients grads(params.tensors.size());
  Eigen::MatrixXd g = output_grad;

  for (int l = static_cast<int>(arch.layers.size()) - 1; l >= 0; --l) {
    const LayerSpec& spec = arch.layers[l];
    const int first = params.first_tensor[l];
    const Eigen::MatrixXd* t = &params.tensors[first];
    const Eigen::MatrixXd& x = cache.inputs[l];
    if (spec.activation == Activation::kRelu) {
      g = g.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
    }
    const bool need_input_grad = l > 0;
    Eigen::MatrixXd dx;
    switch (spec.kind) {
      case LayerKind::kDense:
        grads[first] = g * x.transpose();
        grads[first + 1] = g.rowwise().sum();
        if (need_input_grad) dx = t[0].transpose() * g;
        break;
      case LayerKind::kConv: {
        const Shape3& in = shapes[l];
        const Shape3& out = shapes[l + 1];
        const int positions = out.height * out.width;
        grads[first] = Eigen::MatrixXd::Zero(t[0].rows(), t[0].cols());
        grads[first + 1] = Eigen::MatrixXd::Zero(spec.units, 1);
        if (need_input_grad) dx = Eigen::MatrixXd::Zero(x.rows(), x.cols());
        for (Eigen::Index b = 0; b < x.cols(); ++b) {
          const Eigen::MatrixXd patches = Im2Col(x.col(b).data(), in, out, spec);
          const Eigen::Map<const Eigen::MatrixXd> gb(g.col(b).data(), positions,
                                                     spec.units);
          grads[first].noalias() += gb.transpose() * patches;
          grads[first + 1] += gb.colwise().sum().transpose();
          if (need_input_grad) {
            const Eigen::MatrixXd dpatches = gb * t[0];
            Col2ImAdd(dpatches, in, out, spec, dx.col(b).data());
          }
        }
        break;
      }
      case LayerKind::kDuelingHead: {
        const Eigen::RowVectorXd dv = g.colwise().sum();
        Eigen::MatrixXd da = g;
        da.rowwise() -= g.colwise().mean();
        grads[first] = dv * x.transpose();
        grads[first + 1] = Eigen::MatrixXd::Constant(1, 1, dv.sum());
        grads[first + 2] = da * x.transpose();
        grads[first + 3] = da.rowwise().sum();
        if (need_input_grad) {
          dx = t[0].transpose() * dv + t[2].transpose() * da;
        }
        break;
      }
    }
    g = std::move(dx);
  }
  return grads;
}

AdamState MakeAdam(const NetworkParams& params, double learning_rate) {
  AdamState s;
  s.m = ZeroGradients(params);
  s.v = ZeroGradients(params);
  s.learning_rate = learning_rate;
  return s;
}

void AdamStep(NetworkParams& params, const Gradients& grads, AdamState& state) {
  if (grads.size() != params.tensors.size() ||
      state.m.size() != params.tensors.size()) {
    throw UsageError("AdamStep: gradient/state layout does not match params");
  }
  for (size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].rows() != params.tensors[i].rows() ||
        grads[i].cols() != params.tensors[i].cols()) {
      throw UsageError("AdamStep: gradient tensor " + std::to_string(i) +
                       " has the wrong shape");
    }
    if (!grads[i].allFinite()) {
      throw TrainingError("non-finite gradient in tensor " + std::to_string(i) +
                          " at Adam step " + std::to_string(state.step + 1));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (size_t i = 0; i < grads.size(); ++i) {
    Eigen::MatrixXd& m = state.m[i];
    Eigen::MatrixXd& v = state.v[i];
    const Eigen::MatrixXd& g = grads[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v.array() = state.beta2 * v.array() + (1.0 - state.beta2) * g.array().square();
    params.tensors[i].array() -= state.learning_rate * (m.array() / c1) /
                                 ((v.array() / c2).sqrt() + state.epsilon);
  }
  ++params.version;
}

}  // namespace lcdqn::nn
