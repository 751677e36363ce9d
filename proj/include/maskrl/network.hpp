#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskrl/common.hpp"
#include "maskrl/tensor.hpp"

namespace maskrl {

enum class LayerKind { Dense, Conv2d, ReLU, Flatten, Dropout, BatchNorm };

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  int in = 0;      // Dense: input features; Conv2d: input channels; BatchNorm: features
  int out = 0;     // Dense: output features; Conv2d: output channels
  int kernel = 0;
  int stride = 1;
  float rate = 0.0f;  // Dropout keep-out probability

  static LayerSpec dense(int in, int out) { return {LayerKind::Dense, in, out, 0, 1, 0.0f}; }
  static LayerSpec conv2d(int in_ch, int out_ch, int kernel, int stride) {
    return {LayerKind::Conv2d, in_ch, out_ch, kernel, stride, 0.0f};
  }
  static LayerSpec relu() { return {LayerKind::ReLU, 0, 0, 0, 1, 0.0f}; }
  static LayerSpec flatten() { return {LayerKind::Flatten, 0, 0, 0, 1, 0.0f}; }
  static LayerSpec dropout(float rate) { return {LayerKind::Dropout, 0, 0, 0, 1, rate}; }
  static LayerSpec batchnorm(int features) {
    return {LayerKind::BatchNorm, features, features, 0, 1, 0.0f};
  }
  bool operator==(const LayerSpec&) const = default;
};

std::string layer_name(const LayerSpec& spec, int index);

// weight/bias pair; for BatchNorm w is gamma, b is beta
struct LayerParams {
  Tensor w;
  Tensor b;
  Tensor running_mean;  // BatchNorm only
  Tensor running_var;   // BatchNorm only
};

struct NetworkParams {
  std::vector<LayerParams> layers;
  bool training_mode = false;
  uint64_t version = 0;  // bumped on every parameter mutation; guards stale caches

  size_t parameter_count() const;
};

struct Gradients {
  std::vector<LayerParams> layers;  // w/b slots only
};

struct LayerCache {
  Tensor x;     // layer input
  Tensor aux;   // Dropout: mask; BatchNorm: normalized input
  Tensor mean;  // BatchNorm batch mean
  Tensor inv_std;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Tensor y;
  bool training = false;
  uint64_t version = 0;
};

// static shape propagation; throws UsageError on incompatible adjacent layers
std::vector<int> output_shape(const std::vector<LayerSpec>& spec,
                              const std::vector<int>& in_shape);

// Uniform(-b, b) with b = sqrt(6 / (fan_in + fan_out)); biases zero;
// BatchNorm gamma 1, beta 0, running stats (0, 1). Deterministic per seed.
NetworkParams xavier_init(const std::vector<LayerSpec>& spec, uint64_t rng_seed);

// Training-path forward. Dropout and BatchNorm batch statistics are active
// only when training=true; rng is required iff training with Dropout layers.
// Updates BatchNorm running statistics when training.
Tensor forward(const std::vector<LayerSpec>& spec, NetworkParams& params, const Tensor& x,
               bool training, Rng* rng = nullptr, ForwardCache* cache = nullptr);

// Inference-path forward on frozen parameters; safe to call concurrently.
Tensor infer(const std::vector<LayerSpec>& spec, const NetworkParams& params,
             const Tensor& x);

// Exact reverse-mode gradients of the cached forward. dx may be null when the
// input gradient is not needed. Throws UsageError when the cache predates the
// current parameter version.
void backward(const std::vector<LayerSpec>& spec, const NetworkParams& params,
              const ForwardCache& cache, const Tensor& dy, Gradients& grads,
              Tensor* dx = nullptr);

Gradients zero_gradients(const NetworkParams& params);

struct AdamState {
  float lr = 3e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  int64_t step = 0;
  std::vector<LayerParams> m;
  std::vector<LayerParams> v;
};

AdamState make_adam(const NetworkParams& params, float lr);

// bias-corrected Adam; throws NumericError naming the layer on a non-finite
// gradient
void adam_step(AdamState& adam, NetworkParams& params, const Gradients& grads,
               const std::vector<LayerSpec>& spec);

// max-subtracted stable softmax; throws UsageError on empty input
std::vector<float> softmax(const float* logits, int n);
std::vector<float> softmax(const std::vector<float>& logits);

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

// binary cross-entropy with p clamped to [1e-7, 1 - 1e-7]
float bce_loss(float p, float y);

// d(bce)/d(logit) for p = sigmoid(logit)
inline float bce_dlogit(float p, float y) { return p - y; }

// spec + params bundle used by the policy and classifier networks
struct Net {
  std::vector<LayerSpec> spec;
  NetworkParams params;

  Net() = default;
  Net(std::vector<LayerSpec> s, uint64_t seed)
      : spec(std::move(s)), params(xavier_init(spec, seed)) {}

  Tensor infer(const Tensor& x) const { return maskrl::infer(spec, params, x); }
  Tensor train_forward(const Tensor& x, Rng* rng, ForwardCache& cache) {
    return maskrl::forward(spec, params, x, true, rng, &cache);
  }
};

}  // namespace maskrl
