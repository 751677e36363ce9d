#include "maskrl/network.hpp"

#include <algorithm>
#include <cmath>

#include "maskrl/kernels.hpp"

namespace maskrl {

namespace {

constexpr float kBatchNormEps = 1e-5f;
constexpr float kBatchNormMomentum = 0.1f;

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Dense: return "Dense";
    case LayerKind::Conv2d: return "Conv2d";
    case LayerKind::ReLU: return "ReLU";
    case LayerKind::Flatten: return "Flatten";
    case LayerKind::Dropout: return "Dropout";
    case LayerKind::BatchNorm: return "BatchNorm";
  }
  return "?";
}

size_t flat_features(const std::vector<int>& shape) {
  size_t n = 1;
  for (size_t i = 1; i < shape.size(); ++i) n *= static_cast<size_t>(shape[i]);
  return n;
}

}  // namespace

std::string layer_name(const LayerSpec& spec, int index) {
  return std::string(kind_name(spec.kind)) + "[" + std::to_string(index) + "]";
}

size_t NetworkParams::parameter_count() const {
  size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

std::vector<int> output_shape(const std::vector<LayerSpec>& spec,
                              const std::vector<int>& in_shape) {
  std::vector<int> s = in_shape;
  for (size_t li = 0; li < spec.size(); ++li) {
    const LayerSpec& l = spec[li];
    switch (l.kind) {
      case LayerKind::Dense:
        if (s.size() != 2 || s[1] != l.in)
          throw UsageError(layer_name(l, static_cast<int>(li)) + ": expected [B," +
                           std::to_string(l.in) + "] input");
        s = {s[0], l.out};
        break;
      case LayerKind::Conv2d: {
        if (s.size() != 4 || s[1] != l.in)
          throw UsageError(layer_name(l, static_cast<int>(li)) + ": expected 4-d input with " +
                           std::to_string(l.in) + " channels");
        int oh = kernels::conv_out_extent(s[2], l.kernel, l.stride);
        int ow = kernels::conv_out_extent(s[3], l.kernel, l.stride);
        if (oh <= 0 || ow <= 0)
          throw UsageError(layer_name(l, static_cast<int>(li)) + ": input " +
                           std::to_string(s[2]) + "x" + std::to_string(s[3]) +
                           " too small for kernel " + std::to_string(l.kernel));
        s = {s[0], l.out, oh, ow};
        break;
      }
      case LayerKind::ReLU:
      case LayerKind::Dropout:
        break;
      case LayerKind::Flatten:
        if (s.size() < 2) throw UsageError("Flatten: expected batched input");
        s = {s[0], static_cast<int>(flat_features(s))};
        break;
      case LayerKind::BatchNorm:
        if (s.size() != 2 && s.size() != 4)
          throw UsageError("BatchNorm: expected 2-d or 4-d input");
        if (s[1] != l.in)
          throw UsageError(layer_name(l, static_cast<int>(li)) + ": expected " +
                           std::to_string(l.in) + " features, got " + std::to_string(s[1]));
        break;
    }
  }
  return s;
}

NetworkParams xavier_init(const std::vector<LayerSpec>& spec, uint64_t rng_seed) {
  Rng rng(rng_seed);
  NetworkParams params;
  params.layers.resize(spec.size());
  for (size_t li = 0; li < spec.size(); ++li) {
    const LayerSpec& l = spec[li];
    LayerParams& p = params.layers[li];
    switch (l.kind) {
      case LayerKind::Dense: {
        const float bound = std::sqrt(6.0f / static_cast<float>(l.in + l.out));
        p.w = Tensor({l.in, l.out});
        for (auto& v : p.w.data) v = rng.uniform_sym(bound);
        p.b = Tensor({l.out});
        break;
      }
      case LayerKind::Conv2d: {
        const int fan_in = l.in * l.kernel * l.kernel;
        const int fan_out = l.out * l.kernel * l.kernel;
        const float bound = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
        p.w = Tensor({l.out, l.in, l.kernel, l.kernel});
        for (auto& v : p.w.data) v = rng.uniform_sym(bound);
        p.b = Tensor({l.out});
        break;
      }
      case LayerKind::BatchNorm:
        p.w = Tensor({l.in});
        p.w.fill(1.0f);
        p.b = Tensor({l.in});
        p.running_mean = Tensor({l.in});
        p.running_var = Tensor({l.in});
        p.running_var.fill(1.0f);
        break;
      default:
        break;
    }
  }
  return params;
}

namespace {

// BatchNorm feature geometry: 2-d input normalizes per column over the batch,
// 4-d input per channel over batch and spatial positions.
struct BnView {
  int groups;   // batch (* spatial) sample count per feature
  int features;
  int inner;    // contiguous run per (sample, feature) block: spatial size or 1
};

BnView bn_view(const Tensor& x) {
  if (x.rank() == 2) return {x.dim(0), x.dim(1), 1};
  return {x.dim(0), x.dim(1), x.dim(2) * x.dim(3)};
}

Tensor layer_forward(const LayerSpec& l, LayerParams& p, const Tensor& x, bool training,
                     Rng* rng, LayerCache* cache, int layer_index) {
  switch (l.kind) {
    case LayerKind::Dense: {
      if (x.rank() != 2 || x.dim(1) != l.in)
        throw UsageError(layer_name(l, layer_index) + ": input shape mismatch");
      Tensor y({x.dim(0), l.out});
      kernels::dense_forward(x, p.w, p.b, y);
      return y;
    }
    case LayerKind::Conv2d: {
      if (x.rank() != 4 || x.dim(1) != l.in)
        throw UsageError(layer_name(l, layer_index) + ": input shape mismatch");
      Tensor y({x.dim(0), l.out, kernels::conv_out_extent(x.dim(2), l.kernel, l.stride),
                kernels::conv_out_extent(x.dim(3), l.kernel, l.stride)});
      kernels::conv2d_forward(x, p.w, p.b, l.stride, y);
      return y;
    }
    case LayerKind::ReLU: {
      Tensor y = x;
      for (auto& v : y.data) v = v > 0.0f ? v : 0.0f;
      return y;
    }
    case LayerKind::Flatten: {
      Tensor y = x;
      y.shape = {x.dim(0), static_cast<int>(flat_features(x.shape))};
      return y;
    }
    case LayerKind::Dropout: {
      if (!training || l.rate == 0.0f) return x;
      if (rng == nullptr)
        throw UsageError(layer_name(l, layer_index) + ": training forward needs an rng");
      const float keep_scale = 1.0f / (1.0f - l.rate);
      Tensor mask({static_cast<int>(x.size())});
      for (auto& m : mask.data) m = rng->uniform() < l.rate ? 0.0f : keep_scale;
      Tensor y = x;
      for (size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
      if (cache) cache->aux = std::move(mask);
      return y;
    }
    case LayerKind::BatchNorm: {
      const BnView v = bn_view(x);
      if (v.features != l.in)
        throw UsageError(layer_name(l, layer_index) + ": input shape mismatch");
      Tensor y = x;
      Tensor mean({v.features}), inv_std({v.features});
      const int n = v.groups * v.inner;
      if (training) {
        for (int f = 0; f < v.features; ++f) {
          double sum = 0.0;
          for (int g = 0; g < v.groups; ++g) {
            const float* block = x.ptr() + (static_cast<size_t>(g) * v.features + f) * v.inner;
            for (int i = 0; i < v.inner; ++i) sum += block[i];
          }
          const float mu = static_cast<float>(sum / n);
          double sq = 0.0;
          for (int g = 0; g < v.groups; ++g) {
            const float* block = x.ptr() + (static_cast<size_t>(g) * v.features + f) * v.inner;
            for (int i = 0; i < v.inner; ++i) {
              const double d = block[i] - mu;
              sq += d * d;
            }
          }
          const float var = static_cast<float>(sq / n);
          mean[static_cast<size_t>(f)] = mu;
          inv_std[static_cast<size_t>(f)] = 1.0f / std::sqrt(var + kBatchNormEps);
          const float unbiased = n > 1 ? static_cast<float>(sq / (n - 1)) : var;
          p.running_mean[static_cast<size_t>(f)] =
              (1.0f - kBatchNormMomentum) * p.running_mean[static_cast<size_t>(f)] +
              kBatchNormMomentum * mu;
          p.running_var[static_cast<size_t>(f)] =
              (1.0f - kBatchNormMomentum) * p.running_var[static_cast<size_t>(f)] +
              kBatchNormMomentum * unbiased;
        }
      } else {
        for (int f = 0; f < v.features; ++f) {
          mean[static_cast<size_t>(f)] = p.running_mean[static_cast<size_t>(f)];
          inv_std[static_cast<size_t>(f)] =
              1.0f / std::sqrt(p.running_var[static_cast<size_t>(f)] + kBatchNormEps);
        }
      }
      Tensor xhat = x;
      for (int g = 0; g < v.groups; ++g)
        for (int f = 0; f < v.features; ++f) {
          const size_t base = (static_cast<size_t>(g) * v.features + f) * v.inner;
          const float mu = mean[static_cast<size_t>(f)];
          const float is = inv_std[static_cast<size_t>(f)];
          const float gamma = p.w[static_cast<size_t>(f)];
          const float beta = p.b[static_cast<size_t>(f)];
          for (int i = 0; i < v.inner; ++i) {
            const float xh = (x[base + i] - mu) * is;
            xhat[base + i] = xh;
            y[base + i] = gamma * xh + beta;
          }
        }
      if (cache) {
        cache->aux = std::move(xhat);
        cache->mean = std::move(mean);
        cache->inv_std = std::move(inv_std);
      }
      return y;
    }
  }
  throw UsageError("unreachable layer kind");
}

}  // namespace

Tensor forward(const std::vector<LayerSpec>& spec, NetworkParams& params, const Tensor& x,
               bool training, Rng* rng, ForwardCache* cache) {
  params.training_mode = training;
  if (cache) {
    cache->layers.assign(spec.size(), LayerCache{});
    cache->training = training;
    cache->version = params.version;
  }
  Tensor cur = x;
  for (size_t li = 0; li < spec.size(); ++li) {
    LayerCache* lc = cache ? &cache->layers[li] : nullptr;
    Tensor next = layer_forward(spec[li], params.layers[li], cur, training, rng, lc,
                                static_cast<int>(li));
    if (lc) lc->x = std::move(cur);
    cur = std::move(next);
  }
  if (cache) cache->y = cur;
  return cur;
}

Tensor infer(const std::vector<LayerSpec>& spec, const NetworkParams& params,
             const Tensor& x) {
  Tensor cur = x;
  for (size_t li = 0; li < spec.size(); ++li) {
    // inference path never mutates params; the const_cast only feeds the
    // shared layer_forward, which touches running stats in training mode only
    cur = layer_forward(spec[li], const_cast<LayerParams&>(params.layers[li]), cur, false,
                        nullptr, nullptr, static_cast<int>(li));
  }
  return cur;
}

void backward(const std::vector<LayerSpec>& spec, const NetworkParams& params,
              const ForwardCache& cache, const Tensor& dy, Gradients& grads, Tensor* dx) {
  if (cache.version != params.version)
    throw UsageError("backward: stale forward cache (parameters changed since forward)");
  if (cache.layers.size() != spec.size())
    throw UsageError("backward: cache does not match network spec");
  if (grads.layers.size() != spec.size()) grads = zero_gradients(params);

  Tensor cur = dy;
  for (int li = static_cast<int>(spec.size()) - 1; li >= 0; --li) {
    const LayerSpec& l = spec[static_cast<size_t>(li)];
    const LayerCache& lc = cache.layers[static_cast<size_t>(li)];
    const LayerParams& p = params.layers[static_cast<size_t>(li)];
    LayerParams& g = grads.layers[static_cast<size_t>(li)];
    const bool need_dx = li > 0 || dx != nullptr;
    switch (l.kind) {
      case LayerKind::Dense: {
        kernels::dense_backward_params(lc.x, cur, g.w, g.b);
        if (need_dx) {
          Tensor dxl({lc.x.dim(0), lc.x.dim(1)});
          kernels::dense_backward_input(cur, p.w, dxl);
          cur = std::move(dxl);
        }
        break;
      }
      case LayerKind::Conv2d: {
        kernels::conv2d_backward_params(lc.x, cur, l.stride, g.w, g.b);
        if (need_dx) {
          Tensor dxl(lc.x.shape);
          kernels::conv2d_backward_input(cur, p.w, l.stride, dxl);
          cur = std::move(dxl);
        }
        break;
      }
      case LayerKind::ReLU:
        for (size_t i = 0; i < cur.size(); ++i)
          if (lc.x[i] <= 0.0f) cur[i] = 0.0f;
        break;
      case LayerKind::Flatten:
        cur.shape = lc.x.shape;
        break;
      case LayerKind::Dropout:
        if (cache.training && l.rate != 0.0f)
          for (size_t i = 0; i < cur.size(); ++i) cur[i] *= lc.aux[i];
        break;
      case LayerKind::BatchNorm: {
        const BnView v = bn_view(lc.x);
        const int n = v.groups * v.inner;
        const Tensor& xhat = lc.aux;
        for (int f = 0; f < v.features; ++f) {
          double dgamma = 0.0, dbeta = 0.0;
          for (int g2 = 0; g2 < v.groups; ++g2) {
            const size_t base = (static_cast<size_t>(g2) * v.features + f) * v.inner;
            for (int i = 0; i < v.inner; ++i) {
              dgamma += static_cast<double>(cur[base + i]) * xhat[base + i];
              dbeta += cur[base + i];
            }
          }
          g.w[static_cast<size_t>(f)] = static_cast<float>(dgamma);
          g.b[static_cast<size_t>(f)] = static_cast<float>(dbeta);
          const float gamma = p.w[static_cast<size_t>(f)];
          const float is = lc.inv_std[static_cast<size_t>(f)];
          if (cache.training) {
            // dx = gamma*is/n * (n*dy - sum(dy) - xhat * sum(dy*xhat))
            const float sum_dy = static_cast<float>(dbeta);
            const float sum_dy_xhat = static_cast<float>(dgamma);
            const float scale = gamma * is / static_cast<float>(n);
            for (int g2 = 0; g2 < v.groups; ++g2) {
              const size_t base = (static_cast<size_t>(g2) * v.features + f) * v.inner;
              for (int i = 0; i < v.inner; ++i)
                cur[base + i] = scale * (static_cast<float>(n) * cur[base + i] - sum_dy -
                                         xhat[base + i] * sum_dy_xhat);
            }
          } else {
            const float scale = gamma * is;
            for (int g2 = 0; g2 < v.groups; ++g2) {
              const size_t base = (static_cast<size_t>(g2) * v.features + f) * v.inner;
              for (int i = 0; i < v.inner; ++i) cur[base + i] *= scale;
            }
          }
        }
        break;
      }
    }
  }
  if (dx != nullptr) *dx = std::move(cur);
}

Gradients zero_gradients(const NetworkParams& params) {
  Gradients g;
  g.layers.resize(params.layers.size());
  for (size_t i = 0; i < params.layers.size(); ++i) {
    if (!params.layers[i].w.shape.empty()) g.layers[i].w = Tensor(params.layers[i].w.shape);
    if (!params.layers[i].b.shape.empty()) g.layers[i].b = Tensor(params.layers[i].b.shape);
  }
  return g;
}

AdamState make_adam(const NetworkParams& params, float lr) {
  AdamState a;
  a.lr = lr;
  a.m = zero_gradients(params).layers;
  a.v = zero_gradients(params).layers;
  return a;
}

namespace {

void adam_update_tensor(const AdamState& a, float bias1, float bias2, Tensor& p, Tensor& m,
                        Tensor& v, const Tensor& g, const std::string& where) {
  for (size_t i = 0; i < p.size(); ++i) {
    const float gi = g[i];
    if (!std::isfinite(gi)) throw NumericError(where + ": non-finite gradient");
    m[i] = a.beta1 * m[i] + (1.0f - a.beta1) * gi;
    v[i] = a.beta2 * v[i] + (1.0f - a.beta2) * gi * gi;
    const float mhat = m[i] / bias1;
    const float vhat = v[i] / bias2;
    p[i] -= a.lr * mhat / (std::sqrt(vhat) + a.eps);
  }
}

}  // namespace

void adam_step(AdamState& adam, NetworkParams& params, const Gradients& grads,
               const std::vector<LayerSpec>& spec) {
  adam.step += 1;
  const float bias1 = 1.0f - std::pow(adam.beta1, static_cast<float>(adam.step));
  const float bias2 = 1.0f - std::pow(adam.beta2, static_cast<float>(adam.step));
  for (size_t li = 0; li < params.layers.size(); ++li) {
    LayerParams& p = params.layers[li];
    if (p.w.size() == 0 && p.b.size() == 0) continue;
    const std::string where =
        li < spec.size() ? layer_name(spec[li], static_cast<int>(li)) : "layer";
    adam_update_tensor(adam, bias1, bias2, p.w, adam.m[li].w, adam.v[li].w,
                       grads.layers[li].w, where);
    adam_update_tensor(adam, bias1, bias2, p.b, adam.m[li].b, adam.v[li].b,
                       grads.layers[li].b, where);
  }
  params.version += 1;
}

std::vector<float> softmax(const float* logits, int n) {
  if (n <= 0) throw UsageError("softmax: empty input");
  float mx = logits[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
  std::vector<float> out(static_cast<size_t>(n));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    out[static_cast<size_t>(i)] = std::exp(logits[i] - mx);
    sum += out[static_cast<size_t>(i)];
  }
  const float inv = static_cast<float>(1.0 / sum);
  for (auto& v : out) v *= inv;
  return out;
}

std::vector<float> softmax(const std::vector<float>& logits) {
  return softmax(logits.data(), static_cast<int>(logits.size()));
}

float bce_loss(float p, float y) {
  const float pc = std::clamp(p, 1e-7f, 1.0f - 1e-7f);
  return -(y * std::log(pc) + (1.0f - y) * std::log(1.0f - pc));
}

}  // namespace maskrl
