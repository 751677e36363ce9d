#include "maskrl/kernels.hpp"

#include <cassert>

namespace maskrl::kernels {

// Parallelization rule used throughout: the omp loop index owns a disjoint
// slab of the output tensor, and the accumulation order inside a slab never
// depends on the thread count. Run-to-run determinism of training therefore
// holds for any OMP_NUM_THREADS.

void dense_forward(const Tensor& x, const Tensor& w, const Tensor& bias, Tensor& y) {
  const int B = x.dim(0), I = x.dim(1), O = w.dim(1);
  assert(w.dim(0) == I && bias.dim(0) == O);
  assert(y.dim(0) == B && y.dim(1) == O);
  const float* xp = x.ptr();
  const float* wp = w.ptr();
  const float* bp = bias.ptr();
  float* yp = y.ptr();
#pragma omp parallel for schedule(static)
  for (int b = 0; b < B; ++b) {
    float* yrow = yp + static_cast<size_t>(b) * O;
    for (int o = 0; o < O; ++o) yrow[o] = bp[o];
    const float* xrow = xp + static_cast<size_t>(b) * I;
    for (int i = 0; i < I; ++i) {
      const float xi = xrow[i];
      const float* wrow = wp + static_cast<size_t>(i) * O;
      for (int o = 0; o < O; ++o) yrow[o] += xi * wrow[o];
    }
  }
}

// contiguous dot product with four independent accumulators; fixed
// summation order (lane sums combined at the end)
static inline float dot4(const float* a, const float* b, int n) {
  float s0 = 0.0f, s1 = 0.0f, s2 = 0.0f, s3 = 0.0f;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3));
}

void dense_backward_input(const Tensor& dy, const Tensor& w, Tensor& dx) {
  const int B = dy.dim(0), O = dy.dim(1), I = w.dim(0);
  assert(w.dim(1) == O && dx.dim(0) == B && dx.dim(1) == I);
  const float* dyp = dy.ptr();
  const float* wp = w.ptr();
  float* dxp = dx.ptr();
#pragma omp parallel for schedule(static)
  for (int b = 0; b < B; ++b) {
    const float* dyrow = dyp + static_cast<size_t>(b) * O;
    float* dxrow = dxp + static_cast<size_t>(b) * I;
    for (int i = 0; i < I; ++i) dxrow[i] = dot4(dyrow, wp + static_cast<size_t>(i) * O, O);
  }
}

void dense_backward_params(const Tensor& x, const Tensor& dy, Tensor& dw, Tensor& db) {
  const int B = x.dim(0), I = x.dim(1), O = dy.dim(1);
  assert(dy.dim(0) == B && dw.dim(0) == I && dw.dim(1) == O && db.dim(0) == O);
  const float* xp = x.ptr();
  const float* dyp = dy.ptr();
  float* dwp = dw.ptr();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < I; ++i) {
    float* dwrow = dwp + static_cast<size_t>(i) * O;
    for (int o = 0; o < O; ++o) dwrow[o] = 0.0f;
    for (int b = 0; b < B; ++b) {
      const float xi = xp[static_cast<size_t>(b) * I + i];
      if (xi == 0.0f) continue;  // observations and ReLU outputs are sparse
      const float* dyrow = dyp + static_cast<size_t>(b) * O;
      for (int o = 0; o < O; ++o) dwrow[o] += xi * dyrow[o];
    }
  }
  float* dbp = db.ptr();
  for (int o = 0; o < O; ++o) dbp[o] = 0.0f;
  for (int b = 0; b < B; ++b) {
    const float* dyrow = dyp + static_cast<size_t>(b) * O;
    for (int o = 0; o < O; ++o) dbp[o] += dyrow[o];
  }
}

void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& bias, int stride,
                    Tensor& y) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int OC = w.dim(0), K = w.dim(2);
  assert(w.dim(1) == C && w.dim(3) == K);
  const int OH = conv_out_extent(H, K, stride);
  const int OW = conv_out_extent(W, K, stride);
  assert(y.dim(0) == B && y.dim(1) == OC && y.dim(2) == OH && y.dim(3) == OW);
  const float* xp = x.ptr();
  const float* wp = w.ptr();
  const float* bp = bias.ptr();
  float* yp = y.ptr();
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int oc = 0; oc < OC; ++oc) {
      float* plane = yp + (static_cast<size_t>(b) * OC + oc) * OH * OW;
      const float bias_oc = bp[oc];
      for (int i = 0; i < OH * OW; ++i) plane[i] = bias_oc;
      for (int ic = 0; ic < C; ++ic) {
        const float* xplane = xp + (static_cast<size_t>(b) * C + ic) * H * W;
        const float* wbase = wp + ((static_cast<size_t>(oc) * C + ic) * K) * K;
        for (int kh = 0; kh < K; ++kh) {
          for (int kw = 0; kw < K; ++kw) {
            const float wv = wbase[kh * K + kw];
            for (int oh = 0; oh < OH; ++oh) {
              const float* xrow = xplane + (oh * stride + kh) * W + kw;
              float* yrow = plane + oh * OW;
              for (int ow = 0; ow < OW; ++ow) yrow[ow] += wv * xrow[ow * stride];
            }
          }
        }
      }
    }
  }
}

void conv2d_backward_input(const Tensor& dy, const Tensor& w, int stride, Tensor& dx) {
  const int B = dy.dim(0), OC = dy.dim(1), OH = dy.dim(2), OW = dy.dim(3);
  const int C = w.dim(1), K = w.dim(2);
  assert(w.dim(0) == OC);
  const int H = dx.dim(2), W = dx.dim(3);
  assert(dx.dim(0) == B && dx.dim(1) == C);
  assert(conv_out_extent(H, K, stride) == OH && conv_out_extent(W, K, stride) == OW);
  const float* dyp = dy.ptr();
  const float* wp = w.ptr();
  float* dxp = dx.ptr();
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int ic = 0; ic < C; ++ic) {
      float* plane = dxp + (static_cast<size_t>(b) * C + ic) * H * W;
      for (int i = 0; i < H * W; ++i) plane[i] = 0.0f;
      for (int oc = 0; oc < OC; ++oc) {
        const float* dyplane = dyp + (static_cast<size_t>(b) * OC + oc) * OH * OW;
        const float* wbase = wp + ((static_cast<size_t>(oc) * C + ic) * K) * K;
        for (int kh = 0; kh < K; ++kh) {
          for (int kw = 0; kw < K; ++kw) {
            const float wv = wbase[kh * K + kw];
            for (int oh = 0; oh < OH; ++oh) {
              const float* dyrow = dyplane + oh * OW;
              float* dxrow = plane + (oh * stride + kh) * W + kw;
              for (int ow = 0; ow < OW; ++ow) dxrow[ow * stride] += wv * dyrow[ow];
            }
          }
        }
      }
    }
  }
}

void conv2d_backward_params(const Tensor& x, const Tensor& dy, int stride, Tensor& dw,
                            Tensor& db) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int OC = dy.dim(1), OH = dy.dim(2), OW = dy.dim(3);
  const int K = dw.dim(2);
  assert(dw.dim(0) == OC && dw.dim(1) == C && dw.dim(3) == K && db.dim(0) == OC);
  const float* xp = x.ptr();
  const float* dyp = dy.ptr();
  float* dwp = dw.ptr();
  float* dbp = db.ptr();
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < OC; ++oc) {
    for (int ic = 0; ic < C; ++ic) {
      float* dwbase = dwp + ((static_cast<size_t>(oc) * C + ic) * K) * K;
      for (int kh = 0; kh < K; ++kh) {
        for (int kw = 0; kw < K; ++kw) {
          float acc = 0.0f;
          for (int b = 0; b < B; ++b) {
            const float* dyplane = dyp + (static_cast<size_t>(b) * OC + oc) * OH * OW;
            const float* xplane = xp + (static_cast<size_t>(b) * C + ic) * H * W;
            for (int oh = 0; oh < OH; ++oh) {
              const float* dyrow = dyplane + oh * OW;
              const float* xrow = xplane + (oh * stride + kh) * W + kw;
              if (stride == 1) {
                acc += dot4(dyrow, xrow, OW);
              } else {
                for (int ow = 0; ow < OW; ++ow) acc += dyrow[ow] * xrow[ow * stride];
              }
            }
          }
          dwbase[kh * K + kw] = acc;
        }
      }
    }
    float acc = 0.0f;
    for (int b = 0; b < B; ++b) {
      const float* dyplane = dyp + (static_cast<size_t>(b) * OC + oc) * OH * OW;
      for (int i = 0; i < OH * OW; ++i) acc += dyplane[i];
    }
    dbp[oc] = acc;
  }
}

}  // namespace maskrl::kernels
