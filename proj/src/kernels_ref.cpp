#include "maskrl/kernels.hpp"

#include <cassert>

namespace maskrl::kernels::ref {

void dense_forward(const Tensor& x, const Tensor& w, const Tensor& bias, Tensor& y) {
  const int B = x.dim(0), I = x.dim(1), O = w.dim(1);
  for (int b = 0; b < B; ++b) {
    for (int o = 0; o < O; ++o) {
      float acc = bias[static_cast<size_t>(o)];
      for (int i = 0; i < I; ++i)
        acc += x[static_cast<size_t>(b) * I + i] * w[static_cast<size_t>(i) * O + o];
      y[static_cast<size_t>(b) * O + o] = acc;
    }
  }
}

void dense_backward_input(const Tensor& dy, const Tensor& w, Tensor& dx) {
  const int B = dy.dim(0), O = dy.dim(1), I = w.dim(0);
  for (int b = 0; b < B; ++b) {
    for (int i = 0; i < I; ++i) {
      float acc = 0.0f;
      for (int o = 0; o < O; ++o)
        acc += dy[static_cast<size_t>(b) * O + o] * w[static_cast<size_t>(i) * O + o];
      dx[static_cast<size_t>(b) * I + i] = acc;
    }
  }
}

void dense_backward_params(const Tensor& x, const Tensor& dy, Tensor& dw, Tensor& db) {
  const int B = x.dim(0), I = x.dim(1), O = dy.dim(1);
  for (int i = 0; i < I; ++i) {
    for (int o = 0; o < O; ++o) {
      float acc = 0.0f;
      for (int b = 0; b < B; ++b)
        acc += x[static_cast<size_t>(b) * I + i] * dy[static_cast<size_t>(b) * O + o];
      dw[static_cast<size_t>(i) * O + o] = acc;
    }
  }
  for (int o = 0; o < O; ++o) {
    float acc = 0.0f;
    for (int b = 0; b < B; ++b) acc += dy[static_cast<size_t>(b) * O + o];
    db[static_cast<size_t>(o)] = acc;
  }
}

void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& bias, int stride,
                    Tensor& y) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int OC = w.dim(0), K = w.dim(2);
  const int OH = conv_out_extent(H, K, stride), OW = conv_out_extent(W, K, stride);
  for (int b = 0; b < B; ++b)
    for (int oc = 0; oc < OC; ++oc)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          float acc = bias[static_cast<size_t>(oc)];
          for (int ic = 0; ic < C; ++ic)
            for (int kh = 0; kh < K; ++kh)
              for (int kw = 0; kw < K; ++kw)
                acc += x[((static_cast<size_t>(b) * C + ic) * H + oh * stride + kh) * W +
                         ow * stride + kw] *
                       w[((static_cast<size_t>(oc) * C + ic) * K + kh) * K + kw];
          y[((static_cast<size_t>(b) * OC + oc) * OH + oh) * OW + ow] = acc;
        }
}

void conv2d_backward_input(const Tensor& dy, const Tensor& w, int stride, Tensor& dx) {
  const int B = dy.dim(0), OC = dy.dim(1), OH = dy.dim(2), OW = dy.dim(3);
  const int C = w.dim(1), K = w.dim(2);
  const int H = dx.dim(2), W = dx.dim(3);
  dx.fill(0.0f);
  for (int b = 0; b < B; ++b)
    for (int oc = 0; oc < OC; ++oc)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          const float g = dy[((static_cast<size_t>(b) * OC + oc) * OH + oh) * OW + ow];
          for (int ic = 0; ic < C; ++ic)
            for (int kh = 0; kh < K; ++kh)
              for (int kw = 0; kw < K; ++kw)
                dx[((static_cast<size_t>(b) * C + ic) * H + oh * stride + kh) * W +
                   ow * stride + kw] +=
                    g * w[((static_cast<size_t>(oc) * C + ic) * K + kh) * K + kw];
        }
}

void conv2d_backward_params(const Tensor& x, const Tensor& dy, int stride, Tensor& dw,
                            Tensor& db) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int OC = dy.dim(1), OH = dy.dim(2), OW = dy.dim(3);
  const int K = dw.dim(2);
  dw.fill(0.0f);
  db.fill(0.0f);
  for (int b = 0; b < B; ++b)
    for (int oc = 0; oc < OC; ++oc)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          const float g = dy[((static_cast<size_t>(b) * OC + oc) * OH + oh) * OW + ow];
          db[static_cast<size_t>(oc)] += g;
          for (int ic = 0; ic < C; ++ic)
            for (int kh = 0; kh < K; ++kh)
              for (int kw = 0; kw < K; ++kw)
                dw[((static_cast<size_t>(oc) * C + ic) * K + kh) * K + kw] +=
                    g * x[((static_cast<size_t>(b) * C + ic) * H + oh * stride + kh) * W +
                          ow * stride + kw];
        }
}

}  // namespace maskrl::kernels::ref
