#pragma once

#include "maskrl/tensor.hpp"

namespace maskrl::kernels {

// Dense and convolution kernels, OpenMP-parallel over independent output
// blocks. Every output element is accumulated by exactly one thread in a
// fixed order, so results are bitwise identical for any thread count
// (including the serial fallback when OpenMP is unavailable).
//
// Layout conventions:
//   dense weight  W[in][out]          (row-major [in, out])
//   conv weight   W[oc][ic][kh][kw]   (row-major [oc, ic, k, k])

// y[b][o] = bias[o] + sum_i x[b][i] * W[i][o]
void dense_forward(const Tensor& x, const Tensor& w, const Tensor& bias, Tensor& y);

// dx[b][i] = sum_o dy[b][o] * W[i][o]
void dense_backward_input(const Tensor& dy, const Tensor& w, Tensor& dx);

// dW[i][o] = sum_b x[b][i] * dy[b][o];  db[o] = sum_b dy[b][o]
void dense_backward_params(const Tensor& x, const Tensor& dy, Tensor& dw, Tensor& db);

// valid (unpadded) cross-correlation, PyTorch Conv2d semantics
void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& bias, int stride,
                    Tensor& y);

void conv2d_backward_input(const Tensor& dy, const Tensor& w, int stride, Tensor& dx);

void conv2d_backward_params(const Tensor& x, const Tensor& dy, int stride, Tensor& dw,
                            Tensor& db);

inline int conv_out_extent(int in, int kernel, int stride) {
  return (in - kernel) / stride + 1;
}

}  // namespace maskrl::kernels

namespace maskrl::kernels::ref {

// Serial textbook implementations of the kernels above. Kept as the
// reference the parallel kernels are tested and benchmarked against;
// never used on the training path.

void dense_forward(const Tensor& x, const Tensor& w, const Tensor& bias, Tensor& y);
void dense_backward_input(const Tensor& dy, const Tensor& w, Tensor& dx);
void dense_backward_params(const Tensor& x, const Tensor& dy, Tensor& dw, Tensor& db);
void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& bias, int stride,
                    Tensor& y);
void conv2d_backward_input(const Tensor& dy, const Tensor& w, int stride, Tensor& dx);
void conv2d_backward_params(const Tensor& x, const Tensor& dy, int stride, Tensor& dw,
                            Tensor& db);

}  // namespace maskrl::kernels::ref
