#pragma once

#include <vector>

#include "tfa/tape.hpp"
#include "tfa/tensor.hpp"

namespace tfa {

// Differentiable primitives. Every op validates shapes, checks its output
// for non-finite values, and when `tape` is non-null records a backward
// closure for any input with requires_grad set. Inputs are never mutated.

Tensor add(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor sub(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor mul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor div(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor add_scalar(const Tensor& a, double c, Tape* tape = nullptr);
Tensor mul_scalar(const Tensor& a, double c, Tape* tape = nullptr);

/// x[..., D] + b[D], broadcast over leading axes.
Tensor add_bias(const Tensor& x, const Tensor& b, Tape* tape = nullptr);

Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor transpose(const Tensor& a, Tape* tape = nullptr);

/// Max-subtracted softmax over the last axis; each slice sums to 1.
Tensor softmax_lastdim(const Tensor& x, Tape* tape = nullptr);

/// Per-slice standardization over the last axis followed by gamma/beta affine.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                  Tape* tape = nullptr);

/// Gaussian error linear unit, tanh approximation:
/// 0.5*x*(1 + tanh(sqrt(2/pi)*(x + 0.044715*x^3))).
Tensor gelu(const Tensor& x, Tape* tape = nullptr);
Tensor relu(const Tensor& x, Tape* tape = nullptr);
Tensor sqrt_elem(const Tensor& x, Tape* tape = nullptr);
Tensor clamp_min(const Tensor& x, double lo, Tape* tape = nullptr);

/// Cross-correlation (no kernel flip) with zero padding.
/// x: H×W×Cin, kernel: k×k×Cin×Cout, output: H'×W'×Cout.
Tensor conv2d(const Tensor& x, const Tensor& kernel, std::size_t stride, std::size_t padding,
              Tape* tape = nullptr);

/// Bilinear interpolation with half-pixel center alignment. Copies the
/// input bitwise when the target equals the source size.
Tensor bilinear_resize(const Tensor& x, std::size_t target_h, std::size_t target_w,
                       Tape* tape = nullptr);

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape, Tape* tape = nullptr);

Tensor concat_rows(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor slice_rows(const Tensor& x, std::size_t r0, std::size_t r1, Tape* tape = nullptr);
Tensor concat_cols(const std::vector<Tensor>& parts, Tape* tape = nullptr);
Tensor slice_cols(const Tensor& x, std::size_t c0, std::size_t c1, Tape* tape = nullptr);

/// Gather rows of a 2-D tensor by index.
Tensor select_rows(const Tensor& x, const std::vector<std::size_t>& idx, Tape* tape = nullptr);
/// Copy of x with row idx[i] replaced by rep row i.
Tensor replace_rows(const Tensor& x, const std::vector<std::size_t>& idx, const Tensor& rep,
                    Tape* tape = nullptr);
/// Stack a vector [D] as n identical rows.
Tensor tile_row(const Tensor& v, std::size_t n, Tape* tape = nullptr);

Tensor sum_all(const Tensor& x, Tape* tape = nullptr);
Tensor mean_all(const Tensor& x, Tape* tape = nullptr);
/// [..., D] -> [...], summing the last axis.
Tensor sum_lastdim(const Tensor& x, Tape* tape = nullptr);

/// Value of a one-element tensor.
double scalar_value(const Tensor& t);

}  // namespace tfa
