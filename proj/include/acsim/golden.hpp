// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "acsim/config.hpp"
#include "acsim/error.hpp"

namespace acsim::golden {

// Reference implementations of every kernel the cluster can execute.
// These are the single source of truth for functional results: the
// accelerator datapaths, the scalar execution units, and the end-to-end
// workload evaluator must all agree with them bit for bit.

enum class EltwiseFunc { Identity, Relu };

EltwiseFunc eltwise_func_from_string(const std::string& name);
std::string to_string(EltwiseFunc func);

// C[M x N] i32 = A[M x K] * B[K x N], row major. B is always i8; A is i8
// for dense layers behind the GeMM unit and i32 for layers that consume
// 32-bit activations on a scalar core. Accumulation is 32-bit two's
// complement with well-defined wraparound, matching the datapath.
template <typename TA>
std::vector<int32_t> matmul(const std::vector<TA>& a, const std::vector<int8_t>& b,
                            uint32_t m, uint32_t k, uint32_t n) {
  if (a.size() != static_cast<size_t>(m) * k || b.size() != static_cast<size_t>(k) * n) {
    throw Error(ErrorKind::ShapeMismatch, "matmul operand size does not match dims");
  }
  std::vector<int32_t> c(static_cast<size_t>(m) * n, 0);
  for (uint32_t i = 0; i < m; ++i) {
    for (uint32_t j = 0; j < n; ++j) {
      int64_t acc = 0;
      for (uint32_t t = 0; t < k; ++t) {
        acc = static_cast<int32_t>(
            static_cast<uint64_t>(acc) +
            static_cast<uint64_t>(static_cast<int64_t>(a[static_cast<size_t>(i) * k + t]) *
                                  static_cast<int64_t>(b[static_cast<size_t>(t) * n + j])));
      }
      c[static_cast<size_t>(i) * n + j] = static_cast<int32_t>(acc);
    }
  }
  return c;
}

// 2D max pooling over an H x W x C row-major tensor (channel innermost).
// Valid padding: Ho = (H - k) / s + 1, Wo likewise.
template <typename T>
std::vector<T> maxpool2d(const std::vector<T>& in, uint32_t h, uint32_t w, uint32_t c,
                         uint32_t k, uint32_t s) {
  if (k == 0 || s == 0 || h < k || w < k) {
    throw Error(ErrorKind::ShapeMismatch, "maxpool window does not fit input");
  }
  if (in.size() != static_cast<size_t>(h) * w * c) {
    throw Error(ErrorKind::ShapeMismatch, "maxpool input size does not match dims");
  }
  const uint32_t ho = (h - k) / s + 1;
  const uint32_t wo = (w - k) / s + 1;
  std::vector<T> out(static_cast<size_t>(ho) * wo * c);
  for (uint32_t oy = 0; oy < ho; ++oy) {
    for (uint32_t ox = 0; ox < wo; ++ox) {
      for (uint32_t ch = 0; ch < c; ++ch) {
        T best = in[(static_cast<size_t>(oy) * s * w + ox * s) * c + ch];
        for (uint32_t dy = 0; dy < k; ++dy) {
          for (uint32_t dx = 0; dx < k; ++dx) {
            const T v = in[(static_cast<size_t>(oy * s + dy) * w + (ox * s + dx)) * c + ch];
            if (v > best) best = v;
          }
        }
        out[(static_cast<size_t>(oy) * wo + ox) * c + ch] = best;
      }
    }
  }
  return out;
}

// Elementwise ops, including the saturating i32 -> i8 narrowing used when a
// 32-bit accumulator tensor feeds an 8-bit consumer.
std::vector<int32_t> eltwise_i32(const std::vector<int32_t>& in, EltwiseFunc func);
std::vector<int8_t> eltwise_i8(const std::vector<int8_t>& in, EltwiseFunc func);
std::vector<int8_t> eltwise_i32_to_i8(const std::vector<int32_t>& in, EltwiseFunc func);

// Patch extraction for a valid kh x kw convolution over H x W x C (channel
// innermost): output is row major [Ho*Wo x kh*kw*C], one patch per row, so
// conv(img, w) == matmul(im2col(img), w_flat).
std::vector<int8_t> im2col(const std::vector<int8_t>& in, uint32_t h, uint32_t w, uint32_t c,
                           uint32_t kh, uint32_t kw);

// Strided 2D copy: `rows` rows of `row_bytes`, source rows `src_stride`
// apart, destination rows `dst_stride` apart (strides may be negative).
void dma_copy(const uint8_t* src, int64_t src_stride, uint8_t* dst, int64_t dst_stride,
              uint32_t row_bytes, uint32_t rows);

// Scalar-core cycle costs (the cost model a control core pays when it
// executes a kernel itself instead of delegating to an accelerator).
double scalar_matmul_cycles(uint32_t m, uint32_t k, uint32_t n, const ScalarCostModel& costs);
double scalar_maxpool_cycles(uint32_t ho, uint32_t wo, uint32_t c, uint32_t k,
                             const ScalarCostModel& costs);
double scalar_eltwise_cycles(uint64_t elems, const ScalarCostModel& costs);
double scalar_im2col_cycles(uint64_t out_elems, const ScalarCostModel& costs);

}  // namespace acsim::golden
