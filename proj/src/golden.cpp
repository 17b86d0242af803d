// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/golden.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

namespace acsim::golden {

EltwiseFunc eltwise_func_from_string(const std::string& name) {
  if (name == "identity") return EltwiseFunc::Identity;
  if (name == "relu") return EltwiseFunc::Relu;
  throw Error(ErrorKind::ParseError, "unknown elementwise function: " + name);
}

std::string to_string(EltwiseFunc func) {
  return func == EltwiseFunc::Relu ? "relu" : "identity";
}

namespace {

int32_t apply_func(int32_t v, EltwiseFunc func) {
  return func == EltwiseFunc::Relu ? std::max<int32_t>(v, 0) : v;
}

int8_t saturate_i8(int32_t v) {
  return static_cast<int8_t>(std::clamp<int32_t>(v, std::numeric_limits<int8_t>::min(),
                                                 std::numeric_limits<int8_t>::max()));
}

}  // namespace

std::vector<int32_t> eltwise_i32(const std::vector<int32_t>& in, EltwiseFunc func) {
  std::vector<int32_t> out(in.size());
  for (size_t i = 0; i < in.size(); ++i) out[i] = apply_func(in[i], func);
  return out;
}

std::vector<int8_t> eltwise_i8(const std::vector<int8_t>& in, EltwiseFunc func) {
  std::vector<int8_t> out(in.size());
  for (size_t i = 0; i < in.size(); ++i) {
    out[i] = static_cast<int8_t>(apply_func(in[i], func));
  }
  return out;
}

std::vector<int8_t> eltwise_i32_to_i8(const std::vector<int32_t>& in, EltwiseFunc func) {
  std::vector<int8_t> out(in.size());
  for (size_t i = 0; i < in.size(); ++i) out[i] = saturate_i8(apply_func(in[i], func));
  return out;
}

std::vector<int8_t> im2col(const std::vector<int8_t>& in, uint32_t h, uint32_t w, uint32_t c,
                           uint32_t kh, uint32_t kw) {
  if (kh == 0 || kw == 0 || h < kh || w < kw) {
    throw Error(ErrorKind::ShapeMismatch, "im2col window does not fit input");
  }
  if (in.size() != static_cast<size_t>(h) * w * c) {
    throw Error(ErrorKind::ShapeMismatch, "im2col input size does not match dims");
  }
  const uint32_t ho = h - kh + 1;
  const uint32_t wo = w - kw + 1;
  const size_t cols = static_cast<size_t>(kh) * kw * c;
  std::vector<int8_t> out(static_cast<size_t>(ho) * wo * cols);
  size_t row = 0;
  for (uint32_t oy = 0; oy < ho; ++oy) {
    for (uint32_t ox = 0; ox < wo; ++ox, ++row) {
      int8_t* dst = out.data() + row * cols;
      for (uint32_t dy = 0; dy < kh; ++dy) {
        const int8_t* src = in.data() + (static_cast<size_t>(oy + dy) * w + ox) * c;
        std::memcpy(dst, src, static_cast<size_t>(kw) * c);
        dst += static_cast<size_t>(kw) * c;
      }
    }
  }
  return out;
}

void dma_copy(const uint8_t* src, int64_t src_stride, uint8_t* dst, int64_t dst_stride,
              uint32_t row_bytes, uint32_t rows) {
  for (uint32_t r = 0; r < rows; ++r) {
    std::memcpy(dst + static_cast<int64_t>(r) * dst_stride,
                src + static_cast<int64_t>(r) * src_stride, row_bytes);
  }
}

double scalar_matmul_cycles(uint32_t m, uint32_t k, uint32_t n, const ScalarCostModel& costs) {
  return static_cast<double>(m) * k * n * costs.cycles_per_mac;
}

double scalar_maxpool_cycles(uint32_t ho, uint32_t wo, uint32_t c, uint32_t k,
                             const ScalarCostModel& costs) {
  return static_cast<double>(ho) * wo * c * k * k * costs.cycles_per_elementwise_op;
}

double scalar_eltwise_cycles(uint64_t elems, const ScalarCostModel& costs) {
  return static_cast<double>(elems) * costs.cycles_per_elementwise_op;
}

double scalar_im2col_cycles(uint64_t out_elems, const ScalarCostModel& costs) {
  return static_cast<double>(out_elems) * costs.cycles_per_elementwise_op;
}

}  // namespace acsim::golden
