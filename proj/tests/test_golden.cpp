// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "acsim/golden.hpp"
#include "doctest.h"

using namespace acsim;

TEST_CASE("matmul against identity and hand values") {
  // Identity A widens B unchanged.
  std::vector<int8_t> ident(8 * 8, 0);
  for (int i = 0; i < 8; ++i) ident[i * 8 + i] = 1;
  std::vector<int8_t> b(8 * 8);
  std::mt19937 rng(7);
  for (auto& v : b) v = static_cast<int8_t>(rng() % 256);
  auto c = golden::matmul<int8_t>(ident, b, 8, 8, 8);
  for (int i = 0; i < 64; ++i) CHECK(c[i] == static_cast<int32_t>(b[i]));

  // 1x1x1: [3] * [4] = [12].
  auto one = golden::matmul<int8_t>({3}, {4}, 1, 1, 1);
  CHECK(one == std::vector<int32_t>{12});

  // Accumulation: row of k ones times column of k ones = k.
  std::vector<int8_t> onesa(16, 1), onesb(16, 1);
  CHECK(golden::matmul<int8_t>(onesa, onesb, 1, 16, 1)[0] == 16);

  // Negative products: [-128] * [127] = -16256.
  CHECK(golden::matmul<int8_t>({-128}, {127}, 1, 1, 1)[0] == -16256);
}

TEST_CASE("matmul against an independent triple loop") {
  std::mt19937 rng(20260814);
  const uint32_t m = 16, k = 8, n = 16;
  std::vector<int8_t> a(m * k), b(k * n);
  for (auto& v : a) v = static_cast<int8_t>(rng() % 256);
  for (auto& v : b) v = static_cast<int8_t>(rng() % 256);
  auto c = golden::matmul<int8_t>(a, b, m, k, n);
  for (uint32_t i = 0; i < m; ++i) {
    for (uint32_t j = 0; j < n; ++j) {
      int32_t acc = 0;
      for (uint32_t t = 0; t < k; ++t) acc += int32_t{a[i * k + t]} * int32_t{b[t * n + j]};
      REQUIRE(c[i * n + j] == acc);
    }
  }
}

TEST_CASE("matmul with i32 activations") {
  std::vector<int32_t> a = {100000, -200000};
  std::vector<int8_t> b = {2, -3};
  auto c = golden::matmul<int32_t>(a, b, 1, 2, 1);
  CHECK(c[0] == 100000 * 2 + (-200000) * (-3));
}

TEST_CASE("maxpool single window and brute force") {
  // One 2x2 window, one channel: max of the four values.
  std::vector<int32_t> w1 = {5, -2, 9, 3};
  CHECK(golden::maxpool2d<int32_t>(w1, 2, 2, 1, 2, 2) == std::vector<int32_t>{9});

  // 8x8x8 i32 pool vs per-element brute force.
  std::mt19937 rng(99);
  std::vector<int32_t> in(8 * 8 * 8);
  for (auto& v : in) v = static_cast<int32_t>(rng()) % 1000;
  auto out = golden::maxpool2d<int32_t>(in, 8, 8, 8, 2, 2);
  REQUIRE(out.size() == 4u * 4 * 8);
  for (uint32_t oy = 0; oy < 4; ++oy) {
    for (uint32_t ox = 0; ox < 4; ++ox) {
      for (uint32_t ch = 0; ch < 8; ++ch) {
        int32_t best = INT32_MIN;
        for (uint32_t dy = 0; dy < 2; ++dy) {
          for (uint32_t dx = 0; dx < 2; ++dx) {
            best = std::max(best, in[((oy * 2 + dy) * 8 + (ox * 2 + dx)) * 8 + ch]);
          }
        }
        REQUIRE(out[(oy * 4 + ox) * 8 + ch] == best);
      }
    }
  }

  // i8 flavor, stride < window would change shapes: 3x3 k=2 s=1 -> 2x2.
  std::vector<int8_t> in8 = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  auto out8 = golden::maxpool2d<int8_t>(in8, 3, 3, 1, 2, 1);
  CHECK(out8 == std::vector<int8_t>{5, 6, 8, 9});
}

TEST_CASE("eltwise relu and saturating narrow") {
  CHECK(golden::eltwise_i32({-5, 0, 3}, golden::EltwiseFunc::Relu) ==
        std::vector<int32_t>{0, 0, 3});
  CHECK(golden::eltwise_i32({-5, 3}, golden::EltwiseFunc::Identity) ==
        std::vector<int32_t>{-5, 3});
  CHECK(golden::eltwise_i32_to_i8({300, -300, 12}, golden::EltwiseFunc::Identity) ==
        std::vector<int8_t>{127, -128, 12});
  CHECK(golden::eltwise_i32_to_i8({-300, 130}, golden::EltwiseFunc::Relu) ==
        std::vector<int8_t>{0, 127});
  CHECK(golden::eltwise_i8({-7, 7}, golden::EltwiseFunc::Relu) == std::vector<int8_t>{0, 7});
}

TEST_CASE("im2col hand example") {
  // 3x3 single-channel image, 2x2 window -> 4 patches of 4.
  std::vector<int8_t> img = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  auto patches = golden::im2col(img, 3, 3, 1, 2, 2);
  CHECK(patches == std::vector<int8_t>{1, 2, 4, 5, 2, 3, 5, 6, 4, 5, 7, 8, 5, 6, 8, 9});

  // Channel innermost: 1x2x2 image, 1x1 window keeps rows as pixels.
  std::vector<int8_t> img2 = {10, 11, 20, 21};
  CHECK(golden::im2col(img2, 1, 2, 2, 1, 1) == img2);

  // conv == matmul(im2col(img), w): 4x4x2 image, 3x3 window, 3 filters.
  std::mt19937 rng(5);
  std::vector<int8_t> img3(4 * 4 * 2), w(3 * 3 * 2 * 3);
  for (auto& v : img3) v = static_cast<int8_t>(rng() % 256);
  for (auto& v : w) v = static_cast<int8_t>(rng() % 256);
  auto cols = golden::im2col(img3, 4, 4, 2, 3, 3);
  auto out = golden::matmul<int8_t>(cols, w, 4, 18, 3);
  // Spot check output pixel (oy=1, ox=0), filter 2 by direct convolution.
  int32_t acc = 0;
  for (uint32_t dy = 0; dy < 3; ++dy) {
    for (uint32_t dx = 0; dx < 3; ++dx) {
      for (uint32_t c = 0; c < 2; ++c) {
        acc += int32_t{img3[((1 + dy) * 4 + dx) * 2 + c]} *
               int32_t{w[((dy * 3 + dx) * 2 + c) * 3 + 2]};
      }
    }
  }
  CHECK(out[2 * 3 + 2] == acc);
}

TEST_CASE("dma_copy strided gather and reversal") {
  std::vector<uint8_t> src(512), dst(128, 0);
  for (size_t i = 0; i < src.size(); ++i) src[i] = static_cast<uint8_t>(i);
  golden::dma_copy(src.data(), 128, dst.data(), 32, 32, 4);
  for (uint32_t r = 0; r < 4; ++r) {
    for (uint32_t i = 0; i < 32; ++i) REQUIRE(dst[r * 32 + i] == static_cast<uint8_t>(r * 128 + i));
  }

  // Negative destination stride writes rows in reverse order.
  std::vector<uint8_t> rev(64, 0);
  golden::dma_copy(src.data(), 16, rev.data() + 48, -16, 16, 4);
  for (uint32_t r = 0; r < 4; ++r) {
    for (uint32_t i = 0; i < 16; ++i) REQUIRE(rev[48 - r * 16 + i] == static_cast<uint8_t>(r * 16 + i));
  }
}

TEST_CASE("scalar cycle costs") {
  ScalarCostModel c3{3.0, 3.0};
  CHECK(golden::scalar_matmul_cycles(8, 8, 8, c3) == doctest::Approx(1536.0));
  CHECK(golden::scalar_matmul_cycles(1, 64, 10, c3) == doctest::Approx(1920.0));
  CHECK(golden::scalar_matmul_cycles(0, 64, 10, c3) == doctest::Approx(0.0));

  ScalarCostModel def{0.25, 0.125};
  CHECK(golden::scalar_maxpool_cycles(1, 1, 1, 2, def) == doctest::Approx(0.5));
  CHECK(golden::scalar_maxpool_cycles(8, 8, 8, 2, def) == doctest::Approx(256.0));
  CHECK(golden::scalar_eltwise_cycles(2048, def) == doctest::Approx(256.0));
  CHECK(golden::scalar_im2col_cycles(256 * 72, def) == doctest::Approx(2304.0));
}
