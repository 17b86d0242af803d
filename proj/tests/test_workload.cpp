// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/workload.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

#include "acsim/error.hpp"
#include "test_util.hpp"

using namespace acsim;

TEST_CASE("the bundled three-layer workload parses") {
  Workload w = load_workload(test::workload_path("toy.json"));
  REQUIRE(w.tensors.size() == 7);
  REQUIRE(w.nodes.size() == 4);

  const TensorDecl* img = w.find_tensor("img");
  REQUIRE(img != nullptr);
  CHECK(img->home == TensorHome::External);
  CHECK(img->iterated);
  CHECK(!img->produced);
  CHECK(img->bytes() == 18 * 18 * 8);

  // Produced tensors are marked and always iterated, init or not.
  const TensorDecl* a0 = w.find_tensor("a0");
  REQUIRE(a0 != nullptr);
  CHECK(a0->produced);
  CHECK(a0->iterated);
  CHECK(a0->bytes() == 16 * 16 * 8 * 4);

  // Weights stay constant across iterations.
  CHECK(!w.find_tensor("w0")->iterated);

  CHECK(w.producer_of("p0")->id == "pool0");
  CHECK(w.producer_of("img") == nullptr);
  REQUIRE(w.consumers_of("r0").size() == 1);
  CHECK(w.consumers_of("r0")[0]->id == "pool0");

  auto order = w.topo_order();
  REQUIRE(order.size() == 4);
  CHECK(order[0]->id == "conv0");
  CHECK(order[3]->id == "fc0");
}

TEST_CASE("structural validation rejects broken graphs") {
  SUBCASE("unknown input tensor") {
    const char* text = R"({
      "tensors": [{ "id": "t", "shape": [4], "dtype": "i32", "location": "spm" }],
      "nodes": [{ "id": "n", "op": "eltwise", "inputs": ["missing"], "output": "t" }]
    })";
    CHECK_THROWS_AS(parse_workload(text), Error);
  }
  SUBCASE("dependency cycle") {
    const char* text = R"({
      "tensors": [
        { "id": "a", "shape": [4], "dtype": "i32", "location": "spm" },
        { "id": "b", "shape": [4], "dtype": "i32", "location": "spm" }
      ],
      "nodes": [
        { "id": "n1", "op": "eltwise", "inputs": ["a"], "output": "b" },
        { "id": "n2", "op": "eltwise", "inputs": ["b"], "output": "a" }
      ]
    })";
    CHECK_THROWS_WITH_AS(parse_workload(text), doctest::Contains("cycle"), Error);
  }
  SUBCASE("graph input without init") {
    const char* text = R"({
      "tensors": [
        { "id": "a", "shape": [4], "dtype": "i32", "location": "spm" },
        { "id": "b", "shape": [4], "dtype": "i32", "location": "spm" }
      ],
      "nodes": [{ "id": "n", "op": "eltwise", "inputs": ["a"], "output": "b" }]
    })";
    CHECK_THROWS_WITH_AS(parse_workload(text), doctest::Contains("init"), Error);
  }
  SUBCASE("matmul shape disagreement") {
    const char* text = R"({
      "tensors": [
        { "id": "a", "shape": [4, 8],  "dtype": "i8",  "location": "spm", "init": "zero" },
        { "id": "b", "shape": [16, 4], "dtype": "i8",  "location": "spm", "init": "zero" },
        { "id": "c", "shape": [4, 4],  "dtype": "i32", "location": "spm" }
      ],
      "nodes": [{ "id": "mm", "op": "matmul", "inputs": ["a", "b"], "output": "c" }]
    })";
    try {
      parse_workload(text);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ShapeMismatch);
    }
  }
  SUBCASE("widening eltwise is not a thing") {
    const char* text = R"({
      "tensors": [
        { "id": "a", "shape": [8], "dtype": "i8",  "location": "spm", "init": "zero" },
        { "id": "b", "shape": [8], "dtype": "i32", "location": "spm" }
      ],
      "nodes": [{ "id": "n", "op": "eltwise", "inputs": ["a"], "output": "b" }]
    })";
    CHECK_THROWS_AS(parse_workload(text), Error);
  }
  SUBCASE("two producers of one tensor") {
    const char* text = R"({
      "tensors": [
        { "id": "a", "shape": [8], "dtype": "i32", "location": "spm", "init": "zero" },
        { "id": "b", "shape": [8], "dtype": "i32", "location": "spm" }
      ],
      "nodes": [
        { "id": "n1", "op": "eltwise", "inputs": ["a"], "output": "b" },
        { "id": "n2", "op": "eltwise", "inputs": ["a"], "output": "b" }
      ]
    })";
    CHECK_THROWS_WITH_AS(parse_workload(text), doctest::Contains("more than one"), Error);
  }
}

TEST_CASE("init materialization") {
  TensorDecl t;
  t.id = "t";
  t.shape = {4, 4};
  t.dtype = DType::I8;

  SUBCASE("zero fill") {
    t.init = "zero";
    CHECK(materialize_init(t, 3) == TensorBytes(16, 0));
    t.iterated = true;
    CHECK(materialize_init(t, 3).size() == 48);
  }

  SUBCASE("seeded random is one continuous stream across iterations") {
    t.init = "random:5";
    t.iterated = true;
    TensorBytes got = materialize_init(t, 2);
    std::mt19937 rng(5);
    TensorBytes want(32);
    for (auto& byte : want) byte = static_cast<uint8_t>(static_cast<int>(rng() % 256) - 128);
    CHECK(got == want);
  }

  SUBCASE("i32 elements draw one value each") {
    t.dtype = DType::I32;
    t.init = "random:9";
    TensorBytes got = materialize_init(t, 1);
    REQUIRE(got.size() == 64);
    std::mt19937 rng(9);
    for (size_t i = 0; i < 16; ++i) {
      int32_t v;
      std::memcpy(&v, got.data() + i * 4, 4);
      CHECK(v == static_cast<int>(rng() % 256) - 128);
    }
  }

  SUBCASE("file contents, exact or replicated") {
    const std::string path = "workload_init_test.bin";
    {
      std::ofstream f(path, std::ios::binary);
      for (int i = 0; i < 16; ++i) f.put(static_cast<char>(i));
    }
    t.init = "file:" + path;
    TensorBytes once = materialize_init(t, 1);
    REQUIRE(once.size() == 16);
    CHECK(once[3] == 3);
    t.iterated = true;
    TensorBytes twice = materialize_init(t, 2);
    REQUIRE(twice.size() == 32);
    CHECK(TensorBytes(twice.begin() + 16, twice.end()) == once);
    t.shape = {5, 5};
    CHECK_THROWS_AS(materialize_init(t, 1), Error);
    std::remove(path.c_str());
  }
}

namespace {

// Naive direct convolution, independent of the im2col + matmul path the
// evaluator uses.
std::vector<int32_t> direct_conv(const std::vector<int8_t>& in, const std::vector<int8_t>& w,
                                 uint32_t h, uint32_t wd, uint32_t c, uint32_t kh, uint32_t kw,
                                 uint32_t f) {
  const uint32_t ho = h - kh + 1, wo = wd - kw + 1;
  std::vector<int32_t> out(ho * wo * f);
  for (uint32_t oy = 0; oy < ho; ++oy) {
    for (uint32_t ox = 0; ox < wo; ++ox) {
      for (uint32_t of = 0; of < f; ++of) {
        int64_t acc = 0;
        for (uint32_t dy = 0; dy < kh; ++dy) {
          for (uint32_t dx = 0; dx < kw; ++dx) {
            for (uint32_t ch = 0; ch < c; ++ch) {
              acc += static_cast<int64_t>(in[((oy + dy) * wd + (ox + dx)) * c + ch]) *
                     w[((dy * kw + dx) * c + ch) * f + of];
            }
          }
        }
        out[(oy * wo + ox) * f + of] = static_cast<int32_t>(acc);
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("graph evaluation matches a direct oracle on the bundled workload") {
  Workload w = load_workload(test::workload_path("toy.json"));
  std::map<std::string, TensorBytes> values;
  for (const auto& tensor : w.tensors) {
    if (!tensor.produced) values[tensor.id] = materialize_init(tensor, 1);
  }
  evaluate(w, values);

  // conv0 against the naive six-deep loop nest.
  std::vector<int8_t> img(18 * 18 * 8), w0(3 * 3 * 8 * 8);
  std::memcpy(img.data(), values["img"].data(), img.size());
  std::memcpy(w0.data(), values["w0"].data(), w0.size());
  const auto conv = direct_conv(img, w0, 18, 18, 8, 3, 3, 8);
  std::vector<int32_t> a0(16 * 16 * 8);
  REQUIRE(values["a0"].size() == a0.size() * 4);
  std::memcpy(a0.data(), values["a0"].data(), values["a0"].size());
  CHECK(a0 == conv);

  // relu0 and pool0 by hand on a few probes.
  std::vector<int32_t> r0(16 * 16 * 8), p0(8 * 8 * 8);
  std::memcpy(r0.data(), values["r0"].data(), values["r0"].size());
  std::memcpy(p0.data(), values["p0"].data(), values["p0"].size());
  for (size_t i = 0; i < r0.size(); ++i) CHECK(r0[i] == std::max(a0[i], 0));
  for (uint32_t oy = 0; oy < 8; ++oy) {
    for (uint32_t ox = 0; ox < 8; ++ox) {
      for (uint32_t ch = 0; ch < 8; ++ch) {
        int32_t best = INT32_MIN;
        for (uint32_t dy = 0; dy < 2; ++dy) {
          for (uint32_t dx = 0; dx < 2; ++dx) {
            best = std::max(best, r0[((oy * 2 + dy) * 16 + (ox * 2 + dx)) * 8 + ch]);
          }
        }
        CHECK(p0[(oy * 8 + ox) * 8 + ch] == best);
      }
    }
  }

  // fc0: two dot products over the flattened pool output.
  std::vector<int8_t> w1(512 * 2);
  std::memcpy(w1.data(), values["w1"].data(), w1.size());
  std::vector<int32_t> res(2);
  std::memcpy(res.data(), values["res"].data(), 8);
  for (uint32_t j = 0; j < 2; ++j) {
    int64_t acc = 0;
    for (uint32_t i = 0; i < 512; ++i) acc += static_cast<int64_t>(p0[i]) * w1[i * 2 + j];
    CHECK(res[j] == static_cast<int32_t>(acc));
  }
}

TEST_CASE("matmul accumulation wraps like 32-bit hardware") {
  // Large i32 activations times i8 weights overflow 32 bits; the reference
  // must wrap deterministically rather than saturate or trap.
  std::vector<int32_t> a = {2000000000, 2000000000};
  std::vector<int8_t> b = {100, 100};
  auto c = golden::matmul<int32_t>(a, b, 1, 2, 1);
  // 2 * 2e9 * 100 = 4e11; mod 2^32 = 4e11 - 93 * 2^32.
  const int64_t full = 400000000000;
  CHECK(c[0] == static_cast<int32_t>(full));
}
