// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/config.hpp"

#include <doctest.h>

#include "acsim/error.hpp"
#include "test_util.hpp"

using namespace acsim;

TEST_CASE("minimal config loads with derived capacity") {
  ClusterConfig config = load_and_validate(test::config_path("scalar.cfg"));
  CHECK(config.control_cores.size() == 1);
  CHECK(config.accelerators.empty());
  CHECK(config.dma.size() == 1);
  // 32 banks x 8 bytes x 512 words.
  CHECK(config.spm.capacity_bytes() == 131072);
  CHECK(config.spm.bank_width_bytes() == 8);
  CHECK(config.dma[0].beat_width_bytes() == 64);
}

TEST_CASE("two-core config attaches an accelerator and an engine per core") {
  ClusterConfig config = load_and_validate(test::config_path("gemm_pool.cfg"));
  REQUIRE(config.control_cores.size() == 2);
  const CoreConfig* core1 = config.find_core(1);
  REQUIRE(core1 != nullptr);
  CHECK(core1->accelerator_ids.size() == 1);
  CHECK(core1->dma_ids.size() == 1);
  CHECK(config.owner_core_of_accelerator(1) == 1);
  CHECK(config.owner_core_of_dma(0) == 0);
  CHECK(config.owner_core_of_dma(1) == 1);
  // gemm on core 0 with the canonical channel set
  const AcceleratorConfig* gemm = config.find_accelerator(0);
  REQUIRE(gemm != nullptr);
  CHECK(gemm->kind == AcceleratorKind::Gemm);
  CHECK(gemm->read_channel_indices().size() == 2);
  CHECK(gemm->write_channel_indices().size() == 1);
  CHECK(gemm->channels[2].width_bits == 2048);
}

TEST_CASE("channel width must divide into bank words") {
  std::string text = R"({
    "control_cores": [{ "id": 0, "accelerators": [0], "dma": [] }],
    "accelerators": [{
      "id": 0, "kind": "maxpool",
      "channels": [
        { "direction": "read",  "width_bits": 96, "fifo_depth": 8, "max_loop_depth": 8 },
        { "direction": "write", "width_bits": 96, "fifo_depth": 8, "max_loop_depth": 8 }
      ],
      "maxpool": { "lanes": 8 }
    }],
    "spm": { "num_banks": 32, "bank_width_bits": 64, "bank_depth_words": 512 }
  })";
  CHECK_THROWS_WITH_AS(parse_and_validate(text),
                       doctest::Contains("width not multiple of bank width"),
                       Error);
}

TEST_CASE("dangling accelerator reference is reported") {
  std::string text = R"({
    "control_cores": [{ "id": 0, "accelerators": [7], "dma": [] }],
    "accelerators": [],
    "spm": { "num_banks": 32, "bank_width_bits": 64, "bank_depth_words": 512 }
  })";
  try {
    parse_and_validate(text);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DanglingReference);
  }
}

TEST_CASE("device attached to two cores is rejected") {
  std::string text = R"({
    "control_cores": [
      { "id": 0, "accelerators": [], "dma": [0] },
      { "id": 1, "accelerators": [], "dma": [0] }
    ],
    "dma": [{ "id": 0, "beat_width_bits": 512 }],
    "spm": { "num_banks": 32, "bank_width_bits": 64, "bank_depth_words": 512 }
  })";
  try {
    parse_and_validate(text);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
}

TEST_CASE("unattached accelerator is rejected") {
  std::string text = R"({
    "control_cores": [{ "id": 0, "accelerators": [], "dma": [] }],
    "accelerators": [{
      "id": 0, "kind": "maxpool",
      "channels": [
        { "direction": "read",  "width_bits": 512, "fifo_depth": 8, "max_loop_depth": 8 },
        { "direction": "write", "width_bits": 512, "fifo_depth": 8, "max_loop_depth": 8 }
      ],
      "maxpool": { "lanes": 8 }
    }],
    "spm": { "num_banks": 32, "bank_width_bits": 64, "bank_depth_words": 512 }
  })";
  try {
    parse_and_validate(text);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
}

TEST_CASE("malformed text raises a parse error") {
  try {
    parse_and_validate("{ not json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
}

TEST_CASE("gemm channel widths must match tile shape") {
  // 2048-bit write channel shrunk to 512: Mu*Nu int32 no longer fits.
  std::string text = R"({
    "control_cores": [{ "id": 0, "accelerators": [0], "dma": [] }],
    "accelerators": [{
      "id": 0, "kind": "gemm",
      "channels": [
        { "direction": "read",  "width_bits": 512, "fifo_depth": 8, "max_loop_depth": 8 },
        { "direction": "read",  "width_bits": 512, "fifo_depth": 8, "max_loop_depth": 8 },
        { "direction": "write", "width_bits": 512, "fifo_depth": 8, "max_loop_depth": 8 }
      ],
      "gemm": { "Mu": 8, "Ku": 8, "Nu": 8 }
    }],
    "spm": { "num_banks": 32, "bank_width_bits": 64, "bank_depth_words": 512 }
  })";
  try {
    parse_and_validate(text);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
}

TEST_CASE("serialize then reload round-trips all three bundled configs") {
  for (const char* name : {"scalar.cfg", "gemm.cfg", "gemm_pool.cfg"}) {
    ClusterConfig original = load_and_validate(test::config_path(name));
    ClusterConfig reloaded = parse_and_validate(serialize(original));
    CHECK(reloaded == original);
  }
}
