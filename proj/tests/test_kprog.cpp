// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/kprog.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace acsim;

static const char* kSample = R"(# two-core sample
CORE 0
  TAG conv
  CSRW 0 8 256        # rows
  CSRW 0 17 -8        # negative stride round-trips
  CSRW 0 0 1
  WAIT 0
  EXEC eltwise relu 2048 i32 i32 0x10000000 0x10002000
  BAR 0
CORE 1
  DMA 0x80000000 0x10000000 64 64 64 16
  WDMA
  EXEC matmul 1 512 2 i32 i8 0x10000000 0x10004000 0x10005000
  EXEC maxpool i32 16 16 8 2 2 0x10000000 0x10008000
  EXEC im2col 4 4 2 3 3 0x10000000 0x10000100
  CSRR 1 1
  BAR 0
)";

TEST_CASE("program parses and round-trips through text") {
  auto prog = kprog::parse_program(kSample);
  REQUIRE(prog.cores.size() == 2);
  REQUIRE(prog.cores.at(0).size() == 7);
  REQUIRE(prog.cores.at(1).size() == 7);

  CHECK(std::get<kprog::TagInstr>(prog.cores.at(0)[0]).name == "conv");
  auto w = std::get<kprog::CsrWriteInstr>(prog.cores.at(0)[2]);
  CHECK(w.value == static_cast<uint32_t>(-8));
  auto d = std::get<kprog::DmaInstr>(prog.cores.at(1)[0]);
  CHECK(d.src == 0x80000000u);
  CHECK(d.rows == 16);
  auto mm = std::get<kprog::ExecMatmul>(prog.cores.at(1)[2]);
  CHECK(mm.k == 512);
  CHECK(mm.a_type == DType::I32);

  auto reparsed = kprog::parse_program(kprog::serialize(prog));
  CHECK(reparsed == prog);
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(kprog::parse_program("CSRW 0 0 1\n"),
                       doctest::Contains("before any CORE"), Error);
  CHECK_THROWS_WITH_AS(kprog::parse_program("CORE 0\nFROB 1\n"),
                       doctest::Contains("line 2"), Error);
  CHECK_THROWS_WITH_AS(kprog::parse_program("CORE 0\nCSRW 0 1\n"),
                       doctest::Contains("expects 3 arguments"), Error);
  CHECK_THROWS_WITH_AS(kprog::parse_program("CORE 0\nEXEC warp 1\n"),
                       doctest::Contains("kernel kind"), Error);
  CHECK_THROWS_WITH_AS(kprog::parse_program("CORE 0\nWAIT zero\n"),
                       doctest::Contains("expected"), Error);
  CHECK_THROWS_WITH_AS(kprog::parse_program("CORE 0\nCORE 0\n"),
                       doctest::Contains("duplicate"), Error);
}

TEST_CASE("validation against a cluster description") {
  auto config = load_and_validate(test::config_path("gemm_pool.cfg"));

  // gemm_pool: core 0 controls device 0 (gemm) and engine 0; core 1
  // controls device 1 (maxpool) and engine 1.
  auto ok = kprog::parse_program(R"(
CORE 0
  CSRW 0 0 1
  WAIT 0
  BAR 3
CORE 1
  CSRW 1 0 1
  DMA 0x80000000 0x10000000 64 0 0 1
  WDMA
  BAR 3
)");
  CHECK_NOTHROW(kprog::validate(ok, config));

  // Core 0 does not control the maxpool device.
  auto wrong_owner = kprog::parse_program("CORE 0\n WAIT 1\n");
  CHECK_THROWS_AS(kprog::validate(wrong_owner, config), Error);

  // A core with no DMA engine may not issue descriptors.
  auto engineless = config;
  engineless.control_cores[0].dma_ids.clear();
  engineless.dma.erase(engineless.dma.begin());
  auto no_dma = kprog::parse_program("CORE 0\n DMA 0x80000000 0x10000000 8 0 0 1\n");
  CHECK_THROWS_AS(kprog::validate(no_dma, engineless), Error);

  // Unknown core and device ids.
  CHECK_THROWS_AS(kprog::validate(kprog::parse_program("CORE 9\n WDMA\n"), config), Error);
  CHECK_THROWS_AS(kprog::validate(kprog::parse_program("CORE 0\n WAIT 7\n"), config), Error);

  // Mismatched barrier counts.
  auto bar_bad = kprog::parse_program("CORE 0\n BAR 1\n BAR 1\nCORE 1\n BAR 1\n");
  CHECK_THROWS_AS(kprog::validate(bar_bad, config), Error);
}
