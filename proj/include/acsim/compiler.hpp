// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acsim/config.hpp"
#include "acsim/kprog.hpp"
#include "acsim/workload.hpp"

namespace acsim::compiler {

// Lowers a workload graph onto a cluster: places each node on the cheapest
// supporting device, allocates scratchpad buffers and external slots, builds
// either a sequential or a software-pipelined schedule, and emits one control
// program per core plus the initial memory images.

enum class ScheduleMode { Sequential, Pipelined };

std::string to_string(ScheduleMode mode);

// ---------------------------------------------------------------------------
// Matmul tiling.

struct TileChoice {
  uint32_t mt = 0, kt = 0, nt = 0;
};

// Largest-volume tile (lexicographic tie-break on kt then mt) whose double
// buffered working set A + B + C fits in half the scratchpad.  Tile dims are
// multiples of the 8x8x8 unit tile, capped at the rounded-up problem dims.
// Throws CapacityExceeded when not even a unit tile fits.
TileChoice tile_matmul(uint32_t m, uint32_t k, uint32_t n, uint64_t spm_capacity_bytes);

// Arithmetic intensity of an M x K x N int8 matmul against external memory:
// 2*M*K*N ops over the unique operand plus result bytes.
double matmul_intensity(uint32_t m, uint32_t k, uint32_t n);

// ---------------------------------------------------------------------------
// Blocked operand layouts for the matrix unit.  One read channel grant is a
// contiguous 64-byte 8x8 int8 block; the write channel emits 256-byte 8x8
// int32 blocks.  A blocks are laid out [m-tile][k-tile] row major, B blocks
// [k-tile][n-tile], C blocks [n-tile][m-tile].  Ragged edges pad with zeros.

std::vector<uint8_t> pack_blocked_a(const std::vector<int8_t>& a, uint32_t m, uint32_t k);
std::vector<uint8_t> pack_blocked_b(const std::vector<int8_t>& b, uint32_t k, uint32_t n);
std::vector<int32_t> unpack_blocked_c(const std::vector<uint8_t>& raw, uint32_t m, uint32_t n);

// CSR write sequence (dims, channel nests, launch) running one M x K x N
// matmul on accelerator `device_id` over blocked buffers at the given
// scratchpad offsets.
std::vector<kprog::Instruction> gemm_launch_instrs(uint32_t device_id, uint32_t m, uint32_t k,
                                                   uint32_t n, uint64_t a_off, uint64_t b_off,
                                                   uint64_t c_off);

// ---------------------------------------------------------------------------
// Whole-graph compilation.

struct CompileOptions {
  ScheduleMode mode = ScheduleMode::Sequential;
  uint32_t batch = 1;
};

// Where an externally homed tensor lives in external memory: iteration i of
// an iterated tensor sits at addr + i * stride, constants have one copy.
struct ExtSlotInfo {
  std::string tensor;
  uint64_t addr = 0;
  uint64_t stride = 0;
  uint32_t copies = 1;
};

struct CompiledBundle {
  kprog::Program program;
  std::vector<uint8_t> external_image;  // initial contents, based at the external window
  std::vector<uint8_t> spm_image;       // initial scratchpad contents
  std::vector<ExtSlotInfo> ext_slots;
  uint32_t batch = 1;
  ScheduleMode mode = ScheduleMode::Sequential;
  std::string report_json;  // placement, allocation and schedule summary
};

CompiledBundle compile(const Workload& workload, const ClusterConfig& config,
                       const CompileOptions& options);

const ExtSlotInfo* find_slot(const CompiledBundle& bundle, const std::string& tensor);

}  // namespace acsim::compiler
