// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "acsim/config.hpp"
#include "acsim/dtype.hpp"
#include "acsim/golden.hpp"

namespace acsim::kprog {

// One control program per core, in a line-oriented text format:
//
//   CORE <id>            start the section for a control core
//   CSRW <dev> <reg> <v> write device CSR (v may be negative: stored as
//                        32-bit two's complement, e.g. loop strides)
//   CSRR <dev> <reg>     read device CSR (result discarded; for timing)
//   WAIT <dev>           block until the device's busy flag clears
//   DMA <src> <dst> <row_bytes> <src_stride> <dst_stride> <rows>
//                        start the core's DMA engine (absolute addresses)
//   WDMA                 block until the core's DMA engine is idle
//   BAR <id>             block until every core whose program contains
//                        barrier <id> has arrived at it
//   EXEC matmul <M> <K> <N> <aT> <bT> <aAddr> <bAddr> <cAddr>
//   EXEC im2col <H> <W> <C> <kh> <kw> <inAddr> <outAddr>
//   EXEC maxpool <dt> <H> <W> <C> <k> <s> <inAddr> <outAddr>
//   EXEC eltwise <func> <n> <inT> <outT> <inAddr> <outAddr>
//                        run a kernel on the core's own scalar pipeline;
//                        blocks the core for the scalar cost model's cycles
//   TAG <name>           zero-cost label; attributes following work to a
//                        layer in the reports
//
// '#' starts a comment; numbers accept decimal or 0x-prefixed hex.

struct CsrWriteInstr {
  uint32_t device = 0;
  uint32_t reg = 0;
  uint32_t value = 0;
  bool operator==(const CsrWriteInstr&) const = default;
};

struct CsrReadInstr {
  uint32_t device = 0;
  uint32_t reg = 0;
  bool operator==(const CsrReadInstr&) const = default;
};

struct WaitDeviceInstr {
  uint32_t device = 0;
  bool operator==(const WaitDeviceInstr&) const = default;
};

struct DmaInstr {
  uint64_t src = 0;
  uint64_t dst = 0;
  uint32_t row_bytes = 0;
  int64_t src_stride = 0;
  int64_t dst_stride = 0;
  uint32_t rows = 0;
  bool operator==(const DmaInstr&) const = default;
};

struct WaitDmaInstr {
  bool operator==(const WaitDmaInstr&) const = default;
};

struct BarrierInstr {
  uint32_t id = 0;
  bool operator==(const BarrierInstr&) const = default;
};

struct ExecMatmul {
  uint32_t m = 0, k = 0, n = 0;
  DType a_type = DType::I8;
  DType b_type = DType::I8;
  uint64_t a_addr = 0, b_addr = 0, c_addr = 0;
  bool operator==(const ExecMatmul&) const = default;
};

struct ExecIm2col {
  uint32_t h = 0, w = 0, c = 0, kh = 0, kw = 0;
  uint64_t in_addr = 0, out_addr = 0;
  bool operator==(const ExecIm2col&) const = default;
};

struct ExecMaxPool {
  DType dtype = DType::I8;
  uint32_t h = 0, w = 0, c = 0, k = 0, s = 0;
  uint64_t in_addr = 0, out_addr = 0;
  bool operator==(const ExecMaxPool&) const = default;
};

struct ExecEltwise {
  golden::EltwiseFunc func = golden::EltwiseFunc::Identity;
  uint64_t elems = 0;
  DType in_type = DType::I32;
  DType out_type = DType::I32;
  uint64_t in_addr = 0, out_addr = 0;
  bool operator==(const ExecEltwise&) const = default;
};

struct TagInstr {
  std::string name;
  bool operator==(const TagInstr&) const = default;
};

using Instruction = std::variant<CsrWriteInstr, CsrReadInstr, WaitDeviceInstr, DmaInstr,
                                 WaitDmaInstr, BarrierInstr, ExecMatmul, ExecIm2col,
                                 ExecMaxPool, ExecEltwise, TagInstr>;

struct Program {
  std::map<uint32_t, std::vector<Instruction>> cores;
  bool operator==(const Program&) const = default;
};

Program parse_program(const std::string& text);
Program load_program(const std::string& path);
std::string serialize(const Program& program);
void save_program(const Program& program, const std::string& path);

// Static checks against a cluster description: referenced cores and devices
// exist, devices are controlled by the issuing core, DMA instructions are
// only issued by cores that own a DMA engine, and each barrier id occurs
// the same number of times in every program that mentions it.
void validate(const Program& program, const ClusterConfig& config);

std::string to_text(const Instruction& instr);

}  // namespace acsim::kprog
