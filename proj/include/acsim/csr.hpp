// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "acsim/streamer.hpp"

namespace acsim::csr {

// Per-device CSR register map. Every accelerator exposes:
//   0             LAUNCH      write 1: commit the shadow set and start
//   1             STATUS      bit0 = busy, bit1 = a launch is queued
//   2             DONE_COUNT  completed task counter
//   8..15         kernel parameters (meaning depends on device kind)
//   16 + 18*i     stream channel i: BASE, DEPTH, then 8 x (BOUND, STRIDE)
//
// Parameter and channel writes land in a shadow set that does not disturb a
// running task; LAUNCH snapshots the shadow set. Strides are signed 32-bit
// byte offsets stored as two's complement; BASE is a byte offset into the
// shared scratchpad.

inline constexpr uint32_t kRegLaunch = 0;
inline constexpr uint32_t kRegStatus = 1;
inline constexpr uint32_t kRegDoneCount = 2;
inline constexpr uint32_t kRegParam0 = 8;
inline constexpr uint32_t kNumParams = 8;
inline constexpr uint32_t kRegChannelBase = 16;
inline constexpr uint32_t kRegsPerChannel = 2 + 2 * kMaxLoopDepthLimit;

inline constexpr uint32_t kStatusBusyBit = 1u << 0;
inline constexpr uint32_t kStatusQueuedBit = 1u << 1;

// Matrix unit parameters (padded problem dims in elements).
inline constexpr uint32_t kRegGemmM = kRegParam0 + 0;
inline constexpr uint32_t kRegGemmK = kRegParam0 + 1;
inline constexpr uint32_t kRegGemmN = kRegParam0 + 2;

// Pooling unit parameters.
inline constexpr uint32_t kRegPoolElemSize = kRegParam0 + 0;  // bytes per element (1 or 4)
inline constexpr uint32_t kRegPoolWin = kRegParam0 + 1;       // vertical taps per window
inline constexpr uint32_t kRegPoolOutGroups = kRegParam0 + 2;  // output groups to produce

inline constexpr uint32_t file_size(uint32_t num_channels) {
  return kRegChannelBase + kRegsPerChannel * num_channels;
}

inline constexpr uint32_t channel_base(uint32_t channel_idx) {
  return kRegChannelBase + kRegsPerChannel * channel_idx;
}

// (reg, value) pairs that program `nest` into channel `channel_idx`; the
// compiler emits these as CSRW instructions and the device decodes the same
// layout back at launch.
std::vector<std::pair<uint32_t, uint32_t>> encode_channel(uint32_t channel_idx,
                                                          const LoopNest& nest);

LoopNest decode_channel(const std::vector<uint32_t>& regs, uint32_t channel_idx);

}  // namespace acsim::csr
