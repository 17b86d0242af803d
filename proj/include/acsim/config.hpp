// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace acsim {

// ---------------------------------------------------------------------------
// Address map.  The scratchpad and the external memory live in disjoint
// windows of one flat address space so that DMA descriptors and control
// programs can name either side unambiguously.
// ---------------------------------------------------------------------------
inline constexpr uint64_t kSpmBase = 0x1000'0000;
inline constexpr uint64_t kExtBase = 0x8000'0000;
inline constexpr uint64_t kExtSize = 0x4000'0000;  // 1 GiB staging window

// Deepest loop nest a streamer register file can describe.  The CSR layout
// reserves a fixed block per channel, so this is a hard design-time ceiling
// rather than a tunable.
inline constexpr uint32_t kMaxLoopDepthLimit = 8;

enum class ChannelDirection { Read, Write };

struct ChannelConfig {
  ChannelDirection direction = ChannelDirection::Read;
  uint32_t width_bits = 512;
  uint32_t fifo_depth = 8;
  uint32_t max_loop_depth = 8;

  uint32_t width_bytes() const { return width_bits / 8; }
  bool operator==(const ChannelConfig&) const = default;
};

enum class AcceleratorKind { Gemm, MaxPool };

struct GemmParams {
  // Systolic tile dimensions: one cycle consumes an Mu x Ku operand block and
  // a Ku x Nu operand block and accumulates an Mu x Nu partial tile.
  uint32_t mu = 8;
  uint32_t ku = 8;
  uint32_t nu = 8;
  bool operator==(const GemmParams&) const = default;
};

struct MaxPoolParams {
  uint32_t lanes = 8;  // parallel pooling kernels working on one input group
  bool operator==(const MaxPoolParams&) const = default;
};

struct AcceleratorConfig {
  uint32_t id = 0;
  AcceleratorKind kind = AcceleratorKind::Gemm;
  std::vector<ChannelConfig> channels;
  GemmParams gemm;
  MaxPoolParams maxpool;

  std::vector<uint32_t> read_channel_indices() const;
  std::vector<uint32_t> write_channel_indices() const;
  bool operator==(const AcceleratorConfig&) const = default;
};

struct CoreConfig {
  uint32_t id = 0;
  std::vector<uint32_t> accelerator_ids;
  std::vector<uint32_t> dma_ids;
  bool operator==(const CoreConfig&) const = default;
};

struct SpmConfig {
  uint32_t num_banks = 32;
  uint32_t bank_width_bits = 64;
  uint32_t bank_depth_words = 512;

  uint32_t bank_width_bytes() const { return bank_width_bits / 8; }
  uint64_t capacity_bytes() const {
    return uint64_t(num_banks) * bank_width_bytes() * bank_depth_words;
  }
  bool operator==(const SpmConfig&) const = default;
};

struct DmaConfig {
  uint32_t id = 0;
  uint32_t beat_width_bits = 512;

  uint32_t beat_width_bytes() const { return beat_width_bits / 8; }
  bool operator==(const DmaConfig&) const = default;
};

struct ExternalChannelConfig {
  uint32_t bandwidth_bytes_per_cycle = 64;
  bool operator==(const ExternalChannelConfig&) const = default;
};

struct ScalarCostModel {
  // Abstract per-op costs of running a kernel on the control core itself
  // instead of an accelerator.  Fractional values model packed-SIMD issue:
  // a MAC is two ops, an elementwise op one, on an 8-lane unit.
  double cycles_per_mac = 0.25;
  double cycles_per_elementwise_op = 0.125;
  bool operator==(const ScalarCostModel&) const = default;
};

struct ClusterConfig {
  std::vector<CoreConfig> control_cores;
  std::vector<AcceleratorConfig> accelerators;
  SpmConfig spm;
  std::vector<DmaConfig> dma;
  ExternalChannelConfig external_channel;
  ScalarCostModel scalar_cost_model;

  const AcceleratorConfig* find_accelerator(uint32_t id) const;
  const DmaConfig* find_dma(uint32_t id) const;
  const CoreConfig* find_core(uint32_t id) const;
  // Core that owns the given device (validated to be unique).
  uint32_t owner_core_of_accelerator(uint32_t id) const;
  uint32_t owner_core_of_dma(uint32_t id) const;
  bool operator==(const ClusterConfig&) const = default;
};

// Parses and validates a configuration file (JSON tree, keys documented in
// README).  Throws Error{ParseError|ValidationError|DanglingReference}.
ClusterConfig load_and_validate(const std::string& path);

// Same, from an in-memory string (used by tests and bundled defaults).
ClusterConfig parse_and_validate(const std::string& text);

// Validates an already-built config; load/parse call this internally.
void validate(const ClusterConfig& config);

// Serializes to the same JSON layout accepted by the loaders (round-trips).
std::string serialize(const ClusterConfig& config);

}  // namespace acsim
