// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "acsim/config.hpp"
#include "acsim/csr.hpp"
#include "acsim/metrics.hpp"
#include "acsim/streamer.hpp"
#include "acsim/tcdm.hpp"
#include "acsim/trace.hpp"

namespace acsim {

// Common CSR-programmed accelerator shell: a shadow register set written by
// the control core, a one-deep launch queue, and streamer channels into the
// shared scratchpad. Timeline (cycle t):
//   - a CSR write at t lands in the shadow set at t;
//   - a LAUNCH write at t commits at t+1 (task busy from t+1) if the device
//     is idle, otherwise it stays queued and commits the cycle after the
//     running task completes (zero idle cycles between tasks);
//   - a second LAUNCH while one is already queued stalls the writer;
//   - WAIT/STATUS see the device busy while running or queued.
class AcceleratorDevice {
 public:
  AcceleratorDevice(const AcceleratorConfig& config, const SpmConfig& spm, Tcdm& tcdm,
                    Trace* trace);
  virtual ~AcceleratorDevice() = default;

  static std::unique_ptr<AcceleratorDevice> create(const AcceleratorConfig& config,
                                                   const SpmConfig& spm, Tcdm& tcdm,
                                                   Trace* trace);

  uint32_t id() const { return config_.id; }
  const std::string& name() const { return name_; }
  const AcceleratorConfig& config() const { return config_; }
  void set_recorder(TaskRecorder recorder) { recorder_ = std::move(recorder); }

  // Control-core side.
  bool write_csr(uint32_t reg, uint32_t value, uint64_t cycle, const std::string& tag);
  uint32_t read_csr(uint32_t reg) const;
  bool busy_visible() const { return running_ || queued_.has_value(); }
  uint64_t done_count() const { return done_count_; }

  // Engine phases.
  void activate_phase(uint64_t cycle);
  std::vector<StreamerChannel>& channels() { return channels_; }
  virtual void datapath_phase(uint64_t cycle) = 0;

 protected:
  // Decode + validate the active register set and launch the channels.
  // Throws ProgramFault on an invalid task.
  virtual void decode_task(uint64_t cycle) = 0;

  LoopNest decode_validated_nest(uint32_t channel_idx) const;
  void complete_task(uint64_t cycle);

  AcceleratorConfig config_;
  SpmConfig spm_;
  std::string name_;
  Trace* trace_ = nullptr;
  TaskRecorder recorder_;
  std::vector<StreamerChannel> channels_;

  std::vector<uint32_t> shadow_;
  std::vector<uint32_t> active_;
  struct QueuedLaunch {
    std::vector<uint32_t> regs;
    uint64_t at_cycle = 0;
    std::string tag;
  };
  std::optional<QueuedLaunch> queued_;
  bool running_ = false;
  uint64_t start_cycle_ = 0;
  uint64_t done_count_ = 0;
  TaskRecord record_;  // template for the task in flight
};

// Output-stationary matrix-multiply unit on an 8x8x8 tile datapath. Streams
// one 64-byte A block and one 64-byte B block per cycle, accumulates a
// 32-bit 8x8 output tile over ceil(K/8) steps, and emits it as one 256-byte
// group on the write channel. Tile order follows the streams: output column
// blocks outermost, row blocks next, K innermost.
class GemmDevice : public AcceleratorDevice {
 public:
  using AcceleratorDevice::AcceleratorDevice;
  void datapath_phase(uint64_t cycle) override;

 protected:
  void decode_task(uint64_t cycle) override;

 private:
  uint32_t t_ = 1;         // K tiles per output tile
  uint64_t tiles_ = 0;     // total unit tiles = cm * cn * t
  uint64_t consumed_ = 0;  // unit tiles consumed
  uint32_t tk_ = 0;
  std::array<int32_t, 64> acc_{};
};

// Pooling unit: consumes one 64-byte input group per cycle, reduces each
// adjacent pixel pair with an elementwise max (the horizontal stride-2
// window), keeps a running max across `win` vertical taps, and packs two
// reduced 32-byte halves into each 64-byte output group.
class MaxPoolDevice : public AcceleratorDevice {
 public:
  using AcceleratorDevice::AcceleratorDevice;
  void datapath_phase(uint64_t cycle) override;

 protected:
  void decode_task(uint64_t cycle) override;

 private:
  uint32_t elem_size_ = 1;
  uint32_t win_ = 1;
  uint64_t out_groups_ = 0;
  uint64_t in_total_ = 0;
  uint64_t consumed_ = 0;
  uint64_t produced_ = 0;
  uint32_t dy_ = 0;
  uint32_t slot_ = 0;
  std::array<uint8_t, 32> slot_acc_{};
  std::array<uint8_t, 64> out_buf_{};
};

}  // namespace acsim
