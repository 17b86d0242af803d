// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>

#include "acsim/config.hpp"
#include "acsim/external_memory.hpp"
#include "acsim/kprog.hpp"
#include "acsim/metrics.hpp"
#include "acsim/tcdm.hpp"
#include "acsim/trace.hpp"

namespace acsim {

// 2D-strided transfer engine between external memory and the scratchpad.
// One outstanding descriptor; a transfer costs 4 descriptor-setup cycles
// and then one scratchpad access per beat (beats split each row into
// chunks of at most one port width). The external channel sustains
// `bandwidth_bytes_per_cycle`, so a beat occupies it for
// ceil(beat_bytes / bandwidth) cycles; scratchpad-side beats also contend
// with the streamers through normal arbitration.
class DmaEngine {
 public:
  DmaEngine(const DmaConfig& config, const ExternalChannelConfig& ext_config,
            const SpmConfig& spm, Tcdm& tcdm, ExternalMemory& ext, Trace* trace);

  uint32_t id() const { return config_.id; }
  const std::string& name() const { return name_; }
  void set_recorder(TaskRecorder recorder) { recorder_ = std::move(recorder); }

  bool busy_visible() const { return active_; }
  uint64_t done_count() const { return done_count_; }

  // Sequencer side: validates the descriptor (InvalidDescriptor on a bad
  // one) and accepts it. Pre: !busy_visible().
  void start(const kprog::DmaInstr& instr, uint64_t cycle, const std::string& tag);

  // Engine phases.
  std::optional<TcdmRequest> want_request(uint64_t cycle);
  void on_grant_result(const TcdmOutcome& outcome, uint64_t cycle);

 private:
  struct Beat {
    uint64_t spm_addr = 0;  // scratchpad-local
    uint64_t ext_addr = 0;  // absolute
    uint32_t bytes = 0;
  };

  DmaConfig config_;
  ExternalChannelConfig ext_config_;
  SpmConfig spm_;
  Tcdm& tcdm_;
  ExternalMemory& ext_;
  Trace* trace_ = nullptr;
  TaskRecorder recorder_;
  std::string name_;
  uint32_t port_ = 0;

  bool active_ = false;
  bool to_spm_ = false;       // transfer direction
  uint64_t active_from_ = 0;  // first busy cycle (after the start instruction)
  uint32_t setup_remaining_ = 0;
  std::deque<Beat> beats_;
  uint64_t ext_busy_until_ = 0;  // external channel occupied through this cycle
  std::vector<uint8_t> beat_buf_;
  uint64_t done_count_ = 0;
  TaskRecord record_;
};

}  // namespace acsim
