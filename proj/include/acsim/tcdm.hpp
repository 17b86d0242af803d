// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acsim/config.hpp"
#include "acsim/trace.hpp"

namespace acsim {

// One access presented to the interconnect for the current cycle.  Addresses
// are scratchpad-local byte offsets.  A request touches bytes/bank_word
// banks, consecutive modulo the bank count (a wide port is a bundle of
// bank-word lanes); it is granted atomically (all its banks or none).
struct TcdmRequest {
  uint32_t port = 0;
  bool is_write = false;
  uint64_t addr = 0;
  uint32_t bytes = 0;
  const uint8_t* write_data = nullptr;  // bytes of payload when is_write
};

struct TcdmOutcome {
  bool granted = false;
  std::vector<uint8_t> read_data;  // filled for granted reads
};

struct TcdmPortStats {
  uint64_t granted = 0;
  uint64_t stalled = 0;
  uint64_t bytes_read = 0;
  uint64_t bytes_written = 0;
};

// Multi-banked scratchpad plus its tightly coupled interconnect.
//
// Arbitration, per cycle: requests are served widest-port first; equal
// widths are ordered longest-stalled first, with the port index as the
// final deterministic tie-break.  A request is granted only if every bank
// it touches is still free under that order (all of its banks or none).
// A grant resets the winner's wait, so persistent equal-width contenders
// alternate, and no request waits more than the number of equal-width
// contenders (a persistent wider stream can starve narrower ports; that is
// the documented priority rule).  Reads observe memory as of cycle start;
// writes become visible next cycle.
class Tcdm {
 public:
  explicit Tcdm(const SpmConfig& spm, Trace* trace = nullptr);

  // Registers a requester; wider ports win contention.  Name is for traces.
  uint32_t add_port(uint32_t width_bits, std::string name);

  uint32_t bank_of(uint64_t addr) const;

  // Arbitrates and services one cycle's worth of requests (at most one per
  // port).  outcome[i] corresponds to requests[i].
  std::vector<TcdmOutcome> cycle(uint64_t cycle_no,
                                 const std::vector<TcdmRequest>& requests);

  // Direct functional access that bypasses arbitration and timing.  Used for
  // initial data placement, scalar-core kernels (whose memory cost is covered
  // by the abstract cost model), and result inspection.
  void peek(uint64_t addr, uint32_t bytes, uint8_t* out) const;
  void poke(uint64_t addr, uint32_t bytes, const uint8_t* data);

  uint64_t capacity_bytes() const { return mem_.size(); }
  uint32_t num_banks() const { return spm_.num_banks; }
  uint32_t bank_word_bytes() const { return spm_.bank_width_bytes(); }

  const TcdmPortStats& port_stats(uint32_t port) const;
  const std::string& port_name(uint32_t port) const;
  size_t num_ports() const { return ports_.size(); }
  // Total bank-slots granted over all cycles (for utilization metrics).
  uint64_t bank_busy_slots() const { return bank_busy_slots_; }

 private:
  struct Port {
    uint32_t width_bits = 0;
    std::string name;
    TcdmPortStats stats;
    // Consecutive cycles the port's current request has stalled; cleared on
    // grant or when the port withdraws (presents nothing).
    uint64_t stall_age = 0;
  };

  // Throws unless the request obeys alignment, range, width, and no-wrap
  // rules; returns {start_bank, bank_count}.
  std::pair<uint32_t, uint32_t> validate(const TcdmRequest& request) const;

  SpmConfig spm_;
  Trace* trace_ = nullptr;
  std::vector<uint8_t> mem_;
  std::vector<Port> ports_;
  uint64_t bank_busy_slots_ = 0;
};

}  // namespace acsim
