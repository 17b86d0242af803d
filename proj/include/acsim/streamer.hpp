// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "acsim/config.hpp"
#include "acsim/tcdm.hpp"

namespace acsim {

// One hardware loop level: iterate `bound` times advancing the address by
// `stride` bytes per step.
struct LoopDim {
  uint32_t bound = 1;
  int64_t stride = 0;
  bool operator==(const LoopDim&) const = default;
};

// Affine nested-loop address pattern, outermost dimension first.  Generated
// addresses are base + sum_k i_k * stride_k for counters i in lexicographic
// order (innermost fastest).  An empty nest generates the single address
// `base`.
struct LoopNest {
  uint64_t base = 0;  // scratchpad-local byte offset
  std::vector<LoopDim> dims;

  uint64_t total_iterations() const {
    uint64_t total = 1;
    for (const LoopDim& dim : dims) total *= dim.bound;
    return total;
  }
  bool operator==(const LoopNest&) const = default;
};

// Pure enumeration of the nest's addresses (tests, validation tooling).
std::vector<uint64_t> address_sequence(const LoopNest& nest);

// Eagerly validates a nest against channel and scratchpad limits: depth,
// positive bounds, bank-word-aligned base/strides, and every generated
// address within [0, capacity - group_bytes].  The range check uses interval
// arithmetic (exact for affine nests), not enumeration.
void validate_nest(const LoopNest& nest, uint32_t group_bytes,
                   uint64_t capacity_bytes, uint32_t max_loop_depth,
                   uint32_t bank_word_bytes);

// O(depth) incremental cursor over a nest's address sequence.
class NestCursor {
 public:
  explicit NestCursor(const LoopNest& nest);

  bool done() const { return emitted_ == total_; }
  uint64_t emitted() const { return emitted_; }
  uint64_t total() const { return total_; }
  uint64_t address() const;  // pre: !done()
  void advance();            // pre: !done()

 private:
  LoopNest nest_;
  std::vector<uint32_t> counters_;
  int64_t addr_ = 0;
  uint64_t emitted_ = 0;
  uint64_t total_ = 1;
};

// One streamer channel: a hardware address generator plus a FIFO decoupling
// the scratchpad from the datapath.
//
// Read channels issue a request whenever a FIFO slot is free; granted data
// becomes visible to the datapath one cycle later (fill latency).  Write
// channels accept one group per cycle from the datapath and retire the FIFO
// head through the interconnect; a group pushed in cycle t issues its write
// no earlier than t+1.  Stalled requests are re-presented (valid-ready).
class StreamerChannel {
 public:
  StreamerChannel(const ChannelConfig& config, uint32_t tcdm_port,
                  std::string name);

  void launch(const LoopNest& nest, uint64_t cycle);
  bool launched() const { return launched_; }
  const std::string& name() const { return name_; }
  uint32_t group_bytes() const { return config_.width_bytes(); }
  ChannelDirection direction() const { return config_.direction; }

  // Engine side: the request to present this cycle, if any.
  std::optional<TcdmRequest> want_request(uint64_t cycle) const;
  // Feedback for the request returned by want_request this cycle.
  void on_grant_result(const TcdmOutcome& outcome, uint64_t cycle);

  // Datapath side (read channels).
  bool can_pop(uint64_t cycle) const;
  std::vector<uint8_t> pop(uint64_t cycle);

  // Datapath side (write channels).
  bool can_push() const;
  void push(std::vector<uint8_t> group);

  // All addresses issued and the FIFO fully drained/retired.
  bool idle() const;
  uint64_t groups_moved() const { return groups_moved_; }

 private:
  struct Slot {
    std::vector<uint8_t> data;
    uint64_t ready_cycle = 0;
  };

  ChannelConfig config_;
  uint32_t port_ = 0;
  std::string name_;
  bool launched_ = false;
  std::optional<NestCursor> cursor_;
  std::deque<Slot> fifo_;
  uint64_t groups_moved_ = 0;
};

}  // namespace acsim
